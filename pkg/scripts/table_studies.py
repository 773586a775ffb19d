"""Parameter studies on the circular disk: interface width, gamma, sigma and noise.

Usage::

    python scripts/table_studies.py width --out-dir runs/width [--hbar 0.0125]

Each study writes ``study_<name>.csv`` and ``summary.json`` through the
``param-study`` command.
"""
import argparse
import json
import sys

from pftomo.cli import main

STUDIES = {
    # misfits here are ~1e-3 of the objective: run to a tight stationarity
    "width": ["model.gamma=1e-4", "descent.tol=1e-16", "study.values=[4, 6, 8, 10, 12, 14]"],
    "gamma": ["descent.tol=1e-16", "study.values=[1.0, 0.1, 0.01, 0.001, 0.0001]"],
    "sigma": ["study.values=[1e-4, 2e-4, 4e-4, 8e-4, 1.6e-3]"],
    # pairs of (nu, sigma_bar); sigma = sigma_bar / nu^2
    "noise": ["study.values=" + json.dumps([[nu, sb] for sb in (1e-3, 2e-3, 4e-3)
                                            for nu in (5e-3, 1e-2, 2e-2)]),
              "study.seeds=[0, 1, 2]"],
}


def build_args(study, out_dir, hbar, extra):
    sets = ["scenario=disk_study", f"study.vary={study}", f"grid.hbar={hbar}"] + STUDIES[study] + extra
    return ["param-study", "--out-dir", out_dir, "-v"] + [a for s in sets for a in ("--set", s)]


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("study", choices=sorted(STUDIES))
    ap.add_argument("--out-dir", default=None)
    ap.add_argument("--hbar", type=float, default=1 / 80)
    ap.add_argument("--set", dest="extra", action="append", default=[], metavar="KEY=VALUE")
    a = ap.parse_args()
    sys.exit(main(build_args(a.study, a.out_dir or f"runs/{a.study}", a.hbar, a.extra)))
