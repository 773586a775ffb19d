"""Command-line driver: ``pftomo <command> --config FILE --out-dir DIR --set key=value``.

Exit status is 0 on success, 2 for configuration or compatibility errors and
3 for numerical failures.  A run that stalls still exits 0; the reason is
recorded in ``summary.json``.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import driver
from .adjoint import AdjointError
from .config import ConfigError, RunConfig, load
from .eikonal import EikonalError
from .fem import FEMError
from .grid import GridError
from .inversion import CompatibilityError
from .phase_field import FeasibilityError
from .profile import delta_residual, epsilon_for_width, profile_data
from .scenarios import ObservationSet, ScenarioError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("pftomo")


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o).__name__}")


def cmd_forward(cfg: RunConfig, out: Path) -> dict:
    if cfg.forward.source is None:
        raise ConfigError("forward.source: required for the forward command")
    summary = {"config": cfg.to_dict(), "fields": []}
    ratios = cfg.forward.contrast_ratios
    runs = [(None, "T.csv")] if ratios is None else [
        (r, f"T_ratio_{r:g}.csv") for r in ratios]
    smin = cfg.truth_field().smin
    for ratio, name in runs:
        smax = None if ratio is None else smin * (1.0 + ratio)
        grid, tt = driver.forward_field(cfg, smax)
        driver.write_field_csv(out / name, grid.coords, tt.values)
        k = int(np.argmax(tt.values))
        summary["fields"].append({
            "file": name,
            "contrast_ratio": ratio,
            "smax": cfg.truth_field().smax if smax is None else smax,
            "max_time": float(tt.values[k]),
            "argmax": grid.coords[k].tolist(),
            "max_on_boundary": bool(grid.boundary_mask[k]),
        })
    _dump_json(out / "summary.json", summary)
    return summary


def cmd_gen_data(cfg: RunConfig, out: Path) -> dict:
    obs = driver.generate(cfg)
    obs.dump(out / "obs.json")
    summary = {"config": cfg.to_dict(), "sources": len(obs.observations),
               "receivers": [len(o.times) for o in obs.observations],
               "refine": obs.refine, "nu": obs.nu, "seed": obs.seed}
    _dump_json(out / "summary.json", summary)
    return summary


def _load_or_generate(cfg: RunConfig, obs_path) -> ObservationSet:
    if obs_path is None:
        return driver.generate(cfg)
    try:
        return ObservationSet.load(obs_path)
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"{obs_path}: cannot read observations ({exc})") from None


def cmd_invert(cfg: RunConfig, out: Path, obs_path=None) -> dict:
    obs = _load_or_generate(cfg, obs_path)
    outcome = driver.invert(cfg, obs)
    p, res = outcome.problem, outcome.result
    nodes = p.mesh.nodes
    driver.write_field_csv(out / "u.csv", nodes, res.state.u)
    driver.write_field_csv(out / "w.csv", nodes, res.state.w)
    driver.write_field_csv(out / "s.csv", p.grid.coords, res.evaluation.s)
    driver.write_history_csv(out / "history.csv", res.history)
    summary = {"config": cfg.to_dict(), "observations": obs_path and str(obs_path), **outcome.summary}
    _dump_json(out / "summary.json", summary)
    return summary


def cmd_profile(cfg: RunConfig, out: Path) -> dict:
    pd = profile_data(cfg.model.gamma)
    rec = {
        "gamma": pd.gamma,
        "lambda1": pd.lam1,
        "lambda2": pd.lam2,
        "delta": pd.delta,
        "delta_residual": delta_residual(pd.gamma, pd.delta),
        "P": pd.energy,
        "hbar": cfg.grid.hbar,
        "width": cfg.model.width,
        "eps": cfg.eps,
    }
    if cfg.model.width is not None:
        rec["eps_check"] = epsilon_for_width(cfg.model.width, cfg.grid.hbar, pd.gamma)
    _dump_json(out / "profile.json", rec)
    return rec


def _study_configs(cfg: RunConfig):
    st = cfg.study
    for value in st.values:
        m = cfg.model
        if st.vary == "width":
            yield value, None, replace(cfg, model=replace(m, width=float(value), eps=None))
        elif st.vary == "gamma":
            yield value, None, replace(cfg, model=replace(m, gamma=float(value)))
        elif st.vary == "sigma":
            yield value, None, replace(cfg, model=replace(m, sigma=float(value)))
        else:  # noise: value is nu or [nu, sigma_bar]
            nu, sbar = (value, m.sigma) if not isinstance(value, (list, tuple)) else value
            for seed in st.seeds:
                c = replace(cfg, model=replace(m, sigma=float(sbar)),
                            data=replace(cfg.data, nu=float(nu), seed=int(seed)))
                yield value, seed, c


def cmd_param_study(cfg: RunConfig, out: Path) -> list[dict]:
    st = cfg.study
    if st.vary is None or not st.values:
        raise ConfigError("study: set study.vary and a non-empty study.values")
    shared = None if st.vary == "noise" else driver.generate(cfg)
    rows = []
    for value, seed, c in _study_configs(cfg):
        obs = shared if shared is not None else driver.generate(c)
        s = driver.invert(c, obs).summary
        row = {
            st.vary: value if not isinstance(value, (list, tuple)) else value[0],
            "sigma": c.model.sigma,
            "seed": c.data.seed,
            "misfit": s["misfit"],
            "sigma_J": s["regularizer"],
            "sigma_J_over_P": s["sigma_J_over_P"],
            "objective": s["objective"],
            "objective_over_P": s["objective_over_P"],
            "perimeter": s["perimeter"],
            "perimeter_error": s.get("perimeter_error", math.nan),
            "misclassified_fraction": s.get("misclassified_fraction", math.nan),
            "eps": s["eps"],
            "iterations": s["iterations"],
            "reason": s["reason"],
        }
        rows.append(row)
        log.info("%s=%s done: objective %.6e perimeter %.6f (%s)", st.vary, value,
                 row["objective"], row["perimeter"], row["reason"])
    driver.write_table_csv(out / f"study_{st.vary}.csv", rows)
    _dump_json(out / "summary.json", {"config": cfg.to_dict(), "rows": rows})
    return rows


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pftomo", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("forward", "gen-data", "invert", "profile", "param-study"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON configuration file")
        sp.add_argument("--out-dir", default=".", help="output directory (created if missing)")
        sp.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a configuration field, e.g. model.sigma=1e-3")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "invert":
            sp.add_argument("--obs", help="observations file from gen-data (default: generate)")
    return ap


COMMANDS = {
    "forward": cmd_forward,
    "gen-data": cmd_gen_data,
    "profile": cmd_profile,
    "param-study": cmd_param_study,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load(args.config, args.overrides)
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "invert":
            result = cmd_invert(cfg, out, args.obs)
        else:
            result = COMMANDS[args.command](cfg, out)
    except (ConfigError, CompatibilityError, GridError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EikonalError, AdjointError, FEMError, FeasibilityError, FloatingPointError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.command == "profile":
        print(json.dumps(result, indent=1))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
