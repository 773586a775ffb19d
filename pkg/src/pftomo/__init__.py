"""Binary slowness recovery for first-arrival traveltime tomography."""

__version__ = "0.1.0"
