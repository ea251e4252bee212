"""Bundled example data."""

from importlib import resources

from .io import read_csv_dataset

__all__ = ["mccool_path", "load_mccool"]


def mccool_path():
    return resources.files("skewbs") / "data" / "mccool.csv"


def load_mccool():
    """McCool rolling-contact fatigue data as ``log(T) ~ 1 + log(stress)`` (n=40, p=2)."""
    with resources.as_file(mccool_path()) as path:
        return read_csv_dataset(
            path,
            response="T",
            covariates=["stress"],
            log_response=True,
            log_covariates=["stress"],
            intercept=True,
        )
