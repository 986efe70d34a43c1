"""Unified transform method for half-line fractional evolution equations."""
import os as _os

if _os.environ.get("FRACUTM_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["FRACUTM_THREADS"])

from . import errors, fraccalc, symbolgeo, transforms, utm
from .kernels import BACKEND
from .utm import ContourParams, ProblemSpec, SolutionField, solve

__all__ = ["errors", "fraccalc", "symbolgeo", "transforms", "utm", "BACKEND",
           "ContourParams", "ProblemSpec", "SolutionField", "solve"]
__version__ = "0.1.0"
