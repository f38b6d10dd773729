"""Numerical experiments for Fourier extension from curves, restricted to
lines and strips, with Perron-tree and Khintchine lower-bound constructions."""

__version__ = "0.1.0"

from .core import CurveSpec, ExponentPair, LineSpec, RectSpec, StripSpec, unit_circle_arc
from .extremals import TestFunction
from .operators import FieldEvaluator, eval_extension, eval_T
from .radon_strip import radon_power, strip_norm
from .scaling import classify_region, fit_exponent

__all__ = ["CurveSpec", "ExponentPair", "LineSpec", "RectSpec", "StripSpec", "TestFunction",
           "FieldEvaluator", "classify_region", "eval_T", "eval_extension", "fit_exponent",
           "radon_power", "strip_norm", "unit_circle_arc", "__version__"]
