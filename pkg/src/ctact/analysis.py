"""Accuracy analysis: error metrics, the balanced threshold, sensitivity sweeps.

All statistics are computed in double precision: binary32 outputs are
widened before differencing, squared errors are reduced with numpy's
pairwise summation over the full grid array (a fixed partition scheme, so
results are bit-reproducible run to run), and the reported MSE/RMSE/max-abs
are doubles.

The tanh saturation threshold is not a tuned constant: it is the point
where the rational core's approximation error meets the saturation error
1 - tanh(t), solved by bisection on the double-precision rational.  The
gelu and swish thresholds are empirical; threshold_sweep reproduces the
max-abs-error curves that justify them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .activations import (
    ActivationKind,
    _gelu_core,
    _sigmoid_core,
    _swish_core,
    _tanh_core,
    gelu_ref,
    sigmoid_ref,
    swish_ref,
    tanh_ref,
)
from .grids import inclusive_grid
from .pade import DENOMINATOR_EXACT, NUMERATOR_EXACT

__all__ = [
    "ErrorReport",
    "ThresholdSolution",
    "error_metrics",
    "solve_tanh_threshold",
    "balancing_errors",
    "threshold_sweep",
]

_P64 = tuple(float(c) for c in NUMERATOR_EXACT)
_Q64 = tuple(float(c) for c in DENOMINATOR_EXACT)

_CORES = {
    ActivationKind.SIGMOID: _sigmoid_core,
    ActivationKind.TANH: _tanh_core,
    ActivationKind.GELU: _gelu_core,
    ActivationKind.SWISH: _swish_core,
}
_REFS = {
    ActivationKind.SIGMOID: sigmoid_ref,
    ActivationKind.TANH: tanh_ref,
    ActivationKind.GELU: gelu_ref,
    ActivationKind.SWISH: swish_ref,
}

_SWEEPABLE = (ActivationKind.GELU, ActivationKind.SWISH)


@dataclass(frozen=True)
class ErrorReport:
    """Accuracy of one protected activation against its libm reference."""

    kind: ActivationKind
    lo: float
    hi: float
    step: float
    n_points: int
    mse: float
    rmse: float
    max_abs: float
    argmax_input: float


@dataclass(frozen=True)
class ThresholdSolution:
    threshold: float
    residual: float
    iterations: int


def error_metrics(kind, lo: float, hi: float, step: float) -> ErrorReport:
    """MSE, RMSE and max-abs error of a protected kernel over a grid.

    relu is rejected: it is exact by construction (a bit-equality check, not
    an approximation error, is the meaningful statement about it).
    """
    kind = ActivationKind(kind)
    if kind == ActivationKind.RELU:
        raise ValueError(
            "relu carries no approximation error; verify bit-exactness instead"
        )
    grid = inclusive_grid(lo, hi, step)
    protected = _CORES[kind](grid).astype(np.float64)
    reference = np.array([_REFS[kind](x) for x in grid], dtype=np.float64)
    diff = protected - reference
    mse = float(np.mean(diff * diff))
    abs_diff = np.abs(diff)
    peak = int(np.argmax(abs_diff))  # first occurrence on ties
    return ErrorReport(
        kind=kind,
        lo=float(lo),
        hi=float(hi),
        step=float(step),
        n_points=int(grid.size),
        mse=mse,
        rmse=math.sqrt(mse),
        max_abs=float(abs_diff[peak]),
        argmax_input=float(grid[peak]),
    )


def _rational_tanh_f64(x: float) -> float:
    """The rational core with exact coefficients, evaluated in double."""
    u = x * x
    p = ((_P64[3] * u + _P64[2]) * u + _P64[1]) * u + _P64[0]
    q = ((_Q64[3] * u + _Q64[2]) * u + _Q64[1]) * u + _Q64[0]
    return x * p / q


def balancing_errors(threshold: float) -> tuple:
    """(approximation error, saturation error) at a candidate threshold.

    Approximation error is |tanh(t) - R(t)| for the double-precision
    rational; saturation error is 1 - tanh(t), the cost of clamping to the
    sign beyond t.  The balanced threshold makes the two equal.
    """
    t = float(threshold)
    if not (t > 0 and math.isfinite(t)):
        raise ValueError(f"threshold must be positive and finite, got {threshold}")
    approx = abs(math.tanh(t) - _rational_tanh_f64(t))
    saturation = 1.0 - math.tanh(t)
    return approx, saturation


def solve_tanh_threshold(tolerance: float = 1e-9,
                         bracket: tuple = (3.0, 7.0),
                         max_iterations: int = 200) -> ThresholdSolution:
    """Bisect for the threshold where the two error sources balance.

    Solves |tanh(t) - R(t)| = 1 - tanh(t) on the bracket; the residual of
    the returned solution is at most ``tolerance``.
    """
    if tolerance <= 0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ValueError(f"bracket must be ordered, got {bracket}")

    def gap(t: float) -> float:
        approx, saturation = balancing_errors(t)
        return approx - saturation

    gap_lo, gap_hi = gap(lo), gap(hi)
    if gap_lo == 0.0:
        return ThresholdSolution(lo, 0.0, 0)
    if gap_hi == 0.0:
        return ThresholdSolution(hi, 0.0, 0)
    if (gap_lo > 0) == (gap_hi > 0):
        raise RuntimeError(
            f"no sign change on bracket [{lo}, {hi}]: "
            f"gap({lo})={gap_lo:.3e}, gap({hi})={gap_hi:.3e}"
        )
    mid, gap_mid = lo, gap_lo
    for iteration in range(1, max_iterations + 1):
        mid = 0.5 * (lo + hi)
        gap_mid = gap(mid)
        if abs(gap_mid) <= tolerance:
            return ThresholdSolution(mid, gap_mid, iteration)
        if (gap_mid > 0) == (gap_hi > 0):
            hi, gap_hi = mid, gap_mid
        else:
            lo, gap_lo = mid, gap_mid
    raise RuntimeError(
        f"bisection did not reach residual {tolerance:g} in "
        f"{max_iterations} iterations (last residual {gap_mid:.3e})"
    )


def threshold_sweep(kind, candidates: Sequence[float],
                    lo: float, hi: float, step: float) -> list:
    """Max-abs error as a function of the saturation threshold.

    Supported for the empirically thresholded kinds (gelu, swish); the
    sigmoid/tanh thresholds come from the balancing solve instead.  Returns
    (threshold, max_abs) pairs over the given grid.
    """
    kind = ActivationKind(kind)
    if kind not in _SWEEPABLE:
        raise ValueError(f"threshold sweep applies to gelu and swish, not {kind}")
    grid = inclusive_grid(lo, hi, step)
    reference = np.array([_REFS[kind](x) for x in grid], dtype=np.float64)
    core = _CORES[kind]
    results = []
    for candidate in candidates:
        t32 = np.float32(candidate)
        if not (np.isfinite(t32) and t32 > 0):
            raise ValueError(f"candidate threshold must be positive, got {candidate}")
        values = core(grid, threshold=t32).astype(np.float64)
        results.append((float(t32), float(np.max(np.abs(values - reference)))))
    return results
