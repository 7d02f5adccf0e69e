"""Wetting / recurrence phase classification.

Closed forms: ``delta > 1`` (power tails), ``v0 < -ln 2`` (square well),
``4 e^{v1} < 2 + e^{-v0}`` (double step) mean partial wetting.  The numeric
order parameter is the exact mean midpoint height of the bridge, whose
growth ``mean(4N) / mean(N)`` is 2 for diffusive (unpinned) interfaces and
tends to 1 for pinned ones.
"""
from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize_scalar

from . import bridge
from .core import (
    CutoffTooSmall,
    EdgeCoupling,
    FitUnstable,
    Regime,
    RegimeReport,
    SosModel,
    WalkKernel,
)
from .presets import Preset, build_sos
from .sos_to_rw import double_step_analysis, square_well_analysis

log = logging.getLogger(__name__)

LN2 = math.log(2.0)

PARTIAL_BELOW = 1.3
COMPLETE_ABOVE = 1.7
PLATEAU_TOL = 0.10


@dataclass(frozen=True)
class TailFit:
    delta: float
    roots: tuple
    plateau: float
    variation: float


def _extrapolate(x, y):
    """Intercept of a least-squares fit ``y = A + B/x + C/x**2``."""
    coef = np.polynomial.polynomial.polyfit(1.0 / x, y, 2)
    return float(coef[0])


def _window(M, window):
    lo, hi = window if window is not None else (M // 4, M // 2)
    return np.arange(max(lo, 1), hi + 1)


def fit_tail(source: Union[SosModel, EdgeCoupling, Sequence[float]], window=None) -> TailFit:
    """Numeric tail fit over ``X in [M/4, M/2]`` (or ``window``).

    A potential is fitted through ``X**2 V(X) -> delta (2 + delta) / 8`` and the
    root ``delta > -1`` is returned (both roots are kept in ``roots``).  A
    coupling is fitted through ``2 x phi(x) -> delta``.  Both fits extrapolate
    the ``1/X`` corrections away.
    """
    if isinstance(source, EdgeCoupling):
        x = source.midpoints[_window(source.cutoff, window)]
        y = 2.0 * x * source.phi[_window(source.cutoff, window)]
        kind = "phi"
    else:
        V = source.V if isinstance(source, SosModel) else np.asarray(source, dtype=float)
        X = _window(V.size - 1, window)
        x = X.astype(float)
        y = x**2 * V[X]
        kind = "V"
    if np.all(y == 0):
        plateau, variation = 0.0, 0.0
    else:
        plateau = _extrapolate(x, y)
        variation = float((y.max() - y.min()) / max(abs(plateau), np.abs(y).max()))
    if variation > PLATEAU_TOL:
        raise FitUnstable(f"tail plateau varies by {variation:.1%} over X in [{x[0]:g}, {x[-1]:g}]")
    if kind == "phi":
        return TailFit(plateau, (plateau,), plateau, variation)
    disc = 1.0 + 8.0 * plateau
    if disc < 0:
        raise FitUnstable(f"tail amplitude {plateau:.4g} < -1/8 has no real delta")
    r = math.sqrt(disc)
    return TailFit(-1.0 + r, (-1.0 + r, -1.0 - r), plateau, variation)


def tail_delta(source, use_tail: bool = True, window=None) -> float:
    """Tail exponent ``delta``; uses the preset metadata when present and allowed."""
    if use_tail:
        meta = getattr(source, "tail", None)
        if meta is not None:
            return float(meta[0] if isinstance(meta, tuple) else meta.delta)
    return fit_tail(source, window).delta


def classify(delta: float) -> RegimeReport:
    """Partial wetting iff ``delta > 1``; ``delta == 1`` is complete wetting, flagged."""
    if delta > 1:
        regime = Regime.PARTIAL_WETTING
    else:
        regime = Regime.COMPLETE_WETTING
    boundary = delta == 1
    return RegimeReport(regime, float(delta), f"delta={delta:g} {'>' if delta > 1 else '<='} 1",
                        boundary=boundary)


def wall_phase_closed_form(preset: Preset) -> RegimeReport:
    if preset.name == "square-well":
        v0 = preset.params["v0"]
        a = square_well_analysis(v0)
        return RegimeReport(a.regime, evidence=f"v0={v0:g} vs -ln 2={-LN2:.6f}",
                            diagnostics={"second_ansatz": a.second_ansatz},
                            boundary=v0 == -LN2)
    if preset.name == "double-step":
        v0, v1 = preset.params["v0"], preset.params["v1"]
        a = double_step_analysis(v0, v1)
        lhs, rhs = 4.0 * math.exp(v1), 2.0 + math.exp(-v0)
        return RegimeReport(a.regime, evidence=f"4e^v1={lhs:.6g} vs 2+e^-v0={rhs:.6g}",
                            diagnostics={"roots": a.roots}, boundary=lhs == rhs)
    if preset.name in ("power-tail", "log-potential", "geometric-step"):
        return classify(preset.params["delta"])
    raise ValueError(f"no closed form for preset {preset.name!r}")


def boundary_distance(preset: Preset) -> float:
    """Euclidean distance of the preset parameters to the analytic wetting boundary."""
    p = preset.params
    if preset.name == "square-well":
        return abs(p["v0"] + LN2)
    if preset.name == "double-step":
        v0, v1 = p["v0"], p["v1"]
        curve = lambda t: math.log((2.0 + math.exp(-t)) / 4.0)  # noqa: E731
        dist = lambda t: math.hypot(t - v0, curve(t) - v1)  # noqa: E731
        ts = np.linspace(v0 - 5.0, v0 + 5.0, 2001)
        t0 = ts[int(np.argmin([dist(t) for t in ts]))]
        res = minimize_scalar(dist, bracket=(t0 - 0.01, t0, t0 + 0.01))
        return float(min(res.fun, dist(t0)))
    return abs(p["delta"] - 1.0)


@dataclass(frozen=True)
class HeightDiagnostic:
    means: dict
    growth_ratios: dict
    ratio: float
    verdict: Regime


def mean_height_diagnostic(model: Union[SosModel, WalkKernel], N_list: Sequence[int] = (400, 1600),
                           mass_tol: float = 1e-6) -> HeightDiagnostic:
    """Exact ``E[X_{N/2}]`` under the bridge law for each N and its N -> 4N growth."""
    N_list = sorted(int(N) for N in N_list)
    if any(N % 2 for N in N_list):
        raise ValueError("N_list must contain even lengths")
    M = model.cutoff
    means = {}
    for N in N_list:
        p = bridge.height_marginal(model, N, N // 2)
        far = p[M // 2:].sum()
        if far > mass_tol:
            raise CutoffTooSmall(f"mass {far:.3g} at X >= M/2 = {M // 2} for N={N}")
        means[N] = float(p @ np.arange(M + 1))
    ratios = {(N, 4 * N): means[4 * N] / means[N] for N in N_list if 4 * N in means}
    if not ratios:
        raise ValueError("N_list needs at least one pair (N, 4N)")
    ratio = ratios[max(ratios)]
    if ratio < PARTIAL_BELOW:
        verdict = Regime.PARTIAL_WETTING
    elif ratio > COMPLETE_ABOVE:
        verdict = Regime.COMPLETE_WETTING
    else:
        verdict = Regime.UNDECIDED
    return HeightDiagnostic(means, ratios, ratio, verdict)


@dataclass(frozen=True)
class ScanRow:
    index: int
    preset: Preset
    closed_form: Optional[Regime]
    numeric: Optional[Regime]
    growth_ratio: float
    agreement: bool
    error: str = ""
    extra: dict = field(default_factory=dict)


def _scan_row(args) -> ScanRow:
    index, preset, M, N_list = args
    closed = numeric = None
    ratio = float("nan")
    try:
        closed = wall_phase_closed_form(preset).regime
        diag = mean_height_diagnostic(build_sos(preset, M), N_list)
        numeric, ratio = diag.verdict, diag.ratio
    except Exception as exc:  # recorded in the row; the scan carries on
        log.warning("scan row %d (%s) failed: %s", index, preset, exc)
        return ScanRow(index, preset, closed, numeric, ratio, False, f"{type(exc).__name__}: {exc}")
    return ScanRow(index, preset, closed, numeric, ratio, closed == numeric)


def make_grid(family: str, **axes) -> list:
    """Cartesian product of parameter axes as a list of presets (first axis slowest)."""
    names = list(axes)
    return [Preset(family, dict(zip(names, vals)))
            for vals in itertools.product(*(list(axes[n]) for n in names))]


def phase_scan(grid: Iterable[Preset], M: int = 2000, N_list: Sequence[int] = (400, 1600),
               jobs: int = 1) -> list:
    """Closed-form and numeric verdicts side by side, one row per grid point.

    Rows are independent; with ``jobs > 1`` they run in worker processes and
    are returned in grid order, so the output does not depend on scheduling.
    """
    tasks = [(i, p, M, tuple(N_list)) for i, p in enumerate(grid)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_scan_row, tasks))
    else:
        rows = [_scan_row(t) for t in tasks]
    return sorted(rows, key=lambda r: r.index)
