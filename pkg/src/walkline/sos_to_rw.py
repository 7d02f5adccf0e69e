"""Line -> walk inversions.

The +-1 inversion solves ``2 b_X = a_X + 1/a_{X-1}`` (``2 b_0 = a_0``) with
``b_X = e^{V(X) + lam}`` and ``a_X = e^{-phi(X+1/2)}``; its solution is a
continued fraction, evaluated here in its rolled-up form.

The general route goes through the Perron ground state of the symmetric
Gibbs kernel ``K(x,y) = exp(-W(x,y) - V(x)/2 - V(y)/2)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    EdgeCoupling,
    GroundState,
    GroundStateMismatch,
    NoConvergence,
    PositivityFailure,
    Regime,
    SosModel,
    WalkKernel,
    WallMode,
    infer_structure,
)

log = logging.getLogger(__name__)

LN2 = math.log(2.0)

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class Inversion:
    a: np.ndarray
    phi: EdgeCoupling
    lam: float


def continued_fraction_invert(V: Sequence[float], lam: float = 0.0) -> Inversion:
    """Coupling ``phi`` such that the +-1 walk reproduces ``V + lam``.

    ``a_0 = 2 b_0`` and ``a_X = 2 b_X - 1 / a_{X-1}``.  Raises
    :class:`PositivityFailure` at the first ``X`` with ``a_X <= 0``: no walk
    represents the potential with this ``lam``.

    The forward recursion is the literal nested fraction.  It amplifies
    rounding by ``1/a_X**2`` per step, so when the solution decays
    (``a < 1``) agreement with other routes is lost after a few dozen sites.
    """
    V = np.asarray(V, dtype=float)
    b2 = 2.0 * np.exp(V + lam)
    a = np.empty(V.size)
    a[0] = b2[0]
    for X in range(1, V.size):
        a[X] = b2[X] - 1.0 / a[X - 1]
        if not a[X] > 0:
            raise PositivityFailure(X, float(a[X]))
    if not a[0] > 0:
        raise PositivityFailure(0, float(a[0]))
    return Inversion(a, EdgeCoupling(-np.log(a)), float(lam))


# --------------------------------------------------------------------------
# Closed forms for square-well and double-step wall potentials


@dataclass(frozen=True)
class SquareWellAnalysis:
    v0: float
    first_ansatz: bool
    second_ansatz: Optional[tuple]  # (a, rho)
    regime: Regime

    def first_ansatz_a(self, X) -> np.ndarray:
        """``a_X = ((2b_0 - 1) X + 2b_0) / ((2b_0 - 1) X + 1)`` with ``rho = 1``."""
        X = np.asarray(X, dtype=float)
        c = 2.0 * math.exp(self.v0)
        return ((c - 1.0) * X + c) / ((c - 1.0) * X + 1.0)


def square_well_analysis(v0: float) -> SquareWellAnalysis:
    """Both ansatz for ``V = v0 1_{X=0}``; partial wetting iff ``v0 < -ln 2``."""
    first = v0 >= -LN2
    second = None
    if v0 < 0:
        a = (math.expm1(-v0)) ** -0.5
        second = (a, 0.5 * (a + 1.0 / a))
    regime = Regime.PARTIAL_WETTING if v0 < -LN2 else Regime.COMPLETE_WETTING
    return SquareWellAnalysis(float(v0), first, second, regime)


@dataclass(frozen=True)
class DoubleStepAnalysis:
    v0: float
    v1: float
    first_ansatz: bool
    a1: float
    roots: tuple  # positive real a solving the quartic, ascending
    regime: Regime
    window_315: Optional[bool]  # v1 >= 0 only: v0 <= 0 and v1 <= 2 ln cosh(v0/2)

    def rho(self, a: float) -> float:
        return 0.5 * (a + 1.0 / a)

    def first_ansatz_a(self, X) -> np.ndarray:
        """``rho = 1`` solution: ``a_0 = 2e^{v0}``, then ``((a1-1)X+1)/((a1-1)X+2-a1)``."""
        X = np.asarray(X, dtype=float)
        out = ((self.a1 - 1.0) * X + 1.0) / ((self.a1 - 1.0) * X + 2.0 - self.a1)
        return np.where(X == 0, 2.0 * math.exp(self.v0), out)


def quartic_roots(v0: float, v1: float, imag_tol: float = 1e-12) -> tuple:
    """Positive ``a`` with ``a^4 (e^{v1}-1) + a^2 (2e^{v1} - e^{-v0} - 1) + e^{v1} = 0``."""
    A = math.expm1(v1)
    B = 2.0 * math.exp(v1) - math.exp(-v0) - 1.0
    C = math.exp(v1)
    if A == 0.0:
        s = [-C / B] if B != 0 else []
    else:
        s = np.roots([A, B, C])
        s = [z.real for z in np.atleast_1d(s) if abs(z.imag) < imag_tol]
    return tuple(sorted(math.sqrt(z) for z in s if z > 0))


def double_step_analysis(v0: float, v1: float) -> DoubleStepAnalysis:
    """Both ansatz for ``V = v0 1_{X=0} + v1 1_{X=1}``.

    Partial wetting iff ``4 e^{v1} < 2 + e^{-v0}``.
    """
    first = 4.0 * math.exp(v1) >= 2.0 + math.exp(-v0)
    a1 = 2.0 * math.exp(v1) - 0.5 * math.exp(-v0)
    roots = quartic_roots(v0, v1)
    regime = Regime.COMPLETE_WETTING if first else Regime.PARTIAL_WETTING
    window = None
    if v1 >= 0:
        window = v0 <= 0 and v1 <= 2.0 * math.log(math.cosh(v0 / 2.0))
    return DoubleStepAnalysis(float(v0), float(v1), first, a1, roots, regime, window)


# --------------------------------------------------------------------------
# Perron ground state


def _is_tridiagonal(m: SosModel) -> bool:
    return m.max_step <= 1


def _pivots(rho, d, e2):
    """Bottom-up LDL^T pivots of ``rho I - K``; stops at the first nonpositive one."""
    M = d.size - 1
    piv = np.empty(M + 1)
    p = rho - d[M]
    piv[M] = p
    for X in range(M - 1, -1, -1):
        if p <= 0:
            return piv, X + 1
        p = rho - d[X] - e2[X] / p
        piv[X] = p
    return piv, (0 if p <= 0 else -1)


def _tridiagonal_ground_state(K: np.ndarray, max_iter: int):
    """Top eigenpair of a symmetric nonnegative tridiagonal matrix.

    The eigenvalue is located by Sturm bisection (``rho > rho_max`` iff all
    bottom-up pivots of ``rho I - K`` are positive).  The eigenvector follows
    from the backward ratio recursion ``v_{X+1}/v_X = K[X,X+1] / pivot_{X+1}``,
    which is the stable (minimal-solution) direction, so even components many
    orders of magnitude below ``v_0`` keep full relative accuracy.
    """
    d = np.diag(K).copy()
    e = np.diag(K, 1).copy()
    if np.any(e <= 0):
        raise ValueError("Gibbs kernel is reducible (zero nearest-neighbour weight)")
    e2 = e * e
    lo = float(d.max())
    hi = float(K.sum(axis=1).max())
    it = 0
    while it < max_iter:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        _, fail = _pivots(mid, d, e2)
        if fail >= 0:
            lo = mid
        else:
            hi = mid
        it += 1
    piv, fail = _pivots(hi, d, e2)
    if fail >= 0:
        raise NoConvergence(it, float("nan"))
    logv = np.concatenate([[0.0], np.cumsum(np.log(e) - np.log(piv[1:]))])
    for _ in range(2):
        logv = _log_inverse_step(logv, piv, e)
    return hi, logv, it


def _log_inverse_step(logc, piv, e):
    """``log((rho I - K)^{-1} c)`` normalised to 0 at X=0.

    Uses the bottom-up factorisation ``U D U^T`` whose substitutions only add
    positive terms, so no cancellation occurs and components far below the
    maximum keep their relative accuracy.
    """
    M = logc.size - 1
    logr = (np.log(e) - np.log(piv[1:])).tolist()  # e_X / p_{X+1}
    lc = logc.tolist()
    lp = np.log(piv).tolist()
    z = [0.0] * (M + 1)
    z[M] = lc[M]
    for X in range(M - 1, -1, -1):
        z[X] = np.logaddexp(lc[X], logr[X] + z[X + 1])
    w = [z[X] - lp[X] for X in range(M + 1)]
    y = [0.0] * (M + 1)
    y[0] = w[0]
    for X in range(1, M + 1):
        y[X] = np.logaddexp(w[X], logr[X - 1] + y[X - 1])
    y = np.asarray(y)
    return y - y[0]


def _power_ground_state(K: np.ndarray, max_iter: int, tol: float):
    """Power iteration from the all-ones vector.

    Stops once the relative eigenvalue increment is below ``tol`` and the
    eigenvector residual is below ``RESIDUAL_TOL / 10``; the Rayleigh quotient
    converges twice as fast as the vector, so the first test alone stops early.
    """
    v = np.ones(K.shape[0])
    rho = 0.0
    res = math.inf
    for it in range(1, max_iter + 1):
        w = K @ v
        new = float(w @ v / (v @ v))
        res = float(np.max(np.abs(w - new * v)) / (new * v.max()))
        done = abs(new - rho) <= tol * new and res < 0.1 * RESIDUAL_TOL
        v = w / w.max()
        rho = new
        if done:
            break
    else:
        raise NoConvergence(max_iter, res)
    if np.any(v <= 0):
        raise NoConvergence(it, float("nan"))
    return rho, np.log(v) - math.log(v[0]), it


def perron_ground_state(m: SosModel, max_iter: int = 10**6, tol: float = 1e-12) -> GroundState:
    """Solve ``sum_X e^{-U(X)/2} K(X, Y) = rho e^{-U(Y)/2}`` with ``U(0) = 0``.

    Nearest-neighbour (and lazy) models use the tridiagonal solver; other
    models fall back to power iteration with relative eigenvalue increment
    tolerance ``tol`` and cap ``max_iter``.
    """
    K = m.gibbs_kernel()
    if _is_tridiagonal(m):
        rho, logv, it = _tridiagonal_ground_state(K, max_iter)
    else:
        rho, logv, it = _power_ground_state(K, max_iter, tol)
    v = np.exp(logv)
    res = float(np.max(np.abs(v @ K - rho * v)) / rho)
    if not res < RESIDUAL_TOL:
        raise NoConvergence(it, res)
    log.debug("ground state rho=%.17g after %d iterations, residual %.3g", rho, it, res)
    return GroundState(rho, -2.0 * logv, res, it)


def ground_state_a(m: SosModel, g: GroundState) -> np.ndarray:
    """``a_X = exp(-(U+V)(X+1)/2 + (U+V)(X)/2)`` for ``X = 0..M-1``."""
    s = g.U + m.V
    return np.exp(-0.5 * np.diff(s))


def recursion_residual(V: Sequence[float], a: Sequence[float], lam: float) -> np.ndarray:
    """Relative residual of ``2 b_X = a_X + 1/a_{X-1}`` (``2 b_0 = a_0``) for given ``a``.

    ``a`` may be shorter than ``V``; the residual covers ``X < len(a)``.
    """
    a = np.asarray(a, dtype=float)
    b2 = 2.0 * np.exp(np.asarray(V, dtype=float)[: a.size] + lam)
    rhs = a.copy()
    rhs[1:] += 1.0 / a[:-1]
    return np.abs(rhs - b2) / b2


def kernel_from_sos(m: SosModel, g: GroundState, check_upto: Optional[int] = None,
                    tol: float = 1e-4) -> WalkKernel:
    """Walk ``P(y|x) = exp(-W'(x,y) - U(y)/2 + U(x)/2) / rho`` with ``W'`` absorbing ``V``.

    Rows are not renormalised; a row-sum error above ``tol`` for ``x <= check_upto``
    (default ``M // 2``) raises :class:`GroundStateMismatch`.
    """
    M = m.cutoff
    logK = -m.W - 0.5 * m.V[:, None] - 0.5 * m.V[None, :]
    logP = logK - 0.5 * g.U[None, :] + 0.5 * g.U[:, None] - g.log_rho
    P = np.exp(logP)
    upto = M // 2 if check_upto is None else check_upto
    dev = np.abs(P.sum(axis=1) - 1.0)[: upto + 1]
    if dev.max() > tol:
        x = int(dev.argmax())
        raise GroundStateMismatch(f"row {x} of the ground-state kernel sums to 1 {dev[x]:+.3g}")
    wall = WallMode.REFLECT if P[0, 0] == 0 else WallMode.METROPOLIS_WALL
    return WalkKernel(P, infer_structure(P), wall)


def rho_trend(make_model, cutoffs: Sequence[int]) -> list:
    """``[(M, rho(M))]`` for a model factory ``M -> SosModel``."""
    return [(M, perron_ground_state(make_model(M)).rho) for M in cutoffs]
