"""Walk -> line translations.

* +-1 walks parameterised by an edge coupling ``phi`` (pairing of up/down
  edge factors along a bridge),
* Metropolis walks with a reflecting or a Metropolis wall,
* Metropolis walks built on an arbitrary symmetric step law.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import expit

from .core import (
    FORBIDDEN,
    BadBaseKernel,
    BadHoldFactor,
    DegenerateRate,
    EdgeCoupling,
    NonpositiveHoldMass,
    SosModel,
    Structure,
    TailInfo,
    WalkKernel,
    WallMode,
)

log = logging.getLogger(__name__)

LN2 = math.log(2.0)


# --------------------------------------------------------------------------
# +-1 walks and the edge coupling phi


def power_tail_phi(delta: float, gamma: float = 0.0, M: int = 512) -> EdgeCoupling:
    """Coupling ``phi(x) = delta/(2x) + gamma/x**2`` at ``x = 1/2, 3/2, ..., M + 1/2``."""
    x = np.arange(M + 1) + 0.5
    return EdgeCoupling(delta / (2.0 * x) + gamma / x**2, tail=(float(delta), float(gamma)))


def kernel_from_phi(phi: EdgeCoupling) -> WalkKernel:
    """+-1 walk reflected at the origin.

    For ``x >= 1`` the walk steps up with probability
    ``e^{-phi(x+1/2)} / (e^{-phi(x+1/2)} + e^{phi(x-1/2)})``.  At the cutoff the
    up-move is turned into holding.
    """
    f = phi.phi
    M = phi.cutoff
    P = np.zeros((M + 1, M + 1))
    P[0, 1] = 1.0
    x = np.arange(1, M + 1)
    s = f[x - 1] + f[x]
    q = expit(s)
    p = expit(-s)
    P[x, x - 1] = q
    P[x[:-1], x[:-1] + 1] = p[:-1]
    P[M, M] = p[-1]
    return WalkKernel(P, Structure.NEAREST_NEIGHBOR, WallMode.REFLECT)


def rates(k: WalkKernel) -> tuple:
    """Up/down probabilities ``(p, q)`` of a nearest-neighbour kernel (index 0..M)."""
    P = k.P
    M = k.cutoff
    p = np.append(np.diag(P, 1), P[M, M])
    q = np.concatenate([[0.0], np.diag(P, -1)])
    return p, q


def phi_from_rates(p, q=None, phi_half: float = 0.0) -> EdgeCoupling:
    """Solve ``phi(x+1/2) = -phi(x-1/2) + ln(q_x/p_x)`` from ``phi(1/2) = phi_half``.

    ``p`` may also be a :class:`WalkKernel`, in which case its rates are used.
    Entries ``p[0]``, ``q[0]`` are ignored.
    """
    if isinstance(p, WalkKernel):
        p, q = rates(p)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    inner_p, inner_q = p[1:], q[1:]
    bad = np.flatnonzero((inner_p <= 0) | (inner_p >= 1) | (inner_q <= 0))
    if bad.size:
        x = int(bad[0]) + 1
        raise DegenerateRate(f"rate p[{x}] = {p[x]!r} is degenerate")
    out = np.empty(p.size)
    out[0] = phi_half
    logratio = np.log(inner_q) - np.log(inner_p)
    for x in range(1, p.size):
        out[x] = -out[x - 1] + logratio[x - 1]
    return EdgeCoupling(out)


def sos_from_phi(phi: EdgeCoupling) -> SosModel:
    """SOS model whose bridge law equals that of :func:`kernel_from_phi`.

    ``V(0) = -(ln 2 + phi(1/2))`` and ``V(X) = ln((e^{-phi(X+1/2)} + e^{phi(X-1/2)}) / 2)``;
    every allowed edge carries ``W = ln 2``.  The truncation row contributes the
    holding energy ``W(M, M) = phi(M + 1/2) + ln 2``.
    """
    f = phi.phi
    M = phi.cutoff
    V = np.empty(M + 1)
    V[0] = -(LN2 + f[0])
    V[1:] = np.logaddexp(-f[1:], f[:-1]) - LN2
    W = np.full((M + 1, M + 1), FORBIDDEN)
    i = np.arange(M)
    W[i, i + 1] = LN2
    W[i + 1, i] = LN2
    W[M, M] = f[M] + LN2
    tail = TailInfo(*phi.tail) if phi.tail is not None else None
    return SosModel(V, W, tail)


def invariant_potential_from_phi(phi: EdgeCoupling) -> np.ndarray:
    """Reversible potential of the +-1 walk: ``U(x+1) - U(x) = 2 phi(x+1/2) + ln(D_x / D_{x+1})``.

    ``D_x = e^{-phi(x+1/2)} + e^{phi(x-1/2)}`` and ``D_0 = e^{-phi(1/2)}`` (reflection).
    """
    f = phi.phi
    logD = np.empty(f.size)
    logD[0] = -f[0]
    logD[1:] = np.logaddexp(-f[1:], f[:-1])
    inc = 2.0 * f[:-1] + logD[:-1] - logD[1:]
    return np.concatenate([[0.0], np.cumsum(inc)])


# --------------------------------------------------------------------------
# Metropolis walks with +-1 / 0 steps


def _check_hold(h: float) -> float:
    h = float(h)
    if not 0.0 < h <= 0.5:
        raise BadHoldFactor(f"hold_factor must lie in (0, 1/2], got {h!r}")
    return h


def _metropolis_rows(U, h):
    U = np.asarray(U, dtype=float)
    if U.ndim != 1 or U.size < 2 or not np.all(np.isfinite(U)):
        raise ValueError("U must be a finite sequence on {0..M}, M >= 1")
    dU = np.diff(U)
    # acceptance e^{-(dU)_+} for up-moves and e^{-(-dU)_+} for down-moves
    up_exp = -np.maximum(dU, 0.0)
    down_exp = -np.maximum(-dU, 0.0)
    return U, up_exp, down_exp


def _metropolis_kernel(U, hold_factor, wall_mode):
    h = _check_hold(hold_factor)
    U, up_exp, down_exp = _metropolis_rows(U, h)
    M = U.size - 1
    P = np.zeros((M + 1, M + 1))
    i = np.arange(M)
    P[i, i + 1] = h * np.exp(up_exp)
    P[i + 1, i] = h * np.exp(down_exp)
    # holding mass as (1 - 2h) + h(1 - e^a) + h(1 - e^b): no cancellation near a,b = 0
    hold = np.full(M + 1, 1.0 - 2.0 * h)
    hold[:-1] += -h * np.expm1(up_exp)
    hold[1:] += -h * np.expm1(down_exp)
    hold[M] += h  # move above the cutoff is rejected
    if wall_mode is WallMode.REFLECT:
        P[0, :] = 0.0
        P[0, 1] = 1.0
        hold[0] = 0.0
    else:
        hold[0] += h  # move below the wall is rejected
    P[np.arange(M + 1), np.arange(M + 1)] = hold
    return WalkKernel(P, Structure.LAZY_NEAREST_NEIGHBOR, wall_mode)


def metropolis_reflect_kernel(U: Sequence[float], hold_factor: float = 0.5) -> WalkKernel:
    """Metropolis walk for the measure ``e^{-U}`` with ``P(1|0) = 1``."""
    return _metropolis_kernel(U, hold_factor, WallMode.REFLECT)


def metropolis_full_kernel(U: Sequence[float], hold_factor: float = 0.5) -> WalkKernel:
    """Metropolis walk for ``e^{-U}`` including the wall row."""
    return _metropolis_kernel(U, hold_factor, WallMode.METROPOLIS_WALL)


def _diag_energy(hold: np.ndarray, rows) -> np.ndarray:
    out = np.empty(hold.size)
    for x in rows:
        if hold[x] < 0:
            raise NonpositiveHoldMass(f"holding mass at X={x} is {hold[x]!r}")
    with np.errstate(divide="ignore"):
        out[:] = -np.log(hold)
    zero = [x for x in rows if hold[x] == 0.0]
    if zero:
        warnings.warn(
            f"zero holding mass at {len(zero)} site(s) (first X={zero[0]}); W(X,X) set to +inf",
            RuntimeWarning,
            stacklevel=3,
        )
    return out


def sos_from_metropolis(U: Sequence[float], wall_mode=WallMode.REFLECT,
                        hold_factor: float = 0.5) -> SosModel:
    """SOS energies reproducing the Metropolis bridge law.

    Edges: ``W(X, X+1) = |U(X+1) - U(X)|/2 - ln h``; diagonal ``W(X, X) = -ln P(X|X)``.
    Reflecting wall: ``V(0) = ln h - (U(1) - U(0))_+`` and ``W(0, 0) = +inf``.
    Metropolis wall: ``V = 0`` and the wall lives in ``W(0, 0)``.
    With ``h = 1/2`` these are the textbook energies shifted by ``ln 2``.
    """
    wall_mode = WallMode(wall_mode)
    k = _metropolis_kernel(U, hold_factor, wall_mode)
    h = float(hold_factor)
    U = np.asarray(U, dtype=float)
    M = U.size - 1
    W = np.full((M + 1, M + 1), FORBIDDEN)
    i = np.arange(M)
    edge = 0.5 * np.abs(np.diff(U)) - math.log(h)
    W[i, i + 1] = edge
    W[i + 1, i] = edge
    hold = np.diag(k.P).copy()
    rows = range(1, M + 1) if wall_mode is WallMode.REFLECT else range(M + 1)
    diag = _diag_energy(hold, rows)
    for x in rows:
        W[x, x] = diag[x]
    V = np.zeros(M + 1)
    if wall_mode is WallMode.REFLECT:
        V[0] = math.log(h) - max(U[1] - U[0], 0.0)
    return SosModel(V, W)


def log_potential(delta: float, M: int) -> np.ndarray:
    """``U(X) = delta * ln(X + 1)``."""
    return delta * np.log1p(np.arange(M + 1, dtype=float))


# --------------------------------------------------------------------------
# General-step Metropolis


@dataclass(frozen=True)
class BaseKernel:
    """Symmetric step law ``e^{-W0(x, y)}`` on the integers with range ``max_step``.

    ``energy(x, y)`` may return ``inf`` for forbidden pairs.
    """

    energy: Callable[[int, int], float]
    max_step: int
    name: str = "custom"

    def table(self, M: int) -> np.ndarray:
        W0 = np.full((M + 1, M + 1), FORBIDDEN)
        for x in range(M + 1):
            for y in range(max(0, x - self.max_step), min(M, x + self.max_step) + 1):
                W0[x, y] = self.energy(x, y)
        return W0

    def check(self, M: int, tol: float = 1e-12) -> None:
        for x in range(M + 1):
            ys = range(x - self.max_step, x + self.max_step + 1)
            total = math.fsum(math.exp(-self.energy(x, y)) for y in ys)
            if abs(total - 1.0) > tol:
                raise BadBaseKernel(f"base kernel row {x} sums to {total!r}")
            for y in ys:
                if self.energy(x, y) != self.energy(y, x):
                    raise BadBaseKernel(f"base kernel not symmetric at ({x}, {y})")


def nearest_neighbor_base() -> BaseKernel:
    """``W0 = ln 2`` for ``|x - y| = 1``, forbidden otherwise."""
    return BaseKernel(lambda x, y: LN2 if abs(x - y) == 1 else math.inf, 1, "nearest-neighbor")


def geometric_base(J: float, max_step: int = 4) -> BaseKernel:
    """``W0 = J |x - y| + c`` for ``|x - y| <= max_step``, normalised through ``c``."""
    s = np.arange(-max_step, max_step + 1)
    c = float(np.log(np.exp(-J * np.abs(s)).sum()))

    def energy(x, y):
        d = abs(x - y)
        return J * d + c if d <= max_step else math.inf

    return BaseKernel(energy, max_step, f"geometric(J={J}, R={max_step})")


def general_metropolis_kernel(W0: BaseKernel, U: Sequence[float], tol: float = 1e-12) -> WalkKernel:
    """Metropolis walk on ``{0..M}`` proposing with ``e^{-W0}``.

    ``U = +inf`` below the wall and above the cutoff: such proposals are rejected
    and kept as holding mass, which preserves detailed balance.
    """
    U = np.asarray(U, dtype=float)
    M = U.size - 1
    W0.check(M, tol)
    T = W0.table(M)
    dU = U[None, :] - U[:, None]
    P = np.exp(-T - np.maximum(dU, 0.0))
    np.fill_diagonal(P, 0.0)
    hold = np.array([1.0 - math.fsum(row) for row in P])
    if np.any(hold < 0):
        x = int(np.flatnonzero(hold < 0)[0])
        raise NonpositiveHoldMass(f"holding mass at X={x} is {hold[x]!r}")
    P[np.arange(M + 1), np.arange(M + 1)] = hold
    return WalkKernel(P, Structure.GENERAL_STEP, WallMode.METROPOLIS_WALL)


def sos_from_general(W0: BaseKernel, U: Sequence[float], tol: float = 1e-12) -> SosModel:
    """``W(X,Y) = W0(X,Y) + |U(Y) - U(X)|/2`` off the diagonal, ``-ln P(X|X)`` on it."""
    k = general_metropolis_kernel(W0, U, tol)
    U = np.asarray(U, dtype=float)
    M = U.size - 1
    W = W0.table(M) + 0.5 * np.abs(U[None, :] - U[:, None])
    W = np.triu(W) + np.triu(W, 1).T
    diag = _diag_energy(np.diag(k.P).copy(), range(M + 1))
    np.fill_diagonal(W, diag)
    return SosModel(np.zeros(M + 1), W)
