"""Shared domain types, validation and detailed-balance primitives.

Conventions used throughout the package:

* States live on the truncated half-line ``{0, ..., M}``.  Kernels are stored
  as dense ``(M+1, M+1)`` row-stochastic arrays ``P[x, y] = P(y | x)``.
* Forbidden transitions / edges carry the energy ``np.inf`` (``FORBIDDEN``);
  ``exp(-inf) == 0`` so no large sentinel floats ever enter an exponential.
* An :class:`SosModel` assigns the bridge ``x_0 .. x_N`` the Gibbs weight::

      prod_{n<N} exp(-W[x_n, x_{n+1}]) * prod_{n>=1} exp(-V[x_n])

  with no extra per-step prefactor.  Constructions whose textbook form carries
  a ``2**-N`` factor absorb it as ``+ln 2`` in every ``W`` entry, so the SOS
  partition function equals the walk's return probability exactly.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

FORBIDDEN = np.inf

ROW_SUM_TOL = 1e-12


class WalklineError(Exception):
    """Base class for all errors raised by walkline."""


class AsymmetricSupport(WalklineError, ValueError):
    pass


class DegenerateRate(WalklineError, ValueError):
    pass


class BadHoldFactor(WalklineError, ValueError):
    pass


class NonpositiveHoldMass(WalklineError, ValueError):
    pass


class BadBaseKernel(WalklineError, ValueError):
    pass


class PositivityFailure(WalklineError, ArithmeticError):
    """The continued fraction produced a_X <= 0; ``index`` is the first such X."""

    def __init__(self, index: int, value: float):
        super().__init__(f"continued fraction lost positivity at X={index} (a_X={value!r})")
        self.index = index
        self.value = value


class NoConvergence(WalklineError, ArithmeticError):
    def __init__(self, iterations: int, residual: float):
        super().__init__(f"no convergence after {iterations} iterations (residual {residual:.3g})")
        self.iterations = iterations
        self.residual = residual


class GroundStateMismatch(WalklineError, ValueError):
    pass


class ForbiddenStep(WalklineError, ValueError):
    pass


class TooLarge(WalklineError, ValueError):
    pass


class ZeroBridgeProbability(WalklineError, ValueError):
    pass


class FitUnstable(WalklineError, ArithmeticError):
    pass


class CutoffTooSmall(WalklineError, ValueError):
    pass


class Structure(str, enum.Enum):
    NEAREST_NEIGHBOR = "nearest-neighbor"
    LAZY_NEAREST_NEIGHBOR = "lazy-nearest-neighbor"
    GENERAL_STEP = "general-step"


class WallMode(str, enum.Enum):
    REFLECT = "reflect"
    METROPOLIS_WALL = "metropolis-wall"


class Regime(str, enum.Enum):
    PARTIAL_WETTING = "PARTIAL_WETTING"
    COMPLETE_WETTING = "COMPLETE_WETTING"
    UNDECIDED = "UNDECIDED"


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class WalkKernel:
    """Row-stochastic transition table on ``{0..M}``.

    The truncation row ``M`` keeps whatever mass would have left the state
    space as holding probability ``P[M, M]`` (and likewise for longer jumps
    out of range in general-step kernels).
    """

    P: np.ndarray
    structure: Structure
    wall_mode: WallMode = WallMode.REFLECT

    def __post_init__(self):
        P = _frozen(self.P)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 2:
            raise ValueError(f"kernel must be a square table with at least 2 states, got {P.shape}")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "structure", Structure(self.structure))
        object.__setattr__(self, "wall_mode", WallMode(self.wall_mode))

    @property
    def cutoff(self) -> int:
        return self.P.shape[0] - 1

    @property
    def max_step(self) -> int:
        xs, ys = np.nonzero(self.P)
        return int(np.abs(ys - xs).max())

    def step_set(self) -> tuple:
        xs, ys = np.nonzero(self.P)
        return tuple(sorted(set((ys - xs).tolist())))


@dataclass(frozen=True)
class EdgeCoupling:
    """Coupling on half-integers: ``phi[k]`` is the value at ``k + 1/2``.

    A coupling of length ``M + 1`` defines a +-1 walk on ``{0..M}``; the last
    entry only enters the holding probability of the truncation row.
    ``tail`` is ``(delta, gamma)`` for the ``delta/(2x) + gamma/x**2`` family.
    """

    phi: np.ndarray
    tail: Optional[tuple] = None

    def __post_init__(self):
        phi = _frozen(self.phi)
        if phi.ndim != 1 or phi.size < 2:
            raise ValueError("phi must be a 1-d sequence of length >= 2")
        if not np.all(np.isfinite(phi)):
            raise ValueError("phi must be finite")
        object.__setattr__(self, "phi", phi)

    @property
    def cutoff(self) -> int:
        return self.phi.size - 1

    @property
    def midpoints(self) -> np.ndarray:
        return np.arange(self.phi.size) + 0.5


@dataclass(frozen=True)
class TailInfo:
    delta: float
    gamma: float = 0.0

    @property
    def amplitude(self) -> float:
        """Coefficient of ``X**-2`` in the large-X potential."""
        return self.delta * (2.0 + self.delta) / 8.0


@dataclass(frozen=True, eq=False)
class SosModel:
    """Site potential ``V`` and symmetric edge energy ``W`` on ``{0..M}``."""

    V: np.ndarray
    W: np.ndarray
    tail: Optional[TailInfo] = None

    def __post_init__(self):
        V = _frozen(self.V)
        W = _frozen(self.W)
        if W.shape != (V.size, V.size):
            raise ValueError(f"W shape {W.shape} does not match V of length {V.size}")
        if not np.all(np.isfinite(V)):
            raise ValueError("V must be finite")
        if np.any(np.isnan(W)) or np.any(W == -np.inf):
            raise ValueError("W entries must be real or +inf")
        if not np.array_equal(W, W.T):
            raise ValueError("W must be exactly symmetric")
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "W", W)

    @property
    def cutoff(self) -> int:
        return self.V.size - 1

    @property
    def forbidden(self) -> np.ndarray:
        return np.isinf(self.W)

    @property
    def max_step(self) -> int:
        xs, ys = np.nonzero(~self.forbidden)
        return int(np.abs(ys - xs).max())

    def step_set(self) -> tuple:
        xs, ys = np.nonzero(~self.forbidden)
        return tuple(sorted(set((ys - xs).tolist())))

    def gibbs_kernel(self) -> np.ndarray:
        """Symmetric kernel ``exp(-W(x,y) - V(x)/2 - V(y)/2)``."""
        return np.exp(-self.W - 0.5 * self.V[:, None] - 0.5 * self.V[None, :])

    def tail_deviation(self, xmin: Optional[int] = None) -> np.ndarray:
        """``|V(X) / tail(X) - 1| * X`` for ``X >= xmin`` (default ``M // 2``).

        Empty when there is no tail record or the leading amplitude vanishes.
        """
        if self.tail is None or self.tail.amplitude == 0.0:
            return np.empty(0)
        xmin = self.cutoff // 2 if xmin is None else xmin
        X = np.arange(max(xmin, 1), self.cutoff + 1, dtype=float)
        return np.abs(self.V[X.astype(int)] * X**2 / self.tail.amplitude - 1.0) * X

    def with_V(self, V) -> "SosModel":
        return SosModel(V, self.W, self.tail)


@dataclass(frozen=True)
class BridgePath:
    x: tuple

    def __post_init__(self):
        x = tuple(int(v) for v in self.x)
        if len(x) < 1:
            raise ValueError("a bridge needs at least one point")
        if x[0] != 0 or x[-1] != 0:
            raise ValueError(f"bridge must start and end at 0, got {x[0]}..{x[-1]}")
        if min(x) < 0:
            raise ValueError("bridge heights must be nonnegative")
        object.__setattr__(self, "x", x)

    @property
    def N(self) -> int:
        return len(self.x) - 1

    def steps(self) -> np.ndarray:
        return np.diff(self.x)


@dataclass(frozen=True)
class GroundState:
    rho: float
    U: np.ndarray
    residual: float = 0.0
    iterations: int = 0

    def __post_init__(self):
        object.__setattr__(self, "U", _frozen(self.U))
        if not self.rho > 0:
            raise ValueError("rho must be positive")

    @property
    def log_rho(self) -> float:
        return float(np.log(self.rho))


@dataclass(frozen=True)
class RegimeReport:
    regime: Regime
    delta_estimate: float = float("nan")
    evidence: str = ""
    diagnostics: dict = field(default_factory=dict)
    boundary: bool = False


def validate_kernel(k: WalkKernel, tol: float = ROW_SUM_TOL) -> list:
    """Return a list of human-readable invariant violations (empty if valid)."""
    P = k.P
    M = k.cutoff
    out = []
    neg = np.argwhere(P < 0)
    for x, y in neg:
        out.append(f"negative entry P({y}|{x}) = {P[x, y]:.3g}")
    if not np.all(np.isfinite(P)):
        out.append("non-finite entries")
    sums = P.sum(axis=1)
    for x in np.flatnonzero(np.abs(sums - 1.0) > tol):
        dev = 1.0 - sums[x]
        kind = "deficit" if dev > 0 else "excess"
        out.append(f"row {x} sums to {sums[x]:.15g} ({kind} {abs(dev):.3g})")
    steps = np.abs(np.subtract.outer(np.arange(M + 1), np.arange(M + 1))).T
    if k.structure is Structure.NEAREST_NEIGHBOR:
        bad = (P != 0) & (steps != 1)
        bad[M, M] = False  # truncation holding
        for x, y in np.argwhere(bad):
            out.append(f"nearest-neighbor kernel has P({y}|{x}) = {P[x, y]:.3g}")
    elif k.structure is Structure.LAZY_NEAREST_NEIGHBOR:
        for x, y in np.argwhere((P != 0) & (steps > 1)):
            out.append(f"lazy nearest-neighbor kernel has P({y}|{x}) = {P[x, y]:.3g}")
    if k.wall_mode is WallMode.REFLECT and abs(P[0, 1] - 1.0) > tol:
        out.append(f"reflecting wall requires P(1|0) = 1, got {P[0, 1]!r}")
    return out


def detailed_balance_residual(k: WalkKernel, U: Sequence[float], start: int = 0) -> float:
    """``max |e^{-U(x)} P(y|x) - e^{-U(y)} P(x|y)|`` over pairs ``x != y >= start``."""
    U = np.asarray(U, dtype=float)
    if U.shape != (k.cutoff + 1,) or not np.all(np.isfinite(U)):
        raise ValueError("U must be finite on {0..M}")
    flux = np.exp(-U)[:, None] * k.P
    diff = np.abs(flux - flux.T)[start:, start:]
    return float(diff.max()) if diff.size else 0.0


def w_from_detailed_balance(k: WalkKernel) -> SosModel:
    """Edge energy ``W(x,y) = -ln(P(y|x) P(x|y)) / 2`` of a reversible kernel.

    The returned model has ``V = 0``; for any bridge the invariant measure
    telescopes away, so no knowledge of it is needed.
    """
    P = k.P
    pos = P > 0
    asym = pos != pos.T
    if asym.any():
        x, y = np.argwhere(asym)[0]
        raise AsymmetricSupport(f"P({y}|{x}) and P({x}|{y}) differ in support")
    with np.errstate(divide="ignore"):
        W = -0.5 * (np.log(P) + np.log(P.T))
    W = np.triu(W) + np.triu(W, 1).T  # bitwise symmetric
    W[~pos] = FORBIDDEN
    return SosModel(np.zeros(k.cutoff + 1), W)


def reversible_potential(k: WalkKernel) -> np.ndarray:
    """Potential ``U`` (``U(0) = 0``) of the reversible measure of a birth-death kernel.

    Uses ``U(x+1) - U(x) = ln(P(x|x+1) / P(x+1|x))``; only nearest-neighbour
    ratios enter, so the result is exact for tridiagonal kernels.
    """
    P = k.P
    up = np.diag(P, 1)
    down = np.diag(P, -1)
    if np.any(up <= 0) or np.any(down <= 0):
        raise ValueError("birth-death kernel must be irreducible")
    return np.concatenate([[0.0], np.cumsum(np.log(down) - np.log(up))])


def infer_structure(P: np.ndarray) -> Structure:
    M = P.shape[0] - 1
    xs, ys = np.nonzero(P)
    d = np.abs(ys - xs)
    if d.max() > 1:
        return Structure.GENERAL_STEP
    holds = np.flatnonzero(d == 0)
    if holds.size == 0 or all(xs[i] == M for i in holds):
        return Structure.NEAREST_NEIGHBOR
    return Structure.LAZY_NEAREST_NEIGHBOR
