"""Exact bridge computations: path probabilities, partition functions,
height marginals, exhaustive enumeration and exact conditional sampling.

Everything works on a *transfer matrix* ``T``: the kernel ``P`` itself for a
walk, or ``T[x, y] = exp(-W[x, y] - V[y])`` for an SOS model.  The bridge
weight of ``x_0..x_N`` is ``prod_n T[x_n, x_{n+1}]`` in both cases.

Dynamic programming runs on sparse matrices in log space: vectors are
rescaled by their maximum after every step and the log of the scale is
accumulated separately.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence, Union

import numpy as np
from scipy import sparse

from .core import (
    BridgePath,
    ForbiddenStep,
    SosModel,
    TooLarge,
    WalkKernel,
    ZeroBridgeProbability,
)

Model = Union[WalkKernel, SosModel]

MAX_PATHS = 10**7

# Pinned generator family so that sampled CSV files are bit-reproducible.
BIT_GENERATOR = np.random.PCG64


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(BIT_GENERATOR(seed))


def log_transfer(model: Model) -> np.ndarray:
    """Dense ``log T`` (``-inf`` where forbidden)."""
    if isinstance(model, WalkKernel):
        with np.errstate(divide="ignore"):
            return np.log(model.P)
    return -model.W - model.V[None, :]


def transfer(model: Model, size: int | None = None) -> sparse.csr_matrix:
    """Sparse transfer matrix, optionally restricted to states ``< size``."""
    T = model.P if isinstance(model, WalkKernel) else np.exp(log_transfer(model))
    if size is not None:
        T = T[:size, :size]
    return sparse.csr_matrix(T)


def _reach(model: Model, N: int) -> int:
    """Number of states a length-N bridge can visit."""
    return min(model.cutoff + 1, model.max_step * (N // 2) + 1)


def _forward(T, N: int, start: int = 0):
    """Rescaled forward vectors ``f_n`` and cumulative log scales, n = 0..N."""
    size = T.shape[0]
    TT = T.T.tocsr()
    f = np.zeros(size)
    f[start] = 1.0
    vecs = [f]
    scales = [0.0]
    s = 0.0
    for _ in range(N):
        f = TT @ f
        m = f.max()
        if m <= 0:
            f = np.zeros(size)
            s = -math.inf
        else:
            f = f / m
            s += math.log(m)
        vecs.append(f)
        scales.append(s)
    return vecs, scales


def _backward(T, N: int, end: int = 0):
    """Rescaled ``b_n(x)`` = weight of reaching ``end`` at time N from x at time n."""
    size = T.shape[0]
    b = np.zeros(size)
    b[end] = 1.0
    vecs = [None] * (N + 1)
    scales = [0.0] * (N + 1)
    vecs[N] = b
    s = 0.0
    for n in range(N - 1, -1, -1):
        b = T @ b
        m = b.max()
        if m <= 0:
            b = np.zeros(size)
            s = -math.inf
        else:
            b = b / m
            s += math.log(m)
        vecs[n] = b
        scales[n] = s
    return vecs, scales


def partition_function(model: Model, N: int) -> float:
    """``log Z_N``: log of the total weight of length-N bridges from 0 to 0.

    For a kernel this is the log return probability ``log P(X_N = 0 | X_0 = 0)``.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    T = transfer(model, _reach(model, N))
    f = np.zeros(T.shape[0])
    f[0] = 1.0
    s = 0.0
    TT = T.T.tocsr()
    for _ in range(N):
        f = TT @ f
        m = f.max()
        if m <= 0:
            return -math.inf
        f /= m
        s += math.log(m)
    return s + math.log(f[0]) if f[0] > 0 else -math.inf


def _path_array(path) -> np.ndarray:
    if isinstance(path, BridgePath):
        return np.asarray(path.x)
    return np.asarray(BridgePath(path).x)


def path_log_weight(model: Model, path) -> float:
    """Unnormalised log weight ``sum_n log T[x_n, x_{n+1}]``."""
    x = _path_array(path)
    if x.max() > model.cutoff:
        raise ForbiddenStep(f"path exceeds the cutoff M={model.cutoff}")
    lt = log_transfer(model)[x[:-1], x[1:]]
    if np.any(np.isneginf(lt)):
        n = int(np.flatnonzero(np.isneginf(lt))[0])
        raise ForbiddenStep(f"step {x[n]} -> {x[n + 1]} at n={n} is forbidden")
    return float(np.sum(lt))


def bridge_log_prob_rw(k: WalkKernel, path) -> float:
    """Log probability of the path under the walk conditioned on ``X_N = 0``."""
    x = _path_array(path)
    return path_log_weight(k, x) - partition_function(k, x.size - 1)


def bridge_log_weight_sos(m: SosModel, path, normalized: bool = True) -> float:
    """Log Gibbs probability (or, with ``normalized=False``, raw weight) of the path."""
    x = _path_array(path)
    w = path_log_weight(m, x)
    return w - partition_function(m, x.size - 1) if normalized else w


def bridge_log_probs(model: Model, paths: np.ndarray) -> np.ndarray:
    """Vectorised normalised log probabilities for an ``(n_paths, N+1)`` array."""
    paths = np.asarray(paths)
    N = paths.shape[1] - 1
    lt = log_transfer(model)
    w = lt[paths[:, :-1], paths[:, 1:]].sum(axis=1)
    return w - partition_function(model, N)


def count_bridges(N: int, step_set: Sequence[int], M: int) -> int:
    """Number of nonnegative bridges of length N with steps in ``step_set`` and heights <= M."""
    c = [0] * (M + 1)
    c[0] = 1
    for _ in range(N):
        nxt = [0] * (M + 1)
        for x, v in enumerate(c):
            if v:
                for s in step_set:
                    y = x + s
                    if 0 <= y <= M:
                        nxt[y] += v
        c = nxt
    return c[0]


def enumerate_paths(N: int, step_set: Sequence[int], M: int) -> np.ndarray:
    """All bridges as an ``(n_paths, N+1)`` integer array, in lexicographic step order."""
    steps = sorted(set(int(s) for s in step_set))
    n = count_bridges(N, steps, M)
    if n > MAX_PATHS:
        raise TooLarge(f"{n} bridges exceed the enumeration limit {MAX_PATHS}")
    down = max(-min(steps), 0)
    out = np.zeros((n, N + 1), dtype=np.int64)
    if n == 0:
        return out
    row = 0
    x = [0] * (N + 1)

    def rec(t):
        nonlocal row
        if t == N:
            if x[N] == 0:
                out[row] = x
                row += 1
            return
        remaining = N - t - 1
        for s in steps:
            y = x[t] + s
            if y < 0 or y > M:
                continue
            if y > remaining * down:
                continue
            x[t + 1] = y
            rec(t + 1)

    rec(0)
    assert row == n
    return out


def enumerate_bridges(N: int, step_set: Sequence[int], M: int) -> list:
    """All nonnegative bridges of length N as :class:`BridgePath` objects."""
    return [BridgePath(tuple(r)) for r in enumerate_paths(N, step_set, M)]


def _tilted_cdfs(k: WalkKernel, N: int):
    """Per-time cumulative rows of ``P(y|x) h_{n+1}(y) / h_n(x)``."""
    size = _reach(k, N)
    P = k.P[:size, :size]
    T = sparse.csr_matrix(P)
    hs, _ = _backward(T, N)
    cdfs = []
    for n in range(N):
        tilt = P * hs[n + 1][None, :]
        tot = tilt.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            rows = np.where(tot > 0, tilt / tot, 0.0)
        c = np.cumsum(rows, axis=1)
        c[:, -1] = np.where(tot[:, 0] > 0, 1.0, 0.0)
        cdfs.append(c)
    return cdfs, hs


def sample_bridges(k: WalkKernel, N: int, n_samples: int, seed=None) -> np.ndarray:
    """``n_samples`` exact bridge samples as an ``(n_samples, N+1)`` array."""
    if partition_function(k, N) == -math.inf:
        raise ZeroBridgeProbability(f"no bridge of length {N} has positive probability")
    cdfs, _ = _tilted_cdfs(k, N)
    rng = make_rng(seed)
    out = np.zeros((n_samples, N + 1), dtype=np.int64)
    cur = np.zeros(n_samples, dtype=np.int64)
    for n in range(N):
        u = rng.random(n_samples)
        c = cdfs[n][cur]
        cur = (c <= u[:, None]).sum(axis=1)
        out[:, n + 1] = cur
    return out


def sample_bridge(k: WalkKernel, N: int, seed=None) -> BridgePath:
    """One exact sample from the bridge law of ``k``."""
    return BridgePath(tuple(sample_bridges(k, N, 1, seed)[0]))


def height_marginal(model: Model, N: int, n: int) -> np.ndarray:
    """Exact law of ``X_n`` under the bridge measure, as a vector on ``{0..M}``."""
    if not 0 <= n <= N:
        raise ValueError("need 0 <= n <= N")
    size = _reach(model, N)
    T = transfer(model, size)
    fw, _ = _forward(T, n)
    bw, _ = _backward(T, N - n)
    p = fw[n] * bw[0]
    tot = p.sum()
    if tot <= 0:
        raise ZeroBridgeProbability(f"no bridge of length {N}")
    out = np.zeros(model.cutoff + 1)
    out[:size] = p / tot
    return out


def midpoint_marginals(model: Model, N_list: Iterable[int]) -> dict:
    """``{N: law of X_{N/2}}`` for even N."""
    return {N: height_marginal(model, N, N // 2) for N in N_list}
