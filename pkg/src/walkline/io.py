"""JSON model files and CSV outputs.

Kernel JSON::

    {"kind": "kernel", "cutoff": M, "structure": "...", "wall_mode": "...", "rows": [[...], ...]}

SOS JSON (infinite energies are ``null``)::

    {"kind": "sos", "cutoff": M, "V": [...], "W_diag": [...],
     "W_offdiag": [[W(0,1), W(1,2), ...], [W(0,2), ...], ...],
     "tail": {"delta": d, "gamma": g} | null}

``W_offdiag[k-1][x]`` is ``W(x, x+k)``; bands are listed up to the largest
offset with a finite entry.  Floats are written with 17 significant digits
so files round-trip bit-exactly.
"""
from __future__ import annotations

import csv
import json
import math
from typing import IO, Iterable

import numpy as np

from .core import SosModel, TailInfo, WalkKernel

FLOAT_FMT = "{:.17g}"


def _num(v):
    v = float(v)
    return None if math.isinf(v) else v


def _arr(values):
    return np.array([math.inf if v is None else float(v) for v in values])


def kernel_to_dict(k: WalkKernel) -> dict:
    return {
        "kind": "kernel",
        "cutoff": k.cutoff,
        "structure": k.structure.value,
        "wall_mode": k.wall_mode.value,
        "rows": [[float(v) for v in row] for row in k.P],
    }


def kernel_from_dict(d: dict) -> WalkKernel:
    P = np.array(d["rows"], dtype=float)
    if P.shape[0] != d["cutoff"] + 1:
        raise ValueError("rows do not match cutoff")
    return WalkKernel(P, d["structure"], d.get("wall_mode", "reflect"))


def sos_to_dict(m: SosModel) -> dict:
    M = m.cutoff
    W = m.W
    bands = [[_num(v) for v in np.diag(W, k)] for k in range(1, m.max_step + 1)]
    tail = None if m.tail is None else {"delta": m.tail.delta, "gamma": m.tail.gamma}
    return {
        "kind": "sos",
        "cutoff": M,
        "V": [float(v) for v in m.V],
        "W_diag": [_num(v) for v in np.diag(W)],
        "W_offdiag": bands,
        "tail": tail,
    }


def sos_from_dict(d: dict) -> SosModel:
    M = int(d["cutoff"])
    W = np.full((M + 1, M + 1), math.inf)
    np.fill_diagonal(W, _arr(d["W_diag"]))
    for k, band in enumerate(d.get("W_offdiag", []), start=1):
        band = _arr(band)
        if band.size != M + 1 - k:
            raise ValueError(f"W_offdiag band {k} has length {band.size}, expected {M + 1 - k}")
        i = np.arange(M + 1 - k)
        W[i, i + k] = band
        W[i + k, i] = band
    tail = d.get("tail")
    return SosModel(np.asarray(d["V"], dtype=float), W,
                    None if tail is None else TailInfo(tail["delta"], tail.get("gamma", 0.0)))


def model_to_json(model) -> str:
    d = kernel_to_dict(model) if isinstance(model, WalkKernel) else sos_to_dict(model)
    return json.dumps(d, allow_nan=False)


def model_from_json(text: str):
    d = json.loads(text)
    kind = d.get("kind") or ("kernel" if "rows" in d else "sos")
    return kernel_from_dict(d) if kind == "kernel" else sos_from_dict(d)


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT.format(float(v))
    return str(v)


def write_csv(fh: IO[str], header: Iterable[str], rows: Iterable[Iterable]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([fmt(v) for v in row])


def write_paths_csv(fh: IO[str], paths: np.ndarray, chunk: int = 100_000) -> None:
    """One line per (sample, time): columns ``n, x_n, sample_id``.

    Integers are formatted through a lookup table, which is several times
    faster than ``np.savetxt`` for the 10^6-sample case.
    """
    fh.write("n,x_n,sample_id\n")
    paths = np.asarray(paths)
    n_samples, L = paths.shape
    if n_samples == 0:
        return
    lut = np.array([str(i) for i in range(max(L, n_samples, int(paths.max()) + 1))], dtype=object)
    head = lut[:L] + ","
    for start in range(0, n_samples, chunk):
        block = paths[start:start + chunk]
        tail = "," + lut[start:start + block.shape[0]] + "\n"
        lines = head[None, :] + lut[block] + tail[:, None]
        fh.write("".join(lines.ravel().tolist()))


def read_paths_csv(fh: IO[str]) -> np.ndarray:
    data = np.loadtxt(fh, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    L = int(data[:, 0].max()) + 1
    return data[:, 1].reshape(-1, L)


def write_marginal_csv(fh: IO[str], p: np.ndarray) -> None:
    write_csv(fh, ["x", "probability"], ((x, float(v)) for x, v in enumerate(p)))
