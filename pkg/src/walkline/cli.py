"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 mathematical infeasibility
(positivity / convergence), 3 I/O or configuration error.  Set
``WALKLINE_LOG=DEBUG`` (or INFO, ...) for diagnostics on stderr.
"""
from __future__ import annotations

import argparse
import contextlib
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import bridge, io, phase, presets, rw_to_sos, sos_to_rw, verify
from .core import (
    CutoffTooSmall,
    NoConvergence,
    GroundStateMismatch,
    PositivityFailure,
    SosModel,
    WalkKernel,
    ZeroBridgeProbability,
    w_from_detailed_balance,
)

log = logging.getLogger("walkline")

EXIT_OK, EXIT_VERIFY, EXIT_MATH, EXIT_IO = 0, 1, 2, 3

INFEASIBLE = (PositivityFailure, NoConvergence, GroundStateMismatch, ZeroBridgeProbability, CutoffTooSmall)

FIG1_DELTAS = (1.2, 0.5, -0.2, -1.2)


@dataclass
class RunConfig:
    command: str
    direction: Optional[str] = None
    preset: Optional[str] = None
    model: Optional[str] = None
    M: Optional[int] = None
    N: Optional[int] = None
    n: Optional[int] = None
    N_list: list = field(default_factory=lambda: [400, 1600])
    seed: Optional[int] = None
    samples: int = 1
    lam: str = "auto"
    wall: str = "metropolis-wall"
    hold: float = 0.5
    grid: dict = field(default_factory=dict)
    deltas: list = field(default_factory=lambda: list(FIG1_DELTAS))
    xmax: int = 10
    only: list = field(default_factory=list)
    out: str = "-"
    kernel_out: Optional[str] = None
    jobs: int = 1
    tolerances: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def parse_range(text: str) -> list:
    """``lo:hi:count`` (inclusive, evenly spaced) or a single number."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"range must be lo:hi:count, got {text!r}")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    return [float(v) for v in np.linspace(lo, hi, count)]


def _common(p):
    p.add_argument("--M", type=int, help="state-space cutoff")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="-", help="output file ('-' for stdout)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--tol-residual", type=float, dest="tol_residual",
                   help="relative eigenvalue increment for power iteration")
    p.add_argument("--tol-groundstate", type=float, dest="tol_groundstate",
                   help="row-sum tolerance for ground-state kernels")
    p.add_argument("--save-config", help="also write the parsed run configuration as JSON")


def _preset_args(p):
    p.add_argument("--preset", help="preset name or 'name(args)'")
    for name in ("delta", "gamma", "v0", "v1", "J"):
        p.add_argument(f"--{name}", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="walkline", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("translate", help="walk <-> SOS translation")
    p.add_argument("direction", choices=["rw2sos", "sos2rw"])
    _preset_args(p)
    p.add_argument("--model", help="input model JSON instead of a preset")
    p.add_argument("--lambda", dest="lam", default="auto", help="auto | rho1 | <float>")
    p.add_argument("--wall", default="metropolis-wall", choices=["reflect", "metropolis-wall"])
    p.add_argument("--hold", type=float, default=0.5, help="Metropolis proposal factor in (0, 1/2]")
    p.add_argument("--kernel-out", help="rw2sos: also write the walk kernel JSON here")
    _common(p)

    p = sub.add_parser("sample", help="exact bridge samples (path CSV)")
    _preset_args(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--wall", default="metropolis-wall", choices=["reflect", "metropolis-wall"])
    _common(p)

    p = sub.add_parser("marginal", help="exact height marginal (CSV)")
    _preset_args(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--n", type=int, help="time index (default N/2)")
    p.add_argument("--wall", default="metropolis-wall", choices=["reflect", "metropolis-wall"])
    _common(p)

    p = sub.add_parser("scan", help="phase scan (CSV)")
    p.add_argument("--preset", required=True)
    for name in ("delta", "gamma", "v0", "v1", "J"):
        p.add_argument(f"--{name}", help="value or lo:hi:count")
    p.add_argument("--N-list", dest="N_list", default="400,1600")
    _common(p)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--only", action="append", default=[], help="check group (repeatable)")
    p.add_argument("--N", type=int, help="bridge length for the equivalence checks")
    _common(p)

    p = sub.add_parser("fig1", help="wall potential curves for the power-tail family (CSV)")
    p.add_argument("--deltas", default=",".join(str(d) for d in FIG1_DELTAS))
    p.add_argument("--xmax", type=int, default=10)
    _common(p)
    return ap


def config_from_args(a) -> RunConfig:
    tol = {k: v for k, v in (("residual", getattr(a, "tol_residual", None)),
                             ("groundstate", getattr(a, "tol_groundstate", None))) if v is not None}
    cfg = RunConfig(command=a.command, M=a.M, seed=a.seed, out=a.out, jobs=a.jobs, tolerances=tol)
    if a.command in ("translate", "sample", "marginal"):
        if a.preset is None and not getattr(a, "model", None):
            raise ValueError("--preset (or --model) is required")
        if a.preset is not None:
            cfg.preset = str(presets.parse_preset(
                a.preset, delta=a.delta, gamma=a.gamma, v0=a.v0, v1=a.v1, J=a.J))
        cfg.wall = a.wall
    if a.command == "translate":
        cfg.direction, cfg.model, cfg.lam, cfg.hold = a.direction, a.model, a.lam, a.hold
        cfg.kernel_out = a.kernel_out
    elif a.command in ("sample", "marginal"):
        cfg.N = a.N
        if a.command == "sample":
            cfg.samples = a.samples
        else:
            cfg.n = a.N // 2 if a.n is None else a.n
    elif a.command == "scan":
        if a.preset not in presets.PARAMS:
            raise ValueError(f"unknown preset family {a.preset!r}; choose from {sorted(presets.PARAMS)}")
        cfg.preset = a.preset
        names = presets.PARAMS[cfg.preset]
        cfg.grid = {n: parse_range(getattr(a, n)) for n in names if getattr(a, n) is not None}
        missing = [n for n in names if n not in cfg.grid and n not in presets.DEFAULTS]
        if missing:
            raise ValueError(f"scan over {cfg.preset} needs --{missing[0]}")
        cfg.N_list = [int(v) for v in a.N_list.split(",")]
    elif a.command == "verify":
        cfg.only = [g for item in a.only for g in item.split(",") if g]
        cfg.N = a.N
    elif a.command == "fig1":
        cfg.deltas = [float(v) for v in a.deltas.split(",")]
        cfg.xmax = a.xmax
    return cfg


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _walk_for(cfg: RunConfig, M: int) -> WalkKernel:
    p = presets.parse_preset(cfg.preset)
    if p.name in ("square-well", "double-step"):
        m = presets.build_sos(p, M)
        return sos_to_rw.kernel_from_sos(m, sos_to_rw.perron_ground_state(m), **_gs_tol(cfg))
    return presets.build_kernel(p, M, cfg.hold, cfg.wall)


def _gs_tol(cfg):
    return {"tol": cfg.tolerances["groundstate"]} if "groundstate" in cfg.tolerances else {}


def _pr_tol(cfg):
    return {"tol": cfg.tolerances["residual"]} if "residual" in cfg.tolerances else {}


def cmd_translate(cfg: RunConfig) -> int:
    M = cfg.M or 512
    if cfg.direction == "rw2sos":
        if cfg.model:
            with open(cfg.model) as fh:
                k = io.model_from_json(fh.read())
            if not isinstance(k, WalkKernel):
                raise ValueError("rw2sos needs a kernel JSON model")
            m = w_from_detailed_balance(k)
        else:
            p = presets.parse_preset(cfg.preset)
            if p.name in ("square-well", "double-step"):
                raise ValueError(f"{p.name} is an SOS preset; use sos2rw")
            k = presets.build_kernel(p, M, cfg.hold, cfg.wall)
            m = presets.build_sos(p, M, cfg.hold, cfg.wall)
        if cfg.kernel_out:
            with open(cfg.kernel_out, "w") as fh:
                fh.write(io.model_to_json(k) + "\n")
        with _output(cfg.out) as fh:
            fh.write(io.model_to_json(m) + "\n")
        return EXIT_OK

    if cfg.model:
        with open(cfg.model) as fh:
            m = io.model_from_json(fh.read())
        if not isinstance(m, SosModel):
            raise ValueError("sos2rw needs an SOS JSON model")
    else:
        p = presets.parse_preset(cfg.preset)
        if p.name not in ("square-well", "double-step", "power-tail"):
            raise ValueError(f"sos2rw takes an SOS preset, got {p.name}")
        m = presets.build_sos(p, M)
    if cfg.lam == "auto":
        g = sos_to_rw.perron_ground_state(m, **_pr_tol(cfg))
        log.info("rho = %.17g", g.rho)
        k = sos_to_rw.kernel_from_sos(m, g, **_gs_tol(cfg))
    else:
        lam = 0.0 if cfg.lam == "rho1" else float(cfg.lam)
        try:
            inv = sos_to_rw.continued_fraction_invert(m.V, lam)
        except PositivityFailure as exc:
            print(f"positivity failure at X={exc.index} (a_X={exc.value:.6g}) for lambda={lam:g}",
                  file=sys.stderr)
            raise
        k = rw_to_sos.kernel_from_phi(inv.phi)
    with _output(cfg.out) as fh:
        fh.write(io.model_to_json(k) + "\n")
    return EXIT_OK


def cmd_fig1(cfg: RunConfig) -> int:
    cols = [rw_to_sos.sos_from_phi(rw_to_sos.power_tail_phi(d, 0.0, cfg.xmax)).V for d in cfg.deltas]
    header = ["X"] + [f"V_{d:g}" for d in cfg.deltas]
    with _output(cfg.out) as fh:
        io.write_csv(fh, header, ([X] + [float(c[X]) for c in cols] for X in range(cfg.xmax + 1)))
    return EXIT_OK


def cmd_sample(cfg: RunConfig) -> int:
    M = cfg.M or cfg.N
    k = _walk_for(cfg, M)
    paths = bridge.sample_bridges(k, cfg.N, cfg.samples, cfg.seed)
    with _output(cfg.out) as fh:
        io.write_paths_csv(fh, paths)
    return EXIT_OK


def cmd_marginal(cfg: RunConfig) -> int:
    M = cfg.M or cfg.N
    p = presets.parse_preset(cfg.preset)
    model = presets.build_sos(p, M, cfg.hold, cfg.wall)
    with _output(cfg.out) as fh:
        io.write_marginal_csv(fh, bridge.height_marginal(model, cfg.N, cfg.n))
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    grid = phase.make_grid(cfg.preset, **cfg.grid)
    rows = phase.phase_scan(grid, M=cfg.M or 2000, N_list=cfg.N_list, jobs=cfg.jobs)
    names = list(cfg.grid)
    header = names + ["closed_form_regime", "numeric_regime", "growth_ratio", "agreement"]

    def line(r):
        numeric = r.numeric.value if r.numeric is not None else "ERROR"
        closed = r.closed_form.value if r.closed_form is not None else "ERROR"
        return [r.preset.params[n] for n in names] + [closed, numeric, r.growth_ratio, r.agreement]

    with _output(cfg.out) as fh:
        io.write_csv(fh, header, (line(r) for r in rows))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    overrides = {}
    if cfg.N is not None:
        overrides["N"] = cfg.N
    if cfg.seed is not None:
        overrides["seed"] = cfg.seed
    if cfg.jobs > 1:
        overrides["jobs"] = cfg.jobs
    results = verify.run(cfg.only or None, **overrides)
    with _output(cfg.out) as fh:
        for r in results:
            fh.write(r.line() + "\n")
        n_ok = sum(r.passed for r in results)
        fh.write(f"{n_ok}/{len(results)} checks passed\n")
    return EXIT_OK if n_ok == len(results) else EXIT_VERIFY


COMMANDS = {
    "translate": cmd_translate,
    "fig1": cmd_fig1,
    "sample": cmd_sample,
    "marginal": cmd_marginal,
    "scan": cmd_scan,
    "verify": cmd_verify,
}


def _glue_negative_values(argv):
    """``--v0 -2:0:5`` -> ``--v0=-2:0:5`` so argparse does not take the range for a flag."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok.startswith("--") and "=" not in tok:
            nxt = next(it, None)
            if nxt is not None and len(nxt) > 1 and nxt[0] == "-" and (nxt[1].isdigit() or nxt[1] == "."):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    level = os.environ.get("WALKLINE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_negative_values(argv))
    try:
        cfg = config_from_args(args)
        if args.save_config:
            with open(args.save_config, "w") as fh:
                fh.write(cfg.to_json() + "\n")
        return COMMANDS[cfg.command](cfg)
    except INFEASIBLE as exc:
        print(f"walkline: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MATH
    except (OSError, ValueError, KeyError) as exc:
        print(f"walkline: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
