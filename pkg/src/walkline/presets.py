"""Named model families and the ``name(arg, ...)`` preset syntax.

==================  ==========================================================
``power-tail``      +-1 walk, ``phi(x) = delta/(2x) + gamma/x**2``
``square-well``     SOS model, ``V = v0 1_{X=0}``, +-1 steps
``double-step``     SOS model, ``V = v0 1_{X=0} + v1 1_{X=1}``, +-1 steps
``log-potential``   Metropolis walk for ``U = delta ln(X+1)``
``geometric-step``  general-step Metropolis, ``W0 = J|x-y| + c``, ``|x-y| <= 4``
==================  ==========================================================
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .core import FORBIDDEN, SosModel
from . import rw_to_sos

LN2 = math.log(2.0)

PARAMS = {
    "power-tail": ("delta", "gamma"),
    "square-well": ("v0",),
    "double-step": ("v0", "v1"),
    "log-potential": ("delta",),
    "geometric-step": ("J", "delta"),
}

DEFAULTS = {"gamma": 0.0, "delta": 0.0}


@dataclass(frozen=True)
class Preset:
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in PARAMS:
            raise ValueError(f"unknown preset {self.name!r}; choose from {sorted(PARAMS)}")
        full = {}
        for p in PARAMS[self.name]:
            if p in self.params:
                full[p] = float(self.params[p])
            elif p in DEFAULTS:
                full[p] = DEFAULTS[p]
            else:
                raise ValueError(f"preset {self.name!r} needs parameter {p!r}")
        extra = set(self.params) - set(full)
        if extra:
            raise ValueError(f"preset {self.name!r} got unexpected parameters {sorted(extra)}")
        object.__setattr__(self, "params", full)

    def __str__(self):
        args = ",".join(repr(self.params[p]) for p in PARAMS[self.name])
        return f"{self.name}({args})"

    def __getattr__(self, item):
        try:
            return self.__dict__["params"][item]
        except KeyError:
            raise AttributeError(item) from None


_PRESET_RE = re.compile(r"^\s*([a-z-]+)\s*(?:\((.*)\))?\s*$")


def parse_preset(text: str, **overrides) -> Preset:
    """Parse ``"square-well(-1)"`` or ``"power-tail(delta=1.2, gamma=0)"``."""
    m = _PRESET_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse preset {text!r}")
    name, args = m.group(1), m.group(2)
    names = PARAMS.get(name)
    if names is None:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PARAMS)}")
    params = {}
    if args and args.strip():
        for i, tok in enumerate(a.strip() for a in args.split(",")):
            if "=" in tok:
                k, v = (s.strip() for s in tok.split("=", 1))
            else:
                if i >= len(names):
                    raise ValueError(f"too many arguments for {name!r}")
                k, v = names[i], tok
            params[k] = float(v)
    params.update({k: v for k, v in overrides.items() if v is not None})
    return Preset(name, params)


def wall_potential_model(V_head, M: int) -> SosModel:
    """+-1 SOS model with ``V`` given near the wall and zero beyond, ``W = ln 2`` per step."""
    V = np.zeros(M + 1)
    V[: len(V_head)] = V_head
    W = np.full((M + 1, M + 1), FORBIDDEN)
    i = np.arange(M)
    W[i, i + 1] = LN2
    W[i + 1, i] = LN2
    return SosModel(V, W)


def square_well_model(v0: float, M: int) -> SosModel:
    return wall_potential_model([v0], M)


def double_step_model(v0: float, v1: float, M: int) -> SosModel:
    return wall_potential_model([v0, v1], M)


def build_sos(preset: Preset, M: int, hold_factor: float = 0.5, wall_mode="metropolis-wall"):
    """SOS model for any preset (walk presets go through their translation)."""
    p = preset.params
    if preset.name == "square-well":
        return square_well_model(p["v0"], M)
    if preset.name == "double-step":
        return double_step_model(p["v0"], p["v1"], M)
    if preset.name == "power-tail":
        return rw_to_sos.sos_from_phi(rw_to_sos.power_tail_phi(p["delta"], p["gamma"], M))
    if preset.name == "log-potential":
        U = rw_to_sos.log_potential(p["delta"], M)
        return rw_to_sos.sos_from_metropolis(U, wall_mode, hold_factor)
    if preset.name == "geometric-step":
        U = rw_to_sos.log_potential(p["delta"], M)
        return rw_to_sos.sos_from_general(rw_to_sos.geometric_base(p["J"]), U)
    raise ValueError(preset.name)


def build_kernel(preset: Preset, M: int, hold_factor: float = 0.5, wall_mode="metropolis-wall"):
    """Walk kernel for a walk preset; SOS presets are not handled here."""
    p = preset.params
    if preset.name == "power-tail":
        return rw_to_sos.kernel_from_phi(rw_to_sos.power_tail_phi(p["delta"], p["gamma"], M))
    if preset.name == "log-potential":
        U = rw_to_sos.log_potential(p["delta"], M)
        if wall_mode in ("reflect", rw_to_sos.WallMode.REFLECT):
            return rw_to_sos.metropolis_reflect_kernel(U, hold_factor)
        return rw_to_sos.metropolis_full_kernel(U, hold_factor)
    if preset.name == "geometric-step":
        U = rw_to_sos.log_potential(p["delta"], M)
        return rw_to_sos.general_metropolis_kernel(rw_to_sos.geometric_base(p["J"]), U)
    raise ValueError(f"{preset.name!r} is an SOS preset; invert it with sos_to_rw")
