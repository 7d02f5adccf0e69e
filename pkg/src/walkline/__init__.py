"""Random walks with reflecting walls and their solid-on-solid line models.

A reversible walk on ``{0, ..., M}`` and an SOS model with wall potential
``V`` and step energies ``W`` give identical bridge laws.  Translations run
in both directions, and the bridge law is computed exactly, not sampled.
"""
from .core import (
    FORBIDDEN,
    BridgePath,
    EdgeCoupling,
    GroundState,
    Regime,
    RegimeReport,
    SosModel,
    Structure,
    TailInfo,
    WalkKernel,
    WalklineError,
    WallMode,
    detailed_balance_residual,
    validate_kernel,
    w_from_detailed_balance,
)
from .rw_to_sos import (
    geometric_base,
    general_metropolis_kernel,
    invariant_potential_from_phi,
    kernel_from_phi,
    metropolis_full_kernel,
    metropolis_reflect_kernel,
    phi_from_rates,
    power_tail_phi,
    sos_from_general,
    sos_from_metropolis,
    sos_from_phi,
)
from .sos_to_rw import (
    continued_fraction_invert,
    double_step_analysis,
    kernel_from_sos,
    perron_ground_state,
    square_well_analysis,
)
from .bridge import (
    bridge_log_prob_rw,
    bridge_log_weight_sos,
    enumerate_bridges,
    height_marginal,
    partition_function,
    sample_bridges,
)
from .phase import classify, mean_height_diagnostic, phase_scan, wall_phase_closed_form
from .presets import Preset, build_kernel, build_sos, parse_preset

__version__ = "0.1.0"
