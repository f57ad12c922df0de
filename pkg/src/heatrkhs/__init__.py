"""Reproducing kernels of heat-equation reachable spaces and boundary-control synthesis."""

from .control import (ControlSignal, Scenario, StateField, SynthesisResult, apply_operator,
                      fd_oracle, feature, feature_gram, membership_residual, min_norm_control)
from .errors import (DomainError, HeatRKHSError, IllConditioned, PoleProximity,
                     TruncationFailure)
from .geometry import RegionKind, contains, sample_points
from .heat import TruncationPolicy, certified_tail_bound, dx_heat_kernel, dx_theta
from .kernels import (GramMatrix, KernelKind, KernelSpec, eval_K0, eval_kernel, gram,
                      psd_check)

__all__ = [
    "ControlSignal", "Scenario", "StateField", "SynthesisResult", "apply_operator",
    "fd_oracle", "feature", "feature_gram", "membership_residual", "min_norm_control",
    "DomainError", "HeatRKHSError", "IllConditioned", "PoleProximity", "TruncationFailure",
    "RegionKind", "contains", "sample_points",
    "TruncationPolicy", "certified_tail_bound", "dx_heat_kernel", "dx_theta",
    "GramMatrix", "KernelKind", "KernelSpec", "eval_K0", "eval_kernel", "gram", "psd_check",
]
