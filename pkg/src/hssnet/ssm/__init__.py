from .params import DEFAULT_D_STATE, SSMParams, delta_rank_for, init_ssm_params
from .selective import discretize, scan_recurrence, scan_states, selective_scan
from .stcs import STCSMixer, normalize_modes, stcs_mix

__all__ = [
    "DEFAULT_D_STATE",
    "SSMParams",
    "STCSMixer",
    "delta_rank_for",
    "discretize",
    "init_ssm_params",
    "normalize_modes",
    "scan_recurrence",
    "scan_states",
    "selective_scan",
    "stcs_mix",
]
