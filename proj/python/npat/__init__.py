"""Back-and-forth nudging time reversal for 2D photoacoustic tomography.

Fields are numpy arrays of shape (ny, nx); row j holds y = y0 + j*h.
"""

from ._npat import (
    Grid,
    NpatError,
    Setup,
    Traces,
    apply_R,
    check_visibility,
    corner_setup,
    domain_of_influence,
    energy_inner,
    energy_norm,
    lambda_op,
    load_config,
    nudge_cycle,
    phantom,
    project_K,
    reconstruct,
    s_cycle,
    set_threads,
    threads,
    trace_ray,
    travel_times,
)

__all__ = [name for name in dir() if not name.startswith("_")]
