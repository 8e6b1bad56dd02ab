"""Histogram-preserving steganography via permutation coding.

Embedding produces an exact rearrangement of the host (first-order perfect
steganography); the codec is an adaptive arithmetic coder with reverse
model adaptation.  Partitioned coding trades embedding rate for distortion
under a host-to-watermark power ratio constraint.
"""

from .host import (
    Histogram,
    HostSequence,
    HostError,
    LogCount,
    Message,
    capacity_bits,
    compute_histogram,
    entropy_bits,
    load_host,
    log_multinomial,
    multinomial_exact,
    robbins_log2_bounds,
    save_host,
)
from .coder import (
    CapacityError,
    StegoKey,
    apply_key,
    derive_key,
    perm_decode,
    perm_encode,
    HAVE_KERNEL,
)
from .partition import (
    IndexPartitioning,
    SupportPartitioning,
    count_support_partitionings,
    lsb_pairing,
    partitioned_decode,
    partitioned_encode,
    support_induced,
    uniform_support_sequence,
)
from .analysis import (
    MetricsReport,
    avg_watermark_power,
    chebyshev_bound,
    compute_metrics,
    degree_of_host_change,
    efficiency_bounds,
    empirical_metrics,
    geometry,
    max_watermark_power,
    power_ratios,
    rate_and_bounds,
)
from .selector import (
    InfeasibleConstraintError,
    SelectionConstraint,
    SelectionResult,
    select_partitioning,
    verify_blind_agreement,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
