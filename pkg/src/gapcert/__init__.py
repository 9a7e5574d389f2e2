"""Spectral-gap certificates for transfer operators of intermittent interval maps."""

__version__ = "0.1.0"

from .certification import (
    Certificate,
    bvp_threshold,
    certified_gap_size,
    certify,
    doeblin_fortet_gap,
    holder_threshold,
    perturbation_radius,
    projection_norm_bound,
)
from .errors import (
    CapabilityError,
    ConvergenceError,
    DomainError,
    GapCertError,
    InequalityViolation,
    UsageError,
    ValidationError,
)
from .interval_maps import (
    MapSpec,
    estimate_theta,
    make_doubling,
    make_logistic,
    make_pomeau_manneville,
    make_tent,
    make_unimodal,
    map_from_dict,
    map_from_json,
)
from .optimal_transport import DiscreteMeasure, dual_contraction_check, kantorovich_duality_check, w1, w_alpha_lp
from .regularity import (
    GridFunction,
    Space,
    banach_product_check,
    bvp_bruteforce_oracle,
    bvp_seminorm,
    centered_norm_excess,
    exp_distance,
    holder_implies_bvp,
    holder_seminorm,
)
from .transfer_op import (
    DiscretizedOperator,
    SpectralData,
    apply,
    assemble,
    correlation_sequence,
    eigendata,
    gap_decay_check,
    invariance_residual,
    lasota_yorke_check,
    rpf_measure,
)
