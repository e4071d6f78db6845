"""Linear-feedback capacity regions of Gaussian MAC/BC pairs.

Computes feedback capacity regions and sum capacities of two-user (and
symmetric K-user) Gaussian multiple-access and broadcast channels, and
certifies the uplink/downlink duality of linear-feedback coding schemes
through exact matrix identities, root solving, covariance optimization,
and Monte-Carlo simulation of the inner codes.
"""

__version__ = "0.1.0"

from ._kernels import backend_name
from .blockmat import (
    BlockTriangularSet,
    bc_N_matrices,
    exchange_matrix,
    kron_lift,
    mac_M_matrices,
    omega,
    omega_inv,
    omega_tilde,
    omega_tilde_inv,
    psd_sqrt,
    reverse,
    reverse_set,
)
from .duality import (
    DualityReport,
    map_bc_to_mac_params,
    map_mac_to_bc_params,
    map_scheme_params_corollary5,
    verify_duality_identities,
)
from .frontier import RegionFrontier, hausdorff_distance
from .regions import (
    ChannelSpec,
    CovariancePair,
    FeedbackDesign,
    dual_channel_spec,
    effective_bc_channel,
    effective_mac_channel,
    mac_nofb_pentagon,
    maximize_sum_rate,
    multiletter_inner_bound,
    search_feedback_design,
)
from .simulate import (
    BlockSample,
    PowerReport,
    RngSpec,
    simulate_bc_block,
    simulate_mac_block,
    verify_power_lemma,
)
from .siso import (
    k_user_symmetric_sum_capacity,
    mac_siso_region,
    mac_siso_sum_capacity,
    miso_mac_region,
    nofb_bc_siso_region,
    ozarow_pentagon,
    phi_k,
    rho_star,
    simo_mac_region,
    symmetric_sum_capacity,
    zeta,
)
