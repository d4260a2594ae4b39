"""Restricted-denominator rational Arnoldi for phi-functions of sectorial operators."""

from .arnoldi import ArnoldiDecomposition, arnoldi_extend, arnoldi_init, subdiagonal_product
from .bounds import (
    CROUZEIX_K,
    THETA_STAR,
    BoundInputs,
    BoundReport,
    bound_apriori,
    bound_aposteriori,
    bound_bounded_sector,
    capacity_bound,
)
from .operators import (
    SectorialOperator,
    ShiftedFactorization,
    apply_Z,
    factor_shift,
    make_advection_diffusion,
    read_coordinate,
)
from .phifun import PhiApproximation, PhiRequest, phi_matrix_small, phi_oracle_dense, phi_scalar
from .residual import StoppingRule, generalized_residual, should_stop
from .sector import SectorInfo, field_of_values_boundary, sector_info, sector_semiangle
from .solver import rd_arnoldi_phi
from .tauselect import TauPolicy, calibrate_on_coarse, reuse_decision, tau_optimal, tau_window
