//! Mollified polyhedral gauges and the checks around them.

pub mod approx;
pub mod mollified;
pub mod quadrature;
pub mod regions;
pub mod smooth;
pub mod verify;

pub use approx::{approx_norm_error, approx_shielding_residual, ApproxNorm};
pub use mollified::{mollifier_constant, MollifiedGauge, QuadratureSpec};
pub use regions::{region_decomposition, Interface, Region, RegionDecomposition};
pub use smooth::{c2_self_shielding_check, SelfShieldReport, SmoothNorm};
pub use verify::{
    eps_c_estimate, hessian_fd_error, shielding_sweep, shielding_verify, EpsCEstimate, ShieldPoint,
    ShieldSweep, ShieldTolerances,
};
