//! Reference values the circuit pipeline is checked against.

pub mod analytic;
pub mod exact;
pub mod expm;
pub mod faddeeva;
pub mod quadrature;

pub use analytic::{
    analytic_delta_c, forward_integral, icf_from_phase_shift, phase_shift, TimeDomain,
};
pub use exact::{
    analytic_series, exact_icf, phase_shift_series, trotter_icf, trotter_propagator,
    trotter_reference, OracleMethod, OracleResult,
};
pub use expm::{expm_eigen, expm_taylor, matrix_exp};
pub use faddeeva::{erfc, erfcx, faddeeva};
