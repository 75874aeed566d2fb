//! Continued-fraction engine: digit streams, convergents, `θ_n` enclosures
//! and `‖q_nβ‖`.

mod convergents;
mod digits;
mod qnorm;
mod theta;

pub use convergents::{convergents, Convergent, ConvergentTable};
pub use digits::{Boundedness, CfDigits, DigitRule, DigitSource};
pub use qnorm::{qn_beta_norm, NormEngine};
pub use theta::{
    alpha_enclosure, cross_theta_integer, lambda_hat, theta, Budget, LambdaHat, Sign, ThetaValue,
};

pub(crate) fn ser_bigint<S: serde::Serializer>(
    v: &num_bigint::BigInt,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}
