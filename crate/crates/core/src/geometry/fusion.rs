use super::{angle_diff, wrap_pi};
use crate::error::{Error, Result};

/// Scalar Gaussian estimate of an angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianScalarEstimate {
    /// Radians.
    pub mean: f64,
    /// Radians squared, strictly positive.
    pub variance: f64,
    pub timestamp: f64,
}

impl GaussianScalarEstimate {
    pub fn new(mean: f64, variance: f64, timestamp: f64) -> Self {
        GaussianScalarEstimate {
            mean,
            variance,
            timestamp,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.mean.is_finite() && self.variance.is_finite()) {
            return Err(Error::domain("non-finite estimate"));
        }
        if self.variance <= 0.0 {
            return Err(Error::domain(format!("non-positive variance {}", self.variance)));
        }
        Ok(())
    }
}

/// Weight of the second source, decreasing in the first source's variance
/// and capped at 0.5.
pub fn select_omega(p_var: f64, q_var: f64) -> Result<f64> {
    if !(p_var > 0.0 && q_var > 0.0) || !p_var.is_finite() || !q_var.is_finite() {
        return Err(Error::domain(format!(
            "variances must be positive, got {p_var} and {q_var}"
        )));
    }
    Ok((q_var / (p_var + q_var)).min(0.5))
}

/// Covariance intersection of two angle estimates with unknown
/// cross-correlation. `omega` weighs `b` and must lie in `(0, 0.5]`.
///
/// The means are combined on the circle: `b.mean` is first moved to within
/// π of `a.mean`, and the fused mean is wrapped into `(-π, π]`. The fused
/// timestamp is the later of the two inputs.
pub fn ci_fuse(
    a: &GaussianScalarEstimate,
    b: &GaussianScalarEstimate,
    omega: f64,
) -> Result<GaussianScalarEstimate> {
    if !(omega > 0.0 && omega <= 0.5) {
        return Err(Error::param(format!("omega {omega} outside (0, 0.5]")));
    }
    a.check()?;
    b.check()?;
    Ok(fuse_weighted(a, b, omega))
}

/// CI update for any weight in `(0, 1)`.
pub(crate) fn fuse_weighted(
    a: &GaussianScalarEstimate,
    b: &GaussianScalarEstimate,
    omega: f64,
) -> GaussianScalarEstimate {
    let info_a = (1.0 - omega) / a.variance;
    let info_b = omega / b.variance;
    let variance = 1.0 / (info_a + info_b);
    // b's mean unwrapped next to a's.
    let b_mean = a.mean + angle_diff(b.mean, a.mean);
    let mean = variance * (info_a * a.mean + info_b * b_mean);
    GaussianScalarEstimate {
        mean: wrap_pi(mean),
        variance,
        timestamp: a.timestamp.max(b.timestamp),
    }
}
