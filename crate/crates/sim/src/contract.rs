//! Payment rules from principal returns to agent payments.

use crate::error::{Result, SimError};

const CONTRACT_TOL: f64 = 1e-9;

/// A contract is either linear (`v(r) = alpha * r`) or a piecewise-linear
/// concave, non-decreasing rule given by breakpoints spanning [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub enum Contract {
    Linear {
        alpha: f64,
    },
    /// Breakpoints `(return, payment)` with strictly increasing returns,
    /// non-decreasing payments, and non-increasing segment slopes.
    PiecewiseConcave {
        points: Vec<(f64, f64)>,
    },
}

impl Contract {
    pub fn linear(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(SimError::InvalidContract(format!(
                "alpha = {alpha} outside [0, 1]"
            )));
        }
        Ok(Contract::Linear { alpha })
    }

    pub fn piecewise_concave(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(SimError::InvalidContract(
                "need at least two breakpoints".into(),
            ));
        }
        if points.first().unwrap().0 > -1.0 || points.last().unwrap().0 < 1.0 {
            return Err(SimError::InvalidContract(
                "breakpoints must span [-1, 1]".into(),
            ));
        }
        let mut prev_slope = f64::INFINITY;
        for w in points.windows(2) {
            let (r0, v0) = w[0];
            let (r1, v1) = w[1];
            if r1 <= r0 {
                return Err(SimError::InvalidContract(
                    "breakpoint returns must strictly increase".into(),
                ));
            }
            let slope = (v1 - v0) / (r1 - r0);
            if slope < -CONTRACT_TOL {
                return Err(SimError::InvalidContract(
                    "payments must be non-decreasing in the return".into(),
                ));
            }
            if slope > prev_slope + CONTRACT_TOL {
                return Err(SimError::InvalidContract(
                    "segment slopes must be non-increasing (concavity)".into(),
                ));
            }
            prev_slope = slope;
        }
        Ok(Contract::PiecewiseConcave { points })
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Contract::Linear { .. })
    }

    pub fn linear_alpha(&self) -> Option<f64> {
        match self {
            Contract::Linear { alpha } => Some(*alpha),
            Contract::PiecewiseConcave { .. } => None,
        }
    }

    /// Payment owed for a realized return.
    pub fn payment(&self, r: f64) -> f64 {
        match self {
            Contract::Linear { alpha } => alpha * r,
            Contract::PiecewiseConcave { points } => {
                // Clamp-extrapolate with the edge segments outside the span.
                if r <= points[0].0 {
                    let (r0, v0) = points[0];
                    let (r1, v1) = points[1];
                    return v0 + (r - r0) * (v1 - v0) / (r1 - r0);
                }
                for w in points.windows(2) {
                    let (r0, v0) = w[0];
                    let (r1, v1) = w[1];
                    if r <= r1 {
                        return v0 + (r - r0) * (v1 - v0) / (r1 - r0);
                    }
                }
                let n = points.len();
                let (r0, v0) = points[n - 2];
                let (r1, v1) = points[n - 1];
                v1 + (r - r1) * (v1 - v0) / (r1 - r0)
            }
        }
    }

    /// Largest segment slope (payment share of marginal return).
    pub fn max_slope(&self) -> f64 {
        match self {
            Contract::Linear { alpha } => *alpha,
            Contract::PiecewiseConcave { points } => {
                // Concavity puts the largest slope on the first segment.
                let (r0, v0) = points[0];
                let (r1, v1) = points[1];
                (v1 - v0) / (r1 - r0)
            }
        }
    }

    /// Checks that the principal's net utility `r - v(r)` stays inside
    /// [-1, 1] and is non-decreasing over returns in [-1, 1]; required by
    /// learner-backed selection so that rewards map affinely onto unit-range
    /// losses and monotonicity keeps its direction.
    pub fn supports_learner_backend(&self) -> Result<()> {
        match self {
            Contract::Linear { .. } => Ok(()),
            Contract::PiecewiseConcave { points } => {
                if self.max_slope() > 1.0 + CONTRACT_TOL {
                    return Err(SimError::InvalidContract(
                        "learner-backed selection needs payment slopes at most 1 \
                         so net utility is monotone in the return"
                            .into(),
                    ));
                }
                for &(r, _) in points {
                    if !(-1.0..=1.0).contains(&r) {
                        continue;
                    }
                    let u = r - self.payment(r);
                    if !(-1.0 - CONTRACT_TOL..=1.0 + CONTRACT_TOL).contains(&u) {
                        return Err(SimError::InvalidContract(format!(
                            "net utility {u} at return {r} leaves [-1, 1]"
                        )));
                    }
                }
                for &r in &[-1.0, 1.0] {
                    let u = r - self.payment(r);
                    if !(-1.0 - CONTRACT_TOL..=1.0 + CONTRACT_TOL).contains(&u) {
                        return Err(SimError::InvalidContract(format!(
                            "net utility {u} at return {r} leaves [-1, 1]"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn linear_pays_exact_fraction() {
        let c = Contract::linear(0.3).unwrap();
        assert_eq!(c.payment(0.5), 0.3 * 0.5);
        assert_eq!(c.payment(-1.0), -0.3);
    }

    #[test]
    fn linear_alpha_is_bounded() {
        assert!(Contract::linear(1.1).is_err());
        assert!(Contract::linear(-0.1).is_err());
    }

    #[test]
    fn piecewise_validation() {
        // Concave non-decreasing over [-1, 1].
        let ok = Contract::piecewise_concave(vec![(-1.0, -0.8), (0.0, 0.0), (1.0, 0.5)]);
        assert!(ok.is_ok());
        // Convex kink rejected.
        let convex = Contract::piecewise_concave(vec![(-1.0, 0.0), (0.0, 0.1), (1.0, 0.9)]);
        assert!(convex.is_err());
        // Decreasing payment rejected.
        let dec = Contract::piecewise_concave(vec![(-1.0, 0.5), (1.0, 0.0)]);
        assert!(dec.is_err());
        // Span must cover [-1, 1].
        let short = Contract::piecewise_concave(vec![(-0.5, 0.0), (1.0, 0.5)]);
        assert!(short.is_err());
    }

    #[test]
    fn piecewise_interpolates() {
        let c = Contract::piecewise_concave(vec![(-1.0, -0.8), (0.0, 0.0), (1.0, 0.5)]).unwrap();
        assert_abs_diff_eq!(c.payment(-0.5), -0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(c.payment(0.5), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(c.payment(0.0), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn learner_backend_gate() {
        assert!(Contract::linear(0.9)
            .unwrap()
            .supports_learner_backend()
            .is_ok());
        // First-segment slope 1.5 would make net utility decrease in return.
        let steep =
            Contract::piecewise_concave(vec![(-1.0, -1.5), (0.0, 0.0), (1.0, 0.2)]).unwrap();
        assert!(steep.supports_learner_backend().is_err());
    }
}
