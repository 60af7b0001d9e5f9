//! Bounded one-dimensional maximization of a key-rate objective over the
//! source mean photon number.
//!
//! Rate curves are clamped at zero past the cutoff, so they can be flat over
//! subintervals and pure unimodal search is not safe. A coarse uniform grid
//! locates the best sample first; golden-section refinement then shrinks the
//! bracket around it. Flat regions tie-break toward the smallest mean photon
//! number, which is the operationally cheaper point.

use crate::{valid_pos, ModelError};

/// Number of uniform samples in the coarse bracketing stage.
const COARSE_SAMPLES: usize = 64;

/// Inverse golden ratio, the interval reduction factor per iteration.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Search bounds and stopping parameters for [`optimize_mu`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeSpec {
    pub lower: f64,
    pub upper: f64,
    /// Absolute tolerance on the located argument.
    pub tolerance: f64,
    /// Budget of objective evaluations for the refinement stage.
    pub max_evals: usize,
}

impl OptimizeSpec {
    pub fn new(
        lower: f64,
        upper: f64,
        tolerance: f64,
        max_evals: usize,
    ) -> Result<Self, ModelError> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(ModelError::out_of_range(
                "opt_lower",
                lower,
                "finite and < opt_upper",
            ));
        }
        if !valid_pos(tolerance) {
            return Err(ModelError::out_of_range(
                "opt_tol",
                tolerance,
                "finite and > 0",
            ));
        }
        if max_evals < 16 {
            return Err(ModelError::out_of_range(
                "max_evals",
                max_evals as f64,
                ">= 16",
            ));
        }
        Ok(Self {
            lower,
            upper,
            tolerance,
            max_evals,
        })
    }
}

impl Default for OptimizeSpec {
    fn default() -> Self {
        Self {
            lower: 0.0,
            upper: 2.0,
            tolerance: 1e-6,
            max_evals: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimizeError {
    #[error("objective returned a non-finite value at mu = {mu}")]
    NonFiniteProbe { mu: f64 },
    #[error(transparent)]
    InvalidSpec(#[from] ModelError),
}

/// Maximizes `rate_fn` on `[spec.lower, spec.upper]`, returning
/// `(mu_opt, rate_opt)`.
///
/// Deterministic for identical inputs. Flat objectives resolve to the lowest
/// argument in the bracket. Any non-finite probe aborts with the offending
/// argument identified.
pub fn optimize_mu<F>(rate_fn: F, spec: &OptimizeSpec) -> Result<(f64, f64), OptimizeError>
where
    F: Fn(f64) -> f64,
{
    // Re-validate so hand-built specs cannot bypass the invariants.
    let spec = OptimizeSpec::new(spec.lower, spec.upper, spec.tolerance, spec.max_evals)?;

    let probe = |mu: f64| -> Result<f64, OptimizeError> {
        let v = rate_fn(mu);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(OptimizeError::NonFiniteProbe { mu })
        }
    };

    // Coarse grid: strict improvement keeps the first (lowest) argmax.
    let step = (spec.upper - spec.lower) / (COARSE_SAMPLES - 1) as f64;
    let grid_at = |i: usize| {
        if i == COARSE_SAMPLES - 1 {
            spec.upper
        } else {
            spec.lower + step * i as f64
        }
    };
    let mut best_idx = 0;
    let mut best_mu = grid_at(0);
    let mut best_val = probe(best_mu)?;
    for i in 1..COARSE_SAMPLES {
        let mu = grid_at(i);
        let v = probe(mu)?;
        if v > best_val {
            best_idx = i;
            best_mu = mu;
            best_val = v;
        }
    }

    // Golden-section refinement inside the bracket around the best sample.
    let mut a = grid_at(best_idx.saturating_sub(1));
    let mut b = grid_at((best_idx + 1).min(COARSE_SAMPLES - 1));
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = probe(x1)?;
    let mut f2 = probe(x2)?;
    let mut evals = 2usize;
    while b - a > spec.tolerance && evals < spec.max_evals {
        if f1 >= f2 {
            // Ties shrink toward the lower end.
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = probe(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = probe(x2)?;
        }
        evals += 1;
    }

    // Final candidate set; ties resolve to the smallest argument.
    let fa = probe(a)?;
    let mut out = (a, fa);
    for cand in [(x1, f1), (x2, f2), (best_mu, best_val)] {
        if cand.1 > out.1 || (cand.1 == out.1 && cand.0 < out.0) {
            out = cand;
        }
    }
    Ok(out)
}
