//! Central finite-difference verification of analytic gradients.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Outcome of one gradient check.
#[derive(Debug, Clone, Copy)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub worst_coord: usize,
    /// Set when any probed value (loss or gradient) was not finite.
    pub non_finite: bool,
}

/// Absolute agreement at this scale counts as exact. Central differences of
/// a composite loss carry rounding noise around 1e-10, which would otherwise
/// dominate coordinates whose true derivative is zero.
const NOISE_ATOL: f64 = 1e-9;

/// Compares `analytic` against central differences of `f` at `point` on up
/// to `probes` randomly chosen coordinates. The relative error denominator
/// is `max(|analytic|, |numeric|, 1e-8)`; differences below the noise
/// tolerance count as zero.
pub fn grad_check(
    f: impl Fn(&[f64]) -> f64,
    analytic: &[f64],
    point: &[f64],
    probes: usize,
    eps: f64,
    seed: u64,
) -> GradCheckReport {
    assert!(eps > 0.0, "finite-difference step must be positive");
    assert_eq!(analytic.len(), point.len(), "gradient length mismatch");

    let dim = point.len();
    let coords: Vec<usize> = if probes >= dim {
        (0..dim).collect()
    } else {
        let mut all: Vec<usize> = (0..dim).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        all.shuffle(&mut rng);
        all.truncate(probes);
        all
    };

    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        worst_coord: 0,
        non_finite: false,
    };
    let mut x = point.to_vec();
    for &i in &coords {
        let orig = x[i];
        x[i] = orig + eps;
        let f_plus = f(&x);
        x[i] = orig - eps;
        let f_minus = f(&x);
        x[i] = orig;

        let numeric = (f_plus - f_minus) / (2.0 * eps);
        let a = analytic[i];
        if !numeric.is_finite() || !a.is_finite() {
            report.non_finite = true;
            continue;
        }
        let diff = (a - numeric).abs();
        if diff <= NOISE_ATOL {
            continue;
        }
        let denom = a.abs().max(numeric.abs()).max(1e-8);
        let rel = diff / denom;
        if rel > report.max_rel_err {
            report.max_rel_err = rel;
            report.worst_coord = i;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_gradient_is_exact_to_roundoff() {
        let point: Vec<f64> = (0..20).map(|i| (i as f64) * 0.3 - 2.0).collect();
        let analytic: Vec<f64> = point.iter().map(|&x| 2.0 * x).collect();
        let report = grad_check(
            |x| x.iter().map(|v| v * v).sum(),
            &analytic,
            &point,
            100,
            1e-5,
            0,
        );
        assert!(!report.non_finite);
        assert!(report.max_rel_err <= 1e-6, "{}", report.max_rel_err);
    }

    #[test]
    fn wrong_gradient_is_flagged() {
        let point = vec![1.0, 2.0];
        let wrong = vec![2.0, 7.0];
        let report = grad_check(
            |x| x.iter().map(|v| v * v).sum(),
            &wrong,
            &point,
            10,
            1e-5,
            0,
        );
        assert!(report.max_rel_err > 0.1);
    }

    #[test]
    fn non_finite_values_are_reported() {
        let point = vec![0.0];
        let report = grad_check(|x| 1.0 / x[0], &[f64::NAN], &point, 1, 1e-5, 0);
        assert!(report.non_finite);
    }
}
