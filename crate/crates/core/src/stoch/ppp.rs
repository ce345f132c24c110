use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::measure::AtomicMeasure;
use crate::error::{invalid, Result};
use crate::rng::SimRng;

/// Intensity constant `a` of the `mu_IIC` trap field, `a y^{-3/2} dx dy`
/// with `a = 1 / (2 sqrt(pi))`.
pub const IIC_INTENSITY: f64 = 0.282_094_791_773_878_14;

/// An atomic measure whose atoms below `mass_cut` were dropped.
///
/// `deficit_mean` is the expected dropped mass and `deficit_variance` an
/// upper bound on its variance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedMeasure {
    pub measure: AtomicMeasure,
    pub mass_cut: f64,
    pub deficit_mean: f64,
    pub deficit_variance: f64,
}

impl TruncatedMeasure {
    /// Retained mass plus the expected dropped mass.
    pub fn corrected_total(&self) -> f64 {
        self.measure.total_mass() + self.deficit_mean
    }

    /// Bound on `|E exp(-lambda corrected_total) - E exp(-lambda V)|` where
    /// `V` is the untruncated total mass.
    pub fn laplace_error_bound(&self, lambda: f64) -> f64 {
        0.5 * lambda * lambda * self.deficit_variance
    }
}

/// Expected number of atoms with mass above `h` per unit length.
pub fn stable_tail_rate(a: f64, gamma: f64, h: f64) -> f64 {
    a * h.powf(-gamma) / gamma
}

fn check_stable(h_min: f64, a: f64, gamma: f64, x_range: (f64, f64)) -> Result<()> {
    if !(h_min > 0.0) {
        return invalid(format!("mass cut must be positive, got {h_min}"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return invalid(format!("stability index must lie in (0, 1), got {gamma}"));
    }
    if !(a > 0.0) || !(x_range.0 <= x_range.1) {
        return invalid("need a > 0 and an ordered x-range");
    }
    Ok(())
}

/// Poisson process with intensity `a y^{-1-gamma} dx dy` on
/// `x_range x (h_min, inf)`, plus the mean and variance of the mass it omits.
pub fn sample_stable_ppp(
    x_range: (f64, f64),
    h_min: f64,
    a: f64,
    gamma: f64,
    rng: &mut SimRng,
) -> Result<TruncatedMeasure> {
    check_stable(h_min, a, gamma, x_range)?;
    let len = x_range.1 - x_range.0;
    let atoms = stable_atoms(x_range, h_min, a, gamma, rng);
    Ok(TruncatedMeasure {
        measure: AtomicMeasure::from_atoms(atoms)?,
        mass_cut: h_min,
        deficit_mean: a * len * h_min.powf(1.0 - gamma) / (1.0 - gamma),
        deficit_variance: a * len * h_min.powf(2.0 - gamma) / (2.0 - gamma),
    })
}

fn stable_atoms(x_range: (f64, f64), h: f64, a: f64, gamma: f64, rng: &mut SimRng) -> Vec<(f64, f64)> {
    let len = x_range.1 - x_range.0;
    let mean = len * stable_tail_rate(a, gamma, h);
    let count = poisson(mean, rng);
    (0..count)
        .map(|_| {
            let x = x_range.0 + len * rng.random::<f64>();
            let u: f64 = 1.0 - rng.random::<f64>();
            (x, h * u.powf(-1.0 / gamma))
        })
        .collect()
}

pub(crate) fn poisson(mean: f64, rng: &mut SimRng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u64
}

/// One row of a Laplace-transform comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceCheck {
    pub lambda: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub exact: f64,
    pub truncation_bound: f64,
}

impl LaplaceCheck {
    /// `|empirical - exact| <= k SE + truncation_bound`.
    pub fn within(&self, k: f64) -> bool {
        (self.empirical - self.exact).abs() <= k * self.std_error + self.truncation_bound
    }
}

/// Empirical transform of `V_1`, the corrected total mass of a `mu_IIC`
/// draw on `[0, 1]`, against `exp(-sqrt(lambda))`.
pub fn stable_subordinator_marginal_check(
    lambdas: &[f64],
    samples: usize,
    mass_cut: f64,
    rng: &mut SimRng,
) -> Result<Vec<LaplaceCheck>> {
    if samples < 2 {
        return invalid("need at least two samples");
    }
    let mut totals = Vec::with_capacity(samples);
    let mut var = 0.0;
    for _ in 0..samples {
        let m = sample_stable_ppp((0.0, 1.0), mass_cut, IIC_INTENSITY, 0.5, rng)?;
        var = m.deficit_variance;
        totals.push(m.corrected_total());
    }
    Ok(lambdas
        .iter()
        .map(|&lambda| {
            let (empirical, std_error) = super::psi::empirical_laplace(&totals, lambda);
            LaplaceCheck {
                lambda,
                empirical,
                std_error,
                exact: (-lambda.sqrt()).exp(),
                truncation_bound: 0.5 * lambda * lambda * var,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn iic_intensity_constant() {
        assert!((IIC_INTENSITY - 0.5 / std::f64::consts::PI.sqrt()).abs() < 1e-16);
        // pi^{-1/2} h^{-1/2} at h = 0.01
        assert!((stable_tail_rate(IIC_INTENSITY, 0.5, 0.01) - 5.641_895_835_477_563).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        let mut rng = rng_from_seed(0);
        assert!(sample_stable_ppp((0.0, 1.0), 0.0, 1.0, 0.5, &mut rng).is_err());
        assert!(sample_stable_ppp((0.0, 1.0), 0.1, 1.0, 1.0, &mut rng).is_err());
        assert!(sample_stable_ppp((1.0, 0.0), 0.1, 1.0, 0.5, &mut rng).is_err());
    }

    #[test]
    fn empty_range() {
        let m = sample_stable_ppp((2.0, 2.0), 0.01, IIC_INTENSITY, 0.5, &mut rng_from_seed(1)).unwrap();
        assert!(m.measure.is_empty());
        assert_eq!(m.deficit_mean, 0.0);
    }

    #[test]
    fn atom_count_mean() {
        let mut rng = rng_from_seed(2);
        let runs = 20_000;
        let counts: Vec<f64> = (0..runs)
            .map(|_| {
                sample_stable_ppp((0.0, 1.0), 0.01, IIC_INTENSITY, 0.5, &mut rng)
                    .unwrap()
                    .measure
                    .len() as f64
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / runs as f64;
        let se = (10.0 / std::f64::consts::PI.sqrt() / runs as f64).sqrt();
        assert!((mean - 10.0 / std::f64::consts::PI.sqrt()).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn counts_add_over_disjoint_ranges() {
        let mut rng = rng_from_seed(3);
        let runs = 20_000;
        let (mut left, mut right, mut cross) = (0.0, 0.0, 0.0);
        for _ in 0..runs {
            let m = sample_stable_ppp((-1.0, 1.0), 0.05, IIC_INTENSITY, 0.5, &mut rng)
                .unwrap()
                .measure;
            let l = m.atoms().iter().filter(|a| a.0 < 0.0).count() as f64;
            let r = m.len() as f64 - l;
            left += l;
            right += r;
            cross += l * r;
        }
        let n = runs as f64;
        let rate = stable_tail_rate(IIC_INTENSITY, 0.5, 0.05);
        let se = (rate / n).sqrt();
        assert!((left / n - rate).abs() < 3.0 * se);
        assert!((right / n - rate).abs() < 3.0 * se);
        // independent halves: E[LR] = E[L] E[R]
        let cov = cross / n - left / n * right / n;
        assert!(cov.abs() < 3.0 * rate / n.sqrt(), "{cov}");
    }

    #[test]
    fn marginal_transform() {
        let checks = stable_subordinator_marginal_check(&[0.0, 1.0, 4.0], 20_000, 1e-4, &mut rng_from_seed(4)).unwrap();
        assert_eq!(checks[0].empirical, 1.0);
        for c in &checks {
            assert!(c.within(3.0), "{c:?}");
        }
    }
}
