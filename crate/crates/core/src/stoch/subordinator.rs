use rand::Rng;
use rand_distr::{Distribution, InverseGaussian, StandardNormal};
use serde::{Deserialize, Serialize};

use super::measure::{AtomicMeasure, SubordinatorPath};
use super::ppp::{poisson, stable_tail_rate, TruncatedMeasure};
use crate::error::{invalid, Result};
use crate::infinite::EnvelopeProcess;
use crate::rng::SimRng;

/// Inverse Gaussian subordinator sampled on a grid. With `gamma = 0` the
/// increments are one-sided 1/2-stable and `infinite_mean` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseGaussianPath {
    pub path: SubordinatorPath,
    pub infinite_mean: bool,
}

/// One increment over a time span `t`, with transform
/// `exp(-t delta (sqrt(2 lambda + gamma^2) - gamma))`.
pub fn sample_inverse_gaussian(delta: f64, gamma: f64, t: f64, rng: &mut SimRng) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let shape = delta * delta * t * t;
    if gamma == 0.0 {
        let z: f64 = rng.sample(StandardNormal);
        return shape / (z * z);
    }
    let mean = delta * t / gamma;
    InverseGaussian::new(mean, shape)
        .expect("positive parameters")
        .sample(rng)
}

/// Independent increments on the cells `[k dt, (k + 1) dt)` of `[0, horizon]`,
/// each booked as a jump at the right end of its cell.
pub fn sample_inverse_gaussian_path(
    delta: f64,
    gamma: f64,
    horizon: f64,
    dt: f64,
    rng: &mut SimRng,
) -> Result<InverseGaussianPath> {
    if !(delta > 0.0) || !(gamma >= 0.0) {
        return invalid(format!("need delta > 0 and gamma >= 0, got ({delta}, {gamma})"));
    }
    if !(horizon >= 0.0) || !(dt > 0.0) {
        return invalid("need horizon >= 0 and a positive grid step");
    }
    let mut atoms = Vec::new();
    let mut t = 0.0;
    let mut k = 0u64;
    while t < horizon {
        k += 1;
        let next = (k as f64 * dt).min(horizon);
        let y = sample_inverse_gaussian(delta, gamma, next - t, rng);
        if y > 0.0 {
            atoms.push((next, y));
        }
        t = next;
    }
    Ok(InverseGaussianPath {
        path: SubordinatorPath::new(0.0, AtomicMeasure::from_atoms(atoms)?, horizon)?,
        infinite_mean: gamma == 0.0,
    })
}

/// `E exp(-lambda I_t)` for the inverse Gaussian subordinator.
pub fn inverse_gaussian_laplace(delta: f64, gamma: f64, t: f64, lambda: f64) -> f64 {
    (-t * delta * ((2.0 * lambda + gamma * gamma).sqrt() - gamma)).exp()
}

pub const IPC_DELTA: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Jump measure of the IPC trap field: on each constancy interval of the
/// envelope at level `e`, the jumps of an inverse Gaussian subordinator with
/// `delta = 1/sqrt(2)` and `gamma = sqrt(2) e`. Jumps below `mass_cut` are
/// dropped.
///
/// The Levy density `delta (2 pi)^{-1/2} y^{-3/2} exp(-gamma^2 y / 2)` is
/// sampled by thinning a 1/2-stable field.
pub fn mu_ipc(envelope: &EnvelopeProcess, mass_cut: f64, rng: &mut SimRng) -> Result<TruncatedMeasure> {
    if !(mass_cut > 0.0) {
        return invalid(format!("mass cut must be positive, got {mass_cut}"));
    }
    let a = IPC_DELTA / (2.0 * std::f64::consts::PI).sqrt();
    let per_length = stable_tail_rate(a, 0.5, mass_cut);
    let mut atoms = Vec::new();
    let mut deficit_mean = 0.0;
    let mut deficit_variance = 0.0;
    for (lo, hi, level) in envelope.intervals() {
        let len = hi - lo;
        let gamma = std::f64::consts::SQRT_2 * level;
        let g2 = 0.5 * gamma * gamma;
        for _ in 0..poisson(len * per_length, rng) {
            let u: f64 = 1.0 - rng.random::<f64>();
            let y = mass_cut / (u * u);
            if rng.random::<f64>() < (-g2 * y).exp() {
                atoms.push((lo + len * rng.random::<f64>(), y));
            }
        }
        deficit_mean += len
            * if gamma > 0.0 {
                IPC_DELTA / gamma * libm::erf(gamma * (0.5 * mass_cut).sqrt())
            } else {
                a * 2.0 * mass_cut.sqrt()
            };
        deficit_variance += len * a * (2.0 / 3.0) * mass_cut.powf(1.5);
    }
    Ok(TruncatedMeasure {
        measure: AtomicMeasure::from_atoms(atoms)?,
        mass_cut,
        deficit_mean,
        deficit_variance,
    })
}

/// Closed-form transform of the `mu_IPC` mass of an interval of length
/// `len` at envelope level `level`.
pub fn mu_ipc_interval_laplace(level: f64, len: f64, lambda: f64) -> f64 {
    inverse_gaussian_laplace(IPC_DELTA, std::f64::consts::SQRT_2 * level, len, lambda)
}
