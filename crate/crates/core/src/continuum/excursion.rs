use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::SimRng;

/// Normalized Brownian excursion on the grid `k / m`, `k = 0..=m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcursionGrid {
    pub values: Vec<f64>,
}

impl ExcursionGrid {
    pub fn grid_size(&self) -> usize {
        self.values.len() - 1
    }

    /// Number of interior grid values that are not strictly positive.
    pub fn interior_zeros(&self) -> usize {
        let m = self.grid_size();
        self.values[1..m].iter().filter(|&&v| v <= 0.0).count()
    }

    /// Riemann sum of the excursion over `[0, 1]`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.grid_size() as f64
    }

    pub fn scaled(&self, c: f64) -> ExcursionGrid {
        ExcursionGrid {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Minimum of the values over the grid interval between `s` and `t`.
    pub fn min_between(&self, s: usize, t: usize) -> f64 {
        let (a, b) = if s <= t { (s, t) } else { (t, s) };
        self.values[a..=b].iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Brownian bridge on `m` steps turned into an excursion by the Vervaat
/// transform: the bridge is rotated cyclically to start at its minimum.
pub fn sample_excursion(m: usize, rng: &mut SimRng) -> Result<ExcursionGrid> {
    if m < 2 {
        return invalid(format!("excursion grid needs at least 2 steps, got {m}"));
    }
    let sd = (1.0 / m as f64).sqrt();
    let mut walk = Vec::with_capacity(m + 1);
    walk.push(0.0f64);
    let mut b = 0.0;
    for _ in 0..m {
        b += sd * rng.sample::<f64, _>(StandardNormal);
        walk.push(b);
    }
    let end = walk[m];
    for (k, w) in walk.iter_mut().enumerate() {
        *w -= end * k as f64 / m as f64;
    }
    let start = (0..m).min_by(|&i, &j| walk[i].total_cmp(&walk[j])).expect("m >= 2");
    let floor = walk[start];
    let mut values: Vec<f64> = (0..=m).map(|j| walk[(start + j) % m] - floor).collect();
    values[0] = 0.0;
    values[m] = 0.0;
    Ok(ExcursionGrid { values })
}

/// `d_w(s, t) = w(s) + w(t) - 2 min_{[s, t]} w` at grid indices `s`, `t`.
pub fn crt_pseudometric(w: &ExcursionGrid, s: usize, t: usize) -> Result<f64> {
    let m = w.grid_size();
    for x in [s, t] {
        if x > m {
            return Err(Error::InvalidArgument(format!("grid index {x} outside 0..={m}")));
        }
    }
    Ok(w.values[s] + w.values[t] - 2.0 * w.min_between(s, t))
}
