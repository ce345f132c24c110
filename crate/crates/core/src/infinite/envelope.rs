use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::SimRng;

/// Running minimum `E_t` of the heights of a unit-rate Poisson process on
/// `(0, inf)^2` over abscissae `<= t`, restricted to `(x_min, x_max]`.
///
/// `levels[i]` is the value on `[breaks[i], breaks[i + 1])`, where
/// `breaks[0] = x_min` and the last interval ends at `x_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeProcess {
    pub x_min: f64,
    pub x_max: f64,
    pub breaks: Vec<f64>,
    pub levels: Vec<f64>,
}

impl EnvelopeProcess {
    /// Piecewise-constant envelope from explicit breakpoints and levels.
    pub fn from_levels(x_min: f64, x_max: f64, breaks: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if breaks.len() != levels.len() || breaks.is_empty() {
            return invalid("need one level per interval");
        }
        if breaks[0] != x_min || !(x_min < x_max) {
            return invalid("first break must equal x_min < x_max");
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) || *breaks.last().unwrap() >= x_max {
            return invalid("breaks must increase inside [x_min, x_max)");
        }
        if levels.iter().any(|&l| !(l > 0.0)) || levels.windows(2).any(|w| !(w[0] > w[1])) {
            return invalid("levels must be positive and strictly decreasing");
        }
        Ok(EnvelopeProcess {
            x_min,
            x_max,
            breaks,
            levels,
        })
    }

    /// Times at which the envelope jumps down.
    pub fn jump_times(&self) -> &[f64] {
        &self.breaks[1..]
    }

    /// Value at `t` in `[x_min, x_max]` (right-continuous).
    pub fn value(&self, t: f64) -> f64 {
        let i = self.breaks.partition_point(|&b| b <= t);
        self.levels[i.saturating_sub(1)]
    }

    /// Constancy intervals `(a_i, b_i, level_i)`.
    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.levels.len()).map(move |i| {
            let b = self.breaks.get(i + 1).copied().unwrap_or(self.x_max);
            (self.breaks[i], b, self.levels[i])
        })
    }
}

/// Exact record-minimum simulation: the value at `x_min` is `Exp(x_min)`;
/// from level `e` the next lower point arrives after an `Exp(e)` gap and is
/// uniform on `(0, e)`.
pub fn sample_envelope(x_min: f64, x_max: f64, rng: &mut SimRng) -> Result<EnvelopeProcess> {
    if !(x_min > 0.0 && x_min < x_max) {
        return invalid(format!("need 0 < x_min < x_max, got ({x_min}, {x_max})"));
    }
    let mut level = Exp::new(x_min).expect("positive rate").sample(rng);
    let mut breaks = vec![x_min];
    let mut levels = vec![level];
    let mut x = x_min;
    loop {
        x += Exp::new(level).expect("positive rate").sample(rng);
        if x > x_max {
            break;
        }
        level *= 1.0 - rng.random::<f64>();
        breaks.push(x);
        levels.push(level);
    }
    Ok(EnvelopeProcess {
        x_min,
        x_max,
        breaks,
        levels,
    })
}
