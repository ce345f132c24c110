//! Tail-index fits, Kolmogorov-Smirnov tests, batch means and log-log
//! exponent regressions.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Ordinary least squares `y = a + b x`; returns `(a, b, se_b)`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let se = if n > 2.0 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (a, b, se)
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, (var / n).sqrt())
}

/// Mean with a standard error from `batches` contiguous batch means.
pub fn batch_means(xs: &[f64], batches: usize) -> Result<(f64, f64)> {
    if batches < 2 || xs.len() < batches {
        return Err(Error::InsufficientSamples {
            need: batches.max(2),
            got: xs.len(),
        });
    }
    let size = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let (_, se) = mean_and_se(&means);
    Ok((xs.iter().sum::<f64>() / xs.len() as f64, se))
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Hill estimate of the tail index on the top `k` order statistics.
    pub gamma_hill: f64,
    pub gamma_hill_se: f64,
    /// `(k / n) X_(k)^gamma`, the matching tail constant.
    pub c_hill: f64,
    /// Slope and intercept of the log-log survival regression.
    pub gamma_regression: f64,
    pub gamma_regression_se: f64,
    pub c_regression: f64,
    pub k: usize,
    /// Hill estimates at `k` and `k / 16` agree, as they do for a power tail.
    pub heavy_tailed: bool,
}

fn hill(sorted_desc: &[f64], k: usize) -> f64 {
    let xk = sorted_desc[k];
    let s: f64 = sorted_desc[..k].iter().map(|&x| (x / xk).ln()).sum();
    k as f64 / s
}

pub const MIN_TAIL_SAMPLES: usize = 10_000;

/// Tail index and constant of `P[X > u] ~ c u^{-gamma}` from the top `k`
/// order statistics (default `n / 20`).
pub fn tail_index_fit(samples: &[f64], k: Option<usize>) -> Result<TailFit> {
    let n = samples.len();
    if n < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientSamples {
            need: MIN_TAIL_SAMPLES,
            got: n,
        });
    }
    let mut xs: Vec<f64> = samples.to_vec();
    xs.sort_by(|a, b| b.total_cmp(a));
    if !(xs[n - 1] > 0.0) {
        return invalid("tail fit needs positive samples");
    }
    let k = k.unwrap_or(n / 20).clamp(16, n - 1);
    let g = hill(&xs, k);
    let g16 = hill(&xs, k / 16);
    let c_hill = k as f64 / n as f64 * xs[k].powf(g);
    // survival at log-spaced order statistics within the top k
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    let mut i = 1.0f64;
    while (i as usize) <= k {
        let j = i as usize;
        lx.push(xs[j - 1].ln());
        ly.push((j as f64 / n as f64).ln());
        i *= 1.25;
        if (i as usize) == j {
            i = j as f64 + 1.0;
        }
    }
    let (a, b, se) = ols(&lx, &ly);
    Ok(TailFit {
        gamma_hill: g,
        gamma_hill_se: g / (k as f64).sqrt(),
        c_hill,
        gamma_regression: -b,
        gamma_regression_se: se,
        c_regression: a.exp(),
        k,
        heavy_tailed: (g16 / g).ln().abs() < 3.0 * (16.0 / k as f64).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub distance: f64,
    pub p_value: f64,
}

/// `P[sup |B| > lambda]` for a Brownian bridge.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

fn ks_distance(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Exact `P[D >= d]` for two samples without ties, by counting lattice paths
/// that stay inside the band `|i/n - j/m| < d`.
fn ks_exact_p(n: usize, m: usize, d: f64) -> f64 {
    let inside = |i: usize, j: usize| ((i as f64 / n as f64) - (j as f64 / m as f64)).abs() < d - 1e-9;
    let mut row = vec![0.0f64; m + 1];
    for i in 0..=n {
        for j in 0..=m {
            row[j] = if !inside(i, j) {
                0.0
            } else if i == 0 && j == 0 {
                1.0
            } else {
                (if i > 0 { row[j] } else { 0.0 }) + (if j > 0 { row[j - 1] } else { 0.0 })
            };
        }
    }
    let total = (1..=m).fold(1.0f64, |c, k| c * (n + k) as f64 / k as f64);
    (1.0 - row[m] / total).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov distance with its p-value: exact for
/// samples below 100 points, asymptotic otherwise.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return invalid("KS test needs two nonempty samples");
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    let distance = ks_distance(&mut x, &mut y);
    let (n, m) = (a.len(), b.len());
    let p_value = if n < 100 && m < 100 {
        ks_exact_p(n, m, distance)
    } else {
        let ne = (n * m) as f64 / (n + m) as f64;
        let se = ne.sqrt();
        kolmogorov_survival((se + 0.12 + 0.11 / se) * distance)
    };
    Ok(KsResult { distance, p_value })
}

/// One-sample distance to a continuous distribution function.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if samples.is_empty() {
        return invalid("KS test needs a nonempty sample");
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let se = n.sqrt();
    Ok(KsResult {
        distance: d,
        p_value: kolmogorov_survival((se + 0.12 + 0.11 / se) * d),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub stderr: f64,
    pub medians: Vec<f64>,
}

/// Log-log slope of the median running maximum over `t_grid`.
/// `curves[r][i]` is the running maximum of replicate `r` at `t_grid[i]`.
/// The standard error comes from batch means over 30 or more batches when
/// there are enough replicates, otherwise from the regression.
pub fn displacement_exponent(curves: &[Vec<f64>], t_grid: &[f64]) -> Result<ExponentFit> {
    if t_grid.len() < 3 || t_grid.windows(2).any(|w| !(w[0] < w[1])) || !(t_grid[0] > 0.0) {
        return invalid("time grid needs at least three increasing positive points");
    }
    if t_grid[t_grid.len() - 1] / t_grid[0] < 1e3 {
        return invalid("time grid must span at least three decades");
    }
    if curves.is_empty() || curves.iter().any(|c| c.len() != t_grid.len()) {
        return invalid("every trajectory must be sampled on the whole grid");
    }
    let lt: Vec<f64> = t_grid.iter().map(|t| t.ln()).collect();
    let median_curve = |set: &[Vec<f64>]| -> Vec<f64> {
        (0..t_grid.len())
            .map(|i| {
                let mut col: Vec<f64> = set.iter().map(|c| c[i]).collect();
                median(&mut col)
            })
            .collect()
    };
    let slope_of = |med: &[f64]| -> Option<(f64, f64)> {
        if med.iter().any(|&m| !(m > 0.0)) {
            return None;
        }
        let ly: Vec<f64> = med.iter().map(|m| m.ln()).collect();
        let (_, b, se) = ols(&lt, &ly);
        Some((b, se))
    };
    let medians = median_curve(curves);
    let Some((slope, reg_se)) = slope_of(&medians) else {
        return invalid("median running maximum is zero");
    };
    let batches = 30;
    let stderr = if curves.len() >= 10 * batches {
        let size = curves.len() / batches;
        let slopes: Vec<f64> = (0..batches)
            .filter_map(|b| slope_of(&median_curve(&curves[b * size..(b + 1) * size])).map(|s| s.0))
            .collect();
        // each batch slope has `batches` times the variance of the pooled one
        mean_and_se(&slopes).1
    } else {
        reg_se
    };
    Ok(ExponentFit { slope, stderr, medians })
}
