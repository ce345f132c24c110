use crate::cluster::scales;
use crate::error::{invalid, Result};

/// Sample mean of `exp(-lambda x)` and its standard error.
pub fn empirical_laplace(samples: &[f64], lambda: f64) -> (f64, f64) {
    let n = samples.len() as f64;
    let (mut s, mut s2) = (0.0, 0.0);
    for &x in samples {
        let e = (-lambda * x).exp();
        s += e;
        s2 += e * e;
    }
    let mean = s / n;
    let var = if n > 1.0 {
        ((s2 - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    (mean, (var / n).sqrt())
}

/// Plug-in `Psi_eps(nu)(lambda) = (1 - nu_hat(q lambda)) / eps` with
/// `q = pi eps^3`, returned as `(lambda, value)` pairs.
pub fn psi_epsilon(samples: &[f64], epsilon: f64, lambdas: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return invalid("no duration samples");
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return invalid(format!("epsilon must lie in (0, 1), got {epsilon}"));
    }
    let (_, q) = scales(epsilon)?;
    Ok(lambdas
        .iter()
        .map(|&l| {
            let nu = samples.iter().map(|&x| (-q * l * x).exp()).sum::<f64>() / samples.len() as f64;
            (l, (1.0 - nu) / epsilon)
        })
        .collect())
}
