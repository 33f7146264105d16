//! Two-sample Kolmogorov–Smirnov test.
//!
//! Distribution free and binning free, which is why it is the statistic
//! behind the equivariance and indistinguishability checks. The p-value
//! uses the asymptotic Kolmogorov distribution with the small-sample
//! correction of Stephens (as in Numerical Recipes); at the ensemble sizes
//! used here (10^4) the asymptotics are excellent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Result of a two-sample KS test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub m: usize,
}

impl KsReport {
    /// Critical value of the statistic at significance `alpha` for the
    /// stored sample sizes.
    pub fn critical_value(&self, alpha: f64) -> f64 {
        let ne = effective_n(self.n, self.m);
        (-0.5 * (alpha / 2.0).ln()).sqrt() / ne.sqrt()
    }

    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

fn effective_n(n: usize, m: usize) -> f64 {
    (n as f64 * m as f64) / (n as f64 + m as f64)
}

/// Survival function of the Kolmogorov distribution,
/// `Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Sup distance between the empirical CDFs of two samples.
pub fn ks_statistic(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::invalid("KS test requires non-empty samples"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::invalid("KS test requires finite samples"));
    }
    let mut xs = xs.to_vec();
    let mut ys = ys.to_vec();
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    ys.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0_f64;
    while i < n && j < m {
        let x = xs[i];
        let y = ys[j];
        let v = x.min(y);
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        let diff = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        if diff > d {
            d = diff;
        }
    }
    Ok(d)
}

/// Two-sample KS test with asymptotic p-value.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<KsReport> {
    let d = ks_statistic(xs, ys)?;
    let ne = effective_n(xs.len(), ys.len()).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    Ok(KsReport {
        statistic: d,
        p_value: kolmogorov_q(lambda),
        n: xs.len(),
        m: ys.len(),
    })
}
