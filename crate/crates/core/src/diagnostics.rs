//! Autocorrelation checks on MCMC output.
//!
//! A chain is reported as consistent with convergence when every sample
//! autocorrelation at lags `1..=max_lag` lies inside the white-noise band
//! `±1.96/√N`. Passing is necessary, not sufficient, for convergence.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::sqrt;

pub const DEFAULT_MAX_LAG: usize = 20;
pub const MIN_DRAWS: usize = 50;
const Z_975: f64 = 1.96;

/// Sample autocorrelation `r_0..=r_max_lag` (with `r_0 = 1`), or `None`
/// when the series has no variation.
pub fn acf(x: &[f64], max_lag: usize) -> Option<Vec<f64>> {
    let n = x.len();
    if n == 0 {
        return None;
    }
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    // a chain whose spread is at rounding level carries no information
    if !(hi - lo > 1e-12 * hi.abs().max(lo.abs())) {
        return None;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let c0: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    if !(c0 > 0.0) || !c0.is_finite() {
        return None;
    }
    Some(
        (0..=max_lag.min(n - 1))
            .map(|k| {
                let ck: f64 = (0..n - k).map(|i| (x[i] - mean) * (x[i + k] - mean)).sum();
                ck / c0
            })
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainCheck {
    pub name: String,
    /// Lags `0..=max_lag`; empty when degenerate.
    pub acf: Vec<f64>,
    pub mean: f64,
    pub degenerate: bool,
    pub lags_outside: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsReport {
    pub draws: usize,
    pub max_lag: usize,
    /// Half-width of the 95% band, `1.96/√N`.
    pub band: f64,
    pub chains: Vec<ChainCheck>,
}

impl DiagnosticsReport {
    pub fn passed(&self) -> usize {
        self.chains.iter().filter(|c| c.pass).count()
    }

    pub fn chain(&self, name: &str) -> Option<&ChainCheck> {
        self.chains.iter().find(|c| c.name == name)
    }
}

/// Checks each named chain; all chains must have the same length of at
/// least [`MIN_DRAWS`].
pub fn autocorrelation_diagnostics(chains: &[(&str, &[f64])], max_lag: usize) -> Result<DiagnosticsReport> {
    let draws = chains.first().map_or(0, |c| c.1.len());
    if chains.iter().any(|c| c.1.len() != draws) {
        return Err(Error::domain("chains passed to diagnostics differ in length"));
    }
    if draws < MIN_DRAWS {
        return Err(Error::domain(format!(
            "need at least {MIN_DRAWS} recorded draws for autocorrelation diagnostics, got {draws}"
        )));
    }
    if max_lag == 0 || max_lag >= draws {
        return Err(Error::domain(format!("max lag must lie in 1..{draws}, got {max_lag}")));
    }
    let band = Z_975 / sqrt(draws as f64);
    let checks = chains
        .iter()
        .map(|&(name, x)| {
            let mean = x.iter().sum::<f64>() / draws as f64;
            match acf(x, max_lag) {
                None => ChainCheck {
                    name: name.into(),
                    acf: Vec::new(),
                    mean,
                    degenerate: true,
                    lags_outside: max_lag,
                    pass: false,
                },
                Some(r) => {
                    let outside = r[1..].iter().filter(|v| v.abs() > band).count();
                    ChainCheck {
                        name: name.into(),
                        acf: r,
                        mean,
                        degenerate: false,
                        lags_outside: outside,
                        pass: outside == 0,
                    }
                }
            }
        })
        .collect();
    Ok(DiagnosticsReport {
        draws,
        max_lag,
        band,
        chains: checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use alloc::vec;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn white_noise_mostly_inside_band() {
        let mut rng = substream(1, &[]);
        let x: Vec<f64> = (0..2000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let rep = autocorrelation_diagnostics(&[("x", &x)], 20).unwrap();
        let c = &rep.chains[0];
        assert_eq!(c.acf[0], 1.0);
        assert!(c.lags_outside <= 2, "{}", c.lags_outside);
        assert!((rep.band - 1.96 / (2000f64).sqrt()).abs() == 0.0);
    }

    #[test]
    fn ar1_fails() {
        let mut rng = substream(2, &[]);
        let mut x = vec![0.0; 1000];
        for t in 1..1000 {
            let e: f64 = StandardNormal.sample(&mut rng);
            x[t] = 0.9 * x[t - 1] + e;
        }
        let rep = autocorrelation_diagnostics(&[("ar", &x)], 20).unwrap();
        assert!(!rep.chains[0].pass);
        assert!(rep.chains[0].acf[1] > 0.8);
    }

    #[test]
    fn constant_chain_is_degenerate() {
        let x = vec![3.0; 100];
        let rep = autocorrelation_diagnostics(&[("c", &x)], 20).unwrap();
        assert!(rep.chains[0].degenerate && !rep.chains[0].pass);
    }

    #[test]
    fn short_chain_rejected() {
        let x = vec![1.0; 49];
        assert!(autocorrelation_diagnostics(&[("c", &x)], 20).is_err());
    }
}
