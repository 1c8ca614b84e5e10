//! Rolling pairwise Granger-causality F statistics.
//!
//! For each window of `w` consecutive (return) observations and each
//! ordered pair `(u, v)`, `v` is regressed on an intercept and its own `p`
//! lags (restricted) and additionally on `p` lags of `u` (unrestricted).
//! `Y_t[u, v]` holds the F statistic for "`u` Granger-causes `v`".
//!
//! Each regression uses the `w − p` rows of the window that have a full set
//! of lags, so the denominator has `w − 3p − 1` degrees of freedom.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gibbs::ObservationSet;
use crate::linalg::Matrix;
use crate::math::{ln, sqrt};
use crate::special::f_critical;

/// Aligned price (or return) series, one column per label.
#[derive(Clone, Debug, PartialEq)]
pub struct PricePanel {
    pub labels: Vec<String>,
    /// `series[k]` is the full path of series `k`.
    pub series: Vec<Vec<f64>>,
}

impl PricePanel {
    pub fn new(labels: Vec<String>, series: Vec<Vec<f64>>) -> Result<Self> {
        if labels.len() != series.len() {
            return Err(Error::domain(format!(
                "{} labels for {} series",
                labels.len(),
                series.len()
            )));
        }
        if let Some(first) = series.first() {
            if let Some((k, _)) = series.iter().enumerate().find(|(_, s)| s.len() != first.len()) {
                return Err(Error::domain(format!("series '{}' has a different length", labels[k])));
            }
        }
        for (label, s) in labels.iter().zip(&series) {
            if s.iter().any(|x| !x.is_finite()) {
                return Err(Error::domain(format!("series '{label}' has non-finite values")));
            }
        }
        Ok(PricePanel { labels, series })
    }

    pub fn width(&self) -> usize {
        self.series.len()
    }

    pub fn len(&self) -> usize {
        self.series.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops the first `k` periods.
    pub fn skip(&self, k: usize) -> PricePanel {
        PricePanel {
            labels: self.labels.clone(),
            series: self.series.iter().map(|s| s[k.min(s.len())..].to_vec()).collect(),
        }
    }
}

/// Log returns `r_t = ln(P_t / P_{t−1})`.
pub fn to_returns(panel: &PricePanel) -> Result<PricePanel> {
    let mut out = Vec::with_capacity(panel.width());
    for (label, s) in panel.labels.iter().zip(&panel.series) {
        if let Some(bad) = s.iter().find(|&&p| !(p > 0.0)) {
            return Err(Error::domain(format!("series '{label}' has a nonpositive price {bad}")));
        }
        out.push(s.windows(2).map(|w| ln(w[1]) - ln(w[0])).collect());
    }
    Ok(PricePanel {
        labels: panel.labels.clone(),
        series: out,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrangerConfig {
    pub lag: usize,
    pub window: usize,
    pub log_returns: bool,
}

impl Default for GrangerConfig {
    fn default() -> Self {
        GrangerConfig {
            lag: 1,
            window: 52,
            log_returns: true,
        }
    }
}

impl GrangerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lag == 0 {
            return Err(Error::domain("lag must be at least 1"));
        }
        if self.window < 3 * self.lag + 2 {
            return Err(Error::domain(format!(
                "window {} too short for lag {}: need at least {}",
                self.window,
                self.lag,
                3 * self.lag + 2
            )));
        }
        Ok(())
    }

    /// Numerator and denominator degrees of freedom of the test.
    pub fn degrees_of_freedom(&self) -> (f64, f64) {
        (self.lag as f64, (self.window - 3 * self.lag - 1) as f64)
    }

    /// F critical value at level `alpha`.
    pub fn critical_value(&self, alpha: f64) -> Result<f64> {
        self.validate()?;
        let (d1, d2) = self.degrees_of_freedom();
        f_critical(alpha, d1, d2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrangerStat {
    pub statistic: f64,
    /// The regression was singular or had no residual variation; the
    /// statistic is then 0.
    pub degenerate: bool,
}

const RANK_TOL: f64 = 1e-10;

/// Residual sum of squares of a least-squares fit by Householder QR, or
/// `None` when the design is numerically rank deficient. `cols` are the
/// design columns, each of length `y.len()`.
fn ols_rss(mut cols: Vec<Vec<f64>>, y: &[f64]) -> Option<f64> {
    let m = y.len();
    let k = cols.len();
    if m <= k {
        return None;
    }
    let scale = cols
        .iter()
        .map(|c| sqrt(c.iter().map(|x| x * x).sum()))
        .fold(0.0, f64::max);
    let mut r = y.to_vec();
    for j in 0..k {
        let norm = sqrt(cols[j][j..].iter().map(|x| x * x).sum());
        if !(norm > RANK_TOL * scale.max(1.0)) {
            return None;
        }
        let alpha = if cols[j][j] > 0.0 { -norm } else { norm };
        let mut v = cols[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let reflect = |target: &mut [f64]| {
            let dot: f64 = v.iter().zip(target.iter()).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vnorm2;
            for (t, a) in target.iter_mut().zip(&v) {
                *t -= f * a;
            }
        };
        for col in cols.iter_mut().skip(j) {
            reflect(&mut col[j..]);
        }
        reflect(&mut r[j..]);
    }
    Some(r[k..].iter().map(|x| x * x).sum())
}

fn lagged(series: &[f64], p: usize, lag: usize) -> Vec<f64> {
    // values aligned with targets series[p..], shifted back by `lag`
    series[p - lag..series.len() - lag].to_vec()
}

/// F statistic for "`x` Granger-causes `y`" with `p` lags, using the whole
/// of both (equal-length) series as the window.
pub fn granger_f(x: &[f64], y: &[f64], p: usize) -> Result<GrangerStat> {
    if x.len() != y.len() {
        return Err(Error::domain("granger series must have equal length"));
    }
    let cfg = GrangerConfig {
        lag: p,
        window: x.len(),
        log_returns: false,
    };
    cfg.validate()?;
    let target = &y[p..];
    let m = target.len();
    let mut restricted = vec![vec![1.0; m]];
    for l in 1..=p {
        restricted.push(lagged(y, p, l));
    }
    let mut unrestricted = restricted.clone();
    for l in 1..=p {
        unrestricted.push(lagged(x, p, l));
    }
    let degenerate = GrangerStat {
        statistic: 0.0,
        degenerate: true,
    };
    let (Some(rss_r), Some(rss_u)) = (ols_rss(restricted, target), ols_rss(unrestricted, target)) else {
        return Ok(degenerate);
    };
    let tss: f64 = {
        let mean = target.iter().sum::<f64>() / m as f64;
        target.iter().map(|v| (v - mean) * (v - mean)).sum()
    };
    if !(rss_u > 1e-24 * tss.max(f64::MIN_POSITIVE)) || rss_u <= 0.0 {
        return Ok(degenerate);
    }
    let (d1, d2) = cfg.degrees_of_freedom();
    let f = ((rss_r - rss_u).max(0.0) / d1) / (rss_u / d2);
    Ok(GrangerStat {
        statistic: f,
        degenerate: false,
    })
}

/// Observed matrices and the per-window degenerate-pair masks
/// (`mask[t][(u, v)] = 1` where the statistic is a placeholder 0).
#[derive(Clone, Debug, PartialEq)]
pub struct GrangerSequence {
    pub observations: ObservationSet,
    pub masks: Vec<Matrix>,
    /// Index (in the transformed series) of the last period of each window.
    pub window_ends: Vec<usize>,
}

impl GrangerSequence {
    pub fn degenerate_count(&self) -> usize {
        self.masks.iter().map(|m| m.as_slice().iter().filter(|&&x| x != 0.0).count()).sum()
    }
}

/// One window: F statistic for every ordered pair.
pub fn granger_window(panel: &PricePanel, start: usize, cfg: &GrangerConfig) -> Result<(Matrix, Matrix)> {
    let m = panel.width();
    let mut y = Matrix::zeros(m, m);
    let mut mask = Matrix::zeros(m, m);
    let end = start + cfg.window;
    for u in 0..m {
        for v in 0..m {
            if u == v {
                continue;
            }
            let s = granger_f(&panel.series[u][start..end], &panel.series[v][start..end], cfg.lag)?;
            y[(u, v)] = s.statistic;
            if s.degenerate {
                mask[(u, v)] = 1.0;
            }
        }
    }
    Ok((y, mask))
}

/// `T = L' − w + 1` windows over the (optionally log-returned) panel.
pub fn build_observation_sequence(panel: &PricePanel, cfg: &GrangerConfig) -> Result<GrangerSequence> {
    cfg.validate()?;
    if panel.width() == 0 {
        return Err(Error::EmptyInput("price panel"));
    }
    let series = if cfg.log_returns { to_returns(panel)? } else { panel.clone() };
    let len = series.len();
    if len < cfg.window {
        return Err(Error::domain(format!(
            "{len} usable periods are fewer than one window of {}",
            cfg.window
        )));
    }
    let count = len - cfg.window + 1;
    let mut ys = Vec::with_capacity(count);
    let mut masks = Vec::with_capacity(count);
    for start in 0..count {
        let (y, mask) = granger_window(&series, start, cfg)?;
        ys.push(y);
        masks.push(mask);
    }
    Ok(GrangerSequence {
        observations: ObservationSet::new(panel.width(), ys)?,
        masks,
        window_ends: (0..count).map(|s| s + cfg.window - 1).collect(),
    })
}
