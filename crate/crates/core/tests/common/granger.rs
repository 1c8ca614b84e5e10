use mtnet_core::granger::*;
use rand_distr::{Distribution, StandardNormal};

pub fn labels(m: usize) -> Vec<String> {
    (0..m).map(|k| format!("s{k}")).collect()
}

/// Prices `exp(cumsum(ε))` of `m` independent white-noise return series.
pub fn white_noise_prices(m: usize, len: usize, seed: u64) -> PricePanel {
    let mut r = super::rng(seed);
    let series = (0..m)
        .map(|_| {
            let mut level = 0.0;
            (0..len)
                .map(|_| {
                    level += 0.02 * Distribution::<f64>::sample(&StandardNormal, &mut r);
                    (3.0 + level).exp()
                })
                .collect()
        })
        .collect();
    PricePanel::new(labels(m), series).unwrap()
}

/// Share of off-diagonal statistics above the 5% critical value, over
/// independent single-window panels of `m` series (`m(m−1)` pair-windows
/// each). Returns `(rate, pair_windows)`.
pub fn null_edge_rate(panels: usize, m: usize, cfg: &GrangerConfig, seed: u64) -> (f64, usize) {
    let crit = cfg.critical_value(0.05).unwrap();
    let (mut hits, mut total) = (0usize, 0usize);
    for k in 0..panels {
        let panel = white_noise_prices(m, cfg.window + 1, seed.wrapping_add(k as u64));
        let seq = build_observation_sequence(&panel, cfg).unwrap();
        assert_eq!(seq.observations.len(), 1);
        let y = &seq.observations.matrices()[0];
        for u in 0..m {
            for v in 0..m {
                if u != v {
                    total += 1;
                    hits += usize::from(y[(u, v)] > crit);
                }
            }
        }
    }
    (hits as f64 / total as f64, total)
}
