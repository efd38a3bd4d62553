use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleMode {
    Examples,
    Groups,
}

impl ResampleMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ResampleMode::Examples => "examples",
            ResampleMode::Groups => "groups",
        }
    }
}

/// Percentile bootstrap settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig { replicates: 2000, level: 0.95, seed: 13 }
    }
}

impl BootstrapConfig {
    fn check(&self) -> Result<(), MetricsError> {
        if self.replicates < 1 {
            return Err(MetricsError::InvalidArgument("bootstrap needs at least one replicate".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(MetricsError::InvalidArgument(format!("bootstrap level {} is outside (0, 1)", self.level)));
        }
        Ok(())
    }
}

/// A point estimate with its percentile interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
    pub mode: ResampleMode,
    pub replicates: usize,
    pub level: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn percentile_interval(
    mut stats: Vec<f64>,
    estimate: f64,
    mode: ResampleMode,
    cfg: &BootstrapConfig,
) -> Interval {
    stats.sort_by(f64::total_cmp);
    let alpha = (1.0 - cfg.level) / 2.0;
    Interval {
        estimate,
        low: quantile(&stats, alpha),
        high: quantile(&stats, 1.0 - alpha),
        mode,
        replicates: cfg.replicates,
        level: cfg.level,
    }
}

/// Resamples items with replacement. Replicate `r` draws from its own
/// stream keyed by `(seed, r)`.
pub fn bootstrap_ci<T: Clone>(
    items: &[T],
    statistic: impl Fn(&[T]) -> f64,
    cfg: &BootstrapConfig,
) -> Result<Interval, MetricsError> {
    cfg.check()?;
    if items.is_empty() {
        return Err(MetricsError::Empty("bootstrap sample"));
    }
    let n = items.len();
    let mut buf = Vec::with_capacity(n);
    let stats = (0..cfg.replicates)
        .map(|r| {
            let mut rng = rng::indexed(cfg.seed, r as u64);
            buf.clear();
            buf.extend((0..n).map(|_| items[rng.random_range(0..n)].clone()));
            statistic(&buf)
        })
        .collect();
    Ok(percentile_interval(stats, statistic(items), ResampleMode::Examples, cfg))
}

/// Resamples whole groups with replacement. Groups are ordered by key, so
/// the interval does not depend on input order for order-free statistics.
pub fn bootstrap_ci_grouped<T: Clone, K: Ord>(
    items: &[T],
    group_of: impl Fn(&T) -> K,
    statistic: impl Fn(&[T]) -> f64,
    cfg: &BootstrapConfig,
) -> Result<Interval, MetricsError> {
    cfg.check()?;
    if items.is_empty() {
        return Err(MetricsError::Empty("bootstrap sample"));
    }
    let mut groups: BTreeMap<K, Vec<T>> = BTreeMap::new();
    for item in items {
        groups.entry(group_of(item)).or_default().push(item.clone());
    }
    let groups: Vec<Vec<T>> = groups.into_values().collect();
    let g = groups.len();
    let mut buf = Vec::with_capacity(items.len());
    let stats = (0..cfg.replicates)
        .map(|r| {
            let mut rng = rng::indexed(cfg.seed, r as u64);
            buf.clear();
            for _ in 0..g {
                buf.extend_from_slice(&groups[rng.random_range(0..g)]);
            }
            statistic(&buf)
        })
        .collect();
    Ok(percentile_interval(stats, statistic(items), ResampleMode::Groups, cfg))
}
