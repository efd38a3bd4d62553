use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{ProbeError, SparseVector};
use crate::rng;

/// Full-batch gradient descent settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub l2: f64,
    pub lr: f64,
    pub iters: usize,
    pub seed: u64,
    /// Weight examples by inverse class frequency.
    pub balanced: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { l2: 1e-2, lr: 0.1, iters: 1000, seed: 13, balanced: true }
    }
}

/// Multinomial logistic regression over `k` classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxRegression {
    pub k: usize,
    pub dim: usize,
    /// Row-major `k × dim`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Numerically stable softmax.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|x| x / z).collect()
}

impl SoftmaxRegression {
    pub fn zeros(k: usize, dim: usize) -> Self {
        SoftmaxRegression { k, dim, weights: vec![0.0; k * dim], bias: vec![0.0; k] }
    }

    fn row(&self, c: usize) -> &[f64] {
        &self.weights[c * self.dim..(c + 1) * self.dim]
    }

    pub fn scores(&self, x: &SparseVector) -> Result<Vec<f64>, ProbeError> {
        if x.dim() != self.dim {
            return Err(ProbeError::DimensionMismatch { expected: self.dim, found: x.dim() });
        }
        Ok((0..self.k).map(|c| x.dot(self.row(c)) + self.bias[c]).collect())
    }

    pub fn predict_proba(&self, x: &SparseVector) -> Result<Vec<f64>, ProbeError> {
        Ok(softmax(&self.scores(x)?))
    }

    /// Weighted mean cross-entropy plus `l2/2 · ‖W‖²` (bias unpenalized),
    /// with its gradient laid out as `weights` followed by `bias`.
    pub fn loss_and_grad(&self, xs: &[SparseVector], ys: &[usize], ws: &[f64], l2: f64) -> (f64, Vec<f64>) {
        let kd = self.k * self.dim;
        let mut grad = vec![0.0; kd + self.k];
        let total: f64 = ws.iter().sum();
        let mut loss = 0.0;
        for ((x, &y), &w) in xs.iter().zip(ys).zip(ws) {
            let s: Vec<f64> = (0..self.k).map(|c| x.dot(self.row(c)) + self.bias[c]).collect();
            let m = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + s.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
            loss += w * (lse - s[y]);
            for c in 0..self.k {
                let g = w * ((s[c] - lse).exp() - f64::from(u8::from(c == y))) / total;
                for &(i, v) in x.entries() {
                    grad[c * self.dim + i as usize] += g * v;
                }
                grad[kd + c] += g;
            }
        }
        loss /= total;
        let mut penalty = 0.0;
        for (g, w) in grad[..kd].iter_mut().zip(&self.weights) {
            *g += l2 * w;
            penalty += w * w;
        }
        (loss + 0.5 * l2 * penalty, grad)
    }

    fn step(&mut self, grad: &[f64], lr: f64) {
        let kd = self.k * self.dim;
        for (w, g) in self.weights.iter_mut().zip(&grad[..kd]) {
            *w -= lr * g;
        }
        for (b, g) in self.bias.iter_mut().zip(&grad[kd..]) {
            *b -= lr * g;
        }
    }
}

/// Per-example weights; inverse class frequency when `balanced`.
pub fn example_weights(ys: &[usize], k: usize, balanced: bool) -> Vec<f64> {
    if !balanced {
        return vec![1.0; ys.len()];
    }
    let mut counts = vec![0usize; k];
    for &y in ys {
        counts[y] += 1;
    }
    let present = counts.iter().filter(|&&c| c > 0).count() as f64;
    ys.iter().map(|&y| ys.len() as f64 / (present * counts[y] as f64)).collect()
}

/// Trains by full-batch gradient descent from a small seeded initialisation.
/// Returns the model and the loss before each step.
pub fn train_softmax(
    xs: &[SparseVector],
    ys: &[usize],
    k: usize,
    cfg: &TrainConfig,
) -> Result<(SoftmaxRegression, Vec<f64>), ProbeError> {
    let Some(first) = xs.first() else {
        return Err(ProbeError::Empty("training set"));
    };
    let dim = first.dim();
    if let Some(x) = xs.iter().find(|x| x.dim() != dim) {
        return Err(ProbeError::DimensionMismatch { expected: dim, found: x.dim() });
    }
    assert_eq!(xs.len(), ys.len(), "features and labels must align");
    let mut present = vec![false; k];
    for &y in ys {
        if y >= k {
            return Err(ProbeError::InvalidVector(format!("class index {y} outside {k} classes")));
        }
        present[y] = true;
    }
    let n_present = present.iter().filter(|&&p| p).count();
    if n_present < 2 {
        return Err(ProbeError::MissingLabel { present: n_present });
    }

    let mut model = SoftmaxRegression::zeros(k, dim);
    let mut r = rng::stream(cfg.seed, "softmax-init");
    for w in &mut model.weights {
        *w = r.random_range(-0.01..0.01);
    }
    let ws = example_weights(ys, k, cfg.balanced);
    let mut history = Vec::with_capacity(cfg.iters);
    for iteration in 0..cfg.iters {
        let (loss, grad) = model.loss_and_grad(xs, ys, &ws, cfg.l2);
        if !loss.is_finite() {
            return Err(ProbeError::NonFiniteLoss { iteration });
        }
        history.push(loss);
        model.step(&grad, cfg.lr);
    }
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense(rows: &[Vec<f64>]) -> Vec<SparseVector> {
        rows.iter().map(|r| SparseVector::from_dense(r).unwrap()).collect()
    }

    #[test]
    fn separable_toy_set() {
        let xs = dense(&[vec![2.0, 0.0], vec![1.5, 0.2], vec![0.0, 2.0], vec![0.1, 1.7], vec![-2.0, -2.0], vec![-1.5, -1.8]]);
        let ys = [0, 0, 1, 1, 2, 2];
        let (m, hist) = train_softmax(&xs, &ys, 3, &TrainConfig::default()).unwrap();
        for (x, &y) in xs.iter().zip(&ys) {
            let p = m.predict_proba(x).unwrap();
            let arg = (0..3).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
            assert_eq!(arg, y);
        }
        assert!(hist.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn one_label_is_missing_label() {
        let xs = dense(&[vec![1.0], vec![2.0]]);
        assert!(matches!(
            train_softmax(&xs, &[2, 2], 3, &TrainConfig::default()),
            Err(ProbeError::MissingLabel { present: 1 })
        ));
    }

    #[test]
    fn divergence_is_reported() {
        let xs = dense(&[vec![1e200], vec![-1e200]]);
        let cfg = TrainConfig { lr: 1e10, ..Default::default() };
        assert!(matches!(train_softmax(&xs, &[0, 1], 2, &cfg), Err(ProbeError::NonFiniteLoss { .. })));
    }

    #[test]
    fn zero_model_is_uniform() {
        let m = SoftmaxRegression::zeros(3, 4);
        let p = m.predict_proba(&SparseVector::from_dense(&[1.0, 2.0, 3.0, 4.0]).unwrap()).unwrap();
        for v in p {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let m = SoftmaxRegression::zeros(3, 4);
        assert!(matches!(
            m.predict_proba(&SparseVector::from_dense(&[1.0]).unwrap()),
            Err(ProbeError::DimensionMismatch { expected: 4, found: 1 })
        ));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut r = rng::seeded(7);
        let dim = 5;
        let xs: Vec<SparseVector> = (0..20)
            .map(|_| SparseVector::from_dense(&(0..dim).map(|_| r.random_range(-2.0..2.0)).collect::<Vec<_>>()).unwrap())
            .collect();
        let ys: Vec<usize> = (0..20).map(|i| i % 3).collect();
        let ws = example_weights(&ys, 3, true);
        let mut m = SoftmaxRegression::zeros(3, dim);
        for w in m.weights.iter_mut().chain(m.bias.iter_mut()) {
            *w = r.random_range(-1.0..1.0);
        }
        let (_, grad) = m.loss_and_grad(&xs, &ys, &ws, 1e-2);
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for p in 0..grad.len() {
            let mut plus = m.clone();
            let mut minus = m.clone();
            let kd = 3 * dim;
            if p < kd {
                plus.weights[p] += h;
                minus.weights[p] -= h;
            } else {
                plus.bias[p - kd] += h;
                minus.bias[p - kd] -= h;
            }
            let numeric = (plus.loss_and_grad(&xs, &ys, &ws, 1e-2).0 - minus.loss_and_grad(&xs, &ys, &ws, 1e-2).0) / (2.0 * h);
            let rel = (numeric - grad[p]).abs() / numeric.abs().max(grad[p].abs()).max(1e-8);
            worst = worst.max(rel);
        }
        assert!(worst < 1e-4, "max relative error {worst}");
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        let xs = dense(&[vec![1.0, 0.5], vec![0.2, 1.0], vec![-1.0, -0.3]]);
        let a = train_softmax(&xs, &[0, 1, 2], 3, &TrainConfig { iters: 50, ..Default::default() }).unwrap();
        let b = train_softmax(&xs, &[0, 1, 2], 3, &TrainConfig { iters: 50, ..Default::default() }).unwrap();
        assert_eq!(a.0, b.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn probabilities_sum_to_one(
            w in prop::collection::vec(-50.0f64..50.0, 12),
            b in prop::collection::vec(-50.0f64..50.0, 3),
            x in prop::collection::vec(-10.0f64..10.0, 4),
        ) {
            let m = SoftmaxRegression { k: 3, dim: 4, weights: w, bias: b };
            let p = m.predict_proba(&SparseVector::from_dense(&x).unwrap()).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(p.iter().all(|&v| v >= 0.0));
        }

        #[test]
        fn raising_one_score_raises_its_probability(s in prop::collection::vec(-20.0f64..20.0, 3), d in 0.01f64..5.0) {
            let before = softmax(&s)[2];
            let mut t = s.clone();
            t[2] += d;
            let after = softmax(&t)[2];
            // once the probability rounds to 1 it cannot grow further
            prop_assert!(after > before || (after == before && before > 1.0 - 1e-9));
        }
    }
}
