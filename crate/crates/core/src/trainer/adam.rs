use ndarray::{Array2, Zip};

use crate::model::{Gradients, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates for both parameter matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m_words: Array2<f64>,
    pub v_words: Array2<f64>,
    pub m_clusters: Array2<f64>,
    pub v_clusters: Array2<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        AdamState {
            m_words: Array2::zeros(params.words.raw_dim()),
            v_words: Array2::zeros(params.words.raw_dim()),
            m_clusters: Array2::zeros(params.clusters.raw_dim()),
            v_clusters: Array2::zeros(params.clusters.raw_dim()),
            t: 0,
        }
    }

    /// One bias-corrected Adam step. Frozen matrices are left untouched.
    pub fn step(
        &mut self,
        params: &mut ModelParams,
        grads: &Gradients,
        cfg: &AdamConfig,
        update_words: bool,
        update_clusters: bool,
    ) {
        self.t += 1;
        let t = self.t as i32;
        let c1 = 1.0 - cfg.beta1.powi(t);
        let c2 = 1.0 - cfg.beta2.powi(t);
        if update_words {
            update(
                &mut params.words,
                &grads.words,
                &mut self.m_words,
                &mut self.v_words,
                cfg,
                c1,
                c2,
            );
        }
        if update_clusters {
            update(
                &mut params.clusters,
                &grads.clusters,
                &mut self.m_clusters,
                &mut self.v_clusters,
                cfg,
                c1,
                c2,
            );
        }
    }
}

fn update(
    param: &mut Array2<f64>,
    grad: &Array2<f64>,
    m: &mut Array2<f64>,
    v: &mut Array2<f64>,
    cfg: &AdamConfig,
    c1: f64,
    c2: f64,
) {
    Zip::from(param)
        .and(grad)
        .and(m)
        .and(v)
        .for_each(|p, &g, m, v| {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.eps);
        });
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn scalar(w: f64, c: f64) -> ModelParams {
        ModelParams::new(array![[w]], array![[c]]).unwrap()
    }

    #[test]
    fn constant_gradient_moves_by_learning_rate_against_sign() {
        let mut params = scalar(0.0, 0.0);
        let mut state = AdamState::new(&params);
        let cfg = AdamConfig::default();
        let grads = Gradients {
            words: array![[3.7]],
            clusters: array![[-0.02]],
        };
        for step in 1..=200 {
            let before = params.clone();
            state.step(&mut params, &grads, &cfg, true, true);
            let dw = params.words[[0, 0]] - before.words[[0, 0]];
            let dc = params.clusters[[0, 0]] - before.clusters[[0, 0]];
            // bias correction makes every step exactly lr in magnitude (up to eps)
            assert!((dw + cfg.learning_rate).abs() < 1e-9, "step {step}: {dw}");
            assert!((dc - cfg.learning_rate).abs() < 1e-6, "step {step}: {dc}");
        }
        assert_eq!(state.t, 200);
    }

    #[test]
    fn frozen_matrices_are_not_updated() {
        let mut params = scalar(1.0, 2.0);
        let mut state = AdamState::new(&params);
        let grads = Gradients {
            words: array![[1.0]],
            clusters: array![[1.0]],
        };
        state.step(&mut params, &grads, &AdamConfig::default(), false, true);
        assert_eq!(params.words[[0, 0]], 1.0);
        assert!(params.clusters[[0, 0]] < 2.0);
    }
}
