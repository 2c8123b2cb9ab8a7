//! First-order optimizers over a flat list of parameter tensors.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::diff::Tensor;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    #[default]
    Adam,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Clone, Debug)]
pub enum Optimizer {
    Sgd { lr: f64 },
    Adam { lr: f64, params: AdamParams, step: i32, m: Vec<Vec<f64>>, v: Vec<Vec<f64>> },
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, adam: AdamParams, shapes: &[Tensor]) -> Self {
        match kind {
            OptimizerKind::Sgd => Optimizer::Sgd { lr },
            OptimizerKind::Adam => {
                let zeros: Vec<Vec<f64>> = shapes.iter().map(|t| alloc::vec![0.0; t.len()]).collect();
                Optimizer::Adam { lr, params: adam, step: 0, m: zeros.clone(), v: zeros }
            }
        }
    }

    /// Applies one update. `grads[i]` must match `params[i]` in shape.
    pub fn step(&mut self, params: &mut [Tensor], grads: &[Tensor]) {
        debug_assert_eq!(params.len(), grads.len());
        match self {
            Optimizer::Sgd { lr } => {
                for (p, g) in params.iter_mut().zip(grads) {
                    for (x, dx) in p.data_mut().iter_mut().zip(g.data()) {
                        *x -= *lr * dx;
                    }
                }
            }
            Optimizer::Adam { lr, params: hp, step, m, v } => {
                *step += 1;
                let c1 = 1.0 - libm::pow(hp.beta1, *step as f64);
                let c2 = 1.0 - libm::pow(hp.beta2, *step as f64);
                for (((p, g), m), v) in params.iter_mut().zip(grads).zip(m.iter_mut()).zip(v.iter_mut()) {
                    for (((x, &dx), mi), vi) in p.data_mut().iter_mut().zip(g.data()).zip(m.iter_mut()).zip(v.iter_mut()) {
                        *mi = hp.beta1 * *mi + (1.0 - hp.beta1) * dx;
                        *vi = hp.beta2 * *vi + (1.0 - hp.beta2) * dx * dx;
                        let m_hat = *mi / c1;
                        let v_hat = *vi / c2;
                        *x -= *lr * m_hat / (libm::sqrt(v_hat) + hp.eps);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgd_step() {
        let mut p = [Tensor::scalar(1.0)];
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.1, AdamParams::default(), &p);
        opt.step(&mut p, &[Tensor::scalar(2.0)]);
        assert!((p[0].item().unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn adam_first_step_moves_by_lr() {
        // bias correction makes the first update lr * g / (|g| + eps)
        let mut p = [Tensor::scalar(1.0)];
        let mut opt = Optimizer::new(OptimizerKind::Adam, 0.01, AdamParams::default(), &p);
        opt.step(&mut p, &[Tensor::scalar(5.0)]);
        assert!((p[0].item().unwrap() - 0.99).abs() < 1e-9);
    }

    #[test]
    fn adam_minimizes_quadratic() {
        let mut p = [Tensor::new(1, 2, alloc::vec![3.0, -2.0]).unwrap()];
        let mut opt = Optimizer::new(OptimizerKind::Adam, 0.05, AdamParams::default(), &p);
        for _ in 0..2000 {
            let g = Tensor::new(1, 2, p[0].data().iter().map(|x| 2.0 * x).collect()).unwrap();
            opt.step(&mut p, &[g]);
        }
        assert!(p[0].data().iter().all(|x| x.abs() < 1e-2), "{:?}", p[0]);
    }
}
