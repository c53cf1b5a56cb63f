use alloc::format;

use super::mlp::check_grad_shapes;
use super::{MlpGrads, MlpParams};
use crate::error::{Error, Result};

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moments for one [`MlpParams`], plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: MlpGrads,
    pub v: MlpGrads,
    pub t: u64,
    pub hyper: AdamHyper,
}

impl AdamState {
    pub fn new(params: &MlpParams, hyper: AdamHyper) -> Result<Self> {
        if !(hyper.lr > 0.0) {
            return Err(Error::Argument(format!("learning rate must be > 0, got {}", hyper.lr)));
        }
        Ok(Self {
            m: MlpGrads::zeros_like(params),
            v: MlpGrads::zeros_like(params),
            t: 0,
            hyper,
        })
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(params: &mut MlpParams, grads: &MlpGrads, state: &mut AdamState) -> Result<()> {
    check_grad_shapes("adam_step", params, grads)?;
    check_grad_shapes("adam_step", params, &state.m)?;
    check_grad_shapes("adam_step", params, &state.v)?;

    state.t += 1;
    let AdamHyper {
        lr,
        beta1,
        beta2,
        epsilon,
    } = state.hyper;
    let t = state.t as f64;
    let correction1 = 1.0 - libm::pow(beta1, t);
    let correction2 = 1.0 - libm::pow(beta2, t);

    let gs = grads.tensors();
    let ms = state.m.tensors_mut();
    let vs = state.v.tensors_mut();
    let ps = params.tensors_mut();
    for (((p, g), m), v) in ps.into_iter().zip(gs).zip(ms).zip(vs) {
        for i in 0..p.len() {
            let gi = g[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
            v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
            let m_hat = m[i] / correction1;
            let v_hat = v[i] / correction2;
            p[i] -= lr * m_hat / (libm::sqrt(v_hat) + epsilon);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Matrix;
    use alloc::vec;

    fn scalar(theta: f64) -> MlpParams {
        MlpParams::new(
            Matrix::from_vec(1, 1, vec![theta]).unwrap(),
            vec![0.0],
            Matrix::from_vec(1, 1, vec![0.0]).unwrap(),
            vec![0.0],
            0.5,
        )
        .unwrap()
    }

    fn grad_on_w1(g: f64) -> MlpGrads {
        let mut grads = MlpGrads::zeros_like(&scalar(0.0));
        grads.w1.set(0, 0, g);
        grads
    }

    #[test]
    fn zero_gradients_leave_params_unchanged() {
        let mut p = scalar(0.3);
        p.b2[0] = -1.2;
        let before = p.clone();
        let mut st = AdamState::new(&p, AdamHyper::default()).unwrap();
        for _ in 0..5 {
            adam_step(&mut p, &MlpGrads::zeros_like(&before), &mut st).unwrap();
        }
        assert_eq!(p, before);
        assert_eq!(st.t, 5);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = scalar(0.0);
        let mut st = AdamState::new(&p, AdamHyper::default()).unwrap();
        adam_step(&mut p, &grad_on_w1(1.0), &mut st).unwrap();
        assert!((p.w1.get(0, 0) + 1e-4).abs() < 1e-12);
        assert_eq!(st.t, 1);
    }

    #[test]
    fn two_steps_match_scalar_reference() {
        let (lr, b1, b2, eps) = (1e-4, 0.9, 0.999, 1e-8);
        let g = 0.37;
        let (mut theta, mut m, mut v) = (0.25_f64, 0.0_f64, 0.0_f64);
        let (mut b1t, mut b2t) = (1.0, 1.0);
        for _ in 0..2 {
            b1t *= b1;
            b2t *= b2;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            theta -= lr * (m / (1.0 - b1t)) / ((v / (1.0 - b2t)).sqrt() + eps);
        }

        let mut p = scalar(0.25);
        let mut st = AdamState::new(&p, AdamHyper::default()).unwrap();
        for _ in 0..2 {
            adam_step(&mut p, &grad_on_w1(g), &mut st).unwrap();
        }
        assert!((p.w1.get(0, 0) - theta).abs() <= 1e-15);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let mut p = scalar(0.0);
        let mut st = AdamState::new(&p, AdamHyper::default()).unwrap();
        let wrong = MlpGrads::zeros_like(&MlpParams::zeros(2, 1, 1, 0.5));
        assert!(adam_step(&mut p, &wrong, &mut st).is_err());
    }

    #[test]
    fn non_positive_learning_rate_rejected() {
        let hyper = AdamHyper {
            lr: 0.0,
            ..AdamHyper::default()
        };
        assert!(AdamState::new(&scalar(0.0), hyper).is_err());
    }
}
