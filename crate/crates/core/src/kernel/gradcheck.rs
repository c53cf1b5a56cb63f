use alloc::format;

use super::mlp::check_grad_shapes;
use super::{MlpGrads, MlpParams};
use crate::error::{Error, Result};

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;

const TENSOR_NAMES: [&str; 4] = ["w1", "b1", "w2", "b2"];

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub passed: bool,
    pub worst_relative_error: f64,
    /// Tensor name and flat index of the worst entry.
    pub worst_entry: Option<(&'static str, usize)>,
    pub checked: usize,
}

/// Compares the analytic gradient returned by `loss_and_grad` at `params`
/// with central differences of its loss, entry by entry.
///
/// Relative error is `|a - n| / max(1e-12, |a| + |n|)`.
pub fn gradient_check<F>(params: &MlpParams, tolerance: f64, mut loss_and_grad: F) -> Result<GradCheckReport>
where
    F: FnMut(&MlpParams) -> Result<(f64, MlpGrads)>,
{
    if !(tolerance > 0.0) {
        return Err(Error::Argument(format!("tolerance must be > 0, got {tolerance}")));
    }
    let (loss0, analytic) = loss_and_grad(params)?;
    if !loss0.is_finite() {
        return Err(Error::Numeric(format!("loss is not finite: {loss0}")));
    }
    check_grad_shapes("gradient_check", params, &analytic)?;

    let mut probe = params.clone();
    let mut worst = 0.0_f64;
    let mut worst_entry = None;
    let mut checked = 0;
    let mut eval = |probe: &MlpParams| -> Result<f64> {
        let (l, _) = loss_and_grad(probe)?;
        if l.is_finite() {
            Ok(l)
        } else {
            Err(Error::Numeric(format!("loss is not finite under perturbation: {l}")))
        }
    };

    for (t, name) in TENSOR_NAMES.iter().enumerate() {
        let len = params.tensors()[t].len();
        for i in 0..len {
            let original = params.tensors()[t][i];
            probe.tensors_mut()[t][i] = original + FD_STEP;
            let plus = eval(&probe)?;
            probe.tensors_mut()[t][i] = original - FD_STEP;
            let minus = eval(&probe)?;
            probe.tensors_mut()[t][i] = original;

            let numeric = (plus - minus) / (2.0 * FD_STEP);
            let a = analytic.tensors()[t][i];
            let rel = libm::fabs(a - numeric) / (libm::fabs(a) + libm::fabs(numeric)).max(1e-12);
            if worst_entry.is_none() || rel > worst {
                worst = rel;
                worst_entry = Some((*name, i));
            }
            checked += 1;
        }
    }

    Ok(GradCheckReport {
        passed: worst <= tolerance,
        worst_relative_error: worst,
        worst_entry,
        checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{backward_mlp, forward_mlp, Matrix};
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_params(rng: &mut ChaCha8Rng, i: usize, h: usize, o: usize) -> MlpParams {
        let mut p = MlpParams::zeros(i, h, o, 0.3);
        for t in p.tensors_mut() {
            for v in t.iter_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
        }
        p
    }

    /// Quadratic loss `0.5 * Σ (out - target)²` on the raw MLP output.
    fn quadratic<'a>(x: &'a Matrix, target: &'a Matrix) -> impl FnMut(&MlpParams) -> Result<(f64, MlpGrads)> + 'a {
        move |p: &MlpParams| {
            let c = forward_mlp(p, x)?;
            let diff: Vec<f64> = c.output_pre.data().iter().zip(target.data()).map(|(a, b)| a - b).collect();
            let loss = 0.5 * diff.iter().map(|d| d * d).sum::<f64>();
            let up = Matrix::from_vec(target.rows(), target.cols(), diff)?;
            Ok((loss, backward_mlp(p, &c, &up)?.grads))
        }
    }

    #[test]
    fn linear_net_with_quadratic_loss_is_nearly_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // slope 1 makes the network linear
        let mut p = random_params(&mut rng, 3, 4, 2);
        p.negative_slope = 1.0;
        let x = Matrix::from_fn(5, 3, |_, _| rng.random_range(-1.0..1.0));
        let y = Matrix::from_fn(5, 2, |_, _| rng.random_range(-1.0..1.0));
        let r = gradient_check(&p, 1e-7, quadratic(&x, &y)).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.worst_relative_error < 1e-7);
        assert_eq!(r.checked, p.param_count());
    }

    #[test]
    fn random_nets_pass() {
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let p = random_params(&mut rng, 8, 16, 4);
            let x = Matrix::from_fn(6, 8, |_, _| rng.random_range(-1.0..1.0));
            let y = Matrix::from_fn(6, 4, |_, _| rng.random_range(-1.0..1.0));
            let r = gradient_check(&p, 1e-5, quadratic(&x, &y)).unwrap();
            assert!(r.passed, "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn corrupted_w2_gradient_is_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = random_params(&mut rng, 4, 6, 3);
        let x = Matrix::from_fn(5, 4, |_, _| rng.random_range(-1.0..1.0));
        let y = Matrix::from_fn(5, 3, |_, _| rng.random_range(-1.0..1.0));
        let mut inner = quadratic(&x, &y);
        let r = gradient_check(&p, 1e-5, |q: &MlpParams| {
            let (l, mut g) = inner(q)?;
            for v in g.w2.data_mut() {
                *v *= 1.1;
            }
            Ok((l, g))
        })
        .unwrap();
        assert!(!r.passed);
        assert_eq!(r.worst_entry.map(|e| e.0), Some("w2"));
    }

    #[test]
    fn bad_inputs() {
        let p = MlpParams::zeros(1, 1, 1, 0.5);
        let ok = |q: &MlpParams| Ok((0.0, MlpGrads::zeros_like(q)));
        assert!(matches!(gradient_check(&p, 0.0, ok), Err(Error::Argument(_))));
        let nan = |q: &MlpParams| Ok((f64::NAN, MlpGrads::zeros_like(q)));
        assert!(matches!(gradient_check(&p, 1e-5, nan), Err(Error::Numeric(_))));
    }
}
