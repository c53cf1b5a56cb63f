use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{shape, Error, Result};

/// Probability clamp applied before taking logs in [`bce_loss`].
pub const BCE_EPSILON: f64 = 1e-12;

#[inline]
pub fn leaky_relu(x: f64, negative_slope: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        negative_slope * x
    }
}

/// Derivative of [`leaky_relu`]. At exactly zero the positive branch wins, so
/// the derivative there is 1.
#[inline]
pub fn leaky_relu_derivative(x: f64, negative_slope: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        negative_slope
    }
}

/// Logistic function, evaluated so that `exp` never overflows.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Mean binary cross-entropy. Predictions are clamped to `[ε, 1-ε]`.
pub fn bce_loss(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::Argument("bce_loss needs at least one prediction".to_string()));
    }
    if predictions.len() != targets.len() {
        return Err(shape(
            "bce_loss",
            format!("{} predictions vs {} targets", predictions.len(), targets.len()),
        ));
    }
    let sum: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(&p, &y)| {
            let p = p.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
            -(y * libm::log(p) + (1.0 - y) * libm::log(1.0 - p))
        })
        .sum();
    Ok(sum / predictions.len() as f64)
}

/// `ln σ(x)` without forming `σ(x)` first.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -libm::log1p(libm::exp(-x))
    } else {
        x - libm::log1p(libm::exp(x))
    }
}

/// [`bce_loss`] of `sigmoid(logits)`, computed in log space, together with
/// its gradient with respect to each logit.
///
/// The clamp is applied to the log-probabilities, which is the same function
/// as clamping the probabilities but keeps full precision when `σ(z)` is
/// within a few ulps of 0 or 1. Where the clamp is active the gradient is 0.
pub fn bce_with_logits(logits: &[f64], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
    if logits.is_empty() {
        return Err(Error::Argument("bce_with_logits needs at least one logit".to_string()));
    }
    if logits.len() != targets.len() {
        return Err(shape(
            "bce_with_logits",
            format!("{} logits vs {} targets", logits.len(), targets.len()),
        ));
    }
    let lo = libm::log(BCE_EPSILON);
    let hi = libm::log1p(-BCE_EPSILON);
    // clamped value and derivative of ln σ(s·z) with respect to z
    let clamped = |z: f64, s: f64| -> (f64, f64) {
        let l = log_sigmoid(s * z);
        if l < lo {
            (lo, 0.0)
        } else if l > hi {
            (hi, 0.0)
        } else {
            (l, s * sigmoid(-s * z))
        }
    };
    let n = logits.len() as f64;
    let mut total = 0.0;
    let mut grad = Vec::with_capacity(logits.len());
    for (&z, &y) in logits.iter().zip(targets) {
        let (lp, gp) = clamped(z, 1.0);
        let (lq, gq) = clamped(z, -1.0);
        total -= y * lp + (1.0 - y) * lq;
        grad.push(-(y * gp + (1.0 - y) * gq) / n);
    }
    Ok((total / n, grad))
}

/// Weights of `input -> FC -> leaky ReLU -> FC`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    /// `in_dim x hidden_dim`
    pub w1: Matrix,
    pub b1: Vec<f64>,
    /// `hidden_dim x out_dim`
    pub w2: Matrix,
    pub b2: Vec<f64>,
    pub negative_slope: f64,
}

impl MlpParams {
    pub fn new(w1: Matrix, b1: Vec<f64>, w2: Matrix, b2: Vec<f64>, negative_slope: f64) -> Result<Self> {
        let params = Self {
            w1,
            b1,
            w2,
            b2,
            negative_slope,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn zeros(in_dim: usize, hidden_dim: usize, out_dim: usize, negative_slope: f64) -> Self {
        Self {
            w1: Matrix::zeros(in_dim, hidden_dim),
            b1: vec![0.0; hidden_dim],
            w2: Matrix::zeros(hidden_dim, out_dim),
            b2: vec![0.0; out_dim],
            negative_slope,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.negative_slope > 0.0 && self.negative_slope <= 1.0) {
            return Err(Error::Argument(format!(
                "negative slope must lie in (0, 1], got {}",
                self.negative_slope
            )));
        }
        let hidden = self.w1.cols();
        if self.b1.len() != hidden || self.w2.rows() != hidden || self.b2.len() != self.w2.cols() {
            return Err(shape(
                "MlpParams",
                format!(
                    "w1 {}x{}, b1 {}, w2 {}x{}, b2 {}",
                    self.w1.rows(),
                    self.w1.cols(),
                    self.b1.len(),
                    self.w2.rows(),
                    self.w2.cols(),
                    self.b2.len()
                ),
            ));
        }
        Ok(())
    }

    pub fn in_dim(&self) -> usize {
        self.w1.rows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.w2.cols()
    }

    pub fn param_count(&self) -> usize {
        self.w1.data().len() + self.b1.len() + self.w2.data().len() + self.b2.len()
    }

    /// Flat views in the fixed order `w1, b1, w2, b2`.
    pub fn tensors(&self) -> [&[f64]; 4] {
        [self.w1.data(), &self.b1, self.w2.data(), &self.b2]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 4] {
        [self.w1.data_mut(), &mut self.b1, self.w2.data_mut(), &mut self.b2]
    }
}

/// Gradients, shaped like [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
}

impl MlpGrads {
    pub fn zeros_like(params: &MlpParams) -> Self {
        Self {
            w1: Matrix::zeros(params.w1.rows(), params.w1.cols()),
            b1: vec![0.0; params.b1.len()],
            w2: Matrix::zeros(params.w2.rows(), params.w2.cols()),
            b2: vec![0.0; params.b2.len()],
        }
    }

    pub fn tensors(&self) -> [&[f64]; 4] {
        [self.w1.data(), &self.b1, self.w2.data(), &self.b2]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 4] {
        [self.w1.data_mut(), &mut self.b1, self.w2.data_mut(), &mut self.b2]
    }

    fn same_shape(&self, params: &MlpParams) -> bool {
        self.tensors()
            .iter()
            .zip(params.tensors())
            .all(|(g, p)| g.len() == p.len())
    }
}

/// Intermediates kept from [`forward_mlp`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub input: Matrix,
    pub hidden_pre: Matrix,
    pub hidden_post: Matrix,
    pub output_pre: Matrix,
}

pub fn forward_mlp(params: &MlpParams, input: &Matrix) -> Result<ForwardCache> {
    if input.cols() != params.in_dim() {
        return Err(shape(
            "forward_mlp",
            format!("input has {} cols, network in_dim is {}", input.cols(), params.in_dim()),
        ));
    }
    let mut hidden_pre = input.matmul(&params.w1)?;
    hidden_pre.add_row_bias(&params.b1)?;
    let slope = params.negative_slope;
    let hidden_post = hidden_pre.map(|v| leaky_relu(v, slope));
    let mut output_pre = hidden_post.matmul(&params.w2)?;
    output_pre.add_row_bias(&params.b2)?;
    Ok(ForwardCache {
        input: input.clone(),
        hidden_pre,
        hidden_post,
        output_pre,
    })
}

/// Result of [`backward_mlp`]: parameter gradients plus the gradient with
/// respect to the network input, which the generator needs when the loss
/// flows through the discriminator.
#[derive(Debug, Clone)]
pub struct Backward {
    pub grads: MlpGrads,
    pub input_grad: Matrix,
}

pub fn backward_mlp(params: &MlpParams, cache: &ForwardCache, output_grad: &Matrix) -> Result<Backward> {
    if output_grad.shape() != cache.output_pre.shape() {
        return Err(shape(
            "backward_mlp",
            format!(
                "output_grad is {}x{}, forward output was {}x{}",
                output_grad.rows(),
                output_grad.cols(),
                cache.output_pre.rows(),
                cache.output_pre.cols()
            ),
        ));
    }
    if cache.hidden_pre.cols() != params.hidden_dim() || cache.input.cols() != params.in_dim() {
        return Err(shape(
            "backward_mlp",
            format!(
                "cache has hidden width {} and input width {}, params expect {} and {}",
                cache.hidden_pre.cols(),
                cache.input.cols(),
                params.hidden_dim(),
                params.in_dim()
            ),
        ));
    }

    let w2 = cache.hidden_post.matmul_tn(output_grad)?;
    let b2 = output_grad.column_sums();

    let mut hidden_grad = output_grad.matmul_nt(&params.w2)?;
    let slope = params.negative_slope;
    for (g, &z) in hidden_grad.data_mut().iter_mut().zip(cache.hidden_pre.data()) {
        *g *= leaky_relu_derivative(z, slope);
    }

    let w1 = cache.input.matmul_tn(&hidden_grad)?;
    let b1 = hidden_grad.column_sums();
    let input_grad = hidden_grad.matmul_nt(&params.w1)?;

    Ok(Backward {
        grads: MlpGrads { w1, b1, w2, b2 },
        input_grad,
    })
}

pub(crate) fn check_grad_shapes(op: &'static str, params: &MlpParams, grads: &MlpGrads) -> Result<()> {
    if grads.same_shape(params) && grads.w1.shape() == params.w1.shape() {
        Ok(())
    } else {
        Err(shape(
            op,
            format!(
                "gradients w1 {}x{} / w2 {}x{} do not match parameters w1 {}x{} / w2 {}x{}",
                grads.w1.rows(),
                grads.w1.cols(),
                grads.w2.rows(),
                grads.w2.cols(),
                params.w1.rows(),
                params.w1.cols(),
                params.w2.rows(),
                params.w2.cols()
            ),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_by_one() -> MlpParams {
        MlpParams::new(
            Matrix::from_vec(1, 1, vec![2.0]).unwrap(),
            vec![1.0],
            Matrix::from_vec(1, 1, vec![3.0]).unwrap(),
            vec![0.0],
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn leaky_relu_values() {
        assert_eq!(leaky_relu(2.0, 0.8), 2.0);
        assert!((leaky_relu(-1.0, 0.8) + 0.8).abs() < 1e-15);
        assert!((leaky_relu(-3.0, 0.1) + 0.3).abs() < 1e-15);
        assert_eq!(leaky_relu(0.0, 0.1), 0.0);
        assert_eq!(leaky_relu(-0.0, 0.1), 0.0);
    }

    #[test]
    fn leaky_relu_tie_uses_positive_branch() {
        assert_eq!(leaky_relu_derivative(0.0, 0.1), 1.0);
        assert_eq!(leaky_relu_derivative(-1e-300, 0.1), 0.1);
    }

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        let hi = sigmoid(1000.0);
        assert!(hi > 0.0 && hi <= 1.0 && hi.is_finite());
        let lo = sigmoid(-1000.0);
        assert!((0.0..1.0).contains(&lo) && lo.is_finite());
        assert!((sigmoid(1.0) - 0.7310585786).abs() < 1e-10);
    }

    #[test]
    fn bce_with_logits_matches_probability_form() {
        let z = [-3.0, -0.2, 0.0, 0.7, 4.0];
        let y = [0.0, 1.0, 0.0, 1.0, 0.0];
        let p: Vec<f64> = z.iter().map(|&v| sigmoid(v)).collect();
        let (l, g) = bce_with_logits(&z, &y).unwrap();
        assert!((l - bce_loss(&p, &y).unwrap()).abs() < 1e-12);
        for i in 0..5 {
            assert!((g[i] - (p[i] - y[i]) / 5.0).abs() < 1e-15);
        }
        // confident and wrong: both ends clamp to -ln ε with zero slope
        let (l, g) = bce_with_logits(&[-30.0, 30.0], &[1.0, 0.0]).unwrap();
        assert!((l + libm::log(BCE_EPSILON)).abs() < 1e-12);
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn log_sigmoid_keeps_precision_near_one() {
        // ln σ(-40) ≈ -40 and ln(1 - σ(40)) = ln σ(-40)
        assert!((log_sigmoid(-40.0) + 40.0).abs() < 1e-12);
        assert!((log_sigmoid(-25.0) - (-25.0 - libm::log1p(libm::exp(-25.0)))).abs() < 1e-15);
        assert_eq!(log_sigmoid(0.0), -core::f64::consts::LN_2);
    }

    #[test]
    fn bce_values() {
        let ln2 = core::f64::consts::LN_2;
        assert!((bce_loss(&[0.5, 0.5, 0.5], &[1.0, 0.0, 1.0]).unwrap() - ln2).abs() < 1e-15);
        assert!(bce_loss(&[1.0, 0.0], &[1.0, 0.0]).unwrap() <= 1e-11);
        assert!((bce_loss(&[0.9], &[1.0]).unwrap() - 0.105361).abs() < 1e-6);
        assert!(matches!(bce_loss(&[], &[]), Err(Error::Argument(_))));
    }

    #[test]
    fn forward_zero_weights_gives_zero_output() {
        let p = MlpParams::zeros(3, 4, 2, 0.8);
        let x = Matrix::from_fn(5, 3, |i, j| i as f64 - j as f64);
        let c = forward_mlp(&p, &x).unwrap();
        assert!(c.output_pre.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forward_identity_on_positive_inputs() {
        let mut p = MlpParams::zeros(3, 3, 1, 0.8);
        for i in 0..3 {
            p.w1.set(i, i, 1.0);
        }
        let x = Matrix::from_fn(2, 3, |i, j| 1.0 + (i * 3 + j) as f64);
        let c = forward_mlp(&p, &x).unwrap();
        assert_eq!(c.hidden_post, x);
    }

    #[test]
    fn forward_one_by_one_chain() {
        let c = forward_mlp(&one_by_one(), &Matrix::from_vec(1, 1, vec![-1.0]).unwrap()).unwrap();
        assert_eq!(c.hidden_pre.data(), &[-1.0]);
        assert_eq!(c.hidden_post.data(), &[-0.5]);
        assert_eq!(c.output_pre.data(), &[-1.5]);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let err = forward_mlp(&MlpParams::zeros(3, 2, 1, 0.5), &Matrix::zeros(1, 4)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('4') && msg.contains('3'), "{msg}");
    }

    #[test]
    fn backward_zero_upstream_is_zero() {
        let p = one_by_one();
        let c = forward_mlp(&p, &Matrix::from_vec(1, 1, vec![0.7]).unwrap()).unwrap();
        let b = backward_mlp(&p, &c, &Matrix::zeros(1, 1)).unwrap();
        for t in b.grads.tensors() {
            assert!(t.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn backward_one_by_one_matches_hand_chain_rule() {
        // out = w2 * lrelu(w1 x + b1) + b2 with x=-1, w1=2, b1=1, slope 0.5, w2=3.
        // z = -1 (negative branch): d out/d w2 = -0.5, d/d b2 = 1,
        // d/d b1 = w2 * 0.5 = 1.5, d/d w1 = 1.5 * x = -1.5, d/d x = 1.5 * w1 = 3.
        let p = one_by_one();
        let c = forward_mlp(&p, &Matrix::from_vec(1, 1, vec![-1.0]).unwrap()).unwrap();
        let b = backward_mlp(&p, &c, &Matrix::from_vec(1, 1, vec![1.0]).unwrap()).unwrap();
        assert_eq!(b.grads.w2.data(), &[-0.5]);
        assert_eq!(b.grads.b2, vec![1.0]);
        assert_eq!(b.grads.b1, vec![1.5]);
        assert_eq!(b.grads.w1.data(), &[-1.5]);
        assert_eq!(b.input_grad.data(), &[3.0]);
    }

    #[test]
    fn backward_rejects_mismatched_upstream() {
        let p = one_by_one();
        let c = forward_mlp(&p, &Matrix::from_vec(1, 1, vec![-1.0]).unwrap()).unwrap();
        assert!(backward_mlp(&p, &c, &Matrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn invalid_slope_rejected() {
        let p = MlpParams::zeros(1, 1, 1, 0.0);
        assert!(p.validate().is_err());
        let p = MlpParams::zeros(1, 1, 1, 1.5);
        assert!(p.validate().is_err());
    }
}
