use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::GanConfig;
use crate::codec::{BlockKind, BlockLayout, NormalizationMethod};
use crate::error::{shape, Error, Result};
use crate::kernel::{
    adam_step, backward_mlp, bce_with_logits, forward_mlp, sigmoid, AdamState, Matrix, MlpGrads, MlpParams,
};

/// Standard deviation of the initial weights.
pub const INIT_STD: f64 = 0.02;

fn init_mlp<R: Rng + ?Sized>(rng: &mut R, in_dim: usize, hidden: usize, out: usize, slope: f64) -> MlpParams {
    let normal = Normal::new(0.0, INIT_STD).expect("valid std");
    let mut p = MlpParams::zeros(in_dim, hidden, out, slope);
    for v in p.w1.data_mut() {
        *v = normal.sample(rng);
    }
    for v in p.w2.data_mut() {
        *v = normal.sample(rng);
    }
    p
}

/// Generator `noise_dim -> gen_hidden -> encoded_width` and discriminator
/// `encoded_width -> disc_hidden -> 1`, weights from N(0, 0.02²), zero biases.
pub fn init_networks<R: Rng + ?Sized>(
    config: &GanConfig,
    encoded_width: usize,
    rng: &mut R,
) -> Result<(MlpParams, MlpParams)> {
    config.validate()?;
    if encoded_width == 0 {
        return Err(Error::Argument("encoded width must be at least 1".into()));
    }
    let generator = init_mlp(rng, config.noise_dim, config.gen_hidden, encoded_width, config.gen_slope);
    let discriminator = init_mlp(rng, encoded_width, config.disc_hidden, 1, config.disc_slope);
    Ok((generator, discriminator))
}

/// `rows x dim` matrix of i.i.d. standard normal draws, filled row by row.
pub fn sample_noise<R: Rng + ?Sized>(rng: &mut R, rows: usize, dim: usize) -> Matrix {
    let data: Vec<f64> = (0..rows * dim).map(|_| StandardNormal.sample(rng)).collect();
    Matrix::from_vec(rows, dim, data).expect("length matches")
}

fn scalar_head_is_sigmoid(method: NormalizationMethod) -> bool {
    !matches!(method, NormalizationMethod::Standardization)
}

/// Output heads: softmax over each categorical block, sigmoid over min-max and
/// max-absolute scalars, identity over standardized scalars.
pub fn apply_heads(pre: &Matrix, layout: &BlockLayout) -> Result<Matrix> {
    if pre.cols() != layout.width() {
        return Err(shape(
            "apply_heads",
            format!("generator emits {} values per row, layout width is {}", pre.cols(), layout.width()),
        ));
    }
    let mut out = pre.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        for block in layout.blocks() {
            let span = &mut row[block.offset..block.offset + block.width];
            match block.kind {
                BlockKind::Continuous { method } => {
                    if scalar_head_is_sigmoid(method) {
                        span[0] = sigmoid(span[0]);
                    }
                }
                BlockKind::Categorical => softmax_in_place(span),
            }
        }
    }
    Ok(out)
}

fn softmax_in_place(span: &mut [f64]) {
    let max = span.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in span.iter_mut() {
        *v = libm::exp(*v - max);
        total += *v;
    }
    for v in span.iter_mut() {
        *v /= total;
    }
}

/// Pulls `d loss / d head_output` back to the pre-head logits, given the head
/// outputs from [`apply_heads`].
pub fn heads_backward(output: &Matrix, output_grad: &Matrix, layout: &BlockLayout) -> Result<Matrix> {
    if output.shape() != output_grad.shape() || output.cols() != layout.width() {
        return Err(shape(
            "heads_backward",
            format!(
                "output {}x{}, gradient {}x{}, layout width {}",
                output.rows(),
                output.cols(),
                output_grad.rows(),
                output_grad.cols(),
                layout.width()
            ),
        ));
    }
    let mut grad = output_grad.clone();
    for r in 0..grad.rows() {
        let y = output.row(r);
        let g = grad.row_mut(r);
        for block in layout.blocks() {
            let range = block.offset..block.offset + block.width;
            match block.kind {
                BlockKind::Continuous { method } => {
                    if scalar_head_is_sigmoid(method) {
                        let s = y[block.offset];
                        g[block.offset] *= s * (1.0 - s);
                    }
                }
                BlockKind::Categorical => {
                    let ys = &y[range.clone()];
                    let dot: f64 = ys.iter().zip(&g[range.clone()]).map(|(a, b)| a * b).sum();
                    for (gi, yi) in g[range].iter_mut().zip(ys) {
                        *gi = yi * (*gi - dot);
                    }
                }
            }
        }
    }
    Ok(grad)
}

fn check_generator(gen: &MlpParams, noise: &Matrix, layout: &BlockLayout) -> Result<()> {
    if noise.cols() != gen.in_dim() {
        return Err(shape(
            "generator_forward",
            format!("noise has {} cols, generator expects {}", noise.cols(), gen.in_dim()),
        ));
    }
    if gen.out_dim() != layout.width() {
        return Err(shape(
            "generator_forward",
            format!("generator emits {} values, layout width is {}", gen.out_dim(), layout.width()),
        ));
    }
    Ok(())
}

/// Runs the generator on `noise` and applies the output heads.
pub fn generator_forward(gen: &MlpParams, noise: &Matrix, layout: &BlockLayout) -> Result<Matrix> {
    check_generator(gen, noise, layout)?;
    let cache = forward_mlp(gen, noise)?;
    apply_heads(&cache.output_pre, layout)
}

/// BCE of the discriminator on `real` (target 1) stacked over `fake`
/// (target 0), and its gradient with respect to the discriminator.
pub fn discriminator_loss_and_grads(disc: &MlpParams, real: &Matrix, fake: &Matrix) -> Result<(f64, MlpGrads)> {
    if real.rows() == 0 {
        return Err(Error::Argument("discriminator batch is empty".into()));
    }
    let input = real.vstack(fake)?;
    let cache = forward_mlp(disc, &input)?;
    let n = input.rows();
    let mut targets = vec![1.0; real.rows()];
    targets.resize(n, 0.0);
    let (loss, up) = bce_with_logits(cache.output_pre.data(), &targets)?;
    let up = Matrix::from_vec(n, 1, up)?;
    Ok((loss, backward_mlp(disc, &cache, &up)?.grads))
}

/// Non-saturating generator loss: BCE of `D(G(noise))` against target 1,
/// with the gradient carried through the discriminator into the generator.
pub fn generator_loss_and_grads(
    gen: &MlpParams,
    disc: &MlpParams,
    noise: &Matrix,
    layout: &BlockLayout,
) -> Result<(f64, MlpGrads)> {
    check_generator(gen, noise, layout)?;
    let n = noise.rows();
    if n == 0 {
        return Err(Error::Argument("generator batch is empty".into()));
    }
    let gen_cache = forward_mlp(gen, noise)?;
    let fake = apply_heads(&gen_cache.output_pre, layout)?;
    let disc_cache = forward_mlp(disc, &fake)?;
    let (loss, up) = bce_with_logits(disc_cache.output_pre.data(), &vec![1.0; n])?;
    let up = Matrix::from_vec(n, 1, up)?;
    let fake_grad = backward_mlp(disc, &disc_cache, &up)?.input_grad;
    let pre_grad = heads_backward(&fake, &fake_grad, layout)?;
    Ok((loss, backward_mlp(gen, &gen_cache, &pre_grad)?.grads))
}

fn ensure_finite(loss: f64, who: &str, step: u64) -> Result<()> {
    if loss.is_finite() {
        Ok(())
    } else {
        Err(Error::Numeric(format!("{who} loss became {loss} at optimizer step {step}")))
    }
}

/// Both networks with their optimizers.
#[derive(Debug, Clone)]
pub struct Gan {
    pub config: GanConfig,
    pub layout: BlockLayout,
    pub generator: MlpParams,
    pub discriminator: MlpParams,
    pub gen_opt: AdamState,
    pub disc_opt: AdamState,
}

impl Gan {
    pub fn new<R: Rng + ?Sized>(config: GanConfig, layout: BlockLayout, rng: &mut R) -> Result<Self> {
        let (generator, discriminator) = init_networks(&config, layout.width(), rng)?;
        Self::from_params(config, layout, generator, discriminator)
    }

    pub fn from_params(
        config: GanConfig,
        layout: BlockLayout,
        generator: MlpParams,
        discriminator: MlpParams,
    ) -> Result<Self> {
        generator.validate()?;
        discriminator.validate()?;
        let gen_opt = AdamState::new(&generator, config.adam())?;
        let disc_opt = AdamState::new(&discriminator, config.adam())?;
        Ok(Self {
            config,
            layout,
            generator,
            discriminator,
            gen_opt,
            disc_opt,
        })
    }

    /// One discriminator update against an equal-sized fake batch. The
    /// generator is not touched.
    pub fn discriminator_step<R: Rng + ?Sized>(&mut self, real_batch: &Matrix, rng: &mut R) -> Result<f64> {
        if real_batch.rows() == 0 {
            return Err(Error::Argument("discriminator batch is empty".into()));
        }
        let noise = sample_noise(rng, real_batch.rows(), self.config.noise_dim);
        let fake = generator_forward(&self.generator, &noise, &self.layout)?;
        let (loss, grads) = discriminator_loss_and_grads(&self.discriminator, real_batch, &fake)?;
        ensure_finite(loss, "discriminator", self.disc_opt.t + 1)?;
        adam_step(&mut self.discriminator, &grads, &mut self.disc_opt)?;
        Ok(loss)
    }

    /// One generator update. The discriminator is not touched.
    pub fn generator_step<R: Rng + ?Sized>(&mut self, batch_size: usize, rng: &mut R) -> Result<f64> {
        if batch_size == 0 {
            return Err(Error::Argument("generator batch size must be at least 1".into()));
        }
        let noise = sample_noise(rng, batch_size, self.config.noise_dim);
        let (loss, grads) = generator_loss_and_grads(&self.generator, &self.discriminator, &noise, &self.layout)?;
        ensure_finite(loss, "generator", self.gen_opt.t + 1)?;
        adam_step(&mut self.generator, &grads, &mut self.gen_opt)?;
        Ok(loss)
    }
}
