use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::train::sample_rows;
use super::GanConfig;
use crate::codec::{BlockLayout, FittedCodec};
use crate::error::{Error, Result};
use crate::kernel::MlpParams;
use crate::table::{validate_schema, ColumnSpec, DataTable};

/// Format version written into checkpoint headers.
pub const CHECKPOINT_VERSION: u32 = 1;
/// ChaCha stream used for initialization, shuffling and training noise.
pub const TRAIN_STREAM: u64 = 0;
/// ChaCha stream used for noise that becomes synthetic rows.
pub const SAMPLE_STREAM: u64 = 1;

const ALGORITHM: &str = "chacha8";

/// ChaCha8 generator seeded from `seed` on the given stream.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Enough to rebuild a ChaCha8 generator at a given position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RngState {
    pub algorithm: String,
    pub seed: u64,
    pub stream: u64,
    pub word_pos: u64,
}

impl RngState {
    pub fn capture(seed: u64, rng: &ChaCha8Rng) -> Result<Self> {
        let word_pos = u64::try_from(rng.get_word_pos())
            .map_err(|_| Error::Numeric("random stream position exceeds 64 bits".into()))?;
        Ok(Self {
            algorithm: ALGORITHM.into(),
            seed,
            stream: rng.get_stream(),
            word_pos,
        })
    }

    pub fn restore(&self) -> Result<ChaCha8Rng> {
        if self.algorithm != ALGORITHM {
            return Err(Error::Config(format!(
                "unsupported generator `{}` (expected {ALGORITHM})",
                self.algorithm
            )));
        }
        let mut rng = rng_for(self.seed, self.stream);
        rng.set_word_pos(u128::from(self.word_pos));
        Ok(rng)
    }
}

/// Everything needed to sample from a trained generator, plus the
/// discriminator for completeness.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub version: u32,
    pub config: GanConfig,
    pub schema: Vec<ColumnSpec>,
    pub codec: FittedCodec,
    pub generator: MlpParams,
    pub discriminator: MlpParams,
    /// Sampling stream position after training.
    pub rng: RngState,
}

impl Checkpoint {
    /// Checks that the pieces fit together.
    pub fn validate(&self) -> Result<()> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Config(format!(
                "checkpoint version {} is not supported (expected {CHECKPOINT_VERSION})",
                self.version
            )));
        }
        self.config.validate()?;
        validate_schema(&self.schema)?;
        self.generator.validate()?;
        self.discriminator.validate()?;
        let width = self.layout()?.width();
        let g = &self.generator;
        let d = &self.discriminator;
        let dims_ok = g.in_dim() == self.config.noise_dim
            && g.hidden_dim() == self.config.gen_hidden
            && g.out_dim() == width
            && d.in_dim() == width
            && d.hidden_dim() == self.config.disc_hidden
            && d.out_dim() == 1;
        if !dims_ok {
            return Err(Error::Config(format!(
                "network shapes ({}x{}x{}, {}x{}x{}) do not match the config and an encoded width of {width}",
                g.in_dim(),
                g.hidden_dim(),
                g.out_dim(),
                d.in_dim(),
                d.hidden_dim(),
                d.out_dim()
            )));
        }
        Ok(())
    }

    pub fn layout(&self) -> Result<BlockLayout> {
        BlockLayout::from_codec(&self.schema, &self.codec)
    }

    /// Sampling generator positioned where training left it.
    pub fn sampling_rng(&self) -> Result<ChaCha8Rng> {
        self.rng.restore()
    }

    /// `n` decoded rows from the generator.
    pub fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<DataTable> {
        let layout = self.layout()?;
        sample_rows(
            &self.generator,
            &layout,
            &self.schema,
            &self.codec,
            n,
            self.config.sampled_decode,
            rng,
        )
    }
}
