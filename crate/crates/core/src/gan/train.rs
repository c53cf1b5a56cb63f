use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::{rng_for, Checkpoint, RngState, CHECKPOINT_VERSION, SAMPLE_STREAM, TRAIN_STREAM};
use super::nets::{generator_forward, sample_noise, Gan};
use super::{GanConfig, GenerationSchedule};
use crate::codec::{decode_matrix, decode_matrix_sampled, encode_table, BlockLayout, EncodedMatrix, FittedCodec};
use crate::error::{Error, Result};
use crate::kernel::MlpParams;
use crate::table::{ColumnSpec, DataTable};

const SAMPLE_CHUNK: usize = 4096;

/// One line of the training log. Losses are means over the epoch's steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub disc_loss: f64,
    pub gen_loss: f64,
    pub quota: usize,
    pub cumulative_quota: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub checkpoint: Checkpoint,
    pub synthetic: DataTable,
    pub log: Vec<EpochRecord>,
}

/// Draws `n` noise rows, runs the generator and decodes the result.
pub fn sample_rows<R: Rng + ?Sized>(
    generator: &MlpParams,
    layout: &BlockLayout,
    schema: &[ColumnSpec],
    codec: &FittedCodec,
    n: usize,
    sampled_decode: bool,
    rng: &mut R,
) -> Result<DataTable> {
    let mut out = DataTable::empty(schema.to_vec());
    let mut left = n;
    while left > 0 {
        let rows = left.min(SAMPLE_CHUNK);
        let noise = sample_noise(rng, rows, generator.in_dim());
        let data = generator_forward(generator, &noise, layout)?;
        let m = EncodedMatrix {
            layout: layout.clone(),
            data,
        };
        let part = if sampled_decode {
            decode_matrix_sampled(&m, schema, codec, rng)?
        } else {
            decode_matrix(&m, schema, codec)?
        };
        out.append(&part)?;
        left -= rows;
    }
    Ok(out)
}

/// Adversarial training that emits each epoch's quota of synthetic rows
/// right after that epoch's updates.
///
/// Each epoch shuffles the real rows, walks full batches of
/// `min(batch_size, rows)` and runs `disc_steps_per_gen_step` discriminator
/// steps followed by one generator step per batch. The trailing partial
/// batch is dropped.
pub fn train_with_generation(
    table: &DataTable,
    config: &GanConfig,
    schedule: &GenerationSchedule,
) -> Result<TrainOutput> {
    train_with_callback(table, config, schedule, |_| {})
}

/// As [`train_with_generation`], calling `on_epoch` after every epoch.
pub fn train_with_callback(
    table: &DataTable,
    config: &GanConfig,
    schedule: &GenerationSchedule,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutput> {
    config.validate()?;
    if schedule.epochs != config.epochs || schedule.quotas.len() != config.epochs {
        return Err(Error::Schedule(format!(
            "schedule covers {} epochs but the config trains for {}",
            schedule.quotas.len(),
            config.epochs
        )));
    }
    let n = table.n_rows();
    if n == 0 {
        return Err(Error::Argument("cannot train on an empty table".into()));
    }
    let (encoded, codec) = encode_table(table, &config.normalization)?;
    let layout = encoded.layout.clone();
    let schema = table.schema();

    let mut train_rng = rng_for(config.seed, TRAIN_STREAM);
    let mut sample_rng = rng_for(config.seed, SAMPLE_STREAM);
    let mut gan = Gan::new(config.clone(), layout.clone(), &mut train_rng)?;

    let batch = config.batch_size.min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut synthetic = DataTable::empty(schema.to_vec());
    let mut log = Vec::with_capacity(config.epochs);
    let mut cumulative = 0;

    for (e, &quota) in schedule.quotas.iter().enumerate() {
        order.shuffle(&mut train_rng);
        let mut d_sum = 0.0;
        let mut d_steps = 0usize;
        let mut g_sum = 0.0;
        let mut g_steps = 0usize;
        for idx in order.chunks_exact(batch) {
            let real = encoded.data.select_rows(idx);
            for _ in 0..config.disc_steps_per_gen_step {
                d_sum += gan.discriminator_step(&real, &mut train_rng)?;
                d_steps += 1;
            }
            g_sum += gan.generator_step(batch, &mut train_rng)?;
            g_steps += 1;
        }

        if quota > 0 {
            let rows = sample_rows(
                &gan.generator,
                &layout,
                schema,
                &codec,
                quota,
                config.sampled_decode,
                &mut sample_rng,
            )?;
            synthetic.append(&rows)?;
        }
        cumulative += quota;
        let record = EpochRecord {
            epoch: e + 1,
            disc_loss: d_sum / d_steps as f64,
            gen_loss: g_sum / g_steps as f64,
            quota,
            cumulative_quota: cumulative,
        };
        on_epoch(&record);
        log.push(record);
    }

    let checkpoint = Checkpoint {
        version: CHECKPOINT_VERSION,
        config: config.clone(),
        schema: schema.to_vec(),
        codec,
        generator: gan.generator,
        discriminator: gan.discriminator,
        rng: RngState::capture(config.seed, &sample_rng)?,
    };
    Ok(TrainOutput {
        checkpoint,
        synthetic,
        log,
    })
}
