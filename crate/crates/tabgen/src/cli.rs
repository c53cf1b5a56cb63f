//! Command-line front end.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tabgen_core::codec::NormalizationPlan;
use tabgen_core::codec::NormalizationMethod;
use tabgen_core::gan::{rng_for, train_with_callback, GanConfig, GenerationMode, SAMPLE_STREAM};
use tabgen_core::metrics::{evaluate_all, FidelityReport};
use tabgen_core::prep::{prepare_census, prepare_olympic};
use tabgen_core::table::{DataTable, MissingTokens};

use crate::charts::{chart_csv, chart_svg, column_chart, file_stem, heatmap_svg};
use crate::checkpoint::{load_checkpoint, save_checkpoint};
use crate::config::{Recipe, RunConfig};
use crate::csv_io::{load_csv, write_csv};
use crate::error::{Error, Result};
use crate::report::{pairs_csv, write_json};
use crate::schema_file::{load_schema, save_schema};
use crate::tune::tune_parallel;

#[derive(Debug, Parser)]
#[command(name = "tabgen", version, about = "Synthetic tabular data with a GAN trained under a generation schedule")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean a raw CSV with a dataset recipe and write it with a schema sidecar.
    Prepare(PrepareArgs),
    /// Train a GAN, emitting synthetic rows on the chosen schedule.
    Train(TrainArgs),
    /// Sample rows from a saved checkpoint.
    Generate(GenerateArgs),
    /// Score synthetic data against real data.
    Evaluate(EvaluateArgs),
    /// Grid search over epochs and first item of the geometric schedule.
    Tune(TuneArgs),
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// Raw CSV file.
    #[arg(long)]
    pub input: PathBuf,
    /// Recipe [default: from --config, else generic].
    #[arg(long, value_enum)]
    pub recipe: Option<Recipe>,
    /// Prepared CSV to write.
    #[arg(long)]
    pub output: PathBuf,
    /// Schema JSON to write.
    #[arg(long)]
    pub schema_out: PathBuf,
    /// Run configuration JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// GAN and schedule overrides shared by `train` and `tune`.
#[derive(Debug, Args, Default)]
pub struct GanFlags {
    /// Training epochs [default: from --config, else 50].
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Seed for training and sampling [default: from --config, else 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Minibatch size [default: from --config, else 512].
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Noise dimension [default: from --config, else 128].
    #[arg(long)]
    pub noise_dim: Option<usize>,
    /// Generator hidden width [default: from --config, else 256].
    #[arg(long)]
    pub gen_hidden: Option<usize>,
    /// Discriminator hidden width [default: from --config, else 256].
    #[arg(long)]
    pub disc_hidden: Option<usize>,
    /// Adam learning rate [default: from --config, else 0.0001].
    #[arg(long)]
    pub lr: Option<f64>,
    /// Discriminator steps per generator step [default: from --config, else 1].
    #[arg(long)]
    pub disc_steps: Option<usize>,
    /// Continuous column normalization: min_max, max_abs or standardization
    /// [default: from --config, else min_max].
    #[arg(long)]
    pub normalization: Option<NormalizationMethod>,
    /// Sample categories from the softmax instead of taking the argmax
    /// [default: from --config, else off].
    #[arg(long)]
    pub sampled_decode: bool,
    /// Percentage total of the schedule [default: from --config, else 100].
    #[arg(long)]
    pub total: Option<f64>,
    /// Synthetic rows to produce [default: from --config, else the real row count].
    #[arg(long)]
    pub synthetic_count: Option<usize>,
}

impl GanFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(s) = self.seed {
            cfg.seed = Some(s);
        }
        let g: &mut GanConfig = &mut cfg.gan;
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { g.$field = v; })*
            };
        }
        set!(epochs => epochs, batch_size => batch_size, noise_dim => noise_dim,
             gen_hidden => gen_hidden, disc_hidden => disc_hidden, lr => lr,
             disc_steps => disc_steps_per_gen_step);
        if let Some(m) = self.normalization {
            g.normalization = NormalizationPlan::uniform(m);
        }
        if self.sampled_decode {
            g.sampled_decode = true;
        }
        if let Some(t) = self.total {
            cfg.schedule.total = t;
        }
        if let Some(n) = self.synthetic_count {
            cfg.schedule.synthetic_count = Some(n);
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Prepared training CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Schema JSON of the training data.
    #[arg(long)]
    pub schema: PathBuf,
    /// Run configuration JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Generation schedule: all_at_end, uniform or geometric
    /// [default: from --config, else geometric].
    #[arg(long)]
    pub schedule: Option<GenerationMode>,
    /// First percentage of the geometric schedule [default: from --config, else 0.2].
    #[arg(long)]
    pub first_item: Option<f64>,
    /// Fixed common ratio for the geometric schedule [default: solved from the other settings].
    #[arg(long)]
    pub ratio_override: Option<f64>,
    #[command(flatten)]
    pub gan: GanFlags,
    /// Checkpoint to write.
    #[arg(long)]
    pub out_model: PathBuf,
    /// Synthetic CSV to write.
    #[arg(long)]
    pub out_synth: PathBuf,
    /// Per-epoch JSONL log to write.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Checkpoint written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Rows to sample.
    #[arg(long)]
    pub count: usize,
    /// CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Start a fresh sampling stream from this seed [default: continue the stream stored in the checkpoint].
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Real CSV.
    #[arg(long)]
    pub real: PathBuf,
    /// Synthetic CSV.
    #[arg(long)]
    pub synth: PathBuf,
    /// Schema JSON shared by both tables.
    #[arg(long)]
    pub schema: PathBuf,
    /// Report JSON to write.
    #[arg(long)]
    pub report: PathBuf,
    /// Directory for chart CSV and SVG files [default: no charts].
    #[arg(long)]
    pub charts: Option<PathBuf>,
    /// Run configuration JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Largest category count classed as a small categorical [default: from --config, else 15].
    #[arg(long)]
    pub small_threshold: Option<usize>,
    /// Bins for the continuous side of mixed pairs [default: from --config, else 10].
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Prepared training CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Schema JSON of the training data.
    #[arg(long)]
    pub schema: PathBuf,
    /// Run configuration JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated epoch counts.
    #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
    pub epoch_grid: Vec<usize>,
    /// Comma-separated first items.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4")]
    pub first_item_grid: Vec<f64>,
    #[command(flatten)]
    pub gan: GanFlags,
    /// Report JSON to write.
    #[arg(long)]
    pub report: PathBuf,
    /// Worker threads [default: all cores].
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Outputs written so far; removed unless the command succeeds.
#[derive(Default)]
struct Outputs {
    written: Vec<PathBuf>,
    done: bool,
}

impl Outputs {
    fn add(&mut self, path: &Path) -> PathBuf {
        self.written.push(path.to_path_buf());
        path.to_path_buf()
    }

    fn finish(mut self) {
        self.done = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if !self.done {
            for p in self.written.iter().rev() {
                let _ = if p.is_dir() { fs::remove_dir(p) } else { fs::remove_file(p) };
            }
        }
    }
}

fn write_text(out: &mut Outputs, path: &Path, text: &str) -> Result<()> {
    fs::write(out.add(path), text).map_err(|e| Error::io(path, e))
}

fn report_json<T: Serialize>(out: &mut Outputs, path: &Path, value: &T) -> Result<()> {
    write_json(&out.add(path), value)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Prepare(a) => prepare(&a),
        Command::Train(a) => train(&a),
        Command::Generate(a) => generate(&a),
        Command::Evaluate(a) => evaluate(&a),
        Command::Tune(a) => tune(&a),
    }
}

/// Parses arguments, runs, and maps errors to exit codes.
pub fn main() -> i32 {
    match run(Cli::parse()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn prepare(a: &PrepareArgs) -> Result<()> {
    let cfg = RunConfig::load_or_default(a.config.as_deref())?;
    let raw = load_csv(&a.input, None, &MissingTokens::default())?;
    let table = match a.recipe.unwrap_or(cfg.recipe) {
        Recipe::Olympic => prepare_olympic(&raw)?,
        Recipe::Census => prepare_census(&raw)?,
        Recipe::Generic => raw,
    };
    let mut out = Outputs::default();
    write_csv(&out.add(&a.output), &table)?;
    save_schema(&out.add(&a.schema_out), table.schema())?;
    out.finish();
    println!("{} rows, {} columns", table.n_rows(), table.n_cols());
    Ok(())
}

fn load_training(data: &Path, schema: &Path) -> Result<DataTable> {
    let schema = load_schema(schema)?;
    load_csv(data, Some(&schema), &MissingTokens::default())
}

fn train(a: &TrainArgs) -> Result<()> {
    let mut cfg = RunConfig::load_or_default(a.config.as_deref())?;
    a.gan.apply(&mut cfg);
    if let Some(m) = a.schedule {
        cfg.schedule.mode = m;
    }
    if let Some(v) = a.first_item {
        cfg.schedule.first_item = v;
    }
    if let Some(r) = a.ratio_override {
        cfg.schedule.ratio_override = Some(r);
    }
    let gan = cfg.effective_gan();
    gan.validate()?;
    let table = load_training(&a.data, &a.schema)?;
    let schedule = cfg.schedule.build(gan.epochs, table.n_rows())?;

    let mut out = Outputs::default();
    let mut log = match &a.log {
        Some(p) => Some((p, BufWriter::new(File::create(out.add(p)).map_err(|e| Error::io(p, e))?))),
        None => None,
    };
    let mut log_err = None;
    let result = train_with_callback(&table, &gan, &schedule, |rec| {
        if let Some((p, w)) = log.as_mut() {
            let line = serde_json::to_string(rec).expect("epoch records serialize");
            if let Err(e) = writeln!(w, "{line}") {
                log_err.get_or_insert(Error::io(p, e));
            }
        }
    })?;
    if let Some(e) = log_err {
        return Err(e);
    }
    if let Some((p, mut w)) = log {
        w.flush().map_err(|e| Error::io(p, e))?;
    }
    save_checkpoint(&result.checkpoint, &out.add(&a.out_model))?;
    write_csv(&out.add(&a.out_synth), &result.synthetic)?;
    out.finish();
    match schedule.ratio {
        Some(r) if schedule.mode == GenerationMode::Geometric => println!(
            "trained {} epochs, {} synthetic rows (geometric, ratio {r:.6})",
            gan.epochs,
            result.synthetic.n_rows()
        ),
        _ => println!(
            "trained {} epochs, {} synthetic rows ({})",
            gan.epochs,
            result.synthetic.n_rows(),
            schedule.mode
        ),
    }
    Ok(())
}

fn generate(a: &GenerateArgs) -> Result<()> {
    let ckpt = load_checkpoint(&a.model)?;
    let mut rng = match a.seed {
        Some(s) => rng_for(s, SAMPLE_STREAM),
        None => ckpt.sampling_rng()?,
    };
    let table = ckpt.sample(a.count, &mut rng)?;
    let mut out = Outputs::default();
    write_csv(&out.add(&a.out), &table)?;
    out.finish();
    println!("{} rows", table.n_rows());
    Ok(())
}

#[derive(Serialize)]
struct EvaluationDocument<'a> {
    config: &'a RunConfig,
    real_rows: usize,
    synthetic_rows: usize,
    #[serde(flatten)]
    report: &'a FidelityReport,
}

fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let mut cfg = RunConfig::load_or_default(a.config.as_deref())?;
    if let Some(v) = a.small_threshold {
        cfg.evaluation.small_threshold = v;
    }
    if let Some(v) = a.bins {
        cfg.evaluation.bins = v;
    }
    let schema = load_schema(&a.schema)?;
    let missing = MissingTokens::default();
    let real = load_csv(&a.real, Some(&schema), &missing)?;
    let synth = load_csv(&a.synth, Some(&schema), &missing)?;
    let report = evaluate_all(&real, &synth, &cfg.evaluation)?;

    let mut out = Outputs::default();
    report_json(
        &mut out,
        &a.report,
        &EvaluationDocument {
            config: &cfg,
            real_rows: real.n_rows(),
            synthetic_rows: synth.n_rows(),
            report: &report,
        },
    )?;
    if let Some(dir) = &a.charts {
        if !dir.exists() {
            fs::create_dir_all(out.add(dir)).map_err(|e| Error::io(dir, e))?;
        }
        write_text(&mut out, &dir.join("pairs.csv"), &pairs_csv(&report))?;
        write_text(&mut out, &dir.join("pairs.svg"), &heatmap_svg(&report))?;
        for c in 0..real.n_cols() {
            let chart = column_chart(&real, &synth, c);
            let stem = file_stem(c, &chart.column);
            write_text(&mut out, &dir.join(format!("{stem}.csv")), &chart_csv(&chart))?;
            write_text(&mut out, &dir.join(format!("{stem}.svg")), &chart_svg(&chart))?;
        }
    }
    out.finish();
    let avg = &report.averages;
    println!(
        "shape {:.4}, pair trend {}, overall {:.4}",
        avg.shape,
        avg.pair_trend.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}")),
        avg.overall
    );
    Ok(())
}

#[derive(Serialize)]
struct TuneDocument<'a> {
    config: &'a RunConfig,
    #[serde(flatten)]
    result: &'a tabgen_core::gan::TuneResult,
}

fn tune(a: &TuneArgs) -> Result<()> {
    let mut cfg = RunConfig::load_or_default(a.config.as_deref())?;
    a.gan.apply(&mut cfg);
    cfg.schedule.mode = GenerationMode::Geometric;
    let gan = cfg.effective_gan();
    gan.validate()?;
    if a.epoch_grid.is_empty() || a.first_item_grid.is_empty() {
        return Err(Error::Usage("tuning grids must not be empty".into()));
    }
    let table = load_training(&a.data, &a.schema)?;
    let n = cfg.schedule.synthetic_count.unwrap_or(table.n_rows());
    let run = || {
        tune_parallel(
            &table,
            &gan,
            &a.epoch_grid,
            &a.first_item_grid,
            cfg.schedule.total,
            n,
            &cfg.evaluation,
        )
    };
    let result = match a.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Usage(format!("cannot start {t} threads: {e}")))?
            .install(run)?,
        None => run()?,
    };
    let mut out = Outputs::default();
    report_json(&mut out, &a.report, &TuneDocument { config: &cfg, result: &result })?;
    out.finish();
    println!(
        "best: epochs {}, first item {}, score {:.4}",
        result.best.epochs, result.best.first_item, result.best.score
    );
    Ok(())
}
