//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
//! Output is written only after the whole computation has succeeded.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use awm_core::attacks::{gaussian_attack, jpeg_attack, JpegParams, NoiseParams, NOISE_STREAM};
use awm_core::memory::{awm_recall, AutoWeights, DenseEngine, HeteroWeights, RecallOptions};
use awm_core::neurodynamics::{Mode, Solver, SolverConfig, TheoryParams};
use awm_core::patterns::{random_bipolar, read_patterns, write_patterns, BipolarVector, Seed};
use awm_core::watermark::image::{read_image, write_image, ImageFormat};
use awm_core::watermark::{awm_store, extract_features, zw_extract, zw_map, SecretKey};
use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::config::{parse_config_file, parse_list, Decimal, ExperimentConfig, SizeSpec, Sizes};
use crate::corpus::{load_dir, synthetic};
use crate::experiments::{
    basin_csv, ber_csv, ber_experiment, evolution_csv, evolution_dump_csv, info_cost, info_cost_csv,
    overlap_evolution, simulated_basin, theory_basin, trajectory_csv, Attack, BerConfig,
};
use crate::streams::{stream, CLI_WATERMARK};
use crate::{thread_pool, HarnessError};

pub const DEFAULT_SEED: u64 = 1;
const DEFAULT_ALPHAS: &str = "0.02,0.04,0.06,0.08,0.1,0.12,0.14,0.16";
const DEFAULT_M_STARS: &str = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";

#[derive(Debug, Parser)]
#[command(name = "awm", version, about = "Associative watermarking experiments")]
pub struct Cli {
    /// key=value file supplying defaults for any flag; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Output file (standard output when omitted).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Macroscopic recall theory.
    #[command(subcommand)]
    Theory(TheoryCmd),
    /// Monte Carlo recall simulations.
    #[command(subcommand)]
    Simulate(SimulateCmd),
    /// Map images to watermarks and extract them again.
    #[command(subcommand)]
    Watermark(WatermarkCmd),
    /// Image attacks.
    #[command(subcommand)]
    Attack(AttackCmd),
    /// Image experiments and cost tables.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

#[derive(Debug, Subcommand)]
pub enum TheoryCmd {
    /// Overlap trajectory as `t,m,sigma2,U`.
    Trajectory(TrajectoryArgs),
    /// Critical and equilibrium overlaps over an α grid.
    Basin(TheoryBasinArgs),
    /// Storage capacity.
    Capacity(CapacityArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Hierarchy order of the theory.
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    /// Quadrature nodes.
    #[arg(long, default_value_t = awm_core::neurodynamics::DEFAULT_NODES)]
    pub nodes: usize,
}

#[derive(Debug, Args)]
pub struct TrajectoryArgs {
    #[arg(long)]
    pub alpha: f64,
    /// Initial overlap (feature overlap for awm, state overlap for amm).
    #[arg(long)]
    pub m_star: f64,
    #[arg(long, default_value_t = 20)]
    pub t_max: usize,
    #[arg(long, default_value = "awm")]
    pub mode: String,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct TheoryBasinArgs {
    #[arg(long, default_value = DEFAULT_ALPHAS)]
    pub alphas: String,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    /// Comma-separated orders.
    #[arg(long, default_value = "1,4")]
    pub orders: String,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = awm_core::neurodynamics::DEFAULT_NODES)]
    pub nodes: usize,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCmd {
    /// Overlap evolution `m_star,t,mean,std,theory`.
    Evolution(EvolutionArgs),
    /// Basin with simulated equilibrium overlaps.
    Basin(SimBasinArgs),
}

#[derive(Debug, Args)]
pub struct SizeArgs {
    /// Watermark length.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// Feature length (defaults to gamma N, else N).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub gamma: Option<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 20)]
    pub t_max: usize,
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    #[arg(long, default_value_t = awm_core::neurodynamics::DEFAULT_NODES)]
    pub nodes: usize,
}

#[derive(Debug, Args)]
pub struct EvolutionArgs {
    #[command(flatten)]
    pub size: SizeArgs,
    /// Stored pairs (or give --alpha).
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value = DEFAULT_M_STARS)]
    pub m_stars: String,
    /// Also write per-trial overlaps `m_star,trial,t,m` here.
    #[arg(long, value_name = "PATH")]
    pub dump_trials: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimBasinArgs {
    #[command(flatten)]
    pub size: SizeArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value = DEFAULT_ALPHAS)]
    pub alphas: String,
}

#[derive(Debug, Subcommand)]
pub enum WatermarkCmd {
    /// Train weights mapping image features to watermarks. Writes
    /// `<out>.hetero.awmw`, `<out>.auto.awmw` and, for generated
    /// watermarks, `<out>.wm.awmpat`.
    Map(MapArgs),
    /// Recover a watermark from an image with trained weights.
    Extract(ExtractArgs),
    /// Zero-watermark key for one image.
    ZeroMap(ZeroMapArgs),
    /// Recover a watermark from an image and a zero-watermark key.
    ZeroExtract(ZeroExtractArgs),
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[arg(required = true)]
    pub images: Vec<PathBuf>,
    /// Feature length.
    #[arg(long)]
    pub k: usize,
    /// Pattern file with one watermark per image.
    #[arg(long)]
    pub watermarks: Option<PathBuf>,
    /// Watermark length when generating watermarks from the seed.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    pub image: PathBuf,
    /// Prefix given to `watermark map --out`.
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub t_max: usize,
    /// Pattern file to report the bit error rate against.
    #[arg(long)]
    pub watermarks: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
}

#[derive(Debug, Args)]
pub struct ZeroMapArgs {
    pub image: PathBuf,
    #[arg(long)]
    pub watermarks: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
}

#[derive(Debug, Args)]
pub struct ZeroExtractArgs {
    pub image: PathBuf,
    #[arg(long)]
    pub key: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum AttackCmd {
    /// JPEG-style compression at quality 1..=100.
    Jpeg(JpegArgs),
    /// Additive Gaussian noise.
    Noise(NoiseArgs),
}

#[derive(Debug, Args)]
pub struct JpegArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub quality: i64,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub mean: f64,
    #[arg(long)]
    pub std: f64,
    /// Clamp the result to [0, 255].
    #[arg(long)]
    pub clamp: bool,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCmd {
    /// Bit error rates of zero-watermarking, HMM and AWM under an attack.
    Ber(BerArgs),
    /// Information cost of both methods.
    Info(InfoArgs),
}

#[derive(Debug, Args)]
pub struct BerArgs {
    /// Directory of PGM or float images.
    #[arg(long, conflicts_with = "synthetic")]
    pub corpus: Option<PathBuf>,
    /// Number of generated images when no corpus is given.
    #[arg(long, default_value_t = 12)]
    pub synthetic: usize,
    /// Side of generated images.
    #[arg(long, default_value_t = 256)]
    pub size: usize,
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 2000)]
    pub k: usize,
    /// Loading rate after padding with random pairs.
    #[arg(long, default_value = "0.12")]
    pub alpha: String,
    #[arg(long, default_value_t = 20)]
    pub t_max: usize,
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    /// none, jpeg or noise.
    #[arg(long, default_value = "jpeg")]
    pub attack: String,
    #[arg(long, default_value_t = 5)]
    pub quality: i64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_mean: f64,
    #[arg(long, default_value_t = 100.0)]
    pub noise_std: f64,
    #[arg(long)]
    pub clamp: bool,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub k: String,
    #[arg(long)]
    pub n: String,
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match parse(argv) {
        Ok(cli) => cli,
        Err(Failure::Clap(e)) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
        Err(Failure::Harness(e)) => {
            eprintln!("awm: {e}");
            return 1;
        }
    };
    let result = thread_pool().and_then(|pool| pool.install(|| execute(&cli)));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("awm: {e}");
            match e {
                HarnessError::Config(_) => 1,
                _ => 2,
            }
        }
    }
}

enum Failure {
    Clap(clap::Error),
    Harness(HarnessError),
}

fn command() -> clap::Command {
    fn override_all(cmd: clap::Command) -> clap::Command {
        cmd.args_override_self(true).mut_subcommands(override_all)
    }
    override_all(Cli::command())
}

/// Parses `argv`, merging `--config` entries in front of the explicit flags.
fn parse(argv: Vec<OsString>) -> Result<Cli, Failure> {
    let cmd = command();
    let argv = match config_path(&argv) {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| {
                Failure::Harness(HarnessError::Config(format!("{}: {e}", path.display())))
            })?;
            let entries = parse_config_file(&text).map_err(Failure::Harness)?;
            inject(&cmd, argv, &entries).map_err(Failure::Harness)?
        }
        None => argv,
    };
    let matches = cmd.try_get_matches_from(argv).map_err(Failure::Clap)?;
    Cli::from_arg_matches(&matches).map_err(Failure::Clap)
}

const GLOBAL_VALUED: [&str; 3] = ["--config", "--seed", "--out"];

fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut found = None;
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            found = it.next().map(PathBuf::from);
        } else if let Some(v) = s.strip_prefix("--config=") {
            found = Some(PathBuf::from(v));
        }
    }
    found
}

/// Index just past the subcommand path, and the path itself.
fn subcommand_path(cmd: &clap::Command, argv: &[OsString]) -> (usize, Vec<String>) {
    let mut path = Vec::new();
    let mut current = cmd;
    let mut i = 1;
    while i < argv.len() {
        let s = argv[i].to_string_lossy();
        if GLOBAL_VALUED.contains(&s.as_ref()) {
            i += 2;
            continue;
        }
        if s.starts_with('-') {
            i += 1;
            continue;
        }
        match current.find_subcommand(s.as_ref()) {
            Some(sub) => {
                path.push(s.into_owned());
                current = sub;
                i += 1;
                if !current.has_subcommands() {
                    break;
                }
            }
            None => break,
        }
    }
    (i, path)
}

fn all_long_names(cmd: &clap::Command, out: &mut Vec<String>) {
    out.extend(cmd.get_arguments().filter_map(|a| a.get_long().map(str::to_string)));
    for sub in cmd.get_subcommands() {
        all_long_names(sub, out);
    }
}

fn inject(cmd: &clap::Command, argv: Vec<OsString>, entries: &BTreeMap<String, String>) -> Result<Vec<OsString>, HarnessError> {
    let (pos, path) = subcommand_path(cmd, &argv);
    let mut known = Vec::new();
    all_long_names(cmd, &mut known);
    let mut leaf = cmd;
    for name in &path {
        leaf = leaf.find_subcommand(name).expect("path was resolved from this command");
    }
    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in entries {
        if key == "config" || !known.iter().any(|k| k == key) {
            return Err(HarnessError::Config(format!("unknown config key {key:?}")));
        }
        let arg = leaf
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()));
        let Some(arg) = arg else {
            // Valid for another subcommand; lets one file serve several.
            continue;
        };
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value.as_str() {
                "true" | "1" | "yes" => extra.push(format!("--{key}").into()),
                "false" | "0" | "no" => {}
                _ => return Err(HarnessError::Config(format!("{key}: expected true or false"))),
            }
        } else {
            extra.push(format!("--{key}={value}").into());
        }
    }
    let mut out = argv[..pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[pos..]);
    Ok(out)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), HarnessError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn solver(nodes: usize) -> Result<Solver, HarnessError> {
    Ok(Solver::new(SolverConfig {
        nodes,
        ..SolverConfig::default()
    })?)
}

fn decimal(s: &str) -> Result<Decimal, HarnessError> {
    s.parse()
}

fn size_spec(size: &SizeArgs, p: Option<usize>, alpha: Option<&str>) -> Result<SizeSpec, HarnessError> {
    Ok(SizeSpec {
        n: size.n,
        k: size.k,
        p,
        alpha: alpha.map(decimal).transpose()?,
        gamma: size.gamma.as_deref().map(decimal).transpose()?,
    })
}

fn run_config(sizes: Sizes, run: &RunArgs, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        trials: run.trials,
        t_max: run.t_max,
        order: run.order,
        ..ExperimentConfig::new(sizes, Seed(seed))
    }
}

fn bits_line(v: &BipolarVector) -> String {
    let mut s: String = v.iter().map(|b| if b > 0 { '1' } else { '0' }).collect();
    s.push('\n');
    s
}

fn write_pattern_file(path: &Path, patterns: &[BipolarVector]) -> Result<(), HarnessError> {
    let mut buf = Vec::new();
    write_patterns(&mut buf, patterns)?;
    std::fs::write(path, buf)?;
    Ok(())
}

fn read_pattern_file(path: &Path) -> Result<Vec<BipolarVector>, HarnessError> {
    let bytes = std::fs::read(path)?;
    Ok(read_patterns(bytes.as_slice())?)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn pattern_at(patterns: &[BipolarVector], index: usize, path: &Path) -> Result<BipolarVector, HarnessError> {
    patterns.get(index).cloned().ok_or_else(|| {
        HarnessError::Config(format!("{} holds {} patterns, no index {index}", path.display(), patterns.len()))
    })
}

fn image_output(out: Option<&Path>) -> Result<&Path, HarnessError> {
    out.ok_or_else(|| HarnessError::Config("--out is required for image output".into()))
}

fn execute(cli: &Cli) -> Result<(), HarnessError> {
    let out = cli.out.as_deref();
    let seed = Seed(cli.seed);
    match &cli.command {
        Command::Theory(TheoryCmd::Trajectory(a)) => {
            let mode: Mode = a.mode.parse()?;
            let params = TheoryParams::new(a.alpha, a.model.gamma, a.model.order, a.t_max)?;
            let state = solver(a.model.nodes)?.trajectory(&params, a.m_star, mode)?;
            emit(out, &trajectory_csv(&state))
        }
        Command::Theory(TheoryCmd::Basin(a)) => {
            let alphas: Vec<f64> = parse_list(&a.alphas)?;
            let rows = theory_basin(&alphas, a.model.gamma, a.model.order, &solver(a.model.nodes)?)?;
            emit(out, &basin_csv(&rows))
        }
        Command::Theory(TheoryCmd::Capacity(a)) => {
            let orders: Vec<usize> = parse_list(&a.orders)?;
            let s = solver(a.nodes)?;
            let mut text = String::from("order,model,alpha_c\n");
            for order in orders {
                for mode in [Mode::Amm, Mode::Awm] {
                    let c = s.storage_capacity(a.gamma, order, mode)?;
                    text.push_str(&format!("{order},{},{c}\n", mode.label()));
                }
            }
            emit(out, &text)
        }
        Command::Simulate(SimulateCmd::Evolution(a)) => {
            let sizes = size_spec(&a.size, a.p, a.alpha.as_deref())?.resolve()?;
            let cfg = ExperimentConfig {
                m_grid: parse_list(&a.m_stars)?,
                ..run_config(sizes, &a.run, cli.seed)
            };
            let points = overlap_evolution(&cfg, &solver(a.run.nodes)?)?;
            if let Some(dump) = &a.dump_trials {
                std::fs::write(dump, evolution_dump_csv(&points))?;
            }
            emit(out, &evolution_csv(&points))
        }
        Command::Simulate(SimulateCmd::Basin(a)) => {
            let k = size_spec(&a.size, None, None)?.resolve_key_len()?;
            let sizes = Sizes { n: a.size.n, k, p: 0 };
            let cfg = ExperimentConfig {
                alpha_grid: parse_list(&a.alphas)?,
                ..run_config(sizes, &a.run, cli.seed)
            };
            let rows = simulated_basin(&cfg, &solver(a.run.nodes)?)?;
            emit(out, &basin_csv(&rows))
        }
        Command::Watermark(WatermarkCmd::Map(a)) => {
            let prefix = out.ok_or_else(|| HarnessError::Config("--out PREFIX is required".into()))?;
            let features = a
                .images
                .iter()
                .map(|p| Ok(extract_features(&read_image(p)?, a.k)?.into_signs()))
                .collect::<Result<Vec<_>, HarnessError>>()?;
            let (watermarks, generated) = match (&a.watermarks, a.n) {
                (Some(path), _) => (read_pattern_file(path)?, false),
                (None, Some(n)) => (
                    (0..features.len())
                        .map(|i| random_bipolar(n, seed, stream(CLI_WATERMARK, i, 0)))
                        .collect::<Result<Vec<_>, _>>()?,
                    true,
                ),
                (None, None) => {
                    return Err(HarnessError::Config("give --watermarks FILE or --n LENGTH".into()))
                }
            };
            let engine = DenseEngine::train(&awm_store(features, watermarks.clone())?)?;
            let mut hetero = Vec::new();
            engine.hetero.write_to(&mut hetero)?;
            let mut auto = Vec::new();
            engine.auto.write_to(&mut auto)?;
            std::fs::write(with_suffix(prefix, ".hetero.awmw"), hetero)?;
            std::fs::write(with_suffix(prefix, ".auto.awmw"), auto)?;
            if generated {
                write_pattern_file(&with_suffix(prefix, ".wm.awmpat"), &watermarks)?;
            }
            Ok(())
        }
        Command::Watermark(WatermarkCmd::Extract(a)) => {
            let hetero = HeteroWeights::read_from(std::fs::read(with_suffix(&a.weights, ".hetero.awmw"))?.as_slice())?;
            let auto = AutoWeights::read_from(std::fs::read(with_suffix(&a.weights, ".auto.awmw"))?.as_slice())?;
            let engine = DenseEngine::new(hetero, auto)?;
            let img = read_image(&a.image)?;
            let y = extract_features(&img, engine.hetero.cols())?.into_signs();
            let opts = RecallOptions {
                t_max: a.t_max,
                record_states: false,
            };
            let trace = awm_recall(&engine, &y, opts, None)?;
            if let Some(path) = &a.watermarks {
                let wm = pattern_at(&read_pattern_file(path)?, a.index, path)?;
                eprintln!("ber={}", trace.final_state.bit_error_rate(&wm)?);
            }
            match out {
                Some(path) => write_pattern_file(path, &[trace.final_state]),
                None => emit(None, &bits_line(&trace.final_state)),
            }
        }
        Command::Watermark(WatermarkCmd::ZeroMap(a)) => {
            let path = out.ok_or_else(|| HarnessError::Config("--out is required for the key".into()))?;
            let wm = pattern_at(&read_pattern_file(&a.watermarks)?, a.index, &a.watermarks)?;
            let feature = extract_features(&read_image(&a.image)?, wm.len())?;
            let key = zw_map(feature.signs(), &wm)?;
            write_pattern_file(path, &[key.0])
        }
        Command::Watermark(WatermarkCmd::ZeroExtract(a)) => {
            let key = SecretKey(pattern_at(&read_pattern_file(&a.key)?, 0, &a.key)?);
            let feature = extract_features(&read_image(&a.image)?, key.bits().len())?;
            let wm = zw_extract(feature.signs(), &key)?;
            match out {
                Some(path) => write_pattern_file(path, &[wm]),
                None => emit(None, &bits_line(&wm)),
            }
        }
        Command::Attack(AttackCmd::Jpeg(a)) => {
            let path = image_output(out)?;
            let params = JpegParams::new(a.quality).map_err(|e| HarnessError::Config(e.to_string()))?;
            let img = jpeg_attack(&read_image(&a.input)?, params)?;
            Ok(write_image(path, &img, ImageFormat::from_path(path))?)
        }
        Command::Attack(AttackCmd::Noise(a)) => {
            let path = image_output(out)?;
            let params = NoiseParams::new(a.mean, a.std, seed)
                .map_err(|e| HarnessError::Config(e.to_string()))?
                .with_stream(NOISE_STREAM)
                .with_clamp(a.clamp);
            let img = gaussian_attack(&read_image(&a.input)?, &params)?;
            Ok(write_image(path, &img, ImageFormat::from_path(path))?)
        }
        Command::Experiment(ExperimentCmd::Ber(a)) => {
            let attack = match a.attack.as_str() {
                "none" => Attack::None,
                "jpeg" => Attack::Jpeg(JpegParams::new(a.quality).map_err(|e| HarnessError::Config(e.to_string()))?),
                "noise" => {
                    NoiseParams::new(a.noise_mean, a.noise_std, seed).map_err(|e| HarnessError::Config(e.to_string()))?;
                    Attack::Noise {
                        mean: a.noise_mean,
                        std: a.noise_std,
                        clamp: a.clamp,
                    }
                }
                other => return Err(HarnessError::Config(format!("unknown attack {other:?}"))),
            };
            let images = match &a.corpus {
                Some(dir) => load_dir(dir)?,
                None => synthetic(a.synthetic, a.size, a.size, seed)?,
            };
            let cfg = BerConfig {
                n: a.n,
                k: a.k,
                alpha: decimal(&a.alpha)?,
                t_max: a.t_max,
                order: a.order,
                seed,
                attack,
            };
            let rows = ber_experiment(&cfg, &images, &Solver::default())?;
            emit(out, &ber_csv(&rows))
        }
        Command::Experiment(ExperimentCmd::Info(a)) => {
            let ps: Vec<u64> = parse_list(&a.p)?;
            let ks: Vec<u64> = parse_list(&a.k)?;
            let ns: Vec<u64> = parse_list(&a.n)?;
            let mut rows = Vec::new();
            for &p in &ps {
                for &k in &ks {
                    for &n in &ns {
                        rows.push(info_cost(p, k, n)?);
                    }
                }
            }
            emit(out, &info_cost_csv(&rows))
        }
    }
}
