use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use coremix_core::metrics::{augmentation_overhead, OverheadInput};
use coremix_core::MixConfig;

use coremix::pipeline::{self, BackendChoice, RunConfig};
use coremix::report::render_report;
use coremix::stub::{serve_stub_on, StubBehavior};
use coremix::synth::{default_class_names, synth_dataset, SynthConfig};

#[derive(Parser)]
#[command(
    name = "coremix",
    version,
    about = "Generative image augmentation with prompt guidance, cosine filtration, and pixel/patch mixing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the augmentation pipeline over a folder-per-class dataset.
    Run(Box<RunArgs>),
    /// Re-create every mixed image from a manifest, bit-exactly.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a manifest.
    Report {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Compute the augmentation-overhead percentage from measured
    /// training times (e.g. `--t-aug 1682s --t-van 1000s`).
    Overhead {
        #[arg(long, value_parser = parse_duration)]
        t_aug: Duration,
        #[arg(long, value_parser = parse_duration)]
        t_van: Duration,
    },
    /// Generate a synthetic dataset (plus a calibrated prompts.toml) for
    /// demos and smoke tests with the mock backend.
    Synth(SynthArgs),
    /// Serve the reference generate/embed stub over HTTP.
    Stub {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    Mock,
    Remote,
}

#[derive(Args)]
struct RunArgs {
    /// Dataset root: one subdirectory per class.
    #[arg(long)]
    dataset: PathBuf,
    /// Output root for mixed images, generated images, manifest, report.
    #[arg(long)]
    out: PathBuf,
    /// Domain descriptor substituted for <dataset_type> (e.g. "bird").
    #[arg(long)]
    dataset_type: String,
    /// Percentage of each class to augment (the -50/-100 variants).
    #[arg(long, default_value_t = 100.0)]
    augment_percent: f64,
    #[arg(long, value_enum, default_value_t = BackendKind::Mock)]
    backend: BackendKind,
    /// Generation endpoint base URL (remote backend).
    #[arg(long)]
    gen_url: Option<String>,
    /// Embedding endpoint base URL (remote backend).
    #[arg(long)]
    embed_url: Option<String>,
    /// Request timeout for remote backends.
    #[arg(long, value_parser = parse_duration, default_value = "30s")]
    timeout: Duration,
    /// Master seed; all per-sample randomness derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum simultaneous backend calls.
    #[arg(long, default_value_t = default_concurrency())]
    concurrency: usize,
    /// Prompt template file (TOML with context_patterns/negative_patterns).
    #[arg(long)]
    prompts: Option<PathBuf>,
    /// Fall back to the built-in template when no file is available.
    #[arg(long)]
    allow_default_prompts: bool,
    #[arg(long, default_value_t = 7.0)]
    guidance_scale: f64,
    /// Pair budget z_max for threshold estimation.
    #[arg(long, default_value_t = 500)]
    tau_pairs: u64,
    /// Generation attempts per sample before giving up.
    #[arg(long, default_value_t = 5)]
    max_retries: u32,
    /// Base seed for threshold pair sampling (defaults to --seed).
    #[arg(long)]
    filter_seed: Option<u64>,
    /// Probability of pixel mixing (vs patch) per sample.
    #[arg(long, default_value_t = 0.5)]
    pi: f64,
    /// Blend-ratio range for pixel mixing, as "min,max".
    #[arg(long, value_parser = parse_range, default_value = "0.3,0.7")]
    lambda_range: (f64, f64),
    /// Patch area range as a fraction of image area, as "min,max".
    #[arg(long, value_parser = parse_range, default_value = "0.1,0.5")]
    patch_area_range: (f64, f64),
    /// Base seed for mix sampling (defaults to --seed).
    #[arg(long)]
    mix_seed: Option<u64>,
    /// Mock backend only: probability a generation comes back as noise.
    #[arg(long, default_value_t = 0.0)]
    corrupt_fraction: f64,
}

fn default_concurrency() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn parse_range(text: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = text
        .split_once(',')
        .ok_or_else(|| format!("expected \"min,max\", got {text:?}"))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad number {s:?}: {e}"))
    };
    Ok((parse(lo)?, parse(hi)?))
}

/// Parses "90", "90s", "15m", "2h", or "1.5h" into a duration.
fn parse_duration(text: &str) -> Result<Duration, String> {
    let text = text.trim();
    let (number, scale) = match text.char_indices().last() {
        Some((i, 's')) => (&text[..i], 1.0),
        Some((i, 'm')) => (&text[..i], 60.0),
        Some((i, 'h')) => (&text[..i], 3600.0),
        _ => (text, 1.0),
    };
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|e| format!("bad duration {text:?}: {e}"))?;
    if !value.is_finite() || value < 0.0 {
        return Err(format!("duration {text:?} must be non-negative"));
    }
    Ok(Duration::from_secs_f64(value * scale))
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 3)]
    classes: u32,
    #[arg(long, default_value_t = 20)]
    images_per_class: u32,
    #[arg(long, default_value_t = 64)]
    image_size: u32,
    #[arg(long, default_value = "bird")]
    dataset_type: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn run_command(args: RunArgs) -> anyhow::Result<ExitCode> {
    let backend = match args.backend {
        BackendKind::Mock => BackendChoice::Mock { corrupt_fraction: args.corrupt_fraction },
        BackendKind::Remote => BackendChoice::Remote {
            gen_url: args.gen_url.context("--gen-url is required with --backend remote")?,
            embed_url: args.embed_url.context("--embed-url is required with --backend remote")?,
            timeout: args.timeout,
        },
    };
    let config = RunConfig {
        dataset_root: args.dataset,
        output_root: args.out,
        dataset_type: args.dataset_type,
        augment_percent: args.augment_percent,
        backend,
        prompts_path: args.prompts,
        allow_default_prompts: args.allow_default_prompts,
        guidance_scale: args.guidance_scale,
        tau_pairs: args.tau_pairs,
        max_retries: args.max_retries,
        filter_seed: args.filter_seed,
        mix: MixConfig {
            pi: args.pi,
            lambda_range: args.lambda_range,
            patch_area_range: args.patch_area_range,
            ..MixConfig::default()
        },
        mix_seed: args.mix_seed,
        master_seed: args.seed,
        concurrency: args.concurrency,
    };
    let outcome = pipeline::run(&config)?;
    print!("{}", render_report(&outcome.report));
    println!("manifest: {}", outcome.manifest_path.display());
    if outcome.report.totals.failures > 0 {
        eprintln!(
            "completed with {} sample(s) exhausting their retries",
            outcome.report.totals.failures
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run_command(*args),
        Command::Replay { manifest, out } => (|| {
            let written = pipeline::replay(&manifest, &out)?;
            println!("replayed {written} image(s) into {}", out.display());
            Ok(ExitCode::SUCCESS)
        })(),
        Command::Report { manifest } => (|| {
            let report = pipeline::report_from_manifest(&manifest)?;
            print!("{}", render_report(&report));
            Ok(ExitCode::SUCCESS)
        })(),
        Command::Overhead { t_aug, t_van } => (|| {
            let overhead = augmentation_overhead(OverheadInput { t_aug, t_van })?;
            println!("{overhead:.1}");
            Ok(ExitCode::SUCCESS)
        })(),
        Command::Synth(args) => (|| {
            if args.classes == 0 {
                bail!("--classes must be at least 1");
            }
            let config = SynthConfig {
                classes: default_class_names(args.classes as usize),
                images_per_class: args.images_per_class,
                image_size: args.image_size,
                dataset_type: args.dataset_type.clone(),
                seed: args.seed,
            };
            let prompts = synth_dataset(&args.out, &config)?;
            println!(
                "wrote {} classes x {} images under {}",
                args.classes,
                args.images_per_class,
                args.out.display()
            );
            println!("calibrated template: {}", prompts.display());
            println!(
                "try: coremix run --dataset {0} --out {0}-aug --dataset-type {1} --prompts {2} --backend mock",
                args.out.display(),
                args.dataset_type,
                prompts.display()
            );
            Ok(ExitCode::SUCCESS)
        })(),
        Command::Stub { addr } => (|| {
            let handle = serve_stub_on(&addr, StubBehavior::EchoMock)?;
            println!("serving /generate and /embed at {}", handle.url());
            println!("press Ctrl-C to stop");
            loop {
                std::thread::park();
            }
        })(),
    };
    match result {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn durations_parse_with_and_without_suffixes() {
        assert_eq!(parse_duration("90").unwrap(), Duration::from_secs(90));
        assert_eq!(parse_duration("90s").unwrap(), Duration::from_secs(90));
        assert_eq!(parse_duration("15m").unwrap(), Duration::from_secs(900));
        assert_eq!(parse_duration("2h").unwrap(), Duration::from_secs(7200));
        assert_eq!(parse_duration("1.5h").unwrap(), Duration::from_secs(5400));
        assert!(parse_duration("abc").is_err());
        assert!(parse_duration("-3s").is_err());
    }

    #[test]
    fn ranges_parse_pairs() {
        assert_eq!(parse_range("0.3,0.7").unwrap(), (0.3, 0.7));
        assert_eq!(parse_range(" 0.1 , 0.5 ").unwrap(), (0.1, 0.5));
        assert!(parse_range("0.3").is_err());
        assert!(parse_range("a,b").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
