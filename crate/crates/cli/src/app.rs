//! Command-line parsing and dispatch.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{self, BatchReport};
use crate::config::RunConfig;
use crate::imageio::collect_inputs;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "plateloc", version, about = "Color-based license plate localization")]
pub struct Cli {
    /// Key-value config file (seeds, thresholds, generator settings).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Median filter, equalize and saturate images; writes <id>.png.
    Preprocess {
        /// Image files or directories of BMP/PNG files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Derive color seeds from cropped plate images and write them as a config.
    AnalyzePlates {
        #[arg(required = true)]
        plates: Vec<PathBuf>,
        /// Config file to write.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Find plates; writes results.txt and optional per-tier overlays.
    Localize {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Also write <id>_b1.png, <id>_b2.png and <id>_b3.png.
        #[arg(long)]
        overlay: bool,
    },
    /// Score a results file against ground truth; writes metrics.txt beside it.
    Evaluate {
        results: PathBuf,
        truth: PathBuf,
        #[arg(long, value_name = "F")]
        iou_min: Option<f64>,
    },
    /// Generate synthetic scenes with ground truth.
    Synth {
        #[arg(long, value_name = "N", default_value_t = 1)]
        count: usize,
        #[arg(long, value_name = "N", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Also write every plate cut along its truth box to <out>/plates.
        #[arg(long)]
        crops: bool,
    },
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn report_batch(report: &BatchReport) -> ExitCode {
    for (path, e) in &report.failures {
        eprintln!("error: {}: {e}", path.display());
    }
    if report.is_success() {
        ExitCode::SUCCESS
    } else {
        eprintln!("{} of {} input(s) failed", report.failures.len(), report.failures.len() + report.processed);
        ExitCode::FAILURE
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    let mut cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Preprocess { inputs, out } => {
            let inputs = collect_inputs(&inputs)?;
            Ok(report_batch(&commands::cmd_preprocess(&inputs, &cfg, &out)?))
        }
        Command::AnalyzePlates { plates, out } => {
            let plates = collect_inputs(&plates)?;
            let seeds = commands::cmd_analyze_plates(&plates, &cfg, &out)?;
            println!(
                "{} plate(s): h = {} +- {}, s = {} +- {}",
                plates.len(),
                seeds.hue().seed,
                seeds.hue().tolerance,
                seeds.saturation().seed,
                seeds.saturation().tolerance
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Localize { inputs, out, overlay } => {
            let inputs = collect_inputs(&inputs)?;
            let (report, _) = commands::cmd_localize(&inputs, &cfg, &out, overlay)?;
            Ok(report_batch(&report))
        }
        Command::Evaluate { results, truth, iou_min } => {
            if let Some(v) = iou_min {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(CliError::Usage(format!("--iou-min must lie in (0, 1], got {v}")));
                }
                cfg.iou_min = v;
            }
            let m = commands::cmd_evaluate(&results, &truth, cfg.iou_min)?;
            let pct = |x: f64| 100.0 * x;
            println!("images            {}", m.total);
            println!("true positive     {:.1}% ({})", pct(m.tp_rate), m.true_positive);
            println!("false positive    {:.1}% ({})", pct(m.fp_rate), m.false_positive);
            println!("false negative    {:.1}% ({})", pct(m.fn_rate), m.false_negative);
            println!("combined positive {:.1}%", pct(m.combined_positive));
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth { count, seed, out, crops } => {
            let truth = commands::cmd_synth(count, seed, &cfg.synth, &out, crops)?;
            let plates: usize = truth.iter().map(|g| g.boxes.len()).sum();
            println!("{} scene(s), {plates} plate(s) in {}", truth.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, S>(args: I) -> ExitCode
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from(["plateloc", "--config", "a.conf", "localize", "x.png", "--out", "o", "--overlay"]).unwrap();
        assert_eq!(cli.config.as_deref(), Some(Path::new("a.conf")));
        assert!(matches!(cli.command, Command::Localize { overlay: true, .. }));
        let cli = Cli::try_parse_from(["plateloc", "evaluate", "r.txt", "t.txt", "--iou-min", "0.7"]).unwrap();
        assert!(matches!(cli.command, Command::Evaluate { iou_min: Some(v), .. } if v == 0.7));
        let cli = Cli::try_parse_from(["plateloc", "synth", "--count", "5", "--seed", "9", "--out", "d"]).unwrap();
        assert!(matches!(cli.command, Command::Synth { count: 5, seed: 9, crops: false, .. }));
        assert!(Cli::try_parse_from(["plateloc", "localize", "--out", "o"]).is_err());
    }
}
