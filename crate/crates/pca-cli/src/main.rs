//! Command-line front end: forward simulation, perfect sampling, exact
//! finite-ring analysis, ergodicity certificates, the windowed agreement and
//! covariance-decay experiments, and the walk duality check.
//!
//! Exit codes: 0 on success, 1 on a domain or usage error, 2 when a run
//! completed but a majority of the requested samples timed out.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pca::cftp::{self, SampleOutcome, SamplerBudget};
use pca::config::{Configuration, SpaceTimeDiagram};
use pca::dbarw::{self, DbarwParams};
use pca::error::Error;
use pca::exact::{self, TransitionMatrix};
use pca::model_file;
use pca::models;
use pca::noise::{derive_seed, SplitMix64};
use pca::rule::LocalRule;
use pca::sim::simulate;

use pca_cli::experiments::{
    self, cn_csv, decay_csv, CnConfig, Cylinder, DecayConfig,
};
use pca_cli::pgm;
use pca_cli::report;

#[derive(Parser)]
#[command(
    name = "pca",
    about = "Probabilistic cellular automata: simulation, perfect sampling, and exact analysis",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Picks the rule: a zoo model with its parameter, or a JSON model file.
#[derive(Args)]
struct ModelArgs {
    /// Zoo model name: noisy-xor, stavskaya, percolation, majority,
    /// minority, finae, chma10.
    #[arg(long, conflicts_with = "model_file")]
    model: Option<String>,

    /// Model parameter for alpha-family models.
    #[arg(long, conflicts_with = "epsilon")]
    alpha: Option<f64>,

    /// Model parameter for the noisy XOR.
    #[arg(long)]
    epsilon: Option<f64>,

    /// Neighborhood offsets for the percolation model (default "0,1").
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    neighborhood: Option<Vec<i64>>,

    /// Load the rule from a JSON model file instead.
    #[arg(long)]
    model_file: Option<PathBuf>,
}

impl ModelArgs {
    fn rule(&self) -> Result<(LocalRule, String), Error> {
        if let Some(path) = &self.model_file {
            let rule = model_file::load_rule(path)?;
            return Ok((rule, path.display().to_string()));
        }
        let name = self.model.as_deref().ok_or_else(|| {
            Error::ModelFormat("pass --model <name> or --model-file <path>".into())
        })?;
        let param = self.alpha.or(self.epsilon);
        let rule = models::build(name, param, self.neighborhood.as_deref())?;
        let label = match param {
            Some(p) => format!("{name}({p})"),
            None => name.to_string(),
        };
        Ok((rule, label))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a forward space-time simulation and render it as a plain PGM.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,

        /// Ring size.
        #[arg(long, default_value_t = 64)]
        n: usize,

        /// Number of time steps (the diagram has steps + 1 rows).
        #[arg(long, default_value_t = 63)]
        steps: u32,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// Initial configuration: random, zeros, ones, or checker.
        #[arg(long, default_value = "random")]
        init: String,

        /// Output PGM path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Draw perfect samples from the invariant measure.
    Sample {
        #[command(flatten)]
        model: ModelArgs,

        /// Ring size (ring samplers).
        #[arg(long, default_value_t = 4)]
        n: usize,

        /// Sample these cells of the infinite line instead of a ring.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        cells: Option<Vec<i64>>,

        /// Sampler: epca (envelope trajectory) or basic (exhaustive sets).
        #[arg(long, default_value = "epca")]
        sampler: String,

        #[arg(long, default_value_t = 1)]
        samples: u64,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        #[arg(long, default_value_t = 1 << 16)]
        max_depth: u64,
    },

    /// Exact finite-ring analysis: stationary distribution(s) and verdict.
    Exact {
        #[command(flatten)]
        model: ModelArgs,

        /// Ring size.
        #[arg(long, default_value_t = 4)]
        n: usize,

        /// Write the stationary vectors as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Ergodicity certificates from the envelope bounds.
    Check {
        #[command(flatten)]
        model: ModelArgs,
    },

    /// Windowed majority agreement curve: perfect samples of the
    /// restriction to {-n..n}, frequency of x_0 = x_1 per n.
    ExperimentCn {
        /// Alpha grid. The default five-point grid is a guess at the
        /// original figure's unlisted values; only 0.3 and 0.5 are attested.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.3, 0.35, 0.4, 0.45, 0.5])]
        alphas: Vec<f64>,

        /// Window half-widths n.
        #[arg(long, value_delimiter = ',', default_values_t = vec![4, 8, 16, 32, 64, 128])]
        sizes: Vec<usize>,

        /// Samples per point (the original experiment used 10000 with n up
        /// to 1024; see --full-scale).
        #[arg(long, default_value_t = 1000)]
        samples: u64,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        #[arg(long, default_value_t = 1 << 16)]
        max_depth: u64,

        /// Reproduce the original configuration: sizes up to 1024 and 10000
        /// samples per point. Expect hours of runtime.
        #[arg(long)]
        full_scale: bool,

        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Shift-covariance decay of two cylinder events under joint perfect
    /// samples.
    ExperimentDecay {
        #[command(flatten)]
        model: ModelArgs,

        /// Cells of the first cylinder U.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = vec![0i64])]
        u_cells: Vec<i64>,

        /// Letters of U, parallel to --u-cells.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1u8])]
        u_letters: Vec<u8>,

        /// Cells of the second cylinder W (shifted by each -n).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = vec![0i64])]
        w_cells: Vec<i64>,

        /// Letters of W, parallel to --w-cells.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1u8])]
        w_letters: Vec<u8>,

        /// Shifts n to evaluate.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = vec![1i64, 2, 4, 8, 16, 32])]
        shifts: Vec<i64>,

        #[arg(long, default_value_t = 2000)]
        samples: u64,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        #[arg(long, default_value_t = 1 << 16)]
        max_depth: u64,

        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Monte-Carlo check of the walk duality: flip-rule two-point
    /// disagreement versus odd walk occupancy.
    Duality {
        /// Walk/flip parameter, at most 2/3.
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,

        /// The observed window A.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = vec![0i64])]
        window: Vec<i64>,

        /// First tagged cell.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        k: i64,

        /// Second tagged cell.
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        l: i64,

        /// Time horizon.
        #[arg(long, default_value_t = 5)]
        t: u32,

        #[arg(long, default_value_t = 100_000)]
        trials: u64,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// Output CSV path (stdout report when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_or_print(out: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Timeout-dominated runs exit with code 2.
struct TimeoutMeter {
    timeouts: u64,
    total: u64,
}

impl TimeoutMeter {
    fn new() -> Self {
        TimeoutMeter { timeouts: 0, total: 0 }
    }

    fn record(&mut self, timed_out: bool) {
        self.total += 1;
        self.timeouts += timed_out as u64;
    }

    fn dominated(&self) -> bool {
        self.total > 0 && 2 * self.timeouts > self.total
    }
}

fn initial_configuration(
    init: &str,
    n: usize,
    rule: &LocalRule,
    seed: u64,
) -> Result<Configuration, Error> {
    let k = rule.alphabet().size();
    let letters: Vec<u8> = match init {
        "zeros" => vec![0; n],
        "ones" => vec![(k - 1).min(1); n],
        "checker" => (0..n).map(|i| (i % 2) as u8 % k).collect(),
        "random" => {
            let mut rng = SplitMix64::new(derive_seed(seed, 0x1217));
            (0..n).map(|_| (rng.next_u64() % k as u64) as u8).collect()
        }
        other => {
            return Err(Error::ModelFormat(format!(
                "unknown --init '{other}' (expected random, zeros, ones, or checker)"
            )))
        }
    };
    Configuration::ring(letters, rule.alphabet())
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Simulate { model, n, steps, seed, init, out } => {
            let (rule, _) = model.rule()?;
            let start = initial_configuration(&init, n, &rule, seed)?;
            let diagram: SpaceTimeDiagram = simulate(&rule, &start, steps, seed)?;
            write_or_print(out.as_ref(), &pgm::render_diagram(&diagram))?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Sample { model, n, cells, sampler, samples, seed, max_depth } => {
            let (rule, label) = model.rule()?;
            let budget = SamplerBudget::new(max_depth)?;
            let mut meter = TimeoutMeter::new();
            for i in 0..samples {
                let sample_seed = derive_seed(seed, i);
                let outcome = match (&cells, sampler.as_str()) {
                    (None, "epca") => cftp::sample_epca_finite(&rule, n, sample_seed, &budget)?,
                    (None, "basic") => cftp::cftp_basic_finite(&rule, n, sample_seed, &budget)?,
                    (Some(target), "epca") => {
                        cftp::sample_epca_infinite(&rule, target, sample_seed, &budget)?
                    }
                    (Some(target), "basic") => {
                        cftp::cftp_basic_infinite(&rule, target, sample_seed, &budget)?
                    }
                    (_, other) => {
                        return Err(Error::ModelFormat(format!(
                            "unknown --sampler '{other}' (expected epca or basic)"
                        )))
                    }
                };
                match outcome {
                    SampleOutcome::Sample(s) => {
                        meter.record(false);
                        let letters: Vec<String> =
                            s.letters.iter().map(|a| a.to_string()).collect();
                        println!(
                            "{} depth={} restarts={}",
                            letters.join(""),
                            s.depth,
                            s.restarts
                        );
                    }
                    SampleOutcome::Timeout { depth, restarts } => {
                        meter.record(true);
                        println!("timeout depth={depth} restarts={restarts}");
                    }
                }
            }
            eprintln!(
                "{label}: {} samples, {} timeouts",
                meter.total - meter.timeouts,
                meter.timeouts
            );
            Ok(if meter.dominated() { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }

        Command::Exact { model, n, out } => {
            let (rule, label) = model.rule()?;
            let matrix = TransitionMatrix::from_rule(&rule, n)?;
            let report = exact::stationary(&matrix);
            println!("model: {label} on ring {n} ({} states)", matrix.states());
            println!(
                "terminal components: {} (periods {:?})",
                report.terminal_components.len(),
                report.periods
            );
            println!("ergodic: {}", report.ergodic);
            for (i, pi) in report.stationary.iter().enumerate() {
                let support = pi.iter().filter(|&&p| p > 0.0).count();
                println!(
                    "stationary[{i}]: support {support}, residual {:.3e}",
                    report.residuals[i]
                );
                let mut top: Vec<(usize, f64)> =
                    pi.iter().copied().enumerate().filter(|&(_, p)| p > 0.0).collect();
                top.sort_by(|a, b| b.1.total_cmp(&a.1));
                for (state, p) in top.iter().take(8) {
                    let letters: Vec<String> =
                        matrix.decode(*state).iter().map(|a| a.to_string()).collect();
                    println!("  {} {:.6}", letters.join(""), p);
                }
            }
            if let Some(path) = out {
                std::fs::write(path, report.csv())?;
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Check { model } => {
            let (rule, label) = model.rule()?;
            print!("{}", report::check_ergodicity(&rule, &label));
            Ok(ExitCode::SUCCESS)
        }

        Command::ExperimentCn {
            mut alphas,
            mut sizes,
            mut samples,
            seed,
            max_depth,
            full_scale,
            out,
        } => {
            if full_scale {
                sizes = vec![4, 8, 16, 32, 64, 128, 256, 512, 1024];
                samples = 10_000;
            }
            alphas.sort_by(f64::total_cmp);
            let mut all = Vec::new();
            let mut meter = TimeoutMeter::new();
            for alpha in alphas {
                let config = CnConfig {
                    alpha,
                    sizes: sizes.clone(),
                    samples,
                    seed: derive_seed(seed, alpha.to_bits()),
                    max_depth,
                };
                let points = experiments::experiment_cn(&config)?;
                for p in &points {
                    for _ in 0..p.timeouts {
                        meter.record(true);
                    }
                    for _ in 0..(p.samples - p.timeouts) {
                        meter.record(false);
                    }
                }
                all.extend(points);
            }
            write_or_print(out.as_ref(), &cn_csv(&all))?;
            Ok(if meter.dominated() { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }

        Command::ExperimentDecay {
            model,
            u_cells,
            u_letters,
            w_cells,
            w_letters,
            shifts,
            samples,
            seed,
            max_depth,
            out,
        } => {
            let (rule, _) = model.rule()?;
            let u = Cylinder::new(u_cells, u_letters)?;
            let w = Cylinder::new(w_cells, w_letters)?;
            let config = DecayConfig { shifts, samples, seed, max_depth };
            let points = experiments::experiment_correlation_decay(&rule, &u, &w, &config)?;
            let mut meter = TimeoutMeter::new();
            for p in &points {
                for _ in 0..p.timeouts {
                    meter.record(true);
                }
                for _ in 0..(p.samples - p.timeouts) {
                    meter.record(false);
                }
            }
            write_or_print(out.as_ref(), &decay_csv(&points))?;
            Ok(if meter.dominated() { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }

        Command::Duality { alpha, window, k, l, t, trials, seed, out } => {
            let params = DbarwParams::new(alpha)?;
            let report = dbarw::duality_check(&params, &window, k, l, t, trials, seed)?;
            match out {
                Some(path) => std::fs::write(path, report.csv())?,
                None => {
                    println!(
                        "flip two-point: {:.6} [{:.6}, {:.6}]",
                        report.finae.value(),
                        report.finae.interval.low,
                        report.finae.interval.high
                    );
                    println!(
                        "walk parity:    {:.6} [{:.6}, {:.6}]",
                        report.dbarw.value(),
                        report.dbarw.interval.low,
                        report.dbarw.interval.high
                    );
                    println!("intervals overlap: {}", report.passes);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Exit quietly when stdout closes under us (e.g. piped into `head`)
/// instead of unwinding with a backtrace.
fn exit_on_closed_pipe() {
    let default = std::panic::take_hook();
    std::panic::set_hook(Box::new(move |info| {
        let broken = info
            .payload()
            .downcast_ref::<String>()
            .is_some_and(|m| m.contains("Broken pipe"));
        if broken {
            std::process::exit(0);
        }
        default(info);
    }));
}

fn main() -> ExitCode {
    exit_on_closed_pipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are successful outputs, not usage errors.
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
