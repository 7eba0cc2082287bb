//! `ssvep-nav` command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use ssvep_nav::error::Error;
use ssvep_nav::metrics::{ConfusionMatrix, MetricsReport};
use ssvep_nav::scu::{load_model, ScuHyperparams, ScuModel, DEFAULT_FOLDS};
use ssvep_nav::session::{
    calibrate_from_dataset, experiments_report, read_log, run_calibration, run_experiments, CalibrationConfig,
    ConsoleServer, ConsoleSession, NavSession, OnlineConfig, SessionStatus, SessionSummary, VirtualSubject,
};
use ssvep_nav::signal::{load_dataset, SsvepGenParams, DEFAULT_TRIALS_PER_CLASS};
use ssvep_nav::simworld::{desk_world, tour_world, DetectorNoise, World};

#[derive(Parser, Debug)]
#[command(name = "ssvep-nav", version, about = "SSVEP-steered robot navigation simulator")]
struct Cli {
    /// Subject and training seed. Use the same value for calibrate and
    /// navigate so both see the same simulated subject.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Signal-to-noise amplitude ratio of the simulated subject.
    #[arg(long, global = true, default_value_t = 4.0)]
    snr: f64,
    /// World JSON file; the built-in desk world when omitted.
    #[arg(long, global = true)]
    world: Option<PathBuf>,
    /// Trained model file.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Run directory for datasets, models, reports and logs.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = DEFAULT_TRIALS_PER_CLASS)]
    trials_per_class: usize,
    /// Print machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Record (or replay) calibration trials, train the classifier and cross-validate.
    Calibrate {
        /// Replay a recorded SSVEP1 file instead of generating trials.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
        /// Training epochs; the classifier default when omitted.
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Run closed-loop experiments with a virtual subject.
    Navigate {
        #[arg(long, default_value_t = 5)]
        repeat: u32,
        /// Probability that the subject fixates a wrong stimulus.
        #[arg(long, conflicts_with = "random")]
        lapse_rate: Option<f64>,
        /// Subject fixates stimuli uniformly at random.
        #[arg(long)]
        random: bool,
        /// Bounding-box jitter of the detector in pixels.
        #[arg(long, default_value_t = 0.0)]
        noise_px: f64,
        #[arg(long)]
        max_trials: Option<usize>,
    },
    /// Serve the operator console over WebSocket.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8765")]
        bind: String,
    },
    /// Summarize session logs.
    Metrics {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
    },
    /// Write a built-in world file.
    GenWorld {
        #[arg(long, value_enum, default_value_t = Template::Desk)]
        template: Template,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Template {
    /// Three objects, two approaches and a left turn.
    Desk,
    /// Four objects, six decisions.
    Tour,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Calibrate { dataset, folds, epochs } => calibrate(cli, dataset.as_deref(), *folds, *epochs),
        Command::Navigate {
            repeat,
            lapse_rate,
            random,
            noise_px,
            max_trials,
        } => navigate(cli, *repeat, *lapse_rate, *random, *noise_px, *max_trials),
        Command::Serve { bind } => serve(cli, bind),
        Command::Metrics { logs } => metrics(cli, logs),
        Command::GenWorld { template } => gen_world(cli, *template),
    }
}

fn usage(message: impl Into<String>) -> Error {
    Error::Argument(message.into())
}

fn subject_params(cli: &Cli) -> SsvepGenParams {
    SsvepGenParams::default().with_snr(cli.snr).with_seed(cli.seed)
}

fn world(cli: &Cli) -> Result<World, Error> {
    match &cli.world {
        Some(path) => World::load(path),
        None => Ok(desk_world()),
    }
}

fn model(cli: &Cli) -> Result<Arc<ScuModel<f32>>, Error> {
    let path = cli.model.as_ref().ok_or_else(|| usage("--model is required"))?;
    Ok(Arc::new(load_model(path)?))
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn print_json<S: serde::Serialize>(value: &S) -> Result<(), Error> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn calibrate(cli: &Cli, replay: Option<&Path>, folds: usize, epochs: Option<usize>) -> Result<(), Error> {
    let mut hp = ScuHyperparams::default().with_seed(cli.seed);
    if let Some(e) = epochs {
        hp.epochs = e;
    }
    let config = CalibrationConfig {
        trials_per_class: cli.trials_per_class,
        folds,
        hyperparams: hp,
    };
    let dir = out_dir(cli);
    let cal = match replay {
        Some(path) => calibrate_from_dataset(load_dataset(path)?, &config, Some(&dir))?,
        None => run_calibration(&VirtualSubject::oracle(subject_params(cli)), &config, Some(&dir))?,
    };
    if cli.json {
        print_json(&cal.report)
    } else {
        print!("{}", cal.report.to_table());
        println!("  wrote {} trials, model and report to {}", cal.dataset.len(), dir.display());
        Ok(())
    }
}

fn navigate(
    cli: &Cli,
    repeat: u32,
    lapse_rate: Option<f64>,
    random: bool,
    noise_px: f64,
    max_trials: Option<usize>,
) -> Result<(), Error> {
    if repeat == 0 {
        return Err(usage("--repeat must be >= 1"));
    }
    if !(noise_px.is_finite() && noise_px >= 0.0) {
        return Err(usage("--noise-px must be >= 0"));
    }
    let params = subject_params(cli);
    let subject = match (random, lapse_rate) {
        (true, _) => VirtualSubject::random(params),
        (false, Some(rate)) => VirtualSubject::lapsing(params, rate),
        (false, None) => VirtualSubject::oracle(params),
    };
    let config = OnlineConfig {
        experiment: 1,
        seed: cli.seed,
        detector: DetectorNoise {
            sigma_px: noise_px,
            seed: cli.seed,
        },
        max_trials,
    };
    let dir = out_dir(cli);
    let sessions = run_experiments(&world(cli)?, model(cli)?, &subject, &config, repeat, Some(&dir))?;
    let report = experiments_report(&sessions)?;
    if cli.json {
        let rows: Vec<_> = sessions.iter().map(session_row).collect();
        return print_json(&serde_json::json!({ "sessions": rows, "report": report }));
    }
    println!("experiment  trials  correct  accuracy  status");
    for s in &sessions {
        let (trials, correct) = s.summary.as_ref().map_or((0, 0), |m| (m.trials, m.correct));
        println!(
            "{:>10}  {:>6}  {:>7}  {:>8.3}  {}",
            s.experiment,
            trials,
            correct,
            s.accuracy().unwrap_or(0.0),
            status_text(&s.status)
        );
    }
    print!("{}", report.to_table());
    println!("  logs in {}", dir.display());
    Ok(())
}

fn status_text(status: &SessionStatus) -> String {
    match status {
        SessionStatus::Running => "running".into(),
        SessionStatus::Complete => "complete".into(),
        SessionStatus::Incomplete { reason } => format!("incomplete ({reason})"),
    }
}

fn session_row(s: &NavSession) -> serde_json::Value {
    serde_json::json!({
        "experiment": s.experiment,
        "status": s.status,
        "summary": s.summary,
    })
}

fn serve(cli: &Cli, bind: &str) -> Result<(), Error> {
    let world = world(cli)?;
    let subject = VirtualSubject::oracle(subject_params(cli));
    let config = OnlineConfig {
        seed: cli.seed,
        ..Default::default()
    };
    let session = ConsoleSession::new(&world, model(cli)?, &subject, &config, Some(out_dir(cli)))?;
    let mut server = ConsoleServer::bind(bind, session)?;
    eprintln!("console listening on ws://{} (plan {:?})", server.local_addr()?, world.plan.id);
    server.run()
}

fn metrics(cli: &Cli, logs: &[PathBuf]) -> Result<(), Error> {
    let mut summaries = Vec::with_capacity(logs.len());
    for path in logs {
        summaries.push(SessionSummary::from_log(&read_log(path)?)?);
    }
    if cli.json {
        return match &summaries[..] {
            [one] => print_json(one),
            many => print_json(&many),
        };
    }
    for (path, s) in logs.iter().zip(&summaries) {
        println!(
            "{}: {} trials, accuracy {:.4}, B {:.4} bits, T {:.3} s, ITR {:.3} bpm",
            path.display(),
            s.trials,
            s.accuracy,
            s.bits,
            s.mean_t_seconds,
            s.itr_bpm
        );
    }
    if summaries.len() > 1 {
        let mut confusion = ConfusionMatrix::default();
        summaries.iter().for_each(|s| confusion.merge(&ConfusionMatrix { counts: s.confusion }));
        let trials: usize = summaries.iter().map(|s| s.trials).sum();
        let t = summaries.iter().map(|s| s.mean_t_seconds * s.trials as f64).sum::<f64>() / trials as f64;
        let report = MetricsReport::new("sessions", summaries.iter().map(|s| s.accuracy).collect(), t, confusion)?;
        print!("{}", report.to_table());
    }
    Ok(())
}

fn gen_world(cli: &Cli, template: Template) -> Result<(), Error> {
    let world = match template {
        Template::Desk => desk_world(),
        Template::Tour => tour_world(),
    };
    match &cli.world {
        Some(path) => {
            world.save(path)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            println!("{}", world.to_json());
            Ok(())
        }
    }
}
