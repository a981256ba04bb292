use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chanshort::channels::load_channel;
use chanshort::harness::{
    design_dump, records_to_json, run_experiment, write_csv, Experiment, ExperimentConfig,
    SnrGrid, Units,
};
use chanshort::rates::{rate_report, RateTerm};
use chanshort::BlockSpec;

#[derive(Parser)]
#[command(name = "chanshort", version, about = "Channel-shortening receiver design and rate experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal receiver (B, G_r, H_r, lambda_min) and rates for a channel file
    Design(DesignArgs),
    /// Every GMI route for a channel file at one memory length
    Rates(RatesArgs),
    /// Ergodic GMI over IID Rayleigh channels, direct and shortcut estimates
    Ergodic(ErgodicArgs),
    /// Probability that the optimal G_r is indefinite on correlated channels
    Indefinite(CorrelatedArgs),
    /// Per-symbol rates of a bandlimited ISI channel
    Isi(IsiArgs),
    /// Classical F^H F receivers against the banded optimum
    ClassicalGap(ClassicalArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitsArg {
    Nats,
    Bits,
}

impl From<UnitsArg> for Units {
    fn from(u: UnitsArg) -> Units {
        match u {
            UnitsArg::Nats => Units::Nats,
            UnitsArg::Bits => Units::Bits,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct ChannelArgs {
    /// Channel file: "nR nT" header, then nR rows of entries like 1.5-0.25i
    channel: PathBuf,
    /// Noise variance
    #[arg(long, default_value_t = 1.0)]
    n0: f64,
    #[arg(long, value_enum, default_value = "nats")]
    units: UnitsArg,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DesignArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Receiver memory
    #[arg(long, default_value_t = 1, conflicts_with = "blocks")]
    k: usize,
    /// Block-diagonal receiver, e.g. 2,2
    #[arg(long)]
    blocks: Option<String>,
}

#[derive(Args)]
struct RatesArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, default_value_t = 1)]
    k: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = ExperimentConfig::DEFAULT_SEED)]
    seed: u64,
    /// Monte Carlo trials [default: 1000]
    #[arg(long)]
    trials: Option<usize>,
    /// SNR grid in dB, start:step:stop or a single value
    #[arg(long, default_value = "-10:2:40", allow_hyphen_values = true)]
    snr_db: String,
    #[arg(long, value_enum, default_value = "nats")]
    units: UnitsArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: SweepFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ErgodicArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long, default_value_t = 4)]
    nr: usize,
    #[arg(long, default_value_t = 6)]
    nt: usize,
    #[arg(long, default_value_t = 2, conflicts_with = "blocks")]
    k: usize,
    #[arg(long)]
    blocks: Option<String>,
}

#[derive(Args)]
struct CorrelatedArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// Antennas on each side
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Correlation coefficients, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 0.5])]
    alpha: Vec<f64>,
}

#[derive(Args)]
struct ClassicalArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5])]
    alpha: Vec<f64>,
    /// Stop when the largest projected-gradient entry is below this
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
}

#[derive(Args)]
struct IsiArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// Normalized bandwidth in (0, 1]
    #[arg(long, default_value_t = 0.7)]
    beta: f64,
    #[arg(long, default_value_t = 64)]
    nt: usize,
    /// Odd number of sinc taps
    #[arg(long, default_value_t = 129)]
    taps: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
}

fn parse_blocks(text: Option<&str>) -> chanshort::Result<Option<BlockSpec>> {
    text.map(BlockSpec::parse).transpose()
}

fn output(path: Option<&PathBuf>) -> chanshort::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn sweep_config(experiment: Experiment, args: &SweepArgs) -> chanshort::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::defaults(experiment);
    cfg.seed = args.seed;
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    cfg.snr = SnrGrid::parse(&args.snr_db)?;
    cfg.units = args.units.into();
    Ok(cfg)
}

fn run_sweep(cfg: &ExperimentConfig, args: &SweepArgs) -> chanshort::Result<()> {
    let records = run_experiment(cfg)?;
    let mut out = output(args.out.as_ref())?;
    match args.format {
        SweepFormat::Csv => write_csv(&mut out, cfg, &records)?,
        SweepFormat::Json => writeln!(out, "{}", records_to_json(cfg, &records)?)?,
    }
    out.flush()?;
    Ok(())
}

fn render_rates(terms: &[(&str, f64)], extra: &[(&str, &[RateTerm])], units: Units) -> String {
    let mut s = format!("rates ({units}):\n");
    for (label, v) in terms {
        s += &format!("  {label:<20} {v:.6}\n");
    }
    for (title, list) in extra {
        s += &format!("\n{title}:\n");
        for t in *list {
            s += &format!("  {:<20} {:.6}\n", t.label, t.value);
        }
    }
    s
}

fn run(cli: Cli) -> chanshort::Result<()> {
    match cli.command {
        Command::Design(args) => {
            let c = &args.channel;
            let channel = load_channel(&c.channel, c.n0)?;
            let blocks = parse_blocks(args.blocks.as_deref())?;
            let dump = design_dump(&channel, args.k, blocks.as_ref())?.in_units(c.units.into());
            let mut out = output(c.out.as_ref())?;
            match c.format {
                ReportFormat::Text => write!(out, "{}", dump.render_text())?,
                ReportFormat::Json => writeln!(out, "{}", dump.to_json()?)?,
            }
            out.flush()?;
        }
        Command::Rates(args) => {
            let c = &args.channel;
            let channel = load_channel(&c.channel, c.n0)?;
            let units: Units = c.units.into();
            let f = units.scale();
            let mut report = rate_report(&channel, args.k)?;
            for v in [
                &mut report.i_full,
                &mut report.i_mmse,
                &mut report.gmi_functional,
                &mut report.gmi_logdet,
                &mut report.gmi_column_removal,
                &mut report.gmi_chain,
            ] {
                *v *= f;
            }
            for t in report.column_removal_terms.iter_mut().chain(report.chain_terms.iter_mut()) {
                t.value *= f;
            }
            let mut out = output(c.out.as_ref())?;
            match c.format {
                ReportFormat::Text => {
                    writeln!(out, "channel {}x{}  N0={}  K={}", channel.n_r(), channel.n_t(), channel.n0, report.k)?;
                    let text = render_rates(
                        &[
                            ("full", report.i_full),
                            ("mmse", report.i_mmse),
                            ("gmi (functional)", report.gmi_functional),
                            ("gmi (log det)", report.gmi_logdet),
                            ("gmi (col. removal)", report.gmi_column_removal),
                            ("gmi (chain rule)", report.gmi_chain),
                        ],
                        &[
                            ("column removal terms", &report.column_removal_terms),
                            ("chain rule terms", &report.chain_terms),
                        ],
                        units,
                    );
                    write!(out, "{text}")?;
                }
                ReportFormat::Json => {
                    let value = serde_json::json!({ "units": units, "report": report });
                    writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?;
                }
            }
            out.flush()?;
        }
        Command::Ergodic(args) => {
            let mut cfg = sweep_config(Experiment::Ergodic, &args.sweep)?;
            cfg.n_r = args.nr;
            cfg.n_t = args.nt;
            cfg.k = args.k;
            cfg.blocks = parse_blocks(args.blocks.as_deref())?;
            run_sweep(&cfg, &args.sweep)?;
        }
        Command::Indefinite(args) => {
            let mut cfg = sweep_config(Experiment::Indefinite, &args.sweep)?;
            cfg.n_r = args.n;
            cfg.n_t = args.n;
            cfg.k = args.k;
            cfg.alphas = args.alpha;
            run_sweep(&cfg, &args.sweep)?;
        }
        Command::Isi(args) => {
            let mut cfg = sweep_config(Experiment::Isi, &args.sweep)?;
            cfg.beta = args.beta;
            cfg.n_t = args.nt;
            cfg.n_r = args.nt;
            cfg.taps = args.taps;
            cfg.k = args.k;
            run_sweep(&cfg, &args.sweep)?;
        }
        Command::ClassicalGap(args) => {
            let mut cfg = sweep_config(Experiment::ClassicalGap, &args.sweep)?;
            cfg.n_r = args.n;
            cfg.n_t = args.n;
            cfg.k = args.k;
            cfg.alphas = args.alpha;
            cfg.eps = args.eps;
            cfg.max_iter = args.max_iter;
            run_sweep(&cfg, &args.sweep)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
