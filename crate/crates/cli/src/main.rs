use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use polar_idma::polar::{build_equivalent_code, construct_bhattacharyya};
use polar_idma::sim::{
    emit_fcc, fcc_csv, fcc_pgm, parse_pairs, run_reset_ablation, run_sweep, to_csv,
    verify_equivalence, BlerRecord, Design, SimConfig,
};

#[derive(Parser)]
#[command(name = "polar-idma", version, about = "Polar BP multi-user IDMA simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BLER/BER sweep over Eb/N0.
    Sweep(SimArgs),
    /// Runs the same sweep with and without factor-graph reset.
    AblateReset(SimArgs),
    /// Frozen-channel chart of a (possibly repetition-equivalent) code.
    Fcc(FccArgs),
    /// Checks that repetition equals the equivalent longer polar code.
    Equiv(EquivArgs),
}

#[derive(Args)]
struct SimArgs {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    users: Option<String>,
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    dr: Option<String>,
    #[arg(long)]
    rc: Option<String>,
    /// `start:stop:step` or comma-separated list (dB).
    #[arg(long, allow_hyphen_values = true)]
    ebn0: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    max_block_errors: Option<String>,
    #[arg(long)]
    it_mud: Option<String>,
    #[arg(long)]
    it_bp: Option<String>,
    /// on | off
    #[arg(long)]
    reset_fg: Option<String>,
    /// gmatrix | crc | genie | none
    #[arg(long)]
    stop: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// bhatt | 5g | file:PATH
    #[arg(long)]
    design: Option<String>,
    /// ext | app
    #[arg(long)]
    feedback: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Any other config key, as KEY=VALUE. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl SimArgs {
    fn into_config(self) -> Result<SimConfig> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                parse_pairs(&text)?
            }
            None => Vec::new(),
        };
        let flags = [
            ("users", self.users),
            ("N", self.n),
            ("k", self.k),
            ("dr", self.dr),
            ("rc", self.rc),
            ("ebn0", self.ebn0),
            ("trials", self.trials),
            ("max_block_errors", self.max_block_errors),
            ("it_mud", self.it_mud),
            ("it_bp", self.it_bp),
            ("reset_fg", self.reset_fg),
            ("stop", self.stop),
            ("q", self.q),
            ("seed", self.seed),
            ("design", self.design),
            ("feedback", self.feedback),
            ("out", self.out),
        ];
        // An explicit rate on the command line must win over a file's k.
        if flags[4].1.is_some() && flags[2].1.is_none() {
            pairs.retain(|(key, _)| key != "k");
        }
        for (key, value) in flags {
            if let Some(v) = value {
                pairs.push((key.to_string(), v));
            }
        }
        for kv in self.set {
            let (key, value) = kv
                .split_once('=')
                .with_context(|| format!("--set expects KEY=VALUE, got {kv:?}"))?;
            pairs.push((key.trim().to_string(), value.trim().to_string()));
        }
        Ok(SimConfig::from_pairs(pairs)?)
    }
}

#[derive(Args)]
struct FccArgs {
    /// Base code length; the chart covers N * dr channels.
    #[arg(long = "N")]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Repetition factor; values above 1 chart the equivalent code.
    #[arg(long, default_value_t = 1)]
    dr: usize,
    #[arg(long, default_value = "5g")]
    design: String,
    /// Erasure probability of the Bhattacharyya ordering used for sorting.
    #[arg(long, default_value_t = 0.5)]
    z0: f64,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// CSV output; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a plain greymap image.
    #[arg(long)]
    pgm: Option<PathBuf>,
}

#[derive(Args)]
struct EquivArgs {
    #[arg(long = "N")]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    dr: usize,
    #[arg(long, default_value = "bhatt")]
    design: String,
    #[arg(long, default_value_t = 0.5)]
    z0: f64,
}

fn parse_design(name: &str, z0: f64) -> Result<Design> {
    Ok(match name {
        "bhatt" => Design::Bhattacharyya { z0 },
        "5g" => Design::Nr5g,
        other => match other.strip_prefix("file:") {
            Some(p) => Design::File(p.into()),
            None => bail!("unknown design {other:?}"),
        },
    })
}

fn print_summary(label: &str, records: &[BlerRecord]) {
    for r in records {
        let (lo, hi) = r.bler_interval();
        eprintln!(
            "{label}{:>6.2} dB  trials {:>7}  errors {:>5}  BLER {:.3e} [{:.2e}, {:.2e}]  BER {:.3e}  {:.1}s",
            r.ebn0_db,
            r.trials,
            r.block_errors,
            r.bler(),
            lo,
            hi,
            r.ber(),
            r.elapsed.as_secs_f64()
        );
    }
}

fn sweep(args: SimArgs) -> Result<()> {
    let cfg = args.into_config()?;
    let records = run_sweep(&cfg)?;
    if cfg.output.is_none() {
        print!("{}", to_csv(&records));
    }
    print_summary("", &records);
    Ok(())
}

fn ablate(args: SimArgs) -> Result<()> {
    let cfg = args.into_config()?;
    if cfg.users < 2 {
        eprintln!("note: with one user both variants decode identical inputs");
    }
    let result = run_reset_ablation(&cfg)?;
    if cfg.output.is_none() {
        print!("{}", result.to_csv());
    }
    print_summary("reset       ", &result.reset);
    print_summary("persistent  ", &result.persistent);
    Ok(())
}

fn fcc(args: FccArgs) -> Result<()> {
    let design = parse_design(&args.design, args.z0)?;
    let (base, _) = design.build(args.n, args.k)?;
    let code = if args.dr > 1 {
        build_equivalent_code(&base, args.dr)?
    } else {
        base
    };
    let total = code.len();
    let (_, order) = construct_bhattacharyya(total, 1, args.z0)?;
    let width = args.width.unwrap_or(total.min(64));
    let height = args.height.unwrap_or(total / width.max(1));
    let chart = emit_fcc(&code, &order, width, height)?;
    match &args.out {
        Some(path) => std::fs::write(path, fcc_csv(&chart))
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", fcc_csv(&chart)),
    }
    if let Some(path) = &args.pgm {
        std::fs::write(path, fcc_pgm(&chart))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn equiv(args: EquivArgs) -> Result<()> {
    let design = parse_design(&args.design, args.z0)?;
    let report = verify_equivalence(args.n, args.k, args.dr, &design)?;
    println!(
        "code {}  equivalent {}  d_r {}  messages {} ({})",
        report.code,
        report.equivalent,
        report.repetition,
        report.messages_checked,
        if report.exhaustive { "exhaustive" } else { "sampled" }
    );
    match &report.counterexample {
        None => {
            println!("PASS");
            Ok(())
        }
        Some(u) => {
            let bits: String = u.iter().map(|b| char::from(b'0' + b)).collect();
            println!("FAIL counterexample u = {bits}");
            bail!("equivalence check failed")
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::AblateReset(a) => ablate(a),
        Command::Fcc(a) => fcc(a),
        Command::Equiv(a) => equiv(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
