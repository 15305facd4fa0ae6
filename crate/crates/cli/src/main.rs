mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use samlab_core::experiments as ex;
use samlab_core::pir::ComParams;
use samlab_core::seed::master_seed;
use samlab_core::Error;
use serde::Serialize;
use serde_json::{json, Value};

use config::{ExperimentConfig, Params};

const RESULT_SCHEMA: &str = "samlab.result/1";
const MAX_TRIALS: u64 = 10_000_000;
const MAX_BITS: u32 = 24;

#[derive(Parser)]
#[command(name = "samlab", version, about = "Seeded experiments on collision-sampling oracles")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// TOML file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

#[derive(Subcommand)]
enum Cmd {
    /// Normal-form Sam chain on prefixes of a random permutation.
    SamDemo(Common),
    /// Round-based binding attack on the toy commitment.
    BreakRound(Common),
    /// Communication-based binding attack on the toy commitment.
    BreakComm(Common),
    /// Budget/success curve of blockwise permutation inversion per depth.
    InvertTradeoff(Common),
    /// Encode/decode round trips of the permutation compression scheme.
    Reconstruct(Common),
    /// Binding reduction for the PIR-based commitment.
    PirCom(Common),
    /// Hiding distance of the toy or PIR-based commitment.
    HidingEstimate(Common),
    /// Alpha/beta pairs along Sam query chains.
    Alphabeta(Common),
}

enum Failure {
    Usage(String),
    Budget(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Budget(_) => 3,
            Failure::Other(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget(_) => Failure::Budget(e.to_string()),
            Error::Param(_) | Error::Domain(_) | Error::InputLength { .. } | Error::Schedule(_) | Error::MalformedQuery(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Other(e.to_string()),
        }
    }
}

fn require<T>(v: Option<T>, name: &str, sub: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("{sub} needs --{name}")))
}

fn resolve(sub: &str, p: &Params) -> Result<ExperimentConfig, Failure> {
    let mut c = ExperimentConfig {
        subcommand: sub.to_string(),
        n: p.n,
        d: p.d,
        k: p.k,
        eps: p.eps,
        c: p.c,
        trials: p.trials.unwrap_or(0),
        seed: p.seed.unwrap_or(0),
        depths: None,
        scheme: None,
        adversaries: None,
        hardness_s: p.hardness_s,
        expansion_ell: p.expansion_ell,
    };
    let trials = |d: u64| p.trials.unwrap_or(d);
    match sub {
        "sam-demo" => {
            c.n = Some(p.n.unwrap_or(8));
            c.trials = trials(1);
        }
        "break-round" => {
            c.n = Some(p.n.unwrap_or(12));
            c.d = Some(p.d.unwrap_or(4));
            c.k = Some(p.k.unwrap_or(c.n.unwrap()));
            c.trials = trials(500);
        }
        "break-comm" => {
            c.n = Some(p.n.unwrap_or(12));
            c.c = Some(p.c.unwrap_or(5));
            c.d = Some(p.d.unwrap_or(3));
            c.eps = Some(p.eps.unwrap_or(0.1));
            c.trials = trials(200);
        }
        "invert-tradeoff" => {
            c.n = Some(p.n.unwrap_or(12));
            c.depths = Some(p.depths.clone().unwrap_or_else(|| vec![1, 2, 3, 4, 6, 12]));
            c.trials = trials(200);
        }
        "reconstruct" => {
            c.n = Some(p.n.unwrap_or(6));
            c.adversaries = Some(
                p.adversaries
                    .clone()
                    .unwrap_or_else(|| ex::RECONSTRUCTION_ADVERSARIES.iter().map(|s| s.to_string()).collect()),
            );
            c.trials = trials(100);
        }
        "pir-com" => {
            c.n = Some(p.n.unwrap_or(16));
            c.k = Some(p.k.unwrap_or(12));
            c.d = Some(p.d.unwrap_or(6));
            c.trials = trials(10_000);
        }
        "hiding-estimate" => {
            let scheme = p.scheme.clone().unwrap_or_else(|| "toy".into());
            match scheme.as_str() {
                "toy" => {
                    c.n = Some(p.n.unwrap_or(12));
                    c.d = Some(p.d.unwrap_or(4));
                    c.trials = trials(1000);
                }
                "pir" => {
                    c.n = Some(p.n.unwrap_or(24));
                    c.k = Some(p.k.unwrap_or(12));
                    c.d = Some(p.d.unwrap_or(6));
                    c.trials = trials(100_000);
                }
                other => return Err(Failure::Usage(format!("--scheme must be toy or pir, got {other}"))),
            }
            c.scheme = Some(scheme);
        }
        "alphabeta" => {
            if p.n.is_some_and(|n| n != ex_chain_bits()) {
                return Err(Failure::Usage(format!("alphabeta runs at n = {} only", ex_chain_bits())));
            }
            c.n = Some(ex_chain_bits());
            c.trials = trials(2000);
        }
        _ => unreachable!(),
    }
    if c.trials == 0 {
        return Err(Failure::Usage("--trials must be positive".into()));
    }
    if let Some(e) = c.eps {
        if !(e > 0.0 && e < 1.0) {
            return Err(Failure::Usage(format!("--eps must lie in (0, 1), got {e}")));
        }
    }
    if c.n == Some(0) {
        return Err(Failure::Usage("--n must be positive".into()));
    }
    if c.trials > MAX_TRIALS {
        return Err(Failure::Budget(format!("{} trials above the cap of {MAX_TRIALS}", c.trials)));
    }
    if c.n.is_some_and(|n| n > MAX_BITS) {
        return Err(Failure::Budget(format!("n = {} above the desk-scale cap of {MAX_BITS}", c.n.unwrap())));
    }
    Ok(c)
}

fn ex_chain_bits() -> u32 {
    samlab_core::attacks::ChainAdversary::N
}

fn to_value<T: Serialize>(t: &T) -> Result<Value, Failure> {
    serde_json::to_value(t).map_err(|e| Failure::Other(e.to_string()))
}

/// Runs the experiment; returns the JSON result and an optional CSV body.
fn execute(c: &ExperimentConfig) -> Result<(Value, Option<String>), Failure> {
    let s = master_seed(c.seed);
    let sub = c.subcommand.as_str();
    let n = c.n.unwrap_or(0);
    Ok(match sub {
        "sam-demo" => (to_value(&ex::sam_demo(n, &s)?)?, None),
        "break-round" => (to_value(&ex::break_round(n, c.d.unwrap(), c.k.unwrap(), c.trials, &s)?)?, None),
        "break-comm" => {
            (to_value(&ex::break_comm(n, c.c.unwrap(), c.d.unwrap(), c.eps.unwrap(), c.trials, &s)?)?, None)
        }
        "invert-tradeoff" => {
            let r = ex::invert_tradeoff(n, c.depths.as_ref().unwrap(), c.trials, &s)?;
            (to_value(&r)?, Some(ex::tradeoff_csv(&r)))
        }
        "reconstruct" => {
            let names: Vec<&str> = c.adversaries.as_ref().unwrap().iter().map(String::as_str).collect();
            (to_value(&ex::reconstruction_round_trips(n, &names, c.trials, &s)?)?, None)
        }
        "pir-com" => {
            let params = ComParams::new(n, require(c.k, "k", sub)?, require(c.d, "d", sub)?)?;
            (to_value(&ex::pir_binding(params, c.trials, &s)?)?, None)
        }
        "hiding-estimate" if c.scheme.as_deref() == Some("pir") => {
            let params = ComParams::new(n, c.k.unwrap(), c.d.unwrap())?;
            (to_value(&ex::pir_hiding(params, c.trials, &s)?)?, None)
        }
        "hiding-estimate" => (to_value(&ex::toy_hiding(n, c.d.unwrap(), c.trials, &s)?)?, None),
        "alphabeta" => (to_value(&ex::alpha_beta_experiment(c.trials, &s)?)?, None),
        _ => unreachable!(),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (sub, common) = match cli.cmd {
        Cmd::SamDemo(c) => ("sam-demo", c),
        Cmd::BreakRound(c) => ("break-round", c),
        Cmd::BreakComm(c) => ("break-comm", c),
        Cmd::InvertTradeoff(c) => ("invert-tradeoff", c),
        Cmd::Reconstruct(c) => ("reconstruct", c),
        Cmd::PirCom(c) => ("pir-com", c),
        Cmd::HidingEstimate(c) => ("hiding-estimate", c),
        Cmd::Alphabeta(c) => ("alphabeta", c),
    };
    let params = match &common.config {
        Some(path) => common.params.over(Params::load(path).map_err(Failure::Usage)?),
        None => common.params,
    };
    let cfg = resolve(sub, &params)?;
    if let Some(t) = params.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Other(e.to_string()))?;
    }
    let (result, csv) = execute(&cfg)?;
    let doc = json!({
        "schema": RESULT_SCHEMA,
        "code_version": env!("CARGO_PKG_VERSION"),
        "timestamp": chrono::Utc::now().to_rfc3339(),
        "seed": cfg.seed,
        "config": to_value(&cfg)?,
        "result": result,
    });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Other(e.to_string()))? + "\n";
    match &params.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Other(format!("writing {}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    match (&params.csv, csv) {
        (Some(p), Some(body)) => std::fs::write(p, body).map_err(|e| Failure::Other(format!("writing {}: {e}", p.display())))?,
        (Some(_), None) => eprintln!("note: {sub} produces no sweep curve; --csv ignored"),
        _ => {}
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (kind, msg) = match &f {
                Failure::Usage(m) => ("usage error", m),
                Failure::Budget(m) => ("budget error", m),
                Failure::Other(m) => ("error", m),
            };
            eprintln!("samlab: {kind}: {msg}");
            ExitCode::from(f.code())
        }
    }
}
