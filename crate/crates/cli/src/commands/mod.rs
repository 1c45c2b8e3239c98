mod convergence;
mod kernels;
mod membership;

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::config::{
    overlay, to_clean_value, CheckClassOpts, Condition22Opts, EtaOpts, FileConfig, IdentityOpts, LemmaOpts,
    MajorantOpts, PartialSumOpts, Remark2Opts, SequenceOpts, UniformTailOpts,
};
use crate::output::Outcome;

pub use kernels::parse_rect;

#[derive(Parser, Debug)]
#[command(name = "dsine", version, about = "Numerical experiments on double sine series")]
pub struct Cli {
    /// TOML file with defaults for every option
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Also write `<command>.json` and CSV tables here
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads (results do not depend on it)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for the randomised identity checks
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit class constants of a double sequence (or a single-index one)
    CheckClass {
        #[command(flatten)]
        seq: SequenceOpts,
        #[command(flatten)]
        maj: MajorantOpts,
        #[command(flatten)]
        opts: CheckClassOpts,
    },
    /// Anti-diagonal decay max_{j+k=s} jk|c_jk|
    #[command(name = "condition-22")]
    Condition22 {
        #[command(flatten)]
        seq: SequenceOpts,
        #[command(flatten)]
        opts: Condition22Opts,
    },
    /// One rectangle partial sum, directly and by parts
    PartialSum {
        #[command(flatten)]
        seq: SequenceOpts,
        #[command(flatten)]
        opts: PartialSumOpts,
    },
    /// Sup of rectangle sums beyond growing thresholds
    UniformTail {
        #[command(flatten)]
        seq: SequenceOpts,
        #[command(flatten)]
        opts: UniformTailOpts,
    },
    /// Tail quantities along the diagonal and the pointwise estimate
    Lemma {
        #[command(flatten)]
        seq: SequenceOpts,
        #[command(flatten)]
        maj: MajorantOpts,
        #[command(flatten)]
        opts: LemmaOpts,
    },
    /// Search eta for each epsilon and check the uniform bound beyond it
    Eta {
        #[command(flatten)]
        seq: SequenceOpts,
        #[command(flatten)]
        maj: MajorantOpts,
        #[command(flatten)]
        opts: EtaOpts,
    },
    /// Growth of the mod-3 product partial sums at (2π/3, 2π/3)
    Remark2 {
        #[command(flatten)]
        opts: Remark2Opts,
    },
    /// By-parts identities, difference splits and kernel bounds
    VerifyIdentities {
        #[command(flatten)]
        seq: SequenceOpts,
        #[command(flatten)]
        opts: IdentityOpts,
    },
    /// Run the command named in the config's [cli] section
    Run {
        /// Recipe file
        recipe: PathBuf,
    },
}

/// A finished command: its name, rendered JSON and outcome.
pub struct Report {
    pub command: String,
    pub json: String,
    pub outcome: Outcome,
    pub out_dir: Option<PathBuf>,
}

/// Global settings after merging flags over the file.
pub struct Globals {
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: u64,
}

pub fn resolve(cli: Cli) -> Result<(FileConfig, Command, Globals)> {
    let (path, command) = match cli.command {
        Command::Run { recipe } => {
            if cli.config.is_some() {
                bail!("`run` takes the config as its argument; drop --config");
            }
            (Some(recipe.clone()), None)
        }
        cmd => (cli.config.clone(), Some(cmd)),
    };
    let file = match &path {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let command = match command {
        Some(c) => c,
        None => match file.cli.command.as_deref() {
            Some(name) => empty_command(name)?,
            None => bail!("the recipe has no [cli] command"),
        },
    };
    let globals = Globals {
        out_dir: cli.out_dir.or_else(|| file.cli.out_dir.clone()),
        threads: cli.threads.or(file.cli.threads),
        seed: cli.seed.or(file.cli.seed).unwrap_or(0),
    };
    Ok((file, command, globals))
}

fn empty_command(name: &str) -> Result<Command> {
    Ok(match name {
        "check-class" => Command::CheckClass { seq: d(), maj: d(), opts: d() },
        "condition-22" => Command::Condition22 { seq: d(), opts: d() },
        "partial-sum" => Command::PartialSum { seq: d(), opts: d() },
        "uniform-tail" => Command::UniformTail { seq: d(), opts: d() },
        "lemma" => Command::Lemma { seq: d(), maj: d(), opts: d() },
        "eta" => Command::Eta { seq: d(), maj: d(), opts: d() },
        "remark2" => Command::Remark2 { opts: d() },
        "verify-identities" => Command::VerifyIdentities { seq: d(), opts: d() },
        other => bail!("unknown command `{other}` in [cli]"),
    })
}

fn d<T: Default>() -> T {
    T::default()
}

/// Builds the resolved-config object in the file layout.
struct Resolved(Map<String, Value>);

impl Resolved {
    fn new(command: &str) -> Self {
        let mut m = Map::new();
        m.insert("cli".into(), json!({ "command": command }));
        Self(m)
    }

    fn put<T: serde::Serialize>(&mut self, key: &str, v: &T) {
        self.0.insert(key.into(), to_clean_value(v));
    }

    fn nest<T: serde::Serialize>(&mut self, section: &str, key: &str, v: &T) {
        let mut m = Map::new();
        m.insert(key.into(), to_clean_value(v));
        self.0.insert(section.into(), Value::Object(m));
    }
}

/// Merges flags over the file, runs the command and renders its report.
pub fn execute(file: &FileConfig, command: Command, globals: &Globals) -> Result<Report> {
    let seq_of = |s: &SequenceOpts| overlay(&file.sequences, s);
    let maj_of = |m: &MajorantOpts| overlay(&file.majorants, m);
    let (name, resolved, outcome) = match command {
        Command::CheckClass { seq, maj, opts } => {
            let (seq, mut maj) = (seq_of(&seq)?, maj_of(&maj)?);
            let mut opts = overlay(&file.membership.check_class, &opts)?;
            let out = membership::check_class(&seq, &mut maj, &mut opts)?;
            let mut r = Resolved::new("check-class");
            if opts.single.is_none() {
                r.put("sequences", &seq);
            }
            r.put("majorants", &maj);
            r.nest("membership", "check_class", &opts);
            ("check-class", r, out)
        }
        Command::Condition22 { seq, opts } => {
            let seq = seq_of(&seq)?;
            let mut opts = overlay(&file.membership.condition_22, &opts)?;
            let out = membership::condition_22(&seq, &mut opts)?;
            let mut r = Resolved::new("condition-22");
            r.put("sequences", &seq);
            r.nest("membership", "condition_22", &opts);
            ("condition-22", r, out)
        }
        Command::PartialSum { seq, opts } => {
            let seq = seq_of(&seq)?;
            let mut opts = overlay(&file.kernels_summation.partial_sum, &opts)?;
            let out = kernels::partial_sum(&seq, &mut opts)?;
            let mut r = Resolved::new("partial-sum");
            r.put("sequences", &seq);
            r.nest("kernels_summation", "partial_sum", &opts);
            ("partial-sum", r, out)
        }
        Command::UniformTail { seq, opts } => {
            let seq = seq_of(&seq)?;
            let mut opts = overlay(&file.convergence.uniform_tail, &opts)?;
            let out = convergence::uniform_tail(&seq, &mut opts)?;
            let mut r = Resolved::new("uniform-tail");
            r.put("sequences", &seq);
            r.nest("convergence", "uniform_tail", &opts);
            ("uniform-tail", r, out)
        }
        Command::Lemma { seq, maj, opts } => {
            let (seq, mut maj) = (seq_of(&seq)?, maj_of(&maj)?);
            let mut opts = overlay(&file.convergence.lemma, &opts)?;
            let out = convergence::lemma(&seq, &mut maj, &mut opts)?;
            let mut r = Resolved::new("lemma");
            r.put("sequences", &seq);
            r.put("majorants", &maj);
            r.nest("convergence", "lemma", &opts);
            ("lemma", r, out)
        }
        Command::Eta { seq, maj, opts } => {
            let (seq, mut maj) = (seq_of(&seq)?, maj_of(&maj)?);
            let mut opts = overlay(&file.convergence.eta, &opts)?;
            let out = convergence::eta(&seq, &mut maj, &mut opts)?;
            let mut r = Resolved::new("eta");
            r.put("sequences", &seq);
            r.put("majorants", &maj);
            r.nest("convergence", "eta", &opts);
            ("eta", r, out)
        }
        Command::Remark2 { opts } => {
            let mut opts = overlay(&file.convergence.remark2, &opts)?;
            let out = convergence::remark2(&mut opts)?;
            let mut r = Resolved::new("remark2");
            r.nest("convergence", "remark2", &opts);
            ("remark2", r, out)
        }
        Command::VerifyIdentities { seq, opts } => {
            let seq = seq_of(&seq)?;
            let mut opts = overlay(&file.kernels_summation.verify_identities, &opts)?;
            let out = kernels::verify(&seq, globals.seed, &mut opts)?;
            let mut r = Resolved::new("verify-identities");
            r.0.insert("cli".into(), json!({ "command": "verify-identities", "seed": globals.seed }));
            if !seq.is_empty() {
                r.put("sequences", &seq);
            }
            r.nest("kernels_summation", "verify_identities", &opts);
            ("verify-identities", r, out)
        }
        Command::Run { .. } => bail!("`run` cannot be nested"),
    };
    let json = crate::output::render(name, &Value::Object(resolved.0), &outcome);
    Ok(Report { command: name.to_string(), json, outcome, out_dir: globals.out_dir.clone() })
}
