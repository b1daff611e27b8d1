use std::fmt;
use std::ops::Range;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgAction, Args, Parser, Subcommand};
use privote_core::hevs::SampleSizePolicy;
use privote_core::{Behavior, TrialMode};

#[derive(Debug, Parser)]
#[command(
    name = "privote",
    version,
    about = "Simulator for blind-signature and homomorphic-encryption voting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one homomorphic-encryption election with threshold decryption
    #[command(args_override_self = true)]
    HevRun(HevArgs),
    /// Run one election with k sampled public keys and a mode decision
    #[command(args_override_self = true)]
    HevsRun(HevsArgs),
    /// Run one blind-signature election against an append-only ledger
    #[command(args_override_self = true)]
    BsvRun(BsvArgs),
    /// Monte Carlo accuracy sweep, written as CSV
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Single-sample reliability table, written as CSV
    #[command(args_override_self = true)]
    Analytic(AnalyticArgs),
    /// Re-run an election from its transcript and check it matches
    #[command(args_override_self = true)]
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::HevRun(_) => "hev-run",
            Self::HevsRun(_) => "hevs-run",
            Self::BsvRun(_) => "bsv-run",
            Self::Sweep(_) => "sweep",
            Self::Analytic(_) => "analytic",
            Self::Replay(_) => "replay",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Self::HevRun(a) => &a.common,
            Self::HevsRun(a) => &a.common,
            Self::BsvRun(a) => &a.common,
            Self::Sweep(a) => &a.common,
            Self::Analytic(a) => &a.common,
            Self::Replay(a) => &a.common,
        }
    }

    /// Every effective setting, in flag order, for echoing before a run.
    pub fn resolved(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        match self {
            Self::HevRun(a) => {
                a.electorate.push(&mut out);
                out.push(("group", a.group.to_string()));
            }
            Self::HevsRun(a) => {
                a.electorate.push(&mut out);
                out.push(("group", a.group.to_string()));
                out.push(("k", a.k.to_string()));
                out.push(("t-policy", a.t_policy.to_string()));
                out.push(("min-consistency", a.min_consistency.to_string()));
            }
            Self::BsvRun(a) => {
                a.electorate.push(&mut out);
                out.push(("rsa-bits", a.rsa_bits.to_string()));
                out.push(("sign-window", a.sign_window.to_string()));
                out.push(("post-window", a.post_window.to_string()));
                out.push(("anonymize", a.anonymize.to_string()));
            }
            Self::Sweep(a) => {
                out.push(("n", a.n.to_string()));
                out.push(("p-fail", a.p_fail.to_string()));
                out.push(("k", a.k.to_string()));
                out.push(("min-consistency", a.min_consistency.to_string()));
                out.push(("t-policy", a.t_policy.to_string()));
                out.push(("trials", a.trials.to_string()));
                out.push(("seeds", a.seeds.to_string()));
                out.push(("mode", a.mode.to_string()));
                out.push(("behavior", a.behavior.to_string()));
            }
            Self::Analytic(a) => {
                out.push(("n", a.n.to_string()));
                out.push(("m", a.m.to_string()));
                out.push(("t", a.t.to_string()));
            }
            Self::Replay(a) => out.push(("transcript", a.transcript.display().to_string())),
        }
        let common = self.common();
        if let Some(p) = &common.config {
            out.push(("config", p.display().to_string()));
        }
        if let Some(p) = &common.output {
            out.push(("output", p.display().to_string()));
        }
        out
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` file of flag values; command-line flags win
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Write results to this file instead of standard output
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Electorate {
    /// Number of voters
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Comma-separated 0/1 votes for V1..Vn [default: drawn from the seed]
    #[arg(long, value_name = "LIST")]
    pub votes: Option<List<u64>>,
    /// Probability that each voter is malicious
    #[arg(long, default_value_t = 0.0)]
    pub p_fail: f64,
    /// Malicious behavior: fake-share, silent or extra-vote:N
    #[arg(long, default_value = "fake-share")]
    pub behavior: Behavior,
    /// Master seed for roles, votes, sampling, keys and delivery order
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also write the election transcript (TSV) to this file
    #[arg(long, value_name = "PATH")]
    pub transcript: Option<PathBuf>,
}

impl Electorate {
    fn push(&self, out: &mut Vec<(&'static str, String)>) {
        out.push(("n", self.n.to_string()));
        out.push((
            "votes",
            self.votes.as_ref().map_or_else(|| "random".to_owned(), List::to_string),
        ));
        out.push(("p-fail", self.p_fail.to_string()));
        out.push(("behavior", self.behavior.to_string()));
        out.push(("seed", self.seed.to_string()));
        if let Some(p) = &self.transcript {
            out.push(("transcript", p.display().to_string()));
        }
    }
}

#[derive(Debug, Args)]
pub struct HevArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub electorate: Electorate,
    /// Group: tiny, default256 or bits:N (generated from the seed)
    #[arg(long, default_value = "default256")]
    pub group: GroupChoice,
}

#[derive(Debug, Args)]
pub struct HevsArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub electorate: Electorate,
    /// Group: tiny, default256 or bits:N (generated from the seed)
    #[arg(long, default_value = "default256")]
    pub group: GroupChoice,
    /// Number of sampled public keys
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    /// Sample size per key: half, log2, sqrt or a fixed count
    #[arg(long, default_value = "half")]
    pub t_policy: SampleSizePolicy,
    /// Consistent samples needed for a decision
    #[arg(long, default_value_t = 2)]
    pub min_consistency: usize,
}

#[derive(Debug, Args)]
pub struct BsvArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub electorate: Electorate,
    /// RSA modulus size of the signing authority
    #[arg(long, default_value_t = 512)]
    pub rsa_bits: u64,
    /// Rounds during which blinded ballots are signed, as START..END
    #[arg(long, default_value = "0..8")]
    pub sign_window: Window,
    /// Rounds during which the ledger accepts ballots, as START..END
    #[arg(long, default_value = "8..16")]
    pub post_window: Window,
    /// Strip sender ids from ledger submissions
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub anonymize: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Electorate sizes
    #[arg(long, default_value = "50,100,200,500")]
    pub n: List<usize>,
    /// Malicious probabilities
    #[arg(long, default_value = "0.01,0.1,0.3,0.6")]
    pub p_fail: List<f64>,
    /// Sampling counts
    #[arg(long, default_value = "1,2,4,6,8,12,16,24,32")]
    pub k: List<usize>,
    /// Consistency thresholds
    #[arg(long, default_value = "2,3")]
    pub min_consistency: List<usize>,
    /// Sample size per key: half, log2, sqrt or a fixed count
    #[arg(long, default_value = "log2")]
    pub t_policy: SampleSizePolicy,
    /// Trials per grid point and seed
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Seeds to average over
    #[arg(long, default_value = "1,2,3")]
    pub seeds: List<u64>,
    /// Trial mode: symbolic or full
    #[arg(long, default_value = "symbolic")]
    pub mode: TrialMode,
    /// Malicious behavior: fake-share, silent or extra-vote:N
    #[arg(long, default_value = "fake-share")]
    pub behavior: Behavior,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub common: Common,
    /// Electorate sizes
    #[arg(long, default_value = "50")]
    pub n: List<i64>,
    /// Malicious voter counts
    #[arg(long, default_value = "5")]
    pub m: List<i64>,
    /// Sample size
    #[arg(long, default_value_t = 25)]
    pub t: i64,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[command(flatten)]
    pub common: Common,
    /// Transcript written by an earlier run
    #[arg(long, value_name = "PATH")]
    pub transcript: PathBuf,
}

/// Comma-separated values.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|item| item.trim().parse().map_err(|_| format!("bad list item {item:?}")))
            .collect::<Result<Vec<T>, _>>()
            .map(List)
    }
}

impl<T: fmt::Display> fmt::Display for List<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(T::to_string).collect();
        f.write_str(&items.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupChoice {
    Tiny,
    Default256,
    Bits(u64),
}

impl FromStr for GroupChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tiny" => Ok(Self::Tiny),
            "default256" => Ok(Self::Default256),
            _ => s
                .strip_prefix("bits:")
                .and_then(|b| b.parse().ok())
                .map(Self::Bits)
                .ok_or_else(|| format!("unknown group {s:?} (expected tiny, default256 or bits:N)")),
        }
    }
}

impl fmt::Display for GroupChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Tiny => f.write_str("tiny"),
            Self::Default256 => f.write_str("default256"),
            Self::Bits(b) => write!(f, "bits:{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window(pub Range<u64>);

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parsed = s
            .split_once("..")
            .and_then(|(a, b)| Some(a.parse().ok()?..b.parse().ok()?));
        parsed
            .map(Window)
            .ok_or_else(|| format!("bad window {s:?} (expected START..END)"))
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.0.start, self.0.end)
    }
}
