use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use privote_core::bsv::PhaseWindows;
use privote_core::experiments::{self, SweepGrid};
use privote_core::simnet::{self, ElectionConfig, ElectionOutcome, Protocol, Transcript};
use privote_core::GroupParams;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::args::{Cli, Command, Electorate, GroupChoice};
use crate::CliError;

pub fn run(cli: Cli) -> Result<(), CliError> {
    let command = cli.command;
    let mut echo = format!("# privote {}\n", command.name());
    for (key, value) in command.resolved() {
        let _ = writeln!(echo, "{key} = {value}");
    }
    eprint!("{echo}");

    let output = command.common().output.clone();
    let (text, failure) = match command {
        Command::HevRun(a) => {
            let group = group(a.group, a.electorate.seed)?;
            election(config(Protocol::Hev, &a.electorate, group), &a.electorate)?
        }
        Command::HevsRun(a) => {
            let group = group(a.group, a.electorate.seed)?;
            let mut c = config(Protocol::Hevs, &a.electorate, group);
            c.k = a.k;
            c.t_policy = a.t_policy;
            c.min_consistency = a.min_consistency;
            election(c, &a.electorate)?
        }
        Command::BsvRun(a) => {
            let mut c = config(Protocol::Bsv, &a.electorate, GroupParams::tiny());
            c.rsa_bits = a.rsa_bits;
            c.schedule.windows =
                PhaseWindows::new(a.sign_window.0, a.post_window.0).map_err(|e| CliError::Config(e.to_string()))?;
            c.schedule.anonymize = a.anonymize;
            election(c, &a.electorate)?
        }
        Command::Sweep(a) => {
            let grid = SweepGrid {
                n: a.n.0,
                p_fail: a.p_fail.0,
                k: a.k.0,
                min_consistency: a.min_consistency.0,
                t_policy: a.t_policy,
                trials: a.trials,
                seeds: a.seeds.0,
                mode: a.mode,
                behavior: a.behavior,
            };
            let rows = experiments::run_sweep(&grid.configs()).map_err(|e| CliError::Config(e.to_string()))?;
            (experiments::sweep_csv(&rows), None)
        }
        Command::Analytic(a) => {
            let rows = experiments::analytic_table(&a.n.0, &a.m.0, a.t).map_err(|e| CliError::Config(e.to_string()))?;
            (experiments::analytic_csv(&rows), None)
        }
        Command::Replay(a) => {
            let text = read(&a.transcript)?;
            let transcript = Transcript::parse(&text).map_err(|e| CliError::Config(e.to_string()))?;
            let outcome = simnet::replay(&transcript).map_err(|e| CliError::Config(e.to_string()))?;
            let failure = outcome.decision.as_ref().err().map(ToString::to_string);
            (format!("replay: ok\n{}", describe(&outcome)), failure)
        }
    };

    match output {
        Some(path) => fs::write(&path, &text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    match failure {
        Some(f) => Err(CliError::Protocol(f)),
        None => Ok(()),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn group(choice: GroupChoice, seed: u64) -> Result<GroupParams, CliError> {
    match choice {
        GroupChoice::Tiny => Ok(GroupParams::tiny()),
        GroupChoice::Default256 => Ok(GroupParams::default_256()),
        GroupChoice::Bits(bits) => GroupParams::generate(bits, &mut ChaCha20Rng::seed_from_u64(seed))
            .map_err(|e| CliError::Config(e.to_string())),
    }
}

fn config(protocol: Protocol, e: &Electorate, group: GroupParams) -> ElectionConfig {
    let mut c = ElectionConfig::new(protocol, e.n, group, e.seed);
    c.votes = e.votes.as_ref().map(|v| v.0.clone());
    c.p_fail = e.p_fail;
    c.behavior = e.behavior;
    c
}

/// Runs the election, writes its transcript if asked, and returns the
/// report plus the failure message if no decision was reached.
fn election(config: ElectionConfig, e: &Electorate) -> Result<(String, Option<String>), CliError> {
    let outcome = simnet::run_election(&config).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(path) = &e.transcript {
        fs::write(path, outcome.transcript.to_tsv()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    let failure = outcome.decision.as_ref().err().map(ToString::to_string);
    Ok((describe(&outcome), failure))
}

fn describe(o: &ElectionOutcome) -> String {
    let mut s = String::new();
    let malicious: Vec<String> = o
        .roles
        .iter()
        .filter(|r| !r.honest)
        .map(|r| r.voter_id.to_string())
        .collect();
    let _ = writeln!(s, "protocol: {}", o.protocol);
    let _ = writeln!(s, "voters: {}", o.roles.len());
    let _ = writeln!(
        s,
        "malicious: {}",
        if malicious.is_empty() {
            "none".to_owned()
        } else {
            malicious.join(",")
        }
    );
    let _ = writeln!(s, "honest tally: {}", o.truth);
    for r in &o.samples {
        let what = match (&r.outcome, r.tally) {
            (_, Some(t)) => format!("tally {t}"),
            (Some(_), None) => "undecodable".to_owned(),
            (None, _) => "missing shares".to_owned(),
        };
        let _ = writeln!(s, "sample {}: {what}", r.j + 1);
    }
    if let Some(counts) = &o.ledger_counts {
        for (candidate, count) in counts {
            let _ = writeln!(s, "ledger {candidate}: {count}");
        }
    }
    match &o.decision {
        Ok(t) => {
            let _ = writeln!(s, "decision: {t}");
        }
        Err(e) => {
            let _ = writeln!(s, "decision: none ({e})");
        }
    }
    let _ = writeln!(s, "correct: {}", o.is_correct());
    s
}
