//! Monte Carlo accuracy sweeps for sampled HEV.
//!
//! A trial is one HEVS election; it is correct when the mode decision equals
//! the honest-sum ground truth. Trials run either with full cryptography
//! through [`simnet`](crate::simnet) or symbolically: each sample that
//! contains a disrupting voter gets a distinct garbage value (or no value,
//! for silence), all other samples get the true tally. Both modes draw
//! roles, votes and sampling plans from the same seeded streams, so they
//! see identical elections.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::adversary::{Behavior, VoterRole};
use crate::group::{GroupElement, GroupParams, Scalar};
use crate::hev::{self, Ciphertext, DecryptionShare, KeyShare, VoterId};
use crate::hevs::{self, HevsError, SampleSizePolicy, SamplingPlan};
use crate::simnet::{self, stream_rng, ElectionConfig, Protocol, Stream};

pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_SEEDS: [u64; 3] = [1, 2, 3];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExperimentError {
    #[error("invalid trial configuration: {0}")]
    InvalidConfig(String),
    #[error("empty sweep grid")]
    EmptyGrid,
    #[error("unknown trial mode {0:?} (expected full or symbolic)")]
    UnknownMode(String),
    #[error(transparent)]
    Hevs(#[from] HevsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TrialMode {
    Full,
    #[default]
    Symbolic,
}

impl fmt::Display for TrialMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Full => "full",
            Self::Symbolic => "symbolic",
        })
    }
}

impl FromStr for TrialMode {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Self::Full),
            "symbolic" => Ok(Self::Symbolic),
            other => Err(ExperimentError::UnknownMode(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub n: usize,
    pub p_fail: f64,
    pub k: usize,
    pub t_policy: SampleSizePolicy,
    pub min_consistency: usize,
    /// Trials per seed.
    pub trials: usize,
    pub seeds: Vec<u64>,
    pub mode: TrialMode,
    pub behavior: Behavior,
}

impl TrialConfig {
    pub fn new(n: usize, p_fail: f64, k: usize) -> Self {
        Self {
            n,
            p_fail,
            k,
            t_policy: SampleSizePolicy::default(),
            min_consistency: 2,
            trials: DEFAULT_TRIALS,
            seeds: DEFAULT_SEEDS.to_vec(),
            mode: TrialMode::default(),
            behavior: Behavior::FakeShare,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::InvalidConfig(m.to_owned()));
        if self.n == 0 {
            return bad("n must be at least 1");
        }
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.p_fail) {
            return bad("p_fail must lie in [0, 1]");
        }
        if self.min_consistency < 2 {
            return bad("min_consistency must be at least 2");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        Ok(())
    }

    /// Sample size used for every key.
    pub fn t(&self) -> usize {
        self.t_policy.sample_size(self.n)
    }
}

/// Seed of trial number `trial` under base seed `seed`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng.next_u64()
}

fn full_group() -> &'static GroupParams {
    static GROUP: OnceLock<GroupParams> = OnceLock::new();
    GROUP.get_or_init(GroupParams::default_256)
}

/// One HEVS election under `config`, driven by `seed`. Protocol failures
/// count as incorrect.
pub fn run_trial(config: &TrialConfig, seed: u64) -> bool {
    run_trial_with_roles(config, seed, None)
}

/// As [`run_trial`], with fixed roles instead of drawing them with `p_fail`.
pub fn run_trial_with_roles(config: &TrialConfig, seed: u64, roles: Option<Vec<VoterRole>>) -> bool {
    match config.mode {
        TrialMode::Symbolic => symbolic_trial(config, seed, roles),
        TrialMode::Full => full_trial(config, seed, roles),
    }
}

fn full_trial(config: &TrialConfig, seed: u64, roles: Option<Vec<VoterRole>>) -> bool {
    let mut election = ElectionConfig::new(Protocol::Hevs, config.n, full_group().clone(), seed);
    election.k = config.k;
    election.t_policy = config.t_policy;
    election.min_consistency = config.min_consistency;
    election.p_fail = config.p_fail;
    election.behavior = config.behavior;
    election.roles = roles;
    simnet::run_election(&election).is_ok_and(|o| o.is_correct())
}

fn symbolic_trial(config: &TrialConfig, seed: u64, roles: Option<Vec<VoterRole>>) -> bool {
    let n = config.n;
    let roles = match roles {
        Some(r) => r,
        None => match simnet::draw_roles(seed, n, config.p_fail, config.behavior) {
            Ok(r) => r,
            Err(_) => return false,
        },
    };
    let votes = simnet::draw_votes(seed, n);
    let Ok(plan) = hevs::make_sampling_plan(&mut stream_rng(seed, Stream::Plan), n, config.k, config.t_policy) else {
        return false;
    };
    let truth: u64 = roles
        .iter()
        .zip(&votes)
        .filter(|(r, _)| r.honest)
        .map(|(_, &v)| v)
        .sum();
    symbolic_decision(&roles, &plan, truth, config.min_consistency) == Ok(truth)
}

/// Mode decision over symbolic sample outcomes.
///
/// Every voter's extra votes land in every aggregate, so clean samples
/// decode to `truth + extra` (or nothing beyond the `n` bound). A sample
/// with a faking voter gets a value unique to that sample; one with a
/// silent voter gets none.
pub fn symbolic_decision(
    roles: &[VoterRole],
    plan: &SamplingPlan,
    truth: u64,
    min_consistency: usize,
) -> Result<u64, HevsError> {
    let n = plan.n() as u64;
    let extra: u64 = roles
        .iter()
        .filter(|r| !r.honest)
        .filter_map(|r| match r.behavior {
            Some(Behavior::ExtraVote(v)) => Some(v),
            _ => None,
        })
        .sum();
    let clean = Some(truth + extra).filter(|&t| t <= n);
    let candidates = (0..plan.k()).map(|j| {
        let members = plan.multiset(j).expect("j < k");
        let disruptors = members
            .iter()
            .map(|id| roles[id.0 as usize - 1])
            .filter(|r| r.disrupts_decryption());
        let mut fakes = false;
        for r in disruptors {
            if r.behavior == Some(Behavior::Silent) {
                return None;
            }
            fakes = true;
        }
        if fakes {
            Some(n + 1 + j as u64)
        } else {
            clean
        }
    });
    hevs::mode_decision(candidates, min_consistency)
}

/// One grid point's result.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub p_fail: f64,
    pub k: usize,
    pub min_consistency: usize,
    pub t: usize,
    pub trials: usize,
    pub seeds: usize,
    /// Mean over seeds of the per-seed fraction of correct trials.
    pub accuracy: f64,
    pub mode: TrialMode,
}

/// Accuracy at one grid point.
pub fn run_point(config: &TrialConfig) -> Result<SweepRow, ExperimentError> {
    config.validate()?;
    let per_seed: Vec<usize> = config
        .seeds
        .iter()
        .map(|&seed| {
            (0..config.trials as u64)
                .into_par_iter()
                .filter(|&i| run_trial(config, trial_seed(seed, i)))
                .count()
        })
        .collect();
    let accuracy = per_seed.iter().map(|&c| c as f64 / config.trials as f64).sum::<f64>() / per_seed.len() as f64;
    Ok(SweepRow {
        n: config.n,
        p_fail: config.p_fail,
        k: config.k,
        min_consistency: config.min_consistency,
        t: config.t(),
        trials: config.trials,
        seeds: config.seeds.len(),
        accuracy,
        mode: config.mode,
    })
}

/// One row per grid point, in grid order.
pub fn run_sweep(grid: &[TrialConfig]) -> Result<Vec<SweepRow>, ExperimentError> {
    if grid.is_empty() {
        return Err(ExperimentError::EmptyGrid);
    }
    grid.iter().try_for_each(TrialConfig::validate)?;
    grid.par_iter().map(run_point).collect()
}

/// Cartesian sweep description; expands with `min_consistency` outermost
/// and `n` innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub n: Vec<usize>,
    pub p_fail: Vec<f64>,
    pub k: Vec<usize>,
    pub min_consistency: Vec<usize>,
    pub t_policy: SampleSizePolicy,
    pub trials: usize,
    pub seeds: Vec<u64>,
    pub mode: TrialMode,
    pub behavior: Behavior,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            n: vec![50, 100, 200, 500],
            p_fail: vec![0.01, 0.1, 0.3, 0.6],
            k: vec![1, 2, 4, 6, 8, 12, 16, 24, 32],
            min_consistency: vec![2, 3],
            t_policy: SampleSizePolicy::Log2Ceil,
            trials: DEFAULT_TRIALS,
            seeds: DEFAULT_SEEDS.to_vec(),
            mode: TrialMode::Symbolic,
            behavior: Behavior::FakeShare,
        }
    }
}

impl SweepGrid {
    pub fn configs(&self) -> Vec<TrialConfig> {
        let mut out = Vec::new();
        for &min_consistency in &self.min_consistency {
            for &p_fail in &self.p_fail {
                for &k in &self.k {
                    for &n in &self.n {
                        out.push(TrialConfig {
                            n,
                            p_fail,
                            k,
                            t_policy: self.t_policy,
                            min_consistency,
                            trials: self.trials,
                            seeds: self.seeds.clone(),
                            mode: self.mode,
                            behavior: self.behavior,
                        });
                    }
                }
            }
        }
        out
    }
}

pub const SWEEP_CSV_HEADER: &str = "n,p_fail,k,min_consistency,t,trials,seeds,accuracy,mode";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.n,
            format_sig6(r.p_fail),
            r.k,
            r.min_consistency,
            r.t,
            r.trials,
            r.seeds,
            format_sig6(r.accuracy),
            r.mode
        ));
    }
    out
}

/// Six significant digits, trailing zeros dropped (`%g` without exponents).
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".to_owned() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticRow {
    pub n: i64,
    pub m: i64,
    pub t: i64,
    /// `C(n - m, t) / C(n, t)`.
    pub without_replacement: f64,
    /// `((n - m) / n)^t`.
    pub with_replacement: f64,
}

/// Reliability of a single sample for every `(n, m)` pair; pairs with
/// `m > n >= 0` are skipped, negative inputs are domain errors.
pub fn analytic_table(ns: &[i64], ms: &[i64], t: i64) -> Result<Vec<AnalyticRow>, ExperimentError> {
    let mut rows = Vec::new();
    for &n in ns {
        for &m in ms.iter().filter(|&&m| n < 0 || m <= n) {
            rows.push(AnalyticRow {
                n,
                m,
                t,
                without_replacement: hevs::reliability_probability(n, m, t)?,
                with_replacement: hevs::with_replacement_reliability(n, m, t)?,
            });
        }
    }
    Ok(rows)
}

pub const ANALYTIC_CSV_HEADER: &str = "n,m,t,without_replacement,with_replacement";

pub fn analytic_csv(rows: &[AnalyticRow]) -> String {
    let mut out = format!("{ANALYTIC_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            r.m,
            r.t,
            format_sig6(r.without_replacement),
            format_sig6(r.with_replacement)
        ));
    }
    out
}

/// Fraction of `trials` single samples of size `t` (drawn with
/// replacement from `n` voters) that avoid a fixed set of `m` malicious
/// voters.
pub fn empirical_sample_reliability(
    n: usize,
    m: usize,
    t: usize,
    trials: usize,
    seed: u64,
) -> Result<f64, ExperimentError> {
    if m > n || trials == 0 {
        return Err(ExperimentError::InvalidConfig("need m <= n and trials >= 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut clean = 0usize;
    for _ in 0..trials {
        let plan = hevs::make_sampling_plan(&mut rng, n, 1, SampleSizePolicy::Fixed(t))?;
        if plan.multiset(0)?.iter().all(|id| id.0 as usize > m) {
            clean += 1;
        }
    }
    Ok(clean as f64 / trials as f64)
}

/// One run of the two-sample distinctness construction: samples `e` and
/// `f` both contain voter `V1`, who answers both with the same fake
/// exponent `rd`; everyone else answers honestly and the two samples'
/// encryption randomness sums differ. Returns whether `o^(e) != o^(f)`.
pub fn distinct_garbage_trial<R: RngCore + ?Sized>(rng: &mut R, params: &GroupParams, n: usize) -> bool {
    assert!(n >= 2, "construction needs at least two voters");
    let shares: Vec<KeyShare> = VoterId::range(n).map(|id| hev::keygen_share(rng, params, id)).collect();
    let pieces: Vec<GroupElement> = shares.iter().map(|s| s.public_piece.clone()).collect();
    let votes: Vec<u64> = (0..n).map(|_| rng.next_u32() as u64 & 1).collect();
    let t = n.div_ceil(2).max(2);
    let mut multisets: Vec<Vec<VoterId>> = Vec::with_capacity(2);
    for _ in 0..2 {
        let mut ms = vec![VoterId(1)];
        ms.extend((1..t).map(|_| VoterId(1 + (rng.next_u32() % n as u32))));
        multisets.push(ms);
    }
    let plan = SamplingPlan::new(n, multisets).expect("indices drawn in range");
    let rd: Scalar = loop {
        let rd = params.random_scalar(rng);
        if &rd != shares[0].secret() {
            break rd;
        }
    };

    let mut outcomes = Vec::with_capacity(2);
    let mut r_sums = Vec::with_capacity(2);
    for j in 0..2 {
        let key = hevs::combine_sampled_public_key(params, &pieces, &plan, j).expect("valid plan");
        let rs: Vec<Scalar> = (0..n).map(|_| params.random_exponent(rng)).collect();
        let ballots: Vec<Ciphertext> = votes
            .iter()
            .zip(&rs)
            .map(|(&v, r)| hev::encrypt_with_randomness(params, &key.public_key, hev::Vote::new(v).expect("0/1"), r))
            .collect();
        r_sums.push(
            rs.iter()
                .fold(params.scalar_u64(0), |acc, r| params.scalar_add(&acc, r)),
        );
        let agg = hev::aggregate(params, &ballots).expect("non-empty");
        let answers: Vec<DecryptionShare> = key
            .multiplicity
            .keys()
            .map(|&id| {
                let secret = if id == VoterId(1) {
                    &rd
                } else {
                    shares[id.0 as usize - 1].secret()
                };
                crate::adversary::fake_share_with_exponent(params, id, &agg.x, secret)
            })
            .collect();
        let result = hevs::combine_sampled_decrypt(params, &answers, &plan, j, &agg.y).expect("all shares present");
        outcomes.push(result.outcome.expect("shares complete"));
    }
    if r_sums[0] == r_sums[1] {
        // Outside the construction's hypothesis; draw again.
        return distinct_garbage_trial(rng, params, n);
    }
    outcomes[0] != outcomes[1]
}
