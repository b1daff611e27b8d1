//! HEV with k-fold sampled public keys.
//!
//! The government draws `k` multisets of voter indices (with replacement),
//! builds one public key per multiset, and every voter encrypts its vote
//! under all `k` keys. Each sampled key is decrypted only by the voters in
//! its multiset, with each share raised to the voter's multiplicity. A
//! malicious voter in a sample corrupts that sample's outcome; the final
//! result is the mode over samples, required to repeat at least
//! `min_consistency` times.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::group::{GroupElement, GroupParams};
use crate::hev::{self, Ciphertext, DecryptionRequest, DecryptionShare, GovernmentPhase, HevError, VoterId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HevsError {
    #[error("invalid sampling plan: {0}")]
    InvalidPlan(&'static str),
    #[error("sample {j}: missing decryption shares from {}", missing.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(", "))]
    MissingShares { j: usize, missing: Vec<VoterId> },
    #[error("no result repeats at least {min_consistency} times (best count {best_count})")]
    NoConsistentResult { best_count: usize, min_consistency: usize },
    #[error("{tied} results tie for the mode with count {count}")]
    AmbiguousMode { count: usize, tied: usize },
    #[error("min_consistency must be at least 2, got {0}")]
    InvalidMinConsistency(usize),
    #[error("reliability domain error: {0}")]
    Domain(&'static str),
    #[error("no sample with index {0}")]
    SampleIndexOutOfRange(usize),
    #[error("unknown sample-size policy {0:?}")]
    UnknownPolicy(String),
    #[error(transparent)]
    Hev(#[from] HevError),
}

/// How many pieces `t_j` each sampled key combines, as a function of `n`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SampleSizePolicy {
    /// `ceil(n / 2)`.
    #[default]
    HalfCeil,
    /// `ceil(log2 n)`, at least 1.
    Log2Ceil,
    /// `ceil(sqrt n)`.
    SqrtCeil,
    Fixed(usize),
}

impl SampleSizePolicy {
    pub fn sample_size(self, n: usize) -> usize {
        let t = match self {
            SampleSizePolicy::HalfCeil => n.div_ceil(2),
            SampleSizePolicy::Log2Ceil => {
                if n <= 1 {
                    1
                } else {
                    (usize::BITS - (n - 1).leading_zeros()) as usize
                }
            }
            SampleSizePolicy::SqrtCeil => {
                let mut r = (n as f64).sqrt() as usize;
                while r * r < n {
                    r += 1;
                }
                while r > 0 && (r - 1) * (r - 1) >= n {
                    r -= 1;
                }
                r
            }
            SampleSizePolicy::Fixed(t) => t,
        };
        t.max(1)
    }
}

impl fmt::Display for SampleSizePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleSizePolicy::HalfCeil => f.write_str("half"),
            SampleSizePolicy::Log2Ceil => f.write_str("log2"),
            SampleSizePolicy::SqrtCeil => f.write_str("sqrt"),
            SampleSizePolicy::Fixed(t) => write!(f, "{t}"),
        }
    }
}

impl FromStr for SampleSizePolicy {
    type Err = HevsError;

    /// `half`, `log2`, `sqrt`, or a positive integer.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "half" => Ok(SampleSizePolicy::HalfCeil),
            "log2" => Ok(SampleSizePolicy::Log2Ceil),
            "sqrt" => Ok(SampleSizePolicy::SqrtCeil),
            other => match other.parse::<usize>() {
                Ok(t) if t >= 1 => Ok(SampleSizePolicy::Fixed(t)),
                _ => Err(HevsError::UnknownPolicy(other.to_owned())),
            },
        }
    }
}

/// `k` multisets of voter ids, one per sampled key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingPlan {
    n: usize,
    multisets: Vec<Vec<VoterId>>,
}

impl SamplingPlan {
    pub fn new(n: usize, multisets: Vec<Vec<VoterId>>) -> Result<Self, HevsError> {
        if n == 0 {
            return Err(HevsError::InvalidPlan("n must be at least 1"));
        }
        if multisets.is_empty() {
            return Err(HevsError::InvalidPlan("k must be at least 1"));
        }
        for m in &multisets {
            if m.is_empty() {
                return Err(HevsError::InvalidPlan("empty multiset"));
            }
            if m.iter().any(|id| id.0 == 0 || id.0 as usize > n) {
                return Err(HevsError::InvalidPlan("voter index outside [1, n]"));
            }
        }
        Ok(Self { n, multisets })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.multisets.len()
    }

    pub fn multisets(&self) -> &[Vec<VoterId>] {
        &self.multisets
    }

    pub fn multiset(&self, j: usize) -> Result<&[VoterId], HevsError> {
        self.multisets
            .get(j)
            .map(Vec::as_slice)
            .ok_or(HevsError::SampleIndexOutOfRange(j))
    }

    /// Voter id -> number of times it was drawn into sample `j`.
    pub fn multiplicity(&self, j: usize) -> Result<BTreeMap<VoterId, u64>, HevsError> {
        let mut counts = BTreeMap::new();
        for id in self.multiset(j)? {
            *counts.entry(*id).or_insert(0) += 1;
        }
        Ok(counts)
    }

    /// Distinct voters of sample `j`, ascending.
    pub fn participants(&self, j: usize) -> Result<Vec<VoterId>, HevsError> {
        Ok(self.multiplicity(j)?.into_keys().collect())
    }
}

/// Draws `k` multisets of size `policy.sample_size(n)` uniformly with
/// replacement from `V1..=Vn`.
pub fn make_sampling_plan<R: RngCore + ?Sized>(
    rng: &mut R,
    n: usize,
    k: usize,
    policy: SampleSizePolicy,
) -> Result<SamplingPlan, HevsError> {
    if n == 0 {
        return Err(HevsError::InvalidPlan("n must be at least 1"));
    }
    if k == 0 {
        return Err(HevsError::InvalidPlan("k must be at least 1"));
    }
    let t = policy.sample_size(n);
    let multisets = (0..k)
        .map(|_| (0..t).map(|_| VoterId(rng.gen_range(1..=n as u32))).collect())
        .collect();
    SamplingPlan::new(n, multisets)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledKey {
    pub j: usize,
    pub public_key: GroupElement,
    pub multiplicity: BTreeMap<VoterId, u64>,
}

/// `pK^(j)`: product of the sampled pieces, counting repeats.
/// `pieces[i - 1]` is voter `Vi`'s piece.
pub fn combine_sampled_public_key(
    params: &GroupParams,
    pieces: &[GroupElement],
    plan: &SamplingPlan,
    j: usize,
) -> Result<SampledKey, HevsError> {
    if pieces.len() != plan.n() {
        return Err(HevsError::InvalidPlan("piece count differs from n"));
    }
    let multiplicity = plan.multiplicity(j)?;
    let public_key = params.product(plan.multiset(j)?.iter().map(|id| &pieces[id.0 as usize - 1]));
    Ok(SampledKey {
        j,
        public_key,
        multiplicity,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleResult {
    pub j: usize,
    /// `o^(j)`; `None` when shares were missing and no outcome exists.
    pub outcome: Option<GroupElement>,
    /// Bounded-dlog decode of the outcome, `None` if nothing in `[0, n]` matches.
    pub tally: Option<u64>,
}

/// `o^(j) = Y_R^(j) / prod_i X_hat_i^(mult_i)` over the distinct voters of
/// sample `j`.
pub fn combine_sampled_decrypt(
    params: &GroupParams,
    shares: &[DecryptionShare],
    plan: &SamplingPlan,
    j: usize,
    y_r: &GroupElement,
) -> Result<SampleResult, HevsError> {
    let multiplicity = plan.multiplicity(j)?;
    let holders: BTreeSet<VoterId> = multiplicity.keys().copied().collect();
    let by_voter = hev::index_shares(shares, &holders).map_err(|e| match e {
        HevError::MissingShares { missing } => HevsError::MissingShares { j, missing },
        other => HevsError::Hev(other),
    })?;
    let powered: Vec<GroupElement> = by_voter
        .iter()
        .map(|(id, share)| params.exp_u64(&share.x_hat, multiplicity[id]))
        .collect();
    let w = params.product(&powered);
    let outcome = params.div(y_r, &w);
    let tally = params.discrete_log_bounded(&outcome, plan.n() as u64).ok();
    Ok(SampleResult {
        j,
        outcome: Some(outcome),
        tally,
    })
}

/// Most frequent present candidate, if it is the unique maximum and occurs
/// at least `min_consistency` times. Absent candidates never win.
pub fn mode_decision<T, I>(candidates: I, min_consistency: usize) -> Result<T, HevsError>
where
    T: Ord,
    I: IntoIterator<Item = Option<T>>,
{
    if min_consistency < 2 {
        return Err(HevsError::InvalidMinConsistency(min_consistency));
    }
    let mut counts: BTreeMap<T, usize> = BTreeMap::new();
    for c in candidates.into_iter().flatten() {
        *counts.entry(c).or_insert(0) += 1;
    }
    let best_count = counts.values().copied().max().unwrap_or(0);
    if best_count < min_consistency {
        return Err(HevsError::NoConsistentResult {
            best_count,
            min_consistency,
        });
    }
    let mut best = counts.into_iter().filter(|(_, c)| *c == best_count);
    let (value, _) = best.next().expect("best_count came from this map");
    let tied = 1 + best.count();
    if tied > 1 {
        return Err(HevsError::AmbiguousMode {
            count: best_count,
            tied,
        });
    }
    Ok(value)
}

/// Mode over the decoded tallies of `results`.
pub fn decide(results: &[SampleResult], min_consistency: usize) -> Result<u64, HevsError> {
    mode_decision(results.iter().map(|r| r.tally), min_consistency)
}

fn check_domain(n: i64, m: i64, t: i64) -> Result<(), HevsError> {
    if n < 0 || m < 0 || t < 0 {
        return Err(HevsError::Domain("n, m and t must be non-negative"));
    }
    if m > n {
        return Err(HevsError::Domain("m exceeds n"));
    }
    Ok(())
}

/// `C(n - m, t) / C(n, t)`: probability that `t` distinct voters drawn from
/// `n` avoid all `m` malicious ones. Zero when `t > n - m`.
pub fn reliability_probability(n: i64, m: i64, t: i64) -> Result<f64, HevsError> {
    check_domain(n, m, t)?;
    if t > n - m {
        return Ok(0.0);
    }
    // C(n-m, t) / C(n, t) = prod_{i<t} (n-m-i) / (n-i)
    Ok((0..t).map(|i| (n - m - i) as f64 / (n - i) as f64).product())
}

/// `((n - m) / n)^t`: the same probability when the `t` draws are made
/// with replacement, as the sampling plan does.
pub fn with_replacement_reliability(n: i64, m: i64, t: i64) -> Result<f64, HevsError> {
    check_domain(n, m, t)?;
    if n == 0 {
        return Err(HevsError::Domain("n must be positive"));
    }
    Ok(((n - m) as f64 / n as f64).powi(t as i32))
}

/// Government-side state machine for sampled HEV. Phases follow
/// [`GovernmentPhase`]; every step is applied to all `k` keys at once.
#[derive(Debug, Clone)]
pub struct SamplingGovernment {
    params: GroupParams,
    n: usize,
    phase: GovernmentPhase,
    pieces: BTreeMap<VoterId, GroupElement>,
    plan: Option<SamplingPlan>,
    keys: Vec<SampledKey>,
    ballots: BTreeMap<VoterId, Vec<Ciphertext>>,
    aggregates: Vec<Ciphertext>,
    shares: Vec<BTreeMap<VoterId, DecryptionShare>>,
}

/// A decryption request for sample `j`, addressed to its distinct voters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledRequest {
    pub j: usize,
    pub request: DecryptionRequest,
    pub recipients: Vec<VoterId>,
}

impl SamplingGovernment {
    pub fn new(params: GroupParams, n: usize) -> Self {
        Self {
            params,
            n,
            phase: GovernmentPhase::CollectingKeys,
            pieces: BTreeMap::new(),
            plan: None,
            keys: Vec::new(),
            ballots: BTreeMap::new(),
            aggregates: Vec::new(),
            shares: Vec::new(),
        }
    }

    pub fn phase(&self) -> GovernmentPhase {
        self.phase
    }

    pub fn plan(&self) -> Option<&SamplingPlan> {
        self.plan.as_ref()
    }

    fn check_voter(&self, id: VoterId) -> Result<(), HevError> {
        if id.0 == 0 || id.0 as usize > self.n {
            return Err(HevError::UnknownVoter(id));
        }
        Ok(())
    }

    pub fn receive_key_piece(&mut self, id: VoterId, piece: GroupElement) -> Result<(), HevsError> {
        self.phase
            .check(&[GovernmentPhase::CollectingKeys], "collecting-keys")?;
        self.check_voter(id)?;
        if self.pieces.insert(id, piece).is_some() {
            return Err(HevError::DuplicateMessage(id).into());
        }
        Ok(())
    }

    /// Builds `pK^(1..=k)` from `plan` once all pieces are in.
    pub fn broadcast_public_keys(&mut self, plan: SamplingPlan) -> Result<Vec<GroupElement>, HevsError> {
        self.phase
            .check(&[GovernmentPhase::CollectingKeys], "collecting-keys")?;
        if plan.n() != self.n {
            return Err(HevsError::InvalidPlan("plan built for a different n"));
        }
        let missing: Vec<VoterId> = VoterId::range(self.n)
            .filter(|id| !self.pieces.contains_key(id))
            .collect();
        if !missing.is_empty() {
            return Err(HevError::MissingKeyPieces { missing }.into());
        }
        let pieces: Vec<GroupElement> = self.pieces.values().cloned().collect();
        self.keys = (0..plan.k())
            .map(|j| combine_sampled_public_key(&self.params, &pieces, &plan, j))
            .collect::<Result<_, _>>()?;
        self.shares = vec![BTreeMap::new(); plan.k()];
        self.plan = Some(plan);
        self.phase = GovernmentPhase::Broadcast;
        Ok(self.keys.iter().map(|k| k.public_key.clone()).collect())
    }

    /// Accepts a voter's `k` ballots, one per sampled key.
    pub fn receive_ballots(&mut self, id: VoterId, ballots: Vec<Ciphertext>) -> Result<(), HevsError> {
        self.phase.check(
            &[GovernmentPhase::Broadcast, GovernmentPhase::CollectingVotes],
            "collecting-votes",
        )?;
        self.check_voter(id)?;
        if ballots.len() != self.keys.len() {
            return Err(HevsError::InvalidPlan("ballot count differs from k"));
        }
        if self.ballots.contains_key(&id) {
            return Err(HevError::DuplicateMessage(id).into());
        }
        self.ballots.insert(id, ballots);
        self.phase = GovernmentPhase::CollectingVotes;
        Ok(())
    }

    /// Aggregates each key's ballots (requires `R = n`) and addresses the
    /// requests to the sampled voters.
    pub fn decryption_requests(&mut self) -> Result<Vec<SampledRequest>, HevsError> {
        self.phase
            .check(&[GovernmentPhase::CollectingVotes], "collecting-votes")?;
        if self.ballots.len() != self.n {
            return Err(HevError::IncompleteTurnout {
                received: self.ballots.len(),
                expected: self.n,
            }
            .into());
        }
        let plan = self.plan.as_ref().expect("plan set at broadcast");
        let mut requests = Vec::with_capacity(plan.k());
        self.aggregates.clear();
        for j in 0..plan.k() {
            let column: Vec<Ciphertext> = self.ballots.values().map(|b| b[j].clone()).collect();
            let agg = hev::aggregate(&self.params, &column)?;
            requests.push(SampledRequest {
                j,
                request: DecryptionRequest::new(&agg),
                recipients: plan.participants(j)?,
            });
            self.aggregates.push(agg);
        }
        self.phase = GovernmentPhase::Aggregated;
        Ok(requests)
    }

    pub fn receive_share(&mut self, j: usize, share: DecryptionShare) -> Result<(), HevsError> {
        self.phase.check(
            &[GovernmentPhase::Aggregated, GovernmentPhase::CollectingShares],
            "collecting-shares",
        )?;
        let plan = self.plan.as_ref().expect("plan set at broadcast");
        if !plan.multiplicity(j)?.contains_key(&share.voter_id) {
            return Err(HevError::UnexpectedShare(share.voter_id).into());
        }
        let slot = &mut self.shares[j];
        if slot.contains_key(&share.voter_id) {
            return Err(HevError::DuplicateShare(share.voter_id).into());
        }
        slot.insert(share.voter_id, share);
        self.phase = GovernmentPhase::CollectingShares;
        Ok(())
    }

    /// Decrypts every sample. Samples with missing shares yield a result
    /// with neither outcome nor tally.
    pub fn finish(&mut self) -> Result<Vec<SampleResult>, HevsError> {
        self.phase.check(
            &[GovernmentPhase::Aggregated, GovernmentPhase::CollectingShares],
            "collecting-shares",
        )?;
        let plan = self.plan.as_ref().expect("plan set at broadcast");
        let mut results = Vec::with_capacity(plan.k());
        for (j, agg) in self.aggregates.iter().enumerate() {
            let shares: Vec<DecryptionShare> = self.shares[j].values().cloned().collect();
            match combine_sampled_decrypt(&self.params, &shares, plan, j, &agg.y) {
                Ok(r) => results.push(r),
                Err(HevsError::MissingShares { .. }) => results.push(SampleResult {
                    j,
                    outcome: None,
                    tally: None,
                }),
                Err(e) => return Err(e),
            }
        }
        self.phase = GovernmentPhase::Done;
        Ok(results)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hev::{encrypt_with_randomness, keygen_share, KeyShare, Vote};
    use num_bigint::BigUint;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn el(params: &GroupParams, v: u32) -> GroupElement {
        params.element(BigUint::from(v)).unwrap()
    }

    fn ids(v: &[u32]) -> Vec<VoterId> {
        v.iter().map(|&i| VoterId(i)).collect()
    }

    #[test]
    fn sample_size_policies() {
        assert_eq!(SampleSizePolicy::HalfCeil.sample_size(50), 25);
        assert_eq!(SampleSizePolicy::HalfCeil.sample_size(3), 2);
        assert_eq!(SampleSizePolicy::HalfCeil.sample_size(1), 1);
        assert_eq!(SampleSizePolicy::Log2Ceil.sample_size(1), 1);
        assert_eq!(SampleSizePolicy::Log2Ceil.sample_size(2), 1);
        assert_eq!(SampleSizePolicy::Log2Ceil.sample_size(50), 6);
        assert_eq!(SampleSizePolicy::Log2Ceil.sample_size(64), 6);
        assert_eq!(SampleSizePolicy::Log2Ceil.sample_size(65), 7);
        assert_eq!(SampleSizePolicy::Log2Ceil.sample_size(500), 9);
        assert_eq!(SampleSizePolicy::SqrtCeil.sample_size(100), 10);
        assert_eq!(SampleSizePolicy::SqrtCeil.sample_size(101), 11);
        assert_eq!(SampleSizePolicy::SqrtCeil.sample_size(500), 23);
        assert_eq!(SampleSizePolicy::Fixed(7).sample_size(3), 7);
        for p in ["half", "log2", "sqrt", "12"] {
            assert_eq!(p.parse::<SampleSizePolicy>().unwrap().to_string(), p);
        }
        assert!("0".parse::<SampleSizePolicy>().is_err());
        assert!("third".parse::<SampleSizePolicy>().is_err());
    }

    #[test]
    fn plan_shape_and_validation() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let plan = make_sampling_plan(&mut rng, 3, 2, SampleSizePolicy::Fixed(2)).unwrap();
        assert_eq!(plan.k(), 2);
        assert!(plan.multisets().iter().all(|m| m.len() == 2));
        let single = make_sampling_plan(&mut rng, 1, 4, SampleSizePolicy::Fixed(5)).unwrap();
        assert!(single.multisets().iter().flatten().all(|id| *id == VoterId(1)));
        assert!(make_sampling_plan(&mut rng, 0, 1, SampleSizePolicy::HalfCeil).is_err());
        assert!(make_sampling_plan(&mut rng, 1, 0, SampleSizePolicy::HalfCeil).is_err());
        assert!(SamplingPlan::new(3, vec![ids(&[1, 4])]).is_err());
        assert!(SamplingPlan::new(3, vec![vec![]]).is_err());
        // duplicates are legal
        let dup = SamplingPlan::new(3, vec![ids(&[1, 1]), ids(&[2, 3])]).unwrap();
        assert_eq!(dup.multiplicity(0).unwrap()[&VoterId(1)], 2);
        assert_eq!(dup.participants(1).unwrap(), ids(&[2, 3]));
    }

    #[test]
    fn plan_draws_are_uniform() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let n = 5;
        let plan = make_sampling_plan(&mut rng, n, 10_000, SampleSizePolicy::Fixed(1)).unwrap();
        let mut counts = vec![0usize; n + 1];
        for id in plan.multisets().iter().flatten() {
            counts[id.0 as usize] += 1;
        }
        for c in &counts[1..] {
            let freq = *c as f64 / 10_000.0;
            assert!((freq - 0.2).abs() <= 0.02, "freq {freq}");
        }
    }

    #[test]
    fn sampled_public_keys() {
        let t = GroupParams::tiny();
        let pieces = vec![el(&t, 8), el(&t, 9), el(&t, 4)];
        let plan = SamplingPlan::new(3, vec![ids(&[1, 1]), ids(&[2, 3])]).unwrap();
        let k0 = combine_sampled_public_key(&t, &pieces, &plan, 0).unwrap();
        assert_eq!(k0.public_key, el(&t, 18));
        assert_eq!(k0.public_key, t.g_pow_u64(6));
        let k1 = combine_sampled_public_key(&t, &pieces, &plan, 1).unwrap();
        assert_eq!(k1.public_key, el(&t, 13));
        assert_eq!(k1.public_key, t.g_pow_u64(7));
        assert_eq!(
            combine_sampled_public_key(&t, &pieces, &plan, 2),
            Err(HevsError::SampleIndexOutOfRange(2))
        );
    }

    /// Runs the sampled protocol with explicit keys and plan; `fake` maps a
    /// voter to the exponent it substitutes for its secret.
    fn run_sampled(
        params: &GroupParams,
        votes: &[u64],
        plan: &SamplingPlan,
        fake: &BTreeMap<VoterId, u64>,
        rng: &mut ChaCha20Rng,
    ) -> Vec<SampleResult> {
        let n = votes.len();
        let shares: Vec<KeyShare> = VoterId::range(n).map(|id| keygen_share(rng, params, id)).collect();
        let pieces: Vec<_> = shares.iter().map(|s| s.public_piece.clone()).collect();
        (0..plan.k())
            .map(|j| {
                let key = combine_sampled_public_key(params, &pieces, plan, j).unwrap();
                let cts: Vec<_> = votes
                    .iter()
                    .map(|&v| hev::encrypt_vote(params, &key.public_key, Vote::new(v).unwrap(), rng))
                    .collect();
                let agg = hev::aggregate(params, &cts).unwrap();
                let dshares: Vec<_> = plan
                    .participants(j)
                    .unwrap()
                    .into_iter()
                    .map(|id| {
                        let exponent = match fake.get(&id) {
                            Some(&rd) => params.scalar_u64(rd),
                            None => shares[id.0 as usize - 1].secret().clone(),
                        };
                        DecryptionShare {
                            voter_id: id,
                            x_hat: params.exp(&agg.x, &exponent),
                        }
                    })
                    .collect();
                combine_sampled_decrypt(params, &dshares, plan, j, &agg.y).unwrap()
            })
            .collect()
    }

    #[test]
    fn honest_samples_decode_true_tally_exhaustively() {
        let d = GroupParams::default_256();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for n in 1..=5usize {
            for mask in 0u32..(1 << n) {
                let votes: Vec<u64> = (0..n).map(|i| ((mask >> i) & 1) as u64).collect();
                let plan = make_sampling_plan(&mut rng, n, 2, SampleSizePolicy::HalfCeil).unwrap();
                let results = run_sampled(&d, &votes, &plan, &BTreeMap::new(), &mut rng);
                let truth: u64 = votes.iter().sum();
                assert!(results.iter().all(|r| r.tally == Some(truth)));
            }
        }
    }

    #[test]
    fn fake_share_corrupts_its_sample() {
        let d = GroupParams::default_256();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let plan = SamplingPlan::new(4, vec![ids(&[1, 2]), ids(&[3, 4]), ids(&[2, 3, 3])]).unwrap();
        let fake = BTreeMap::from([(VoterId(3), 123_456_789u64)]);
        let results = run_sampled(&d, &[1, 0, 1, 1], &plan, &fake, &mut rng);
        assert_eq!(results[0].tally, Some(3));
        assert_ne!(results[1].tally, Some(3));
        assert_ne!(results[2].tally, Some(3));
        assert_eq!(
            decide(&results, 2),
            Err(HevsError::NoConsistentResult {
                best_count: 1,
                min_consistency: 2
            })
        );
    }

    #[test]
    fn repeated_voter_share_is_squared() {
        let t = GroupParams::tiny();
        let s1 = KeyShare::from_secret(&t, VoterId(1), t.scalar_u64(3)).unwrap();
        let s2 = KeyShare::from_secret(&t, VoterId(2), t.scalar_u64(5)).unwrap();
        let pieces = vec![s1.public_piece.clone(), s2.public_piece.clone()];
        let plan = SamplingPlan::new(2, vec![ids(&[1, 1])]).unwrap();
        let key = combine_sampled_public_key(&t, &pieces, &plan, 0).unwrap();
        let cts = [
            encrypt_with_randomness(&t, &key.public_key, Vote::FOR, &t.scalar_u64(4)),
            encrypt_with_randomness(&t, &key.public_key, Vote::FOR, &t.scalar_u64(2)),
        ];
        let agg = hev::aggregate(&t, &cts).unwrap();
        let share = DecryptionShare {
            voter_id: VoterId(1),
            x_hat: t.exp(&agg.x, s1.secret()),
        };
        let r = combine_sampled_decrypt(&t, std::slice::from_ref(&share), &plan, 0, &agg.y).unwrap();
        assert_eq!(r.tally, Some(2));
        let w = t.mul(&share.x_hat, &share.x_hat);
        assert_eq!(r.outcome, Some(t.div(&agg.y, &w)));
        assert_eq!(
            combine_sampled_decrypt(&t, &[], &plan, 0, &agg.y),
            Err(HevsError::MissingShares {
                j: 0,
                missing: vec![VoterId(1)]
            })
        );
        let stray = DecryptionShare {
            voter_id: VoterId(2),
            x_hat: t.identity(),
        };
        assert_eq!(
            combine_sampled_decrypt(&t, &[share, stray], &plan, 0, &agg.y),
            Err(HevsError::Hev(HevError::UnexpectedShare(VoterId(2))))
        );
    }

    #[test]
    fn mode_examples() {
        let some = |v: &[u64]| v.iter().map(|&x| Some(x)).collect::<Vec<_>>();
        assert_eq!(mode_decision(some(&[2, 2, 7, 9]), 2), Ok(2));
        assert_eq!(
            mode_decision(some(&[2, 2, 9, 9]), 2),
            Err(HevsError::AmbiguousMode { count: 2, tied: 2 })
        );
        assert_eq!(
            mode_decision(some(&[1, 2, 3]), 2),
            Err(HevsError::NoConsistentResult {
                best_count: 1,
                min_consistency: 2
            })
        );
        assert_eq!(
            mode_decision(some(&[4, 4, 5]), 3),
            Err(HevsError::NoConsistentResult {
                best_count: 2,
                min_consistency: 3
            })
        );
        assert_eq!(mode_decision(vec![None, None, Some(1u64), Some(1)], 2), Ok(1));
        assert_eq!(
            mode_decision(vec![None::<u64>, None, None], 2),
            Err(HevsError::NoConsistentResult {
                best_count: 0,
                min_consistency: 2
            })
        );
        assert_eq!(
            mode_decision(some(&[1, 1]), 1),
            Err(HevsError::InvalidMinConsistency(1))
        );
    }

    #[test]
    fn reliability_examples() {
        let p = reliability_probability(50, 5, 25).unwrap();
        assert!((p - 0.025).abs() <= 0.001, "{p}");
        // exact: (25*24*23*22*21) / (50*49*48*47*46)
        let exact = (25.0 * 24.0 * 23.0 * 22.0 * 21.0) / (50.0 * 49.0 * 48.0 * 47.0 * 46.0);
        assert!((p - exact).abs() < 1e-12);
        assert_eq!(reliability_probability(50, 0, 25).unwrap(), 1.0);
        assert!((reliability_probability(3, 1, 2).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(reliability_probability(10, 5, 6).unwrap(), 0.0);
        assert!(reliability_probability(-1, 0, 0).is_err());
        assert!(reliability_probability(5, 6, 0).is_err());
        let w = with_replacement_reliability(50, 5, 25).unwrap();
        assert!((w - 0.9f64.powi(25)).abs() < 1e-12);
    }

    #[test]
    fn reliability_is_monotone() {
        for n in 1..=60i64 {
            for t in 0..=n {
                let mut prev = f64::INFINITY;
                for m in 0..=n {
                    let p = reliability_probability(n, m, t).unwrap();
                    assert!(p <= prev + 1e-12);
                    prev = p;
                }
            }
            for m in 0..=n {
                let mut prev = f64::INFINITY;
                for t in 0..=n {
                    let p = reliability_probability(n, m, t).unwrap();
                    assert!(p <= prev + 1e-12);
                    prev = p;
                }
            }
        }
    }

    #[test]
    fn government_state_machine() {
        let d = GroupParams::default_256();
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let votes = [1u64, 1, 0, 1, 0, 0];
        let n = votes.len();
        let mut voters: Vec<hev::Voter> = VoterId::range(n)
            .zip(votes)
            .map(|(id, v)| hev::Voter::new(id, Vote::new(v).unwrap(), n))
            .collect();
        let mut gov = SamplingGovernment::new(d.clone(), n);
        for v in &mut voters {
            let piece = v.generate_key(&d, &mut rng).unwrap();
            gov.receive_key_piece(v.id(), piece).unwrap();
        }
        let plan = make_sampling_plan(&mut rng, n, 4, SampleSizePolicy::HalfCeil).unwrap();
        let keys = gov.broadcast_public_keys(plan).unwrap();
        for v in &mut voters {
            let ballots = v.cast(&d, &keys, &mut rng).unwrap();
            gov.receive_ballots(v.id(), ballots).unwrap();
        }
        let requests = gov.decryption_requests().unwrap();
        for req in &requests {
            for id in &req.recipients {
                let share = voters[id.0 as usize - 1].respond(&d, req.j, &req.request).unwrap();
                gov.receive_share(req.j, share).unwrap();
            }
        }
        let results = gov.finish().unwrap();
        assert_eq!(decide(&results, 2), Ok(3));
        assert_eq!(gov.phase(), GovernmentPhase::Done);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn mode_is_permutation_invariant(mut v in proptest::collection::vec(proptest::option::of(0u64..5), 0..12), rot in 0usize..12) {
            let before = mode_decision(v.clone(), 2);
            if !v.is_empty() {
                let r = rot % v.len();
                v.rotate_left(r);
            }
            v.reverse();
            prop_assert_eq!(before, mode_decision(v, 2));
        }

        #[test]
        fn honest_sampling_always_decides_truth(seed in any::<u64>(), n in 1usize..=20, k in 2usize..=10) {
            let d = GroupParams::default_256();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let votes: Vec<u64> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            let plan = make_sampling_plan(&mut rng, n, k, SampleSizePolicy::HalfCeil).unwrap();
            let results = run_sampled(&d, &votes, &plan, &BTreeMap::new(), &mut rng);
            prop_assert_eq!(decide(&results, 2), Ok(votes.iter().sum::<u64>()));
        }
    }
}
