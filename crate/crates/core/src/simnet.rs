//! Deterministic round-based message transport for whole elections.
//!
//! [`run_election`] wires voters, the government and (for BSV) the ledger
//! together through an in-memory [`Network`] that only accepts messages
//! belonging to the current phase and delivers each round in a seeded
//! shuffled order. Every delivered message is written to a [`Transcript`].
//!
//! # Transcript format
//!
//! One record per line, four tab-separated fields in this order:
//!
//! ```text
//! phase <TAB> sender <TAB> receiver <TAB> kind:hex[,hex...]
//! ```
//!
//! Parties are `G` (government), `L` (ledger), `V<i>` (voter `i`), `*`
//! (everyone) and `anon` (sender stripped). Payload values are lowercase
//! hex: group elements and integers as numbers, text as UTF-8 bytes, and an
//! empty value for "absent". The first records (phase `setup`) hold the
//! full election configuration; the last records (phase `result`) hold
//! per-sample results, ledger counts and the decision.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::adversary::{self, assign_roles, AdversaryConfig, Behavior, VoterRole};
use crate::bsv::{self, Ballot, BlindingState, Ledger, PhaseWindows, Registry};
use crate::group::{parse_hex, GroupElement, GroupError, GroupParams};
use crate::hev::{Ciphertext, DecryptionRequest, Government, HevError, Voter, VoterId};
use crate::hevs::{self, HevsError, SampleResult, SampleSizePolicy, SamplingGovernment};

/// Candidate strings used by BSV ballots for votes 0 and 1.
pub const BSV_CANDIDATES: [&str; 2] = ["against", "for"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("invalid election configuration: {0}")]
    InvalidConfig(String),
    #[error("corrupt transcript at line {line}: {reason}")]
    CorruptTranscript { line: usize, reason: String },
}

fn invalid(msg: impl Into<String>) -> SimError {
    SimError::InvalidConfig(msg.into())
}

/// Structured protocol failure carried in an [`ElectionOutcome`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ElectionFailure {
    #[error("missing decryption shares from {missing:?}")]
    MissingShares { missing: Vec<VoterId> },
    #[error("decrypted outcome is not g^T for any T in [0, n]")]
    Undecodable,
    #[error("no tally reached {min_consistency} consistent samples (best {best_count})")]
    NoConsistentResult { best_count: usize, min_consistency: usize },
    #[error("{tied} tallies tied at {count} samples each")]
    AmbiguousMode { count: usize, tied: usize },
    #[error("phase violation: {0}")]
    PhaseViolation(String),
    #[error("protocol error: {0}")]
    Protocol(String),
}

impl From<HevError> for ElectionFailure {
    fn from(e: HevError) -> Self {
        match e {
            HevError::MissingShares { missing } => Self::MissingShares { missing },
            HevError::Group(GroupError::NotFound { .. }) => Self::Undecodable,
            other => Self::Protocol(other.to_string()),
        }
    }
}

impl From<HevsError> for ElectionFailure {
    fn from(e: HevsError) -> Self {
        match e {
            HevsError::NoConsistentResult {
                best_count,
                min_consistency,
            } => Self::NoConsistentResult {
                best_count,
                min_consistency,
            },
            HevsError::AmbiguousMode { count, tied } => Self::AmbiguousMode { count, tied },
            HevsError::Hev(e) => e.into(),
            other => Self::Protocol(other.to_string()),
        }
    }
}

impl From<bsv::BsvError> for ElectionFailure {
    fn from(e: bsv::BsvError) -> Self {
        Self::Protocol(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    Hev,
    Hevs,
    Bsv,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Hev => "hev",
            Self::Hevs => "hevs",
            Self::Bsv => "bsv",
        })
    }
}

impl FromStr for Protocol {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hev" => Ok(Self::Hev),
            "hevs" => Ok(Self::Hevs),
            "bsv" => Ok(Self::Bsv),
            other => Err(invalid(format!("unknown protocol {other:?}"))),
        }
    }
}

/// Independent random streams derived from one election seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Roles = 0,
    Plan = 1,
    Votes = 2,
    Crypto = 3,
    Delivery = 4,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Setup,
    Key,
    Broadcast,
    Vote,
    Decrypt,
    Sign,
    Post,
    Result,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Self::Setup => "setup",
            Self::Key => "key",
            Self::Broadcast => "broadcast",
            Self::Vote => "vote",
            Self::Decrypt => "decrypt",
            Self::Sign => "sign",
            Self::Post => "post",
            Self::Result => "result",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            Self::Setup,
            Self::Key,
            Self::Broadcast,
            Self::Vote,
            Self::Decrypt,
            Self::Sign,
            Self::Post,
            Self::Result,
        ]
        .into_iter()
        .find(|p| p.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PartyId {
    Government,
    Ledger,
    Voter(VoterId),
    Everyone,
    Anonymous,
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Government => f.write_str("G"),
            Self::Ledger => f.write_str("L"),
            Self::Voter(id) => write!(f, "{id}"),
            Self::Everyone => f.write_str("*"),
            Self::Anonymous => f.write_str("anon"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    KeyPiece(GroupElement),
    Broadcast { j: usize, key: GroupElement },
    Ciphertext { j: usize, ciphertext: Ciphertext },
    DecryptionRequest { j: usize, aggregate: Ciphertext },
    DecryptionShare { j: usize, x_hat: GroupElement },
    BlindRequest(BigUint),
    BlindSignature(BigUint),
    Ballot(Ballot),
}

impl Payload {
    pub fn phase(&self) -> Phase {
        match self {
            Self::KeyPiece(_) => Phase::Key,
            Self::Broadcast { .. } => Phase::Broadcast,
            Self::Ciphertext { .. } => Phase::Vote,
            Self::DecryptionRequest { .. } | Self::DecryptionShare { .. } => Phase::Decrypt,
            Self::BlindRequest(_) | Self::BlindSignature(_) => Phase::Sign,
            Self::Ballot(_) => Phase::Post,
        }
    }

    fn encode(&self) -> String {
        fn j_hex(j: usize) -> String {
            format!("{j:x}")
        }
        match self {
            Self::KeyPiece(pk) => format!("key-piece:{}", pk.to_hex()),
            Self::Broadcast { j, key } => format!("broadcast:{},{}", j_hex(*j), key.to_hex()),
            Self::Ciphertext { j, ciphertext } => format!(
                "ciphertext:{},{},{}",
                j_hex(*j),
                ciphertext.x.to_hex(),
                ciphertext.y.to_hex()
            ),
            Self::DecryptionRequest { j, aggregate } => format!(
                "decrypt-request:{},{},{}",
                j_hex(*j),
                aggregate.x.to_hex(),
                aggregate.y.to_hex()
            ),
            Self::DecryptionShare { j, x_hat } => format!("decrypt-share:{},{}", j_hex(*j), x_hat.to_hex()),
            Self::BlindRequest(b) => format!("blind-request:{b:x}"),
            Self::BlindSignature(s) => format!("blind-signature:{s:x}"),
            Self::Ballot(b) => format!(
                "ballot:{},{},{}",
                hex::encode(b.content()),
                b.nonce_hex(),
                b.signature.as_ref().map(|s| format!("{s:x}")).unwrap_or_default()
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub round: u64,
    pub from: PartyId,
    pub to: PartyId,
    pub payload: Payload,
}

/// Timing and delivery knobs. Only BSV uses the windows; HEV phases occupy
/// one round each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub windows: PhaseWindows,
    pub delivery_seed: u64,
    /// Strip sender ids from ledger submissions.
    pub anonymize: bool,
}

impl Schedule {
    pub fn new(delivery_seed: u64) -> Self {
        Self {
            windows: PhaseWindows::new(0..8, 8..16).expect("constant windows are disjoint"),
            delivery_seed,
            anonymize: true,
        }
    }
}

/// Everything that determines an election run.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectionConfig {
    pub protocol: Protocol,
    pub n: usize,
    /// Explicit 0/1 votes; drawn uniformly from the votes stream if absent.
    pub votes: Option<Vec<u64>>,
    pub group: GroupParams,
    pub k: usize,
    pub t_policy: SampleSizePolicy,
    pub min_consistency: usize,
    pub p_fail: f64,
    pub behavior: Behavior,
    /// Fixed roles instead of drawing them with `p_fail`.
    pub roles: Option<Vec<VoterRole>>,
    pub rsa_bits: u64,
    pub schedule: Schedule,
    pub seed: u64,
}

impl ElectionConfig {
    pub fn new(protocol: Protocol, n: usize, group: GroupParams, seed: u64) -> Self {
        Self {
            protocol,
            n,
            votes: None,
            group,
            k: 6,
            t_policy: SampleSizePolicy::default(),
            min_consistency: 2,
            p_fail: 0.0,
            behavior: Behavior::FakeShare,
            roles: None,
            rsa_bits: 512,
            schedule: Schedule::new(seed),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        if self.protocol != Protocol::Bsv && BigUint::from(self.n) >= *self.group.q() {
            return Err(invalid("n must be below the group order q"));
        }
        if let Some(votes) = &self.votes {
            if votes.len() != self.n {
                return Err(invalid(format!("{} votes given for n = {}", votes.len(), self.n)));
            }
            if votes.iter().any(|&v| v > 1) {
                return Err(invalid("votes must be 0 or 1"));
            }
        }
        if let Some(roles) = &self.roles {
            let ids: Vec<VoterId> = roles.iter().map(|r| r.voter_id).collect();
            if ids != VoterId::range(self.n).collect::<Vec<_>>() {
                return Err(invalid("roles must list V1..Vn in order"));
            }
        }
        AdversaryConfig::new(self.p_fail, self.behavior, self.seed).map_err(|e| invalid(e.to_string()))?;
        if self.protocol == Protocol::Hevs {
            if self.k == 0 {
                return Err(invalid("k must be at least 1"));
            }
            if self.min_consistency < 2 {
                return Err(invalid("min_consistency must be at least 2"));
            }
        }
        if self.protocol == Protocol::Bsv {
            let w = &self.schedule.windows;
            if w.sign.end > w.post.start || w.sign.end - w.sign.start < 2 {
                return Err(invalid("sign window must precede the post window and span two rounds"));
            }
        }
        Ok(())
    }

    fn setup_records(&self) -> Vec<Record> {
        let utf8 = |key: &str, value: String| (key.to_owned(), hex::encode(value));
        let num = |key: &str, value: u64| (key.to_owned(), format!("{value:x}"));
        let window = |r: &Range<u64>| format!("{}..{}", r.start, r.end);
        let mut fields = vec![
            utf8("protocol", self.protocol.to_string()),
            num("n", self.n as u64),
            ("p".to_owned(), format!("{:x}", self.group.p())),
            ("q".to_owned(), format!("{:x}", self.group.q())),
            ("g".to_owned(), self.group.generator().to_hex()),
            num("k", self.k as u64),
            utf8("t-policy", self.t_policy.to_string()),
            num("min-consistency", self.min_consistency as u64),
            utf8("p-fail", self.p_fail.to_string()),
            utf8("behavior", self.behavior.to_string()),
            num("rsa-bits", self.rsa_bits),
            utf8("sign-window", window(&self.schedule.windows.sign)),
            utf8("post-window", window(&self.schedule.windows.post)),
            num("delivery-seed", self.schedule.delivery_seed),
            utf8("anonymize", self.schedule.anonymize.to_string()),
            num("seed", self.seed),
        ];
        if let Some(votes) = &self.votes {
            let list: Vec<String> = votes.iter().map(|v| format!("{v:x}")).collect();
            fields.push(("votes".to_owned(), list.join(",")));
        }
        if let Some(roles) = &self.roles {
            let list: Vec<String> = roles
                .iter()
                .map(|r| match r.behavior {
                    Some(b) if !r.honest => b.to_string(),
                    _ => "honest".to_owned(),
                })
                .collect();
            fields.push(utf8("roles", list.join(",")));
        }
        fields
            .into_iter()
            .map(|(key, value)| {
                Record::new(
                    Phase::Setup,
                    PartyId::Government,
                    PartyId::Everyone,
                    format!("{key}:{value}"),
                )
            })
            .collect()
    }

    fn from_setup_records(records: &[Record]) -> Result<Self, SimError> {
        let mut fields: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            let (kind, value) = r.payload.split_once(':').expect("validated at parse");
            fields.insert(kind, (i + 1, value));
        }
        let corrupt = |line: usize, reason: String| SimError::CorruptTranscript { line, reason };
        let get = |key: &str| {
            fields
                .get(key)
                .copied()
                .ok_or_else(|| corrupt(records.len(), format!("setup is missing {key}")))
        };
        let text = |key: &str| -> Result<String, SimError> {
            let (line, v) = get(key)?;
            hex::decode(v)
                .ok()
                .and_then(|b| String::from_utf8(b).ok())
                .ok_or_else(|| corrupt(line, format!("bad text value for {key}")))
        };
        let big = |key: &str| -> Result<BigUint, SimError> {
            let (line, v) = get(key)?;
            parse_hex(v).map_err(|e| corrupt(line, e.to_string()))
        };
        let num = |key: &str| -> Result<u64, SimError> {
            let (line, v) = get(key)?;
            u64::from_str_radix(v, 16).map_err(|e| corrupt(line, e.to_string()))
        };
        let parsed = |key: &str, e: String| corrupt(fields.get(key).map_or(0, |f| f.0), e);
        let window = |key: &str| -> Result<Range<u64>, SimError> {
            let t = text(key)?;
            let (a, b) = t.split_once("..").ok_or_else(|| parsed(key, "bad window".into()))?;
            let a = a.parse().map_err(|_| parsed(key, "bad window".into()))?;
            let b = b.parse().map_err(|_| parsed(key, "bad window".into()))?;
            Ok(a..b)
        };

        let group = GroupParams::new(big("p")?, big("q")?, big("g")?).map_err(|e| parsed("p", e.to_string()))?;
        let n = num("n")? as usize;
        let windows = PhaseWindows::new(window("sign-window")?, window("post-window")?)
            .map_err(|e| parsed("sign-window", e.to_string()))?;
        let votes = match fields.get("votes") {
            None => None,
            Some(&(line, v)) => Some(
                v.split(',')
                    .map(|x| u64::from_str_radix(x, 16))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| corrupt(line, e.to_string()))?,
            ),
        };
        let roles = match fields.get("roles") {
            None => None,
            Some(_) => Some(
                text("roles")?
                    .split(',')
                    .zip(VoterId::range(n))
                    .map(|(s, id)| match s {
                        "honest" => Ok(VoterRole::honest(id)),
                        b => b.parse().map(|b| VoterRole::malicious(id, b)),
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| parsed("roles", e.to_string()))?,
            ),
        };
        let config = Self {
            protocol: text("protocol")?
                .parse()
                .map_err(|e: SimError| parsed("protocol", e.to_string()))?,
            n,
            votes,
            group,
            k: num("k")? as usize,
            t_policy: text("t-policy")?
                .parse()
                .map_err(|e: HevsError| parsed("t-policy", e.to_string()))?,
            min_consistency: num("min-consistency")? as usize,
            p_fail: text("p-fail")?
                .parse()
                .map_err(|_| parsed("p-fail", "bad float".into()))?,
            behavior: text("behavior")?
                .parse()
                .map_err(|e: adversary::AdversaryError| parsed("behavior", e.to_string()))?,
            roles,
            rsa_bits: num("rsa-bits")?,
            schedule: Schedule {
                windows,
                delivery_seed: num("delivery-seed")?,
                anonymize: text("anonymize")?
                    .parse()
                    .map_err(|_| parsed("anonymize", "bad flag".into()))?,
            },
            seed: num("seed")?,
        };
        config.validate().map_err(|e| corrupt(records.len(), e.to_string()))?;
        Ok(config)
    }
}

/// One transcript line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub phase: String,
    pub sender: String,
    pub receiver: String,
    pub payload: String,
}

impl Record {
    fn new(phase: Phase, sender: PartyId, receiver: PartyId, payload: String) -> Self {
        Self {
            phase: phase.name().to_owned(),
            sender: sender.to_string(),
            receiver: receiver.to_string(),
            payload,
        }
    }

    pub fn kind(&self) -> &str {
        self.payload.split_once(':').map_or("", |(k, _)| k)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    records: Vec<Record>,
}

impl Transcript {
    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", r.phase, r.sender, r.receiver, r.payload));
        }
        out
    }

    /// Parses the TSV form, checking field count, phase names, phase order
    /// and payload syntax. Does not check protocol semantics.
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let mut records = Vec::new();
        let mut last_phase = Phase::Setup;
        for (i, line) in text.lines().enumerate() {
            let corrupt = |reason: &str| SimError::CorruptTranscript {
                line: i + 1,
                reason: reason.to_owned(),
            };
            let fields: Vec<&str> = line.split('\t').collect();
            let [phase, sender, receiver, payload] = fields[..] else {
                return Err(corrupt("expected four tab-separated fields"));
            };
            let phase_id = Phase::parse(phase).ok_or_else(|| corrupt("unknown phase"))?;
            if phase_id < last_phase {
                return Err(corrupt("phase goes backwards"));
            }
            last_phase = phase_id;
            let (kind, values) = payload.split_once(':').ok_or_else(|| corrupt("payload lacks a kind"))?;
            if kind.is_empty() || !values.chars().all(|c| matches!(c, '0'..='9' | 'a'..='f' | ',')) {
                return Err(corrupt("payload values must be lowercase hex"));
            }
            records.push(Record {
                phase: phase.to_owned(),
                sender: sender.to_owned(),
                receiver: receiver.to_owned(),
                payload: payload.to_owned(),
            });
        }
        Ok(Self { records })
    }
}

/// Final state of one election run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElectionOutcome {
    pub protocol: Protocol,
    pub roles: Vec<VoterRole>,
    /// Honest-sum ground truth; malicious voters count as 0.
    pub truth: u64,
    pub decision: Result<u64, ElectionFailure>,
    /// Per-sample results (HEVS only).
    pub samples: Vec<SampleResult>,
    /// Ledger counts per candidate (BSV only).
    pub ledger_counts: Option<BTreeMap<String, u64>>,
    pub transcript: Transcript,
}

impl ElectionOutcome {
    pub fn is_correct(&self) -> bool {
        self.decision == Ok(self.truth)
    }
}

/// Phase-checked in-memory transport.
pub struct Network {
    phase: Phase,
    queue: Vec<Message>,
    records: Vec<Record>,
    rng: ChaCha20Rng,
}

impl Network {
    pub fn new(delivery_seed: u64) -> Self {
        Self {
            phase: Phase::Setup,
            queue: Vec::new(),
            records: Vec::new(),
            rng: stream_rng(delivery_seed, Stream::Delivery),
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Moves to `phase`; phases only advance and the queue must be drained.
    pub fn enter(&mut self, phase: Phase) -> Result<(), ElectionFailure> {
        if phase < self.phase || !self.queue.is_empty() {
            return Err(ElectionFailure::PhaseViolation(format!(
                "cannot enter {} from {}",
                phase.name(),
                self.phase.name()
            )));
        }
        self.phase = phase;
        Ok(())
    }

    pub fn send(&mut self, message: Message) -> Result<(), ElectionFailure> {
        let tag = message.payload.phase();
        if tag != self.phase {
            return Err(ElectionFailure::PhaseViolation(format!(
                "{} message sent during {}",
                tag.name(),
                self.phase.name()
            )));
        }
        self.queue.push(message);
        Ok(())
    }

    /// Drains the queue ordered by round, shuffling within each round.
    pub fn deliver(&mut self) -> Vec<Message> {
        let mut batch = std::mem::take(&mut self.queue);
        batch.shuffle(&mut self.rng);
        batch.sort_by_key(|m| m.round);
        for m in &batch {
            self.records
                .push(Record::new(self.phase, m.from, m.to, m.payload.encode()));
        }
        batch
    }

    fn delay(&mut self, window: &Range<u64>) -> u64 {
        self.rng.gen_range(window.clone())
    }

    fn record(&mut self, phase: Phase, from: PartyId, payload: String) {
        self.records.push(Record::new(phase, from, PartyId::Everyone, payload));
    }
}

fn voter_of(party: PartyId) -> Result<VoterId, ElectionFailure> {
    match party {
        PartyId::Voter(id) => Ok(id),
        other => Err(ElectionFailure::Protocol(format!("unexpected sender {other}"))),
    }
}

fn unexpected(m: &Message) -> ElectionFailure {
    ElectionFailure::Protocol(format!(
        "unexpected {} message from {}",
        m.payload.phase().name(),
        m.from
    ))
}

struct Run<'a> {
    config: &'a ElectionConfig,
    roles: Vec<VoterRole>,
    /// What each voter encrypts or writes on its ballot.
    plaintexts: Vec<u64>,
    net: Network,
    crypto: ChaCha20Rng,
}

/// Roles as drawn from the roles stream of `seed`.
pub fn draw_roles(
    seed: u64,
    n: usize,
    p_fail: f64,
    behavior: Behavior,
) -> Result<Vec<VoterRole>, adversary::AdversaryError> {
    let adv = AdversaryConfig::new(p_fail, behavior, seed)?;
    Ok(assign_roles(&mut stream_rng(seed, Stream::Roles), n, &adv))
}

/// Uniform 0/1 votes from the votes stream of `seed`.
pub fn draw_votes(seed: u64, n: usize) -> Vec<u64> {
    let mut rng = stream_rng(seed, Stream::Votes);
    (0..n).map(|_| u64::from(rng.gen_bool(0.5))).collect()
}

/// Runs one election to completion or to a protocol failure.
pub fn run_election(config: &ElectionConfig) -> Result<ElectionOutcome, SimError> {
    config.validate()?;
    let n = config.n;
    let roles = match &config.roles {
        Some(r) => r.clone(),
        None => draw_roles(config.seed, n, config.p_fail, config.behavior).map_err(|e| invalid(e.to_string()))?,
    };
    let votes = match &config.votes {
        Some(v) => v.clone(),
        None => draw_votes(config.seed, n),
    };
    let plaintexts: Vec<u64> = roles
        .iter()
        .zip(&votes)
        .map(|(r, &v)| match (r.honest, r.behavior) {
            (true, _) => v,
            (false, Some(Behavior::ExtraVote(x))) if config.protocol != Protocol::Bsv => x,
            (false, _) => 0,
        })
        .collect();
    let truth = roles
        .iter()
        .zip(&votes)
        .filter(|(r, _)| r.honest)
        .map(|(_, &v)| v)
        .sum();

    let mut net = Network::new(config.schedule.delivery_seed);
    net.records = config.setup_records();
    let mut run = Run {
        config,
        roles: roles.clone(),
        plaintexts,
        net,
        crypto: stream_rng(config.seed, Stream::Crypto),
    };
    let mut samples = Vec::new();
    let mut ledger_counts = None;
    let decision = match config.protocol {
        Protocol::Hev => run.hev(),
        Protocol::Hevs => run.hevs(&mut samples),
        Protocol::Bsv => run.bsv(&mut ledger_counts),
    };

    let mut net = run.net;
    net.queue.clear();
    net.phase = Phase::Result;
    for s in &samples {
        let outcome = s.outcome.as_ref().map(GroupElement::to_hex).unwrap_or_default();
        let tally = s.tally.map(|t| format!("{t:x}")).unwrap_or_default();
        net.record(
            Phase::Result,
            PartyId::Government,
            format!("sample:{:x},{outcome},{tally}", s.j),
        );
    }
    if let Some(counts) = &ledger_counts {
        for (c, v) in counts {
            net.record(
                Phase::Result,
                PartyId::Ledger,
                format!("count:{},{v:x}", hex::encode(c)),
            );
        }
    }
    let final_payload = match &decision {
        Ok(t) => format!("tally:{t:x}"),
        Err(e) => format!("failure:{}", hex::encode(e.to_string())),
    };
    net.record(Phase::Result, PartyId::Government, final_payload);

    Ok(ElectionOutcome {
        protocol: config.protocol,
        roles,
        truth,
        decision,
        samples,
        ledger_counts,
        transcript: Transcript { records: net.records },
    })
}

impl Run<'_> {
    fn params(&self) -> &GroupParams {
        &self.config.group
    }

    fn voters(&self) -> Vec<Voter> {
        VoterId::range(self.config.n)
            .zip(&self.plaintexts)
            .map(|(id, &m)| Voter::with_plaintext(id, m, self.config.n))
            .collect()
    }

    /// Key generation and broadcast of `keys` (one or `k` of them).
    /// Returns the keys each voter received, indexed by `j`.
    fn keys_phase(
        &mut self,
        voters: &mut [Voter],
        mut on_piece: impl FnMut(VoterId, GroupElement) -> Result<(), ElectionFailure>,
        broadcast: impl FnOnce() -> Result<Vec<GroupElement>, ElectionFailure>,
    ) -> Result<Vec<Vec<GroupElement>>, ElectionFailure> {
        let params = self.config.group.clone();
        self.net.enter(Phase::Key)?;
        for v in voters.iter_mut() {
            let piece = v.generate_key(&params, &mut self.crypto)?;
            self.net.send(Message {
                round: 0,
                from: PartyId::Voter(v.id()),
                to: PartyId::Government,
                payload: Payload::KeyPiece(piece),
            })?;
        }
        for m in self.net.deliver() {
            match m.payload {
                Payload::KeyPiece(p) => on_piece(voter_of(m.from)?, p)?,
                _ => return Err(unexpected(&m)),
            }
        }

        self.net.enter(Phase::Broadcast)?;
        let keys = broadcast()?;
        for v in voters.iter() {
            for (j, key) in keys.iter().enumerate() {
                self.net.send(Message {
                    round: 1,
                    from: PartyId::Government,
                    to: PartyId::Voter(v.id()),
                    payload: Payload::Broadcast { j, key: key.clone() },
                })?;
            }
        }
        let mut received: Vec<BTreeMap<usize, GroupElement>> = vec![BTreeMap::new(); voters.len()];
        for m in self.net.deliver() {
            match (m.to, m.payload) {
                (PartyId::Voter(id), Payload::Broadcast { j, key }) => {
                    received[id.0 as usize - 1].insert(j, key);
                }
                (_, payload) => return Err(unexpected(&Message { payload, ..m })),
            }
        }
        Ok(received.into_iter().map(|r| r.into_values().collect()).collect())
    }

    /// Every voter casts one ballot per received key. Returns ballots by
    /// voter, ordered by `j`.
    fn vote_phase(
        &mut self,
        voters: &mut [Voter],
        keys: &[Vec<GroupElement>],
    ) -> Result<BTreeMap<VoterId, Vec<Ciphertext>>, ElectionFailure> {
        let params = self.config.group.clone();
        self.net.enter(Phase::Vote)?;
        for (v, keys) in voters.iter_mut().zip(keys) {
            for (j, ciphertext) in v.cast(&params, keys, &mut self.crypto)?.into_iter().enumerate() {
                self.net.send(Message {
                    round: 2,
                    from: PartyId::Voter(v.id()),
                    to: PartyId::Government,
                    payload: Payload::Ciphertext { j, ciphertext },
                })?;
            }
        }
        let mut ballots: BTreeMap<VoterId, BTreeMap<usize, Ciphertext>> = BTreeMap::new();
        for m in self.net.deliver() {
            match m.payload {
                Payload::Ciphertext { j, ciphertext } => {
                    ballots.entry(voter_of(m.from)?).or_default().insert(j, ciphertext);
                }
                _ => return Err(unexpected(&m)),
            }
        }
        Ok(ballots
            .into_iter()
            .map(|(id, b)| (id, b.into_values().collect()))
            .collect())
    }

    /// Sends requests, collects each addressed voter's answer according to
    /// its role, and returns the delivered shares as `(j, share)`.
    fn decrypt_phase(
        &mut self,
        voters: &mut [Voter],
        requests: Vec<(usize, Ciphertext, Vec<VoterId>)>,
    ) -> Result<Vec<(usize, crate::hev::DecryptionShare)>, ElectionFailure> {
        let params = self.config.group.clone();
        self.net.enter(Phase::Decrypt)?;
        for (j, aggregate, recipients) in requests {
            for id in recipients {
                self.net.send(Message {
                    round: 3,
                    from: PartyId::Government,
                    to: PartyId::Voter(id),
                    payload: Payload::DecryptionRequest {
                        j,
                        aggregate: aggregate.clone(),
                    },
                })?;
            }
        }
        let mut inbox: Vec<(VoterId, usize, Ciphertext)> = Vec::new();
        for m in self.net.deliver() {
            match (m.to, m.payload) {
                (PartyId::Voter(id), Payload::DecryptionRequest { j, aggregate }) => inbox.push((id, j, aggregate)),
                (_, payload) => return Err(unexpected(&Message { payload, ..m })),
            }
        }
        // Answer in a canonical order so crypto randomness does not depend on delivery.
        inbox.sort_by_key(|(id, j, _)| (*id, *j));
        for (id, j, aggregate) in inbox {
            let voter = &mut voters[id.0 as usize - 1];
            let role = self.roles[id.0 as usize - 1];
            let request = DecryptionRequest::new(&aggregate);
            let share = match role.behavior {
                Some(Behavior::Silent) if !role.honest => continue,
                Some(Behavior::FakeShare) if !role.honest => {
                    let secret = voter.key_share().expect("keyed").secret().clone();
                    adversary::fake_decryption_share(&mut self.crypto, &params, id, &aggregate.x, &secret)
                }
                _ => voter.respond(&params, j, &request)?,
            };
            self.net.send(Message {
                round: 4,
                from: PartyId::Voter(id),
                to: PartyId::Government,
                payload: Payload::DecryptionShare { j, x_hat: share.x_hat },
            })?;
        }
        let mut shares = Vec::new();
        for m in self.net.deliver() {
            match m.payload {
                Payload::DecryptionShare { j, x_hat } => shares.push((
                    j,
                    crate::hev::DecryptionShare {
                        voter_id: voter_of(m.from)?,
                        x_hat,
                    },
                )),
                _ => return Err(unexpected(&m)),
            }
        }
        Ok(shares)
    }

    fn hev(&mut self) -> Result<u64, ElectionFailure> {
        let params = self.params().clone();
        let mut gov = Government::new(params, self.config.n);
        let mut voters = self.voters();
        let gov_cell = std::cell::RefCell::new(&mut gov);
        let keys = self.keys_phase(
            &mut voters,
            |id, p| Ok(gov_cell.borrow_mut().receive_key_piece(id, p)?),
            || Ok(vec![gov_cell.borrow_mut().broadcast_public_key()?]),
        )?;
        let gov = gov_cell.into_inner();
        for (id, mut b) in self.vote_phase(&mut voters, &keys)? {
            gov.receive_ballot(id, b.remove(0))?;
        }
        let request = gov.decryption_request()?;
        let all: Vec<VoterId> = VoterId::range(self.config.n).collect();
        for (_, share) in self.decrypt_phase(&mut voters, vec![(0, request.aggregate(), all)])? {
            gov.receive_share(share)?;
        }
        Ok(gov.finish()?.tally)
    }

    fn hevs(&mut self, samples: &mut Vec<SampleResult>) -> Result<u64, ElectionFailure> {
        let c = self.config;
        let plan = hevs::make_sampling_plan(&mut stream_rng(c.seed, Stream::Plan), c.n, c.k, c.t_policy)?;
        let mut gov = SamplingGovernment::new(self.params().clone(), c.n);
        let mut voters = self.voters();
        let gov_cell = std::cell::RefCell::new(&mut gov);
        let keys = self.keys_phase(
            &mut voters,
            |id, p| Ok(gov_cell.borrow_mut().receive_key_piece(id, p)?),
            || Ok(gov_cell.borrow_mut().broadcast_public_keys(plan)?),
        )?;
        let gov = gov_cell.into_inner();
        for (id, b) in self.vote_phase(&mut voters, &keys)? {
            gov.receive_ballots(id, b)?;
        }
        let requests = gov
            .decryption_requests()?
            .into_iter()
            .map(|r| (r.j, r.request.aggregate(), r.recipients))
            .collect();
        for (j, share) in self.decrypt_phase(&mut voters, requests)? {
            gov.receive_share(j, share)?;
        }
        *samples = gov.finish()?;
        Ok(hevs::decide(samples, c.min_consistency)?)
    }

    fn bsv(&mut self, counts: &mut Option<BTreeMap<String, u64>>) -> Result<u64, ElectionFailure> {
        let c = self.config;
        let windows = c.schedule.windows.clone();
        let keys = bsv::signer_keygen(&mut self.crypto, c.rsa_bits)?;
        let public = keys.public().clone();
        let mut registry = Registry::new(VoterId::range(c.n));
        let candidates: Vec<String> = BSV_CANDIDATES.iter().map(|s| s.to_string()).collect();
        let mut ledger = Ledger::new(public.clone(), windows.clone(), candidates);

        self.net.enter(Phase::Sign)?;
        let mut pending: Vec<(Ballot, BlindingState)> = Vec::with_capacity(c.n);
        for (id, &m) in VoterId::range(c.n).zip(&self.plaintexts) {
            let ballot = Ballot::new(BSV_CANDIDATES[m as usize], &mut self.crypto)?;
            let state = bsv::blind(&ballot, &public, &mut self.crypto);
            self.net.send(Message {
                round: windows.sign.start,
                from: PartyId::Voter(id),
                to: PartyId::Government,
                payload: Payload::BlindRequest(state.blinded.clone()),
            })?;
            pending.push((ballot, state));
        }
        for m in self.net.deliver() {
            let Payload::BlindRequest(blinded) = &m.payload else {
                return Err(unexpected(&m));
            };
            let s_prime = bsv::sign_blinded(&keys, blinded, voter_of(m.from)?, &mut registry)?;
            self.net.send(Message {
                round: windows.sign.start + 1,
                from: PartyId::Government,
                to: m.from,
                payload: Payload::BlindSignature(s_prime),
            })?;
        }
        for m in self.net.deliver() {
            let (PartyId::Voter(id), Payload::BlindSignature(s_prime)) = (m.to, &m.payload) else {
                return Err(unexpected(&m));
            };
            let (ballot, state) = &mut pending[id.0 as usize - 1];
            ballot.signature = Some(bsv::unblind(s_prime, state, &public));
        }

        self.net.enter(Phase::Post)?;
        for (i, (ballot, _)) in pending.iter().enumerate() {
            let id = VoterId(i as u32 + 1);
            let from = if c.schedule.anonymize {
                PartyId::Anonymous
            } else {
                PartyId::Voter(id)
            };
            // Malicious voters try to count twice by replaying their ballot.
            let copies = if self.roles[i].honest { 1 } else { 2 };
            for _ in 0..copies {
                let round = self.net.delay(&windows.post);
                self.net.send(Message {
                    round,
                    from,
                    to: PartyId::Ledger,
                    payload: Payload::Ballot(ballot.clone()),
                })?;
            }
        }
        for m in self.net.deliver() {
            let Payload::Ballot(ballot) = m.payload else {
                return Err(unexpected(&m));
            };
            // Rejections are the ledger's business; they never abort the run.
            let _ = ledger.submit(ballot, m.round);
        }
        let tally = ledger.tally(windows.post.end)?;
        let decided = tally[BSV_CANDIDATES[1]];
        *counts = Some(tally);
        Ok(decided)
    }
}

/// Rebuilds the configuration from the setup records, reruns the election
/// and checks that it reproduces `transcript` record for record.
pub fn replay(transcript: &Transcript) -> Result<ElectionOutcome, SimError> {
    let records = transcript.records();
    let setup_len = records.iter().take_while(|r| r.phase == Phase::Setup.name()).count();
    if setup_len == 0 {
        return Err(SimError::CorruptTranscript {
            line: 1,
            reason: "no setup records".into(),
        });
    }
    let config = ElectionConfig::from_setup_records(&records[..setup_len])?;
    let outcome = run_election(&config)?;
    let expected = outcome.transcript.records();
    if let Some(i) = (0..expected.len().max(records.len())).find(|&i| expected.get(i) != records.get(i)) {
        let reason = if i >= records.len() {
            "transcript is truncated".to_owned()
        } else {
            "record differs from the recomputed election".to_owned()
        };
        return Err(SimError::CorruptTranscript { line: i + 1, reason });
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn config(protocol: Protocol, n: usize, seed: u64) -> ElectionConfig {
        let mut c = ElectionConfig::new(protocol, n, GroupParams::default_256(), seed);
        c.rsa_bits = 256;
        c
    }

    fn roles(behaviors: &[Option<Behavior>]) -> Vec<VoterRole> {
        behaviors
            .iter()
            .zip(VoterId::range(behaviors.len()))
            .map(|(b, id)| match b {
                Some(b) => VoterRole::malicious(id, *b),
                None => VoterRole::honest(id),
            })
            .collect()
    }

    #[test]
    fn honest_hev_matches_worked_votes() {
        let mut c = config(Protocol::Hev, 3, 1);
        c.votes = Some(vec![1, 0, 1]);
        let out = run_election(&c).unwrap();
        assert_eq!(out.truth, 2);
        assert_eq!(out.decision, Ok(2));
        assert!(out.is_correct());

        let mut tiny = c.clone();
        tiny.group = GroupParams::tiny();
        assert_eq!(run_election(&tiny).unwrap().decision, Ok(2));
    }

    #[test]
    fn single_voter_elections() {
        for protocol in [Protocol::Hev, Protocol::Hevs, Protocol::Bsv] {
            for v in [0, 1] {
                let mut c = config(protocol, 1, 3);
                c.votes = Some(vec![v]);
                let out = run_election(&c).unwrap();
                assert_eq!(out.decision, Ok(v), "{protocol} vote {v}");
            }
        }
    }

    #[test]
    fn hevs_all_malicious_has_no_consistent_result() {
        let mut c = config(Protocol::Hevs, 8, 2);
        c.p_fail = 1.0;
        let out = run_election(&c).unwrap();
        assert_eq!(out.truth, 0);
        assert!(matches!(out.decision, Err(ElectionFailure::NoConsistentResult { .. })));
        assert_eq!(out.samples.len(), c.k);
        assert!(out.samples.iter().all(|s| s.tally.is_none()));
    }

    #[test]
    fn hev_disruptions() {
        let mut c = config(Protocol::Hev, 4, 5);
        c.votes = Some(vec![1, 1, 0, 1]);
        c.roles = Some(roles(&[None, Some(Behavior::Silent), None, None]));
        let out = run_election(&c).unwrap();
        assert_eq!(out.truth, 2);
        assert_eq!(
            out.decision,
            Err(ElectionFailure::MissingShares {
                missing: vec![VoterId(2)]
            })
        );

        c.roles = Some(roles(&[None, Some(Behavior::FakeShare), None, None]));
        assert_eq!(run_election(&c).unwrap().decision, Err(ElectionFailure::Undecodable));

        c.roles = Some(roles(&[None, Some(Behavior::ExtraVote(2)), None, None]));
        let out = run_election(&c).unwrap();
        assert_eq!(out.decision, Ok(2 + 2));
        assert!(!out.is_correct());

        // Beyond the dlog bound n the aggregate no longer decodes.
        c.roles = Some(roles(&[None, Some(Behavior::ExtraVote(3)), None, None]));
        assert_eq!(run_election(&c).unwrap().decision, Err(ElectionFailure::Undecodable));
    }

    #[test]
    fn hevs_sample_reliability_follows_membership() {
        let mut c = config(Protocol::Hevs, 6, 11);
        c.k = 8;
        c.roles = Some(roles(&[None, None, Some(Behavior::FakeShare), None, None, None]));
        let out = run_election(&c).unwrap();
        let plan = hevs::make_sampling_plan(&mut stream_rng(c.seed, Stream::Plan), c.n, c.k, c.t_policy).unwrap();
        for s in &out.samples {
            let dirty = plan.multiset(s.j).unwrap().contains(&VoterId(3));
            assert_eq!(s.tally == Some(out.truth), !dirty, "sample {}", s.j);
        }
    }

    #[test]
    fn bsv_replay_counts_once() {
        let mut c = config(Protocol::Bsv, 4, 6);
        c.votes = Some(vec![1, 1, 0, 1]);
        c.roles = Some(roles(&[None, Some(Behavior::FakeShare), None, None]));
        let out = run_election(&c).unwrap();
        // The replaying voter is malicious and therefore votes against.
        assert_eq!(out.truth, 2);
        assert_eq!(out.decision, Ok(2));
        let counts = out.ledger_counts.unwrap();
        assert_eq!(counts["against"], 2);
        assert_eq!(counts["for"], 2);
        let posts = out.transcript.records().iter().filter(|r| r.phase == "post").count();
        assert_eq!(posts, 5);
    }

    #[test]
    fn anonymized_submissions_hide_senders() {
        for anonymize in [true, false] {
            let mut c = config(Protocol::Bsv, 5, 8);
            c.schedule.anonymize = anonymize;
            let out = run_election(&c).unwrap();
            for r in out.transcript.records().iter().filter(|r| r.phase == "post") {
                assert_eq!(r.sender == "anon", anonymize);
                assert_eq!(r.receiver, "L");
            }
        }
    }

    #[test]
    fn runs_are_deterministic_and_seed_sensitive() {
        for protocol in [Protocol::Hev, Protocol::Hevs, Protocol::Bsv] {
            let mut c = config(protocol, 5, 7);
            c.p_fail = 0.3;
            let a = run_election(&c).unwrap();
            let b = run_election(&c).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.transcript.to_tsv(), b.transcript.to_tsv());
            c.seed = 8;
            c.schedule.delivery_seed = 8;
            assert_ne!(run_election(&c).unwrap().transcript, a.transcript);
        }
    }

    #[test]
    fn replay_reproduces_and_detects_damage() {
        for protocol in [Protocol::Hev, Protocol::Hevs, Protocol::Bsv] {
            let mut c = config(protocol, 4, 7);
            c.p_fail = 0.25;
            let out = run_election(&c).unwrap();
            let tsv = out.transcript.to_tsv();
            let parsed = Transcript::parse(&tsv).unwrap();
            assert_eq!(replay(&parsed).unwrap(), out);

            let lines: Vec<&str> = tsv.lines().collect();
            let truncated = Transcript::parse(&lines[..lines.len() - 1].join("\n")).unwrap();
            assert!(matches!(replay(&truncated), Err(SimError::CorruptTranscript { .. })));

            let mut tampered: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
            let last = tampered.len() - 1;
            tampered[last] = tampered[last].replace("tally:", "tally:1");
            if tampered[last] != lines[last] {
                let t = Transcript::parse(&tampered.join("\n")).unwrap();
                assert!(matches!(replay(&t), Err(SimError::CorruptTranscript { .. })));
            }
        }
    }

    #[test]
    fn explicit_votes_and_roles_survive_replay() {
        let mut c = config(Protocol::Hevs, 3, 4);
        c.votes = Some(vec![1, 0, 1]);
        c.roles = Some(roles(&[None, Some(Behavior::ExtraVote(2)), None]));
        let out = run_election(&c).unwrap();
        assert_eq!(replay(&out.transcript).unwrap(), out);
    }

    #[test]
    fn malformed_transcripts_are_rejected() {
        let bad = [
            "setup\tG\t*",
            "nonsense\tG\t*\tn:3",
            "setup\tG\t*\tn:XYZ",
            "setup\tG\t*\tnokind",
            "vote\tG\t*\tn:3\nsetup\tG\t*\tn:3",
        ];
        for text in bad {
            assert!(
                matches!(Transcript::parse(text), Err(SimError::CorruptTranscript { .. })),
                "{text:?}"
            );
        }
        let no_setup = Transcript::parse("key\tV1\tG\tkey-piece:8").unwrap();
        assert!(replay(&no_setup).is_err());
        let partial_setup = Transcript::parse("setup\tG\t*\tn:3").unwrap();
        assert!(matches!(
            replay(&partial_setup),
            Err(SimError::CorruptTranscript { .. })
        ));
    }

    #[test]
    fn network_rejects_out_of_phase_messages() {
        let mut net = Network::new(1);
        net.enter(Phase::Key).unwrap();
        let share = Message {
            round: 0,
            from: PartyId::Voter(VoterId(1)),
            to: PartyId::Government,
            payload: Payload::DecryptionShare {
                j: 0,
                x_hat: GroupParams::tiny().generator(),
            },
        };
        assert!(matches!(
            net.send(share.clone()),
            Err(ElectionFailure::PhaseViolation(_))
        ));
        net.enter(Phase::Decrypt).unwrap();
        net.send(share).unwrap();
        assert!(net.enter(Phase::Result).is_err(), "queue must drain first");
        assert_eq!(net.deliver().len(), 1);
        assert!(net.enter(Phase::Key).is_err());
    }

    #[test]
    fn invalid_configs() {
        let mut c = config(Protocol::Hev, 0, 1);
        assert!(run_election(&c).is_err());
        c.n = 3;
        c.votes = Some(vec![1, 2, 0]);
        assert!(run_election(&c).is_err());
        c.votes = Some(vec![1]);
        assert!(run_election(&c).is_err());
        c.votes = None;
        c.p_fail = 1.5;
        assert!(run_election(&c).is_err());
        c.p_fail = 0.0;
        c.group = GroupParams::tiny();
        c.n = 11;
        assert!(run_election(&c).is_err());

        let mut h = config(Protocol::Hevs, 3, 1);
        h.min_consistency = 1;
        assert!(run_election(&h).is_err());
        let mut b = config(Protocol::Bsv, 3, 1);
        b.schedule.windows = PhaseWindows::new(10..20, 0..10).unwrap();
        assert!(run_election(&b).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn phases_never_go_backwards(seed in any::<u64>(), n in 1usize..7, p in 0.0f64..=1.0, which in 0usize..3) {
            let protocol = [Protocol::Hev, Protocol::Hevs, Protocol::Bsv][which];
            let mut c = config(protocol, n, seed);
            c.p_fail = p;
            c.k = 3;
            let out = run_election(&c).unwrap();
            let phases: Vec<Phase> = out.transcript.records().iter().map(|r| Phase::parse(&r.phase).unwrap()).collect();
            prop_assert!(phases.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(phases.last(), Some(&Phase::Result));
        }

        #[test]
        fn honest_elections_are_correct(seed in any::<u64>(), n in 1usize..9, which in 0usize..3) {
            let protocol = [Protocol::Hev, Protocol::Hevs, Protocol::Bsv][which];
            let out = run_election(&config(protocol, n, seed)).unwrap();
            prop_assert!(out.is_correct(), "{:?}", out.decision);
        }
    }
}
