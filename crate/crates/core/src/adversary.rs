//! Malicious voter behaviors for HEV/HEVS.
//!
//! Disruptive voters (fake share or silence) cast an honest-looking 0 and
//! then sabotage threshold decryption. Extra-vote cheaters encrypt a
//! plaintext outside {0, 1} and otherwise follow the protocol.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::group::{GroupElement, GroupParams, Scalar};
use crate::hev::{self, Ciphertext, DecryptionShare, Voter, VoterId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdversaryError {
    #[error("p_fail must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("unknown behavior {0:?}; expected fake-share, silent or extra-vote:<value>")]
    UnknownBehavior(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Behavior {
    /// Answers decryption requests with `X_R^rd` for a random `rd != sK`.
    FakeShare,
    /// Goes offline after voting and never answers.
    Silent,
    /// Encrypts the given plaintext instead of a 0/1 vote.
    ExtraVote(u64),
}

impl Behavior {
    /// Whether the behavior sabotages threshold decryption.
    pub fn disrupts_decryption(self) -> bool {
        matches!(self, Behavior::FakeShare | Behavior::Silent)
    }
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Behavior::FakeShare => f.write_str("fake-share"),
            Behavior::Silent => f.write_str("silent"),
            Behavior::ExtraVote(v) => write!(f, "extra-vote:{v}"),
        }
    }
}

impl FromStr for Behavior {
    type Err = AdversaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fake-share" => Ok(Behavior::FakeShare),
            "silent" => Ok(Behavior::Silent),
            other => other
                .strip_prefix("extra-vote:")
                .and_then(|v| v.parse().ok())
                .map(Behavior::ExtraVote)
                .ok_or_else(|| AdversaryError::UnknownBehavior(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdversaryConfig {
    p_fail: f64,
    pub behavior: Behavior,
    pub seed: u64,
}

impl AdversaryConfig {
    pub fn new(p_fail: f64, behavior: Behavior, seed: u64) -> Result<Self, AdversaryError> {
        if !(0.0..=1.0).contains(&p_fail) {
            return Err(AdversaryError::InvalidProbability(p_fail));
        }
        Ok(Self { p_fail, behavior, seed })
    }

    /// No malicious voters.
    pub fn honest() -> Self {
        Self {
            p_fail: 0.0,
            behavior: Behavior::FakeShare,
            seed: 0,
        }
    }

    pub fn p_fail(&self) -> f64 {
        self.p_fail
    }

    /// [`assign_roles`] driven by a generator seeded from `self.seed`.
    pub fn roles(&self, n: usize) -> Vec<VoterRole> {
        assign_roles(&mut ChaCha20Rng::seed_from_u64(self.seed), n, self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VoterRole {
    pub voter_id: VoterId,
    pub honest: bool,
    pub behavior: Option<Behavior>,
}

impl VoterRole {
    pub fn honest(voter_id: VoterId) -> Self {
        Self {
            voter_id,
            honest: true,
            behavior: None,
        }
    }

    pub fn malicious(voter_id: VoterId, behavior: Behavior) -> Self {
        Self {
            voter_id,
            honest: false,
            behavior: Some(behavior),
        }
    }

    pub fn disrupts_decryption(&self) -> bool {
        self.behavior.is_some_and(Behavior::disrupts_decryption)
    }
}

/// Independent Bernoulli(`p_fail`) draw per voter, in id order.
pub fn assign_roles<R: RngCore + ?Sized>(rng: &mut R, n: usize, config: &AdversaryConfig) -> Vec<VoterRole> {
    VoterId::range(n)
        .map(|id| {
            // gen::<f64>() is in [0, 1): p = 0 never fires, p = 1 always does.
            if rng.gen::<f64>() < config.p_fail {
                VoterRole::malicious(id, config.behavior)
            } else {
                VoterRole::honest(id)
            }
        })
        .collect()
}

/// Realized number of malicious voters `m`.
pub fn malicious_count(roles: &[VoterRole]) -> usize {
    roles.iter().filter(|r| !r.honest).count()
}

/// `X_R^rd` with a fresh `rd` distinct from the voter's real secret.
pub fn fake_decryption_share<R: RngCore + ?Sized>(
    rng: &mut R,
    params: &GroupParams,
    voter_id: VoterId,
    x_r: &GroupElement,
    true_secret: &Scalar,
) -> DecryptionShare {
    let rd = loop {
        let rd = params.random_scalar(rng);
        if &rd != true_secret {
            break rd;
        }
    };
    fake_share_with_exponent(params, voter_id, x_r, &rd)
}

/// `X_R^rd` for a caller-chosen `rd`.
pub fn fake_share_with_exponent(
    params: &GroupParams,
    voter_id: VoterId,
    x_r: &GroupElement,
    rd: &Scalar,
) -> DecryptionShare {
    DecryptionShare {
        voter_id,
        x_hat: params.exp(x_r, rd),
    }
}

/// `(g^r, pK^r * g^value)` with no restriction on `value`.
pub fn extra_vote_ciphertext<R: RngCore + ?Sized>(
    params: &GroupParams,
    public_key: &GroupElement,
    value: u64,
    rng: &mut R,
) -> Ciphertext {
    hev::encrypt_exponent(params, public_key, value, &params.random_exponent(rng))
}

/// A voter state machine that casts `value` in place of a 0/1 vote.
pub fn extra_vote_voter(id: VoterId, value: u64, electorate: usize) -> Voter {
    Voter::with_plaintext(id, value, electorate)
}
