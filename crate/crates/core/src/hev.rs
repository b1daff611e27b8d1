//! Homomorphic-encryption voting with threshold decryption.
//!
//! Each voter holds a secret exponent `sK_i` and publishes `pK_i = g^sK_i`.
//! The government multiplies the pieces into the election key
//! `pK = g^(sum sK_i)`, voters submit exponential-ElGamal ciphertexts
//! `(g^r, pK^r * g^v)`, and the componentwise product of all ballots
//! decrypts to `g^(sum v)` once every voter contributes `X_R^sK_i`. The
//! tally is then recovered by bounded discrete log.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::RngCore;
use thiserror::Error;

use crate::group::{GroupElement, GroupError, GroupParams, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HevError {
    #[error("vote value {0} is not 0 or 1")]
    InvalidVote(u64),
    #[error("secret key piece must be nonzero")]
    ZeroSecret,
    #[error("no public key pieces to combine")]
    EmptyShareSet,
    #[error("no ballots to aggregate")]
    EmptyBallotSet,
    #[error("aggregate equals the voter's own ciphertext; refusing to decrypt")]
    RefuseSingletonAggregate,
    #[error("missing decryption shares from {}", fmt_ids(.missing))]
    MissingShares { missing: Vec<VoterId> },
    #[error("duplicate decryption share from {0}")]
    DuplicateShare(VoterId),
    #[error("decryption share from {0}, who holds no key piece for this aggregate")]
    UnexpectedShare(VoterId),
    #[error("missing public key pieces from {}", fmt_ids(.missing))]
    MissingKeyPieces { missing: Vec<VoterId> },
    #[error("only {received} of {expected} ballots received; partial turnout cannot be decrypted")]
    IncompleteTurnout { received: usize, expected: usize },
    #[error("{party} is in phase {actual}, expected {expected}")]
    OutOfPhase {
        party: String,
        expected: &'static str,
        actual: &'static str,
    },
    #[error("{0} is not a registered voter")]
    UnknownVoter(VoterId),
    #[error("duplicate message from {0}")]
    DuplicateMessage(VoterId),
    #[error("no public key with index {0}")]
    KeyIndexOutOfRange(usize),
    #[error(transparent)]
    Group(#[from] GroupError),
}

fn fmt_ids(ids: &[VoterId]) -> String {
    ids.iter().map(|id| id.to_string()).collect::<Vec<_>>().join(", ")
}

/// 1-based voter index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VoterId(pub u32);

impl fmt::Display for VoterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V{}", self.0)
    }
}

impl VoterId {
    /// Ids `V1..=Vn`.
    pub fn range(n: usize) -> impl Iterator<Item = VoterId> {
        (1..=n as u32).map(VoterId)
    }
}

/// An honest vote, 0 (against) or 1 (for).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vote(u8);

impl Vote {
    pub const AGAINST: Vote = Vote(0);
    pub const FOR: Vote = Vote(1);

    pub fn new(value: u64) -> Result<Self, HevError> {
        match value {
            0 | 1 => Ok(Vote(value as u8)),
            other => Err(HevError::InvalidVote(other)),
        }
    }

    pub fn value(self) -> u64 {
        self.0 as u64
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct KeyShare {
    pub voter_id: VoterId,
    secret: Scalar,
    pub public_piece: GroupElement,
}

impl KeyShare {
    pub fn from_secret(params: &GroupParams, voter_id: VoterId, secret: Scalar) -> Result<Self, HevError> {
        if secret.is_zero() {
            return Err(HevError::ZeroSecret);
        }
        let public_piece = params.g_pow(&secret);
        Ok(Self {
            voter_id,
            secret,
            public_piece,
        })
    }

    pub fn secret(&self) -> &Scalar {
        &self.secret
    }
}

impl fmt::Debug for KeyShare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyShare")
            .field("voter_id", &self.voter_id)
            .field("public_piece", &self.public_piece)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ciphertext {
    pub x: GroupElement,
    pub y: GroupElement,
}

/// Marker carried with a decryption request: the government is waiting
/// for the recipient's share.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PendingDecryption;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecryptionRequest {
    pub x_r: GroupElement,
    pub y_r: GroupElement,
    pub pending: PendingDecryption,
}

impl DecryptionRequest {
    pub fn new(aggregate: &Ciphertext) -> Self {
        Self {
            x_r: aggregate.x.clone(),
            y_r: aggregate.y.clone(),
            pending: PendingDecryption,
        }
    }

    pub fn aggregate(&self) -> Ciphertext {
        Ciphertext {
            x: self.x_r.clone(),
            y: self.y_r.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecryptionShare {
    pub voter_id: VoterId,
    pub x_hat: GroupElement,
}

/// Draws `sK_i` uniformly from `{1, ..., q-1}`.
pub fn keygen_share<R: RngCore + ?Sized>(rng: &mut R, params: &GroupParams, voter_id: VoterId) -> KeyShare {
    let secret = params.random_scalar(rng);
    KeyShare::from_secret(params, voter_id, secret).expect("random_scalar is nonzero")
}

/// `pK = prod pK_i`.
pub fn combine_public_key(params: &GroupParams, pieces: &[GroupElement]) -> Result<GroupElement, HevError> {
    if pieces.is_empty() {
        return Err(HevError::EmptyShareSet);
    }
    Ok(params.product(pieces))
}

pub fn encrypt_vote<R: RngCore + ?Sized>(
    params: &GroupParams,
    public_key: &GroupElement,
    vote: Vote,
    rng: &mut R,
) -> Ciphertext {
    let r = params.random_exponent(rng);
    encrypt_with_randomness(params, public_key, vote, &r)
}

/// Encryption with caller-chosen `r`; used for fixtures and replay.
pub fn encrypt_with_randomness(params: &GroupParams, public_key: &GroupElement, vote: Vote, r: &Scalar) -> Ciphertext {
    encrypt_exponent(params, public_key, vote.value(), r)
}

/// `(g^r, pK^r * g^value)` for an arbitrary plaintext exponent.
pub(crate) fn encrypt_exponent(params: &GroupParams, public_key: &GroupElement, value: u64, r: &Scalar) -> Ciphertext {
    Ciphertext {
        x: params.g_pow(r),
        y: params.mul(&params.exp(public_key, r), &params.g_pow_u64(value)),
    }
}

/// Componentwise product `(prod X_i, prod Y_i)`.
pub fn aggregate(params: &GroupParams, ciphertexts: &[Ciphertext]) -> Result<Ciphertext, HevError> {
    if ciphertexts.is_empty() {
        return Err(HevError::EmptyBallotSet);
    }
    Ok(Ciphertext {
        x: params.product(ciphertexts.iter().map(|c| &c.x)),
        y: params.product(ciphertexts.iter().map(|c| &c.y)),
    })
}

/// `X_hat_i = X_R^sK_i`, refusing when the aggregate is the voter's own
/// ballot (decrypting it would reveal the vote).
pub fn decryption_share(
    params: &GroupParams,
    share: &KeyShare,
    request: &DecryptionRequest,
    own_ciphertext: &Ciphertext,
) -> Result<DecryptionShare, HevError> {
    if request.x_r == own_ciphertext.x && request.y_r == own_ciphertext.y {
        return Err(HevError::RefuseSingletonAggregate);
    }
    Ok(DecryptionShare {
        voter_id: share.voter_id,
        x_hat: params.exp(&request.x_r, &share.secret),
    })
}

/// Checks that `shares` holds exactly one share per id in `key_holders`
/// and returns them keyed by voter.
pub(crate) fn index_shares<'a>(
    shares: &'a [DecryptionShare],
    key_holders: &BTreeSet<VoterId>,
) -> Result<BTreeMap<VoterId, &'a DecryptionShare>, HevError> {
    let mut by_voter = BTreeMap::new();
    for share in shares {
        if !key_holders.contains(&share.voter_id) {
            return Err(HevError::UnexpectedShare(share.voter_id));
        }
        if by_voter.insert(share.voter_id, share).is_some() {
            return Err(HevError::DuplicateShare(share.voter_id));
        }
    }
    let missing: Vec<VoterId> = key_holders
        .iter()
        .filter(|id| !by_voter.contains_key(id))
        .copied()
        .collect();
    if !missing.is_empty() {
        return Err(HevError::MissingShares { missing });
    }
    Ok(by_voter)
}

/// `o = Y_R / prod X_hat_i`, requiring one share from every key holder.
pub fn combine_decrypt(
    params: &GroupParams,
    shares: &[DecryptionShare],
    key_holders: &[VoterId],
    y_r: &GroupElement,
) -> Result<GroupElement, HevError> {
    let holders: BTreeSet<VoterId> = key_holders.iter().copied().collect();
    let by_voter = index_shares(shares, &holders)?;
    let w = params.product(by_voter.values().map(|s| &s.x_hat));
    Ok(params.div(y_r, &w))
}

/// Decodes `o = g^T` for `T` in `[0, n]`.
pub fn recover_tally(params: &GroupParams, o: &GroupElement, n: u64) -> Result<u64, HevError> {
    Ok(params.discrete_log_bounded(o, n)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VoterState {
    Init,
    Keyed,
    Voted,
    Decrypted,
}

impl VoterState {
    pub fn name(self) -> &'static str {
        match self {
            VoterState::Init => "init",
            VoterState::Keyed => "keyed",
            VoterState::Voted => "voted",
            VoterState::Decrypted => "decrypted",
        }
    }
}

/// Voter-side state machine: `Init -> Keyed -> Voted -> Decrypted`.
///
/// A voter casts one ballot per broadcast public key (one key in plain
/// HEV, `k` keys with sampling) and answers decryption requests per key.
#[derive(Debug, Clone)]
pub struct Voter {
    id: VoterId,
    electorate: usize,
    plaintext: u64,
    state: VoterState,
    key: Option<KeyShare>,
    ballots: Vec<Ciphertext>,
    answered: BTreeSet<usize>,
}

impl Voter {
    /// `electorate` is the number of voters `n` in the election.
    pub fn new(id: VoterId, vote: Vote, electorate: usize) -> Self {
        Self::with_plaintext(id, vote.value(), electorate)
    }

    /// Unchecked plaintext; reachable from outside only via the adversary module.
    pub(crate) fn with_plaintext(id: VoterId, plaintext: u64, electorate: usize) -> Self {
        Self {
            id,
            electorate,
            plaintext,
            state: VoterState::Init,
            key: None,
            ballots: Vec::new(),
            answered: BTreeSet::new(),
        }
    }

    pub fn id(&self) -> VoterId {
        self.id
    }

    pub fn state(&self) -> VoterState {
        self.state
    }

    pub fn plaintext(&self) -> u64 {
        self.plaintext
    }

    pub fn key_share(&self) -> Option<&KeyShare> {
        self.key.as_ref()
    }

    pub fn ballots(&self) -> &[Ciphertext] {
        &self.ballots
    }

    fn expect(&self, allowed: &[VoterState], expected: &'static str) -> Result<(), HevError> {
        if allowed.contains(&self.state) {
            Ok(())
        } else {
            Err(HevError::OutOfPhase {
                party: self.id.to_string(),
                expected,
                actual: self.state.name(),
            })
        }
    }

    pub fn generate_key<R: RngCore + ?Sized>(
        &mut self,
        params: &GroupParams,
        rng: &mut R,
    ) -> Result<GroupElement, HevError> {
        self.expect(&[VoterState::Init], "init")?;
        let share = keygen_share(rng, params, self.id);
        let piece = share.public_piece.clone();
        self.key = Some(share);
        self.state = VoterState::Keyed;
        Ok(piece)
    }

    /// Encrypts the vote once under each broadcast key.
    pub fn cast<R: RngCore + ?Sized>(
        &mut self,
        params: &GroupParams,
        public_keys: &[GroupElement],
        rng: &mut R,
    ) -> Result<Vec<Ciphertext>, HevError> {
        self.expect(&[VoterState::Keyed], "keyed")?;
        if public_keys.is_empty() {
            return Err(HevError::EmptyShareSet);
        }
        self.ballots = public_keys
            .iter()
            .map(|pk| encrypt_exponent(params, pk, self.plaintext, &params.random_exponent(rng)))
            .collect();
        self.state = VoterState::Voted;
        Ok(self.ballots.clone())
    }

    /// Answers the decryption request for key `key_index`.
    ///
    /// The own-ballot guard is skipped in a one-voter election, where the
    /// aggregate is necessarily that ballot and the tally is the vote.
    pub fn respond(
        &mut self,
        params: &GroupParams,
        key_index: usize,
        request: &DecryptionRequest,
    ) -> Result<DecryptionShare, HevError> {
        self.expect(&[VoterState::Voted, VoterState::Decrypted], "voted")?;
        let own = self
            .ballots
            .get(key_index)
            .ok_or(HevError::KeyIndexOutOfRange(key_index))?;
        if !self.answered.insert(key_index) {
            return Err(HevError::DuplicateMessage(self.id));
        }
        let key = self.key.as_ref().expect("keyed before voting");
        let share = if self.electorate > 1 {
            decryption_share(params, key, request, own)?
        } else {
            DecryptionShare {
                voter_id: self.id,
                x_hat: params.exp(&request.x_r, key.secret()),
            }
        };
        self.state = VoterState::Decrypted;
        Ok(share)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GovernmentPhase {
    CollectingKeys,
    Broadcast,
    CollectingVotes,
    Aggregated,
    CollectingShares,
    Done,
}

impl GovernmentPhase {
    pub fn name(self) -> &'static str {
        match self {
            GovernmentPhase::CollectingKeys => "collecting-keys",
            GovernmentPhase::Broadcast => "broadcast",
            GovernmentPhase::CollectingVotes => "collecting-votes",
            GovernmentPhase::Aggregated => "aggregated",
            GovernmentPhase::CollectingShares => "collecting-shares",
            GovernmentPhase::Done => "done",
        }
    }

    pub(crate) fn check(self, allowed: &[GovernmentPhase], expected: &'static str) -> Result<(), HevError> {
        if allowed.contains(&self) {
            Ok(())
        } else {
            Err(HevError::OutOfPhase {
                party: "GT".to_owned(),
                expected,
                actual: self.name(),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HevResult {
    pub aggregate: Ciphertext,
    pub outcome: GroupElement,
    pub tally: u64,
}

/// Government-side state machine for plain HEV.
#[derive(Debug, Clone)]
pub struct Government {
    params: GroupParams,
    n: usize,
    phase: GovernmentPhase,
    pieces: BTreeMap<VoterId, GroupElement>,
    public_key: Option<GroupElement>,
    ballots: BTreeMap<VoterId, Ciphertext>,
    aggregate: Option<Ciphertext>,
    shares: BTreeMap<VoterId, DecryptionShare>,
}

impl Government {
    pub fn new(params: GroupParams, n: usize) -> Self {
        Self {
            params,
            n,
            phase: GovernmentPhase::CollectingKeys,
            pieces: BTreeMap::new(),
            public_key: None,
            ballots: BTreeMap::new(),
            aggregate: None,
            shares: BTreeMap::new(),
        }
    }

    pub fn phase(&self) -> GovernmentPhase {
        self.phase
    }

    pub fn voter_count(&self) -> usize {
        self.n
    }

    fn check_voter(&self, id: VoterId) -> Result<(), HevError> {
        if id.0 == 0 || id.0 as usize > self.n {
            return Err(HevError::UnknownVoter(id));
        }
        Ok(())
    }

    pub fn receive_key_piece(&mut self, id: VoterId, piece: GroupElement) -> Result<(), HevError> {
        self.phase
            .check(&[GovernmentPhase::CollectingKeys], "collecting-keys")?;
        self.check_voter(id)?;
        if self.pieces.contains_key(&id) {
            return Err(HevError::DuplicateMessage(id));
        }
        self.pieces.insert(id, piece);
        Ok(())
    }

    /// Combines all `n` pieces into `pK`.
    pub fn broadcast_public_key(&mut self) -> Result<GroupElement, HevError> {
        self.phase
            .check(&[GovernmentPhase::CollectingKeys], "collecting-keys")?;
        let missing: Vec<VoterId> = VoterId::range(self.n)
            .filter(|id| !self.pieces.contains_key(id))
            .collect();
        if !missing.is_empty() {
            return Err(HevError::MissingKeyPieces { missing });
        }
        let pieces: Vec<GroupElement> = self.pieces.values().cloned().collect();
        let pk = combine_public_key(&self.params, &pieces)?;
        self.public_key = Some(pk.clone());
        self.phase = GovernmentPhase::Broadcast;
        Ok(pk)
    }

    pub fn receive_ballot(&mut self, id: VoterId, ballot: Ciphertext) -> Result<(), HevError> {
        self.phase.check(
            &[GovernmentPhase::Broadcast, GovernmentPhase::CollectingVotes],
            "collecting-votes",
        )?;
        self.check_voter(id)?;
        if self.ballots.contains_key(&id) {
            return Err(HevError::DuplicateMessage(id));
        }
        self.ballots.insert(id, ballot);
        self.phase = GovernmentPhase::CollectingVotes;
        Ok(())
    }

    /// Aggregates once `R = n` ballots are in and returns `(X_R, Y_R, d)`.
    pub fn decryption_request(&mut self) -> Result<DecryptionRequest, HevError> {
        self.phase
            .check(&[GovernmentPhase::CollectingVotes], "collecting-votes")?;
        if self.ballots.len() != self.n {
            return Err(HevError::IncompleteTurnout {
                received: self.ballots.len(),
                expected: self.n,
            });
        }
        let ballots: Vec<Ciphertext> = self.ballots.values().cloned().collect();
        let agg = aggregate(&self.params, &ballots)?;
        let request = DecryptionRequest::new(&agg);
        self.aggregate = Some(agg);
        self.phase = GovernmentPhase::Aggregated;
        Ok(request)
    }

    pub fn receive_share(&mut self, share: DecryptionShare) -> Result<(), HevError> {
        self.phase.check(
            &[GovernmentPhase::Aggregated, GovernmentPhase::CollectingShares],
            "collecting-shares",
        )?;
        self.check_voter(share.voter_id)?;
        if self.shares.contains_key(&share.voter_id) {
            return Err(HevError::DuplicateShare(share.voter_id));
        }
        self.shares.insert(share.voter_id, share);
        self.phase = GovernmentPhase::CollectingShares;
        Ok(())
    }

    /// Combines the shares and decodes the tally. On error the government
    /// stays in its current phase; no recovery is attempted.
    pub fn finish(&mut self) -> Result<HevResult, HevError> {
        self.phase.check(
            &[GovernmentPhase::Aggregated, GovernmentPhase::CollectingShares],
            "collecting-shares",
        )?;
        let agg = self.aggregate.clone().expect("aggregated before decryption");
        let shares: Vec<DecryptionShare> = self.shares.values().cloned().collect();
        let holders: Vec<VoterId> = VoterId::range(self.n).collect();
        let outcome = combine_decrypt(&self.params, &shares, &holders, &agg.y)?;
        let tally = recover_tally(&self.params, &outcome, self.n as u64)?;
        self.phase = GovernmentPhase::Done;
        Ok(HevResult {
            aggregate: agg,
            outcome,
            tally,
        })
    }
}
