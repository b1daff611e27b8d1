//! Blind-signature voting.
//!
//! Voters obtain an RSA signature on a blinded `(m, r)` ballot from the
//! government after an eligibility check, unblind it, and post `(m, r, s)`
//! to an append-only ledger that accepts a ballot iff the signature
//! verifies and the nonce `r` has not been seen before.
//!
//! Signatures are over `SHA-256(len(m) || m || r) mod N` rather than the
//! raw ballot, which rules out multiplicative forgeries.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::ops::Range;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use rand::RngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::arith;
use crate::hev::VoterId;

/// Byte width of the ballot nonce `r`.
pub const NONCE_BYTES: usize = 32;

pub const DEFAULT_PUBLIC_EXPONENT: u32 = 65_537;

const MIN_MODULUS_BITS: u64 = 32;
const MAX_KEYGEN_ATTEMPTS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BsvError {
    #[error("modulus of {0} bits is below the minimum of {MIN_MODULUS_BITS}")]
    TooFewBits(u64),
    #[error("RSA key generation failed after {0} attempts")]
    KeygenFailed(usize),
    #[error("inconsistent RSA key: {0}")]
    InvalidKey(&'static str),
    #[error("ballot content must be non-empty and free of control characters")]
    InvalidContent,
    #[error("blinding factor is not invertible modulo N")]
    FactorNotInvertible,
    #[error("{0} is not an eligible voter")]
    IneligibleVoter(VoterId),
    #[error("{0} already received a signature")]
    AlreadySigned(VoterId),
    #[error("sign window {sign:?} and post window {post:?} must be non-empty and disjoint")]
    OverlappingWindows { sign: Range<u64>, post: Range<u64> },
    #[error("posting window is still open at t = {0}")]
    PostingOpen(u64),
}

/// Why the ledger refused a ballot.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rejection {
    #[error("signature does not verify")]
    BadSignature,
    #[error("nonce already used by an accepted ballot")]
    DuplicateNonce,
    #[error("submission outside the posting window")]
    OutsidePostingWindow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub modulus: BigUint,
    pub exponent: BigUint,
}

#[derive(Clone, PartialEq, Eq)]
pub struct SignerKeys {
    public: PublicKey,
    private_exponent: BigUint,
}

impl SignerKeys {
    /// Wraps `(N, e, d)` given the factors of `N`, checking
    /// `e * d = 1 mod lcm(p - 1, q - 1)`.
    pub fn from_factors(p: &BigUint, q: &BigUint, e: BigUint, d: BigUint) -> Result<Self, BsvError> {
        let lambda = carmichael(p, q);
        if !((&e * &d) % &lambda).is_one() {
            return Err(BsvError::InvalidKey("e * d is not 1 mod lambda(N)"));
        }
        Ok(Self {
            public: PublicKey {
                modulus: p * q,
                exponent: e,
            },
            private_exponent: d,
        })
    }

    pub fn public(&self) -> &PublicKey {
        &self.public
    }

    /// Raw RSA private operation `x^d mod N`.
    pub fn sign_raw(&self, x: &BigUint) -> BigUint {
        x.modpow(&self.private_exponent, &self.public.modulus)
    }
}

impl fmt::Debug for SignerKeys {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SignerKeys")
            .field("public", &self.public)
            .finish_non_exhaustive()
    }
}

fn carmichael(p: &BigUint, q: &BigUint) -> BigUint {
    (p - 1u32).lcm(&(q - 1u32))
}

impl PublicKey {
    /// Raw RSA public operation `x^e mod N`.
    pub fn apply(&self, x: &BigUint) -> BigUint {
        x.modpow(&self.exponent, &self.modulus)
    }

    pub fn verify(&self, ballot: &Ballot) -> bool {
        match &ballot.signature {
            Some(s) => s < &self.modulus && self.apply(s) == ballot_digest(ballot, self),
            None => false,
        }
    }
}

/// Generates an RSA key with a `bits`-bit modulus and `e = 65537`.
pub fn signer_keygen<R: RngCore + ?Sized>(rng: &mut R, bits: u64) -> Result<SignerKeys, BsvError> {
    if bits < MIN_MODULUS_BITS {
        return Err(BsvError::TooFewBits(bits));
    }
    let e = BigUint::from(DEFAULT_PUBLIC_EXPONENT);
    let p_bits = bits.div_ceil(2);
    let q_bits = bits - p_bits;
    for _ in 0..MAX_KEYGEN_ATTEMPTS {
        let p = random_prime(rng, p_bits);
        let q = random_prime(rng, q_bits);
        if p == q || (&p * &q).bits() != bits {
            continue;
        }
        let lambda = carmichael(&p, &q);
        let Some(d) = arith::mod_inverse(&e, &lambda) else {
            continue;
        };
        return SignerKeys::from_factors(&p, &q, e, d);
    }
    Err(BsvError::KeygenFailed(MAX_KEYGEN_ATTEMPTS))
}

fn random_prime<R: RngCore + ?Sized>(rng: &mut R, bits: u64) -> BigUint {
    loop {
        let mut c = arith::random_with_top_bit(rng, bits);
        // Two top bits set keeps the product at full width.
        if bits >= 2 {
            c.set_bit(bits - 2, true);
        }
        c.set_bit(0, true);
        if arith::is_probable_prime(&c, rng) {
            return c;
        }
    }
}

/// A ballot `(m, r, s)`: content, 32-byte nonce, optional signature.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ballot {
    content: String,
    nonce: [u8; NONCE_BYTES],
    pub signature: Option<BigUint>,
}

impl Ballot {
    /// Fresh ballot with a uniformly random nonce.
    pub fn new<R: RngCore + ?Sized>(content: &str, rng: &mut R) -> Result<Self, BsvError> {
        let mut nonce = [0u8; NONCE_BYTES];
        rng.fill_bytes(&mut nonce);
        Self::with_nonce(content, nonce)
    }

    pub fn with_nonce(content: &str, nonce: [u8; NONCE_BYTES]) -> Result<Self, BsvError> {
        if content.is_empty() || content.chars().any(char::is_control) {
            return Err(BsvError::InvalidContent);
        }
        Ok(Self {
            content: content.to_owned(),
            nonce,
            signature: None,
        })
    }

    pub fn content(&self) -> &str {
        &self.content
    }

    pub fn nonce(&self) -> &[u8; NONCE_BYTES] {
        &self.nonce
    }

    pub fn nonce_hex(&self) -> String {
        self.nonce.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Same nonce and signature, different content.
    pub fn with_content(&self, content: &str) -> Result<Self, BsvError> {
        let mut b = Self::with_nonce(content, self.nonce)?;
        b.signature = self.signature.clone();
        Ok(b)
    }
}

/// `SHA-256(len(m) as u64 BE || m || r) mod N`.
pub fn ballot_digest(ballot: &Ballot, public: &PublicKey) -> BigUint {
    let mut hasher = Sha256::new();
    hasher.update((ballot.content.len() as u64).to_be_bytes());
    hasher.update(ballot.content.as_bytes());
    hasher.update(ballot.nonce);
    BigUint::from_bytes_be(&hasher.finalize()) % &public.modulus
}

/// Voter-side secret `b` and the blinded digest sent for signing.
#[derive(Clone, PartialEq, Eq)]
pub struct BlindingState {
    factor: BigUint,
    pub blinded: BigUint,
}

impl fmt::Debug for BlindingState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlindingState")
            .field("blinded", &self.blinded)
            .finish_non_exhaustive()
    }
}

/// `blinded = digest(m, r) * b^e mod N` for a random unit `b` in `[2, N-1]`.
pub fn blind<R: RngCore + ?Sized>(ballot: &Ballot, public: &PublicKey, rng: &mut R) -> BlindingState {
    let low = BigUint::from(2u32);
    loop {
        let b = arith::random_in_range(rng, &low, &public.modulus);
        if let Ok(state) = blind_with_factor(ballot, public, b) {
            return state;
        }
    }
}

/// Blinding with a caller-chosen factor.
pub fn blind_with_factor(ballot: &Ballot, public: &PublicKey, factor: BigUint) -> Result<BlindingState, BsvError> {
    if !factor.gcd(&public.modulus).is_one() {
        return Err(BsvError::FactorNotInvertible);
    }
    let blinded = (ballot_digest(ballot, public) * public.apply(&factor)) % &public.modulus;
    Ok(BlindingState { factor, blinded })
}

/// `s = s' * b^-1 mod N`.
pub fn unblind(s_prime: &BigUint, state: &BlindingState, public: &PublicKey) -> BigUint {
    let inv = arith::mod_inverse(&state.factor, &public.modulus).expect("factor checked coprime at blinding");
    (s_prime * inv) % &public.modulus
}

/// Eligible voters and who has already been served a signature.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    eligible: BTreeSet<VoterId>,
    served: BTreeSet<VoterId>,
}

impl Registry {
    pub fn new(eligible: impl IntoIterator<Item = VoterId>) -> Self {
        Self {
            eligible: eligible.into_iter().collect(),
            served: BTreeSet::new(),
        }
    }

    pub fn is_served(&self, id: VoterId) -> bool {
        self.served.contains(&id)
    }

    pub fn served_count(&self) -> usize {
        self.served.len()
    }
}

/// `s' = blinded^d mod N`, at most once per eligible voter.
pub fn sign_blinded(
    keys: &SignerKeys,
    blinded: &BigUint,
    voter_id: VoterId,
    registry: &mut Registry,
) -> Result<BigUint, BsvError> {
    if !registry.eligible.contains(&voter_id) {
        return Err(BsvError::IneligibleVoter(voter_id));
    }
    if !registry.served.insert(voter_id) {
        return Err(BsvError::AlreadySigned(voter_id));
    }
    Ok(keys.sign_raw(blinded))
}

/// Disjoint signing and posting windows on a logical clock.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseWindows {
    pub sign: Range<u64>,
    pub post: Range<u64>,
}

impl PhaseWindows {
    pub fn new(sign: Range<u64>, post: Range<u64>) -> Result<Self, BsvError> {
        let overlap = sign.start < post.end && post.start < sign.end;
        if sign.is_empty() || post.is_empty() || overlap {
            return Err(BsvError::OverlappingWindows { sign, post });
        }
        Ok(Self { sign, post })
    }
}

/// Append-only ballot store.
#[derive(Debug, Clone)]
pub struct Ledger {
    public: PublicKey,
    windows: PhaseWindows,
    candidates: Vec<String>,
    accepted: Vec<Ballot>,
    seen_nonces: HashSet<[u8; NONCE_BYTES]>,
}

impl Ledger {
    pub fn new(public: PublicKey, windows: PhaseWindows, candidates: Vec<String>) -> Self {
        Self {
            public,
            windows,
            candidates,
            accepted: Vec::new(),
            seen_nonces: HashSet::new(),
        }
    }

    pub fn windows(&self) -> &PhaseWindows {
        &self.windows
    }

    pub fn accepted(&self) -> &[Ballot] {
        &self.accepted
    }

    /// Appends `ballot` iff `now` is in the posting window, its signature
    /// verifies and its nonce is fresh. Returns the 0-based accept order.
    pub fn submit(&mut self, ballot: Ballot, now: u64) -> Result<usize, Rejection> {
        if !self.windows.post.contains(&now) {
            return Err(Rejection::OutsidePostingWindow);
        }
        if !self.public.verify(&ballot) {
            return Err(Rejection::BadSignature);
        }
        if !self.seen_nonces.insert(ballot.nonce) {
            return Err(Rejection::DuplicateNonce);
        }
        self.accepted.push(ballot);
        Ok(self.accepted.len() - 1)
    }

    /// Counts accepted ballots per content; every registered candidate
    /// appears, with zero if unvoted.
    pub fn tally(&self, now: u64) -> Result<BTreeMap<String, u64>, BsvError> {
        if now < self.windows.post.end {
            return Err(BsvError::PostingOpen(now));
        }
        let mut counts: BTreeMap<String, u64> = self.candidates.iter().map(|c| (c.clone(), 0)).collect();
        for b in &self.accepted {
            *counts.entry(b.content.clone()).or_insert(0) += 1;
        }
        Ok(counts)
    }

    /// One line per accepted ballot: `m <TAB> r-hex <TAB> s-hex <TAB> order`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (order, b) in self.accepted.iter().enumerate() {
            let s = b.signature.as_ref().map(|s| format!("{s:x}")).unwrap_or_default();
            out.push_str(&format!("{}\t{}\t{}\t{}\n", b.content, b.nonce_hex(), s, order));
        }
        out
    }
}
