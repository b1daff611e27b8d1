//! Prime-order subgroup of the integers modulo a safe prime.
//!
//! Every HEV value (key pieces, ciphertext components, decryption shares,
//! decrypted outcomes) lives in the order-`q` subgroup generated by `g`.
//! Two parameter sets are provided: [`GroupParams::tiny`] (p = 23) for
//! hand-checkable tests and [`GroupParams::default_256`] for realistic runs.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{Num, One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::arith;

/// Smallest subgroup order width accepted by [`GroupParams::generate`].
pub const MIN_GROUP_BITS: u64 = 16;

const MAX_GENERATION_ATTEMPTS: usize = 2_000_000;

// 256-bit Sophie Germain prime q with p = 2q + 1; g = 4 is a quadratic residue.
const DEFAULT_Q_HEX: &str = "bcf5b45afac26cb0081683761dedcfa9a399c5b631702a245e3564a290f7e0f9";
const DEFAULT_P_HEX: &str = "179eb68b5f584d960102d06ec3bdb9f5347338b6c62e05448bc6ac94521efc1f3";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("invalid group parameters: {0}")]
    InvalidParams(&'static str),
    #[error("group size of {0} bits is below the minimum of {MIN_GROUP_BITS}")]
    TooFewBits(u64),
    #[error("no safe prime found after {0} attempts")]
    GenerationFailed(usize),
    #[error("value is not an element of the order-q subgroup")]
    NotInGroup,
    #[error("no exponent in [0, {bound}] maps to the target")]
    NotFound { bound: u64 },
    #[error("malformed hexadecimal integer {0:?}")]
    InvalidHex(String),
}

/// Cyclic group parameters: modulus `p`, prime subgroup order `q` and
/// generator `g` of that subgroup.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupParams {
    p: BigUint,
    q: BigUint,
    g: BigUint,
}

/// An element of the order-`q` subgroup.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(BigUint);

/// An exponent in `[0, q)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar(BigUint);

impl GroupParams {
    /// Validates and wraps `(p, q, g)`.
    pub fn new(p: BigUint, q: BigUint, g: BigUint) -> Result<Self, GroupError> {
        // Validation only needs Miller-Rabin bases, not secret randomness.
        let mut rng = ChaCha20Rng::seed_from_u64(0x5eed);
        if !arith::is_probable_prime(&p, &mut rng) {
            return Err(GroupError::InvalidParams("p is not prime"));
        }
        if !arith::is_probable_prime(&q, &mut rng) {
            return Err(GroupError::InvalidParams("q is not prime"));
        }
        if !((&p - 1u32) % &q).is_zero() {
            return Err(GroupError::InvalidParams("q does not divide p - 1"));
        }
        if g < BigUint::from(2u32) || g >= p {
            return Err(GroupError::InvalidParams("g outside [2, p-1]"));
        }
        if !g.modpow(&q, &p).is_one() {
            return Err(GroupError::InvalidParams("g does not have order q"));
        }
        Ok(Self { p, q, g })
    }

    /// p = 23, q = 11, g = 2.
    pub fn tiny() -> Self {
        Self {
            p: BigUint::from(23u32),
            q: BigUint::from(11u32),
            g: BigUint::from(2u32),
        }
    }

    /// Fixed 257-bit safe prime with a 256-bit subgroup order.
    pub fn default_256() -> Self {
        Self {
            p: BigUint::from_str_radix(DEFAULT_P_HEX, 16).expect("valid constant"),
            q: BigUint::from_str_radix(DEFAULT_Q_HEX, 16).expect("valid constant"),
            g: BigUint::from(4u32),
        }
    }

    /// Generates a safe-prime group whose subgroup order `q` has exactly
    /// `bits` bits. Deterministic for a seeded `rng`.
    pub fn generate<R: RngCore + ?Sized>(bits: u64, rng: &mut R) -> Result<Self, GroupError> {
        if bits < MIN_GROUP_BITS {
            return Err(GroupError::TooFewBits(bits));
        }
        for _ in 0..MAX_GENERATION_ATTEMPTS {
            let mut q = arith::random_with_top_bit(rng, bits);
            q.set_bit(0, true);
            if !is_sophie_germain(&q, rng) {
                continue;
            }
            let p = (&q << 1u32) + 1u32;
            loop {
                let h = arith::random_in_range(rng, &BigUint::from(2u32), &(&p - 1u32));
                let g = h.modpow(&BigUint::from(2u32), &p);
                if !g.is_one() {
                    return Ok(Self { p, q, g });
                }
            }
        }
        Err(GroupError::GenerationFailed(MAX_GENERATION_ATTEMPTS))
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn generator(&self) -> GroupElement {
        GroupElement(self.g.clone())
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(BigUint::one())
    }

    /// Checks subgroup membership of a raw integer.
    pub fn element(&self, value: BigUint) -> Result<GroupElement, GroupError> {
        if value.is_zero() || value >= self.p || !value.modpow(&self.q, &self.p).is_one() {
            return Err(GroupError::NotInGroup);
        }
        Ok(GroupElement(value))
    }

    pub fn element_from_hex(&self, hex: &str) -> Result<GroupElement, GroupError> {
        self.element(parse_hex(hex)?)
    }

    /// Reduces `value` modulo `q`.
    pub fn scalar(&self, value: BigUint) -> Scalar {
        Scalar(value % &self.q)
    }

    pub fn scalar_u64(&self, value: u64) -> Scalar {
        self.scalar(BigUint::from(value))
    }

    pub fn scalar_add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.scalar(&a.0 + &b.0)
    }

    /// Uniform scalar in `{0, ..., q-1}`.
    pub fn random_exponent<R: RngCore + ?Sized>(&self, rng: &mut R) -> Scalar {
        Scalar(arith::random_in_range(rng, &BigUint::zero(), &self.q))
    }

    /// Uniform scalar in `{1, ..., q-1}`.
    pub fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Scalar {
        Scalar(arith::random_in_range(rng, &BigUint::one(), &self.q))
    }

    pub fn exp(&self, base: &GroupElement, e: &Scalar) -> GroupElement {
        GroupElement(base.0.modpow(&e.0, &self.p))
    }

    /// `base^e` for a small non-negative integer exponent.
    pub fn exp_u64(&self, base: &GroupElement, e: u64) -> GroupElement {
        GroupElement(base.0.modpow(&BigUint::from(e), &self.p))
    }

    /// `g^e`.
    pub fn g_pow(&self, e: &Scalar) -> GroupElement {
        GroupElement(self.g.modpow(&e.0, &self.p))
    }

    pub fn g_pow_u64(&self, e: u64) -> GroupElement {
        self.g_pow(&self.scalar_u64(e))
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement((&a.0 * &b.0) % &self.p)
    }

    /// Inverse via `a^(q-1)`, valid for subgroup members.
    pub fn inv(&self, a: &GroupElement) -> GroupElement {
        GroupElement(a.0.modpow(&(&self.q - 1u32), &self.p))
    }

    /// `a / b`.
    pub fn div(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.mul(a, &self.inv(b))
    }

    pub fn product<'a, I>(&self, elements: I) -> GroupElement
    where
        I: IntoIterator<Item = &'a GroupElement>,
    {
        elements.into_iter().fold(self.identity(), |acc, e| self.mul(&acc, e))
    }

    /// Smallest `T` in `[0, bound]` with `g^T = target`, by linear scan.
    pub fn discrete_log_bounded(&self, target: &GroupElement, bound: u64) -> Result<u64, GroupError> {
        let g = self.generator();
        let mut acc = self.identity();
        for t in 0..=bound {
            if &acc == target {
                return Ok(t);
            }
            acc = self.mul(&acc, &g);
        }
        Err(GroupError::NotFound { bound })
    }
}

fn is_sophie_germain<R: RngCore + ?Sized>(q: &BigUint, rng: &mut R) -> bool {
    let p = (q << 1u32) + 1u32;
    if arith::has_small_factor(q) || arith::has_small_factor(&p) {
        return false;
    }
    arith::is_probable_prime(q, rng) && arith::is_probable_prime(&p, rng)
}

impl fmt::Debug for GroupParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupParams")
            .field("p", &format_args!("{:x}", self.p))
            .field("q", &format_args!("{:x}", self.q))
            .field("g", &format_args!("{:x}", self.g))
            .finish()
    }
}

impl GroupElement {
    /// Skips the membership check; for tests that need non-members.
    #[cfg(test)]
    pub(crate) fn unchecked(value: BigUint) -> Self {
        GroupElement(value)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    /// Lowercase big-endian hexadecimal.
    pub fn to_hex(&self) -> String {
        format!("{:x}", self.0)
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElement({:x})", self.0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Scalar {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_hex(&self) -> String {
        format!("{:x}", self.0)
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({:x})", self.0)
    }
}

/// Parses a lowercase (or uppercase) hexadecimal big-endian integer.
pub fn parse_hex(hex: &str) -> Result<BigUint, GroupError> {
    if hex.is_empty() || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(GroupError::InvalidHex(hex.to_owned()));
    }
    BigUint::from_str_radix(hex, 16).map_err(|_| GroupError::InvalidHex(hex.to_owned()))
}

/// Precomputed `g^T -> T` table for repeated bounded decoding against the
/// same electorate size. Agrees with [`GroupParams::discrete_log_bounded`].
#[derive(Debug, Clone)]
pub struct DlogTable {
    bound: u64,
    table: HashMap<GroupElement, u64>,
}

impl DlogTable {
    pub fn new(params: &GroupParams, bound: u64) -> Self {
        let g = params.generator();
        let mut table = HashMap::with_capacity(bound as usize + 1);
        let mut acc = params.identity();
        for t in 0..=bound {
            table.entry(acc.clone()).or_insert(t);
            acc = params.mul(&acc, &g);
        }
        Self { bound, table }
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn lookup(&self, target: &GroupElement) -> Result<u64, GroupError> {
        self.table
            .get(target)
            .copied()
            .ok_or(GroupError::NotFound { bound: self.bound })
    }
}
