//! Big-integer helpers shared by the group and RSA code: probabilistic
//! primality, uniform sampling and modular inverses.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;

const SMALL_PRIMES: [u32; 54] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
    113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239,
    241, 251,
];

/// Miller-Rabin rounds; error probability at most 4^-40 per call.
const MR_ROUNDS: usize = 40;

/// Returns `true` if `n` has a small prime factor other than itself.
pub(crate) fn has_small_factor(n: &BigUint) -> bool {
    SMALL_PRIMES.iter().any(|&sp| {
        let sp = BigUint::from(sp);
        n != &sp && (n % &sp).is_zero()
    })
}

/// Probabilistic primality test (trial division followed by Miller-Rabin
/// with random bases drawn from `rng`).
pub fn is_probable_prime<R: RngCore + ?Sized>(n: &BigUint, rng: &mut R) -> bool {
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    if SMALL_PRIMES.iter().any(|&sp| n == &BigUint::from(sp)) {
        return true;
    }
    if has_small_factor(n) {
        return false;
    }

    let n_minus_one = n - 1u32;
    let mut d = n_minus_one.clone();
    let mut s = 0u32;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }

    let mut rng = RngAdapter(rng);
    'witness: for _ in 0..MR_ROUNDS {
        let a = rng.gen_biguint_range(&two, &n_minus_one);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Uniform integer in `[low, high)`.
pub fn random_in_range<R: RngCore + ?Sized>(rng: &mut R, low: &BigUint, high: &BigUint) -> BigUint {
    RngAdapter(rng).gen_biguint_range(low, high)
}

/// Uniform integer with exactly `bits` bits (top bit set).
pub fn random_with_top_bit<R: RngCore + ?Sized>(rng: &mut R, bits: u64) -> BigUint {
    let mut n = RngAdapter(rng).gen_biguint(bits);
    n.set_bit(bits - 1, true);
    n
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m_signed = BigInt::from(m.clone());
    let ext = a.extended_gcd(&m_signed);
    if !ext.gcd.is_one() {
        return None;
    }
    ext.x.mod_floor(&m_signed).to_biguint()
}

/// Lets `?Sized` generators (e.g. `&mut dyn RngCore`) drive `RandBigInt`.
struct RngAdapter<'a, R: RngCore + ?Sized>(&'a mut R);

impl<R: RngCore + ?Sized> RngCore for RngAdapter<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)
    }
}
