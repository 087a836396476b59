//! Integer primitives: primality, exact square roots, Legendre symbols.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Primes with `p ≡ 1 (mod 8)` and `q ≡ 7 (mod 8)` defining `K = Q(√2, √p, √q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimePair {
    pub p: u64,
    pub q: u64,
}

impl PrimePair {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidPair {
            p,
            q,
            reason: reason.to_string(),
        };
        if !is_prime(p) {
            return Err(bad("p is not prime"));
        }
        if !is_prime(q) {
            return Err(bad("q is not prime"));
        }
        if p % 8 != 1 {
            return Err(bad("p is not 1 mod 8"));
        }
        if q % 8 != 7 {
            return Err(bad("q is not 7 mod 8"));
        }
        Ok(Self { p, q })
    }

    /// Builds a pair without the congruence checks.
    ///
    /// Field arithmetic in `Q(√2, √p, √q)` only needs `p`, `q` distinct odd
    /// primes; the classification and theorem layers require [`PrimePair::new`].
    pub fn new_unchecked(p: u64, q: u64) -> Result<Self> {
        if p == q || p < 3 || q < 3 || !is_prime(p) || !is_prime(q) {
            return Err(Error::InvalidPair {
                p,
                q,
                reason: "need two distinct odd primes".into(),
            });
        }
        Ok(Self { p, q })
    }

    /// The three radicals `[2, p, q]`, indexed by bit position.
    pub fn radicals(&self) -> [u64; 3] {
        [2, self.p, self.q]
    }

    /// Product of the radicals selected by `mask` (bit 0 = 2, bit 1 = p, bit 2 = q).
    pub fn radicand(&self, mask: usize) -> u64 {
        let r = self.radicals();
        (0..3)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| r[i])
            .product()
    }

    /// Inverse of [`PrimePair::radicand`] on the seven quadratic subfields.
    pub fn mask_of(&self, d: u64) -> Option<usize> {
        (1..8).find(|&m| self.radicand(m) == d)
    }
}

impl fmt::Display for PrimePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.q)
    }
}

/// Exact integer square root: `Some(r)` with `r² = n`, otherwise `None`.
pub fn is_perfect_square(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    // Quadratic residues mod 64 reject most non-squares cheaply.
    let low = n.iter_u32_digits().next().unwrap_or(0) & 63;
    if !SQUARE_MOD_64[low as usize] {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

pub fn is_perfect_square_u64(n: u64) -> Option<u64> {
    let r = n.sqrt();
    (r * r == n).then_some(r)
}

const SQUARE_MOD_64: [bool; 64] = {
    let mut t = [false; 64];
    let mut i = 0;
    while i < 64 {
        t[(i * i) % 64] = true;
        i += 1;
    }
    t
};

/// `Some(r)` with `r² = x` when the rational `x` is the square of a rational.
pub fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    let n = is_perfect_square(x.numer())?;
    let d = is_perfect_square(x.denom())?;
    Some(BigRational::new(n, d))
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin; the witness set is exact for all `n < 3.3·10²⁴`,
/// which covers every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &s in &SMALL {
        if n.is_multiple_of(s) {
            return n == s;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Legendre symbol `(a/p)` by Euler's criterion. `p` must be an odd prime.
pub fn legendre_symbol(a: &BigInt, p: u64) -> Result<i8> {
    if p < 3 || !is_prime(p) {
        return Err(Error::InvalidArgument(format!(
            "legendre symbol needs an odd prime modulus, got {p}"
        )));
    }
    Ok(legendre_u64(residue(a, p), p))
}

pub fn legendre_i64(a: i64, p: u64) -> Result<i8> {
    legendre_symbol(&BigInt::from(a), p)
}

/// `(a/p)` for `0 ≤ a < p`, `p` an odd prime (unchecked).
pub(crate) fn legendre_u64(a: u64, p: u64) -> i8 {
    match pow_mod(a, (p - 1) / 2, p) {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

/// Least non-negative residue of `a` modulo `m`.
pub fn residue(a: &BigInt, m: u64) -> u64 {
    let r = (a % BigInt::from(m)).to_u64_digits();
    let v = match r.1.first() {
        Some(&v) => v,
        None => 0,
    };
    if r.0 == Sign::Minus && v != 0 {
        m - v
    } else {
        v
    }
}

/// Square root modulo an odd prime (Tonelli–Shanks). `a` must be a residue.
pub(crate) fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if legendre_u64(a, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while legendre_u64(z, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

pub fn is_squarefree(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut m = n;
    let mut f = 2u64;
    while f * f <= m {
        if m.is_multiple_of(f) {
            m /= f;
            if m.is_multiple_of(f) {
                return false;
            }
        }
        f += 1;
    }
    true
}

/// Primes up to `bound` by a sieve of Eratosthenes.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Largest power of two dividing `n` (`n > 0`).
pub fn two_part(n: &BigInt) -> BigInt {
    debug_assert!(!n.is_zero());
    let tz = n.trailing_zeros().unwrap_or(0);
    BigInt::one() << tz
}

pub(crate) fn biguint_bits(n: &BigInt) -> u64 {
    let u: &BigUint = n.magnitude();
    u.bits()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn perfect_squares() {
        assert_eq!(is_perfect_square(&big(1225)), Some(big(35)));
        assert_eq!(is_perfect_square(&big(0)), Some(big(0)));
        assert_eq!(is_perfect_square(&big(121)), Some(big(11)));
        assert_eq!(is_perfect_square(&big(122)), None);
        assert_eq!(is_perfect_square(&BigInt::from(-4)), None);
        let huge = BigInt::from(3u8).pow(401);
        assert_eq!(is_perfect_square(&(&huge * &huge)), Some(huge.clone()));
        assert_eq!(is_perfect_square(&(&huge * &huge + 1)), None);
    }

    #[test]
    fn perfect_square_exhaustive_to_one_million() {
        let mut root = 0u64;
        for n in 0..=1_000_000u64 {
            while (root + 1) * (root + 1) <= n {
                root += 1;
            }
            let expect = (root * root == n).then(|| big(root));
            assert_eq!(is_perfect_square(&big(n)), expect, "n = {n}");
        }
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_i64(17, 7).unwrap(), -1);
        assert_eq!(legendre_i64(113, 7).unwrap(), 1);
        assert_eq!(legendre_i64(14, 7).unwrap(), 0);
        assert_eq!(legendre_i64(-1, 7).unwrap(), -1);
        assert!(legendre_i64(3, 9).is_err());
        assert!(legendre_i64(3, 2).is_err());
    }

    #[test]
    fn legendre_matches_residue_enumeration() {
        for p in primes_up_to(100).into_iter().filter(|&p| p > 2) {
            let squares: Vec<u64> = (1..p).map(|x| x * x % p).collect();
            for a in -(p as i64)..(2 * p as i64) {
                let r = a.rem_euclid(p as i64) as u64;
                let expect = if r == 0 {
                    0
                } else if squares.contains(&r) {
                    1
                } else {
                    -1
                };
                assert_eq!(legendre_i64(a, p).unwrap(), expect, "({a}/{p})");
            }
        }
    }

    #[test]
    fn primality() {
        assert!(is_prime(7));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(!is_prime(561));
        assert!(is_prime(2));
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751));
        assert!(is_prime(18_446_744_073_709_551_557));
        let sieve = primes_up_to(10_000);
        for n in 0..10_000u64 {
            assert_eq!(is_prime(n), sieve.binary_search(&n).is_ok(), "n = {n}");
        }
    }

    #[test]
    fn modular_square_roots() {
        for p in primes_up_to(400).into_iter().filter(|&p| p > 2) {
            for a in 1..p {
                match sqrt_mod(a, p) {
                    Some(r) => assert_eq!(r * r % p, a),
                    None => assert_eq!(legendre_u64(a, p), -1),
                }
            }
        }
    }

    #[test]
    fn pair_validation() {
        assert!(PrimePair::new(17, 7).is_ok());
        assert!(PrimePair::new(7, 17).is_err());
        assert!(PrimePair::new(17, 3).is_err());
        assert!(PrimePair::new(25, 7).is_err());
        let pair = PrimePair::new(17, 7).unwrap();
        assert_eq!(pair.radicand(0b111), 238);
        assert_eq!(pair.mask_of(34), Some(0b011));
        assert_eq!(pair.mask_of(5), None);
    }

    #[test]
    fn rational_square_roots() {
        let x = BigRational::new(big(9), big(4));
        assert_eq!(rational_sqrt(&x), Some(BigRational::new(big(3), big(2))));
        assert_eq!(rational_sqrt(&BigRational::new(big(2), big(1))), None);
    }

    proptest::proptest! {
        #[test]
        fn legendre_is_multiplicative(a in -10_000i64..10_000, b in -10_000i64..10_000, idx in 0usize..20) {
            let p = primes_up_to(100)[idx + 1];
            let ab = legendre_i64(a * b, p).unwrap();
            proptest::prop_assert_eq!(ab, legendre_i64(a, p).unwrap() * legendre_i64(b, p).unwrap());
        }
    }
}
