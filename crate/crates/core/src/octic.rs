//! Exact arithmetic in `K = Q(√2, √p, √q)`.
//!
//! Elements are stored on the radical basis `√(∏S)`, `S ⊆ {2, p, q}`, as eight
//! integer numerators over one positive common denominator. A subset is a
//! 3-bit mask: bit 0 is `2`, bit 1 is `p`, bit 2 is `q`. All square roots of
//! radicands are taken positive, so `√a·√b = √(ab)` holds on the basis.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::arith::{biguint_bits, rational_sqrt, PrimePair};
use crate::error::{Error, Result};
use crate::quadratic::QuadElem;

pub const SUBSET_LABELS: [&str; 8] = ["", "2", "p", "2p", "q", "2q", "pq", "2pq"];

/// Order in which coordinates are written out: by subset size, then `2 < p < q`.
pub const LABEL_ORDER: [usize; 8] = [0, 1, 2, 4, 3, 5, 6, 7];

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OcticElem {
    pair: PrimePair,
    num: [BigInt; 8],
    den: BigInt,
}

fn zeros() -> [BigInt; 8] {
    std::array::from_fn(|_| BigInt::zero())
}

/// Number of radicals (in order `2, p, q`) needed to express a mask set.
fn level_of_mask(m: usize) -> usize {
    (usize::BITS - m.leading_zeros()) as usize
}

impl OcticElem {
    fn normalized(pair: PrimePair, mut num: [BigInt; 8], mut den: BigInt) -> Self {
        debug_assert!(!den.is_zero());
        if den.is_negative() {
            den = -den;
            for n in num.iter_mut() {
                *n = -&*n;
            }
        }
        if !den.is_one() {
            let mut g = den.clone();
            for n in num.iter() {
                if g.is_one() {
                    break;
                }
                if !n.is_zero() {
                    g = g.gcd(n);
                }
            }
            if !g.is_one() {
                for n in num.iter_mut() {
                    *n = &*n / &g;
                }
                den = &den / &g;
            }
        }
        if num.iter().all(Zero::is_zero) {
            den = BigInt::one();
        }
        Self { pair, num, den }
    }

    pub fn zero(pair: PrimePair) -> Self {
        Self {
            pair,
            num: zeros(),
            den: BigInt::one(),
        }
    }

    pub fn one(pair: PrimePair) -> Self {
        Self::from_integer(pair, BigInt::one())
    }

    pub fn from_integer(pair: PrimePair, n: BigInt) -> Self {
        let mut num = zeros();
        num[0] = n;
        Self {
            pair,
            num,
            den: BigInt::one(),
        }
    }

    pub fn from_rational(pair: PrimePair, x: &BigRational) -> Self {
        let mut num = zeros();
        num[0] = x.numer().clone();
        Self::normalized(pair, num, x.denom().clone())
    }

    /// The basis element `√(∏S)` for the subset mask `S`.
    pub fn basis(pair: PrimePair, mask: usize) -> Self {
        let mut num = zeros();
        num[mask & 7] = BigInt::one();
        Self {
            pair,
            num,
            den: BigInt::one(),
        }
    }

    pub fn from_coords(pair: PrimePair, coords: &[BigRational; 8]) -> Self {
        let den = coords
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let num = std::array::from_fn(|i| coords[i].numer() * (&den / coords[i].denom()));
        Self::normalized(pair, num, den)
    }

    pub fn from_numerators(pair: PrimePair, num: [BigInt; 8], den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalized(pair, num, den))
    }

    pub fn pair(&self) -> PrimePair {
        self.pair
    }

    pub fn numerators(&self) -> &[BigInt; 8] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn coord(&self, mask: usize) -> BigRational {
        BigRational::new(self.num[mask & 7].clone(), self.den.clone())
    }

    pub fn coords(&self) -> [BigRational; 8] {
        std::array::from_fn(|m| self.coord(m))
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(Zero::is_zero)
    }

    /// Bitset of subset masks carrying a nonzero coordinate.
    pub fn support(&self) -> u8 {
        (0..8)
            .filter(|&m| !self.num[m].is_zero())
            .fold(0u8, |acc, m| acc | 1 << m)
    }

    /// True when every nonzero coordinate sits on one of `masks`.
    pub fn lies_in(&self, masks: &[usize]) -> bool {
        (0..8).all(|m| self.num[m].is_zero() || masks.contains(&m))
    }

    fn level(&self) -> usize {
        (0..8)
            .filter(|&m| !self.num[m].is_zero())
            .map(level_of_mask)
            .max()
            .unwrap_or(0)
    }

    /// Largest numerator or denominator size in bits.
    pub fn height_bits(&self) -> u64 {
        self.num
            .iter()
            .map(biguint_bits)
            .chain(std::iter::once(biguint_bits(&self.den)))
            .max()
            .unwrap_or(0)
    }

    fn check_pair(&self, other: &Self) -> Result<()> {
        if self.pair != other.pair {
            return Err(Error::PairMismatch {
                left: self.pair.to_string(),
                right: other.pair.to_string(),
            });
        }
        Ok(())
    }

    fn add_impl(&self, other: &Self, negate: bool) -> Self {
        let den = &self.den * &other.den;
        let num = std::array::from_fn(|i| {
            let a = &self.num[i] * &other.den;
            let b = &other.num[i] * &self.den;
            if negate {
                a - b
            } else {
                a + b
            }
        });
        Self::normalized(self.pair, num, den)
    }

    fn mul_impl(&self, other: &Self) -> Self {
        let radicand: [u64; 8] = std::array::from_fn(|m| self.pair.radicand(m));
        let mut num = zeros();
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.num.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let t = a * b;
                let k = i & j;
                if k == 0 {
                    num[i ^ j] += t;
                } else {
                    num[i ^ j] += t * radicand[k];
                }
            }
        }
        Self::normalized(self.pair, num, &self.den * &other.den)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_pair(other)?;
        Ok(self.add_impl(other, false))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_pair(other)?;
        Ok(self.add_impl(other, true))
    }

    pub fn neg(&self) -> Self {
        Self {
            pair: self.pair,
            num: std::array::from_fn(|i| -&self.num[i]),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let num = std::array::from_fn(|i| &self.num[i] * c.numer());
        Self::normalized(self.pair, num, &self.den * c.denom())
    }

    pub fn square(&self) -> Self {
        self.mul_impl(self)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.pair);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_impl(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// Signed integer power; negative exponents need an invertible element.
    pub fn powi(&self, e: i64) -> Result<Self> {
        let p = self.pow(e.unsigned_abs() as u32);
        if e < 0 {
            p.inverse()
        } else {
            Ok(p)
        }
    }

    /// Split `x = A + B·√r` over the field generated by the first `level − 1` radicals.
    fn split(&self, level: usize) -> (Self, Self) {
        let bit = 1usize << (level - 1);
        let mut a = zeros();
        let mut b = zeros();
        for m in 0..8 {
            if m & bit == 0 {
                a[m] = self.num[m].clone();
            } else {
                b[m ^ bit] = self.num[m].clone();
            }
        }
        (
            Self::normalized(self.pair, a, self.den.clone()),
            Self::normalized(self.pair, b, self.den.clone()),
        )
    }

    /// `A + B·√r`, the inverse of [`OcticElem::split`].
    fn join(a: &Self, b: &Self, level: usize) -> Self {
        let bit = 1usize << (level - 1);
        let mut shifted = zeros();
        for m in 0..8 {
            if !b.num[m].is_zero() {
                shifted[m | bit] = b.num[m].clone();
            }
        }
        let b_up = Self::normalized(a.pair, shifted, b.den.clone());
        a.add_impl(&b_up, false)
    }

    fn radical(&self, level: usize) -> u64 {
        self.pair.radicals()[level - 1]
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.inverse_at(self.level()))
    }

    fn inverse_at(&self, level: usize) -> Self {
        if level == 0 {
            let mut num = zeros();
            num[0] = self.den.clone();
            return Self::normalized(self.pair, num, self.num[0].clone());
        }
        let conj = self.flip(1 << (level - 1));
        let n = self.mul_impl(&conj);
        conj.mul_impl(&n.inverse_at(level - 1))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_pair(other)?;
        Ok(self.mul_impl(&other.inverse()?))
    }

    /// Negate the coordinates whose subset meets `flip` an odd number of times.
    fn flip(&self, flip: u8) -> Self {
        let num = std::array::from_fn(|m| {
            if (m as u8 & flip).count_ones() % 2 == 1 {
                -&self.num[m]
            } else {
                self.num[m].clone()
            }
        });
        Self {
            pair: self.pair,
            num,
            den: self.den.clone(),
        }
    }

    /// Exact sign of the value with all radicals positive.
    pub fn sign(&self) -> i8 {
        self.sign_at(self.level())
    }

    fn sign_at(&self, level: usize) -> i8 {
        if level == 0 {
            return match self.num[0].sign() {
                num_bigint::Sign::Minus => -1,
                num_bigint::Sign::NoSign => 0,
                num_bigint::Sign::Plus => 1,
            };
        }
        let (a, b) = self.split(level);
        let sa = a.sign_at(level - 1);
        let sb = b.sign_at(level - 1);
        if sb == 0 || sa == sb {
            return sa;
        }
        if sa == 0 {
            return sb;
        }
        // Opposite signs: A + B√r has the sign of the larger of A², r·B².
        let r = BigInt::from(self.radical(level));
        let diff = a.square().add_impl(&b.square().scale(&BigRational::from_integer(r)), true);
        if diff.sign_at(level - 1) > 0 {
            sa
        } else {
            sb
        }
    }

    /// Exact signs of the eight real embeddings, in lexicographic sign-triple order.
    pub fn embedding_signs(&self) -> [i8; 8] {
        std::array::from_fn(|e| {
            apply_automorphism(Automorphism::from_embedding_index(e), self).sign()
        })
    }

    pub fn is_totally_positive(&self) -> bool {
        self.embedding_signs().iter().all(|&s| s > 0)
    }

    /// Product of the eight conjugates, a rational number.
    pub fn absolute_norm(&self) -> BigRational {
        let mut acc = self.clone();
        for flip in 1..8u8 {
            acc = acc.mul_impl(&self.flip(flip));
        }
        debug_assert!(acc.lies_in(&[0]));
        acc.coord(0)
    }

    fn rational_part(&self) -> BigRational {
        self.coord(0)
    }

    /// Canonical string of the exact coordinates, for hashing and display.
    pub fn canonical_string(&self) -> String {
        LABEL_ORDER
            .iter()
            .map(|&m| format!("{}:{}", SUBSET_LABELS[m], rational_string(&self.coord(m))))
            .collect::<Vec<_>>()
            .join(",")
    }
}

pub fn rational_string(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

impl fmt::Debug for OcticElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OcticElem{} {}", self.pair, self)
    }
}

impl fmt::Display for OcticElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &m in LABEL_ORDER.iter() {
            if self.num[m].is_zero() {
                continue;
            }
            let c = self.coord(m);
            if !first {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                f.write_str("-")?;
            }
            first = false;
            let c = c.abs();
            let radical = if m == 0 {
                String::new()
            } else {
                format!("√{}", self.pair.radicand(m))
            };
            if m != 0 && c.is_one() {
                f.write_str(&radical)?;
            } else if c.is_integer() {
                write!(f, "{}{}", c.numer(), radical)?;
            } else {
                write!(f, "({}/{}){}", c.numer(), c.denom(), radical)?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl Serialize for OcticElem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(8))?;
        for &m in LABEL_ORDER.iter() {
            map.serialize_entry(SUBSET_LABELS[m], &rational_string(&self.coord(m)))?;
        }
        map.end()
    }
}

/// Field automorphism `√2 ↦ s₂√2, √p ↦ s_p√p, √q ↦ s_q√q`, stored as the
/// bitmask of radicals whose sign flips.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Automorphism {
    flip: u8,
}

impl Automorphism {
    pub const IDENTITY: Self = Self { flip: 0 };
    pub const TAU1: Self = Self { flip: 0b001 };
    pub const TAU2: Self = Self { flip: 0b010 };
    pub const TAU3: Self = Self { flip: 0b100 };

    pub fn from_signs(s2: i8, sp: i8, sq: i8) -> Self {
        let bit = |s: i8, b: u8| if s < 0 { b } else { 0 };
        Self {
            flip: bit(s2, 1) | bit(sp, 2) | bit(sq, 4),
        }
    }

    pub fn signs(&self) -> (i8, i8, i8) {
        let s = |b: u8| if self.flip & b != 0 { -1 } else { 1 };
        (s(1), s(2), s(4))
    }

    /// Embedding order `+++, ++−, +−+, +−−, −++, …` over `(s₂, s_p, s_q)`.
    pub fn from_embedding_index(e: usize) -> Self {
        let e = e as u8 & 7;
        Self {
            flip: (e >> 2 & 1) | (e >> 1 & 1) << 1 | (e & 1) << 2,
        }
    }

    pub fn compose(self, other: Self) -> Self {
        Self {
            flip: self.flip ^ other.flip,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.flip == 0
    }

    pub fn all() -> [Self; 8] {
        std::array::from_fn(Self::from_embedding_index)
    }

    pub fn name(&self) -> String {
        let parts: Vec<&str> = [(1u8, "τ1"), (2, "τ2"), (4, "τ3")]
            .iter()
            .filter(|(b, _)| self.flip & b != 0)
            .map(|&(_, n)| n)
            .collect();
        if parts.is_empty() {
            "id".into()
        } else {
            parts.concat()
        }
    }
}

pub fn apply_automorphism(sigma: Automorphism, x: &OcticElem) -> OcticElem {
    x.flip(sigma.flip)
}

/// `x · σ(x)`, which lies in the fixed field of `σ`.
pub fn norm_to_subfield(sigma: Automorphism, x: &OcticElem) -> Result<OcticElem> {
    if sigma.is_identity() {
        return Err(Error::InvalidArgument(
            "relative norm needs an automorphism of order 2".into(),
        ));
    }
    Ok(x.mul_impl(&x.flip(sigma.flip)))
}

pub fn octic_mul(x: &OcticElem, y: &OcticElem) -> Result<OcticElem> {
    x.check_pair(y)?;
    Ok(x.mul_impl(y))
}

impl<'a> std::ops::Mul<&'a OcticElem> for &'a OcticElem {
    type Output = OcticElem;

    /// Panics when the operands live in different fields; use [`octic_mul`]
    /// for a checked product.
    fn mul(self, rhs: &'a OcticElem) -> OcticElem {
        assert_eq!(self.pair, rhs.pair, "octic product across fields");
        self.mul_impl(rhs)
    }
}

pub fn embed_quadratic(x: &QuadElem, pair: PrimePair) -> Result<OcticElem> {
    let mask = pair.mask_of(x.d).ok_or_else(|| Error::NotASubfield {
        d: x.d,
        field: format!("Q(√2, √{}, √{})", pair.p, pair.q),
    })?;
    let mut num = zeros();
    num[0] = x.a.clone();
    num[mask] = x.b.clone();
    Ok(OcticElem::normalized(pair, num, BigInt::from(x.denom)))
}

/// A closed interval with exact rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RealInterval {
    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    /// `Some(±1)` when the interval excludes zero.
    pub fn certified_sign(&self) -> Option<i8> {
        if self.lo.is_positive() {
            Some(1)
        } else if self.hi.is_negative() {
            Some(-1)
        } else {
            None
        }
    }
}

/// Certified enclosures of the eight real embeddings, each of width at most
/// `2^(−precision)`, in lexicographic sign-triple order.
pub fn real_embeddings(x: &OcticElem, precision: u64) -> Result<[RealInterval; 8]> {
    if precision < 64 {
        return Err(Error::InvalidArgument(format!(
            "precision must be at least 64 bits, got {precision}"
        )));
    }
    let k = precision + x.num.iter().map(biguint_bits).max().unwrap_or(0) + 4;
    // floor(√(rad · 4^k)) brackets √rad · 2^k to within one unit.
    let root_lo: [BigInt; 8] = std::array::from_fn(|m| {
        let scaled = BigInt::from(x.pair.radicand(m)) << (2 * k);
        scaled.sqrt()
    });
    let scale = BigInt::one() << k;
    Ok(std::array::from_fn(|e| {
        let sigma = Automorphism::from_embedding_index(e);
        let mut lo = BigInt::zero();
        let mut hi = BigInt::zero();
        for m in 0..8 {
            let mut c = x.num[m].clone();
            if c.is_zero() {
                continue;
            }
            if (m as u8 & sigma.flip).count_ones() % 2 == 1 {
                c = -c;
            }
            if m == 0 {
                let v = &c * &scale;
                lo += &v;
                hi += v;
                continue;
            }
            let a = &c * &root_lo[m];
            let b = &c * (&root_lo[m] + 1u32);
            if c.is_positive() {
                lo += a;
                hi += b;
            } else {
                lo += b;
                hi += a;
            }
        }
        let den = &x.den * &scale;
        RealInterval {
            lo: BigRational::new(lo, den.clone()),
            hi: BigRational::new(hi, den),
        }
    }))
}

/// Why [`sqrt_in_field`] found no root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SqrtOutcome {
    Root(OcticElem),
    /// The embedding with this index (sign-triple order) is negative.
    NotTotallyPositive { embedding: usize },
    /// Totally positive, but the exact descent found no root.
    NotASquare,
}

impl SqrtOutcome {
    pub fn root(self) -> Option<OcticElem> {
        match self {
            SqrtOutcome::Root(r) => Some(r),
            _ => None,
        }
    }
}

/// Square root in `K`, decided exactly.
///
/// Writing `x = A + B√r` over the subfield `F` generated by the earlier
/// radicals, `x = (C + D√r)²` forces `A² − rB² = s²` with `s ∈ F`, then
/// `C² = (A ± s)/2` and `D = B/(2C)`. The descent recurses down to `Q`.
/// The returned root is positive under the all-positive embedding.
pub fn sqrt_in_field(x: &OcticElem) -> Result<SqrtOutcome> {
    if x.is_zero() {
        return Err(Error::InvalidArgument("square root of zero requested".into()));
    }
    if let Some(e) = x.embedding_signs().iter().position(|&s| s < 0) {
        return Ok(SqrtOutcome::NotTotallyPositive { embedding: e });
    }
    let Some(mut root) = sqrt_descent(x, 3) else {
        return Ok(SqrtOutcome::NotASquare);
    };
    if root.sign() < 0 {
        root = root.neg();
    }
    if root.square() != *x {
        return Err(Error::Inconsistency(format!(
            "square root check failed for {x}"
        )));
    }
    Ok(SqrtOutcome::Root(root))
}

/// A root of `x` in the field generated by the first `level` radicals, if any.
fn sqrt_descent(x: &OcticElem, level: usize) -> Option<OcticElem> {
    if level == 0 {
        let r = rational_sqrt(&x.rational_part())?;
        return Some(OcticElem::from_rational(x.pair, &r));
    }
    if x.is_zero() {
        return Some(x.clone());
    }
    let r = BigRational::from_integer(BigInt::from(x.radical(level)));
    let (a, b) = x.split(level);
    if b.is_zero() {
        if let Some(c) = sqrt_descent(&a, level - 1) {
            return Some(c);
        }
        let d = sqrt_descent(&a.scale(&r.recip()), level - 1)?;
        return Some(OcticElem::join(&OcticElem::zero(x.pair), &d, level));
    }
    let norm = a.square().add_impl(&b.square().scale(&r), true);
    let s = sqrt_descent(&norm, level - 1)?;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    for s in [s.clone(), s.neg()] {
        let c_sq = a.add_impl(&s, false).scale(&half);
        if c_sq.is_zero() {
            continue;
        }
        let Some(c) = sqrt_descent(&c_sq, level - 1) else {
            continue;
        };
        let d = b.mul_impl(&c.inverse_at(level - 1)).scale(&half);
        let root = OcticElem::join(&c, &d, level);
        if root.square() == *x {
            return Some(root);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadratic::fundamental_unit;

    fn pair() -> PrimePair {
        PrimePair::new(17, 7).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn elem(pair: PrimePair, entries: &[(usize, i64, i64)]) -> OcticElem {
        let mut c: [BigRational; 8] = std::array::from_fn(|_| BigRational::zero());
        for &(m, n, d) in entries {
            c[m] = rat(n, d);
        }
        OcticElem::from_coords(pair, &c)
    }

    fn eps(d: u64) -> OcticElem {
        embed_quadratic(&fundamental_unit(d).unwrap().elem, pair()).unwrap()
    }

    #[test]
    fn embedding_of_quadratic_elements() {
        let k = pair();
        assert_eq!(eps(2), elem(k, &[(0, 1, 1), (1, 1, 1)]));
        assert_eq!(eps(34), elem(k, &[(0, 35, 1), (3, 6, 1)]));
        let five = PrimePair::new_unchecked(5, 3).unwrap();
        let golden = QuadElem::new(5, 1.into(), 1.into(), 2).unwrap();
        assert_eq!(
            embed_quadratic(&golden, five).unwrap(),
            elem(five, &[(0, 1, 2), (2, 1, 2)])
        );
        let foreign = QuadElem::integer(11, 10, 3).unwrap();
        assert!(matches!(
            embed_quadratic(&foreign, k),
            Err(Error::NotASubfield { d: 11, .. })
        ));
    }

    #[test]
    fn basis_products() {
        let k = pair();
        let prod = octic_mul(&OcticElem::basis(k, 1), &OcticElem::basis(k, 3)).unwrap();
        assert_eq!(prod, elem(k, &[(2, 2, 1)]));
        let prod = octic_mul(&OcticElem::basis(k, 2), &OcticElem::basis(k, 4)).unwrap();
        assert_eq!(prod, OcticElem::basis(k, 6));
        let a = elem(k, &[(0, 1, 1), (1, 1, 1)]);
        let b = elem(k, &[(0, 1, 1), (1, -1, 1)]);
        assert_eq!(octic_mul(&a, &b).unwrap(), OcticElem::from_integer(k, (-1).into()));
        let other = OcticElem::one(PrimePair::new(41, 7).unwrap());
        assert!(octic_mul(&a, &other).is_err());
    }

    #[test]
    fn automorphism_examples() {
        let k = pair();
        let r2q = OcticElem::basis(k, 5);
        assert_eq!(apply_automorphism(Automorphism::TAU1, &r2q), r2q.neg());
        let rpq = OcticElem::basis(k, 6);
        let t23 = Automorphism::TAU2.compose(Automorphism::TAU3);
        assert_eq!(apply_automorphism(t23, &rpq), rpq);
        let x = eps(119);
        assert_eq!(apply_automorphism(Automorphism::IDENTITY, &x), x);
        assert_eq!(Automorphism::from_signs(-1, 1, 1), Automorphism::TAU1);
        assert_eq!(Automorphism::from_embedding_index(1), Automorphism::TAU3);
        assert_eq!(Automorphism::from_embedding_index(4), Automorphism::TAU1);
    }

    #[test]
    fn relative_norms() {
        let k = pair();
        let root = elem(k, &[(1, 3, 2), (5, 1, 2)]);
        assert_eq!(root.square(), eps(7));
        assert_eq!(norm_to_subfield(Automorphism::TAU1, &root).unwrap(), eps(7).neg());
        assert_eq!(
            norm_to_subfield(Automorphism::TAU1, &eps(2)).unwrap(),
            OcticElem::from_integer(k, (-1).into())
        );
        assert!(norm_to_subfield(Automorphism::IDENTITY, &root).is_err());
        let x = elem(k, &[(0, 3, 1), (1, -2, 5), (6, 7, 3), (7, 1, 1)]);
        for sigma in Automorphism::all().into_iter().skip(1) {
            let n = norm_to_subfield(sigma, &x).unwrap();
            assert_eq!(apply_automorphism(sigma, &n), n);
        }
    }

    #[test]
    fn exact_signs_match_floating_point() {
        let k = pair();
        let x = eps(119).pow(3);
        let conj = apply_automorphism(Automorphism::TAU2, &x);
        assert_eq!(conj.sign(), 1);
        assert_eq!(eps(2).embedding_signs(), [1, 1, 1, 1, -1, -1, -1, -1]);
        let tiny = elem(k, &[(0, 8, 1), (4, -3, 1)]);
        assert_eq!(tiny.sign(), 1);
        assert_eq!(tiny.neg().sign(), -1);
        assert_eq!(OcticElem::zero(k).sign(), 0);
    }

    #[test]
    fn embedding_intervals() {
        let k = pair();
        for iv in real_embeddings(&OcticElem::one(k), 64).unwrap() {
            assert!(iv.contains(&BigRational::one()));
        }
        let r2 = real_embeddings(&OcticElem::basis(k, 1), 128).unwrap();
        let approx = rat(141_421, 100_000);
        for (e, iv) in r2.iter().enumerate() {
            let want = if e < 4 { 1 } else { -1 };
            assert_eq!(iv.certified_sign(), Some(want));
            assert!((iv.lo.abs() - &approx).abs() < rat(1, 10_000));
            assert!(iv.width() <= BigRational::new(1.into(), BigInt::one() << 128u32));
        }
        for iv in real_embeddings(&eps(7), 64).unwrap() {
            assert_eq!(iv.certified_sign(), Some(1));
        }
        assert!(real_embeddings(&eps(7), 32).is_err());
    }

    #[test]
    fn square_roots_of_units() {
        let k = pair();
        let r7 = sqrt_in_field(&eps(7)).unwrap().root().unwrap();
        assert_eq!(r7, elem(k, &[(1, 3, 2), (5, 1, 2)]));
        assert_eq!(
            sqrt_in_field(&eps(2)).unwrap(),
            SqrtOutcome::NotTotallyPositive { embedding: 4 }
        );
        let r119 = sqrt_in_field(&eps(119)).unwrap().root().unwrap();
        assert_eq!(r119, elem(k, &[(1, 11, 2), (7, 1, 2)]));
        assert_eq!(sqrt_in_field(&OcticElem::from_integer(k, 3.into())).unwrap(), SqrtOutcome::NotASquare);
        let r2 = sqrt_in_field(&OcticElem::from_integer(k, 2.into())).unwrap().root().unwrap();
        assert_eq!(r2, OcticElem::basis(k, 1));
        let r14 = sqrt_in_field(&OcticElem::from_integer(k, 14.into())).unwrap().root().unwrap();
        assert_eq!(r14, OcticElem::basis(k, 5));
        assert!(sqrt_in_field(&OcticElem::zero(k)).is_err());
    }

    #[test]
    fn inverse_and_division() {
        let k = pair();
        let x = elem(k, &[(0, 3, 1), (1, -2, 5), (6, 7, 3), (7, 1, 1)]);
        let inv = x.inverse().unwrap();
        assert!((&x * &inv).is_one());
        assert!(OcticElem::zero(k).inverse().is_err());
        assert_eq!(x.div(&x).unwrap(), OcticElem::one(k));
        assert_eq!(eps(238).absolute_norm(), BigRational::one());
    }

    #[test]
    fn serialization_uses_subset_labels() {
        let k = pair();
        let v = serde_json::to_value(elem(k, &[(1, 3, 2), (5, 1, 2)])).unwrap();
        assert_eq!(v[""], "0/1");
        assert_eq!(v["2"], "3/2");
        assert_eq!(v["2q"], "1/2");
        assert_eq!(v.as_object().unwrap().len(), 8);
    }

    fn arb_elem(den_max: i64) -> impl proptest::strategy::Strategy<Value = OcticElem> {
        use proptest::prelude::*;
        proptest::collection::vec((-20i64..=20, 1..=den_max), 8).prop_map(|v| {
            let c: [BigRational; 8] = std::array::from_fn(|i| rat(v[i].0, v[i].1));
            OcticElem::from_coords(PrimePair::new(41, 23).unwrap(), &c)
        })
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn ring_laws(x in arb_elem(4), y in arb_elem(4), z in arb_elem(4)) {
            proptest::prop_assert_eq!(&x * &y, &y * &x);
            proptest::prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
            let lhs = &x * &y.add(&z).unwrap();
            let rhs = (&x * &y).add(&(&x * &z)).unwrap();
            proptest::prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn automorphisms_are_ring_homomorphisms(x in arb_elem(4), y in arb_elem(4), e in 0usize..8) {
            let s = Automorphism::from_embedding_index(e);
            proptest::prop_assert_eq!(
                apply_automorphism(s, &(&x * &y)),
                &apply_automorphism(s, &x) * &apply_automorphism(s, &y)
            );
        }

        #[test]
        fn exact_sign_agrees_with_intervals(x in arb_elem(6)) {
            let iv = real_embeddings(&x, 80).unwrap();
            for (e, s) in x.embedding_signs().iter().enumerate() {
                if let Some(cs) = iv[e].certified_sign() {
                    proptest::prop_assert_eq!(cs, *s);
                }
            }
        }

        #[test]
        fn square_then_root_round_trips(x in arb_elem(4)) {
            proptest::prop_assume!(!x.is_zero());
            let root = sqrt_in_field(&x.square()).unwrap().root().expect("square has a root");
            proptest::prop_assert!(root == x || root == x.neg());
        }

        #[test]
        fn inverse_round_trips(x in arb_elem(5)) {
            proptest::prop_assume!(!x.is_zero());
            proptest::prop_assert!((&x * &x.inverse().unwrap()).is_one());
        }
    }
}
