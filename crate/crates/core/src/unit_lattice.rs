//! Unit words, square classes over `F₂`, 2-saturation and rank checks.
//!
//! A [`UnitWord`] is a formal product of `−1` and the seven quadratic
//! fundamental units with dyadic exponents. Its value in `K` is fixed by one
//! convention: the torsion-free part is the unique element positive under the
//! all-positive embedding whose `2^k`-th power is the integral product.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::arith::{legendre_u64, primes_up_to, residue, sqrt_mod, PrimePair};
use crate::error::{Error, Result};
use crate::interval::{det7, ln_abs, Interval};
use crate::octic::{
    embed_quadratic, real_embeddings, sqrt_in_field, OcticElem, SqrtOutcome, SUBSET_LABELS,
};
use crate::quadratic::{fundamental_unit_cached, FundamentalUnit};

/// `−1` or the fundamental unit of a quadratic subfield; the discriminant is
/// the subset mask of the radicand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseUnit {
    MinusOne = 0,
    Eps2 = 1,
    EpsP = 2,
    Eps2P = 3,
    EpsQ = 4,
    Eps2Q = 5,
    EpsPQ = 6,
    Eps2PQ = 7,
}

impl BaseUnit {
    pub const ALL: [BaseUnit; 8] = [
        BaseUnit::MinusOne,
        BaseUnit::Eps2,
        BaseUnit::EpsP,
        BaseUnit::Eps2P,
        BaseUnit::EpsQ,
        BaseUnit::Eps2Q,
        BaseUnit::EpsPQ,
        BaseUnit::Eps2PQ,
    ];

    /// The seven non-torsion units in the order `ε₂, ε_p, ε_q, ε₂ₚ, ε₂q, ε_pq, ε₂ₚq`.
    pub const FREE: [BaseUnit; 7] = [
        BaseUnit::Eps2,
        BaseUnit::EpsP,
        BaseUnit::EpsQ,
        BaseUnit::Eps2P,
        BaseUnit::Eps2Q,
        BaseUnit::EpsPQ,
        BaseUnit::Eps2PQ,
    ];

    pub fn mask(self) -> usize {
        self as usize
    }

    pub fn from_mask(mask: usize) -> Self {
        Self::ALL[mask & 7]
    }

    pub fn label(self) -> &'static str {
        match self {
            BaseUnit::MinusOne => "-1",
            b => SUBSET_LABELS[b.mask()],
        }
    }
}

/// Formal product `(−1)^t · ∏ ε_d^{e_d}` with dyadic exponents.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitWord {
    exps: [Rational64; 8],
}

impl Default for UnitWord {
    fn default() -> Self {
        Self::one()
    }
}

fn is_dyadic(r: &Rational64) -> bool {
    r.denom().count_ones() == 1
}

impl UnitWord {
    pub fn one() -> Self {
        Self {
            exps: [Rational64::zero(); 8],
        }
    }

    pub fn base(b: BaseUnit) -> Self {
        let mut w = Self::one();
        w.exps[b.mask()] = Rational64::one();
        w
    }

    pub fn minus_one() -> Self {
        Self::base(BaseUnit::MinusOne)
    }

    /// Builds a word from `(unit, numerator, denominator)` triples.
    pub fn from_terms(terms: &[(BaseUnit, i64, i64)]) -> Result<Self> {
        let mut w = Self::one();
        for &(b, n, d) in terms {
            if d <= 0 {
                return Err(Error::InvalidArgument(format!("exponent denominator {d}")));
            }
            let e = Rational64::new(n, d);
            if !is_dyadic(&e) {
                return Err(Error::InvalidArgument(format!(
                    "exponent {n}/{d} is not dyadic"
                )));
            }
            w.exps[b.mask()] += e;
        }
        w.canonicalize_torsion()?;
        Ok(w)
    }

    fn canonicalize_torsion(&mut self) -> Result<()> {
        let t = self.exps[0];
        if !t.is_integer() {
            return Err(Error::InvalidArgument(
                "the exponent of −1 must be an integer".into(),
            ));
        }
        self.exps[0] = Rational64::from_integer(t.to_integer().rem_euclid(2));
        Ok(())
    }

    pub fn exponent(&self, b: BaseUnit) -> Rational64 {
        self.exps[b.mask()]
    }

    pub fn has_torsion(&self) -> bool {
        !self.exps[0].is_zero()
    }

    /// Exponents of `ε₂, …, ε₂ₚq` in [`BaseUnit::FREE`] order.
    pub fn free_exponents(&self) -> [Rational64; 7] {
        std::array::from_fn(|i| self.exps[BaseUnit::FREE[i].mask()])
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut exps: [Rational64; 8] = std::array::from_fn(|i| self.exps[i] + other.exps[i]);
        exps[0] = Rational64::from_integer(exps[0].to_integer().rem_euclid(2));
        Self { exps }
    }

    /// Integer power; the torsion exponent is reduced mod 2.
    pub fn pow(&self, k: i64) -> Self {
        let mut exps: [Rational64; 8] = std::array::from_fn(|i| self.exps[i] * k);
        exps[0] = Rational64::from_integer(exps[0].to_integer().rem_euclid(2));
        Self { exps }
    }

    /// The positive square root: free exponents halved, torsion dropped.
    pub fn half(&self) -> Self {
        let mut exps: [Rational64; 8] = std::array::from_fn(|i| self.exps[i] / 2);
        exps[0] = Rational64::zero();
        Self { exps }
    }

    /// Largest `k` with a `2^k` exponent denominator.
    pub fn depth(&self) -> u32 {
        self.exps
            .iter()
            .map(|e| e.denom().trailing_zeros())
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for UnitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.has_torsion() {
            parts.push("-1".to_string());
        }
        for b in BaseUnit::FREE {
            let e = self.exps[b.mask()];
            if e.is_zero() {
                continue;
            }
            let base = format!("ε{}", b.label());
            parts.push(if e.is_one() {
                base
            } else if e.is_integer() {
                format!("{base}^{}", e.numer())
            } else {
                format!("{base}^({}/{})", e.numer(), e.denom())
            });
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join("·"))
        }
    }
}

impl fmt::Debug for UnitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UnitWord({self})")
    }
}

impl Serialize for UnitWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let nonzero: Vec<_> = BaseUnit::ALL
            .iter()
            .filter(|b| !self.exps[b.mask()].is_zero())
            .collect();
        let mut map = s.serialize_map(Some(nonzero.len()))?;
        for b in nonzero {
            let e = self.exps[b.mask()];
            map.serialize_entry(b.label(), &format!("{}/{}", e.numer(), e.denom()))?;
        }
        map.end()
    }
}

type FracKey = [Rational64; 7];

/// Embedded base units of one field, with memoized fractional powers.
pub struct PairUnits {
    pair: PrimePair,
    quadratic: [Option<Arc<FundamentalUnit>>; 8],
    values: [OcticElem; 8],
    roots: Mutex<HashMap<FracKey, OcticElem>>,
}

impl fmt::Debug for PairUnits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PairUnits").field("pair", &self.pair).finish()
    }
}

impl PairUnits {
    pub fn new(pair: PrimePair) -> Result<Self> {
        let mut quadratic: [Option<Arc<FundamentalUnit>>; 8] = Default::default();
        let mut values: [OcticElem; 8] =
            std::array::from_fn(|_| OcticElem::from_integer(pair, BigInt::from(-1)));
        for mask in 1..8 {
            let u = fundamental_unit_cached(pair.radicand(mask))?;
            values[mask] = embed_quadratic(&u.elem, pair)?;
            quadratic[mask] = Some(u);
        }
        Ok(Self {
            pair,
            quadratic,
            values,
            roots: Mutex::new(HashMap::new()),
        })
    }

    pub fn pair(&self) -> PrimePair {
        self.pair
    }

    pub fn unit(&self, b: BaseUnit) -> &OcticElem {
        &self.values[b.mask()]
    }

    /// The quadratic fundamental unit behind `b` (`None` for `−1`).
    pub fn quadratic(&self, b: BaseUnit) -> Option<&FundamentalUnit> {
        self.quadratic[b.mask()].as_deref()
    }

    pub fn norm(&self, b: BaseUnit) -> i8 {
        self.quadratic(b).map_or(1, |u| u.norm)
    }

    /// `∏ ε^{e}` for integer exponents (torsion ignored).
    fn integral_product(&self, exps: &[i64; 7]) -> Result<OcticElem> {
        let mut acc = OcticElem::one(self.pair);
        for (i, &e) in exps.iter().enumerate() {
            if e != 0 {
                let v = self.values[BaseUnit::FREE[i].mask()].powi(e)?;
                acc = &acc * &v;
            }
        }
        Ok(acc)
    }

    /// Value of `∏ ε^{r}` with `0 ≤ r < 1` dyadic, via one square root per
    /// binary digit of the exponents.
    fn fractional_power(&self, r: &FracKey, whole: &UnitWord) -> Result<OcticElem> {
        if r.iter().all(Zero::is_zero) {
            return Ok(OcticElem::one(self.pair));
        }
        if let Some(v) = self.roots.lock().expect("root cache poisoned").get(r) {
            return Ok(v.clone());
        }
        let doubled: [Rational64; 7] = std::array::from_fn(|i| r[i] * 2);
        let floor: [i64; 7] = std::array::from_fn(|i| doubled[i].floor().to_integer());
        let frac: FracKey = std::array::from_fn(|i| doubled[i].fract());
        let inner = &self.integral_product(&floor)? * &self.fractional_power(&frac, whole)?;
        let root = match sqrt_in_field(&inner)? {
            SqrtOutcome::Root(x) => x,
            _ => {
                let mut w = UnitWord::one();
                for (i, b) in BaseUnit::FREE.iter().enumerate() {
                    w.exps[b.mask()] = r[i];
                }
                return Err(Error::RootMissing {
                    word: format!("{w} (inside {whole})"),
                });
            }
        };
        self.roots
            .lock()
            .expect("root cache poisoned")
            .insert(*r, root.clone());
        Ok(root)
    }
}

/// Exact value of a word in `K`; the result is checked to be a unit.
pub fn word_embed(w: &UnitWord, units: &PairUnits) -> Result<OcticElem> {
    if let Some(e) = w.exps.iter().find(|e| !is_dyadic(e)) {
        return Err(Error::InvalidArgument(format!("exponent {e} is not dyadic")));
    }
    let free = w.free_exponents();
    let floor: [i64; 7] = std::array::from_fn(|i| free[i].floor().to_integer());
    let frac: FracKey = std::array::from_fn(|i| free[i].fract());
    let mut v = &units.integral_product(&floor)? * &units.fractional_power(&frac, w)?;
    if w.has_torsion() {
        v = v.neg();
    }
    let n = v.absolute_norm();
    if n.abs() != BigRational::one() {
        return Err(Error::Inconsistency(format!(
            "{w} embeds to an element of norm {n}"
        )));
    }
    Ok(v)
}

const SCREEN_PRIMES: usize = 16;

/// Quadratic characters used to discard non-squares before exact root
/// extraction: the eight real signs, then Legendre symbols of the images
/// under the eight homomorphisms `O_K → F_ℓ` for primes `ℓ` split in `K`.
#[derive(Clone, Debug)]
pub struct CharacterScreen {
    /// `(ℓ, images of the eight basis vectors under each homomorphism)`
    primes: Vec<(u64, [[u64; 8]; 8])>,
}

/// Character values as a bit vector: bit set means the character is `−1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    bits: [u64; 3],
    /// Characters that vanish on the element and so carry no information.
    undefined: [u64; 3],
}

impl Signature {
    fn set(&mut self, i: usize, value: i8) {
        match value {
            -1 => self.bits[i / 64] |= 1 << (i % 64),
            0 => self.undefined[i / 64] |= 1 << (i % 64),
            _ => {}
        }
    }

    pub fn xor(&self, o: &Self) -> Self {
        Self {
            bits: std::array::from_fn(|i| self.bits[i] ^ o.bits[i]),
            undefined: std::array::from_fn(|i| self.undefined[i] | o.undefined[i]),
        }
    }

    /// True when every defined character is `+1`, as it must be for a square.
    pub fn passes(&self) -> bool {
        (0..3).all(|i| self.bits[i] & !self.undefined[i] == 0)
    }
}

impl CharacterScreen {
    pub fn new(pair: PrimePair) -> Self {
        let mut primes = Vec::with_capacity(SCREEN_PRIMES);
        let mut bound = 1024;
        while primes.len() < SCREEN_PRIMES {
            primes.clear();
            for ell in primes_up_to(bound).into_iter().filter(|&l| l > 2) {
                if ell == pair.p || ell == pair.q {
                    continue;
                }
                let rad = pair.radicals();
                if rad.iter().any(|&r| legendre_u64(r % ell, ell) != 1) {
                    continue;
                }
                let roots: [u64; 3] = std::array::from_fn(|i| {
                    sqrt_mod(rad[i], ell).expect("residue has a square root")
                });
                let homs = std::array::from_fn(|h| {
                    let signed: [u64; 3] = std::array::from_fn(|i| {
                        if h >> i & 1 == 1 {
                            ell - roots[i]
                        } else {
                            roots[i]
                        }
                    });
                    std::array::from_fn(|mask| {
                        (0..3)
                            .filter(|i| mask >> i & 1 == 1)
                            .fold(1u64, |acc, i| acc * signed[i] % ell)
                    })
                });
                primes.push((ell, homs));
                if primes.len() == SCREEN_PRIMES {
                    break;
                }
            }
            bound *= 4;
        }
        Self { primes }
    }

    pub fn signature(&self, x: &OcticElem) -> Signature {
        let mut sig = Signature::default();
        for (e, s) in x.embedding_signs().iter().enumerate() {
            sig.set(e, if *s == 0 { 0 } else { *s });
        }
        for (k, (ell, homs)) in self.primes.iter().enumerate() {
            let ell = *ell;
            let num: [u64; 8] = std::array::from_fn(|m| residue(&x.numerators()[m], ell));
            let den = residue(x.denominator(), ell);
            for (h, images) in homs.iter().enumerate() {
                let idx = 8 + 8 * k + h;
                if den == 0 {
                    sig.set(idx, 0);
                    continue;
                }
                let v = (0..8).fold(0u64, |acc, m| (acc + num[m] * images[m]) % ell);
                // χ(N/den) = χ(N)·χ(den)
                let chi = legendre_u64(v, ell) * legendre_u64(den, ell);
                sig.set(idx, chi);
            }
        }
        sig
    }
}

/// A generator with its exact value and character signature.
#[derive(Clone, Debug)]
pub struct Generator {
    pub word: UnitWord,
    pub value: OcticElem,
    signature: Signature,
}

impl Generator {
    pub fn new(word: UnitWord, value: OcticElem, screen: &CharacterScreen) -> Self {
        let signature = screen.signature(&value);
        Self {
            word,
            value,
            signature,
        }
    }
}

/// Nonempty subsets of `n` generators, smallest support first and then in
/// Gray-code order.
fn subset_order(n: usize) -> Vec<u32> {
    let gray_rank = |g: u32| {
        let mut b = g;
        let mut shift = 1;
        while shift < 32 {
            b ^= b >> shift;
            shift <<= 1;
        }
        b
    };
    let mut subsets: Vec<u32> = (1..(1u32 << n)).collect();
    subsets.sort_by_key(|&s| (s.count_ones(), gray_rank(s)));
    subsets
}

fn product(gens: &[Generator], subset: u32) -> (OcticElem, Signature) {
    let mut value: Option<OcticElem> = None;
    let mut sig = Signature::default();
    for (i, g) in gens.iter().enumerate() {
        if subset >> i & 1 == 1 {
            sig = sig.xor(&g.signature);
            value = Some(match value {
                None => g.value.clone(),
                Some(v) => &v * &g.value,
            });
        }
    }
    (value.expect("nonempty subset"), sig)
}

fn signature_of(gens: &[Generator], subset: u32) -> Signature {
    gens.iter()
        .enumerate()
        .filter(|(i, _)| subset >> i & 1 == 1)
        .fold(Signature::default(), |acc, (_, g)| acc.xor(&g.signature))
}

/// Square root of the product over `subset`, if it exists and lies in the
/// subfield spanned by `allowed` basis masks.
fn square_witness(
    gens: &[Generator],
    subset: u32,
    allowed: Option<&[usize]>,
) -> Result<Option<OcticElem>> {
    if !signature_of(gens, subset).passes() {
        return Ok(None);
    }
    let (value, _) = product(gens, subset);
    Ok(match sqrt_in_field(&value)? {
        SqrtOutcome::Root(r) if allowed.is_none_or(|a| r.lies_in(a)) => Some(r),
        _ => None,
    })
}

/// Subspace of `F₂^n` (bit `i` = generator `i`) whose products are squares.
#[derive(Clone, Debug)]
pub struct SquareClassSpace {
    pub basis: Vec<(u32, OcticElem)>,
}

impl SquareClassSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, v: u32) -> bool {
        reduce(&self.basis.iter().map(|b| b.0).collect::<Vec<_>>(), v) == 0
    }
}

/// Reduce `v` against an echelon list (distinct leading bits).
fn reduce(echelon: &[u32], mut v: u32) -> u32 {
    for &b in echelon {
        let lead = 31 - b.leading_zeros();
        if v >> lead & 1 == 1 {
            v ^= b;
        }
    }
    v
}

fn insert_echelon(echelon: &mut Vec<u32>, v: u32) {
    let v = reduce(echelon, v);
    if v == 0 {
        return;
    }
    let lead = 31 - v.leading_zeros();
    for b in echelon.iter_mut() {
        if *b >> lead & 1 == 1 {
            *b ^= v;
        }
    }
    echelon.push(v);
    echelon.sort_by_key(|b| std::cmp::Reverse(31 - b.leading_zeros()));
}

/// All square classes among products of `gens`, with witnesses.
pub fn square_class_dimension(
    gens: &[Generator],
    allowed: Option<&[usize]>,
) -> Result<SquareClassSpace> {
    if gens.len() > 16 {
        return Err(Error::InvalidArgument("at most 16 generators".into()));
    }
    let mut echelon = Vec::new();
    let mut basis = Vec::new();
    for subset in subset_order(gens.len()) {
        if reduce(&echelon, subset) == 0 {
            continue;
        }
        if let Some(root) = square_witness(gens, subset, allowed)? {
            insert_echelon(&mut echelon, subset);
            basis.push((subset, root));
        }
    }
    Ok(SquareClassSpace { basis })
}

pub const SATURATION_GUARD: u32 = 14;

/// One replacement performed by [`saturate_generators`].
#[derive(Clone, Debug, Serialize)]
pub struct SaturationStep {
    pub subset: u32,
    pub replaced: usize,
    pub new_word: UnitWord,
}

#[derive(Clone, Debug)]
pub struct Saturation {
    pub m: u32,
    pub generators: Vec<Generator>,
    pub steps: Vec<SaturationStep>,
}

impl Saturation {
    /// The non-torsion generators' words.
    pub fn words(&self) -> Vec<UnitWord> {
        self.generators
            .iter()
            .filter(|g| g.word != UnitWord::minus_one())
            .map(|g| g.word.clone())
            .collect()
    }
}

/// Repeatedly replace a generator by the square root of a square product.
///
/// `gens[0]` must be `−1`. Each step doubles the index over the starting
/// group; the result is 2-saturated in the field spanned by `allowed`.
pub fn saturate_generators(
    mut gens: Vec<Generator>,
    allowed: Option<&[usize]>,
    screen: &CharacterScreen,
) -> Result<Saturation> {
    if gens.first().map(|g| &g.word) != Some(&UnitWord::minus_one()) {
        return Err(Error::InvalidArgument(
            "the first generator must be −1".into(),
        ));
    }
    let order = subset_order(gens.len());
    let mut steps = Vec::new();
    'outer: loop {
        for &subset in &order {
            let Some(root) = square_witness(&gens, subset, allowed)? else {
                continue;
            };
            if steps.len() as u32 >= SATURATION_GUARD {
                return Err(Error::Inconsistency(format!(
                    "saturation exceeded {SATURATION_GUARD} steps"
                )));
            }
            let replaced = (1..gens.len())
                .find(|&i| subset >> i & 1 == 1)
                .ok_or_else(|| Error::Inconsistency("−1 reported as a square".into()))?;
            let sum = gens
                .iter()
                .enumerate()
                .filter(|(i, _)| subset >> i & 1 == 1)
                .fold(UnitWord::one(), |acc, (_, g)| acc.mul(&g.word));
            let new_word = sum.half();
            gens[replaced] = Generator::new(new_word.clone(), root, screen);
            steps.push(SaturationStep {
                subset,
                replaced,
                new_word,
            });
            continue 'outer;
        }
        break;
    }
    Ok(Saturation {
        m: steps.len() as u32,
        generators: gens,
        steps,
    })
}

/// Starting generators `−1, ε` for the given base units.
pub fn base_generators(
    units: &PairUnits,
    free: &[BaseUnit],
    screen: &CharacterScreen,
) -> Vec<Generator> {
    std::iter::once(BaseUnit::MinusOne)
        .chain(free.iter().copied())
        .map(|b| Generator::new(UnitWord::base(b), units.unit(b).clone(), screen))
        .collect()
}

/// Full 2-saturation of `⟨−1, ε₂, …, ε₂ₚq⟩`; `q(K) = 2^m`.
pub fn saturate(units: &PairUnits, screen: &CharacterScreen) -> Result<Saturation> {
    saturate_generators(base_generators(units, &BaseUnit::FREE, screen), None, screen)
}

/// Basis masks of `k₅ = Q(√q, √2p)`.
pub const K5_MASKS: [usize; 4] = [0, 3, 4, 7];

/// Saturation inside `k₅ = Q(√q, √2p)` from `⟨−1, ε_q, ε₂ₚ, ε₂ₚq⟩`.
pub fn saturate_k5(units: &PairUnits, screen: &CharacterScreen) -> Result<Saturation> {
    let gens = base_generators(
        units,
        &[BaseUnit::EpsQ, BaseUnit::Eps2P, BaseUnit::Eps2PQ],
        screen,
    );
    saturate_generators(gens, Some(&K5_MASKS), screen)
}

/// Exponent rows of `words` against `ε₂, …, ε₂ₚq`.
pub fn exponent_matrix(words: &[UnitWord]) -> Vec<[BigRational; 7]> {
    words
        .iter()
        .map(|w| {
            let e = w.free_exponents();
            std::array::from_fn(|i| {
                BigRational::new(BigInt::from(*e[i].numer()), BigInt::from(*e[i].denom()))
            })
        })
        .collect()
}

/// Solve `x·M = target` for square `M`; `None` when `M` is singular.
fn solve_left(m: &[[BigRational; 7]], target: &[BigRational; 7]) -> Option<[BigRational; 7]> {
    let n = m.len();
    // Columns of the augmented system Mᵀ x = target.
    let mut a: Vec<Vec<BigRational>> = (0..7)
        .map(|col| {
            let mut row: Vec<BigRational> = (0..n).map(|r| m[r][col].clone()).collect();
            row.push(target[col].clone());
            row
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for c in 0..n {
        let Some(r) = (pivot_row..7).find(|&r| !a[r][c].is_zero()) else {
            return None;
        };
        a.swap(pivot_row, r);
        let inv = a[pivot_row][c].recip();
        for v in a[pivot_row].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..7 {
            if r != pivot_row && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                let src = a[pivot_row].clone();
                for (v, s) in a[r].iter_mut().zip(src.iter()) {
                    *v = &*v - &f * s;
                }
            }
        }
        pivots.push(c);
        pivot_row += 1;
    }
    if a[pivot_row..].iter().any(|row| !row[n].is_zero()) {
        return None;
    }
    let mut x: [BigRational; 7] = std::array::from_fn(|_| BigRational::zero());
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = a[r][n].clone();
    }
    Some(x)
}

/// Exact determinant of a 7×7 rational matrix.
pub fn determinant(m: &[[BigRational; 7]]) -> BigRational {
    let mut a: Vec<Vec<BigRational>> = m.iter().map(|r| r.to_vec()).collect();
    let mut det = BigRational::one();
    for c in 0..7 {
        let Some(r) = (c..7).find(|&r| !a[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if r != c {
            a.swap(r, c);
            det = -det;
        }
        det *= a[c][c].clone();
        for r in c + 1..7 {
            if !a[r][c].is_zero() {
                let f = &a[r][c] / &a[c][c];
                let src = a[c].clone();
                for (v, s) in a[r].iter_mut().zip(src.iter()) {
                    *v = &*v - &f * s;
                }
            }
        }
    }
    det
}

/// True when every word in `targets` is an integer combination of `gens`
/// (free parts only; `gens` must be seven independent words).
pub fn generates(gens: &[UnitWord], targets: &[UnitWord]) -> bool {
    if gens.len() != 7 {
        return false;
    }
    let m = exponent_matrix(gens);
    exponent_matrix(targets).iter().all(|t| {
        solve_left(&m, t).is_some_and(|x| x.iter().all(|c| c.is_integer()))
    })
}

/// `[⟨gens⟩ : ⟨ε₂, …, ε₂ₚq⟩]` for seven words containing the base group.
pub fn index_over_base(gens: &[UnitWord]) -> Option<BigRational> {
    if gens.len() != 7 {
        return None;
    }
    let d = determinant(&exponent_matrix(gens));
    (!d.is_zero()).then(|| d.abs().recip())
}

const RANK_PRECISION_CAP: u64 = 1 << 20;

/// Multiplicative independence of seven units, certified two ways: an
/// interval log-determinant over seven embeddings and the exact exponent
/// determinant against the (independent) base units.
pub fn rank_certificate(words: &[UnitWord], units: &PairUnits, precision: u64) -> Result<bool> {
    if words.len() != 7 {
        return Err(Error::InvalidArgument(format!(
            "rank certificate needs 7 words, got {}",
            words.len()
        )));
    }
    let values = words
        .iter()
        .map(|w| word_embed(w, units))
        .collect::<Result<Vec<_>>>()?;
    let exact_nonsingular = !determinant(&exponent_matrix(words)).is_zero();
    let mut bits = precision.max(64);
    let numeric = loop {
        match log_matrix(&values, bits)? {
            Some(m) => {
                let det = det7(&m);
                if !det.contains_zero() || !exact_nonsingular || bits >= RANK_PRECISION_CAP {
                    break det;
                }
            }
            None if bits >= RANK_PRECISION_CAP => {
                return Err(Error::PrecisionExhausted { bits });
            }
            None => {}
        }
        bits *= 2;
    };
    match (numeric.contains_zero(), exact_nonsingular) {
        (false, true) => Ok(true),
        (true, false) => Ok(false),
        (true, true) => Err(Error::PrecisionExhausted { bits }),
        (false, false) => Err(Error::Inconsistency(
            "log determinant is nonzero but the exponent matrix is singular".into(),
        )),
    }
}

/// `ln |σ_e(u)|` for the first seven embeddings, or `None` if some sign is
/// not yet certified at this precision.
fn log_matrix(values: &[OcticElem], bits: u64) -> Result<Option<[[Interval; 7]; 7]>> {
    let mut m = [[Interval::point(0.0); 7]; 7];
    for (i, v) in values.iter().enumerate() {
        let emb = real_embeddings(v, bits)?;
        for e in 0..7 {
            match ln_abs(&emb[e].lo, &emb[e].hi) {
                Some(iv) => m[i][e] = iv,
                None => return Ok(None),
            }
        }
    }
    Ok(Some(m))
}
