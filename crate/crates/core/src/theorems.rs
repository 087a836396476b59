//! Case classification of a prime pair and the generator sets and 2-class
//! numbers predicted for each case.
//!
//! Write `ε_d = x + y√d` for `d ∈ {q, 2q, pq, 2pq, 2p}` with `N(ε_d) = 1`. Then
//! `x + 1 = k·A²` and `x − 1 = k'·B²` with `k, k'` square-free divisors of `2d`,
//! and `√(2ε_d) = A√k + B√k'`, `2 = kA² − k'B²`. For `ε₂ₚq` and `ε_pq` the
//! square class `k ∈ {1, p, 2p}` selects one of nine cases.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::arith::{is_perfect_square, legendre_symbol, PrimePair};
use crate::error::{Error, Result};
use crate::octic::{norm_to_subfield, sqrt_in_field, Automorphism, OcticElem, SqrtOutcome};
use crate::unit_lattice::{
    base_generators, generates, index_over_base, square_class_dimension, word_embed, BaseUnit,
    CharacterScreen, Generator, PairUnits, UnitWord,
};

use BaseUnit::*;

/// Square class of `t + 1` for `ε = t + …`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SquareClass {
    One,
    P,
    TwoP,
}

impl SquareClass {
    pub const ALL: [SquareClass; 3] = [SquareClass::One, SquareClass::P, SquareClass::TwoP];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            SquareClass::One => "1",
            SquareClass::P => "p",
            SquareClass::TwoP => "2p",
        }
    }

    fn from_mask(mask: usize) -> Option<Self> {
        match mask {
            0 => Some(SquareClass::One),
            2 => Some(SquareClass::P),
            3 => Some(SquareClass::TwoP),
            _ => None,
        }
    }
}

impl Serialize for SquareClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

fn big_string<S: Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn mask_label(mask: usize) -> &'static str {
    match mask {
        0 => "1",
        m => crate::octic::SUBSET_LABELS[m],
    }
}

/// `√(2ε) = A√k + B√k'` for a norm `+1` unit `ε = x + y√d`.
#[derive(Clone, Debug, Serialize)]
pub struct SqrtDecomposition {
    pub radicand: u64,
    #[serde(serialize_with = "big_string")]
    pub x: BigInt,
    #[serde(serialize_with = "big_string")]
    pub y: BigInt,
    /// Subset mask of `k`, the square-free part of `x + 1`.
    #[serde(skip)]
    pub k_mask: usize,
    #[serde(skip)]
    pub k_prime_mask: usize,
    pub k: u64,
    pub k_prime: u64,
    #[serde(serialize_with = "big_string")]
    pub a: BigInt,
    #[serde(serialize_with = "big_string")]
    pub b: BigInt,
    pub kind: &'static str,
}

impl SqrtDecomposition {
    /// `√ε = (A√k + B√k')·√2 / 2`, as an element of `K`.
    pub fn sqrt_unit(&self, pair: PrimePair) -> OcticElem {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let s = OcticElem::basis(pair, self.k_mask)
            .scale(&BigRational::from_integer(self.a.clone()))
            .add(
                &OcticElem::basis(pair, self.k_prime_mask)
                    .scale(&BigRational::from_integer(self.b.clone())),
            )
            .expect("same field");
        (&s * &OcticElem::basis(pair, 1)).scale(&half)
    }

    pub fn identity_holds(&self) -> bool {
        let lhs = BigInt::from(self.k) * &self.a * &self.a
            - BigInt::from(self.k_prime) * &self.b * &self.b;
        lhs == BigInt::from(2)
    }
}

/// Square-free part of `n > 0` among the radicands of `pair`, with the cofactor root.
fn square_class_of(n: &BigInt, pair: PrimePair) -> Option<(usize, BigInt)> {
    (0..8).find_map(|m| {
        let r = BigInt::from(pair.radicand(m));
        let (q, rem) = n.div_rem(&r);
        if !rem.is_zero() {
            return None;
        }
        is_perfect_square(&q).map(|a| (m, a))
    })
}

/// Decomposition of the unit of `Q(√(radicand(mask)))`, which must have norm `+1`.
pub fn decompose(units: &PairUnits, b: BaseUnit) -> Result<SqrtDecomposition> {
    let pair = units.pair();
    let u = units
        .quadratic(b)
        .ok_or_else(|| Error::InvalidArgument("−1 has no decomposition".into()))?;
    let d = pair.radicand(b.mask());
    if u.norm != 1 {
        return Err(Error::InvalidArgument(format!("N(ε_{d}) = −1")));
    }
    if u.elem.denom != 1 {
        return Err(Error::Inconsistency(format!("ε_{d} has half-integer coordinates")));
    }
    let (x, y) = (u.elem.a.clone(), u.elem.b.clone());
    let miss = |what: &str| {
        Error::Inconsistency(format!(
            "{what} for ε_{d} has no square class among divisors of 2·{d}"
        ))
    };
    let (k_mask, a) = square_class_of(&(&x + 1), pair).ok_or_else(|| miss("x + 1"))?;
    let (k_prime_mask, bb) = square_class_of(&(&x - 1), pair).ok_or_else(|| miss("x − 1"))?;
    let dec = SqrtDecomposition {
        radicand: d,
        x,
        y,
        k_mask,
        k_prime_mask,
        k: pair.radicand(k_mask),
        k_prime: pair.radicand(k_prime_mask),
        a,
        b: bb,
        kind: mask_label(k_mask),
    };
    if !dec.identity_holds() {
        return Err(Error::Inconsistency(format!(
            "2 ≠ kA² − k'B² for ε_{d}"
        )));
    }
    let root = dec.sqrt_unit(pair);
    if root.square() != *units.unit(b) {
        return Err(Error::Inconsistency(format!(
            "(A√k + B√k')²/2 ≠ ε_{d}"
        )));
    }
    Ok(dec)
}

/// The bit `u` of `√(2ε₂ₚ) = α₁ + α₂√2p`, `½(α₁² − 2pα₂²) = (−1)^u`, read off
/// the square class of `x + 1`.
pub fn u_bit(dec: &SqrtDecomposition) -> Result<u8> {
    match dec.k_mask {
        0 => Ok(0),
        3 => Ok(1),
        _ => Err(Error::Inconsistency(format!(
            "√(2ε_{}) is not of the form α₁ + α₂√{}",
            dec.radicand, dec.radicand
        ))),
    }
}

/// Independent route to `u`: search divisor pairs `α₁α₂ = y` for
/// `½(α₁² − 2pα₂²) = ±1`. Skipped (`None`) when `y > 10¹⁰`.
pub fn u_by_divisor_search(dec: &SqrtDecomposition) -> Option<Result<u8>> {
    let y = dec.y.to_u128().filter(|&y| y <= 10_000_000_000)?;
    let two_p = dec.radicand as i128;
    let mut found = Vec::new();
    let mut f = 1u128;
    while f * f <= y {
        if y % f == 0 {
            for (a1, a2) in [(f, y / f), (y / f, f)] {
                let val = (a1 * a1) as i128 - two_p * (a2 * a2) as i128;
                match val {
                    2 => found.push(0u8),
                    -2 => found.push(1u8),
                    _ => {}
                }
            }
        }
        f += 1;
    }
    found.dedup();
    Some(match found.as_slice() {
        [u] => Ok(*u),
        _ => Err(Error::Inconsistency(format!(
            "divisor search for u on ε_{} found {found:?}",
            dec.radicand
        ))),
    })
}

/// Which theorem applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TheoremCase {
    /// `(p/q) = −1`.
    NonResidue,
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
    C8,
    C9,
}

impl TheoremCase {
    pub fn from_classes(x: SquareClass, v: SquareClass) -> Self {
        use TheoremCase::*;
        [C1, C2, C3, C4, C5, C6, C7, C8, C9][3 * x.index() + v.index()]
    }
}

impl fmt::Display for TheoremCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Outcome of swapping a resolved generator for its alternative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Dichotomy {
    /// The generator set with the bit forced to 1 is a fundamental system.
    pub valid_if_set: bool,
    /// The generator set with the bit forced to 0 is a fundamental system.
    pub valid_if_clear: bool,
}

impl Dichotomy {
    pub fn exactly_one(&self) -> bool {
        self.valid_if_set != self.valid_if_clear
    }
}

/// One "bit = 1 iff this element is a square in K" clause.
#[derive(Clone, Debug, Serialize)]
pub struct Resolution {
    pub name: &'static str,
    /// The element without its `ε₂^i ε_p^j` prefactor.
    pub core: UnitWord,
    /// `(i, j)` as printed in the square clause.
    pub stated: (u8, u8),
    /// `(i, j)` as printed in the generator.
    pub generator_form: (u8, u8),
    /// `(i, j)` for which `ε₂^i ε_p^j · core` is a square in `K`, if any.
    pub witnessed: Option<(u8, u8)>,
    pub stated_is_square: bool,
    pub bit: u8,
    /// The theorem requires the element to be a square outright.
    pub required: bool,
    pub dichotomy: Option<Dichotomy>,
}

impl Resolution {
    /// `(ε₂^i ε_p^j · core)^{1/2}` with the witnessed exponents, falling back
    /// to the printed ones.
    pub fn root_word(&self) -> UnitWord {
        let (i, j) = self.witnessed.unwrap_or(self.generator_form);
        self.element(i, j).half()
    }

    fn element(&self, i: u8, j: u8) -> UnitWord {
        self.core
            .mul(&UnitWord::base(Eps2).pow(i as i64))
            .mul(&UnitWord::base(EpsP).pow(j as i64))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseTag {
    pub pair: PrimePair,
    pub theorem: TheoremCase,
    pub legendre_pq: i8,
    pub norm_eps2p: i8,
    pub x_class: SquareClass,
    pub v_class: SquareClass,
    pub u: Option<u8>,
    /// `a ≡ u + 1 (mod 2)`.
    pub a: Option<u8>,
    /// `u` recomputed by divisor search, when the coefficient is small enough.
    pub u_divisor_search: Option<u8>,
    /// `(√(ε₂ε_pε₂ₚ))^{1+τ₂} = (−1)^v ε₂`, when `N(ε₂ₚ) = −1`.
    pub v_sign: Option<u8>,
    pub decompositions: Vec<SqrtDecomposition>,
    pub resolutions: Vec<Resolution>,
    /// Whether every witnessed `ε₂` exponent agrees with `a`.
    pub a_congruence_holds: Option<bool>,
}

impl CaseTag {
    pub fn bit(&self, name: &str) -> Option<u8> {
        self.resolutions.iter().find(|r| r.name == name).map(|r| r.bit)
    }

    /// Resolutions whose square clause as printed disagrees with the witness.
    pub fn stated_form_discrepancies(&self) -> Vec<&Resolution> {
        self.resolutions
            .iter()
            .filter(|r| r.witnessed.is_some() && !r.stated_is_square)
            .collect()
    }

    /// Clauses where the theorem demands a dichotomy but not exactly one
    /// alternative yields a fundamental system.
    pub fn dichotomy_failures(&self) -> Vec<&Resolution> {
        self.resolutions
            .iter()
            .filter(|r| r.dichotomy.is_some_and(|d| !d.exactly_one()))
            .collect()
    }
}

fn w(terms: &[(BaseUnit, i64, i64)]) -> UnitWord {
    UnitWord::from_terms(terms).expect("static dyadic word")
}

fn half(b: BaseUnit) -> UnitWord {
    w(&[(b, 1, 2)])
}

/// Square clause templates for a case: `(name, core, stated, generator form,
/// alternative generator)`. The alternative is `None` when the element must
/// be a square outright.
struct Clause {
    name: &'static str,
    core: UnitWord,
    stated: (u8, u8),
    generator_form: (u8, u8),
    alternative: Option<UnitWord>,
}

fn clauses(case: TheoremCase, norm_eps2p: i8, a: u8, u: u8) -> Vec<Clause> {
    use TheoremCase::*;
    let plus = norm_eps2p == 1;
    let core_q = w(&[(EpsQ, 1, 2), (EpsPQ, 1, 2), (Eps2P, 1, 2)]);
    let core_2q = w(&[(Eps2Q, 1, 2), (Eps2PQ, 1, 2), (Eps2P, 1, 2)]);
    let clause = |name, core, stated, generator_form, alternative| Clause {
        name,
        core,
        stated,
        generator_form,
        alternative,
    };
    match (case, plus) {
        (NonResidue, false) => vec![],
        (NonResidue, true) => vec![
            clause("x1", core_q, (a, a), (a, a), None),
            clause("x2", core_2q, (a, a), (a, a), None),
        ],
        (C1, false) => vec![clause(
            "a",
            w(&[(EpsQ, 1, 2), (Eps2Q, 1, 2), (EpsPQ, 1, 2), (Eps2PQ, 1, 2)]),
            (0, 0),
            (0, 0),
            Some(half(Eps2PQ)),
        )],
        (C1, true) => vec![
            clause("r'", core_q, (a, a), (a, a), Some(half(Eps2P))),
            clause("r", core_2q, (a, a), (a, a), Some(half(Eps2PQ))),
        ],
        (C2, true) => vec![clause("alpha", core_2q, (a, u), (a, u), Some(half(Eps2P)))],
        (C3, true) => vec![clause("alpha", core_2q, (a, a), (a, u), Some(half(Eps2P)))],
        (C4 | C7, true) => vec![clause("alpha", core_q, (a, u), (a, u), Some(half(Eps2P)))],
        (C5, true) => vec![clause(
            "alpha",
            w(&[
                (EpsQ, 1, 2),
                (Eps2Q, 1, 2),
                (EpsPQ, 1, 2),
                (Eps2PQ, 1, 2),
                (Eps2P, 1, 2),
            ]),
            (a, u),
            (a, u),
            Some(half(Eps2P)),
        )],
        (C9, true) => vec![clause(
            "alpha",
            w(&[(EpsPQ, 1, 2), (Eps2PQ, 1, 2), (Eps2P, 1, 2)]),
            (a, u),
            (a, u),
            Some(half(Eps2P)),
        )],
        (C2 | C3 | C4 | C5 | C7 | C9, false) => vec![],
        (C6, _) => vec![clause(
            "alpha",
            w(&[(Eps2Q, 1, 2), (EpsPQ, 1, 2), (Eps2PQ, 1, 2)]),
            (0, 0),
            (0, 0),
            Some(half(Eps2Q)),
        )],
        (C8, _) => vec![clause(
            "alpha",
            w(&[(EpsQ, 1, 2), (EpsPQ, 1, 2), (Eps2PQ, 1, 2)]),
            (0, 0),
            (0, 0),
            Some(half(EpsQ)),
        )],
    }
}

/// Generators with the resolved word for each clause (`resolved[i]`) in place.
fn generator_words(
    case: TheoremCase,
    norm_eps2p: i8,
    resolved: &[UnitWord],
) -> Vec<UnitWord> {
    use TheoremCase::*;
    let plus = norm_eps2p == 1;
    let e2 = UnitWord::base(Eps2);
    let ep = UnitWord::base(EpsP);
    let triple = w(&[(Eps2, 1, 2), (EpsP, 1, 2), (Eps2P, 1, 2)]);
    let k1_third = if plus { half(Eps2P) } else { triple.clone() };
    let mut gens = vec![e2, ep];
    match case {
        NonResidue => {
            gens.extend([half(EpsQ), half(Eps2Q), half(EpsPQ)]);
            if plus {
                gens.extend(resolved.iter().cloned());
            } else {
                gens.push(triple);
                gens.push(w(&[
                    (EpsQ, 1, 4),
                    (Eps2Q, 1, 4),
                    (EpsPQ, 1, 4),
                    (Eps2PQ, 1, 4),
                ]));
            }
        }
        C1 => {
            gens.extend([half(EpsQ), half(Eps2Q), half(EpsPQ)]);
            if plus {
                gens.extend(resolved.iter().cloned());
            } else {
                gens.push(triple);
                gens.push(resolved[0].clone());
            }
        }
        C2 | C3 | C4 | C5 | C7 | C9 => {
            gens.extend([half(EpsQ), half(Eps2Q), half(EpsPQ), half(Eps2PQ)]);
            gens.push(if plus { resolved[0].clone() } else { triple });
        }
        C6 => {
            gens.extend([half(EpsQ), half(EpsPQ), half(Eps2PQ), k1_third]);
            gens.push(resolved[0].clone());
        }
        C8 => {
            gens.extend([half(Eps2Q), half(EpsPQ), half(Eps2PQ), k1_third]);
            gens.push(resolved[0].clone());
        }
    }
    gens
}

/// The word a resolution contributes at a given bit value.
fn resolved_word(res: &Resolution, alternative: &Option<UnitWord>, bit: u8) -> UnitWord {
    match (bit, alternative) {
        (0, Some(alt)) => alt.clone(),
        _ => res.root_word(),
    }
}

/// The value of `word` when it embeds, `None` when a root is missing.
fn try_embed(word: &UnitWord, units: &PairUnits) -> Result<Option<OcticElem>> {
    match word_embed(word, units) {
        Ok(v) => Ok(Some(v)),
        Err(Error::RootMissing { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn is_square_word(word: &UnitWord, units: &PairUnits) -> Result<bool> {
    let Some(v) = try_embed(word, units)? else {
        return Ok(false);
    };
    Ok(matches!(sqrt_in_field(&v)?, SqrtOutcome::Root(_)))
}

/// Whether seven words form a fundamental system: they embed, contain the
/// base units, and no product of them (with `−1`) is a square.
pub fn is_fundamental_system(
    words: &[UnitWord],
    units: &PairUnits,
    screen: &CharacterScreen,
) -> Result<bool> {
    if words.len() != 7 {
        return Ok(false);
    }
    let base: Vec<UnitWord> = BaseUnit::FREE.iter().map(|&b| UnitWord::base(b)).collect();
    if index_over_base(words).is_none() || !generates(words, &base) {
        return Ok(false);
    }
    let mut gens = base_generators(units, &[], screen);
    for word in words {
        let Some(v) = try_embed(word, units)? else {
            return Ok(false);
        };
        gens.push(Generator::new(word.clone(), v, screen));
    }
    Ok(square_class_dimension(&gens, None)?.dimension() == 0)
}

/// Full classification, including squareness witnesses for every clause.
pub fn classify_pair(units: &PairUnits, screen: &CharacterScreen) -> Result<CaseTag> {
    let pair = units.pair();
    let legendre_pq = legendre_symbol(&BigInt::from(pair.p), pair.q)?;
    let norm_eps2p = units.norm(Eps2P);

    let mut decompositions = Vec::new();
    for b in [EpsQ, Eps2Q, EpsPQ, Eps2PQ] {
        decompositions.push(decompose(units, b)?);
    }
    let class_of = |dec: &SqrtDecomposition| {
        SquareClass::from_mask(dec.k_mask).ok_or_else(|| {
            Error::Inconsistency(format!(
                "t + 1 for ε_{} lies in square class {}, outside {{1, p, 2p}}",
                dec.radicand, dec.kind
            ))
        })
    };
    let v_class = class_of(&decompositions[2])?;
    let x_class = class_of(&decompositions[3])?;

    let (mut u, mut u_divisor_search) = (None, None);
    if norm_eps2p == 1 {
        let dec = decompose(units, Eps2P)?;
        let bit = u_bit(&dec)?;
        if let Some(check) = u_by_divisor_search(&dec) {
            let check = check?;
            if check != bit {
                return Err(Error::Inconsistency(format!(
                    "u from the square class is {bit}, divisor search gives {check}"
                )));
            }
            u_divisor_search = Some(check);
        }
        u = Some(bit);
        decompositions.push(dec);
    }
    let a = u.map(|u| 1 - u);

    let v_sign = if norm_eps2p == -1 {
        let root = word_embed(&w(&[(Eps2, 1, 2), (EpsP, 1, 2), (Eps2P, 1, 2)]), units)?;
        let n = norm_to_subfield(Automorphism::TAU2, &root)?;
        let e2 = units.unit(Eps2);
        if n == *e2 {
            Some(0)
        } else if n == e2.neg() {
            Some(1)
        } else {
            return Err(Error::Inconsistency(
                "(√(ε₂ε_pε₂ₚ))^{1+τ₂} is not ±ε₂".into(),
            ));
        }
    } else {
        None
    };

    let theorem = if legendre_pq == -1 {
        TheoremCase::NonResidue
    } else {
        TheoremCase::from_classes(x_class, v_class)
    };

    let templates = clauses(theorem, norm_eps2p, a.unwrap_or(0), u.unwrap_or(0));
    let mut resolutions = Vec::new();
    for c in &templates {
        let mut res = Resolution {
            name: c.name,
            core: c.core.clone(),
            stated: c.stated,
            generator_form: c.generator_form,
            witnessed: None,
            stated_is_square: false,
            bit: 0,
            required: c.alternative.is_none(),
            dichotomy: None,
        };
        for (i, j) in [(0u8, 0u8), (1, 0), (0, 1), (1, 1)] {
            if is_square_word(&res.element(i, j), units)? {
                if res.witnessed.is_some() {
                    return Err(Error::Inconsistency(format!(
                        "two prefactors make clause {} a square",
                        c.name
                    )));
                }
                res.witnessed = Some((i, j));
            }
        }
        res.stated_is_square = res.witnessed == Some(c.stated);
        res.bit = res.witnessed.is_some() as u8;
        resolutions.push(res);
    }

    // Swap each clause between its two alternatives, the others held at
    // their resolved values, and see which sets are fundamental systems.
    for idx in 0..templates.len() {
        if templates[idx].alternative.is_none() {
            continue;
        }
        let mut outcome = [false; 2];
        for bit in [0u8, 1] {
            let resolved: Vec<UnitWord> = resolutions
                .iter()
                .zip(&templates)
                .enumerate()
                .map(|(k, (r, t))| {
                    let b = if k == idx { bit } else { r.bit };
                    resolved_word(r, &t.alternative, b)
                })
                .collect();
            let words = generator_words(theorem, norm_eps2p, &resolved);
            outcome[bit as usize] = is_fundamental_system(&words, units, screen)?;
        }
        resolutions[idx].dichotomy = Some(Dichotomy {
            valid_if_set: outcome[1],
            valid_if_clear: outcome[0],
        });
    }

    let a_congruence_holds = a.and_then(|a| {
        let seen: Vec<bool> = resolutions
            .iter()
            .zip(&templates)
            .filter(|(_, t)| !t.core.exponent(Eps2P).is_zero())
            .filter_map(|(r, _)| r.witnessed.map(|(i, _)| i == a))
            .collect();
        (!seen.is_empty()).then(|| seen.iter().all(|&ok| ok))
    });

    Ok(CaseTag {
        pair,
        theorem,
        legendre_pq,
        norm_eps2p,
        x_class,
        v_class,
        u,
        a,
        u_divisor_search,
        v_sign,
        decompositions,
        resolutions,
        a_congruence_holds,
    })
}

/// The seven non-torsion generators the applicable theorem prescribes.
pub fn unit_generators(tag: &CaseTag) -> Vec<UnitWord> {
    let templates = clauses(
        tag.theorem,
        tag.norm_eps2p,
        tag.a.unwrap_or(0),
        tag.u.unwrap_or(0),
    );
    let resolved: Vec<UnitWord> = tag
        .resolutions
        .iter()
        .zip(&templates)
        .map(|(r, t)| resolved_word(r, &t.alternative, r.bit))
        .collect();
    generator_words(tag.theorem, tag.norm_eps2p, &resolved)
}

/// The theorem's closed form for `h₂(K)`.
pub fn predict_h2k(tag: &CaseTag, h2_2p: u64, h2_pq: u64, h2_2pq: u64) -> Result<u64> {
    let h = h2_2p * h2_pq * h2_2pq;
    let exp: i64 = match tag.theorem {
        TheoremCase::NonResidue => {
            return if tag.norm_eps2p == -1 {
                if h2_2p.is_multiple_of(2) {
                    Ok(h2_2p / 2)
                } else {
                    Err(Error::Inconsistency(format!("½·h₂(2p) with h₂(2p) = {h2_2p}")))
                }
            } else {
                Ok(h2_2p)
            };
        }
        TheoremCase::C1 if tag.norm_eps2p == 1 => {
            tag.bit("r").unwrap_or(0) as i64 + tag.bit("r'").unwrap_or(0) as i64 - 4
        }
        TheoremCase::C1 => tag.bit("a").unwrap_or(0) as i64 - 4,
        TheoremCase::C6 | TheoremCase::C8 => tag.bit("alpha").unwrap_or(0) as i64 - 4,
        _ if tag.norm_eps2p == 1 => tag.bit("alpha").unwrap_or(0) as i64 - 4,
        _ => -4,
    };
    let k = (-exp) as u32;
    if h.trailing_zeros() < k {
        return Err(Error::Inconsistency(format!(
            "2^{exp}·{h} is not an integer"
        )));
    }
    Ok(h >> k)
}
