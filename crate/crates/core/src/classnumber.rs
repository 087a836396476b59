//! 2-class numbers of real quadratic fields and the Kuroda formula for `K`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{OnceLock, RwLock};

use num_integer::Roots;
use serde::Serialize;

use crate::arith::{is_squarefree, primes_up_to, PrimePair};
use crate::error::{Error, Result};
use crate::quadratic::fundamental_unit_cached;

pub const DEFAULT_QUAD_BOUND: u64 = 10_000_000;

/// Fundamental discriminant of `Q(√d)`.
pub fn discriminant(d: u64) -> u64 {
    if d % 4 == 1 {
        d
    } else {
        4 * d
    }
}

fn divisors(mut n: u64, primes: &[u64]) -> Vec<u64> {
    let mut divs = vec![1u64];
    for &p in primes {
        if p * p > n {
            break;
        }
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            let len = divs.len();
            let mut pk = 1;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
    }
    if n > 1 {
        let len = divs.len();
        for i in 0..len {
            divs.push(divs[i] * n);
        }
    }
    divs
}

type Form = (i64, i64, i64);

/// Reduced indefinite forms `(a, b, c)` of discriminant `disc`:
/// `0 < b < √D` and `√D − b < 2|a| < √D + b`.
fn reduced_forms(disc: u64) -> Vec<Form> {
    let s = disc.sqrt();
    let primes = primes_up_to(s / 2 + 2);
    let mut forms = Vec::new();
    let mut b = if disc.is_multiple_of(2) { 2 } else { 1 };
    while b <= s {
        let n = (disc - b * b) / 4;
        for a in divisors(n, &primes) {
            // √D − b < 2a < √D + b with √D irrational and s = ⌊√D⌋
            let two_a = 2 * a;
            if two_a > s - b && two_a <= s + b {
                let c = (n / a) as i64;
                forms.push((a as i64, b as i64, -c));
                forms.push((-(a as i64), b as i64, c));
            }
        }
        b += 2;
    }
    forms.sort_unstable();
    forms
}

/// One step of the reduction operator: `(a, b, c) ↦ (c, r, (r² − D)/4c)` with
/// `r ≡ −b (mod 2c)` and `√D − 2|c| < r < √D`.
fn rho(f: Form, disc: i64, s: i64) -> Form {
    let (_, b, c) = f;
    let m = 2 * c.abs();
    let r = s - (s + b).rem_euclid(m);
    (c, r, (r * r - disc) / (4 * c))
}

/// Narrow class number of `Q(√d)` as the number of cycles of reduced forms.
pub fn narrow_class_number(d: u64) -> Result<u64> {
    if d <= 1 || !is_squarefree(d) {
        return Err(Error::BadRadicand { d });
    }
    let disc = discriminant(d);
    let s = disc.sqrt() as i64;
    let forms = reduced_forms(disc);
    let index: HashMap<Form, usize> = forms.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let mut seen = vec![false; forms.len()];
    let mut cycles = 0;
    for start in 0..forms.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut f = forms[start];
        loop {
            let i = *index.get(&f).ok_or_else(|| {
                Error::Inconsistency(format!("form {f:?} left the reduced set for D = {disc}"))
            })?;
            if seen[i] {
                break;
            }
            seen[i] = true;
            f = rho(f, disc as i64, s);
        }
    }
    Ok(cycles)
}

/// Wide class number: the narrow one halved when `N(ε_d) = +1`.
pub fn class_number(d: u64) -> Result<u64> {
    let narrow = narrow_class_number(d)?;
    let norm = fundamental_unit_cached(d)?.norm;
    Ok(if norm == 1 { narrow / 2 } else { narrow })
}

fn h2_cache() -> &'static RwLock<HashMap<u64, u64>> {
    static CACHE: OnceLock<RwLock<HashMap<u64, u64>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// 2-part of the class number of `Q(√d)`, refusing radicands above `bound`.
pub fn h2_real_quadratic(d: u64, bound: u64) -> Result<u64> {
    if d > bound {
        return Err(Error::ResourceGuard(format!(
            "class number of Q(√{d}) exceeds the radicand bound {bound}"
        )));
    }
    if let Some(&h) = h2_cache().read().expect("h2 cache poisoned").get(&d) {
        return Ok(h);
    }
    let h = class_number(d)?;
    let h2 = 1u64 << h.trailing_zeros();
    h2_cache()
        .write()
        .expect("h2 cache poisoned")
        .insert(d, h2);
    Ok(h2)
}

/// `h₂` of the seven quadratic subfields, indexed by radicand mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubfieldH2 {
    pub pair: PrimePair,
    values: [u64; 8],
}

impl SubfieldH2 {
    pub fn compute(pair: PrimePair, bound: u64) -> Result<Self> {
        let mut values = [1u64; 8];
        for (mask, v) in values.iter_mut().enumerate().skip(1) {
            *v = h2_real_quadratic(pair.radicand(mask), bound)?;
        }
        Ok(Self { pair, values })
    }

    pub fn from_values(pair: PrimePair, values: [u64; 8]) -> Self {
        Self { pair, values }
    }

    pub fn get(&self, mask: usize) -> u64 {
        self.values[mask & 7]
    }

    pub fn by_radicand(&self, d: u64) -> Option<u64> {
        self.pair.mask_of(d).map(|m| self.values[m])
    }

    pub fn product(&self) -> u64 {
        self.values[1..].iter().product()
    }
}

/// `2^e · n` as an integer, or `None` if it is not one.
fn scaled(n: u64, e: i64) -> Option<u64> {
    if e >= 0 {
        n.checked_shl(e as u32)
    } else {
        let k = (-e) as u32;
        (n.trailing_zeros() >= k).then(|| n >> k)
    }
}

/// `h₂(K) = 2^{m−9} · ∏ h₂(k_i)` for the real octic field.
pub fn kuroda_h2k(m: u32, h2: &SubfieldH2) -> Result<u64> {
    scaled(h2.product(), m as i64 - 9).ok_or_else(|| {
        Error::Inconsistency(format!(
            "Kuroda formula gives 2^({m}−9)·{} for {}, not an integer",
            h2.product(),
            h2.pair
        ))
    })
}

/// `h₂(k₅) = 2^{m₅−2} · h₂(q) · h₂(2p) · h₂(2pq)` for `k₅ = Q(√q, √2p)`.
pub fn kuroda_h2_k5(m5: u32, h2: &SubfieldH2) -> Result<u64> {
    let prod = h2.get(4) * h2.get(3) * h2.get(7);
    scaled(prod, m5 as i64 - 2).ok_or_else(|| {
        Error::Inconsistency(format!(
            "biquadratic Kuroda formula gives 2^({m5}−2)·{prod}, not an integer"
        ))
    })
}

/// Class-number data for one pair.
#[derive(Clone, Debug, Serialize)]
pub struct ClassNumberReport {
    pub pair: PrimePair,
    /// `h₂` keyed by radicand label.
    pub h2: BTreeMap<String, u64>,
    pub m: u32,
    pub h2k_theorem: u64,
    pub h2k_kuroda: u64,
    pub m_k5: u32,
    pub h2_k5: u64,
}

impl ClassNumberReport {
    pub fn new(
        h2: &SubfieldH2,
        m: u32,
        h2k_theorem: u64,
        m_k5: u32,
    ) -> Result<Self> {
        let labels = crate::octic::SUBSET_LABELS;
        Ok(Self {
            pair: h2.pair,
            h2: (1..8).map(|m| (labels[m].to_string(), h2.get(m))).collect(),
            m,
            h2k_theorem,
            h2k_kuroda: kuroda_h2k(m, h2)?,
            m_k5,
            h2_k5: kuroda_h2_k5(m_k5, h2)?,
        })
    }
}
