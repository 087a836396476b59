//! Real quadratic fields `Q(√d)`: exact elements and fundamental units.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::is_squarefree;
use crate::error::{Error, Result};

/// `(a + b√d) / denom` with `denom ∈ {1, 2}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadElem {
    pub d: u64,
    pub a: BigInt,
    pub b: BigInt,
    pub denom: u8,
}

impl QuadElem {
    pub fn new(d: u64, a: BigInt, b: BigInt, denom: u8) -> Result<Self> {
        if d <= 1 || !is_squarefree(d) {
            return Err(Error::BadRadicand { d });
        }
        let x = Self { d, a, b, denom };
        x.canonical(1)
    }

    pub fn integer(d: u64, a: i64, b: i64) -> Result<Self> {
        Self::new(d, BigInt::from(a), BigInt::from(b), 1)
    }

    /// Reduce `(a + b√d) / (denom · extra)` to a canonical representation.
    fn canonical(self, extra: u8) -> Result<Self> {
        let Self { d, mut a, mut b, denom } = self;
        let mut den = u32::from(denom) * u32::from(extra);
        while den > 1 && a.is_even() && b.is_even() {
            a >>= 1;
            b >>= 1;
            den /= 2;
        }
        match den {
            1 => Ok(Self { d, a, b, denom: 1 }),
            2 if d % 4 == 1 && (&a - &b).is_even() => Ok(Self { d, a, b, denom: 2 }),
            _ => Err(Error::Inconsistency(format!(
                "({a} + {b}√{d})/{den} is not an integer of Q(√{d})"
            ))),
        }
    }

    pub fn conjugate(&self) -> Self {
        Self {
            d: self.d,
            a: self.a.clone(),
            b: -&self.b,
            denom: self.denom,
        }
    }

    pub fn is_one(&self) -> bool {
        self.denom == 1 && self.a.is_one() && self.b.is_zero()
    }

    /// Floating-point value with `√d` taken positive; for display and tests.
    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        (a + b * (self.d as f64).sqrt()) / f64::from(self.denom)
    }
}

impl fmt::Display for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.b.is_negative() { "-" } else { "+" };
        if self.denom == 1 {
            write!(f, "{} {} {}√{}", self.a, sign, self.b.abs(), self.d)
        } else {
            write!(f, "({} {} {}√{})/2", self.a, sign, self.b.abs(), self.d)
        }
    }
}

pub fn quad_mul(x: &QuadElem, y: &QuadElem) -> Result<QuadElem> {
    if x.d != y.d {
        return Err(Error::RadicandMismatch {
            left: x.d,
            right: y.d,
        });
    }
    let d = BigInt::from(x.d);
    let a = &x.a * &y.a + &d * &x.b * &y.b;
    let b = &x.a * &y.b + &x.b * &y.a;
    QuadElem {
        d: x.d,
        a,
        b,
        denom: x.denom,
    }
    .canonical(y.denom)
}

/// `x · x̄ = (a² − d·b²) / denom²`.
pub fn quad_norm(x: &QuadElem) -> BigRational {
    let num = &x.a * &x.a - BigInt::from(x.d) * &x.b * &x.b;
    BigRational::new(num, BigInt::from(u32::from(x.denom).pow(2)))
}

/// The fundamental unit `ε_d > 1` of the maximal order of `Q(√d)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FundamentalUnit {
    pub elem: QuadElem,
    pub norm: i8,
    /// Length of the continued-fraction period that produced the unit.
    pub period: usize,
}

/// Fundamental unit via the continued fraction of `√d`, or of `(1 + √d)/2`
/// when `d ≡ 1 (mod 4)`.
///
/// Complete quotients are kept as `(P + √d)/Q`; the expansion stops at the
/// first return to `Q = Q₀`, after `n` steps, and the norm is `(−1)^n`.
pub fn fundamental_unit(d: u64) -> Result<FundamentalUnit> {
    if d <= 1 || !is_squarefree(d) {
        return Err(Error::BadRadicand { d });
    }
    let (p0, q0): (i128, i128) = if d % 4 == 1 { (1, 2) } else { (0, 1) };
    let dd = d as i128;
    let s = d.sqrt() as i128;

    let (mut p_prev, mut p_cur) = (BigInt::zero(), BigInt::one());
    let (mut q_prev, mut q_cur) = (BigInt::one(), BigInt::zero());
    let (mut pp, mut qq) = (p0, q0);
    let mut n = 0usize;
    loop {
        if qq <= 0 {
            return Err(Error::Inconsistency(format!(
                "continued fraction of √{d} left the reduced range"
            )));
        }
        let a = (pp + s).div_euclid(qq);
        let ab = BigInt::from(a);
        let p_next = &ab * &p_cur + &p_prev;
        let q_next = &ab * &q_cur + &q_prev;
        p_prev = std::mem::replace(&mut p_cur, p_next);
        q_prev = std::mem::replace(&mut q_cur, q_next);

        let p_new = a * qq - pp;
        let q_new = (dd - p_new * p_new) / qq;
        pp = p_new;
        qq = q_new;
        n += 1;
        if qq == q0 {
            break;
        }
    }

    let parity_norm: i8 = if n.is_multiple_of(2) { 1 } else { -1 };
    let (a, b, denom) = if q0 == 2 {
        (BigInt::from(2) * &p_cur - &q_cur, q_cur, 2u8)
    } else {
        (p_cur, q_cur, 1u8)
    };
    let elem = QuadElem::new(d, a, b, denom)?;
    let direct = quad_norm(&elem);
    let expect = BigRational::from_integer(BigInt::from(parity_norm));
    if direct != expect {
        return Err(Error::Inconsistency(format!(
            "norm of ε_{d} is {direct}, period parity says {parity_norm}"
        )));
    }
    Ok(FundamentalUnit {
        elem,
        norm: parity_norm,
        period: n,
    })
}

fn unit_cache() -> &'static RwLock<HashMap<u64, Arc<FundamentalUnit>>> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Arc<FundamentalUnit>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Memoized [`fundamental_unit`]; concurrent callers may race to insert the
/// same value, which is harmless.
pub fn fundamental_unit_cached(d: u64) -> Result<Arc<FundamentalUnit>> {
    if let Some(u) = unit_cache().read().expect("unit cache poisoned").get(&d) {
        return Ok(Arc::clone(u));
    }
    let u = Arc::new(fundamental_unit(d)?);
    unit_cache()
        .write()
        .expect("unit cache poisoned")
        .entry(d)
        .or_insert_with(|| Arc::clone(&u));
    Ok(u)
}
