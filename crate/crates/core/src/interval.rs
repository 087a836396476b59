//! Outward-rounded `f64` intervals, enough for certified log-determinants.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(x: f64) -> f64 {
    x.next_down().next_down()
}

fn up(x: f64) -> f64 {
    x.next_up().next_up()
}

impl Interval {
    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }

    pub fn add(self, o: Self) -> Self {
        Self {
            lo: down(self.lo + o.lo),
            hi: up(self.hi + o.hi),
        }
    }

    pub fn neg(self) -> Self {
        Self {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    pub fn mul(self, o: Self) -> Self {
        let c = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            lo: down(lo),
            hi: up(hi),
        }
    }
}

/// Enclosure of `ln n` for `n > 0`.
fn ln_bigint(n: &BigInt) -> Interval {
    let bits = n.bits();
    if bits <= 53 {
        let v = n.to_f64().expect("small integer converts exactly").ln();
        return Interval {
            lo: down(down(v)),
            hi: up(up(v)),
        };
    }
    // n lies in [top·2^s, (top + 1)·2^s) with top exact in f64.
    let s = bits - 53;
    let top = (n >> s).to_f64().expect("53-bit integer converts exactly");
    let shift = s as f64 * std::f64::consts::LN_2;
    let lo = top.ln() + shift;
    let hi = (top + 1.0).ln() + shift;
    let slack = |x: f64| x.abs() * 8.0 * f64::EPSILON;
    Interval {
        lo: down(lo - slack(lo)),
        hi: up(hi + slack(hi)),
    }
}

/// Enclosure of `ln |x|` over a rational interval `[lo, hi]` that excludes zero.
pub(crate) fn ln_abs(lo: &BigRational, hi: &BigRational) -> Option<Interval> {
    let (small, large) = if lo.is_positive() {
        (lo, hi)
    } else if hi.is_negative() {
        (hi, lo)
    } else {
        return None;
    };
    let ln_ratio = |x: &BigRational| {
        let n = ln_bigint(&x.numer().abs());
        let d = ln_bigint(x.denom());
        n.add(d.neg())
    };
    let a = ln_ratio(small);
    let b = ln_ratio(large);
    debug_assert!(!small.is_zero());
    Some(Interval {
        lo: a.lo.min(b.lo),
        hi: a.hi.max(b.hi),
    })
}

/// Leibniz expansion of a 7×7 interval determinant.
pub(crate) fn det7(m: &[[Interval; 7]; 7]) -> Interval {
    let mut perm = [0usize, 1, 2, 3, 4, 5, 6];
    let mut acc = Interval::point(0.0);
    let mut counters = [0usize; 7];
    let mut sign = 1i32;
    let term = |perm: &[usize; 7], sign: i32| {
        let mut t = Interval::point(1.0);
        for (row, &col) in perm.iter().enumerate() {
            t = t.mul(m[row][col]);
        }
        if sign < 0 {
            t.neg()
        } else {
            t
        }
    };
    acc = acc.add(term(&perm, sign));
    // Heap's algorithm: each swap flips the permutation sign.
    let mut i = 1;
    while i < 7 {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            sign = -sign;
            acc = acc.add(term(&perm, sign));
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    acc
}
