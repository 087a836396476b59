//! Narrow class numbers against cycles of Zagier-reduced forms.

use std::collections::HashSet;

use triquad_core::arith::is_squarefree;
use triquad_core::classnumber::{discriminant, narrow_class_number};

type Form = (i64, i64, i64);

fn isqrt(n: i64) -> i64 {
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Forms with `a, c > 0` and `b > a + c`; every such form has
/// `√D < b < √D + D/2`.
fn zagier_reduced(disc: i64) -> Vec<Form> {
    let s = isqrt(disc);
    let mut out = Vec::new();
    let mut b = s + 1;
    while b <= s + disc / 2 + 1 {
        if (b * b - disc) % 4 == 0 {
            let n = (b * b - disc) / 4;
            let mut a = 1;
            while a * a <= n {
                if n % a == 0 {
                    let c = n / a;
                    for (x, y) in [(a, c), (c, a)] {
                        if b > x + y {
                            out.push((x, b, y));
                        }
                    }
                }
                a += 1;
            }
        }
        b += 1;
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// `(a, b, c) ↦ (c, 2cn − b, cn² − bn + a)` with `n = ⌈(b + √D)/2c⌉`.
fn zagier_step((a, b, c): Form, s: i64) -> Form {
    // √D is irrational, so the ceiling is ⌊(b + s)/2c⌋ + 1.
    let n = (b + s) / (2 * c) + 1;
    (c, 2 * c * n - b, c * n * n - b * n + a)
}

fn cycles(disc: i64) -> u64 {
    let s = isqrt(disc);
    let forms = zagier_reduced(disc);
    let mut seen = HashSet::new();
    let mut count = 0;
    for &f in &forms {
        if seen.contains(&f) {
            continue;
        }
        count += 1;
        let mut g = f;
        while seen.insert(g) {
            g = zagier_step(g, s);
            assert!(forms.binary_search(&g).is_ok(), "{g:?} not reduced for D = {disc}");
        }
    }
    count
}

#[test]
fn narrow_class_numbers_match_zagier_cycles() {
    for d in (2..=700u64).filter(|&d| is_squarefree(d)) {
        let disc = discriminant(d) as i64;
        assert_eq!(narrow_class_number(d).unwrap(), cycles(disc), "d = {d}");
    }
}

#[test]
fn zagier_cycles_of_small_discriminants() {
    // One narrow class for D = 5, 8; two for D = 12, 40.
    assert_eq!(cycles(5), 1);
    assert_eq!(cycles(8), 1);
    assert_eq!(cycles(12), 2);
    assert_eq!(cycles(40), 2);
}
