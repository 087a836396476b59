//! Exact checks of the relative-norm tables for square roots of units.
//!
//! Each row states `(√ε)^{1+σ} = ±η` for an automorphism `σ` of order two,
//! where `η` is `1`, a unit, or its square. The sign of `√ε` does not matter
//! since `x·σ(x)` is invariant under `x ↦ −x`.

use serde::Serialize;

use crate::error::Result;
use crate::octic::{norm_to_subfield, Automorphism};
use crate::theorems::{CaseTag, SquareClass};
use crate::unit_lattice::{word_embed, BaseUnit, PairUnits, UnitWord};

use BaseUnit::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum NormTable {
    /// The action on `√ε₂ₚ` when `N(ε₂ₚ) = 1`.
    Eps2p,
    /// `ε₂`, `ε_p`, `√ε_q`, `√ε₂q`.
    QuadraticUnits,
    /// `√ε₂ₚq` and `√ε_pq` by square class of `x + 1`, `v + 1`.
    SquareClassRows,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableCheck {
    pub table: NormTable,
    pub unit: String,
    pub sigma: String,
    pub expected: String,
    pub holds: bool,
}

/// `±ε^k` as a table entry.
#[derive(Clone, Copy)]
struct Entry {
    sign: i8,
    unit: Option<(BaseUnit, i64)>,
}

const fn e(sign: i8, unit: BaseUnit, k: i64) -> Entry {
    Entry {
        sign,
        unit: Some((unit, k)),
    }
}

const fn c(sign: i8) -> Entry {
    Entry { sign, unit: None }
}

impl Entry {
    fn word(&self) -> UnitWord {
        let mut w = match self.unit {
            Some((b, k)) => UnitWord::base(b).pow(k),
            None => UnitWord::one(),
        };
        if self.sign < 0 {
            w = w.mul(&UnitWord::minus_one());
        }
        w
    }

    fn describe(&self) -> String {
        let sign = if self.sign < 0 { "-" } else { "" };
        match self.unit {
            None => format!("{sign}1"),
            Some((b, 1)) => format!("{sign}ε{}", b.label()),
            Some((b, k)) => format!("{sign}ε{}^{k}", b.label()),
        }
    }
}

fn tau(name: &str) -> Automorphism {
    let t = |c| match c {
        '1' => Automorphism::TAU1,
        '2' => Automorphism::TAU2,
        _ => Automorphism::TAU3,
    };
    name.chars()
        .filter(char::is_ascii_digit)
        .fold(Automorphism::IDENTITY, |acc, ch| acc.compose(t(ch)))
}

const SIGMAS_QUAD: [&str; 6] = ["τ1", "τ2", "τ3", "τ1τ2", "τ1τ3", "τ2τ3"];
const SIGMAS_ROOT: [&str; 5] = ["τ2", "τ1τ2", "τ1τ3", "τ2τ3", "τ1"];

fn quadratic_rows() -> Vec<(UnitWord, [Entry; 6])> {
    let half = |b| UnitWord::from_terms(&[(b, 1, 2)]).expect("dyadic");
    vec![
        (
            UnitWord::base(Eps2),
            [c(-1), e(1, Eps2, 2), e(1, Eps2, 2), c(-1), c(-1), e(1, Eps2, 2)],
        ),
        (
            UnitWord::base(EpsP),
            [e(1, EpsP, 2), c(-1), e(1, EpsP, 2), c(-1), e(1, EpsP, 2), c(-1)],
        ),
        (
            half(EpsQ),
            [e(-1, EpsQ, 1), e(1, EpsQ, 1), c(1), e(-1, EpsQ, 1), c(-1), c(1)],
        ),
        (
            half(Eps2Q),
            [c(-1), e(1, Eps2Q, 1), c(1), c(-1), e(-1, Eps2Q, 1), c(1)],
        ),
    ]
}

fn eps2p_row(u: u8) -> [Entry; 5] {
    let s = |k: u8| if (u + k).is_multiple_of(2) { 1 } else { -1 };
    [c(s(0)), e(-1, Eps2P, 1), c(s(1)), c(s(0)), c(s(1))]
}

fn eps2pq_row(class: SquareClass) -> [Entry; 5] {
    let x = |s| e(s, Eps2PQ, 1);
    match class {
        SquareClass::One => [c(1), x(-1), x(-1), x(1), c(-1)],
        SquareClass::P => [c(-1), x(1), x(-1), x(-1), c(-1)],
        SquareClass::TwoP => [c(-1), x(-1), x(1), x(-1), c(1)],
    }
}

fn epspq_row(class: SquareClass) -> [Entry; 5] {
    let v = |s| e(s, EpsPQ, 1);
    match class {
        SquareClass::One => [c(1), c(-1), c(-1), v(1), v(-1)],
        SquareClass::P => [c(-1), c(1), c(-1), v(-1), v(-1)],
        SquareClass::TwoP => [c(-1), c(-1), c(1), v(-1), v(1)],
    }
}

fn check_row(
    table: NormTable,
    units: &PairUnits,
    element: &UnitWord,
    sigmas: &[&str],
    entries: &[Entry],
    out: &mut Vec<TableCheck>,
) -> Result<()> {
    let x = word_embed(element, units)?;
    for (sigma, entry) in sigmas.iter().zip(entries) {
        let got = norm_to_subfield(tau(sigma), &x)?;
        let want = word_embed(&entry.word(), units)?;
        out.push(TableCheck {
            table,
            unit: element.to_string(),
            sigma: format!("1+{sigma}"),
            expected: entry.describe(),
            holds: got == want,
        });
    }
    Ok(())
}

/// Every applicable table row for the pair described by `tag`.
pub fn check_tables(units: &PairUnits, tag: &CaseTag) -> Result<Vec<TableCheck>> {
    let mut out = Vec::new();
    for (element, entries) in quadratic_rows() {
        check_row(
            NormTable::QuadraticUnits,
            units,
            &element,
            &SIGMAS_QUAD,
            &entries,
            &mut out,
        )?;
    }
    if let Some(u) = tag.u {
        let root = UnitWord::from_terms(&[(Eps2P, 1, 2)])?;
        check_row(NormTable::Eps2p, units, &root, &SIGMAS_ROOT, &eps2p_row(u), &mut out)?;
    }
    let rows = [
        (Eps2PQ, eps2pq_row(tag.x_class)),
        (EpsPQ, epspq_row(tag.v_class)),
    ];
    for (b, entries) in rows {
        let root = UnitWord::from_terms(&[(b, 1, 2)])?;
        check_row(
            NormTable::SquareClassRows,
            units,
            &root,
            &SIGMAS_ROOT,
            &entries,
            &mut out,
        )?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::PrimePair;
    use crate::theorems::classify_pair;
    use crate::unit_lattice::CharacterScreen;

    fn checks(p: u64, q: u64) -> Vec<TableCheck> {
        let pair = PrimePair::new(p, q).unwrap();
        let units = PairUnits::new(pair).unwrap();
        let tag = classify_pair(&units, &CharacterScreen::new(pair)).unwrap();
        check_tables(&units, &tag).unwrap()
    }

    #[test]
    fn all_rows_hold_for_small_pairs() {
        for (p, q) in [(17, 7), (41, 7)] {
            let rows = checks(p, q);
            let bad: Vec<_> = rows.iter().filter(|r| !r.holds).collect();
            assert!(bad.is_empty(), "({p},{q}): {bad:?}");
        }
        assert_eq!(checks(17, 7).len(), 24 + 5 + 10);
        assert_eq!(checks(41, 7).len(), 24 + 10);
    }

    #[test]
    fn sigma_names() {
        assert_eq!(tau("τ1τ3"), Automorphism::TAU1.compose(Automorphism::TAU3));
        assert_eq!(tau("τ2"), Automorphism::TAU2);
    }
}
