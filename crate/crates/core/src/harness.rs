//! Per-pair verification pipeline, range scans and report output.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::arith::{is_prime, rational_sqrt, PrimePair};
use crate::classnumber::{ClassNumberReport, SubfieldH2, DEFAULT_QUAD_BOUND};
use crate::error::{Error, Result};
use crate::octic::OcticElem;
use crate::tables::{check_tables, TableCheck};
use crate::theorems::{
    classify_pair, predict_h2k, unit_generators, CaseTag, SquareClass, TheoremCase,
};
use crate::unit_lattice::{
    base_generators, generates, index_over_base, rank_certificate, saturate, saturate_generators,
    saturate_k5, word_embed, BaseUnit, CharacterScreen, Generator, PairUnits, UnitWord,
};

pub const DEFAULT_PRECISION_BITS: u64 = 256;
pub const MAX_PRECISION_BITS: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub precision_bits: u64,
    pub quad_bound: u64,
    /// Record wall time per pair; off by default so reports are reproducible.
    pub timings: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            precision_bits: DEFAULT_PRECISION_BITS,
            quad_bound: DEFAULT_QUAD_BOUND,
            timings: false,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(64..=MAX_PRECISION_BITS).contains(&self.precision_bits) {
            return Err(Error::InvalidArgument(format!(
                "precision must lie in 64..={MAX_PRECISION_BITS} bits"
            )));
        }
        if self.quad_bound < 2 {
            return Err(Error::InvalidArgument("radicand bound must exceed 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Verified,
    TheoremMismatch,
    PrecisionExhausted,
    ResourceGuard,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Verified => 0,
            Status::TheoremMismatch => 2,
            Status::PrecisionExhausted => 3,
            Status::ResourceGuard => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Verified => "verified",
            Status::TheoremMismatch => "theorem-mismatch",
            Status::PrecisionExhausted => "precision-exhausted",
            Status::ResourceGuard => "resource-guard",
        }
    }
}

/// A required check decides the status; an advisory one is only reported.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub required: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorRecord {
    pub word: UnitWord,
    pub coords: OcticElem,
    pub fingerprint: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationRecord {
    pub pair: PrimePair,
    pub case: Option<CaseTag>,
    pub generators: Vec<GeneratorRecord>,
    pub saturated: Vec<GeneratorRecord>,
    /// `h₂` keyed by radicand, plus `"K"` from the Kuroda formula.
    pub h2: BTreeMap<String, u64>,
    pub m: Option<u32>,
    pub class_numbers: Option<ClassNumberReport>,
    pub checks: Vec<Check>,
    pub tables: Vec<TableCheck>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl VerificationRecord {
    fn empty(pair: PrimePair) -> Self {
        Self {
            pair,
            case: None,
            generators: Vec::new(),
            saturated: Vec::new(),
            h2: BTreeMap::new(),
            m: None,
            class_numbers: None,
            checks: Vec::new(),
            tables: Vec::new(),
            status: Status::Verified,
            error: None,
            wall_time_ms: None,
        }
    }

    fn check(&mut self, name: &str, passed: bool, required: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            required,
            detail,
        });
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.required && !c.passed)
    }

    pub fn h2k_theorem(&self) -> Option<u64> {
        self.class_numbers.as_ref().map(|c| c.h2k_theorem)
    }
}

/// Hex prefix of the SHA-256 digest of an element's exact coordinates.
pub fn fingerprint(x: &OcticElem) -> String {
    let digest = Sha256::digest(x.canonical_string().as_bytes());
    hex::encode(&digest[..8])
}

fn generator_record(word: &UnitWord, value: OcticElem) -> GeneratorRecord {
    GeneratorRecord {
        word: word.clone(),
        fingerprint: fingerprint(&value),
        coords: value,
    }
}

/// None of `2(x ± 1)`, `2d(x ± 1)` is a rational square for `ε_d = x + y√d`
/// of norm `+1`.
pub fn unit_trace_not_square(d: u64) -> Result<bool> {
    let u = crate::quadratic::fundamental_unit_cached(d)?;
    if u.norm != 1 {
        return Ok(true);
    }
    let x = BigRational::new(u.elem.a.clone(), BigInt::from(u.elem.denom));
    let one = BigRational::one();
    let candidates = [&x + &one, &x - &one];
    Ok(candidates.iter().all(|t| {
        [2u64, 2 * d].iter().all(|&f| {
            let v = t * BigRational::from_integer(BigInt::from(f));
            rational_sqrt(&v).is_none()
        })
    }))
}

/// Run every computation and cross-check for one pair. Mathematical
/// disagreements are reported in the status, never raised.
pub fn verify_pair(pair: PrimePair, config: &VerifyConfig) -> VerificationRecord {
    let start = Instant::now();
    let mut rec = VerificationRecord::empty(pair);
    if let Err(e) = run_pipeline(pair, config, &mut rec) {
        rec.status = match e {
            Error::PrecisionExhausted { .. } => Status::PrecisionExhausted,
            Error::ResourceGuard(_) => Status::ResourceGuard,
            _ => Status::TheoremMismatch,
        };
        rec.error = Some(e.to_string());
    } else if rec.failed_checks().next().is_some() {
        rec.status = Status::TheoremMismatch;
    }
    if config.timings {
        rec.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }
    rec
}

fn run_pipeline(pair: PrimePair, config: &VerifyConfig, rec: &mut VerificationRecord) -> Result<()> {
    config.validate()?;
    let h2 = SubfieldH2::compute(pair, config.quad_bound)?;
    for m in 1..8 {
        rec.h2.insert(pair.radicand(m).to_string(), h2.get(m));
    }
    let units = PairUnits::new(pair)?;
    let screen = CharacterScreen::new(pair);
    let tag = classify_pair(&units, &screen)?;
    let legendre = tag.legendre_pq;

    // Quadratic 2-class numbers.
    let ones = [1usize, 2, 4, 5].iter().all(|&m| h2.get(m) == 1);
    rec.check(
        "h2 of Q(√2), Q(√p), Q(√q), Q(√2q) is 1",
        ones,
        true,
        String::new(),
    );
    let (h_pq, h_2pq) = (h2.get(6), h2.get(7));
    let pq_ok = if legendre == -1 {
        h_pq == 2 && h_2pq == 2
    } else {
        h_pq % 4 == 0 && h_2pq % 4 == 0
    };
    rec.check(
        "h2(pq), h2(2pq) match the Legendre symbol",
        pq_ok,
        true,
        format!("h2(pq) = {h_pq}, h2(2pq) = {h_2pq}"),
    );
    let no_squares = (1..8)
        .map(|m| unit_trace_not_square(pair.radicand(m)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .all(|b| b);
    rec.check(
        "2(x ± 1), 2d(x ± 1) are not rational squares",
        no_squares,
        true,
        String::new(),
    );
    if legendre == -1 {
        rec.check(
            "x + 1 and v + 1 are squares",
            tag.x_class == SquareClass::One && tag.v_class == SquareClass::One,
            true,
            format!("x class {}, v class {}", tag.x_class.label(), tag.v_class.label()),
        );
    }

    // Square clauses.
    for r in &tag.resolutions {
        if r.required {
            rec.check(
                &format!("clause {} is a square", r.name),
                r.bit == 1,
                true,
                format!("{}", r.core),
            );
        }
        if let Some(d) = r.dichotomy {
            rec.check(
                &format!("clause {} resolves to exactly one fundamental system", r.name),
                d.exactly_one() && d.valid_if_set == (r.bit == 1),
                true,
                format!("bit {}, valid if set {}, valid if clear {}", r.bit, d.valid_if_set, d.valid_if_clear),
            );
        }
        rec.check(
            &format!("clause {} holds with printed exponents", r.name),
            r.witnessed.is_none() || r.stated_is_square,
            false,
            format!("printed {:?}, witnessed {:?}", r.stated, r.witnessed),
        );
    }
    if let Some(ok) = tag.a_congruence_holds {
        rec.check("a ≡ u + 1 (mod 2)", ok, false, String::new());
    }

    // Theorem generators.
    let words = unit_generators(&tag);
    let mut values = Vec::new();
    for word in &words {
        let v = word_embed(word, &units)?;
        rec.generators.push(generator_record(word, v.clone()));
        values.push(v);
    }

    // Saturation from the quadratic units.
    let sat = saturate(&units, &screen)?;
    let m = sat.m;
    rec.m = Some(m);
    for g in sat.generators.iter().skip(1) {
        rec.saturated.push(generator_record(&g.word, g.value.clone()));
    }
    let sat_words = sat.words();
    let same_group = generates(&words, &sat_words) && generates(&sat_words, &words);
    rec.check(
        "theorem generators span the saturated unit group",
        same_group,
        true,
        String::new(),
    );
    let index = index_over_base(&words);
    let want_index = BigRational::from_integer(BigInt::from(1u64 << m));
    rec.check(
        "theorem generators have index 2^m over the quadratic units",
        index.as_ref() == Some(&want_index),
        true,
        format!("index {index:?}, m = {m}"),
    );
    let mut gens: Vec<Generator> = base_generators(&units, &[], &screen);
    for (w, v) in words.iter().zip(values) {
        gens.push(Generator::new(w.clone(), v, &screen));
    }
    let resat = saturate_generators(gens, None, &screen)?;
    rec.check(
        "theorem generators are 2-saturated",
        resat.m == 0,
        true,
        format!("{} further steps", resat.m),
    );
    rec.check(
        "theorem generators are independent",
        rank_certificate(&words, &units, config.precision_bits)?,
        true,
        String::new(),
    );
    if tag.theorem == TheoremCase::NonResidue {
        let want = if tag.norm_eps2p == -1 { 6 } else { 7 };
        rec.check(
            "unit index exponent for (p/q) = −1",
            m == want,
            true,
            format!("m = {m}, expected {want}"),
        );
    }

    // 2-class number of K.
    let h2k_theorem = predict_h2k(&tag, h2.get(3), h_pq, h_2pq)?;
    let m5 = saturate_k5(&units, &screen)?.m;
    let report = ClassNumberReport::new(&h2, m, h2k_theorem, m5)?;
    rec.h2.insert("K".into(), report.h2k_kuroda);
    rec.check(
        "theorem h2(K) equals the Kuroda value",
        report.h2k_theorem == report.h2k_kuroda,
        true,
        format!("theorem {}, Kuroda {}", report.h2k_theorem, report.h2k_kuroda),
    );
    if legendre == -1 {
        if tag.norm_eps2p == -1 {
            rec.check("q(k5) = 2", m5 == 1, true, format!("q(k5) = 2^{m5}"));
        }
        rec.check(
            "h2(K) = h2(k5)/2",
            2 * report.h2k_kuroda == report.h2_k5,
            true,
            format!("h2(K) = {}, h2(k5) = {}", report.h2k_kuroda, report.h2_k5),
        );
    }
    rec.class_numbers = Some(report);

    // Relative norm tables.
    rec.tables = check_tables(&units, &tag)?;
    let bad: Vec<String> = rec
        .tables
        .iter()
        .filter(|t| !t.holds)
        .map(|t| format!("({})^({}) ≠ {}", t.unit, t.sigma, t.expected))
        .collect();
    rec.check("relative norm tables", bad.is_empty(), true, bad.join("; "));

    rec.case = Some(tag);
    Ok(())
}

/// All valid pairs with `p ≤ p_max`, `q ≤ q_max`, ordered by `(p, q)`.
pub fn pairs_in_range(p_max: u64, q_max: u64) -> Vec<PrimePair> {
    let ps = (17..=p_max).step_by(8).filter(|&p| is_prime(p));
    let qs: Vec<u64> = (7..=q_max).step_by(8).filter(|&q| is_prime(q)).collect();
    ps.flat_map(|p| qs.iter().map(move |&q| PrimePair { p, q }))
        .collect()
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ScanSummary {
    pub pairs: usize,
    pub by_case: BTreeMap<String, usize>,
    pub by_status: BTreeMap<String, usize>,
    /// Rows: square class of `x + 1`; columns: of `v + 1` (order 1, p, 2p),
    /// over pairs with `(p/q) = 1`.
    pub case_matrix: [[usize; 3]; 3],
}

impl ScanSummary {
    pub fn from_records(records: &[VerificationRecord]) -> Self {
        let mut s = Self {
            pairs: records.len(),
            ..Self::default()
        };
        for r in records {
            *s.by_status.entry(r.status.label().into()).or_default() += 1;
            if let Some(tag) = &r.case {
                *s.by_case.entry(tag.theorem.to_string()).or_default() += 1;
                if tag.legendre_pq == 1 {
                    s.case_matrix[tag.x_class.index()][tag.v_class.index()] += 1;
                }
            }
        }
        s
    }

    pub fn matrix_table(&self) -> String {
        let mut out = String::from("x+1 \\ v+1      1      p     2p\n");
        for (i, row) in self.case_matrix.iter().enumerate() {
            out.push_str(&format!(
                "{:>9} {:>6} {:>6} {:>6}\n",
                SquareClass::ALL[i].label(),
                row[0],
                row[1],
                row[2]
            ));
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub p_max: u64,
    pub q_max: u64,
    pub records: Vec<VerificationRecord>,
    pub summary: ScanSummary,
}

/// Verify every pair in range on `jobs` worker threads (`0` = default);
/// records come back in `(p, q)` order regardless of scheduling.
pub fn scan_pairs(p_max: u64, q_max: u64, config: &VerifyConfig, jobs: usize) -> Result<ScanReport> {
    config.validate()?;
    let pairs = pairs_in_range(p_max, q_max);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let records: Vec<VerificationRecord> =
        pool.install(|| pairs.par_iter().map(|&pair| verify_pair(pair, config)).collect());
    let summary = ScanSummary::from_records(&records);
    Ok(ScanReport {
        p_max,
        q_max,
        records,
        summary,
    })
}

pub fn write_json<W: Write, T: Serialize>(out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(out, value)
        .map_err(|e| Error::InvalidArgument(format!("writing JSON: {e}")))
}

#[derive(Serialize)]
struct CsvRow<'a> {
    p: u64,
    q: u64,
    legendre_pq: Option<i8>,
    norm_eps2p: Option<i8>,
    case: String,
    x_class: &'a str,
    v_class: &'a str,
    u: Option<u8>,
    m: Option<u32>,
    h2_2p: Option<u64>,
    h2_pq: Option<u64>,
    h2_2pq: Option<u64>,
    h2k_theorem: Option<u64>,
    h2k_kuroda: Option<u64>,
    status: &'a str,
}

/// One row per record; witnesses and coordinates are dropped.
pub fn write_csv<W: Write>(out: W, records: &[VerificationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        let tag = r.case.as_ref();
        let h = |d: u64| r.h2.get(&d.to_string()).copied();
        let cn = r.class_numbers.as_ref();
        w.serialize(CsvRow {
            p: r.pair.p,
            q: r.pair.q,
            legendre_pq: tag.map(|t| t.legendre_pq),
            norm_eps2p: tag.map(|t| t.norm_eps2p),
            case: tag.map_or(String::new(), |t| t.theorem.to_string()),
            x_class: tag.map_or("", |t| t.x_class.label()),
            v_class: tag.map_or("", |t| t.v_class.label()),
            u: tag.and_then(|t| t.u),
            m: r.m,
            h2_2p: h(2 * r.pair.p),
            h2_pq: h(r.pair.p * r.pair.q),
            h2_2pq: h(2 * r.pair.p * r.pair.q),
            h2k_theorem: cn.map(|c| c.h2k_theorem),
            h2k_kuroda: cn.map(|c| c.h2k_kuroda),
            status: r.status.label(),
        })
        .map_err(|e| Error::InvalidArgument(format!("writing CSV: {e}")))?;
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(format!("writing CSV: {e}")))
}

/// The base-unit words `ε₂, …, ε₂ₚq`.
pub fn base_words() -> Vec<UnitWord> {
    BaseUnit::FREE.iter().map(|&b| UnitWord::base(b)).collect()
}
