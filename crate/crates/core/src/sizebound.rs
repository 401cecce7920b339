//! Output size bounds for IDB predicates and bounds on adornment counts.

use num::bigint::BigUint;
use num::{BigRational, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::adorn::adornments_of;
use crate::ast::{AdornedProgram, Program};
use crate::error::Error;
use crate::width::{format_ratio, width_of_rule, CoverMode};

/// Stirling number of the second kind.
pub fn stirling2(n: u32, k: u32) -> BigUint {
    let (n, k) = (n as usize, k as usize);
    if k > n {
        return BigUint::zero();
    }
    // row[j] = S(i, j)
    let mut row = vec![BigUint::zero(); k + 1];
    row[0] = BigUint::one();
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            row[j] = &row[j] * BigUint::from(j) + &row[j - 1];
        }
        row[0] = BigUint::zero();
    }
    row[k].clone()
}

/// Falling factorial `n (n-1) ... (n-k+1)`; zero when `k > n`.
pub fn permutations(n: &BigUint, k: u32) -> BigUint {
    let mut out = BigUint::one();
    for i in 0..k {
        let i = BigUint::from(i);
        if &i >= n {
            return BigUint::zero();
        }
        out *= n - i;
    }
    out
}

/// Schema quantities the bounds depend on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaStats {
    pub num_edbs: u64,
    /// Largest EDB arity.
    pub ear: u32,
    /// Arity of the predicate being bounded.
    pub arq: u32,
    pub rule_count: u64,
    pub term_count: u64,
}

impl SchemaStats {
    pub fn of(p: &Program, q: &str) -> Result<SchemaStats, Error> {
        let s = p.schema();
        if !s.is_idb(q) {
            return Err(Error::UnknownPredicate(q.to_string()));
        }
        Ok(SchemaStats {
            num_edbs: s.edb.len() as u64,
            ear: s.max_edb_arity() as u32,
            arq: s.arity(q).unwrap() as u32,
            rule_count: p.rule_count() as u64,
            term_count: p.term_count() as u64,
        })
    }
}

/// Sum over `k <= ew` of `S(arq, k) * P(numEDBs * N, k) * ear^arq`.
///
/// The `k = 0` term is one exactly for nullary predicates.
pub fn bound1(stats: &SchemaStats, ew: u32, n: u64) -> BigUint {
    let pool = BigUint::from(stats.num_edbs) * BigUint::from(n);
    let place = BigUint::from(stats.ear).pow(stats.arq);
    (0..=ew)
        .map(|k| stirling2(stats.arq, k) * permutations(&pool, k) * &place)
        .sum()
}

/// An integer upper bound, flagged `exact` when it equals the real value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifiedBound {
    #[serde(with = "decimal")]
    pub value: BigUint,
    pub exact: bool,
}

/// Smallest integer at least `n^e` for a non-negative rational `e`.
pub fn ceil_pow(n: u64, e: &BigRational) -> CertifiedBound {
    assert!(*e >= BigRational::zero(), "exponent must be non-negative");
    let p = e.numer().to_u32().expect("exponent numerator fits in u32");
    let q = e.denom().to_u32().expect("exponent denominator fits in u32");
    let m = BigUint::from(n).pow(p);
    let r = m.nth_root(q);
    if r.pow(q) == m {
        CertifiedBound { value: r, exact: true }
    } else {
        CertifiedBound { value: r + 1u32, exact: false }
    }
}

/// `(numEDBs * ear * arq)^arq * N^ew`, rounded up for fractional `ew`.
pub fn bound2(stats: &SchemaStats, ew: &BigRational, n: u64) -> CertifiedBound {
    let c = (BigUint::from(stats.num_edbs) * BigUint::from(stats.ear) * BigUint::from(stats.arq)).pow(stats.arq);
    let p = ceil_pow(n, ew);
    CertifiedBound { value: c * p.value, exact: p.exact }
}

/// `(arq + termCount)^arq * 2^(numEDBs * ((arq+1)^ear - 1))`: the number of
/// adornments any relaxation-free construction can produce for a predicate.
pub fn coeff_naive(stats: &SchemaStats) -> BigUint {
    let a = BigUint::from(stats.arq) + BigUint::from(stats.term_count);
    let atoms = (BigUint::from(stats.arq) + 1u32).pow(stats.ear) - 1u32;
    let e = BigUint::from(stats.num_edbs) * atoms;
    let e: u32 = e.to_u32().expect("exponent of coeff_naive fits in u32");
    a.pow(stats.arq) * BigUint::from(2u32).pow(e)
}

/// Sum over `k <= ew` of `S(arq, k) * numEDBs^k * ear^arq`: the number of
/// minimal adornments of width at most `ew`.
pub fn coeff_minimal(stats: &SchemaStats, ew: u32) -> BigUint {
    let place = BigUint::from(stats.ear).pow(stats.arq);
    (0..=ew)
        .map(|k| stirling2(stats.arq, k) * BigUint::from(stats.num_edbs).pow(k) * &place)
        .sum()
}

pub(crate) mod decimal {
    use num::bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateBounds {
    pub predicate: String,
    pub stats: SchemaStats,
    /// Number of distinct adornments.
    pub f_exact: u64,
    pub ew_integral: u32,
    /// Rendered as `p` or `p/q`.
    pub ew_fractional: String,
    #[serde(with = "decimal")]
    pub bound1: BigUint,
    pub bound2: CertifiedBound,
    /// `f_exact * ceil(N^ew_fractional)`.
    pub agm_bound: CertifiedBound,
    #[serde(with = "decimal")]
    pub coeff_naive: BigUint,
    #[serde(with = "decimal")]
    pub coeff_minimal: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeBoundReport {
    /// Largest number of tuples in any EDB relation.
    pub n: u64,
    pub predicates: Vec<PredicateBounds>,
}

/// Bounds for every IDB predicate of `p`, using adorned program `pi`.
pub fn size_report(p: &Program, pi: &AdornedProgram, n: u64) -> Result<SizeBoundReport, Error> {
    let mut predicates = Vec::new();
    for q in &p.schema().idb {
        let stats = SchemaStats::of(p, q)?;
        let ads = adornments_of(pi, q)?;
        let mut ew_i = 0u32;
        let mut ew_f = BigRational::zero();
        for a in &ads {
            let wi = width_of_rule(a.rule(), CoverMode::Integral)?;
            let wf = width_of_rule(a.rule(), CoverMode::Fractional)?;
            ew_i = ew_i.max(wi.to_integer().to_u32().unwrap());
            if wf > ew_f {
                ew_f = wf;
            }
        }
        let f = ads.len() as u64;
        let zero = CertifiedBound { value: BigUint::zero(), exact: true };
        let (b1, b2, agm) = if f == 0 {
            (BigUint::zero(), zero.clone(), zero)
        } else {
            let p = ceil_pow(n, &ew_f);
            let agm = CertifiedBound { value: BigUint::from(f) * p.value, exact: p.exact };
            (bound1(&stats, ew_i, n), bound2(&stats, &BigRational::from_integer(ew_i.into()), n), agm)
        };
        predicates.push(PredicateBounds {
            predicate: q.to_string(),
            stats,
            f_exact: f,
            ew_integral: ew_i,
            ew_fractional: format_ratio(&ew_f),
            bound1: b1,
            bound2: b2,
            agm_bound: agm,
            coeff_naive: coeff_naive(&stats),
            coeff_minimal: coeff_minimal(&stats, ew_i),
        });
    }
    Ok(SizeBoundReport { n, predicates })
}
