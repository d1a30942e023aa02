//! Picard rank three: `NS = U + <-2k>`.

use serde::Serialize;

use crate::arith::{distinct_prime_count, factorize, gcd, is_prime_power};
use crate::error::{LatticeError, Result};
use crate::lattice::rank_one;
use crate::ns::{DivisorClass, NSLattice, NefStatus, SectionSearch};

pub const L1: [i64; 8] = [2, 3, 4, 5, 7, 9, 13, 25];

/// Every `r` with `r^2 < k` divides `k - 1`.
pub fn condition_c(k: i64) -> bool {
    (1..).take_while(|r| r * r < k).all(|r| (k - 1) % r == 0)
}

/// `{x in Z/2k : x^2 = 1 mod 4k}`, which is `O(A_L)` for `L = <-2k>`.
pub fn g_k(k: i64) -> Vec<i64> {
    (0..2 * k).filter(|x| (x * x) % (4 * k) == 1 % (4 * k)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Rank3Verdict {
    pub k: i64,
    pub zero_entropy: bool,
    pub condition_c: bool,
    pub prime_power: bool,
    /// Elliptic fibrations up to automorphisms, `|G_k| / 2`.
    pub fibration_classes: usize,
    pub genus1_no_section: Option<Genus1Census>,
    /// A second elliptic fibration when the entropy is positive.
    pub witness: Option<FibrationWitness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FibrationWitness {
    pub class: DivisorClass,
    pub nef: NefStatus,
    pub section: Option<SectionSearch>,
    pub reason: String,
}

pub fn ns(k: i64) -> Result<NSLattice> {
    NSLattice::new(rank_one(-2 * k)?)
}

fn check_k(k: i64) -> Result<()> {
    if k < 2 {
        return Err(LatticeError::Precondition(format!("k must be at least 2, got {}", k)));
    }
    Ok(())
}

/// Fast verdict without witnesses; used by scans.
pub fn classify_fast(k: i64) -> Result<Rank3Verdict> {
    check_k(k)?;
    let c = condition_c(k);
    let pp = is_prime_power(k as u64);
    Ok(Rank3Verdict {
        k,
        zero_entropy: c && pp,
        condition_c: c,
        prime_power: pp,
        fibration_classes: g_k(k).len() / 2,
        genus1_no_section: None,
        witness: None,
    })
}

/// Verdict plus a checked witness: a second elliptic fibration when the
/// entropy is positive, the genus one census when `k` is in `L1`.
pub fn classify(k: i64) -> Result<Rank3Verdict> {
    let mut v = classify_fast(k)?;
    let ns = ns(k)?;
    if !v.zero_entropy {
        let (class, reason) = positive_entropy_class(k);
        let verdict = ns.is_nef_isotropic(&class)?;
        let section = ns.find_section(&class, ns.default_section_bounds())?;
        v.witness = Some(FibrationWitness { class, nef: verdict.status, section: Some(section), reason });
    } else {
        v.genus1_no_section = Some(genus1_census(k)?);
    }
    Ok(v)
}

fn positive_entropy_class(k: i64) -> (DivisorClass, String) {
    let f = factorize(k as u64);
    let p = f[0].0 as i64;
    if f.len() > 1 || f[0].1 >= 3 {
        // beta = p, gamma = 1
        let class = DivisorClass::new(p + k / p, p, vec![1]);
        let why = if f.len() > 1 { "k is not a prime power" } else { "k = p^n with n >= 3" };
        return (class, format!("{}: beta = {}, gamma = 1", why, p));
    }
    let q = (2..).find(|q| q * q < k && (k - 1) % q != 0).expect("condition (C) fails");
    (fiber_formula(k, q, 1, FiberKind::Prime), format!("condition (C) fails at r = {}", q))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FiberKind {
    /// `F' = [q^2 + k g^2, q^2, q g]`
    Prime,
    /// `F'' = [q^2 k + g^2, q^2 k, q g]`
    DoublePrime,
}

pub fn fiber_formula(k: i64, q: i64, g: i64, kind: FiberKind) -> DivisorClass {
    match kind {
        FiberKind::Prime => DivisorClass::new(q * q + k * g * g, q * q, vec![q * g]),
        FiberKind::DoublePrime => DivisorClass::new(q * q * k + g * g, q * q * k, vec![q * g]),
    }
}

/// Both families with `1 <= q <= q_bound`, `(q, g) = 1`, reduced so that `0 <= gamma < beta`.
pub fn candidate_fibers(k: i64, q_bound: i64) -> Result<Vec<(FiberKind, DivisorClass)>> {
    check_k(k)?;
    if !is_prime_power(k as u64) {
        return Err(LatticeError::Precondition(format!("{} is not a prime power", k)));
    }
    let ns = ns(k)?;
    let mut out = Vec::new();
    for q in 1..=q_bound {
        for (kind, range) in [(FiberKind::Prime, q), (FiberKind::DoublePrime, q * k)] {
            for g in 0..range.max(1) {
                if gcd(q, g) != 1 {
                    continue;
                }
                let raw = fiber_formula(k, q, g, kind);
                // g = 0 makes F'' a multiple of [k, k, 0]
                if !raw.is_primitive() {
                    continue;
                }
                let e = ns.reduce_periodic(&raw)?;
                if !out.iter().any(|(_, c)| *c == e) {
                    out.push((kind, e));
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct Genus1Census {
    pub k: i64,
    pub beta_max: i64,
    /// Nef classes `E != F` with `0 <= gamma < beta`.
    pub count: usize,
    /// The distinct values of `E.F` among them.
    pub degrees: Vec<i64>,
    pub classes: Vec<DivisorClass>,
}

/// All nef isotropic classes with `2 <= beta <= 2k`.
pub fn genus1_census(k: i64) -> Result<Genus1Census> {
    if !L1.contains(&k) {
        return Err(LatticeError::Precondition(format!("{} is not in L1", k)));
    }
    genus1_census_upto(k, 2 * k)
}

pub fn genus1_census_upto(k: i64, beta_max: i64) -> Result<Genus1Census> {
    let ns = ns(k)?;
    let mut classes = Vec::new();
    let mut degrees = Vec::new();
    for beta in 2..=beta_max {
        let found: Vec<DivisorClass> = ns.find_fibrations(beta, false)?.into_iter().filter(|c| c.verdict.is_nef()).map(|c| c.class).collect();
        if !found.is_empty() {
            degrees.push(beta);
        }
        classes.extend(found);
    }
    Ok(Genus1Census { k, beta_max, count: classes.len(), degrees, classes })
}

/// Number of distinct primes `m` of `k`; `|G_k| = 2^m`.
pub fn prime_count(k: i64) -> usize {
    distinct_prime_count(k as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert!(condition_c(25));
        assert!(!condition_c(11));
        assert!(!condition_c(8));
        assert_eq!(g_k(6), vec![1, 5, 7, 11]);
        assert_eq!(g_k(4), vec![1, 7]);
        assert_eq!(g_k(2), vec![1, 3]);
    }

    #[test]
    fn formula_instances() {
        assert_eq!(fiber_formula(2, 1, 1, FiberKind::Prime), DivisorClass::new(3, 1, vec![1]));
        assert_eq!(fiber_formula(4, 1, 1, FiberKind::DoublePrime), DivisorClass::new(5, 4, vec![1]));
    }

    #[test]
    fn k6_has_positive_entropy() {
        let v = classify(6).unwrap();
        assert!(!v.zero_entropy && !v.prime_power);
        assert_eq!(v.fibration_classes, 2);
        let w = v.witness.unwrap();
        assert_ne!(w.nef, NefStatus::NotNef);
    }
}
