//! The lattice `U + L` with basis `{F, S0, B}`: intersection numbers, the
//! nefness test for isotropic classes, periodicity, sections and fibrations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, gcd_slice};
use crate::enumeration::{enumerate_positive, lll_gram, roots, short_vectors};
use crate::error::{LatticeError, Result};
use crate::lattice::{hyperbolic_plane, saturate, Definiteness, IntLattice};
use crate::matrix::IntMatrix;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DivisorClass {
    pub x: i64,
    pub y: i64,
    pub z: Vec<i64>,
}

impl DivisorClass {
    pub fn new(x: i64, y: i64, z: Vec<i64>) -> Self {
        DivisorClass { x, y, z }
    }

    /// Parses `[x, y, z1, ..., zr]`.
    pub fn from_flat(v: &[i64]) -> Result<Self> {
        if v.len() < 2 {
            return Err(LatticeError::Shape("a divisor class needs at least two coordinates".into()));
        }
        Ok(DivisorClass { x: v[0], y: v[1], z: v[2..].to_vec() })
    }

    pub fn flat(&self) -> Vec<i64> {
        let mut v = vec![self.x, self.y];
        v.extend(&self.z);
        v
    }

    pub fn is_primitive(&self) -> bool {
        gcd_slice(&self.flat()) == 1
    }
}

impl std::fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.flat().iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

#[derive(Clone, Debug)]
pub struct NSLattice {
    l: IntLattice,
    gram_full: IntMatrix,
    positive_roots: Vec<Vec<i64>>,
}

impl NSLattice {
    pub fn new(l: IntLattice) -> Result<Self> {
        if l.definiteness() != Definiteness::NegativeDefinite {
            return Err(LatticeError::Precondition("L must be negative definite".into()));
        }
        let gram_full = hyperbolic_plane().direct_sum(&l).gram().clone();
        // lexicographically positive roots form a positive system
        let positive_roots = roots(&l)?.vectors;
        Ok(NSLattice { l, gram_full, positive_roots })
    }

    pub fn lattice(&self) -> &IntLattice {
        &self.l
    }

    pub fn gram_full(&self) -> &IntMatrix {
        &self.gram_full
    }

    pub fn rank_l(&self) -> usize {
        self.l.rank()
    }

    pub fn positive_roots(&self) -> &[Vec<i64>] {
        &self.positive_roots
    }

    pub fn fiber(&self) -> DivisorClass {
        DivisorClass::new(1, 0, vec![0; self.rank_l()])
    }

    pub fn zero_section(&self) -> DivisorClass {
        DivisorClass::new(0, 1, vec![0; self.rank_l()])
    }

    fn check(&self, d: &DivisorClass) -> Result<()> {
        if d.z.len() != self.rank_l() {
            return Err(LatticeError::Shape(format!("class has {} L-coordinates, expected {}", d.z.len(), self.rank_l())));
        }
        Ok(())
    }

    pub fn pair(&self, a: &DivisorClass, b: &DivisorClass) -> i64 {
        a.x * b.y + a.y * b.x - 2 * a.y * b.y + self.l.pair(&a.z, &b.z)
    }

    pub fn self_int(&self, d: &DivisorClass) -> i64 {
        self.pair(d, d)
    }

    /// `-1/2 |v|_L`, a nonnegative integer.
    pub fn q(&self, v: &[i64]) -> i64 {
        -self.l.norm(v) / 2
    }

    /// `[alpha, beta, gamma]` with square zero, if `alpha` is integral.
    pub fn complete_isotropic(&self, beta: i64, gamma: &[i64]) -> Option<DivisorClass> {
        if beta == 0 || gamma.len() != self.rank_l() {
            return None;
        }
        let qg = self.q(gamma);
        if qg % beta != 0 {
            return None;
        }
        Some(DivisorClass::new(beta + qg / beta, beta, gamma.to_vec()))
    }

    fn check_isotropic(&self, e: &DivisorClass) -> Result<i64> {
        self.check(e)?;
        if self.self_int(e) != 0 {
            return Err(LatticeError::Precondition(format!("{} is not isotropic", e)));
        }
        if !e.is_primitive() {
            return Err(LatticeError::Precondition(format!("{} is not primitive", e)));
        }
        let beta = self.pair(e, &self.fiber());
        if beta <= 0 {
            return Err(LatticeError::Precondition(format!("{} has E.F = {} <= 0", e, beta)));
        }
        Ok(beta)
    }

    /// The representative with every coordinate of gamma in `[0, beta)`.
    pub fn reduce_periodic(&self, e: &DivisorClass) -> Result<DivisorClass> {
        let beta = self.check_isotropic(e)?;
        let gamma: Vec<i64> = e.z.iter().map(|g| g.rem_euclid(beta)).collect();
        Ok(self.complete_isotropic(beta, &gamma).expect("congruent gamma keeps alpha integral"))
    }

    /// The (-2)-class `[y + (Q(z)-1)/y, y, z]`, if integral.
    fn minus_two_class(&self, y: i64, z: Vec<i64>) -> Option<DivisorClass> {
        let n = self.q(&z) - 1;
        if y == 0 || n % y != 0 {
            return None;
        }
        Some(DivisorClass::new(y + n / y, y, z))
    }

    pub fn is_nef_isotropic(&self, e: &DivisorClass) -> Result<NefVerdict> {
        self.nef_test(e, NefMode::Full)
    }

    pub fn nef_test(&self, e: &DivisorClass, mode: NefMode) -> Result<NefVerdict> {
        let beta = self.check_isotropic(e)?;
        let candidates = self.nef_vectors(beta)?;
        self.nef_test_with(e, mode, &candidates)
    }

    /// All `v` in `L` with `Q(v) <= beta^2`, both signs, zero included.
    fn nef_vectors(&self, beta: i64) -> Result<Vec<Vec<i64>>> {
        let vs = short_vectors(&self.l, 2 * beta * beta)?;
        let mut candidates: Vec<Vec<i64>> = vec![vec![0i64; self.rank_l()]];
        for v in vs.vectors {
            let neg = v.iter().map(|x| -x).collect();
            candidates.push(v);
            candidates.push(neg);
        }
        Ok(candidates)
    }

    fn nef_test_with(&self, e: &DivisorClass, mode: NefMode, candidates: &[Vec<i64>]) -> Result<NefVerdict> {
        let beta = self.check_isotropic(e)?;
        let b2 = beta * beta;
        let gamma = &e.z;

        let z_of = |y: i64, v: &[i64]| -> Option<Vec<i64>> {
            let z: Vec<i64> = gamma.iter().zip(v).map(|(g, vi)| y * g - vi).collect();
            if z.iter().all(|c| c % beta == 0) {
                Some(z.iter().map(|c| c / beta).collect())
            } else {
                None
            }
        };

        // curves meeting F: the sets I(v)
        for v in candidates {
            let qv = self.q(v);
            if qv >= b2 {
                continue;
            }
            for y in divisors((b2 - qv) as u64) {
                let y = y as i64;
                let Some(z) = z_of(y, v) else { continue };
                if let Some(c) = self.minus_two_class(y, z) {
                    let ec = self.pair(e, &c);
                    assert!(ec < 0 && self.self_int(&c) == -2 && c.y > 0, "bad nef witness");
                    return Ok(NefVerdict::not_nef(c, ec));
                }
            }
        }
        // curves inside fibers of F
        for r in &self.positive_roots {
            let c = DivisorClass::new(0, 0, r.clone());
            let ec = self.pair(e, &c);
            if ec < 0 {
                return Ok(NefVerdict::not_nef(c, ec));
            }
            let c2 = DivisorClass::new(1, 0, r.iter().map(|x| -x).collect());
            let ec2 = self.pair(e, &c2);
            if ec2 < 0 {
                return Ok(NefVerdict::not_nef(c2, ec2));
            }
        }
        if mode == NefMode::Quick {
            return Ok(NefVerdict { status: NefStatus::Nef, witness: None, intersection: None });
        }
        // equality cases: (-2)-classes orthogonal to E
        for v in candidates {
            if self.q(v) != b2 {
                continue;
            }
            for y in 1..=beta {
                let Some(z) = z_of(y, v) else { continue };
                if let Some(c) = self.minus_two_class(y, z) {
                    debug_assert_eq!(self.pair(e, &c), 0);
                    return Ok(NefVerdict { status: NefStatus::NefWithOrthogonalRoot, witness: Some(c), intersection: Some(0) });
                }
            }
        }
        for r in &self.positive_roots {
            for c in [DivisorClass::new(0, 0, r.clone()), DivisorClass::new(1, 0, r.iter().map(|x| -x).collect())] {
                if self.pair(e, &c) == 0 {
                    return Ok(NefVerdict { status: NefStatus::NefWithOrthogonalRoot, witness: Some(c), intersection: Some(0) });
                }
            }
        }
        Ok(NefVerdict { status: NefStatus::NefMaximalRank, witness: None, intersection: None })
    }

    /// Brute-force refutation: search `C = [x, y, z]` with `C^2 = -2`,
    /// `0 < y <= y_bound`, `|z_i| <= z_box` and report the least `E.C` found.
    pub fn nef_brute_oracle(&self, e: &DivisorClass, y_bound: i64, z_box: i64) -> Result<OracleVerdict> {
        self.check(e)?;
        let r = self.rank_l();
        let mut best: Option<(i64, DivisorClass)> = None;
        let mut z = vec![-z_box; r];
        loop {
            let n = self.q(&z) - 1;
            // E.C is linear in y once x is eliminated: E.C = alpha*y + beta*(y + n/y) - 2 beta y + <gamma, z>
            let gz = self.l.pair(&e.z, &z);
            for y in 1..=y_bound {
                if n % y != 0 {
                    continue;
                }
                let x = y + n / y;
                let ec = e.x * y + e.y * x - 2 * e.y * y + gz;
                if best.as_ref().map_or(true, |(b, _)| ec < *b) {
                    best = Some((ec, DivisorClass::new(x, y, z.clone())));
                }
            }
            let mut i = 0;
            loop {
                if i == r {
                    let (min_intersection, witness) = match best {
                        Some((m, c)) => (Some(m), if m < 0 { Some(c) } else { None }),
                        None => (None, None),
                    };
                    return Ok(OracleVerdict { min_intersection, witness });
                }
                z[i] += 1;
                if z[i] <= z_box {
                    break;
                }
                z[i] = -z_box;
                i += 1;
            }
        }
    }

    /// Search for a class `C` with `C^2 = -2`, `E.C = 1`: by the intersection
    /// identity this means `Q(v) = beta (beta + y)` for `v = y gamma - beta z`.
    pub fn find_section(&self, e: &DivisorClass, bounds: SectionBounds) -> Result<SectionSearch> {
        self.check(e)?;
        let beta = self.pair(e, &self.fiber());
        if beta == 0 && self.self_int(e) == 0 && e.z.iter().all(|&c| c == 0) && e.x == 1 {
            return Ok(SectionSearch { section: Some(self.zero_section()), y_bound: bounds.y_max, z_bound: bounds.z_max, exhausted: true });
        }
        let beta = self.check_isotropic(e)?;
        let gamma = e.z.clone();
        let (pg, _) = (self.l.gram().scaled(-1), ());
        let red = lll_gram(&pg);
        let hrows = red.transform.clone();
        let r = self.rank_l();
        let mut lo_y = 0i64;
        let mut hi_y = 1i64;
        let mut visited: u64 = 0;
        loop {
            let hi = hi_y.min(bounds.y_max);
            let bound = 2 * beta * (beta + hi);
            let mut best: Option<DivisorClass> = None;
            let mut capped = false;
            enumerate_positive(&red.gram, bound, &mut |x, norm| {
                visited += 1;
                if visited > bounds.vector_cap {
                    capped = true;
                    return false;
                }
                let qv = norm / 2;
                if qv % beta != 0 {
                    return true;
                }
                let y = qv / beta - beta;
                if y <= lo_y || y > hi {
                    return true;
                }
                let mut v = vec![0i64; r];
                for (i, &xi) in x.iter().enumerate() {
                    if xi != 0 {
                        for (vj, &t) in v.iter_mut().zip(hrows.row(i)) {
                            *vj += xi * t;
                        }
                    }
                }
                for sign in [1i64, -1] {
                    let z: Vec<i64> = gamma.iter().zip(&v).map(|(g, vi)| y * g - sign * vi).collect();
                    if !z.iter().all(|c| c % beta == 0) {
                        continue;
                    }
                    let z: Vec<i64> = z.iter().map(|c| c / beta).collect();
                    if z.iter().any(|c| c.abs() > bounds.z_max) {
                        continue;
                    }
                    if let Some(c) = self.minus_two_class(y, z) {
                        if best.as_ref().map_or(true, |b| (c.y, &c.z) < (b.y, &b.z)) {
                            best = Some(c);
                        }
                    }
                }
                true
            });
            if let Some(c) = best {
                assert_eq!(self.pair(e, &c), 1);
                assert_eq!(self.self_int(&c), -2);
                return Ok(SectionSearch { section: Some(c), y_bound: bounds.y_max, z_bound: bounds.z_max, exhausted: false });
            }
            if capped {
                return Ok(SectionSearch { section: None, y_bound: hi, z_bound: bounds.z_max, exhausted: false });
            }
            if hi >= bounds.y_max {
                return Ok(SectionSearch { section: None, y_bound: bounds.y_max, z_bound: bounds.z_max, exhausted: true });
            }
            lo_y = hi;
            hi_y = hi * 2;
        }
    }

    pub fn default_section_bounds(&self) -> SectionBounds {
        let d = self.l.determinant().abs();
        SectionBounds { y_max: 4 * d, z_max: 2 * d, vector_cap: 50_000_000 }
    }

    /// Every primitive isotropic `E = [alpha, beta, gamma]` with `gamma` in
    /// `[0, beta)^r`, with its nef verdict and, for nef classes, a section search.
    pub fn find_fibrations(&self, beta: i64, with_sections: bool) -> Result<Vec<FibrationCandidate>> {
        if beta < 2 {
            return Err(LatticeError::Precondition("beta must be at least 2".into()));
        }
        let r = self.rank_l();
        let total = (beta as u64).checked_pow(r as u32).ok_or_else(|| LatticeError::CapExceeded("too many residues".into()))?;
        let gammas: Vec<Vec<i64>> = (0..total)
            .map(|mut idx| {
                let mut g = vec![0i64; r];
                for i in (0..r).rev() {
                    g[i] = (idx % beta as u64) as i64;
                    idx /= beta as u64;
                }
                g
            })
            .collect();
        let bounds = self.default_section_bounds();
        let vectors = self.nef_vectors(beta)?;
        let mut out: Vec<FibrationCandidate> = gammas
            .par_iter()
            .filter_map(|g| {
                let e = self.complete_isotropic(beta, g)?;
                if !e.is_primitive() {
                    return None;
                }
                Some(e)
            })
            .map(|e| -> Result<FibrationCandidate> {
                let verdict = self.nef_test_with(&e, NefMode::Full, &vectors)?;
                let section = if with_sections && verdict.is_nef() { Some(self.find_section(&e, bounds)?) } else { None };
                Ok(FibrationCandidate { class: e, verdict, section })
            })
            .collect::<Result<Vec<_>>>()?;
        out.sort_by(|a, b| (a.class.y, &a.class.z, a.class.x).cmp(&(b.class.y, &b.class.z, b.class.x)));
        Ok(out)
    }

    /// Count of nef classes for each `beta` in the range.
    pub fn fibration_counts(&self, betas: impl IntoIterator<Item = i64>) -> Result<Vec<(i64, usize)>> {
        let mut out = Vec::new();
        for b in betas {
            let n = self.find_fibrations(b, false)?.iter().filter(|c| c.verdict.is_nef()).count();
            out.push((b, n));
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NefMode {
    /// Also classify curves orthogonal to E.
    Full,
    /// Stop once nefness is decided.
    Quick,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NefStatus {
    NotNef,
    NefWithOrthogonalRoot,
    NefMaximalRank,
    Nef,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NefVerdict {
    pub status: NefStatus,
    pub witness: Option<DivisorClass>,
    /// `E.C` for the witness.
    pub intersection: Option<i64>,
}

impl NefVerdict {
    fn not_nef(c: DivisorClass, ec: i64) -> Self {
        NefVerdict { status: NefStatus::NotNef, witness: Some(c), intersection: Some(ec) }
    }

    pub fn is_nef(&self) -> bool {
        self.status != NefStatus::NotNef
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleVerdict {
    pub min_intersection: Option<i64>,
    pub witness: Option<DivisorClass>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SectionBounds {
    pub y_max: i64,
    pub z_max: i64,
    pub vector_cap: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SectionSearch {
    pub section: Option<DivisorClass>,
    pub y_bound: i64,
    pub z_bound: i64,
    /// True when the whole search region was covered.
    pub exhausted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FibrationCandidate {
    pub class: DivisorClass,
    pub verdict: NefVerdict,
    pub section: Option<SectionSearch>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensionVerdict {
    PositiveEntropy,
    Inconclusive,
}

/// Determinant criterion for a corank-one primitive sublattice `sub` (rows in the basis of `l`).
pub fn extension_criterion(l: &IntLattice, sub: &IntMatrix, sub_has_positive_entropy: bool) -> Result<ExtensionVerdict> {
    if sub.nrows() + 1 != l.rank() {
        return Err(LatticeError::Precondition("sublattice must have corank one".into()));
    }
    let sat = saturate(sub);
    if crate::lattice::lattice_index(sub, &sat) != 1 {
        return Err(LatticeError::Precondition("sublattice is not primitive".into()));
    }
    if !sub_has_positive_entropy {
        return Ok(ExtensionVerdict::Inconclusive);
    }
    let d = l.determinant().abs();
    let d_sub = l.sublattice(sub)?.determinant().abs();
    let holds = d > 2 * d_sub || (d == 2 * d_sub && l.rank() + 2 <= 10);
    Ok(if holds { ExtensionVerdict::PositiveEntropy } else { ExtensionVerdict::Inconclusive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::rank_one;

    fn ns(rows: &[&[i64]]) -> NSLattice {
        NSLattice::new(IntLattice::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn pairing_basics() {
        let n = ns(&[&[-8]]);
        assert_eq!(n.pair(&n.fiber(), &n.zero_section()), 1);
        assert_eq!(n.self_int(&n.zero_section()), -2);
        assert_eq!(n.self_int(&DivisorClass::new(4, 2, vec![1])), 0);
    }

    #[test]
    fn completion() {
        assert_eq!(ns(&[&[-8]]).complete_isotropic(2, &[1]), Some(DivisorClass::new(4, 2, vec![1])));
        assert_eq!(ns(&[&[-4]]).complete_isotropic(1, &[1]), Some(DivisorClass::new(3, 1, vec![1])));
        assert_eq!(ns(&[&[-6]]).complete_isotropic(2, &[1]), None);
    }

    #[test]
    fn periodic_reduction() {
        let n = ns(&[&[-8]]);
        let e = n.complete_isotropic(2, &[3]).unwrap();
        assert_eq!(n.reduce_periodic(&e).unwrap().z, vec![1]);
        let e = DivisorClass::new(4, 2, vec![1]);
        assert_eq!(n.reduce_periodic(&e).unwrap(), e);
    }

    #[test]
    fn nef_examples() {
        let n = ns(&[&[-8, 0], &[0, -6]]);
        let v = n.is_nef_isotropic(&DivisorClass::new(25, 12, vec![6, 2])).unwrap();
        assert_eq!(v.status, NefStatus::NefMaximalRank);
        let n = ns(&[&[-4]]);
        let v = n.is_nef_isotropic(&DivisorClass::new(3, 1, vec![1])).unwrap();
        assert_eq!(v.status, NefStatus::NotNef);
        let n = ns(&[&[-8]]);
        let v = n.is_nef_isotropic(&DivisorClass::new(4, 2, vec![1])).unwrap();
        assert!(v.is_nef());
    }

    #[test]
    fn rejects_bad_input() {
        let n = ns(&[&[-8]]);
        assert!(n.is_nef_isotropic(&DivisorClass::new(8, 4, vec![2])).is_err());
        assert!(n.is_nef_isotropic(&DivisorClass::new(-1, 0, vec![0])).is_err());
        assert!(n.is_nef_isotropic(&DivisorClass::new(2, 1, vec![0])).is_err());
    }

    #[test]
    fn sections() {
        let n = ns(&[&[-8, 0], &[0, -6]]);
        let s = n.find_section(&DivisorClass::new(25, 12, vec![6, 2]), n.default_section_bounds()).unwrap();
        assert!(s.section.is_some());
        let n = ns(&[&[-8]]);
        assert_eq!(n.find_section(&n.fiber(), n.default_section_bounds()).unwrap().section, Some(n.zero_section()));
        let s = n.find_section(&DivisorClass::new(4, 2, vec![1]), n.default_section_bounds()).unwrap();
        assert!(s.section.is_none());
    }

    #[test]
    fn determinant_criterion() {
        let l = IntLattice::from_rows(&[[-6, 0], [0, -6]]).unwrap();
        let sub = IntMatrix::from_rows(&[[1, 1]]).unwrap();
        assert_eq!(l.sublattice(&sub).unwrap().determinant(), -12);
        assert_eq!(extension_criterion(&l, &sub, true).unwrap(), ExtensionVerdict::PositiveEntropy);
        let l = IntLattice::from_rows(&[[-4, 0], [0, -4]]).unwrap();
        let sub = IntMatrix::from_rows(&[[1, 2]]).unwrap();
        assert_eq!(extension_criterion(&l, &sub, true).unwrap(), ExtensionVerdict::Inconclusive);
        assert_eq!(extension_criterion(&l, &sub, false).unwrap(), ExtensionVerdict::Inconclusive);
        assert!(extension_criterion(&l, &IntMatrix::from_rows(&[[2, 4]]).unwrap(), true).is_err());
        let _ = rank_one(-2);
    }
}
