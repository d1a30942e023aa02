//! Candidate lists of root-free lattices `L` such that `U + L` may have zero
//! entropy: the rank two list, the recursion from rank `n` to `n + 1` over a
//! catalog of lattices alone in their genus, and the filter that removes
//! lattices carrying a second elliptic fibration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{divisors, gcd_slice};
use crate::classify::catalog;
use crate::classify::rank3::L1;
use crate::enumeration::{minimum, short_vectors};
use crate::error::{LatticeError, Result};
use crate::genus::{same_genus, unique_in_genus, GenusCaps, Uniqueness};
use crate::isometry::is_isometric;
use crate::lattice::IntLattice;
use crate::matrix::IntMatrix;
use crate::ns::{extension_criterion, DivisorClass, ExtensionVerdict, NSLattice, NefStatus, SectionBounds};

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Elimination {
    /// `min(L) = 2`.
    HasRoots,
    /// A corank one primitive sublattice outside the previous list with
    /// `|det L| >= 2 |det L'|` (strict from rank 9 on).
    Extension { sublattice: IntMatrix, sub_det: i64, how: String },
    /// A primitive `<-2k>`, `k` outside `L1`, with `|det L| >= 4k`.
    RankOneExtension { vector: Vec<i64>, k: i64 },
    NotUniqueInGenus { witness: Option<IntLattice> },
    /// A second elliptic fibration: a nef isotropic class with a section.
    Fibration { class: DivisorClass, status: NefStatus, section: DivisorClass },
}

#[derive(Clone, Debug, Serialize)]
pub struct CandidateRecord {
    pub lattice: IntLattice,
    /// Catalog entry this is a multiple of.
    pub source: String,
    pub multiple: i64,
    pub b: i64,
    pub c: Option<i64>,
    pub d: Option<i64>,
    pub eliminated: Option<Elimination>,
    /// Fibration filter bookkeeping: values of beta searched and skipped.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub betas_searched: Vec<i64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub betas_skipped: Vec<i64>,
}

impl CandidateRecord {
    fn seed(lattice: IntLattice, source: String) -> Self {
        let b = lattice.primitive_scale_divisor();
        CandidateRecord { lattice, source, multiple: 1, b, c: None, d: None, eliminated: None, betas_searched: vec![], betas_skipped: vec![] }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CandidateList {
    pub rank: usize,
    pub lattices: Vec<IntLattice>,
    /// Every lattice considered, survivors and eliminated alike.
    pub provenance: Vec<CandidateRecord>,
}

impl CandidateList {
    fn from_records(rank: usize, provenance: Vec<CandidateRecord>) -> Self {
        let lattices = provenance.iter().filter(|r| r.eliminated.is_none()).map(|r| r.lattice.clone()).collect();
        CandidateList { rank, lattices, provenance }
    }

    /// A list given directly, e.g. the published one.
    pub fn given(rank: usize, lattices: Vec<IntLattice>) -> Self {
        let provenance = lattices
            .iter()
            .map(|l| CandidateRecord::seed(l.clone(), l.name().unwrap_or("given").to_string()))
            .collect();
        CandidateList { rank, lattices, provenance }
    }

    pub fn b_max(&self) -> i64 {
        self.lattices.iter().map(|l| l.primitive_scale_divisor()).max().unwrap_or(1)
    }

    /// Some member has the genus of `l`.  Members are alone in their genus,
    /// so this is membership up to isometry.
    pub fn contains_genus_of(&self, l: &IntLattice) -> Result<bool> {
        for m in &self.lattices {
            if m.rank() == l.rank() && m.determinant() == l.determinant() && same_genus(m, l)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepConfig {
    pub seed: u64,
    pub trials: usize,
    pub height: i64,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig { seed: 0, trials: 100, height: 8 }
    }
}

/// `k1 <= k2` in `L1` with `|a| <= k1`: any other reduced root-free binary
/// form has a basis vector `<-2k>`, `k` outside `L1`, and `det >= 4k`.
pub fn rank2_candidates() -> Result<CandidateList> {
    let mut forms: Vec<IntLattice> = Vec::new();
    for (i, &k1) in L1.iter().enumerate() {
        for &k2 in &L1[i..] {
            for a in 0..=k1 {
                let l = IntLattice::from_rows(&[[-2 * k1, a], [a, -2 * k2]])?;
                let mut seen = false;
                for f in &forms {
                    if f.determinant() == l.determinant() && is_isometric(f, &l)?.is_some() {
                        seen = true;
                        break;
                    }
                }
                if !seen {
                    forms.push(l);
                }
            }
        }
    }
    let records: Vec<CandidateRecord> = forms
        .into_par_iter()
        .map(|l| {
            let g = l.gram();
            let name = format!("[{},{},{}]", g[(0, 0)], g[(1, 1)], g[(0, 1)]);
            let mut rec = CandidateRecord::seed(l.clone(), name);
            rec.eliminated = rank_one_obstruction(&l)?;
            if rec.eliminated.is_none() {
                let (u, _) = unique_in_genus(&l, GenusCaps::default())?;
                match u {
                    Uniqueness::True => {}
                    Uniqueness::False { witness } => rec.eliminated = Some(Elimination::NotUniqueInGenus { witness: Some(witness) }),
                    Uniqueness::Unknown => rec.eliminated = Some(Elimination::NotUniqueInGenus { witness: None }),
                }
            }
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut records = records;
    records.sort_by_key(|r| order_key(&r.lattice));
    Ok(CandidateList::from_records(2, records))
}

fn order_key(l: &IntLattice) -> (i64, Vec<Vec<i64>>) {
    (l.determinant().abs(), l.gram().to_rows())
}

/// A primitive vector of norm `-2k` with `k` outside `L1` and `|det| >= 4k`.
fn rank_one_obstruction(l: &IntLattice) -> Result<Option<Elimination>> {
    let d = l.determinant().abs();
    let sv = short_vectors(l, d / 2)?;
    for v in &sv.vectors {
        let k = -l.norm(v) / 2;
        if gcd_slice(v) == 1 && !L1.contains(&k) && d >= 4 * k {
            return Ok(Some(Elimination::RankOneExtension { vector: v.clone(), k }));
        }
    }
    Ok(None)
}

/// `c(L)`: least integer `>= 2 |det L'| / |det L|` for the leading minor
/// `L'`, strictly greater from rank 9 on.
pub fn c_value(l: &IntLattice) -> i64 {
    let n = l.rank();
    let idx: Vec<usize> = (0..n - 1).collect();
    let sub = l.gram().principal(&idx).determinant().expect("minor fits i64").abs();
    let d = l.determinant().abs();
    if n >= 9 {
        2 * sub / d + 1
    } else {
        (2 * sub + d - 1) / d
    }
}

/// One step of the recursion: from the list in rank `n` and the catalog of
/// rank `n + 1` lattices with `b = 1` alone in their genus, the list in rank
/// `n + 1`.
pub fn candidate_step(prev: &CandidateList, catalog: &[IntLattice], cfg: StepConfig) -> Result<CandidateList> {
    let n = prev.rank;
    if catalog.is_empty() {
        return Err(LatticeError::Precondition(format!("no catalog entries of rank {}", n + 1)));
    }
    if let Some(bad) = catalog.iter().find(|l| l.rank() != n + 1) {
        return Err(LatticeError::Precondition(format!("catalog entry {} has rank {}", bad.name().unwrap_or("?"), bad.rank())));
    }
    let b_n = prev.b_max();
    let mut records = Vec::new();
    for base in catalog {
        let c = c_value(base);
        let d = b_n.max(c);
        for m in 1..=d {
            let l = base.rescale(m)?;
            let mut rec = CandidateRecord::seed(l, base.name().unwrap_or("catalog").to_string());
            rec.multiple = m;
            rec.b = m * base.primitive_scale_divisor();
            rec.c = Some(c);
            rec.d = Some(d);
            records.push(rec);
        }
    }
    let records: Vec<CandidateRecord> = records
        .into_par_iter()
        .enumerate()
        .map(|(i, mut rec)| {
            rec.eliminated = eliminate(&rec.lattice, prev, cfg, i as u64)?;
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut records = records;
    records.sort_by_key(|r| order_key(&r.lattice));
    Ok(CandidateList::from_records(n + 1, records))
}

fn eliminate(l: &IntLattice, prev: &CandidateList, cfg: StepConfig, index: u64) -> Result<Option<Elimination>> {
    if minimum(l)? == 2 {
        return Ok(Some(Elimination::HasRoots));
    }
    let r = l.rank();
    for i in 0..r {
        let rows: Vec<Vec<i64>> = (0..r).filter(|&j| j != i).map(|j| (0..r).map(|t| (t == j) as i64).collect()).collect();
        let basis = IntMatrix::from_rows(&rows)?;
        if let Some(e) = try_sublattice(l, &basis, prev, format!("principal minor without e{}", i + 1))? {
            return Ok(Some(e));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    for t in 0..cfg.trials {
        let v = loop {
            let v: Vec<i64> = (0..r).map(|_| rng.gen_range(-cfg.height..=cfg.height)).collect();
            if gcd_slice(&v) == 1 {
                break v;
            }
        };
        let comp = l.orthogonal_complement(&IntMatrix::from_rows(&[v.clone()])?)?;
        if let Some(e) = try_sublattice(l, &comp.basis, prev, format!("complement of {:?} (trial {})", v, t + 1))? {
            return Ok(Some(e));
        }
    }
    Ok(None)
}

fn try_sublattice(l: &IntLattice, basis: &IntMatrix, prev: &CandidateList, how: String) -> Result<Option<Elimination>> {
    let sub = l.sublattice(basis)?;
    // cheap determinant test first
    let (d, d_sub) = (l.determinant().abs(), sub.determinant().abs());
    if d < 2 * d_sub || (l.rank() >= 9 && d == 2 * d_sub) {
        return Ok(None);
    }
    let outside = !prev.contains_genus_of(&sub)?;
    Ok(match extension_criterion(l, basis, outside)? {
        ExtensionVerdict::PositiveEntropy => Some(Elimination::Extension { sublattice: basis.clone(), sub_det: sub.determinant(), how }),
        ExtensionVerdict::Inconclusive => None,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FilterConfig {
    /// Largest value of `beta = E.F` tried.
    pub beta_max: i64,
    /// Skip `beta` when `beta^rank` residues exceed this.
    pub residue_cap: u64,
    /// Section search bounds as multiples of `|det L|`, and its vector budget.
    pub section_y_factor: i64,
    pub section_vector_cap: u64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig { beta_max: 30, residue_cap: 20_000, section_y_factor: 1, section_vector_cap: 2_000_000 }
    }
}

/// Remove the lattices on which some divisor `beta > 1` of the determinant
/// carries a nef isotropic class with a section.  Already eliminated
/// records are kept as they are.
pub fn fibration_filter(list: &CandidateList, cfg: FilterConfig) -> Result<CandidateList> {
    let mut records = Vec::with_capacity(list.provenance.len());
    for rec in &list.provenance {
        let mut rec = rec.clone();
        if rec.eliminated.is_none() {
            search_second_fibration(&mut rec, cfg)?;
        }
        records.push(rec);
    }
    Ok(CandidateList::from_records(list.rank, records))
}

fn search_second_fibration(rec: &mut CandidateRecord, cfg: FilterConfig) -> Result<()> {
    let ns = NSLattice::new(rec.lattice.clone())?;
    let r = rec.lattice.rank() as u32;
    let d = rec.lattice.determinant().abs();
    let bounds = SectionBounds { y_max: cfg.section_y_factor * d, z_max: 2 * d, vector_cap: cfg.section_vector_cap };
    for beta in divisors(rec.lattice.determinant().unsigned_abs()) {
        let beta = beta as i64;
        if beta < 2 {
            continue;
        }
        if beta > cfg.beta_max || (beta as u64).checked_pow(r).map_or(true, |t| t > cfg.residue_cap) {
            rec.betas_skipped.push(beta);
            continue;
        }
        rec.betas_searched.push(beta);
        for cand in ns.find_fibrations(beta, false)? {
            if !cand.verdict.is_nef() {
                continue;
            }
            let s = ns.find_section(&cand.class, bounds)?;
            if let Some(section) = s.section {
                rec.eliminated = Some(Elimination::Fibration { class: cand.class, status: cand.verdict.status, section });
                return Ok(());
            }
        }
    }
    Ok(())
}

/// A catalog after the load-time recheck of its uniqueness flags.
pub fn checked_catalog(n: usize) -> Result<Vec<IntLattice>> {
    let cat = catalog::embedded(n)?;
    let bad = catalog::spot_check(&cat)?;
    if !bad.is_empty() {
        return Err(LatticeError::Precondition(format!("catalog entries not alone in their genus: {}", bad.join(", "))));
    }
    Ok(cat)
}

/// The filtered candidate lists of ranks `2..=max_rank`.
pub fn run_chain(max_rank: usize, step: StepConfig, filter: FilterConfig) -> Result<Vec<CandidateList>> {
    let mut lists = vec![fibration_filter(&rank2_candidates()?, filter)?];
    for n in 3..=max_rank {
        let prev = lists.last().expect("nonempty");
        let next = candidate_step(prev, &checked_catalog(n)?, step)?;
        lists.push(fibration_filter(&next, filter)?);
    }
    Ok(lists)
}
