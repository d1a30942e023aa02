//! Root-overlattices `R'` with `R'_root = R` and genus-mates of them that
//! are not root-overlattices.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::classify::data::{delta_r, TORSION_GROUPS};
use crate::classify::roots::{admissible_groups, group_name, RootSystem};
use crate::discriminant::{overlattice, DiscriminantForm, IsotropicSubgroup};
use crate::enumeration::{minimum, root_rank, roots};
use crate::error::{LatticeError, Result};
use crate::genus::{genus_explore, same_genus, GenusCaps};
use crate::isometry::induced_discriminant_action;
use crate::lattice::IntLattice;

const NEIGHBOR_PRIMES: [i64; 3] = [2, 3, 5];

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CensusCaps {
    /// Largest discriminant group whose elements are listed.
    pub group_elements: u64,
    pub genus: GenusCaps,
}

impl Default for CensusCaps {
    fn default() -> Self {
        CensusCaps { group_elements: 1 << 16, genus: GenusCaps::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusMember {
    pub lattice: IntLattice,
    /// Generators of the glue subgroup in `A_R` coordinates.
    pub glue: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OverlatticeCensus {
    pub root_system: RootSystem,
    pub root: IntLattice,
    pub group: String,
    pub group_factors: Vec<i64>,
    pub overlattices: Vec<CensusMember>,
    /// Isotropic subgroups of the right type, before orbit reduction.
    pub subgroups: usize,
    pub orbits: usize,
    /// Orbit representatives whose overlattice gains roots.
    pub discarded_norm2: usize,
    /// Orbit representatives dropped as genus duplicates.
    pub discarded_same_genus: usize,
}

/// Isotropic subgroups of `A_R` isomorphic to `group` (invariant factors,
/// at most two), each as its sorted element list plus generators.
pub fn isotropic_subgroups(form: &DiscriminantForm, group: &[i64], cap: u64) -> Result<Vec<(Vec<Vec<i64>>, Vec<Vec<i64>>)>> {
    let elements = form.elements(cap)?;
    let of_order = |n: i64| -> Vec<&Vec<i64>> { elements.iter().filter(|x| form.element_order(x) == n && form.is_isotropic(x)).collect() };
    let mut seen: BTreeMap<Vec<Vec<i64>>, Vec<Vec<i64>>> = BTreeMap::new();
    match *group {
        [] => {
            seen.insert(vec![form.zero()], vec![]);
        }
        [n] => {
            for s in of_order(n) {
                let sub = IsotropicSubgroup::new(form, vec![s.clone()])?;
                seen.entry(sub.elements().to_vec()).or_insert_with(|| vec![s.clone()]);
            }
        }
        [n, m] => {
            let firsts = of_order(n);
            let seconds = of_order(m);
            for s in &firsts {
                for t in &seconds {
                    if form.b_num(s, t) != 0 {
                        continue;
                    }
                    let gens = vec![(*s).clone(), (*t).clone()];
                    let span = crate::discriminant::span(form, &gens);
                    if span.len() as i64 != n * m {
                        continue;
                    }
                    seen.entry(span).or_insert(gens);
                }
            }
        }
        _ => return Err(LatticeError::Precondition(format!("group {} has more than two generators", group_name(group)))),
    }
    Ok(seen.into_iter().collect())
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Orbit representatives (indices) of `subgroups` under the maps `gens`.
fn orbit_representatives(form: &DiscriminantForm, subgroups: &[(Vec<Vec<i64>>, Vec<Vec<i64>>)], gens: &[Vec<Vec<i64>>]) -> Vec<usize> {
    let index: HashMap<&Vec<Vec<i64>>, usize> = subgroups.iter().enumerate().map(|(i, (els, _))| (els, i)).collect();
    let mut parent: Vec<usize> = (0..subgroups.len()).collect();
    for (i, (els, _)) in subgroups.iter().enumerate() {
        for g in gens {
            let mut img: Vec<Vec<i64>> = els.iter().map(|x| form.apply_map(form, g, x)).collect();
            img.sort();
            // an isometry maps isotropic subgroups of a type to the same type
            if let Some(&j) = index.get(&img) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    (0..subgroups.len()).filter(|&i| find(&mut parent, i) == i).collect()
}

fn check_group(r: &RootSystem, group: &[i64]) -> Result<()> {
    if !group.is_empty() && !TORSION_GROUPS.iter().any(|g| *g == group) {
        return Err(LatticeError::Precondition(format!("{} is not a torsion group of an elliptic K3", group_name(group))));
    }
    let k: i64 = group.iter().product();
    if r.determinant() % (k * k) != 0 {
        return Err(LatticeError::Precondition(format!("|S|^2 = {} does not divide det {} = {}", k * k, r, r.determinant())));
    }
    Ok(())
}

/// Root-overlattices `R'` of `R` with `R'/R` isomorphic to `group`, one per genus.
pub fn overlattice_census(r: &RootSystem, group: &[i64], caps: CensusCaps) -> Result<OverlatticeCensus> {
    check_group(r, group)?;
    let root = r.lattice();
    let form = DiscriminantForm::of(&root);
    let subgroups = isotropic_subgroups(&form, group, caps.group_elements)?;
    let gens = induced_discriminant_action(&root, &form, &r.outer_automorphisms())?;
    let reps = orbit_representatives(&form, &subgroups, &gens);
    let root_count = roots(&root)?.len();
    let mut members: Vec<CensusMember> = Vec::new();
    let (mut norm2, mut dup) = (0, 0);
    for &i in &reps {
        let (_, glue) = &subgroups[i];
        let sub = IsotropicSubgroup::new(&form, glue.clone())?;
        let over = overlattice(&root, &form, &sub)?.lattice;
        if roots(&over)?.len() != root_count {
            norm2 += 1;
            continue;
        }
        let mut fresh = true;
        for m in &members {
            if same_genus(&m.lattice, &over)? {
                fresh = false;
                break;
            }
        }
        if fresh {
            let name = if group.is_empty() { r.to_string() } else { format!("{}/{}#{}", r, group_name(group), members.len() + 1) };
            members.push(CensusMember { lattice: over.named(name), glue: glue.clone() });
        } else {
            dup += 1;
        }
    }
    Ok(OverlatticeCensus {
        root_system: r.clone(),
        root,
        group: group_name(group),
        group_factors: group.to_vec(),
        overlattices: members,
        subgroups: subgroups.len(),
        orbits: reps.len(),
        discarded_norm2: norm2,
        discarded_same_genus: dup,
    })
}

/// Non-root-overlattices stored for a member of the list built by [`ade`].
#[derive(Clone, Debug, Serialize)]
pub struct AdeEntry {
    pub root_system: RootSystem,
    pub witnesses: Vec<IntLattice>,
    pub genus_classes: usize,
    pub genus_complete: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum AdeOutcome {
    /// `R = R0 + R1` with `R0` in the list.
    Covered { by: RootSystem, complement: Option<RootSystem> },
    /// No sub-sum (nor `R` itself) showed a non-root-overlattice in its genus.
    Error { tried: Vec<RootSystem> },
}

#[derive(Clone, Debug, Serialize)]
pub struct AdeReport {
    pub list: Vec<AdeEntry>,
    pub outcomes: Vec<(RootSystem, AdeOutcome)>,
}

impl AdeReport {
    /// An entry `R0` with `r = R0 + R1`, and `R1` (None when `R0 = r`).
    pub fn decomposition(&self, r: &RootSystem) -> Option<(&AdeEntry, Option<RootSystem>)> {
        for e in &self.list {
            if e.root_system == *r {
                return Some((e, None));
            }
            if let Some(c) = r.complement_of(&e.root_system) {
                return Some((e, Some(c)));
            }
        }
        None
    }
}

/// Genus explorations of root lattices, shared across one run.
#[derive(Default)]
pub struct RootGenusMemo {
    entries: HashMap<RootSystem, AdeEntry>,
}

impl RootGenusMemo {
    pub fn entry(&mut self, r: &RootSystem, caps: GenusCaps) -> Result<&AdeEntry> {
        if !self.entries.contains_key(r) {
            let ex = genus_explore(&r.lattice(), &NEIGHBOR_PRIMES, caps)?;
            let mut witnesses = Vec::new();
            for c in &ex.classes {
                if root_rank(c)? < c.rank() {
                    witnesses.push(c.clone());
                }
            }
            let e = AdeEntry { root_system: r.clone(), witnesses, genus_classes: ex.classes.len(), genus_complete: ex.complete };
            self.entries.insert(r.clone(), e);
        }
        Ok(&self.entries[r])
    }
}

/// Builds a list of root lattices with a non-root-overlattice in their genus
/// covering every member of `census` as a direct summand.  Sub-sums are tried
/// by increasing rank, then `R` itself.
pub fn ade(census: &[RootSystem], caps: GenusCaps, memo: &mut RootGenusMemo) -> Result<AdeReport> {
    let mut order: Vec<RootSystem> = census.to_vec();
    order.sort_by(|a, b| (a.rank(), a).cmp(&(b.rank(), b)));
    let mut report = AdeReport { list: Vec::new(), outcomes: Vec::new() };
    for r in order {
        if let Some((e, c)) = report.decomposition(&r) {
            let by = e.root_system.clone();
            report.outcomes.push((r, AdeOutcome::Covered { by, complement: c }));
            continue;
        }
        let mut tries = r.proper_subsums();
        tries.push(r.clone());
        let mut found = None;
        let mut tried = Vec::new();
        for sub in tries {
            tried.push(sub.clone());
            let e = memo.entry(&sub, caps)?;
            if !e.witnesses.is_empty() {
                found = Some(e.clone());
                break;
            }
        }
        match found {
            Some(e) => {
                let complement = r.complement_of(&e.root_system).filter(|c| !c.parts().is_empty());
                let by = e.root_system.clone();
                report.list.push(e);
                report.outcomes.push((r, AdeOutcome::Covered { by, complement }));
            }
            None => report.outcomes.push((r, AdeOutcome::Error { tried })),
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Main10Verdict {
    Witness { lattice: IntLattice, minimum: i64, root_rank: usize, how: String },
    /// `U + E8 + E8 + A1`: finite automorphism group, not part of the census.
    Excluded,
    Unknown { genus_complete: bool, reason: String },
}

fn good_witness(l: &IntLattice) -> Result<Option<(i64, usize)>> {
    let rr = root_rank(l)?;
    if rr >= l.rank() {
        return Ok(None);
    }
    let m = minimum(l)?;
    Ok(if m == 2 { Some((m, rr)) } else { None })
}

/// Looks for `N` in the genus of the census member `over` (glue `glue` on
/// `R`) with `min N = 2` that is not a root-overlattice.
pub fn main10_verify(r: &RootSystem, glue: &[Vec<i64>], over: &IntLattice, ade_report: &AdeReport, caps: CensusCaps) -> Result<Main10Verdict> {
    if r.is_exception() {
        return Ok(Main10Verdict::Excluded);
    }
    let form_r = DiscriminantForm::of(&r.lattice());
    if let Some((entry, r1)) = ade_report.decomposition(r) {
        for n0 in &entry.witnesses {
            let n = match &r1 {
                Some(c) => n0.direct_sum(&c.lattice()),
                None => n0.clone(),
            };
            if glue.is_empty() {
                if let Some((m, rr)) = good_witness(&n)? {
                    let how = format!("genus-mate of {} plus {}", entry.root_system, r1.as_ref().map(|c| c.to_string()).unwrap_or_else(|| "nothing".into()));
                    return Ok(Main10Verdict::Witness { lattice: n, minimum: m, root_rank: rr, how });
                }
                continue;
            }
            let form_n = DiscriminantForm::of(&n);
            // transport the glue along an isomorphism A_R -> A_N first
            if let Some(iso) = form_r.isomorphism_to(&form_n, caps.group_elements)? {
                let moved: Vec<Vec<i64>> = glue.iter().map(|g| form_r.apply_map(&form_n, &iso, g)).collect();
                if let Ok(sub) = IsotropicSubgroup::new(&form_n, moved) {
                    let p = overlattice(&n, &form_n, &sub)?.lattice;
                    if same_genus(&p, over)? {
                        if let Some((m, rr)) = good_witness(&p)? {
                            return Ok(Main10Verdict::Witness { lattice: p, minimum: m, root_rank: rr, how: format!("glued overlattice of a genus-mate of {}", r) });
                        }
                    }
                }
            }
            let group: Vec<i64> = {
                let sub = IsotropicSubgroup::new(&form_r, glue.to_vec())?;
                invariant_factors(&form_r, sub.elements())
            };
            for (_, gens) in isotropic_subgroups(&form_n, &group, caps.group_elements)? {
                let sub = IsotropicSubgroup::new(&form_n, gens)?;
                let p = overlattice(&n, &form_n, &sub)?.lattice;
                if same_genus(&p, over)? {
                    if let Some((m, rr)) = good_witness(&p)? {
                        return Ok(Main10Verdict::Witness { lattice: p, minimum: m, root_rank: rr, how: format!("overlattice of a genus-mate of {}", r) });
                    }
                }
            }
        }
    }
    let ex = genus_explore(over, &NEIGHBOR_PRIMES, caps.genus)?;
    let mut fallback = None;
    for c in &ex.classes {
        if let Some((m, rr)) = good_witness(c)? {
            fallback = Some(Main10Verdict::Witness { lattice: c.clone(), minimum: m, root_rank: rr, how: "neighbor search".into() });
            break;
        }
    }
    Ok(fallback.unwrap_or(Main10Verdict::Unknown {
        genus_complete: ex.complete,
        reason: format!("no non-root-overlattice of minimum 2 among {} explored classes", ex.classes.len()),
    }))
}

/// Invariant factors of a subgroup given by its elements.
fn invariant_factors(form: &DiscriminantForm, elements: &[Vec<i64>]) -> Vec<i64> {
    let n = elements.len() as i64;
    let e = elements.iter().map(|x| form.element_order(x)).max().unwrap_or(1);
    if e == n {
        if n == 1 {
            vec![]
        } else {
            vec![n]
        }
    } else {
        vec![n / e, e]
    }
}

/// Verdicts for one member of the census.
#[derive(Clone, Debug, Serialize)]
pub struct SeedRecord {
    pub group: String,
    pub overlattice: IntLattice,
    pub verdict: Main10Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeedReport {
    pub root_system: RootSystem,
    pub determinant: i64,
    pub delta_r: Option<i64>,
    /// Whether `det R >= Delta_r` and C1 hold, i.e. `R` is in the census proper.
    pub in_census: bool,
    pub groups: Vec<String>,
    pub censuses: Vec<OverlatticeCensus>,
    pub ade: AdeReport,
    pub records: Vec<SeedRecord>,
}

/// The whole pipeline on a single root lattice: admissible groups, census
/// for each, the covering list, and a verdict per overlattice.
pub fn run_seed(r: &RootSystem, caps: CensusCaps, memo: &mut RootGenusMemo) -> Result<SeedReport> {
    let delta = delta_r(r.rank());
    let in_census = delta.map(|d| r.determinant() >= d).unwrap_or(false) && crate::classify::roots::c1_euler(r);
    let mut groups: Vec<Vec<i64>> = vec![vec![]];
    groups.extend(admissible_groups(r));
    let ade_report = ade(std::slice::from_ref(r), caps.genus, memo)?;
    let mut censuses = Vec::new();
    let mut records = Vec::new();
    for g in &groups {
        let c = overlattice_census(r, g, caps)?;
        for m in &c.overlattices {
            let verdict = main10_verify(r, &m.glue, &m.lattice, &ade_report, caps)?;
            records.push(SeedRecord { group: group_name(g), overlattice: m.lattice.clone(), verdict });
        }
        censuses.push(c);
    }
    Ok(SeedReport {
        root_system: r.clone(),
        determinant: r.determinant(),
        delta_r: delta,
        in_census,
        groups: groups.iter().map(|g| group_name(g)).collect(),
        censuses,
        ade: ade_report,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a1_four_glue_is_discarded() {
        let r = RootSystem::parse("A1^4").unwrap();
        let c = overlattice_census(&r, &[2], CensusCaps::default()).unwrap();
        assert_eq!(c.subgroups, 1);
        assert_eq!(c.discarded_norm2, 1);
        assert!(c.overlattices.is_empty());
    }

    #[test]
    fn a1_nine_orbits() {
        // isotropic classes have weight 4 or 8, two orbits under S9
        let r = RootSystem::parse("A1^9").unwrap();
        let c = overlattice_census(&r, &[2], CensusCaps::default()).unwrap();
        assert_eq!(c.subgroups, 126 + 9);
        assert_eq!(c.orbits, 2);
    }

    #[test]
    fn rejected_groups() {
        let d4 = RootSystem::parse("D4").unwrap();
        assert!(overlattice_census(&d4, &[3], CensusCaps::default()).is_err());
        assert!(overlattice_census(&d4, &[9], CensusCaps::default()).is_err());
        assert!(overlattice_census(&d4, &[2], CensusCaps::default()).unwrap().overlattices.is_empty());
        let t = overlattice_census(&d4, &[], CensusCaps::default()).unwrap();
        assert_eq!(t.overlattices.len(), 1);
    }
}
