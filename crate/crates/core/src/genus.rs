//! Genus membership, Kneser p-neighbors and exploration of a genus.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::{isqrt, mod_inverse, mod_pos};
use crate::discriminant::{DiscriminantForm, DEFAULT_GROUP_CAP};
use crate::enumeration::{minimum, reduce, root_rank, theta_prefix};
use crate::error::{LatticeError, Result};
use crate::isometry::is_isometric;
use crate::lattice::{hnf_basis, Definiteness, IntLattice};
use crate::matrix::IntMatrix;

pub const NEIGHBOR_PRIMES: [i64; 3] = [2, 3, 5];

/// Same rank, same signature and isomorphic discriminant forms.
pub fn same_genus(l1: &IntLattice, l2: &IntLattice) -> Result<bool> {
    same_genus_with_cap(l1, l2, DEFAULT_GROUP_CAP)
}

pub fn same_genus_with_cap(l1: &IntLattice, l2: &IntLattice, cap: u64) -> Result<bool> {
    if l1.rank() != l2.rank() || l1.definiteness() != l2.definiteness() {
        return Ok(false);
    }
    if l1.determinant_big() != l2.determinant_big() {
        return Ok(false);
    }
    let f1 = DiscriminantForm::of(l1);
    let f2 = DiscriminantForm::of(l2);
    if f1.orders() != f2.orders() {
        return Ok(false);
    }
    Ok(f1.isomorphism_to(&f2, cap)?.is_some())
}

fn lines_mod_p(n: usize, p: i64) -> impl Iterator<Item = Vec<i64>> {
    // projective points of (Z/p)^n, first nonzero coordinate 1, lexicographic
    let total = (p as u64).pow(n as u32);
    (1..total).filter_map(move |mut idx| {
        let mut v = vec![0i64; n];
        for i in (0..n).rev() {
            v[i] = (idx % p as u64) as i64;
            idx /= p as u64;
        }
        let first = v.iter().find(|&&x| x != 0).copied().unwrap();
        (first == 1).then_some(v)
    })
}

/// The neighbor `L_v + Z v/p` of `l` for a vector `v` with `(v, v) = 0 mod 2p^2`,
/// LLL-reduced, together with its basis times `p` in the coordinates of `l`.
fn neighbor_from(l: &IntLattice, v: &[i64], p: i64) -> Result<(IntLattice, IntMatrix)> {
    let g = l.gram();
    let n = l.rank();
    let gv = g.apply(v);
    let j = (0..n).find(|&j| mod_pos(gv[j], p) != 0).ok_or(LatticeError::Degenerate)?;
    let inv = mod_inverse(mod_pos(gv[j], p), p).unwrap();
    let mut rows: Vec<Vec<i64>> = Vec::with_capacity(n + 1);
    for i in 0..n {
        let mut r = vec![0i64; n];
        if i == j {
            r[j] = p * p;
        } else {
            let c = mod_pos(gv[i] * inv, p);
            r[i] = p;
            r[j] = -p * c;
        }
        rows.push(r);
    }
    rows.push(v.to_vec());
    let basis = IntMatrix::from_rows(&hnf_basis(&rows))?;
    if basis.nrows() != n {
        return Err(LatticeError::Degenerate);
    }
    let scaled = g.congruent(&basis);
    let mut gram = IntMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let x = scaled[(a, b)];
            if x % (p * p) != 0 {
                return Err(LatticeError::Precondition("neighbor is not integral".into()));
            }
            gram[(a, b)] = x / (p * p);
        }
    }
    let m = IntLattice::new(gram)?;
    let (red, t) = reduce(&m)?;
    Ok((red, t.mul(&basis)))
}

/// For `p` prime to `det L`, `x -> c x` with `c = 0 mod p`, `c = 1 mod e`
/// sends `L^v` into `M^v` and induces an isometry `A_L -> A_M`.  Returns the
/// generator images once they are checked to preserve orders, q and b.
fn neighbor_form_map(lf: &DiscriminantForm, m: &IntLattice, rows: &IntMatrix, g: &IntMatrix, p: i64) -> Result<Option<(DiscriminantForm, Vec<Vec<i64>>)>> {
    let mf = DiscriminantForm::of(m);
    if mf.orders() != lf.orders() {
        return Ok(None);
    }
    let e = lf.exponent();
    let k = lf.len();
    let pair_rows: Vec<Vec<i64>> = (0..rows.nrows()).map(|j| g.apply(rows.row(j))).collect();
    'c: for c in (1..=2 * e).map(|t| t * p).filter(|c| (c - 1) % e == 0) {
        let mut images = Vec::with_capacity(k);
        for i in 0..k {
            let mut unit = lf.zero();
            unit[i] = 1;
            let (num, den) = lf.lift(&unit)?;
            let mut w = Vec::with_capacity(pair_rows.len());
            for pr in &pair_rows {
                let dot: i128 = pr.iter().zip(&num).map(|(a, b)| *a as i128 * *b as i128).sum::<i128>() * c as i128;
                let q = p as i128 * den as i128;
                if dot % q != 0 {
                    continue 'c;
                }
                w.push((dot / q) as i64);
            }
            images.push(mf.class_of_pairing(&w)?);
        }
        let ok = (0..k).all(|i| {
            lf.orders()[i] % mf.element_order(&images[i]) == 0
                && mf.q_num(&images[i]) == lf.q_values_num()[i]
                && (0..k).all(|j| mf.b_num(&images[i], &images[j]) == lf.b_num_entry(i, j))
        });
        if ok {
            return Ok(Some((mf, images)));
        }
    }
    Ok(None)
}

/// All p-neighbors of a definite lattice, one per isotropic line of `L/pL`,
/// in lexicographic order of the lines.  Requires `p` not to divide `det L`.
pub fn p_neighbors(l: &IntLattice, p: i64) -> Result<Vec<IntLattice>> {
    if !NEIGHBOR_PRIMES.contains(&p) {
        return Err(LatticeError::Precondition(format!("prime {} not in {{2,3,5}}", p)));
    }
    if !l.is_definite() {
        return Err(LatticeError::NotDefinite);
    }
    if l.determinant() % p == 0 {
        return Err(LatticeError::Precondition(format!("{} divides the determinant {}", p, l.determinant())));
    }
    let g = l.gram();
    let n = l.rank();
    let seed_form = DiscriminantForm::of(l);
    let mut out = Vec::new();
    for line in lines_mod_p(n, p) {
        let norm = g.bilinear(&line, &line);
        // isotropic for q = norm/2 modulo p
        if mod_pos(norm / 2, p) != 0 {
            continue;
        }
        let gv = g.apply(&line);
        let j = (0..n).find(|&j| mod_pos(gv[j], p) != 0).ok_or(LatticeError::Degenerate)?;
        // lift so that (v, v) = 0 mod 2p^2
        let t = norm / (2 * p);
        let c = mod_pos(-t * mod_inverse(mod_pos(gv[j], p), p).unwrap(), p);
        let mut v = line.clone();
        v[j] += p * c;
        debug_assert_eq!(mod_pos(g.bilinear(&v, &v), 2 * p * p), 0);
        let (m, rows) = neighbor_from(l, &v, p)?;
        if neighbor_form_map(&seed_form, &m, &rows, g, p)?.is_none() {
            let mf = DiscriminantForm::of(&m);
            if mf.orders() != seed_form.orders() || seed_form.isomorphism_to(&mf, DEFAULT_GROUP_CAP)?.is_none() {
                return Err(LatticeError::Precondition("neighbor left the genus".into()));
            }
        }
        out.push(m);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct GenusCaps {
    pub classes: usize,
    pub steps: usize,
}

impl Default for GenusCaps {
    fn default() -> Self {
        GenusCaps { classes: 64, steps: 4096 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenusExploration {
    pub seed: IntLattice,
    pub primes_used: Vec<i64>,
    pub classes: Vec<IntLattice>,
    pub complete: bool,
    pub steps: usize,
    /// How completeness was established.
    pub method: String,
}

/// Cheap isometry invariant used to bucket classes before a full test.
fn class_key(l: &IntLattice) -> Result<Vec<u64>> {
    theta_prefix(l, 6)
}

struct ClassSet {
    classes: Vec<IntLattice>,
    keys: Vec<Vec<u64>>,
}

impl ClassSet {
    fn insert(&mut self, l: IntLattice) -> Result<bool> {
        let key = class_key(&l)?;
        for (c, k) in self.classes.iter().zip(&self.keys) {
            if *k == key && is_isometric(c, &l)?.is_some() {
                return Ok(false);
            }
        }
        self.classes.push(l);
        self.keys.push(key);
        Ok(true)
    }
}

/// Representatives of the genus of `l`.  Rank 1 and 2 are enumerated
/// directly; from rank 3 on the closure under p-neighbors is taken for the
/// primes of `primes` that do not divide the determinant.
pub fn genus_explore(l: &IntLattice, primes: &[i64], caps: GenusCaps) -> Result<GenusExploration> {
    if !l.is_definite() {
        return Err(LatticeError::NotDefinite);
    }
    let seed = reduce(l)?.0;
    match l.rank() {
        1 => Ok(GenusExploration {
            seed: l.clone(),
            primes_used: Vec::new(),
            classes: vec![seed],
            complete: true,
            steps: 0,
            method: "rank one".into(),
        }),
        2 => explore_binary(l, &seed),
        _ => explore_neighbors(l, &seed, primes, caps),
    }
}

fn explore_binary(l: &IntLattice, seed: &IntLattice) -> Result<GenusExploration> {
    let d = l.determinant();
    let sign = if l.definiteness() == Definiteness::NegativeDefinite { -1 } else { 1 };
    let mut set = ClassSet { classes: Vec::new(), keys: Vec::new() };
    set.insert(seed.clone())?;
    // reduced forms 2a x^2 + 2b xy + 2c y^2 with |2b| <= 2a <= 2c  (Gram [[2a, b'],[b', 2c]], b' = 2b or odd)
    let amax = isqrt((d as u64) / 3 + 1) as i64 + 1;
    for a in 1..=amax {
        for b in 0..=2 * a {
            let num = d + b * b;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a {
                continue;
            }
            let cand = IntLattice::from_rows(&[[2 * a * sign, b * sign], [b * sign, 2 * c * sign]])?;
            if same_genus(&cand, seed)? {
                set.insert(reduce(&cand)?.0)?;
            }
        }
    }
    Ok(GenusExploration {
        seed: l.clone(),
        primes_used: Vec::new(),
        classes: set.classes,
        complete: true,
        steps: 0,
        method: "reduced binary forms".into(),
    })
}

/// Ranks up to this walk every usable prime; above it only the first,
/// since 5-neighbors in rank 9 already number in the hundreds of thousands.
const ALL_PRIMES_MAX_RANK: usize = 5;

fn explore_neighbors(l: &IntLattice, seed: &IntLattice, primes: &[i64], caps: GenusCaps) -> Result<GenusExploration> {
    let det = l.determinant();
    let mut usable: Vec<i64> = primes.iter().copied().filter(|&p| NEIGHBOR_PRIMES.contains(&p) && det % p != 0).collect();
    if l.rank() > ALL_PRIMES_MAX_RANK {
        usable.truncate(1);
    }
    let mut set = ClassSet { classes: Vec::new(), keys: Vec::new() };
    set.insert(seed.clone())?;
    if usable.is_empty() {
        warn!("unsupported seed: every prime in {:?} divides det {}", primes, det);
        return Ok(GenusExploration {
            seed: l.clone(),
            primes_used: Vec::new(),
            classes: set.classes,
            complete: false,
            steps: 0,
            method: "unsupported seed: no usable prime".into(),
        });
    }
    let mut next = 0;
    let mut steps = 0;
    let mut complete = true;
    'outer: while next < set.classes.len() {
        let current = set.classes[next].clone();
        next += 1;
        for &p in &usable {
            if steps >= caps.steps {
                complete = false;
                break 'outer;
            }
            steps += 1;
            for m in p_neighbors(&current, p)? {
                if set.insert(m)? {
                    debug!("genus of det {}: {} classes", det, set.classes.len());
                    if set.classes.len() > caps.classes {
                        complete = false;
                        break 'outer;
                    }
                }
            }
        }
    }
    if set.classes.len() > caps.classes {
        set.classes.truncate(caps.classes);
        set.keys.truncate(caps.classes);
    }
    let names: Vec<String> = usable.iter().map(|p| p.to_string()).collect();
    Ok(GenusExploration {
        seed: l.clone(),
        primes_used: usable,
        classes: set.classes,
        complete,
        steps,
        method: format!("closure under {}-neighbors", names.join(",")),
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum NonRootWitness {
    Witness { lattice: IntLattice, minimum: i64, root_rank: usize },
    NoneInExplored { complete: bool },
    Unknown,
}

/// A lattice in the genus that is not a root-overlattice, preferring one of minimum 2.
pub fn genus_non_root_overlattice_witness(l: &IntLattice, caps: GenusCaps) -> Result<(NonRootWitness, GenusExploration)> {
    let ex = genus_explore(l, &NEIGHBOR_PRIMES, caps)?;
    let mut best: Option<(IntLattice, i64, usize)> = None;
    for c in &ex.classes {
        let rr = root_rank(c)?;
        if rr < c.rank() {
            let m = minimum(c)?;
            let better = match &best {
                None => true,
                Some((_, bm, _)) => *bm != 2 && m == 2,
            };
            if better {
                best = Some((c.clone(), m, rr));
            }
        }
    }
    let verdict = match best {
        Some((lattice, minimum, root_rank)) => NonRootWitness::Witness { lattice, minimum, root_rank },
        None if ex.complete => NonRootWitness::NoneInExplored { complete: true },
        None => NonRootWitness::Unknown,
    };
    Ok((verdict, ex))
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Uniqueness {
    True,
    False { witness: IntLattice },
    Unknown,
}

pub fn unique_in_genus(l: &IntLattice, caps: GenusCaps) -> Result<(Uniqueness, GenusExploration)> {
    let ex = genus_explore(l, &NEIGHBOR_PRIMES, caps)?;
    let verdict = if ex.classes.len() > 1 {
        let seed_red = reduce(l)?.0;
        let other = ex
            .classes
            .iter()
            .find(|c| is_isometric(c, &seed_red).map(|w| w.is_none()).unwrap_or(false))
            .cloned()
            .unwrap_or_else(|| ex.classes[1].clone());
        Uniqueness::False { witness: other }
    } else if ex.complete {
        Uniqueness::True
    } else {
        Uniqueness::Unknown
    };
    Ok((verdict, ex))
}

/// Directory of explorations keyed by genus invariants.
pub struct GenusCache {
    dir: PathBuf,
    pub hits: u64,
    pub misses: u64,
}

impl GenusCache {
    pub fn new(dir: impl AsRef<Path>) -> Self {
        GenusCache { dir: dir.as_ref().to_path_buf(), hits: 0, misses: 0 }
    }

    pub fn from_env() -> Self {
        let dir = std::env::var("K3E_CACHE").unwrap_or_else(|_| "k3e-cache".into());
        Self::new(dir)
    }

    pub fn key(l: &IntLattice) -> Result<String> {
        let f = DiscriminantForm::of(l);
        let hist: BTreeMap<String, u64> = f
            .value_histogram(DEFAULT_GROUP_CAP)
            .unwrap_or_default()
            .into_iter()
            .map(|((o, q), c)| (format!("{}:{}", o, q), c))
            .collect();
        let payload = serde_json::json!({
            "rank": l.rank(),
            "det": l.determinant(),
            "definiteness": l.definiteness(),
            "orders": f.orders(),
            "values": hist,
        });
        let digest = Sha256::digest(payload.to_string().as_bytes());
        Ok(digest.iter().map(|b| format!("{:02x}", b)).collect())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{}.json", key))
    }

    /// Cached exploration of the genus of `l`, revalidated with `same_genus`.
    pub fn get(&mut self, l: &IntLattice) -> Result<Option<GenusExploration>> {
        let path = self.path(&Self::key(l)?);
        let Ok(text) = fs::read_to_string(&path) else {
            self.misses += 1;
            return Ok(None);
        };
        let Ok(ex) = serde_json::from_str::<GenusExploration>(&text) else {
            warn!("ignoring unreadable cache entry {}", path.display());
            self.misses += 1;
            return Ok(None);
        };
        if !same_genus(&ex.seed, l)? {
            self.misses += 1;
            return Ok(None);
        }
        self.hits += 1;
        Ok(Some(ex))
    }

    /// Writes atomically (temporary file then rename); identical concurrent writes are harmless.
    pub fn put(&self, ex: &GenusExploration) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| LatticeError::Io(e.to_string()))?;
        let key = Self::key(&ex.seed)?;
        let tmp = self.dir.join(format!(".{}.{}.tmp", key, std::process::id()));
        let text = serde_json::to_string_pretty(ex).map_err(|e| LatticeError::Io(e.to_string()))?;
        fs::write(&tmp, text).map_err(|e| LatticeError::Io(e.to_string()))?;
        fs::rename(&tmp, self.path(&key)).map_err(|e| LatticeError::Io(e.to_string()))?;
        Ok(())
    }

    pub fn explore(&mut self, l: &IntLattice, primes: &[i64], caps: GenusCaps) -> Result<GenusExploration> {
        if let Some(ex) = self.get(l)? {
            if ex.complete {
                return Ok(ex);
            }
        }
        let ex = genus_explore(l, primes, caps)?;
        self.put(&ex)?;
        Ok(ex)
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{parse_builtin, rank_one};

    #[test]
    fn genus_comparisons() {
        let a = parse_builtin("A1^9").unwrap();
        let b = parse_builtin("A1+E8(2)").unwrap();
        assert!(same_genus(&a, &b).unwrap());
        let c = IntLattice::from_rows(&[[-2, 0], [0, -8]]).unwrap();
        let d = IntLattice::from_rows(&[[-4, 0], [0, -4]]).unwrap();
        assert!(!same_genus(&c, &d).unwrap());
        assert!(same_genus(&c, &c).unwrap());
    }

    #[test]
    fn neighbors_require_coprime_prime() {
        let a = parse_builtin("A1^8").unwrap();
        assert!(p_neighbors(&a, 2).is_err());
        assert!(p_neighbors(&a, 7).is_err());
    }

    #[test]
    fn e8_neighbors_are_e8() {
        let e8 = parse_builtin("E8").unwrap();
        let ns = p_neighbors(&e8, 2).unwrap();
        assert_eq!(ns.len(), 135);
        for n in ns.iter().take(10) {
            assert!(is_isometric(n, &e8).unwrap().is_some());
        }
    }

    #[test]
    fn small_genera() {
        let ex = genus_explore(&rank_one(-12).unwrap(), &NEIGHBOR_PRIMES, GenusCaps::default()).unwrap();
        assert!(ex.complete && ex.classes.len() == 1);
        let d = IntLattice::from_rows(&[[-4, 0], [0, -4]]).unwrap();
        let (u, _) = unique_in_genus(&d, GenusCaps::default()).unwrap();
        assert!(matches!(u, Uniqueness::True));
    }
}
