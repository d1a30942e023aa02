//! Isometry testing and automorphism groups of definite lattices by
//! backtracking over short vectors, and the induced action on the
//! discriminant form.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::Serialize;

use crate::discriminant::{DiscriminantForm, DEFAULT_GROUP_CAP};
use crate::enumeration::{enumerate_positive, lll_gram, positive_gram, theta_prefix};
use crate::error::{LatticeError, Result};
use crate::lattice::IntLattice;
use crate::matrix::IntMatrix;

pub const DEFAULT_NODE_CAP: u64 = 10_000_000;

/// `matrix^T * gram1 * matrix == gram2`; column `j` is the image of the
/// `j`-th basis vector of the second lattice, written in the first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsometryWitness {
    pub matrix: IntMatrix,
}

impl IsometryWitness {
    pub fn verify(&self, l1: &IntLattice, l2: &IntLattice) -> bool {
        let m = &self.matrix;
        m.transpose().mul(l1.gram()).mul(m) == *l2.gram() && m.determinant_big().magnitude() == &1u32.into()
    }
}

/// A pool of lattice vectors (in reduced coordinates) with their `G v`.
struct Pool {
    vectors: Vec<Vec<i64>>,
    gv: Vec<Vec<i64>>,
    norms: Vec<i64>,
}

impl Pool {
    fn new(gram: &IntMatrix, bound: i64) -> Pool {
        let mut vectors = Vec::new();
        enumerate_positive(gram, bound, &mut |x, _| {
            vectors.push(x.to_vec());
            vectors.push(x.iter().map(|v| -v).collect());
            true
        });
        vectors.sort_by_key(|v| (gram.bilinear(v, v), v.clone()));
        let gv = vectors.iter().map(|v| gram.apply(v)).collect();
        let norms = vectors.iter().map(|v| gram.bilinear(v, v)).collect();
        Pool { vectors, gv, norms }
    }

    fn pair(&self, a: usize, b: usize) -> i64 {
        self.vectors[a].iter().zip(&self.gv[b]).map(|(x, y)| x * y).sum()
    }
}

struct Search<'a> {
    pool: &'a Pool,
    target: &'a IntMatrix,
    nodes: u64,
    cap: u64,
    capped: bool,
}

impl<'a> Search<'a> {
    /// Extends `chosen` (pool indices) to full solutions of `X G X^T = target`.
    /// `visit` returns false to stop.  Returns false if stopped or capped.
    fn run(&mut self, prefix: &[usize], visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        let n = self.target.nrows();
        for (i, &a) in prefix.iter().enumerate() {
            for (j, &b) in prefix.iter().enumerate() {
                if self.pool.pair(a, b) != self.target[(i, j)] {
                    return true;
                }
            }
        }
        let mut domains: Vec<Vec<usize>> = Vec::with_capacity(n);
        for j in 0..n {
            if j < prefix.len() {
                domains.push(vec![prefix[j]]);
                continue;
            }
            let d: Vec<usize> = (0..self.pool.vectors.len())
                .filter(|&c| {
                    self.pool.norms[c] == self.target[(j, j)]
                        && prefix.iter().enumerate().all(|(i, &a)| self.pool.pair(a, c) == self.target[(i, j)])
                })
                .collect();
            if d.is_empty() {
                return true;
            }
            domains.push(d);
        }
        let mut chosen = prefix.to_vec();
        self.rec(&mut chosen, &domains, visit)
    }

    fn rec(&mut self, chosen: &mut Vec<usize>, domains: &[Vec<usize>], visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        let n = self.target.nrows();
        let i = chosen.len();
        if i == n {
            return visit(chosen);
        }
        for &c in &domains[i] {
            self.nodes += 1;
            if self.nodes > self.cap {
                self.capped = true;
                return false;
            }
            // forward checking on the remaining positions
            let mut next: Vec<Vec<usize>> = Vec::with_capacity(n);
            let mut dead = false;
            for (j, dom) in domains.iter().enumerate() {
                if j <= i {
                    next.push(Vec::new());
                    continue;
                }
                let f: Vec<usize> = dom.iter().copied().filter(|&d| d != c && self.pool.pair(c, d) == self.target[(i, j)]).collect();
                if f.is_empty() {
                    dead = true;
                    break;
                }
                next.push(f);
            }
            if dead {
                continue;
            }
            chosen.push(c);
            let cont = self.rec(chosen, &next, visit);
            chosen.pop();
            if !cont {
                return false;
            }
        }
        true
    }
}

fn to_rows(pool: &Pool, idx: &[usize]) -> IntMatrix {
    let rows: Vec<Vec<i64>> = idx.iter().map(|&i| pool.vectors[i].clone()).collect();
    IntMatrix::from_rows(&rows).expect("square")
}

/// Isometry test with the default node cap.
pub fn is_isometric(l1: &IntLattice, l2: &IntLattice) -> Result<Option<IsometryWitness>> {
    is_isometric_with_cap(l1, l2, DEFAULT_NODE_CAP)
}

pub fn is_isometric_with_cap(l1: &IntLattice, l2: &IntLattice, cap: u64) -> Result<Option<IsometryWitness>> {
    let (g1, s1) = positive_gram(l1)?;
    let (g2, s2) = positive_gram(l2)?;
    if l1.rank() != l2.rank() || s1 != s2 || l1.determinant_big() != l2.determinant_big() {
        return Ok(None);
    }
    let r1 = lll_gram(&g1);
    let r2 = lll_gram(&g2);
    let n = l1.rank();
    let bound = (0..n).map(|i| r2.gram[(i, i)]).max().unwrap();
    if theta_prefix(l1, bound)? != theta_prefix(l2, bound)? {
        return Ok(None);
    }
    let pool = Pool::new(&r1.gram, bound);
    let mut search = Search { pool: &pool, target: &r2.gram, nodes: 0, cap, capped: false };
    let mut found = None;
    search.run(&[], &mut |sol| {
        found = Some(sol.to_vec());
        false
    });
    if search.capped && found.is_none() {
        return Err(LatticeError::CapExceeded(format!("isometry search exceeded {} nodes", cap)));
    }
    Ok(found.map(|sol| {
        let x = to_rows(&pool, &sol);
        let h2inv = r2.transform.inverse_unimodular().expect("unimodular");
        let n_rows = h2inv.mul(&x).mul(&r1.transform);
        IsometryWitness { matrix: n_rows.transpose() }
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct AutomorphismGroup {
    /// Generators as witnesses `M^T G M = G`.
    pub generators: Vec<IsometryWitness>,
    /// Group order from the stabilizer chain (exact when complete).
    pub order: u128,
    pub complete: bool,
}

/// Generators of `O(L)` via a stabilizer chain along a reduced basis.
pub fn automorphism_group(l: &IntLattice, cap: u64) -> Result<AutomorphismGroup> {
    let (g, _) = positive_gram(l)?;
    let red = lll_gram(&g);
    let n = l.rank();
    let bound = (0..n).map(|i| red.gram[(i, i)]).max().unwrap();
    let pool = Pool::new(&red.gram, bound);
    let index_of = |v: &[i64]| pool.vectors.iter().position(|w| w.as_slice() == v);
    let basis_idx: Vec<usize> = (0..n)
        .map(|i| {
            let e: Vec<i64> = (0..n).map(|j| (i == j) as i64).collect();
            index_of(&e).expect("basis vector in pool")
        })
        .collect();

    let mut gens: Vec<IntMatrix> = Vec::new();
    let mut order: u128 = 1;
    let mut complete = true;
    let mut search = Search { pool: &pool, target: &red.gram, nodes: 0, cap, capped: false };
    for level in (0..n).rev() {
        let prefix: Vec<usize> = basis_idx[..level].to_vec();
        // candidates for the image of e_level with e_0..e_{level-1} fixed
        let cands: Vec<usize> = (0..pool.vectors.len())
            .filter(|&c| {
                pool.norms[c] == red.gram[(level, level)]
                    && prefix.iter().enumerate().all(|(i, &a)| pool.pair(a, c) == red.gram[(i, level)])
            })
            .collect();
        let mut orbit: HashSet<Vec<i64>> = orbit_of(&pool.vectors[basis_idx[level]], &gens);
        for &c in &cands {
            if orbit.contains(&pool.vectors[c]) {
                continue;
            }
            let mut p = prefix.clone();
            p.push(c);
            let mut found = None;
            search.run(&p, &mut |sol| {
                found = Some(sol.to_vec());
                false
            });
            if search.capped {
                complete = false;
                break;
            }
            if let Some(sol) = found {
                gens.push(to_rows(&pool, &sol));
                orbit = orbit_of(&pool.vectors[basis_idx[level]], &gens);
            }
        }
        order *= orbit.len() as u128;
        if !complete {
            break;
        }
    }
    let hinv = red.transform.inverse_unimodular().expect("unimodular");
    let generators = gens
        .iter()
        .map(|nred| IsometryWitness { matrix: hinv.mul(nred).mul(&red.transform).transpose() })
        .collect();
    Ok(AutomorphismGroup { generators, order, complete })
}

fn orbit_of(v: &[i64], gens: &[IntMatrix]) -> HashSet<Vec<i64>> {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(v.to_vec());
    queue.push_back(v.to_vec());
    while let Some(x) = queue.pop_front() {
        for g in gens {
            // row vector times matrix
            let y: Vec<i64> = (0..g.ncols()).map(|j| (0..g.nrows()).map(|i| x[i] * g[(i, j)]).sum()).collect();
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen
}

/// A map on `A_L` given by the images of its generators.
pub type FormMap = Vec<Vec<i64>>;

/// Action of each automorphism on the discriminant group.
pub fn induced_discriminant_action(l: &IntLattice, form: &DiscriminantForm, gens: &[IsometryWitness]) -> Result<Vec<FormMap>> {
    let g = l.gram();
    let mut out = Vec::new();
    for w in gens {
        let nrows = w.matrix.transpose();
        let mut images = Vec::new();
        for i in 0..form.len() {
            let mut e = form.zero();
            e[i] = 1;
            let (num, den) = form.lift(&e)?;
            // image of the dual vector num/den under v -> v N
            let moved: Vec<i64> = (0..nrows.ncols()).map(|j| (0..nrows.nrows()).map(|k| num[k] * nrows[(k, j)]).sum()).collect();
            let gw = g.apply(&moved);
            if gw.iter().any(|x| x % den != 0) {
                return Err(LatticeError::Precondition("automorphism does not preserve the dual lattice".into()));
            }
            let w: Vec<i64> = gw.iter().map(|x| x / den).collect();
            images.push(form.class_of_pairing(&w)?);
        }
        out.push(images);
    }
    Ok(out)
}

fn compose(form: &DiscriminantForm, f: &FormMap, g: &FormMap) -> FormMap {
    // (f after g) on generators
    g.iter().map(|img| form.apply_map(form, f, img)).collect()
}

/// Closure of a set of maps under composition.
pub fn generated_subgroup(form: &DiscriminantForm, gens: &[FormMap], cap: u64) -> Result<BTreeSet<FormMap>> {
    let identity: FormMap = (0..form.len())
        .map(|i| {
            let mut e = form.zero();
            e[i] = 1;
            e
        })
        .collect();
    let mut seen = BTreeSet::new();
    seen.insert(identity.clone());
    let mut queue = VecDeque::from([identity]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = compose(form, g, &x);
            if seen.insert(y.clone()) {
                if seen.len() as u64 > cap {
                    return Err(LatticeError::CapExceeded("subgroup of O(A_L) too large".into()));
                }
                queue.push_back(y);
            }
        }
    }
    Ok(seen)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Surjectivity {
    True,
    False,
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurjectivityReport {
    pub verdict: Surjectivity,
    pub image_order: usize,
    pub discriminant_group_order: usize,
    pub automorphism_search_complete: bool,
}

/// Whether `O(L) -> O(A_L)` is onto.
pub fn restriction_surjective(l: &IntLattice, node_cap: u64) -> Result<SurjectivityReport> {
    let form = DiscriminantForm::of(l);
    let full = form.automorphisms(DEFAULT_GROUP_CAP)?;
    let aut = automorphism_group(l, node_cap)?;
    let maps = induced_discriminant_action(l, &form, &aut.generators)?;
    let full_set: BTreeSet<FormMap> = full.into_iter().collect();
    for m in &maps {
        assert!(full_set.contains(m), "induced map does not preserve the discriminant form");
    }
    let image = generated_subgroup(&form, &maps, DEFAULT_GROUP_CAP)?;
    let verdict = if image.len() == full_set.len() {
        Surjectivity::True
    } else if aut.complete {
        Surjectivity::False
    } else {
        Surjectivity::Unknown
    };
    Ok(SurjectivityReport {
        verdict,
        image_order: image.len(),
        discriminant_group_order: full_set.len(),
        automorphism_search_complete: aut.complete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{parse_builtin, rank_one, root_lattice_a, root_lattice_d};

    #[test]
    fn permuted_diagonal() {
        let a = IntLattice::from_rows(&[[-4, 0], [0, -4]]).unwrap();
        let b = IntLattice::from_rows(&[[-4, 0], [0, -4]]).unwrap();
        let w = is_isometric(&a, &b).unwrap().unwrap();
        assert!(w.verify(&a, &b));
        let c = IntLattice::from_rows(&[[-2, 0], [0, -8]]).unwrap();
        assert!(is_isometric(&a, &c).unwrap().is_none());
    }

    #[test]
    fn nontrivial_change_of_basis() {
        let a = root_lattice_a(2);
        let b = IntLattice::from_rows(&[[-2, -1], [-1, -2]]).unwrap();
        let w = is_isometric(&a, &b).unwrap().unwrap();
        assert!(w.verify(&a, &b));
    }

    #[test]
    fn small_automorphism_groups() {
        assert_eq!(automorphism_group(&parse_builtin("A1").unwrap(), DEFAULT_NODE_CAP).unwrap().order, 2);
        assert_eq!(automorphism_group(&parse_builtin("A1^2").unwrap(), DEFAULT_NODE_CAP).unwrap().order, 8);
        assert_eq!(automorphism_group(&root_lattice_a(2), DEFAULT_NODE_CAP).unwrap().order, 12);
        assert_eq!(automorphism_group(&root_lattice_d(4), DEFAULT_NODE_CAP).unwrap().order, 1152);
        assert_eq!(automorphism_group(&parse_builtin("E8").unwrap(), DEFAULT_NODE_CAP).unwrap().order, 696_729_600);
    }

    #[test]
    fn cyclic_surjectivity() {
        let r = restriction_surjective(&rank_one(-12).unwrap(), DEFAULT_NODE_CAP).unwrap();
        assert_eq!(r.discriminant_group_order, 4);
        assert_eq!(r.image_order, 2);
        assert_eq!(r.verdict, Surjectivity::False);
        let e8 = restriction_surjective(&parse_builtin("E8").unwrap(), DEFAULT_NODE_CAP).unwrap();
        assert_eq!(e8.verdict, Surjectivity::True);
    }
}
