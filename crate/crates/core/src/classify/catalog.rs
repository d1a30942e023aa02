//! Catalogs of definite lattices that are alone in their genus.
//!
//! A catalog file is a JSON array of `{"name", "gram"}` objects.  The
//! embedded catalogs are generated here: all even negative definite forms of
//! a given rank up to a determinant bound, kept when `b(L) = 1` and the
//! genus closes with a single class.

use std::collections::BTreeMap;

use log::info;
use rayon::prelude::*;

use crate::enumeration::theta_prefix;
use crate::error::{LatticeError, Result};
use crate::genus::{unique_in_genus, GenusCaps, Uniqueness};
use crate::isometry::is_isometric;
use crate::lattice::IntLattice;
use crate::matrix::IntMatrix;

/// Upper bound for `a_11 ... a_nn / det` on Minkowski-reduced forms.
fn minkowski_constant(n: usize) -> i64 {
    match n {
        1 => 1,
        2 => 2,
        3 => 2,
        4 => 4,
        5 => 8,
        6 => 64,
        _ => 1 << (n * n / 4 + 2),
    }
}

fn det_i128(m: &[Vec<i128>]) -> i128 {
    // Bareiss
    let n = m.len();
    let mut a = m.to_vec();
    let mut prev = 1i128;
    let mut sign = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[i][k] != 0) else { return 0 };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Positive definite even Gram matrices of rank `n` with determinant at
/// most `max_det` satisfying the Minkowski conditions for coefficient
/// vectors in `{-1,0,1}`: nondecreasing diagonal, `|2 a_ij| <= a_ii` and so
/// on, with the first nonzero entry above the diagonal in each column
/// nonnegative.  Every isometry class occurs at least once.
pub fn reduced_forms(n: usize, max_det: i64) -> Vec<Vec<Vec<i64>>> {
    let bound = minkowski_constant(n) as i128 * max_det as i128;
    let mut out = Vec::new();
    let mut g = vec![vec![0i128; n]; n];
    fn rec(k: usize, n: usize, g: &mut Vec<Vec<i128>>, prod: i128, bound: i128, max_det: i128, out: &mut Vec<Vec<Vec<i64>>>) {
        if k == n {
            let d = det_i128(g);
            if d > 0 && d <= max_det {
                out.push(g.iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect());
            }
            return;
        }
        let lo = if k == 0 { 2 } else { g[k - 1][k - 1] };
        let mut a = lo;
        loop {
            // later diagonal entries are at least a
            let mut p = prod;
            for _ in k..n {
                p *= a;
            }
            if p > bound {
                break;
            }
            g[k][k] = a;
            offdiag(0, k, n, g, prod * a, bound, max_det, out);
            a += 2;
        }
    }
    #[allow(clippy::too_many_arguments)]
    fn offdiag(j: usize, k: usize, n: usize, g: &mut Vec<Vec<i128>>, prod: i128, bound: i128, max_det: i128, out: &mut Vec<Vec<Vec<i64>>>) {
        if j == k {
            if !minkowski_ok(g, k) {
                return;
            }
            let sub: Vec<Vec<i128>> = (0..=k).map(|r| g[r][..=k].to_vec()).collect();
            if det_i128(&sub) > 0 {
                rec(k + 1, n, g, prod, bound, max_det, out);
            }
            return;
        }
        let r = g[j][j] / 2;
        let leading_zero = (0..j).all(|i| g[i][k] == 0);
        let start = if leading_zero { 0 } else { -r };
        for v in start..=r {
            g[j][k] = v;
            g[k][j] = v;
            offdiag(j + 1, k, n, g, prod, bound, max_det, out);
        }
        g[j][k] = 0;
        g[k][j] = 0;
    }
    rec(0, n, &mut g, 1, bound, max_det as i128, &mut out);
    out
}

/// `|b_k| <= |b_k + sum e_j b_j|` for all `e` in `{-1,0,1}^k`.
fn minkowski_ok(g: &[Vec<i128>], k: usize) -> bool {
    let mut e = vec![-1i128; k];
    if k == 0 {
        return true;
    }
    loop {
        let mut q = 0i128;
        for i in 0..k {
            if e[i] == 0 {
                continue;
            }
            q += 2 * e[i] * g[i][k];
            for j in 0..k {
                q += e[i] * e[j] * g[i][j];
            }
        }
        if q < 0 {
            return false;
        }
        let mut i = 0;
        loop {
            if i == k {
                return true;
            }
            e[i] += 1;
            if e[i] <= 1 {
                break;
            }
            e[i] = -1;
            i += 1;
        }
    }
}

/// Isometry classes among the reduced forms, negated to negative definite.
pub fn isometry_classes(n: usize, max_det: i64) -> Result<Vec<IntLattice>> {
    let forms = reduced_forms(n, max_det);
    info!("rank {} det <= {}: {} reduced forms", n, max_det, forms.len());
    let lattices: Vec<IntLattice> = forms
        .par_iter()
        .map(|g| IntLattice::new(IntMatrix::from_rows(g)?.scaled(-1)))
        .collect::<Result<Vec<_>>>()?;
    let keyed: Vec<(i64, Vec<u64>)> = lattices.par_iter().map(|l| Ok((l.determinant(), theta_prefix(l, 8)?))).collect::<Result<Vec<_>>>()?;
    let mut buckets: BTreeMap<(i64, Vec<u64>), Vec<usize>> = BTreeMap::new();
    for (i, k) in keyed.into_iter().enumerate() {
        buckets.entry(k).or_default().push(i);
    }
    let groups: Vec<Vec<usize>> = buckets.into_values().collect();
    let per: Vec<Vec<IntLattice>> = groups
        .par_iter()
        .map(|idx| {
            let mut reps: Vec<IntLattice> = Vec::new();
            for &i in idx {
                let l = &lattices[i];
                let mut seen = false;
                for r in &reps {
                    if is_isometric(r, l)?.is_some() {
                        seen = true;
                        break;
                    }
                }
                if !seen {
                    reps.push(l.clone());
                }
            }
            Ok(reps)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut all: Vec<IntLattice> = per.into_iter().flatten().collect();
    all.sort_by(|a, b| (a.determinant().abs(), a.gram().to_rows()).cmp(&(b.determinant().abs(), b.gram().to_rows())));
    Ok(all)
}

/// Even negative definite lattices of rank `n`, `|det| <= max_det`,
/// `b(L) = 1`, unique in their genus (closed exploration).
pub fn generate(n: usize, max_det: i64) -> Result<Vec<IntLattice>> {
    let classes = isometry_classes(n, max_det)?;
    let primitive: Vec<IntLattice> = classes.into_iter().filter(|l| l.primitive_scale_divisor() == 1).collect();
    info!("{} primitive classes", primitive.len());
    let keep: Vec<Option<IntLattice>> = primitive
        .par_iter()
        .map(|l| {
            let (u, _) = unique_in_genus(l, GenusCaps::default())?;
            Ok(matches!(u, Uniqueness::True).then(|| l.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(keep
        .into_iter()
        .flatten()
        .enumerate()
        .map(|(i, l)| {
            let d = l.determinant().abs();
            l.named(format!("r{}d{}#{}", n, d, i + 1))
        })
        .collect())
}

/// Determinant bounds of the embedded catalogs, by rank.
pub const EMBEDDED_BOUNDS: [(usize, i64); 3] = [(3, 400), (4, 150), (5, 170)];

const RANK3: &str = include_str!("../../data/catalog_rank3.json");
const RANK4: &str = include_str!("../../data/catalog_rank4.json");
const RANK5: &str = include_str!("../../data/catalog_rank5.json");

/// The embedded catalog of rank `n`, produced by `generate(n, bound)`.
pub fn embedded(n: usize) -> Result<Vec<IntLattice>> {
    match n {
        3 => parse(RANK3),
        4 => parse(RANK4),
        5 => parse(RANK5),
        _ => Err(LatticeError::Precondition(format!("no embedded catalog of rank {}", n))),
    }
}

pub fn parse(text: &str) -> Result<Vec<IntLattice>> {
    serde_json::from_str(text).map_err(|e| LatticeError::Parse(e.to_string()))
}

/// Entries of rank <= 6 and `|det| <= 200` are rechecked with a genus exploration.
pub fn spot_check(entries: &[IntLattice]) -> Result<Vec<String>> {
    let bad: Vec<Option<String>> = entries
        .par_iter()
        .filter(|l| l.rank() <= 6 && l.determinant().abs() <= 200)
        .map(|l| {
            let (u, _) = unique_in_genus(l, GenusCaps::default())?;
            Ok(match u {
                Uniqueness::False { .. } => Some(l.name().unwrap_or("unnamed").to_string()),
                _ => None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(bad.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_classes_match_form_count() {
        // even positive binary forms of det 3, 4: A2 and A1+A1 only
        let c = isometry_classes(2, 4).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn rank_three_small() {
        // A3 (det 4) and A1+A2 (det 6), A1^3 (det 8)
        let c = isometry_classes(3, 8).unwrap();
        let dets: Vec<i64> = c.iter().map(|l| l.determinant().abs()).collect();
        assert!(dets.contains(&4) && dets.contains(&6) && dets.contains(&8));
    }
}
