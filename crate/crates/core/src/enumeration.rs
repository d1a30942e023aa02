//! Short vectors, minima and root parts of definite lattices.
//!
//! Negative-definite input is negated internally; every reported norm keeps
//! the sign of the input lattice.

use serde::Serialize;

use crate::arith::round_div;
use crate::error::{LatticeError, Result};
use crate::lattice::{Definiteness, IntLattice};
use crate::matrix::IntMatrix;

/// LLL-reduced Gram matrix together with the change of basis.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub gram: IntMatrix,
    /// Row `i` expresses reduced basis vector `i` in the input basis.
    pub transform: IntMatrix,
}

/// Integral LLL on a positive-definite Gram matrix (delta = 3/4), all
/// quantities exact.
pub fn lll_gram(g: &IntMatrix) -> Reduced {
    let n = g.nrows();
    let mut gram: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| g[(i, j)] as i128).collect()).collect();
    let mut h: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
    if n <= 1 {
        return Reduced { gram: g.clone(), transform: IntMatrix::identity(n) };
    }
    // d[i+1] is the i-th Gram determinant, d[0] = 1
    let mut d = vec![0i128; n + 1];
    let mut lam = vec![vec![0i128; n]; n];
    d[0] = 1;
    d[1] = gram[0][0];
    let mut k = 1usize;
    let mut kmax = 0usize;

    fn red(
        k: usize,
        l: usize,
        d: &[i128],
        lam: &mut [Vec<i128>],
        gram: &mut [Vec<i128>],
        h: &mut [Vec<i64>],
    ) {
        if 2 * lam[k][l].abs() > d[l + 1] {
            let q = round_div(lam[k][l], d[l + 1]);
            let n = gram.len();
            for c in 0..n {
                h[k][c] -= (q as i64) * h[l][c];
            }
            for c in 0..n {
                let v = gram[l][c];
                gram[k][c] -= q * v;
            }
            for r in 0..n {
                let v = gram[r][l];
                gram[r][k] -= q * v;
            }
            lam[k][l] -= q * d[l + 1];
            for i in 0..l {
                let v = lam[l][i];
                lam[k][i] -= q * v;
            }
        }
    }

    while k < n {
        if k > kmax {
            kmax = k;
            for j in 0..=k {
                let mut u = gram[k][j];
                for i in 0..j {
                    u = (d[i + 1] * u - lam[k][i] * lam[j][i]) / d[i];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    d[k + 1] = u;
                }
            }
        }
        red(k, k - 1, &d, &mut lam, &mut gram, &mut h);
        if 4 * d[k + 1] * d[k - 1] < 3 * d[k] * d[k] - 4 * lam[k][k - 1] * lam[k][k - 1] {
            // swap k and k-1
            h.swap(k, k - 1);
            gram.swap(k, k - 1);
            for row in gram.iter_mut() {
                row.swap(k, k - 1);
            }
            for j in 0..k.saturating_sub(1) {
                let t = lam[k][j];
                lam[k][j] = lam[k - 1][j];
                lam[k - 1][j] = t;
            }
            let l = lam[k][k - 1];
            let b = (d[k - 1] * d[k + 1] + l * l) / d[k];
            for i in k + 1..=kmax {
                let t = lam[i][k];
                lam[i][k] = (d[k + 1] * lam[i][k - 1] - l * t) / d[k];
                lam[i][k - 1] = (b * t + l * lam[i][k]) / d[k + 1];
            }
            d[k] = b;
            if k > 1 {
                k -= 1;
            }
        } else {
            for l in (0..k - 1).rev() {
                red(k, l, &d, &mut lam, &mut gram, &mut h);
            }
            k += 1;
        }
    }
    let transform = IntMatrix::from_rows(&h).expect("square transform");
    let reduced = g.congruent(&transform);
    Reduced { gram: reduced, transform }
}

/// Positive-definite Gram of `l` (negated if needed) and the sign used.
pub fn positive_gram(l: &IntLattice) -> Result<(IntMatrix, i64)> {
    match l.definiteness() {
        Definiteness::PositiveDefinite => Ok((l.gram().clone(), 1)),
        Definiteness::NegativeDefinite => Ok((l.gram().scaled(-1), -1)),
        _ => Err(LatticeError::NotDefinite),
    }
}

/// Calls `visit(x, norm)` for every nonzero `x` (one per ± pair, last
/// nonzero coordinate positive in the given basis) with `x^T g x <= bound`.
/// `g` must be positive definite.  Returning `false` from `visit` stops.
pub fn enumerate_positive(g: &IntMatrix, bound: i64, visit: &mut dyn FnMut(&[i64], i64) -> bool) {
    let n = g.nrows();
    if n == 0 || bound <= 0 {
        return;
    }
    // q(x) = sum_i qd[i] (x_i + sum_{j>i} mu[i][j] x_j)^2
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| g[(i, j)] as f64).collect()).collect();
    let mut qd = vec![0f64; n];
    let mut mu = vec![vec![0f64; n]; n];
    for i in 0..n {
        qd[i] = a[i][i];
        for j in i + 1..n {
            mu[i][j] = a[i][j] / qd[i];
        }
        for k in i + 1..n {
            for l in k..n {
                a[k][l] -= mu[i][k] * mu[i][l] * qd[i];
                a[l][k] = a[k][l];
            }
        }
    }
    let slack = 1e-9 * (bound as f64 + 1.0);
    let mut x = vec![0i64; n];
    let mut remaining = vec![0f64; n + 1];
    remaining[n] = bound as f64;
    let mut stop = false;
    fn rec(
        i: usize,
        n: usize,
        g: &IntMatrix,
        bound: i64,
        qd: &[f64],
        mu: &[Vec<f64>],
        slack: f64,
        x: &mut [i64],
        remaining: &mut [f64],
        visit: &mut dyn FnMut(&[i64], i64) -> bool,
        stop: &mut bool,
        nonzero_above: bool,
    ) {
        let c: f64 = -(i + 1..n).map(|j| mu[i][j] * x[j] as f64).sum::<f64>();
        let r = remaining[i + 1];
        if r < -slack {
            return;
        }
        let w = ((r.max(0.0) + slack) / qd[i]).sqrt();
        let lo = (c - w).ceil() as i64;
        let hi = (c + w).floor() as i64;
        // only nonnegative values at the highest nonzero coordinate
        let lo = if nonzero_above { lo } else { lo.max(0) };
        for v in lo..=hi {
            if *stop {
                return;
            }
            x[i] = v;
            let t = v as f64 - c;
            remaining[i] = r - qd[i] * t * t;
            if i == 0 {
                if !nonzero_above && v == 0 {
                    continue;
                }
                let norm = g.bilinear(x, x);
                if norm <= bound && norm > 0 && !visit(x, norm) {
                    *stop = true;
                    return;
                }
            } else {
                rec(i - 1, n, g, bound, qd, mu, slack, x, remaining, visit, stop, nonzero_above || v != 0);
            }
        }
        x[i] = 0;
    }
    rec(n - 1, n, g, bound, &qd, &mu, slack, &mut x, &mut remaining, visit, &mut stop, false);
}

#[derive(Clone, Debug, Serialize)]
pub struct ShortVectorList {
    pub bound: i64,
    pub vectors: Vec<Vec<i64>>,
    /// Norms in the sign convention of the input lattice.
    pub norms: Vec<i64>,
    pub complete: bool,
}

impl ShortVectorList {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

pub fn canonical_sign(v: &mut [i64]) {
    if let Some(&first) = v.iter().find(|&&x| x != 0) {
        if first < 0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// All vectors with `0 < |norm| <= bound`, one per ± pair, sorted by
/// `(|norm|, coordinates)`.
pub fn short_vectors(l: &IntLattice, bound: i64) -> Result<ShortVectorList> {
    let (g, sign) = positive_gram(l)?;
    let red = lll_gram(&g);
    let n = l.rank();
    let mut found: Vec<(i64, Vec<i64>)> = Vec::new();
    enumerate_positive(&red.gram, bound, &mut |x, norm| {
        let mut v = vec![0i64; n];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0 {
                for (vj, &t) in v.iter_mut().zip(red.transform.row(i)) {
                    *vj += xi * t;
                }
            }
        }
        canonical_sign(&mut v);
        found.push((norm, v));
        true
    });
    found.sort();
    Ok(ShortVectorList {
        bound,
        norms: found.iter().map(|(nm, _)| sign * nm).collect(),
        vectors: found.into_iter().map(|(_, v)| v).collect(),
        complete: true,
    })
}

/// Least `|norm|` of a nonzero vector.
pub fn minimum(l: &IntLattice) -> Result<i64> {
    let (g, _) = positive_gram(l)?;
    let red = lll_gram(&g);
    // the smallest diagonal entry of a reduced Gram is an upper bound
    let mut best = (0..l.rank()).map(|i| red.gram[(i, i)]).min().expect("rank >= 1");
    let mut bound = best - 1;
    while bound >= 2 {
        let mut smaller = None;
        enumerate_positive(&red.gram, bound, &mut |_, norm| {
            smaller = Some(norm);
            false
        });
        match smaller {
            Some(m) => {
                best = m;
                bound = m - 1;
            }
            None => break,
        }
    }
    Ok(best)
}

pub fn roots(l: &IntLattice) -> Result<ShortVectorList> {
    short_vectors(l, 2)
}

/// The sublattice generated by the roots, with an LLL-reduced basis
/// expressed in the coordinates of `l`.  `None` when there are no roots.
pub fn root_sublattice(l: &IntLattice) -> Result<Option<(IntLattice, IntMatrix)>> {
    let r = roots(l)?;
    if r.is_empty() {
        return Ok(None);
    }
    let basis_rows = crate::lattice::hnf_basis(&r.vectors);
    let basis = IntMatrix::from_rows(&basis_rows)?;
    let sub = l.sublattice(&basis)?;
    let (pg, sign) = positive_gram(&sub)?;
    let red = lll_gram(&pg);
    let basis = red.transform.mul(&basis);
    let lattice = IntLattice::new(red.gram.scaled(sign))?;
    Ok(Some((lattice, basis)))
}

pub fn root_rank(l: &IntLattice) -> Result<usize> {
    Ok(root_sublattice(l)?.map(|(r, _)| r.rank()).unwrap_or(0))
}

pub fn is_root_overlattice(l: &IntLattice) -> Result<bool> {
    Ok(root_rank(l)? == l.rank())
}

/// LLL-reduced copy of a definite lattice (same sign convention).
pub fn reduce(l: &IntLattice) -> Result<(IntLattice, IntMatrix)> {
    let (g, sign) = positive_gram(l)?;
    let red = lll_gram(&g);
    Ok((IntLattice::new(red.gram.scaled(sign))?, red.transform))
}

/// Number of vectors (counting ± separately) of each absolute norm up to `bound`.
pub fn theta_prefix(l: &IntLattice, bound: i64) -> Result<Vec<u64>> {
    let (g, _) = positive_gram(l)?;
    let red = lll_gram(&g);
    let mut counts = vec![0u64; (bound / 2 + 1) as usize];
    enumerate_positive(&red.gram, bound, &mut |_, norm| {
        counts[(norm / 2) as usize] += 2;
        true
    });
    counts[0] = 1;
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{parse_builtin, root_lattice_a, root_lattice_d, root_lattice_e};

    #[test]
    fn lll_preserves_determinant() {
        let g = IntMatrix::from_rows(&[[10, 7, 3], [7, 10, 5], [3, 5, 8]]).unwrap();
        let r = lll_gram(&g);
        assert_eq!(r.gram.determinant().unwrap(), g.determinant().unwrap());
        assert_eq!(r.transform.determinant().unwrap().abs(), 1);
        assert!((0..3).all(|i| r.gram[(i, i)] <= 10));
    }

    #[test]
    fn root_counts() {
        for n in 1..=8 {
            assert_eq!(roots(&root_lattice_a(n)).unwrap().len() * 2, n * (n + 1));
        }
        for n in 4..=8 {
            assert_eq!(roots(&root_lattice_d(n)).unwrap().len() * 2, 2 * n * (n - 1));
        }
        assert_eq!(roots(&root_lattice_e(6)).unwrap().len() * 2, 72);
        assert_eq!(roots(&root_lattice_e(7)).unwrap().len() * 2, 126);
        assert_eq!(roots(&root_lattice_e(8)).unwrap().len() * 2, 240);
    }

    #[test]
    fn minima() {
        assert_eq!(minimum(&parse_builtin("A1").unwrap()).unwrap(), 2);
        assert_eq!(minimum(&parse_builtin("E8(2)").unwrap()).unwrap(), 4);
        assert_eq!(minimum(&parse_builtin("<-4>+<-6>").unwrap()).unwrap(), 4);
        assert!(short_vectors(&parse_builtin("E8(2)").unwrap(), 2).unwrap().is_empty());
    }

    #[test]
    fn root_part_of_mixed_lattice() {
        let l = parse_builtin("A1+E8(2)").unwrap();
        assert_eq!(root_rank(&l).unwrap(), 1);
        assert!(!is_root_overlattice(&l).unwrap());
        assert!(is_root_overlattice(&root_lattice_d(4)).unwrap());
    }

    #[test]
    fn indefinite_rejected() {
        assert_eq!(short_vectors(&parse_builtin("U").unwrap(), 2).unwrap_err(), LatticeError::NotDefinite);
    }
}
