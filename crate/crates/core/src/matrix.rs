//! Dense integer matrices and the exact algorithms built on them
//! (Bareiss determinant, Hermite and Smith normal forms, integer kernels).
//!
//! Entries are stored as `i64`; every elimination runs on `BigInt` so that
//! intermediate growth never overflows.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::LatticeError;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn diagonal(entries: &[i64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    /// Builds a matrix from row vectors; all rows must have the same length.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self, LatticeError> {
        let nrows = rows.len();
        let ncols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != ncols {
                return Err(LatticeError::Shape(format!(
                    "ragged matrix: expected {} columns, found {}",
                    ncols,
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(IntMatrix { rows: nrows, cols: ncols, data })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [i64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// `B * self * B^T`, i.e. the Gram matrix of the rows of `basis`.
    pub fn congruent(&self, basis: &IntMatrix) -> IntMatrix {
        basis.mul(self).mul(&basis.transpose())
    }

    pub fn scaled(&self, m: i64) -> IntMatrix {
        IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * m).collect() }
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// `self * v` for a column vector `v`.
    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Bilinear value `u^T self v`.
    pub fn bilinear(&self, u: &[i64], v: &[i64]) -> i64 {
        let mv = self.apply(v);
        u.iter().zip(&mv).map(|(a, b)| a * b).sum()
    }

    pub fn block_diag(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
        let mut m = Self::zeros(a.rows + b.rows, a.cols + b.cols);
        for i in 0..a.rows {
            for j in 0..a.cols {
                m[(i, j)] = a[(i, j)];
            }
        }
        for i in 0..b.rows {
            for j in 0..b.cols {
                m[(a.rows + i, a.cols + j)] = b[(i, j)];
            }
        }
        m
    }

    /// Principal submatrix on the given index set.
    pub fn principal(&self, idx: &[usize]) -> IntMatrix {
        let mut m = Self::zeros(idx.len(), idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m[(a, b)] = self[(i, j)];
            }
        }
        m
    }

    pub fn entries(&self) -> &[i64] {
        &self.data
    }

    pub fn to_big(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    pub fn from_big(rows: &[Vec<BigInt>]) -> Result<IntMatrix, LatticeError> {
        let conv: Result<Vec<Vec<i64>>, _> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| x.to_i64().ok_or_else(|| LatticeError::Overflow(x.to_string())))
                    .collect()
            })
            .collect();
        IntMatrix::from_rows(&conv?)
    }

    pub fn determinant_big(&self) -> BigInt {
        assert!(self.is_square(), "determinant of a non-square matrix");
        bareiss_det(self.to_big())
    }

    pub fn determinant(&self) -> Result<i64, LatticeError> {
        let d = self.determinant_big();
        d.to_i64().ok_or_else(|| LatticeError::Overflow(d.to_string()))
    }

    /// Exact inverse over the rationals, `None` if singular.
    pub fn inverse_rational(&self) -> Option<Vec<Vec<BigRational>>> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let mut r: Vec<BigRational> =
                    self.row(i).iter().map(|&x| BigRational::from_integer(x.into())).collect();
                r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
                r
            })
            .collect();
        for c in 0..n {
            let p = (c..n).find(|&r| !a[r][c].is_zero())?;
            a.swap(c, p);
            let inv = a[c][c].recip();
            for x in a[c].iter_mut() {
                *x = &*x * &inv;
            }
            for r in 0..n {
                if r != c && !a[r][c].is_zero() {
                    let f = a[r][c].clone();
                    let pivot_row = a[c].clone();
                    for (x, y) in a[r].iter_mut().zip(pivot_row.iter()) {
                        *x = &*x - &f * y;
                    }
                }
            }
        }
        Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
    }

    /// Inverse of a unimodular integer matrix.
    pub fn inverse_unimodular(&self) -> Result<IntMatrix, LatticeError> {
        let inv = self.inverse_rational().ok_or(LatticeError::Degenerate)?;
        let rows: Result<Vec<Vec<i64>>, LatticeError> = inv
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| {
                        if x.is_integer() {
                            x.to_integer().to_i64().ok_or_else(|| LatticeError::Overflow(x.to_string()))
                        } else {
                            Err(LatticeError::Shape("matrix is not unimodular".into()))
                        }
                    })
                    .collect()
            })
            .collect();
        IntMatrix::from_rows(&rows?)
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = i64;
    fn index(&self, (i, j): (usize, usize)) -> &i64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_rows())
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(|x| format!("{:>4}", x)).collect();
            writeln!(f, "[{} ]", cells.join(""))?;
        }
        Ok(())
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<i64>>::deserialize(d)?;
        IntMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Fraction-free Gaussian elimination.
pub fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Row-style Hermite normal form of the lattice spanned by `rows`.
///
/// Returns the nonzero rows of the echelon form: pivots positive, entries
/// above each pivot reduced into `[0, pivot)`.
pub fn hnf_rows(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut a: Vec<Vec<BigInt>> = rows.to_vec();
    let m = a.len();
    if m == 0 {
        return a;
    }
    let n = a[0].len();
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        loop {
            // smallest nonzero |entry| in column c below r becomes the pivot
            let mut best: Option<usize> = None;
            for i in r..m {
                if !a[i][c].is_zero() && best.map_or(true, |b| a[i][c].abs() < a[b][c].abs()) {
                    best = Some(i);
                }
            }
            let Some(p) = best else { break };
            a.swap(r, p);
            let mut done = true;
            for i in r + 1..m {
                if a[i][c].is_zero() {
                    continue;
                }
                let q = a[i][c].div_floor(&a[r][c]);
                let pivot_row = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(pivot_row.iter()) {
                    *x -= &q * y;
                }
                if !a[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < m && !a[r][c].is_zero() {
            if a[r][c].is_negative() {
                for x in a[r].iter_mut() {
                    *x = -&*x;
                }
            }
            for i in 0..r {
                let q = a[i][c].div_floor(&a[r][c]);
                if !q.is_zero() {
                    let pivot_row = a[r].clone();
                    for (x, y) in a[i].iter_mut().zip(pivot_row.iter()) {
                        *x -= &q * y;
                    }
                }
            }
            r += 1;
        }
    }
    a.truncate(r);
    a
}

/// Smith normal form `U * A * V = D` of a square matrix.
pub struct SmithForm {
    pub diagonal: Vec<BigInt>,
    pub left: Vec<Vec<BigInt>>,
    pub right: Vec<Vec<BigInt>>,
}

pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    assert!(m.is_square());
    let n = m.nrows();
    let mut a = m.to_big();
    let ident = |n: usize| -> Vec<Vec<BigInt>> {
        (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
    };
    let mut u = ident(n);
    let mut v = ident(n);

    fn row_axpy(a: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
        // row_dst -= q * row_src
        let s = a[src].clone();
        for (x, y) in a[dst].iter_mut().zip(s.iter()) {
            *x -= q * y;
        }
    }
    fn col_axpy(a: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
        for row in a.iter_mut() {
            let y = row[src].clone();
            row[dst] -= q * y;
        }
    }
    fn swap_cols(a: &mut [Vec<BigInt>], i: usize, j: usize) {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
    }

    for t in 0..n {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if !a[i][j].is_zero()
                        && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            a.swap(t, pi);
            u.swap(t, pi);
            swap_cols(&mut a, t, pj);
            swap_cols(&mut v, t, pj);

            let mut clean = true;
            for i in t + 1..n {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                row_axpy(&mut a, i, t, &q);
                row_axpy(&mut u, i, t, &q);
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                col_axpy(&mut a, j, t, &q);
                col_axpy(&mut v, j, t, &q);
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility of the remaining block by the pivot
            let mut offender = None;
            'scan: for i in t + 1..n {
                for j in t + 1..n {
                    if !(&a[i][j] % &a[t][t]).is_zero() {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    row_axpy(&mut a, t, i, &minus_one);
                    row_axpy(&mut u, t, i, &minus_one);
                }
                None => break,
            }
        }
        if t < n && a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
    }
    SmithForm { diagonal: (0..n).map(|i| a[i][i].clone()).collect(), left: u, right: v }
}

/// Basis of the integer kernel `{x in Z^n : M x = 0}`; always saturated.
pub fn integer_kernel(m: &IntMatrix) -> Vec<Vec<i64>> {
    let k = m.nrows();
    let n = m.ncols();
    // rows of [M^T | I_n]; reduce on the first k columns
    let mut a: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let mut r: Vec<BigInt> = (0..k).map(|j| BigInt::from(m[(j, i)])).collect();
            r.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            r
        })
        .collect();
    let mut r = 0;
    for c in 0..k {
        loop {
            let mut best: Option<usize> = None;
            for i in r..n {
                if !a[i][c].is_zero() && best.map_or(true, |b| a[i][c].abs() < a[b][c].abs()) {
                    best = Some(i);
                }
            }
            let Some(p) = best else { break };
            a.swap(r, p);
            let mut done = true;
            for i in r + 1..n {
                if a[i][c].is_zero() {
                    continue;
                }
                let q = a[i][c].div_floor(&a[r][c]);
                let pr = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(pr.iter()) {
                    *x -= &q * y;
                }
                if !a[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                r += 1;
                break;
            }
        }
    }
    let kernel: Vec<Vec<BigInt>> = a[r..].iter().map(|row| row[k..].to_vec()).collect();
    hnf_rows(&kernel)
        .iter()
        .map(|row| row.iter().map(|x| x.to_i64().expect("kernel entry overflow")).collect())
        .collect()
}

/// Rank over the rationals.
pub fn rank_of_rows(rows: &[Vec<i64>]) -> usize {
    let big: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    hnf_rows(&big).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn determinant_small_cases() {
        assert_eq!(mat(&[&[0, 1], &[1, -2]]).determinant().unwrap(), -1);
        assert_eq!(mat(&[&[-2, 1], &[1, -2]]).determinant().unwrap(), 3);
        assert_eq!(mat(&[&[0, 2, 1], &[1, 0, 0], &[0, 1, 0]]).determinant().unwrap(), 1);
        assert_eq!(mat(&[&[1, 2], &[2, 4]]).determinant().unwrap(), 0);
    }

    #[test]
    fn smith_form_reconstructs() {
        let g = mat(&[&[-4, 2, 0], &[2, -6, 2], &[0, 2, -8]]);
        let s = smith_normal_form(&g);
        let u = IntMatrix::from_big(&s.left).unwrap();
        let v = IntMatrix::from_big(&s.right).unwrap();
        let d = u.mul(&g).mul(&v);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(d[(i, j)], 0);
                }
            }
        }
        let diag: Vec<i64> = (0..3).map(|i| d[(i, i)]).collect();
        assert_eq!(diag.iter().product::<i64>().abs(), g.determinant().unwrap().abs());
        assert!(diag.windows(2).all(|w| w[1] % w[0] == 0));
    }

    #[test]
    fn hnf_of_redundant_rows() {
        let rows: Vec<Vec<BigInt>> = vec![vec![2.into(), 0.into()], vec![0.into(), 2.into()], vec![1.into(), 1.into()]];
        let h = hnf_rows(&rows);
        assert_eq!(h.len(), 2);
        let h = IntMatrix::from_big(&h).unwrap();
        assert_eq!(h.determinant().unwrap().abs(), 2);
    }

    #[test]
    fn kernel_is_saturated() {
        let m = mat(&[&[2, 4, 6]]);
        let k = integer_kernel(&m);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert_eq!(m.apply(v), vec![0]);
        }
        // index-1 check: the kernel together with a complement vector spans Z^3
        let mut rows = k.clone();
        rows.push(vec![1, 0, 0]);
        assert_eq!(IntMatrix::from_rows(&rows).unwrap().determinant().unwrap().abs(), 1);
    }
}
