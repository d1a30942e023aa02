//! Even integral lattices given by Gram matrices.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::gcd_slice;
use crate::error::{LatticeError, Result};
use crate::matrix::{hnf_rows, integer_kernel, IntMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Definiteness {
    NegativeDefinite,
    PositiveDefinite,
    Hyperbolic,
    IndefiniteOther,
}

#[derive(Clone)]
pub struct IntLattice {
    gram: IntMatrix,
    definiteness: Definiteness,
    name: Option<String>,
}

impl PartialEq for IntLattice {
    fn eq(&self, other: &Self) -> bool {
        self.gram == other.gram
    }
}
impl Eq for IntLattice {}

impl IntLattice {
    pub fn new(gram: IntMatrix) -> Result<Self> {
        if !gram.is_square() {
            return Err(LatticeError::Shape("gram matrix must be square".into()));
        }
        if gram.nrows() == 0 {
            return Err(LatticeError::Shape("rank must be at least 1".into()));
        }
        if !gram.is_symmetric() {
            return Err(LatticeError::NotSymmetric);
        }
        for i in 0..gram.nrows() {
            if gram[(i, i)] % 2 != 0 {
                return Err(LatticeError::NotEven(gram[(i, i)]));
            }
        }
        let (pos, neg) = inertia(&gram).ok_or(LatticeError::Degenerate)?;
        let n = gram.nrows();
        let definiteness = if neg == n {
            Definiteness::NegativeDefinite
        } else if pos == n {
            Definiteness::PositiveDefinite
        } else if pos == 1 {
            Definiteness::Hyperbolic
        } else {
            Definiteness::IndefiniteOther
        };
        Ok(IntLattice { gram, definiteness, name: None })
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::new(IntMatrix::from_rows(rows)?)
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.nrows()
    }

    pub fn definiteness(&self) -> Definiteness {
        self.definiteness
    }

    pub fn is_definite(&self) -> bool {
        matches!(self.definiteness, Definiteness::NegativeDefinite | Definiteness::PositiveDefinite)
    }

    pub fn determinant(&self) -> i64 {
        self.gram.determinant().expect("determinant exceeds 64 bits")
    }

    pub fn determinant_big(&self) -> BigInt {
        self.gram.determinant_big()
    }

    /// Norm of a vector given in the lattice basis.
    pub fn norm(&self, v: &[i64]) -> i64 {
        self.gram.bilinear(v, v)
    }

    pub fn pair(&self, u: &[i64], v: &[i64]) -> i64 {
        self.gram.bilinear(u, v)
    }

    /// `L(m)`: the same group with the form multiplied by `m`.
    pub fn rescale(&self, m: i64) -> Result<IntLattice> {
        if m < 1 {
            return Err(LatticeError::Precondition(format!("rescaling factor {} must be positive", m)));
        }
        let mut out = IntLattice::new(self.gram.scaled(m))?;
        if let Some(n) = &self.name {
            out.name = Some(if m == 1 { n.clone() } else { format!("{}({})", n, m) });
        }
        Ok(out)
    }

    pub fn direct_sum(&self, other: &IntLattice) -> IntLattice {
        let mut out = IntLattice::new(IntMatrix::block_diag(&self.gram, &other.gram))
            .expect("direct sum of nondegenerate even lattices");
        if let (Some(a), Some(b)) = (&self.name, &other.name) {
            out.name = Some(format!("{}+{}", a, b));
        }
        out
    }

    pub fn direct_sum_all(parts: &[IntLattice]) -> Option<IntLattice> {
        let mut it = parts.iter();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, l| acc.direct_sum(l)))
    }

    /// Greatest `b` such that `L(1/b)` is still even and integral.
    pub fn primitive_scale_divisor(&self) -> i64 {
        let n = self.rank();
        let mut g = 0i64;
        for i in 0..n {
            g = num_integer::gcd(g, self.gram[(i, i)] / 2);
            for j in 0..i {
                g = num_integer::gcd(g, self.gram[(i, j)]);
            }
        }
        g.abs().max(1)
    }

    pub fn is_primitive_vector(&self, v: &[i64]) -> Result<bool> {
        if v.len() != self.rank() {
            return Err(LatticeError::Shape("vector length differs from rank".into()));
        }
        if v.iter().all(|&x| x == 0) {
            return Err(LatticeError::Precondition("zero vector".into()));
        }
        Ok(gcd_slice(v) == 1)
    }

    /// Sublattice spanned by the rows of `basis`, as a lattice in its own right.
    pub fn sublattice(&self, basis: &IntMatrix) -> Result<IntLattice> {
        IntLattice::new(self.gram.congruent(basis))
    }

    /// Primitive orthogonal complement of the span of `sub` (rows in the
    /// lattice basis).  The input is saturated first; the flag reports
    /// whether that changed it.
    pub fn orthogonal_complement(&self, sub: &IntMatrix) -> Result<Complement> {
        if sub.ncols() != self.rank() {
            return Err(LatticeError::Shape("sublattice basis has the wrong width".into()));
        }
        let sat = saturate(sub);
        if sat.nrows() != sub.nrows() {
            return Err(LatticeError::Precondition("sublattice basis is linearly dependent".into()));
        }
        let saturated = lattice_index(sub, &sat) != 1;
        let sub_gram = self.gram.congruent(&sat);
        if sub_gram.determinant_big().is_zero() {
            return Err(LatticeError::Degenerate);
        }
        let kernel = integer_kernel(&sat.mul(&self.gram));
        if kernel.is_empty() {
            return Err(LatticeError::Precondition("sublattice has full rank".into()));
        }
        let basis = IntMatrix::from_rows(&kernel)?;
        let lattice = IntLattice::new(self.gram.congruent(&basis))?;
        Ok(Complement { lattice, basis, saturated })
    }

    pub fn negated(&self) -> IntLattice {
        IntLattice::new(self.gram.scaled(-1)).expect("negation preserves validity")
    }
}

#[derive(Clone, Debug)]
pub struct Complement {
    pub lattice: IntLattice,
    /// Basis of the complement inside the ambient lattice.
    pub basis: IntMatrix,
    /// True when the requested sublattice was not primitive and had to be saturated.
    pub saturated: bool,
}

/// Primitive closure `(span_Q(rows)) ∩ Z^n`, as an HNF basis.
pub fn saturate(rows: &IntMatrix) -> IntMatrix {
    let perp = integer_kernel(rows);
    if perp.is_empty() {
        let n = rows.ncols();
        return IntMatrix::identity(n);
    }
    let k = integer_kernel(&IntMatrix::from_rows(&perp).expect("kernel rows"));
    IntMatrix::from_rows(&k).expect("kernel rows")
}

/// Index of the row span of `a` inside the row span of `b` (same rational span).
pub fn lattice_index(a: &IntMatrix, b: &IntMatrix) -> u64 {
    let ga = a.mul(&a.transpose()).determinant_big().abs();
    let gb = b.mul(&b.transpose()).determinant_big().abs();
    let sq = ga / gb;
    let r = sq.sqrt();
    r.to_u64().unwrap_or(u64::MAX)
}

/// Row HNF of integer rows, as `i64`.
pub fn hnf_basis(rows: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let big: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    hnf_rows(&big)
        .into_iter()
        .map(|r| r.into_iter().map(|x| x.to_i64().expect("HNF entry overflow")).collect())
        .collect()
}

/// Numbers of positive and negative eigenvalues, `None` if singular.
///
/// Symmetric Gaussian elimination over the rationals (congruence
/// diagonalization), so the counts follow from Sylvester's law of inertia.
pub fn inertia(gram: &IntMatrix) -> Option<(usize, usize)> {
    let n = gram.nrows();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| BigRational::from_integer(gram[(i, j)].into())).collect())
        .collect();
    let (mut pos, mut neg) = (0, 0);
    for k in 0..n {
        if a[k][k].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !a[j][j].is_zero()) {
                a.swap(k, j);
                for row in a.iter_mut() {
                    row.swap(k, j);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                // e_k <- e_k + e_j gives the nonzero diagonal entry 2 a_kj
                for c in 0..n {
                    let v = a[j][c].clone();
                    a[k][c] += v;
                }
                for r in 0..n {
                    let v = a[r][j].clone();
                    a[r][k] += v;
                }
            } else {
                return None;
            }
        }
        let p = a[k][k].clone();
        if p.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &p;
            for j in k..n {
                let v = &f * &a[k][j];
                a[i][j] -= v;
            }
            for r in k..n {
                let v = &f * &a[r][k];
                a[r][i] -= v;
            }
        }
    }
    Some((pos, neg))
}

/// Cartan-type Gram matrices (negative definite).
pub fn root_lattice_a(n: usize) -> IntLattice {
    assert!(n >= 1);
    let mut g = IntMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = -2;
        if i + 1 < n {
            g[(i, i + 1)] = 1;
            g[(i + 1, i)] = 1;
        }
    }
    IntLattice::new(g).unwrap().named(format!("A{}", n))
}

pub fn root_lattice_d(n: usize) -> IntLattice {
    assert!(n >= 4);
    let mut g = IntMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = -2;
    }
    for i in 0..n - 2 {
        g[(i, i + 1)] = 1;
        g[(i + 1, i)] = 1;
    }
    g[(n - 3, n - 1)] = 1;
    g[(n - 1, n - 3)] = 1;
    IntLattice::new(g).unwrap().named(format!("D{}", n))
}

pub fn root_lattice_e(n: usize) -> IntLattice {
    assert!((6..=8).contains(&n));
    let mut g = IntMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = -2;
    }
    for i in 0..n - 2 {
        g[(i, i + 1)] = 1;
        g[(i + 1, i)] = 1;
    }
    g[(2, n - 1)] = 1;
    g[(n - 1, 2)] = 1;
    IntLattice::new(g).unwrap().named(format!("E{}", n))
}

/// The hyperbolic plane in the basis `{F, S0}`.
pub fn hyperbolic_plane() -> IntLattice {
    IntLattice::from_rows(&[[0, 1], [1, -2]]).unwrap().named("U")
}

pub fn rank_one(value: i64) -> Result<IntLattice> {
    Ok(IntLattice::from_rows(&[[value]])?.named(format!("<{}>", value)))
}

pub fn diagonal(values: &[i64]) -> Result<IntLattice> {
    IntLattice::new(IntMatrix::diagonal(values))
}

/// Parses names like `E8(2)+A1`, `A1^8`, `D4+A1^5`, `<-12>`, `U+<-4>`.
pub fn parse_builtin(spec: &str) -> Result<IntLattice> {
    let cleaned: String = spec.chars().filter(|c| !c.is_whitespace()).collect::<String>().replace('−', "-");
    if cleaned.is_empty() {
        return Err(LatticeError::Parse("empty lattice name".into()));
    }
    let mut parts = Vec::new();
    for term in split_terms(&cleaned)? {
        let (lat, count) = parse_term(&term)?;
        for _ in 0..count {
            parts.push(lat.clone());
        }
    }
    let mut out = IntLattice::direct_sum_all(&parts).ok_or_else(|| LatticeError::Parse("no summands".into()))?;
    out.name = Some(cleaned);
    Ok(out)
}

fn split_terms(s: &str) -> Result<Vec<String>> {
    // '+' inside <...> belongs to a number
    let mut terms = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for c in s.chars() {
        match c {
            '<' => depth += 1,
            '>' => depth -= 1,
            _ => {}
        }
        if c == '+' && depth == 0 {
            terms.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    terms.push(cur);
    if terms.iter().any(|t| t.is_empty()) || depth != 0 {
        return Err(LatticeError::Parse(format!("malformed lattice name '{}'", s)));
    }
    Ok(terms)
}

fn parse_term(term: &str) -> Result<(IntLattice, usize)> {
    let bad = || LatticeError::Parse(format!("malformed summand '{}'", term));
    let bytes: Vec<char> = term.chars().collect();
    let mut i;
    let mut base = if bytes[0] == '<' {
        let close = term.find('>').ok_or_else(bad)?;
        let v: i64 = term[1..close].parse().map_err(|_| bad())?;
        i = term[..=close].chars().count();
        rank_one(v)?
    } else if bytes[0] == 'U' {
        i = 1;
        hyperbolic_plane()
    } else {
        let kind = bytes[0];
        i = 1;
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let n: usize = bytes[start..i].iter().collect::<String>().parse().map_err(|_| bad())?;
        match kind {
            'A' if n >= 1 => root_lattice_a(n),
            'D' if n >= 4 => root_lattice_d(n),
            'E' if (6..=8).contains(&n) => root_lattice_e(n),
            _ => return Err(bad()),
        }
    };
    let mut count = 1usize;
    while i < bytes.len() {
        match bytes[i] {
            '(' => {
                let rest: String = bytes[i + 1..].iter().collect();
                let close = rest.find(')').ok_or_else(bad)?;
                let m: i64 = rest[..close].parse().map_err(|_| bad())?;
                base = base.rescale(m)?;
                i += close + 2;
            }
            '^' => {
                let start = i + 1;
                let mut j = start;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                count = bytes[start..j].iter().collect::<String>().parse().map_err(|_| bad())?;
                if count == 0 {
                    return Err(bad());
                }
                i = j;
            }
            _ => return Err(bad()),
        }
    }
    Ok((base, count))
}

impl fmt::Debug for IntLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.name {
            Some(n) => write!(f, "IntLattice({}, {:?})", n, self.gram),
            None => write!(f, "IntLattice({:?})", self.gram),
        }
    }
}

impl fmt::Display for IntLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = &self.name {
            writeln!(f, "{}", n)?;
        }
        write!(f, "{}", self.gram)
    }
}

#[derive(Serialize, Deserialize)]
struct LatticeRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    gram: IntMatrix,
}

impl Serialize for IntLattice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LatticeRecord { name: self.name.clone(), gram: self.gram.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntLattice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = LatticeRecord::deserialize(d)?;
        let mut l = IntLattice::new(rec.gram).map_err(serde::de::Error::custom)?;
        l.name = rec.name;
        Ok(l)
    }
}
