//! Finite quadratic forms `(A_L, q_L)` and overlattices obtained from
//! isotropic subgroups.
//!
//! Elements of `A_L` are coordinate vectors over the cyclic factors.  All
//! values are kept as integer numerators over the exponent `e` of the group:
//! `q` lives in `Z / 2eZ`, `b` in `Z / eZ`.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Serialize, Serializer};

use crate::error::{LatticeError, Result};
use crate::lattice::{hnf_basis, IntLattice};
use crate::matrix::{smith_normal_form, IntMatrix};

pub const DEFAULT_GROUP_CAP: u64 = 10_000;

#[derive(Clone, Debug)]
pub struct DiscriminantForm {
    orders: Vec<i64>,
    exponent: i64,
    qn: Vec<i64>,
    bn: Vec<Vec<i64>>,
    presentation: Option<Presentation>,
}

/// Links group coordinates with the ambient lattice.
#[derive(Clone, Debug)]
struct Presentation {
    /// Row `i` maps `G x` (for `x` in the dual) to coordinate `i`.
    to_coords: Vec<Vec<i64>>,
    /// `lifts[i] / orders[i]` is a dual vector representing generator `i`.
    lifts: Vec<Vec<i64>>,
}

impl DiscriminantForm {
    pub fn of(lattice: &IntLattice) -> DiscriminantForm {
        let g = lattice.gram();
        let n = lattice.rank();
        let snf = smith_normal_form(g);
        let to_i64 = |x: &num_bigint::BigInt| x.to_i64().expect("smith transform entry overflow");
        let mut orders = Vec::new();
        let mut to_coords = Vec::new();
        let mut lifts = Vec::new();
        for t in 0..n {
            let d = to_i64(&snf.diagonal[t]);
            if d > 1 {
                orders.push(d);
                to_coords.push(snf.left[t].iter().map(to_i64).collect::<Vec<_>>());
                lifts.push((0..n).map(|r| to_i64(&snf.right[r][t])).collect::<Vec<_>>());
            }
        }
        let exponent = orders.iter().fold(1i64, |acc, &d| acc.lcm(&d));
        let k = orders.len();
        let mut qn = vec![0i64; k];
        let mut bn = vec![vec![0i64; k]; k];
        for i in 0..k {
            for j in 0..k {
                let num = g.bilinear(&lifts[i], &lifts[j]) as i128 * exponent as i128;
                let den = orders[i] as i128 * orders[j] as i128;
                assert!(num % den == 0, "discriminant value outside (1/e)Z");
                let v = (num / den) as i64;
                if i == j {
                    qn[i] = v.mod_floor(&(2 * exponent));
                }
                bn[i][j] = v.mod_floor(&exponent);
            }
        }
        DiscriminantForm {
            orders,
            exponent,
            qn,
            bn,
            presentation: Some(Presentation { to_coords, lifts }),
        }
    }

    /// A form given directly by generator orders and values (numerators over
    /// the lcm of the orders).  Used for orthogonal sums and tests.
    pub fn from_parts(orders: Vec<i64>, q: Vec<Ratio<i64>>, b: Vec<Vec<Ratio<i64>>>) -> Result<Self> {
        let exponent = orders.iter().fold(1i64, |acc, &d| acc.lcm(&d));
        let to_num = |r: &Ratio<i64>, m: i64| -> Result<i64> {
            let v = r * exponent;
            if !v.is_integer() {
                return Err(LatticeError::Precondition(format!("value {} has denominator outside the group exponent", r)));
            }
            Ok(v.to_integer().mod_floor(&m))
        };
        let qn = q.iter().map(|r| to_num(r, 2 * exponent)).collect::<Result<Vec<_>>>()?;
        let bn = b
            .iter()
            .map(|row| row.iter().map(|r| to_num(r, exponent)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(DiscriminantForm { orders, exponent, qn, bn, presentation: None })
    }

    pub fn orthogonal_sum(&self, other: &DiscriminantForm) -> DiscriminantForm {
        let mut orders = self.orders.clone();
        orders.extend(&other.orders);
        let q: Vec<Ratio<i64>> = self.q_values().into_iter().chain(other.q_values()).collect();
        let k = orders.len();
        let mut b = vec![vec![Ratio::from_integer(0); k]; k];
        let (ba, bb) = (self.b_matrix(), other.b_matrix());
        let s = self.orders.len();
        for i in 0..s {
            for j in 0..s {
                b[i][j] = ba[i][j];
            }
        }
        for i in 0..other.orders.len() {
            for j in 0..other.orders.len() {
                b[s + i][s + j] = bb[i][j];
            }
        }
        DiscriminantForm::from_parts(orders, q, b).expect("orthogonal sum of valid forms")
    }

    pub fn orders(&self) -> &[i64] {
        &self.orders
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().map(|&d| d as u64).product()
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn q_values(&self) -> Vec<Ratio<i64>> {
        self.qn.iter().map(|&v| Ratio::new(v, self.exponent)).collect()
    }

    /// Numerators of `q` on the generators, over the exponent.
    pub fn q_values_num(&self) -> &[i64] {
        &self.qn
    }

    pub fn b_num_entry(&self, i: usize, j: usize) -> i64 {
        self.bn[i][j]
    }

    pub fn b_matrix(&self) -> Vec<Vec<Ratio<i64>>> {
        self.bn.iter().map(|row| row.iter().map(|&v| Ratio::new(v, self.exponent)).collect()).collect()
    }

    pub fn normalize(&self, x: &mut [i64]) {
        for (xi, &d) in x.iter_mut().zip(&self.orders) {
            *xi = xi.mod_floor(&d);
        }
    }

    pub fn add(&self, x: &[i64], y: &[i64]) -> Vec<i64> {
        let mut s: Vec<i64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        self.normalize(&mut s);
        s
    }

    pub fn scale(&self, k: i64, x: &[i64]) -> Vec<i64> {
        let mut s: Vec<i64> = x.iter().map(|a| a * k).collect();
        self.normalize(&mut s);
        s
    }

    pub fn zero(&self) -> Vec<i64> {
        vec![0; self.orders.len()]
    }

    /// Numerator of `q(x)` over the exponent, in `[0, 2e)`.
    pub fn q_num(&self, x: &[i64]) -> i64 {
        let m = 2 * self.exponent as i128;
        let k = self.orders.len();
        let mut acc: i128 = 0;
        for i in 0..k {
            if x[i] == 0 {
                continue;
            }
            let xi = x[i] as i128;
            acc = (acc + xi * xi % m * self.qn[i] as i128) % m;
            for j in i + 1..k {
                acc = (acc + 2 * xi * x[j] as i128 % m * self.bn[i][j] as i128) % m;
            }
        }
        acc.rem_euclid(m) as i64
    }

    /// Numerator of `b(x, y)` over the exponent, in `[0, e)`.
    pub fn b_num(&self, x: &[i64], y: &[i64]) -> i64 {
        let m = self.exponent as i128;
        let k = self.orders.len();
        let mut acc: i128 = 0;
        for i in 0..k {
            if x[i] == 0 {
                continue;
            }
            for j in 0..k {
                acc = (acc + x[i] as i128 * y[j] as i128 % m * self.bn[i][j] as i128) % m;
            }
        }
        acc.rem_euclid(m) as i64
    }

    pub fn quadratic(&self, x: &[i64]) -> Ratio<i64> {
        Ratio::new(self.q_num(x), self.exponent)
    }

    pub fn bilinear(&self, x: &[i64], y: &[i64]) -> Ratio<i64> {
        Ratio::new(self.b_num(x, y), self.exponent)
    }

    pub fn element_order(&self, x: &[i64]) -> i64 {
        x.iter().zip(&self.orders).fold(1i64, |acc, (&xi, &d)| acc.lcm(&(d / d.gcd(&xi))))
    }

    pub fn is_isotropic(&self, x: &[i64]) -> bool {
        self.q_num(x) == 0
    }

    /// All elements in mixed-radix order; fails above `cap`.
    pub fn elements(&self, cap: u64) -> Result<Vec<Vec<i64>>> {
        let total = self.order();
        if total > cap {
            return Err(LatticeError::CapExceeded(format!("discriminant group of order {} exceeds cap {}", total, cap)));
        }
        let k = self.orders.len();
        let mut out = Vec::with_capacity(total as usize);
        let mut cur = vec![0i64; k];
        loop {
            out.push(cur.clone());
            let mut i = 0;
            loop {
                if i == k {
                    return Ok(out);
                }
                cur[i] += 1;
                if cur[i] < self.orders[i] {
                    break;
                }
                cur[i] = 0;
                i += 1;
            }
        }
    }

    /// Class of the dual vector `x` given through `w = G x` (an integer vector).
    pub fn class_of_pairing(&self, w: &[i64]) -> Result<Vec<i64>> {
        let p = self.presentation.as_ref().ok_or_else(|| LatticeError::Unsupported("form has no lattice presentation".into()))?;
        let mut x: Vec<i64> = p
            .to_coords
            .iter()
            .map(|row| row.iter().zip(w).map(|(a, b)| *a as i128 * *b as i128).sum::<i128>())
            .zip(&self.orders)
            .map(|(v, &d)| v.rem_euclid(d as i128) as i64)
            .collect();
        self.normalize(&mut x);
        Ok(x)
    }

    /// A dual vector representing `x`, as `(numerators, denominator)` with
    /// the denominator equal to the exponent.
    pub fn lift(&self, x: &[i64]) -> Result<(Vec<i64>, i64)> {
        let p = self.presentation.as_ref().ok_or_else(|| LatticeError::Unsupported("form has no lattice presentation".into()))?;
        let n = p.lifts.first().map(|l| l.len()).unwrap_or(0);
        let mut num = vec![0i64; n];
        for (i, lift) in p.lifts.iter().enumerate() {
            let f = x[i] * (self.exponent / self.orders[i]);
            for (a, b) in num.iter_mut().zip(lift) {
                *a += f * b;
            }
        }
        Ok((num, self.exponent))
    }

    /// Histogram of (element order, q numerator) used as a cheap isomorphism invariant.
    pub fn value_histogram(&self, cap: u64) -> Result<BTreeMap<(i64, Ratio<i64>), u64>> {
        let mut h = BTreeMap::new();
        for x in self.elements(cap)? {
            *h.entry((self.element_order(&x), self.quadratic(&x))).or_insert(0) += 1;
        }
        Ok(h)
    }

    /// An isomorphism `self -> other` of finite quadratic forms, as images of
    /// the generators of `self`.  Errors only when a group exceeds `cap`.
    pub fn isomorphism_to(&self, other: &DiscriminantForm, cap: u64) -> Result<Option<Vec<Vec<i64>>>> {
        if self.order() != other.order() {
            return Ok(None);
        }
        if self.order() == 1 {
            return Ok(Some(Vec::new()));
        }
        if self.value_histogram(cap)? != other.value_histogram(cap)? {
            return Ok(None);
        }
        let mut found = None;
        self.search_maps(other, cap, &mut |imgs| {
            found = Some(imgs.to_vec());
            false
        })?;
        Ok(found)
    }

    /// Every automorphism of the form (as generator images); fails if more
    /// than `cap` maps exist or the group exceeds `cap`.
    pub fn automorphisms(&self, cap: u64) -> Result<Vec<Vec<Vec<i64>>>> {
        let mut all = Vec::new();
        let mut overflow = false;
        self.search_maps(self, cap, &mut |imgs| {
            all.push(imgs.to_vec());
            if all.len() as u64 > cap {
                overflow = true;
                return false;
            }
            true
        })?;
        if overflow {
            return Err(LatticeError::CapExceeded(format!("more than {} automorphisms of the discriminant form", cap)));
        }
        Ok(all)
    }

    /// Images under the map sending generator `i` to `images[i]`.
    pub fn apply_map(&self, target: &DiscriminantForm, images: &[Vec<i64>], x: &[i64]) -> Vec<i64> {
        let mut out = target.zero();
        for (xi, img) in x.iter().zip(images) {
            for (o, v) in out.iter_mut().zip(img) {
                *o += xi * v;
            }
        }
        target.normalize(&mut out);
        out
    }

    // Backtracking over generator images that preserve order, q and b.
    // Since b is nondegenerate, any such homomorphism between groups of
    // equal order is an isomorphism.
    fn search_maps(
        &self,
        other: &DiscriminantForm,
        cap: u64,
        visit: &mut dyn FnMut(&[Vec<i64>]) -> bool,
    ) -> Result<()> {
        if self.order() != other.order() {
            return Ok(());
        }
        let targets = other.elements(cap)?;
        let k = self.orders.len();
        let candidates: Vec<Vec<&Vec<i64>>> = (0..k)
            .map(|i| {
                targets
                    .iter()
                    .filter(|h| other.element_order(h) == self.orders[i] && other.q_num(h) * self.exponent == self.qn[i] * other.exponent)
                    .collect()
            })
            .collect();
        let mut chosen: Vec<Vec<i64>> = Vec::with_capacity(k);
        fn rec(
            a: &DiscriminantForm,
            b: &DiscriminantForm,
            cands: &[Vec<&Vec<i64>>],
            chosen: &mut Vec<Vec<i64>>,
            visit: &mut dyn FnMut(&[Vec<i64>]) -> bool,
        ) -> bool {
            let i = chosen.len();
            if i == cands.len() {
                return visit(chosen);
            }
            for h in &cands[i] {
                let ok = (0..i).all(|j| b.b_num(h, &chosen[j]) * a.exponent == a.bn[i][j] * b.exponent);
                if !ok {
                    continue;
                }
                chosen.push((*h).clone());
                let cont = rec(a, b, cands, chosen, visit);
                chosen.pop();
                if !cont {
                    return false;
                }
            }
            true
        }
        rec(self, other, &candidates, &mut chosen, visit);
        Ok(())
    }
}

impl Serialize for DiscriminantForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            orders: Vec<i64>,
            q: Vec<String>,
            b: Vec<Vec<String>>,
        }
        Repr {
            orders: self.orders.clone(),
            q: self.q_values().iter().map(|r| r.to_string()).collect(),
            b: self.b_matrix().iter().map(|row| row.iter().map(|r| r.to_string()).collect()).collect(),
        }
        .serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotropicSubgroup {
    generators: Vec<Vec<i64>>,
    elements: Vec<Vec<i64>>,
}

impl IsotropicSubgroup {
    /// The subgroup generated by `generators`; rejected unless every element is isotropic.
    pub fn new(form: &DiscriminantForm, generators: Vec<Vec<i64>>) -> Result<Self> {
        for g in &generators {
            if g.len() != form.len() {
                return Err(LatticeError::Shape("generator has the wrong number of coordinates".into()));
            }
        }
        let elements = span(form, &generators);
        if elements.iter().any(|x| !form.is_isotropic(x)) {
            return Err(LatticeError::NotIsotropic);
        }
        Ok(IsotropicSubgroup { generators, elements })
    }

    pub fn trivial(form: &DiscriminantForm) -> Self {
        IsotropicSubgroup { generators: Vec::new(), elements: vec![form.zero()] }
    }

    pub fn generators(&self) -> &[Vec<i64>] {
        &self.generators
    }

    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    /// Elements in sorted order.
    pub fn elements(&self) -> &[Vec<i64>] {
        &self.elements
    }
}

/// Subgroup generated by `gens`, sorted.
pub fn span(form: &DiscriminantForm, gens: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut set = std::collections::BTreeSet::new();
    set.insert(form.zero());
    for g in gens {
        let mut g = g.clone();
        form.normalize(&mut g);
        let current: Vec<Vec<i64>> = set.iter().cloned().collect();
        let ord = form.element_order(&g);
        for x in &current {
            let mut y = x.clone();
            for _ in 1..ord {
                y = form.add(&y, &g);
                set.insert(y.clone());
            }
        }
    }
    set.into_iter().collect()
}

#[derive(Clone, Debug)]
pub struct Overlattice {
    pub lattice: IntLattice,
    /// Basis rows over `denominator`, in the coordinates of the original lattice (HNF).
    pub basis: IntMatrix,
    pub denominator: i64,
    pub index: u64,
}

/// The even overlattice `L + <lifts of S>`.
pub fn overlattice(lattice: &IntLattice, form: &DiscriminantForm, subgroup: &IsotropicSubgroup) -> Result<Overlattice> {
    for x in subgroup.elements() {
        if !form.is_isotropic(x) {
            return Err(LatticeError::NotIsotropic);
        }
    }
    let n = lattice.rank();
    let e = form.exponent();
    let mut rows: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| if i == j { e } else { 0 }).collect()).collect();
    for g in subgroup.generators() {
        rows.push(form.lift(g)?.0);
    }
    let h = hnf_basis(&rows);
    let basis = IntMatrix::from_rows(&h)?;
    let scaled = lattice.gram().congruent(&basis);
    let e2 = e * e;
    let mut gram = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = scaled[(i, j)];
            if v % e2 != 0 {
                return Err(LatticeError::NotIsotropic);
            }
            gram[(i, j)] = v / e2;
        }
    }
    let out = IntLattice::new(gram)?;
    let index_sq = lattice.determinant_big() / out.determinant_big();
    let index = index_sq.sqrt().to_u64().unwrap_or(0);
    debug_assert_eq!(index, subgroup.order());
    Ok(Overlattice { lattice: out, basis, denominator: e, index })
}
