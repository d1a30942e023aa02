//! Root lattices as sums of `A_n`, `D_n`, `E_n`, with the two necessary
//! conditions for `U + R` to come from an elliptic K3 surface.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::arith::gcd;
use crate::classify::data::{delta_r, root_discriminant_group, FINITE_AUTOMORPHISM_EXCEPTIONS};
use crate::error::{LatticeError, Result};
use crate::isometry::IsometryWitness;
use crate::lattice::{parse_builtin, root_lattice_a, root_lattice_d, root_lattice_e, IntLattice};
use crate::matrix::IntMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RootType {
    // declaration order gives E before D before A
    E(usize),
    D(usize),
    A(usize),
}

impl RootType {
    pub fn new(kind: char, n: usize) -> Result<Self> {
        match kind {
            'A' if n >= 1 => Ok(RootType::A(n)),
            'D' if n >= 4 => Ok(RootType::D(n)),
            'E' if (6..=8).contains(&n) => Ok(RootType::E(n)),
            _ => Err(LatticeError::Parse(format!("no root lattice {}{}", kind, n))),
        }
    }

    pub fn rank(&self) -> usize {
        match *self {
            RootType::A(n) | RootType::D(n) | RootType::E(n) => n,
        }
    }

    pub fn kind(&self) -> char {
        match self {
            RootType::A(_) => 'A',
            RootType::D(_) => 'D',
            RootType::E(_) => 'E',
        }
    }

    pub fn determinant(&self) -> i64 {
        root_discriminant_group(self.kind(), self.rank()).expect("valid type").iter().product()
    }

    /// Least Euler number of a reducible fiber of this type.
    pub fn euler(&self) -> usize {
        match *self {
            RootType::A(n) => n + 1,
            RootType::D(n) | RootType::E(n) => n + 2,
        }
    }

    pub fn lattice(&self) -> IntLattice {
        match *self {
            RootType::A(n) => root_lattice_a(n),
            RootType::D(n) => root_lattice_d(n),
            RootType::E(n) => root_lattice_e(n),
        }
    }

    /// Diagram automorphisms as basis permutations (image of each node).
    fn diagram_symmetries(&self) -> Vec<Vec<usize>> {
        let id = |n: usize| (0..n).collect::<Vec<_>>();
        match *self {
            RootType::A(n) if n >= 2 => vec![(0..n).rev().collect()],
            RootType::D(4) => {
                // nodes 0, 2, 3 hang off node 1
                let mut s = id(4);
                s.swap(0, 2);
                let mut t = id(4);
                t.swap(2, 3);
                vec![s, t]
            }
            RootType::D(n) => {
                let mut s = id(n);
                s.swap(n - 2, n - 1);
                vec![s]
            }
            RootType::E(6) => vec![vec![4, 3, 2, 1, 0, 5]],
            _ => vec![],
        }
    }
}

impl fmt::Display for RootType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind(), self.rank())
    }
}

/// A root lattice, summands sorted `E`, `D`, `A` by decreasing rank.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RootSystem {
    parts: Vec<RootType>,
}

impl RootSystem {
    pub fn new(mut parts: Vec<RootType>) -> Self {
        parts.sort_by(|a, b| a.cmp(b).then(b.rank().cmp(&a.rank())));
        parts.sort_by(|a, b| match (a, b) {
            (RootType::E(x), RootType::E(y)) | (RootType::D(x), RootType::D(y)) | (RootType::A(x), RootType::A(y)) => y.cmp(x),
            _ => a.cmp(b),
        });
        RootSystem { parts }
    }

    /// Names like `D4+A1^5` or `E8+E8+A1`.
    pub fn parse(name: &str) -> Result<Self> {
        let mut parts = Vec::new();
        for term in name.split('+') {
            let term = term.trim();
            let (base, count) = match term.split_once('^') {
                Some((b, c)) => (b, c.parse::<usize>().map_err(|_| LatticeError::Parse(format!("bad exponent in '{}'", term)))?),
                None => (term, 1),
            };
            let mut chars = base.chars();
            let kind = chars.next().ok_or_else(|| LatticeError::Parse("empty summand".into()))?;
            let n: usize = chars.as_str().parse().map_err(|_| LatticeError::Parse(format!("bad summand '{}'", term)))?;
            let t = RootType::new(kind, n)?;
            if count == 0 {
                return Err(LatticeError::Parse(format!("bad exponent in '{}'", term)));
            }
            parts.extend(std::iter::repeat(t).take(count));
        }
        Ok(RootSystem::new(parts))
    }

    pub fn parts(&self) -> &[RootType] {
        &self.parts
    }

    pub fn rank(&self) -> usize {
        self.parts.iter().map(|t| t.rank()).sum()
    }

    /// `|det R|`.
    pub fn determinant(&self) -> i64 {
        self.parts.iter().map(|t| t.determinant()).product()
    }

    pub fn euler_sum(&self) -> usize {
        self.parts.iter().map(|t| t.euler()).sum()
    }

    pub fn lattice(&self) -> IntLattice {
        let comps: Vec<IntLattice> = self.parts.iter().map(|t| t.lattice()).collect();
        IntLattice::direct_sum_all(&comps).expect("at least one summand").named(self.to_string())
    }

    /// Sub-sums indexed by the nonempty subsets of summands other than the
    /// whole set, up to equality, ordered by rank.
    pub fn proper_subsums(&self) -> Vec<RootSystem> {
        let k = self.parts.len();
        let mut out: Vec<RootSystem> = Vec::new();
        for mask in 1u64..(1u64 << k) - 1 {
            let parts: Vec<RootType> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| self.parts[i]).collect();
            let r = RootSystem::new(parts);
            if !out.contains(&r) {
                out.push(r);
            }
        }
        out.sort_by(|a, b| (a.rank(), a).cmp(&(b.rank(), b)));
        out
    }

    /// `self = sub + complement` for some root lattice `complement`.
    pub fn complement_of(&self, sub: &RootSystem) -> Option<RootSystem> {
        let mut rest = self.parts.clone();
        for t in &sub.parts {
            let i = rest.iter().position(|x| x == t)?;
            rest.remove(i);
        }
        Some(RootSystem::new(rest))
    }

    pub fn is_exception(&self) -> bool {
        FINITE_AUTOMORPHISM_EXCEPTIONS.iter().any(|e| RootSystem::parse(e).map(|r| &r == self).unwrap_or(false))
    }

    /// Generators of `O(R)` modulo the Weyl group (which acts trivially on
    /// `A_R`): sign changes and diagram symmetries of each summand, and swaps
    /// of equal neighbouring summands.
    pub fn outer_automorphisms(&self) -> Vec<IsometryWitness> {
        let n = self.rank();
        let offsets: Vec<usize> = self
            .parts
            .iter()
            .scan(0, |acc, t| {
                let o = *acc;
                *acc += t.rank();
                Some(o)
            })
            .collect();
        let mut gens = Vec::new();
        let perm_matrix = |img: &dyn Fn(usize) -> usize, sign: &dyn Fn(usize) -> i64| {
            let mut m = IntMatrix::zeros(n, n);
            for j in 0..n {
                m[(img(j), j)] = sign(j);
            }
            IsometryWitness { matrix: m }
        };
        for (c, t) in self.parts.iter().enumerate() {
            let (o, r) = (offsets[c], t.rank());
            let inside = |j: usize| j >= o && j < o + r;
            gens.push(perm_matrix(&|j| j, &|j| if inside(j) { -1 } else { 1 }));
            for s in t.diagram_symmetries() {
                gens.push(perm_matrix(&|j| if inside(j) { o + s[j - o] } else { j }, &|_| 1));
            }
            if c + 1 < self.parts.len() && self.parts[c + 1] == *t {
                gens.push(perm_matrix(
                    &|j| {
                        if inside(j) {
                            j + r
                        } else if j >= o + r && j < o + 2 * r {
                            j - r
                        } else {
                            j
                        }
                    },
                    &|_| 1,
                ));
            }
        }
        gens
    }
}

impl fmt::Display for RootSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut i = 0;
        let mut first = true;
        while i < self.parts.len() {
            let t = self.parts[i];
            let mut j = i;
            while j < self.parts.len() && self.parts[j] == t {
                j += 1;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            if j - i > 1 {
                write!(f, "{}^{}", t, j - i)?;
            } else {
                write!(f, "{}", t)?;
            }
            i = j;
        }
        Ok(())
    }
}

impl Serialize for RootSystem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Condition C1: the reducible fibers fit into Euler number 24.
pub fn c1_euler(r: &RootSystem) -> bool {
    r.euler_sum() <= 24
}

/// Condition C2: with a `D` or `E` summand present, the torsion order `k`
/// divides the gcd of their determinants.
pub fn c2_torsion(r: &RootSystem, k: i64) -> bool {
    let dets: Vec<i64> = r.parts.iter().filter(|t| t.kind() != 'A').map(|t| t.determinant()).collect();
    if dets.is_empty() {
        return true;
    }
    let g = dets.iter().fold(0, |acc, &d| gcd(acc, d));
    g % k == 0
}

fn irreducible_of_rank(n: usize) -> Vec<RootType> {
    let mut out = vec![RootType::A(n)];
    if n >= 4 {
        out.push(RootType::D(n));
    }
    if (6..=8).contains(&n) {
        out.push(RootType::E(n));
    }
    out
}

/// All root lattices with rank in `ranks`, `det >= Delta_r` and C1.
pub fn root_census(ranks: std::ops::RangeInclusive<usize>) -> Result<Vec<RootSystem>> {
    let mut out = Vec::new();
    for r in ranks {
        let delta = delta_r(r).ok_or_else(|| LatticeError::Precondition(format!("no Delta_r for rank {}", r)))?;
        let mut acc = Vec::new();
        sums_of_rank(r, r, &mut Vec::new(), &mut acc);
        let mut found: Vec<RootSystem> = acc
            .into_iter()
            .map(RootSystem::new)
            .filter(|s| c1_euler(s) && s.determinant() >= delta)
            .collect();
        found.sort();
        found.dedup();
        out.extend(found);
    }
    Ok(out)
}

// multisets of irreducible types, summand ranks nonincreasing
fn sums_of_rank(left: usize, max_part: usize, cur: &mut Vec<RootType>, out: &mut Vec<Vec<RootType>>) {
    if left == 0 {
        out.push(cur.clone());
        return;
    }
    // C1 prunes: each summand costs at least rank + 1
    let used: usize = cur.iter().map(|t| t.euler()).sum();
    if used + left + 1 > 24 {
        return;
    }
    for n in (1..=left.min(max_part)).rev() {
        for t in irreducible_of_rank(n) {
            if let Some(last) = cur.last() {
                if last.rank() == n && t > *last {
                    continue;
                }
            }
            cur.push(t);
            sums_of_rank(left - n, n, cur, out);
            cur.pop();
        }
    }
}

/// Torsion groups `S` (invariant factors) with `|S|^2 | det R`,
/// `det R / |S|^2 >= Delta_r` and C2.
pub fn admissible_groups(r: &RootSystem) -> Vec<Vec<i64>> {
    let d = r.determinant();
    let delta = delta_r(r.rank()).unwrap_or(0);
    crate::classify::data::TORSION_GROUPS
        .iter()
        .filter(|g| {
            let k: i64 = g.iter().product();
            d % (k * k) == 0 && d / (k * k) >= delta && c2_torsion(r, k)
        })
        .map(|g| g.to_vec())
        .collect()
}

/// Parses a torsion group name such as `Z2`, `Z2xZ4`, `trivial`.
pub fn parse_group(name: &str) -> Result<Vec<i64>> {
    let name = name.trim();
    if name.eq_ignore_ascii_case("trivial") || name == "0" || name == "1" {
        return Ok(vec![]);
    }
    name.split(['x', 'X', '*'])
        .map(|t| {
            let t = t.trim().trim_start_matches('Z').trim_start_matches("Z/");
            t.parse::<i64>().ok().filter(|&n| n >= 2).ok_or_else(|| LatticeError::Parse(format!("bad group '{}'", name)))
        })
        .collect()
}

pub fn group_name(g: &[i64]) -> String {
    if g.is_empty() {
        return "trivial".into();
    }
    g.iter().map(|n| format!("Z{}", n)).collect::<Vec<_>>().join("x")
}

/// The lattice of a root system name, through the general parser.
pub fn root_lattice(name: &str) -> Result<IntLattice> {
    let r = RootSystem::parse(name)?;
    let l = r.lattice();
    debug_assert_eq!(l.determinant().abs(), parse_builtin(&r.to_string())?.determinant().abs());
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        let r = RootSystem::parse("A1^5+D4").unwrap();
        assert_eq!(r.to_string(), "D4+A1^5");
        assert_eq!(r.determinant(), 128);
        assert_eq!(RootSystem::parse("E8+A1+E8").unwrap().to_string(), "E8^2+A1");
        assert!(RootSystem::parse("D3").is_err());
    }

    #[test]
    fn conditions() {
        assert!(!c1_euler(&RootSystem::parse("A1^18").unwrap()));
        assert!(c1_euler(&RootSystem::parse("E8^2+A1").unwrap()));
        let r = RootSystem::parse("D4+A1^5").unwrap();
        assert!(c2_torsion(&r, 4));
        assert!(!c2_torsion(&r, 3));
        assert!(c2_torsion(&RootSystem::parse("A3+A5").unwrap(), 7));
    }

    #[test]
    fn outer_automorphisms_are_isometries() {
        for name in ["A1^3", "D4+A2^2", "E6+D5", "A4"] {
            let r = RootSystem::parse(name).unwrap();
            let l = r.lattice();
            for g in r.outer_automorphisms() {
                assert!(g.verify(&l, &l), "{}", name);
            }
        }
    }

    #[test]
    fn groups() {
        assert_eq!(parse_group("Z2xZ4").unwrap(), vec![2, 4]);
        assert_eq!(group_name(&[3, 3]), "Z3xZ3");
        assert!(parse_group("Z1").is_err());
    }
}
