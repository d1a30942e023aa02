//! Published values the computations are compared against.

use crate::error::Result;
use crate::lattice::IntLattice;

pub use crate::classify::rank3::L1;

/// Lower bounds `Delta_r` for determinants of root-free even definite
/// lattices of rank `r = 1..=18`.
pub const DELTA_R: [(usize, i64); 18] = [
    (1, 4),
    (2, 12),
    (3, 32),
    (4, 64),
    (5, 128),
    (6, 192),
    (7, 256),
    (8, 256),
    (9, 278),
    (10, 283),
    (11, 266),
    (12, 233),
    (13, 191),
    (14, 146),
    (15, 106),
    (16, 73),
    (17, 47),
    (18, 29),
];

pub fn delta_r(r: usize) -> Option<i64> {
    DELTA_R.iter().find(|(k, _)| *k == r).map(|(_, d)| *d)
}

/// Rank two lattices `[[-2k1, a], [a, -2k2]]` not covered by the rank one
/// extension criterion, as `(-2k1, -2k2, a)`.  Rows 4 and 5 carry a second
/// elliptic fibration.
pub const RANK2_TABLE: [(i64, i64, i64); 12] = [
    (-14, -6, 3),
    (-10, -4, 2),
    (-10, -4, 0),
    (-8, -6, 0),
    (-8, -4, 2),
    (-6, -6, 3),
    (-6, -6, 1),
    (-6, -4, 2),
    (-6, -4, 0),
    (-4, -4, 2),
    (-4, -4, 1),
    (-4, -4, 0),
];

pub const RANK2_POSITIVE_ENTROPY_ROWS: [usize; 2] = [4, 5];

pub fn rank2_table() -> Vec<IntLattice> {
    RANK2_TABLE
        .iter()
        .enumerate()
        .map(|(i, &(a, b, c))| IntLattice::from_rows(&[[a, c], [c, b]]).expect("valid binary form").named(format!("#{}", i + 1)))
        .collect()
}

/// Second fibrations exhibited on rows 4 and 5.
pub const POS4_WITNESSES: [(usize, [i64; 4]); 2] = [(4, [25, 12, 6, 2]), (5, [15, 7, 4, 2])];

const FINAL_RANK3: [[[i64; 3]; 3]; 7] = [
    [[-4, -2, -2], [-2, -4, -2], [-2, -2, -6]],
    [[-4, -1, -1], [-1, -4, 1], [-1, 1, -4]],
    [[-4, 2, 2], [2, -6, -1], [2, -1, -6]],
    [[-4, 1, 2], [1, -4, 1], [2, 1, -4]],
    [[-4, 1, 1], [1, -4, -1], [1, -1, -4]],
    [[-4, 2, 0], [2, -4, 0], [0, 0, -6]],
    [[-4, -2, 2], [-2, -4, 0], [2, 0, -4]],
];

const FINAL_RANK4: [[[i64; 4]; 4]; 4] = [
    [[-4, 0, 0, -2], [0, -4, 0, -2], [0, 0, -4, -2], [-2, -2, -2, -4]],
    [[-4, -2, -1, 1], [-2, -4, 1, -1], [-1, 1, -4, 1], [1, -1, 1, -4]],
    [[-4, 1, 1, 1], [1, -4, 1, 1], [1, 1, -4, 1], [1, 1, 1, -4]],
    [[-4, -1, -2, 2], [-1, -4, 1, -1], [-2, 1, -4, 1], [2, -1, 1, -4]],
];

const FINAL_RANK5: [[i64; 5]; 5] = [
    [-4, -1, -1, -1, -2],
    [-1, -4, -1, -1, -2],
    [-1, -1, -4, -1, -2],
    [-1, -1, -1, -4, 1],
    [-2, -2, -2, 1, -4],
];

/// The 22 lattices `L` (ranks 2 to 5) left after both algorithms, named
/// `"rank.index"`.
pub fn final_lattices() -> Result<Vec<IntLattice>> {
    let mut out = Vec::new();
    let keep: Vec<usize> = (1..=12).filter(|i| !RANK2_POSITIVE_ENTROPY_ROWS.contains(i)).collect();
    let table = rank2_table();
    for (j, i) in keep.iter().enumerate() {
        out.push(table[i - 1].clone().named(format!("2.{}", j + 1)));
    }
    for (j, g) in FINAL_RANK3.iter().enumerate() {
        out.push(IntLattice::from_rows(g)?.named(format!("3.{}", j + 1)));
    }
    for (j, g) in FINAL_RANK4.iter().enumerate() {
        out.push(IntLattice::from_rows(g)?.named(format!("4.{}", j + 1)));
    }
    out.push(IntLattice::from_rows(&FINAL_RANK5)?.named("5.1"));
    Ok(out)
}

pub fn final_lattices_of_rank(r: usize) -> Result<Vec<IntLattice>> {
    Ok(final_lattices()?.into_iter().filter(|l| l.rank() == r).collect())
}

/// Genus one fibration counts with `0 <= gamma < beta`, as
/// `(Picard rank, row, count, beta)`; `beta = None` when the count is 0.
pub const FIBRATION_TABLE: [(usize, usize, usize, Option<i64>); 22] = [
    (4, 1, 4, Some(5)),
    (4, 2, 2, Some(3)),
    (4, 3, 0, None),
    (4, 4, 2, Some(3)),
    (4, 5, 0, None),
    (4, 6, 0, None),
    (4, 7, 0, None),
    (4, 8, 0, None),
    (4, 9, 0, None),
    (4, 10, 1, Some(2)),
    (5, 1, 0, None),
    (5, 2, 0, None),
    (5, 3, 8, Some(3)),
    (5, 4, 0, None),
    (5, 5, 2, Some(3)),
    (5, 6, 4, Some(3)),
    (5, 7, 2, Some(2)),
    (6, 1, 3, Some(2)),
    (6, 2, 8, Some(3)),
    (6, 3, 24, Some(5)),
    (6, 4, 2, Some(3)),
    (7, 1, 20, Some(3)),
];

/// `A_L` for the irreducible root lattices, as invariant factors.
pub fn root_discriminant_group(kind: char, n: usize) -> Option<Vec<i64>> {
    Some(match (kind, n) {
        ('A', n) if n >= 1 => vec![n as i64 + 1],
        ('D', n) if n >= 4 && n % 2 == 0 => vec![2, 2],
        ('D', n) if n >= 5 => vec![4],
        ('E', 6) => vec![3],
        ('E', 7) => vec![2],
        ('E', 8) => vec![],
        _ => return None,
    })
}

/// Possible torsion parts of Mordell-Weil groups of elliptic K3 surfaces,
/// as invariant factors.
pub const TORSION_GROUPS: [&[i64]; 12] = [&[2], &[3], &[4], &[2, 2], &[5], &[6], &[7], &[8], &[2, 4], &[3, 3], &[2, 6], &[4, 4]];

/// `U + E8 + E8 + A1` is the one Picard rank 19 lattice with finite
/// automorphism group; its orthogonal part is excluded from the census.
pub const FINITE_AUTOMORPHISM_EXCEPTIONS: [&str; 1] = ["E8+E8+A1"];
