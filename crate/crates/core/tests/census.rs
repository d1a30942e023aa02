use k3e_core::classify::census::*;
use k3e_core::classify::data::{delta_r, root_discriminant_group};
use k3e_core::classify::roots::*;
use k3e_core::discriminant::DiscriminantForm;
use k3e_core::enumeration::{minimum, roots};
use k3e_core::isometry::is_isometric;
use k3e_core::lattice::parse_builtin;

#[test]
fn discriminant_groups_of_irreducible_roots() {
    // invariant factors from the Smith form of the Cartan matrix
    for (kind, range) in [('A', 1..=12), ('D', 4..=12), ('E', 6..=8)] {
        for n in range {
            let t = RootType::new(kind, n).unwrap();
            let form = DiscriminantForm::of(&t.lattice());
            let mut want = root_discriminant_group(kind, n).unwrap();
            want.retain(|&d| d > 1);
            assert_eq!(form.orders(), want.as_slice(), "{}", t);
            assert_eq!(t.lattice().determinant().abs(), t.determinant());
        }
    }
}

#[test]
fn root_census_conditions() {
    assert_eq!(delta_r(9), Some(278));
    let census = root_census(9..=18).unwrap();
    let a18 = RootSystem::parse("A1^18").unwrap();
    assert!(!census.contains(&a18));
    let e8e8a1 = RootSystem::parse("E8+E8+A1").unwrap();
    assert!(c1_euler(&e8e8a1));
    for r in &census {
        assert!(c1_euler(r));
        assert!(r.determinant() >= delta_r(r.rank()).unwrap());
        assert_eq!(r.lattice().determinant().abs(), r.determinant());
    }
    assert!(census.contains(&RootSystem::parse("A1^9").unwrap()));
    assert!(!census.contains(&RootSystem::parse("D4+A1^5").unwrap()));
    // a brute count for rank 9 over independent partitions
    let rank9 = census.iter().filter(|r| r.rank() == 9).count();
    assert_eq!(rank9, brute_rank9());
}

fn brute_rank9() -> usize {
    let mut types = Vec::new();
    for n in 1..=9 {
        types.push(('A', n));
        if n >= 4 {
            types.push(('D', n));
        }
        if (6..=8).contains(&n) {
            types.push(('E', n));
        }
    }
    fn go(types: &[(char, usize)], start: usize, left: usize, euler: usize, det: i64, out: &mut usize) {
        if left == 0 {
            if euler <= 24 && det >= 278 {
                *out += 1;
            }
            return;
        }
        for i in start..types.len() {
            let (k, n) = types[i];
            if n > left {
                continue;
            }
            let e = if k == 'A' { n + 1 } else { n + 2 };
            let d: i64 = root_discriminant_group(k, n).unwrap().iter().product();
            go(types, i, left - n, euler + e, det * d, out);
        }
    }
    let mut out = 0;
    go(&types, 0, 9, 0, 1, &mut out);
    out
}

#[test]
fn torsion_condition() {
    let r = RootSystem::parse("D4+A1^5").unwrap();
    assert!(c2_torsion(&r, 4));
    assert!(!c2_torsion(&r, 3));
    let a = RootSystem::parse("A3+A5").unwrap();
    assert!((2..=8).all(|k| c2_torsion(&a, k)));
}

#[test]
fn census_members_have_the_right_index() {
    for (name, group) in [("A1^8", vec![2]), ("A3^4", vec![4]), ("A2^6", vec![3]), ("A1^8", vec![2, 2]), ("A5^2+A2", vec![3])] {
        let r = RootSystem::parse(name).unwrap();
        let c = overlattice_census(&r, &group, CensusCaps::default()).unwrap();
        let k: i64 = group.iter().product();
        let root_count = roots(&r.lattice()).unwrap().len();
        for m in &c.overlattices {
            assert_eq!(m.lattice.determinant() * k * k, r.lattice().determinant());
            assert!((0..m.lattice.rank()).all(|i| m.lattice.gram()[(i, i)] % 2 == 0));
            assert_eq!(roots(&m.lattice).unwrap().len(), root_count);
        }
        assert_eq!(c.orbits, c.overlattices.len() + c.discarded_norm2 + c.discarded_same_genus);
    }
}

#[test]
fn a1_eight_glue() {
    // weight-4 glue keeps the roots, weight 8 gives E8-type roots
    let r = RootSystem::parse("A1^8").unwrap();
    let c = overlattice_census(&r, &[2], CensusCaps::default()).unwrap();
    assert_eq!(c.orbits, 2);
    assert_eq!(c.discarded_norm2, 1);
    assert_eq!(c.overlattices.len(), 1);
}

#[test]
fn rank_nine_seed_a1_nine() {
    let r = RootSystem::parse("A1^9").unwrap();
    let mut memo = RootGenusMemo::default();
    let rep = run_seed(&r, CensusCaps::default(), &mut memo).unwrap();
    assert!(rep.in_census);
    assert_eq!(rep.groups, vec!["trivial".to_string()]);
    assert_eq!(rep.records.len(), 1);
    match &rep.records[0].verdict {
        Main10Verdict::Witness { lattice, minimum: m, root_rank, .. } => {
            assert_eq!(*m, 2);
            assert_eq!(*root_rank, 1);
            let e8_2 = parse_builtin("A1+E8(2)").unwrap();
            assert!(is_isometric(lattice, &e8_2).unwrap().is_some());
            // one pair +-r
            assert_eq!(roots(lattice).unwrap().len(), 1);
        }
        other => panic!("{:?}", other),
    }
}

#[test]
fn rank_nine_seed_d4_a1_five() {
    let r = RootSystem::parse("D4+A1^5").unwrap();
    let mut memo = RootGenusMemo::default();
    let rep = run_seed(&r, CensusCaps::default(), &mut memo).unwrap();
    // det 128 is below Delta_9, so the bound gives nothing here
    assert!(!rep.in_census);
    assert!(matches!(rep.ade.outcomes[0].1, AdeOutcome::Error { .. }));
    let e = memo.entry(&r, Default::default()).unwrap();
    assert!(e.genus_complete);
    assert_eq!(e.genus_classes, 2);
    assert!(e.witnesses.is_empty());
    assert!(matches!(rep.records[0].verdict, Main10Verdict::Unknown { genus_complete: true, .. }));
}

#[test]
fn a1_eight_has_no_witness() {
    let r = RootSystem::parse("A1^8").unwrap();
    let c = overlattice_census(&r, &[], CensusCaps::default()).unwrap();
    let ade = ade(&[r.clone()], Default::default(), &mut RootGenusMemo::default()).unwrap();
    let v = main10_verify(&r, &[], &c.overlattices[0].lattice, &ade, CensusCaps::default()).unwrap();
    assert!(matches!(v, Main10Verdict::Unknown { genus_complete: true, .. }));
}

#[test]
fn exception_is_excluded() {
    let r = RootSystem::parse("E8+E8+A1").unwrap();
    let ade = AdeReport { list: vec![], outcomes: vec![] };
    let v = main10_verify(&r, &[], &r.lattice(), &ade, CensusCaps::default()).unwrap();
    assert!(matches!(v, Main10Verdict::Excluded));
}

#[test]
fn sum_with_a_covered_summand() {
    // A1^9 + A1 is covered by A1^9 and the witness carries over
    let mut memo = RootGenusMemo::default();
    let ade = ade(&[RootSystem::parse("A1^9").unwrap(), RootSystem::parse("A1^10").unwrap()], Default::default(), &mut memo).unwrap();
    assert_eq!(ade.list.len(), 1);
    let r = RootSystem::parse("A1^10").unwrap();
    let v = main10_verify(&r, &[], &r.lattice(), &ade, CensusCaps::default()).unwrap();
    match v {
        Main10Verdict::Witness { lattice, .. } => {
            assert_eq!(minimum(&lattice).unwrap(), 2);
            assert!(k3e_core::genus::same_genus(&lattice, &r.lattice()).unwrap());
        }
        other => panic!("{:?}", other),
    }
}

#[test]
fn glue_transfers_to_genus_mates() {
    // A1^10 / Z2 with weight-4 glue; the genus-mate A1 + E8(2) + A1 carries it
    let r = RootSystem::parse("A1^10").unwrap();
    let mut memo = RootGenusMemo::default();
    let ade = ade(&[RootSystem::parse("A1^9").unwrap()], Default::default(), &mut memo).unwrap();
    let c = overlattice_census(&r, &[2], CensusCaps::default()).unwrap();
    assert!(!c.overlattices.is_empty());
    for m in &c.overlattices {
        let v = main10_verify(&r, &m.glue, &m.lattice, &ade, CensusCaps::default()).unwrap();
        match v {
            Main10Verdict::Witness { lattice, minimum: mm, root_rank, .. } => {
                assert_eq!(mm, 2);
                assert!(root_rank < 10);
                assert!(k3e_core::genus::same_genus(&lattice, &m.lattice).unwrap());
            }
            other => panic!("{}: {:?}", m.lattice.name().unwrap_or(""), other),
        }
    }
}
