use k3e_core::enumeration::roots;
use k3e_core::genus::{genus_explore, genus_non_root_overlattice_witness, p_neighbors, unique_in_genus, GenusCaps, NonRootWitness, Uniqueness, NEIGHBOR_PRIMES};
use k3e_core::isometry::is_isometric;
use k3e_core::lattice::parse_builtin;

#[test]
fn a1_eight_is_alone_in_its_genus() {
    let l = parse_builtin("A1^8").unwrap();
    let ex = genus_explore(&l, &NEIGHBOR_PRIMES, GenusCaps::default()).unwrap();
    assert!(ex.complete);
    assert_eq!(ex.classes.len(), 1);
    assert_eq!(ex.primes_used, vec![3]);
    let (w, _) = genus_non_root_overlattice_witness(&l, GenusCaps::default()).unwrap();
    assert!(matches!(w, NonRootWitness::NoneInExplored { complete: true }));
}

#[test]
fn a1_nine_has_two_classes() {
    let l = parse_builtin("A1^9").unwrap();
    let ex = genus_explore(&l, &NEIGHBOR_PRIMES, GenusCaps::default()).unwrap();
    assert!(ex.complete);
    assert_eq!(ex.classes.len(), 2);
    let other = parse_builtin("A1+E8(2)").unwrap();
    let matched: Vec<_> = ex.classes.iter().filter(|c| is_isometric(c, &other).unwrap().is_some()).collect();
    assert_eq!(matched.len(), 1);
    assert_eq!(roots(matched[0]).unwrap().len(), 1);
    let (u, _) = unique_in_genus(&l, GenusCaps::default()).unwrap();
    assert!(matches!(u, Uniqueness::False { .. }));
}

#[test]
fn three_neighbors_of_a1_nine_reach_the_other_class() {
    let l = parse_builtin("A1^9").unwrap();
    let other = parse_builtin("A1+E8(2)").unwrap();
    let ns = p_neighbors(&l, 3).unwrap();
    assert!(ns.iter().any(|n| is_isometric(n, &other).unwrap().is_some()));
}
