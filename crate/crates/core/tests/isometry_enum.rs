use k3e_core::classify::data::rank2_table;
use k3e_core::discriminant::{overlattice, DiscriminantForm, IsotropicSubgroup};
use k3e_core::enumeration::{is_root_overlattice, minimum, root_rank, roots, short_vectors};
use k3e_core::isometry::{automorphism_group, is_isometric, restriction_surjective, Surjectivity, DEFAULT_NODE_CAP};
use k3e_core::lattice::{parse_builtin, IntLattice};

/// Automorphisms counted as pairs of images of the basis with the right norms and pairing.
fn brute_aut_order_rank2(l: &IntLattice) -> u128 {
    let g = l.gram();
    let bound = g[(0, 0)].abs().max(g[(1, 1)].abs());
    let sv = short_vectors(l, bound).unwrap();
    let mut vs = Vec::new();
    for v in &sv.vectors {
        vs.push(v.clone());
        vs.push(v.iter().map(|x| -x).collect::<Vec<_>>());
    }
    let mut count = 0;
    for a in &vs {
        for b in &vs {
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() == 1 && l.norm(a) == g[(0, 0)] && l.norm(b) == g[(1, 1)] && l.pair(a, b) == g[(0, 1)] {
                count += 1;
            }
        }
    }
    count
}

#[test]
fn table_two_lattices_are_surjective() {
    for l in rank2_table() {
        let r = restriction_surjective(&l, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(r.verdict, Surjectivity::True, "{}", l.name().unwrap());
        assert!(r.automorphism_search_complete);
    }
}

#[test]
fn binary_automorphism_orders_match_brute_force() {
    for l in rank2_table() {
        let aut = automorphism_group(&l, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(aut.order, brute_aut_order_rank2(&l), "{}", l.name().unwrap());
        for w in &aut.generators {
            assert!(w.verify(&l, &l));
        }
    }
}

#[test]
fn weyl_group_orders() {
    // |W(A_n)| = (n+1)!, and -1 is outside W(A_n) for n >= 2
    assert_eq!(automorphism_group(&parse_builtin("A3").unwrap(), DEFAULT_NODE_CAP).unwrap().order, 2 * 24);
    assert_eq!(automorphism_group(&parse_builtin("A1^4").unwrap(), DEFAULT_NODE_CAP).unwrap().order, 16 * 24);
    assert_eq!(automorphism_group(&parse_builtin("E6").unwrap(), DEFAULT_NODE_CAP).unwrap().order, 2 * 51_840);
}

#[test]
fn root_facts() {
    let e8 = parse_builtin("E8").unwrap();
    assert_eq!(e8.determinant(), 1);
    assert_eq!(minimum(&e8).unwrap(), 2);
    assert_eq!(roots(&e8).unwrap().len(), 120);
    let mixed = parse_builtin("A1+E8(2)").unwrap();
    assert_eq!(root_rank(&mixed).unwrap(), 1);
    assert!(!is_root_overlattice(&mixed).unwrap());
    assert!(is_root_overlattice(&parse_builtin("D4").unwrap()).unwrap());
    assert_eq!(parse_builtin("A1^8").unwrap().determinant(), 256);
}

#[test]
fn a1_four_glue_gives_d4() {
    let l = parse_builtin("A1^4").unwrap();
    let f = DiscriminantForm::of(&l);
    let glue = f.class_of_pairing(&[1, 1, 1, 1]).unwrap();
    let s = IsotropicSubgroup::new(&f, vec![glue]).unwrap();
    let m = overlattice(&l, &f, &s).unwrap();
    let w = is_isometric(&m.lattice, &parse_builtin("D4").unwrap()).unwrap();
    assert!(w.is_some());
}
