use k3e_core::discriminant::{overlattice, DiscriminantForm, IsotropicSubgroup};
use k3e_core::enumeration::short_vectors;
use k3e_core::genus::same_genus;
use k3e_core::isometry::is_isometric;
use k3e_core::lattice::IntLattice;
use k3e_core::matrix::IntMatrix;
use num_traits::ToPrimitive;
use proptest::prelude::*;

/// Negative definite even Gram matrices of rank 1..=max_rank.
fn even_negative(max_rank: usize) -> impl Strategy<Value = IntLattice> {
    (1..=max_rank)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(1i64..=5, n), prop::collection::vec(-3i64..=3, n * (n - 1) / 2)))
        .prop_filter_map("not definite", |(n, diag, off)| {
            let mut g = IntMatrix::zeros(n, n);
            let mut k = 0;
            for i in 0..n {
                g[(i, i)] = -2 * diag[i];
                for j in i + 1..n {
                    g[(i, j)] = off[k];
                    g[(j, i)] = off[k];
                    k += 1;
                }
            }
            IntLattice::new(g).ok().filter(|l| l.is_definite())
        })
}

fn unimodular(n: usize) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec((0..n, 0..n, -2i64..=2), 0..8).prop_map(move |ops| {
        let mut m = IntMatrix::identity(n);
        for (i, j, c) in ops {
            if i != j {
                for col in 0..n {
                    let v = m[(j, col)];
                    m[(i, col)] += c * v;
                }
            }
        }
        m
    })
}

fn brute_short(l: &IntLattice, bound: i64) -> usize {
    // |x_i|^2 <= bound * (G^-1)_ii for the positive form -G
    let g = l.gram().scaled(-1);
    let inv = g.inverse_rational().unwrap();
    let n = l.rank();
    let boxes: Vec<i64> = (0..n).map(|i| ((&inv[i][i] * num_rational::BigRational::from_integer(bound.into())).to_f64().unwrap().sqrt().floor() as i64) + 1).collect();
    let mut x: Vec<i64> = boxes.iter().map(|b| -b).collect();
    let mut count = 0;
    loop {
        let norm = g.bilinear(&x, &x);
        if norm > 0 && norm <= bound {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == n {
                return count / 2;
            }
            x[i] += 1;
            if x[i] <= boxes[i] {
                break;
            }
            x[i] = -boxes[i];
            i += 1;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, rng_algorithm: proptest::test_runner::RngAlgorithm::ChaCha, rng_seed: proptest::test_runner::RngSeed::Fixed(0), failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rescaling_multiplies_det(l in even_negative(5), m in 1i64..=6) {
        let s = l.rescale(m).unwrap();
        prop_assert_eq!(s.determinant_big(), l.determinant_big() * num_bigint::BigInt::from(m).pow(l.rank() as u32));
        prop_assert!(s.primitive_scale_divisor() % m == 0);
    }

    #[test]
    fn discriminant_order_is_det(l in even_negative(4)) {
        let f = DiscriminantForm::of(&l);
        prop_assert_eq!(f.order() as i64, l.determinant().abs());
        let mut prev = 1;
        for &d in f.orders() {
            prop_assert!(d % prev == 0 && d > 1);
            prev = d;
        }
    }

    #[test]
    fn overlattices_satisfy_the_index_identity(l in even_negative(3), m in 2i64..=4, pick in any::<prop::sample::Index>()) {
        let l = l.rescale(m).unwrap();
        let f = DiscriminantForm::of(&l);
        prop_assume!(f.order() <= 1 << 14);
        let iso: Vec<Vec<i64>> = f.elements(1 << 14).unwrap().into_iter().filter(|x| x.iter().any(|&c| c != 0) && f.is_isotropic(x)).collect();
        prop_assume!(!iso.is_empty());
        let s = IsotropicSubgroup::new(&f, vec![pick.get(&iso).clone()]).unwrap();
        let over = overlattice(&l, &f, &s).unwrap();
        let k = s.order() as i64;
        prop_assert_eq!(over.lattice.determinant() * k * k, l.determinant());
        prop_assert_eq!(over.index, s.order());
        prop_assert!((0..l.rank()).all(|i| over.lattice.gram()[(i, i)] % 2 == 0));
    }

    #[test]
    fn short_vectors_match_box_search(l in even_negative(3), bound in 2i64..=12) {
        let sv = short_vectors(&l, bound).unwrap();
        prop_assert_eq!(sv.len(), brute_short(&l, bound));
        for (v, n) in sv.vectors.iter().zip(&sv.norms) {
            prop_assert_eq!(l.norm(v), *n);
        }
    }

    #[test]
    fn basis_change_is_an_isometry((l, u) in even_negative(4).prop_flat_map(|l| { let n = l.rank(); (Just(l), unimodular(n)) })) {
        let moved = IntLattice::new(l.gram().congruent(&u)).unwrap();
        let w = is_isometric(&l, &moved).unwrap();
        prop_assert!(w.is_some());
        prop_assert!(w.unwrap().verify(&l, &moved));
        prop_assert!(same_genus(&l, &moved).unwrap());
    }

    #[test]
    fn direct_sum_det_is_product(a in even_negative(3), b in even_negative(2)) {
        let s = a.direct_sum(&b);
        prop_assert_eq!(s.determinant(), a.determinant() * b.determinant());
        prop_assume!(s.determinant().abs() <= 4096);
        let f = DiscriminantForm::of(&s);
        let g = DiscriminantForm::of(&a).orthogonal_sum(&DiscriminantForm::of(&b));
        prop_assert!(f.isomorphism_to(&g, 1 << 14).unwrap().is_some());
    }
}
