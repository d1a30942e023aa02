use k3e_core::lattice::{rank_one, IntLattice};
use k3e_core::matrix::IntMatrix;
use k3e_core::ns::{DivisorClass, NSLattice};
use proptest::prelude::*;
use proptest::test_runner::{RngAlgorithm, RngSeed};

fn reduced_isotropic(ns: &NSLattice, beta_max: i64) -> Vec<DivisorClass> {
    let mut out = Vec::new();
    for beta in 1..=beta_max {
        for g in 0..beta {
            if let Some(e) = ns.complete_isotropic(beta, &[g]) {
                if e.is_primitive() {
                    out.push(e);
                }
            }
        }
    }
    out
}

#[test]
fn nef_test_agrees_with_brute_force_small_k() {
    for k in 2..=16 {
        let ns = NSLattice::new(rank_one(-2 * k).unwrap()).unwrap();
        for e in reduced_isotropic(&ns, 5) {
            let fast = ns.is_nef_isotropic(&e).unwrap();
            let slow = ns.nef_brute_oracle(&e, 4 * k * k, 4 * k).unwrap();
            assert_eq!(fast.is_nef(), slow.witness.is_none(), "k={} E={}", k, e);
            if let Some(c) = fast.witness.as_ref().filter(|_| !fast.is_nef()) {
                assert_eq!(ns.self_int(c), -2);
                assert!(ns.pair(&e, c) < 0);
            }
        }
    }
}

fn small_even_negative() -> impl Strategy<Value = IntLattice> {
    (1usize..=3)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(2i64..=6, n), prop::collection::vec(-2i64..=2, n * (n - 1) / 2)))
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

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, rng_algorithm: RngAlgorithm::ChaCha, rng_seed: RngSeed::Fixed(7), failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn gamma_shift_keeps_the_verdict(l in small_even_negative(), gamma in prop::collection::vec(-6i64..=6, 3), beta in 1i64..=6, coord in 0usize..3, shift in -2i64..=2) {
        let ns = NSLattice::new(l).unwrap();
        let r = ns.rank_l();
        let gamma: Vec<i64> = gamma[..r].to_vec();
        let e = ns.complete_isotropic(beta, &gamma);
        prop_assume!(e.as_ref().is_some_and(|e| e.is_primitive()));
        let e = e.unwrap();
        let mut moved = gamma.clone();
        moved[coord % r] += shift * beta;
        let e2 = ns.complete_isotropic(beta, &moved).unwrap();
        let a = ns.is_nef_isotropic(&e).unwrap();
        let b = ns.is_nef_isotropic(&e2).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(ns.reduce_periodic(&e).unwrap(), ns.reduce_periodic(&e2).unwrap());
    }

    #[test]
    fn intersection_identity(l in small_even_negative(), gamma in prop::collection::vec(-5i64..=5, 3), z in prop::collection::vec(-5i64..=5, 3), bi in any::<prop::sample::Index>(), yi in any::<prop::sample::Index>()) {
        // E.C = m  <=>  Q(y gamma - beta z) = beta (beta + m y)
        let ns = NSLattice::new(l).unwrap();
        let r = ns.rank_l();
        let (gamma, z) = (gamma[..r].to_vec(), z[..r].to_vec());
        let divs = |n: i64| -> Vec<i64> { if n == 0 { (1..=6).collect() } else { (1..=n.abs()).filter(|d| n % d == 0).collect() } };
        let beta = *bi.get(&divs(ns.q(&gamma)));
        let e = ns.complete_isotropic(beta, &gamma).unwrap();
        let n = ns.q(&z) - 1;
        let y = *yi.get(&divs(n));
        let c = DivisorClass::new(y + n / y, y, z.clone());
        prop_assert_eq!(ns.self_int(&e), 0);
        prop_assert_eq!(ns.self_int(&c), -2);
        let m = ns.pair(&e, &c);
        let v: Vec<i64> = gamma.iter().zip(&z).map(|(g, zi)| y * g - beta * zi).collect();
        prop_assert_eq!(ns.q(&v), beta * (beta + m * y));
    }
}
