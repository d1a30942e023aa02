use k3e_core::arith::{distinct_prime_count, is_prime_power};
use k3e_core::classify::rank3::*;
use k3e_core::ns::NefStatus;

fn condition_c_naive(k: i64) -> bool {
    let mut r = 1;
    while r * r < k {
        if (k - 1) % r != 0 {
            return false;
        }
        r += 1;
    }
    true
}

#[test]
fn zero_entropy_scan_to_500() {
    let zero: Vec<i64> = (2..=500).filter(|&k| classify_fast(k).unwrap().zero_entropy).collect();
    assert_eq!(zero, L1.to_vec());
    for k in 2..=500 {
        let v = classify_fast(k).unwrap();
        assert_eq!(v.condition_c, condition_c_naive(k));
        assert_eq!(v.prime_power, is_prime_power(k as u64));
        assert_eq!(v.zero_entropy, v.condition_c && v.prime_power);
    }
}

#[test]
fn condition_c_fails_beyond_121() {
    assert!(condition_c(121) == condition_c_naive(121));
    assert!((122..=10_000).all(|k| !condition_c(k)));
}

#[test]
fn g_k_has_two_to_the_m_elements() {
    for k in 2..=500 {
        let g = g_k(k);
        assert_eq!(g.len(), 1 << distinct_prime_count(k as u64), "k={}", k);
        for x in &g {
            assert_eq!((x * x) % (4 * k), 1);
        }
    }
    for (k, classes) in [(6, 2), (30, 4), (210, 8), (8, 1), (27, 1)] {
        assert_eq!(classify_fast(k).unwrap().fibration_classes, classes);
    }
}

#[test]
fn candidate_fibers_are_primitive_isotropic() {
    for k in [2, 3, 4, 5, 8, 9, 25, 27] {
        let ns = ns(k).unwrap();
        for (_, e) in candidate_fibers(k, 6).unwrap() {
            assert_eq!(ns.self_int(&e), 0);
            assert!(e.is_primitive());
            assert!(e.z.iter().all(|&g| g >= 0 && g < e.y));
        }
    }
    assert!(candidate_fibers(6, 3).is_err());
}

#[test]
fn positive_entropy_witnesses() {
    for k in 2..=40 {
        let v = classify(k).unwrap();
        if v.zero_entropy {
            assert!(v.witness.is_none());
            continue;
        }
        let w = v.witness.expect("witness for positive entropy");
        let ns = ns(k).unwrap();
        assert_eq!(ns.self_int(&w.class), 0);
        assert_ne!(w.nef, NefStatus::NotNef, "k={}", k);
        assert_ne!(w.class, ns.fiber());
    }
    assert!(classify(1).is_err());
}

#[test]
fn genus_one_census() {
    for k in [2, 3, 5, 7, 13] {
        assert_eq!(genus1_census(k).unwrap().count, 0, "k={}", k);
    }
    for (k, p) in [(4, 2), (9, 3), (25, 5)] {
        let c = genus1_census(k).unwrap();
        assert!(c.count > 0);
        assert_eq!(c.degrees, vec![p], "k={}", k);
        let ns = ns(k).unwrap();
        for e in &c.classes {
            assert_eq!(ns.pair(e, &ns.fiber()), p);
        }
    }
    let nine = genus1_census(9).unwrap();
    assert!(nine.classes.iter().all(|e| e.z == vec![1] || e.z == vec![2]));
    assert!(genus1_census(6).is_err());
}
