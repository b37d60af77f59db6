use steiner_core::hypercore::{verify_decomposition, Params, RGraph};
use steiner_core::steiner::{build_small, SmallConfig};
use steiner_core::Error;

#[test]
fn small_triple_systems() {
    for n in [7u32, 9, 13, 15, 19] {
        let p = Params::new(3, 2, n).unwrap();
        let (d, rep) = build_small(&p, &SmallConfig::default(), 0).unwrap();
        eprintln!("n={n} {:?}", rep.attempts);
        assert_eq!(d.len() as u32, n * (n - 1) / 6);
        assert!(verify_decomposition(&RGraph::complete(n, 2), &d).is_ok());
    }
}

#[test]
fn small_mode_other_parameters() {
    // S(2,4,13): the projective plane of order 3
    let p = Params::new(4, 2, 13).unwrap();
    let (d, _) = build_small(&p, &SmallConfig::default(), 0).unwrap();
    assert_eq!(d.len(), 13);
    // S(3,4,8)
    let p = Params::new(4, 3, 8).unwrap();
    let (d, _) = build_small(&p, &SmallConfig::default(), 0).unwrap();
    assert_eq!(d.len(), 14);
}

#[test]
fn small_mode_rejects_non_divisible() {
    for n in [8u32, 10, 11, 12, 14] {
        let p = Params::new(3, 2, n).unwrap();
        assert!(matches!(build_small(&p, &SmallConfig::default(), 0), Err(Error::NotDivisible { .. })));
    }
}

#[test]
fn small_mode_is_deterministic() {
    let p = Params::new(3, 2, 13).unwrap();
    let a = build_small(&p, &SmallConfig::default(), 5).unwrap().0;
    let b = build_small(&p, &SmallConfig::default(), 5).unwrap().0;
    assert_eq!(a, b);
}
