use mcg_core::tower::Tower;
use num_bigint::BigUint;

#[test]
fn faithful_level_two_builds_and_is_injective_on_w2() {
    let t = Tower::faithful();
    let l2 = t.level(2).unwrap();
    let pl = l2.perm_level().unwrap();
    assert_eq!(pl.degree(), 16385);
    assert!(pl.certificate.is_some());
    assert_eq!(pl.k, 1);
    assert_eq!(t.check_injective_on_w(2).unwrap(), 16385);
    let below = t.end(1).unwrap();
    assert!(l2.size > below);
    let p = &l2.start + BigUint::from(987654321u64);
    let g = l2.phi_inv(&p).unwrap();
    assert_eq!(l2.phi(&g).unwrap(), p);
}
