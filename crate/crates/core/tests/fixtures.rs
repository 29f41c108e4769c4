//! Pinned values that are cheap enough for every test run.

use gl2rep::tree::{invariant_dims, invariants_by_enumeration, twist_symmetry_check, PiTruncation};
use gl2rep::weights::{hom_space, find_invertible, KRep, SymRep, VerifyOptions, Weight};
use gl2rep::zq::SubgroupSpec;

fn truncation(r: u32, lambda: u32, m: u32) -> PiTruncation {
    PiTruncation::with_default_precision(Weight::new(5, r, 0).unwrap(), lambda, m).unwrap()
}

#[test]
fn bar_r_dimensions() {
    assert_eq!(truncation(1, 0, 2).bar_r_dims().unwrap(), [2, 10, 50]);
    assert_eq!(truncation(1, 1, 2).bar_r_dims().unwrap(), [2, 12, 60]);
    assert_eq!(truncation(2, 0, 1).bar_r_dims().unwrap(), [3, 15]);
}

#[test]
fn supersingular_k1_invariants() {
    let opts = VerifyOptions::default();
    for r in [1, 2] {
        let q = truncation(r, 0, 2);
        assert_eq!(invariant_dims(&q, &SubgroupSpec::k1(5).unwrap(), &opts, false).unwrap().dim, 8);
    }
}

#[test]
fn h_invariants_match_enumeration() {
    let q = truncation(1, 0, 1);
    let spec = SubgroupSpec::h(5).unwrap();
    let direct = gl2rep::weights::invariants(&q, &spec, &VerifyOptions::default()).unwrap().dim;
    assert_eq!(direct, invariants_by_enumeration(&q, &spec).unwrap().dim);
}

#[test]
fn twist_symmetry_r0() {
    let (a, b) = twist_symmetry_check(5, 0, &SubgroupSpec::k1(5).unwrap(), &VerifyOptions::default()).unwrap();
    assert_eq!((a, b), (9, 9));
}

#[test]
fn sym_homs_detect_isomorphism() {
    let p = 7;
    let prec = 2;
    let a = SymRep::new(Weight::new(p, 3, 1).unwrap(), prec);
    let b = SymRep::new(Weight::new(p, 3, 1).unwrap(), prec);
    let c = SymRep::new(Weight::new(p, 3, 2).unwrap(), prec);
    let ab = hom_space(&a, &b).unwrap();
    assert_eq!(ab.dim, 1);
    assert!(find_invertible(&ab, 10, 1).is_some());
    assert_eq!(hom_space(&a, &c).unwrap().dim, 0);
    assert_eq!(a.dim(), 4);
}
