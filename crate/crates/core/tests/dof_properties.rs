use misodof::alpha::{int, rat, AffineAlpha, Rational};
use misodof::channel::CsitQuality;
use misodof::dofcalc::*;
use misodof::schemes::*;
use proptest::prelude::*;
use std::sync::OnceLock;

fn catalog() -> &'static [SchemeSpec] {
    static CAT: OnceLock<Vec<SchemeSpec>> = OnceLock::new();
    CAT.get_or_init(builtin_catalog)
}

fn harmonic(k: i64) -> Rational {
    (1..=k).map(|i| rat(1, i)).sum()
}

fn q(a: Rational) -> CsitQuality {
    CsitQuality::new(a).unwrap()
}

#[test]
fn printed_totals() {
    let x1 = dof_symbolic(&build_x1()).unwrap();
    assert_eq!(x1.total, AffineAlpha::new(rat(18, 11), rat(15, 11)));
    for u in 0..3 {
        assert_eq!(x1.user(u), AffineAlpha::new(rat(6, 11), rat(5, 11)));
    }
    assert_eq!(
        dof_symbolic(&build_x5()).unwrap().total,
        AffineAlpha::new(rat(3, 2), rat(1, 2))
    );
    for k in 2..=8i64 {
        let d = dof_symbolic(&build_x3(k as usize).unwrap()).unwrap();
        // K(1-α)/H_K + Kα
        let c0 = int(k) / harmonic(k);
        assert_eq!(d.total, AffineAlpha::new(c0.clone(), int(k) - c0), "K={k}");
    }
}

#[test]
fn one_slot_asymmetric_vertices() {
    for a in [int(0), rat(1, 3), int(1)] {
        for t in 0..3 {
            let d = dof_at(&build_x2(t).unwrap(), &q(a.clone())).unwrap();
            let want: Vec<Rational> = (0..3)
                .map(|u| if u == t { int(1) } else { a.clone() })
                .collect();
            assert_eq!(d, want);
        }
        for k in 2..=8 {
            for t in [0, k - 1] {
                let d = dof_at(&build_x4(k, t).unwrap(), &q(a.clone())).unwrap();
                for (u, v) in d.iter().enumerate() {
                    assert_eq!(*v, if u == t { int(1) } else { a.clone() });
                }
            }
        }
    }
}

#[test]
fn endpoints() {
    let at = |s: &SchemeSpec, a: Rational| -> Vec<Rational> { dof_at(s, &q(a)).unwrap() };
    let total = |v: Vec<Rational>| -> Rational { v.into_iter().sum() };
    for s in [build_x1(), build_x3(3).unwrap(), build_mat(3).unwrap()] {
        assert_eq!(total(at(&s, int(0))), rat(18, 11), "{}", s.name);
    }
    for s in [
        build_x1(),
        build_x3(3).unwrap(),
        build_zf(3, false).unwrap(),
    ] {
        assert_eq!(at(&s, int(1)), vec![int(1); 3], "{}", s.name);
    }
    for k in 2..=8 {
        let x3 = build_x3(k).unwrap();
        assert_eq!(at(&x3, int(0)), at(&build_mat(k).unwrap(), int(0)));
        assert_eq!(at(&x3, int(1)), vec![int(1); k]);
    }
    let x5 = build_x5();
    assert_eq!(total(at(&x5, int(0))), rat(3, 2));
    assert_eq!(total(at(&x5, int(1))), int(2));
    assert_eq!(total(at(&build_tdma(3).unwrap(), rat(1, 2))), int(1));
}

#[test]
fn affine_closure_and_monotonicity() {
    let grid = [int(0), rat(1, 4), rat(1, 2), rat(3, 4), int(1)];
    for s in catalog() {
        let d = dof_symbolic(s).unwrap();
        // each dof_at call re-validates; keep the largest schemes to one point
        let points = if s.slot_count() > 500 {
            &grid[2..3]
        } else {
            &grid[..]
        };
        for a in points {
            let direct = dof_at(s, &q(a.clone())).unwrap();
            let via: Vec<Rational> = d.users().iter().map(|x| x.eval(a)).collect();
            assert_eq!(direct, via, "{}", s.name);
        }
        let is_mixed = s.name == "x1" || s.name == "x5" || s.name.starts_with("x3:");
        if is_mixed {
            assert!(d.total.c1 >= int(0), "{} total decreases in α", s.name);
        }
    }
}

#[test]
fn builtins_validate_and_roundtrip() {
    for s in catalog() {
        let r = validate(s);
        assert!(r.is_valid(), "{}: {:?}", s.name, r.violations.first());
        assert_eq!(&from_json(&to_json(s)).unwrap(), s);
    }
}

fn tight_lists() -> &'static [Vec<TightSymbol>] {
    static TIGHT: OnceLock<Vec<Vec<TightSymbol>>> = OnceLock::new();
    TIGHT.get_or_init(|| catalog().iter().map(tight_fresh_symbols).collect())
}

fn small_positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..=40, 1i64..=40).prop_map(|(n, d)| rat(n, d * 10))
}

#[test]
fn every_builtin_has_tight_symbols() {
    for (s, t) in catalog().iter().zip(tight_lists()) {
        assert!(!t.is_empty(), "{}", s.name);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn inflating_a_tight_payload_breaks_validation(
        scheme in any::<prop::sample::Index>(),
        sym in any::<prop::sample::Index>(),
        eps in small_positive_rational(),
    ) {
        let i = scheme.index(catalog().len());
        let s = &catalog()[i];
        let tight = &tight_lists()[i];
        let id = &tight[sym.index(tight.len())].id;
        let r = validate(&inflate_payload(s, id, &eps));
        prop_assert!(!r.is_valid(), "{}/{id} + {eps} still validates", s.name);
    }

    #[test]
    fn dof_at_is_affine_in_alpha(n in 0i64..=60, which in 0usize..6) {
        let names = ["x1", "x5", "x3:3", "x2:1", "zf:3", "x4:5:2"];
        let s = resolve_scheme(names[which]).unwrap();
        let a = rat(n, 60);
        let d0 = dof_at(&s, &q(int(0))).unwrap();
        let d1 = dof_at(&s, &q(int(1))).unwrap();
        let da = dof_at(&s, &q(a.clone())).unwrap();
        for u in 0..s.k {
            let lerp = &d0[u] + (&d1[u] - &d0[u]) * &a;
            prop_assert_eq!(&da[u], &lerp);
        }
    }
}
