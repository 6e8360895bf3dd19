use misodof::alpha::{int, rat, Rational};
use misodof::beamform::{apply, norm, null_space_unit, span_unit, zf_precoder_set};
use misodof::channel::{error_variance, sample_episode, CsitQuality, SnrPoint};
use misodof::schemes::build_zf;
use misodof::sim::{estimate_slope, mean_term_power, TermProbe};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn q(a: Rational) -> CsitQuality {
    CsitQuality::new(a).unwrap()
}

#[test]
fn error_statistics_over_many_entries() {
    for a in [int(0), rat(1, 2), int(1)] {
        for p in [1e2, 1e4] {
            let snr = SnrPoint::from_linear(p).unwrap();
            let quality = q(a.clone());
            // 3 x 4 x 8334 ≈ 10^5 entries
            let ep = sample_episode(3, 4, 8334, &quality, &snr, 2024).unwrap();
            let errs: Vec<Complex64> = ep
                .slots
                .iter()
                .flat_map(|s| s.error().iter().copied().collect::<Vec<_>>())
                .collect();
            assert!(errs.len() >= 100_000);
            let n = errs.len() as f64;
            let mean = errs.iter().sum::<Complex64>() / n;
            let var = errs.iter().map(|e| (e - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
            let want = error_variance(&quality, &snr);
            assert!(
                ((var - want) / want).abs() < 0.05,
                "α={a} P={p}: {var} vs {want}"
            );
            assert!(mean.norm() / want.sqrt() < 0.02, "α={a} P={p}: mean {mean}");

            let truth: Vec<Complex64> = ep.slots.iter().map(|s| s.h_true[(0, 0)]).collect();
            let m = truth.len() - 1;
            let corr = (0..m)
                .map(|i| truth[i] * truth[i + 1].conj())
                .sum::<Complex64>()
                / m as f64;
            assert!(corr.norm() < 0.02, "slot correlation {corr}");
        }
    }
}

fn complex_row(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b)),
        n,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn null_vectors_are_unit_and_orthogonal(r1 in complex_row(3), r2 in complex_row(3)) {
        prop_assume!(norm(&r1) > 1e-3 && norm(&r2) > 1e-3);
        let rows = vec![r1.clone(), r2.clone()];
        let v = null_space_unit(&rows, 3).unwrap();
        prop_assert!((v.norm() - 1.0).abs() < 1e-10);
        for r in &rows {
            prop_assert!(apply(r, &v.v).norm() <= 1e-9 * norm(r));
        }
        prop_assert_eq!(null_space_unit(&rows, 3).unwrap(), v);
    }

    #[test]
    fn span_vector_collects_the_whole_norm(r in complex_row(3)) {
        prop_assume!(norm(&r) > 1e-3);
        let v = span_unit(&r).unwrap();
        prop_assert!((v.norm() - 1.0).abs() < 1e-10);
        prop_assert!((apply(&r, &v.v).norm() - norm(&r)).abs() < 1e-9);
    }

    #[test]
    fn zf_two_users_in_three_dimensions(r1 in complex_row(3), r2 in complex_row(3)) {
        prop_assume!(norm(&r1) > 1e-3 && norm(&r2) > 1e-3);
        let h = DMatrix::from_fn(2, 3, |i, j| if i == 0 { r1[j] } else { r2[j] });
        let p = zf_precoder_set(&h).unwrap();
        prop_assert!(apply(&r2, &p[0].v).norm() < 1e-9);
        prop_assert!(apply(&r1, &p[1].v).norm() < 1e-9);
    }
}

#[test]
fn zf_leakage_follows_the_error_exponent() {
    let zf = build_zf(3, false).unwrap();
    let grid = [40.0, 50.0, 60.0, 70.0, 80.0];
    let probe = TermProbe {
        user: 0,
        slot: 1,
        symbol: "z1".into(),
    };
    for a in [int(0), rat(1, 4), rat(1, 2), int(1)] {
        let pts = mean_term_power(&zf, &a, &grid, 300, 9, &probe).unwrap();
        let logs: Vec<(f64, f64)> = pts.iter().map(|&(db, p)| (db, p.log2())).collect();
        let (slope, _) = estimate_slope(&logs, (40.0, 80.0)).unwrap();
        let want = 1.0 - misodof::alpha::to_f64(&a);
        assert!(
            (slope - want).abs() < 0.1,
            "α={a}: slope {slope}, want {want}"
        );
    }
}

#[test]
fn perfect_alpha_cross_terms_stay_flat() {
    let zf = build_zf(3, false).unwrap();
    let probe = TermProbe {
        user: 2,
        slot: 1,
        symbol: "z0".into(),
    };
    let pts = mean_term_power(&zf, &int(1), &[80.0], 300, 4, &probe).unwrap();
    let exponent = pts[0].1.log2() / (1e8f64).log2();
    assert!(exponent < 0.1, "{exponent}");
}
