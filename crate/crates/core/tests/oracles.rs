#![allow(clippy::excessive_precision)]

use pam_core::chaos::{gamma_n, log_path_sum, max_log_gamma_n, stirling_exponents, stirling_lb_check, term_bound, BoundMode};
use pam_core::params::FractionalParams;
use pam_core::paths::ExponentVector;
use pam_core::quadrature::{tanh_sinh, QuadOptions};
use pam_core::simplex::{closed_form, SimplexIntegralSpec};
use pam_core::special::ln_gamma;

fn ev(a: &[u8]) -> ExponentVector {
    ExponentVector::new(a.to_vec()).unwrap()
}

#[test]
fn gamma_n_matches_frozen_high_precision_values() {
    // products of gamma ratios evaluated at 30 digits from the tilde exponents
    let cases: [(&[u8], f64, f64, f64); 5] = [
        (&[1, 1, 2, 0], 0.75, 0.3, 1.024_467_192_446_320_4),
        (&[2, 0, 1, 1], 0.75, 0.3, 0.976_117_153_749_067_1),
        (&[1, 1, 1, 1], 0.75, 0.3, 1.0),
        (&[2, 1, 1, 0], 0.8, 0.3, 0.892_190_684_148_705_9),
        (&[1, 2, 0, 1, 1], 0.6, 0.3, 0.850_202_656_223_263_4),
    ];
    for (a, h0, h, want) in cases {
        let p = FractionalParams::new(h0, h).unwrap();
        let got = gamma_n(&ev(a), &p).unwrap();
        assert!((got - want).abs() < 1e-12, "{a:?}: {got} vs {want}");
    }
}

#[test]
fn largest_gamma_exceeds_one_at_some_parameters() {
    let p = FractionalParams::new(0.75_f64, 0.3).unwrap();
    assert!(max_log_gamma_n(4, &p).unwrap() > 0.02);
    let all_ones = gamma_n(&ExponentVector::all_ones(4).unwrap(), &p).unwrap();
    assert!((all_ones - 1.0).abs() < 1e-12);
}

#[test]
fn simplex_closed_form_satisfies_its_recursion() {
    let alphas = [0.3, -0.4, 0.7];
    let betas = [-0.5, 0.2, -0.3];
    let t = 1.7;
    for n in 2..=3 {
        let full = closed_form(&SimplexIntegralSpec::new(t, alphas[..n].to_vec(), betas[..n].to_vec())).unwrap();
        let inner = SimplexIntegralSpec::new(1.0, alphas[..n - 1].to_vec(), betas[..n - 1].to_vec());
        let q = tanh_sinh(
            |s: f64, left, right| {
                left.powf(alphas[n - 1]) * right.powf(betas[n - 1]) * closed_form(&inner.with_t(s)).unwrap().value
            },
            0.0,
            t,
            &QuadOptions::with_rel_tol(1e-12),
        );
        assert!(((q.value - full.value) / full.value).abs() < 1e-9, "n={n}: {} vs {}", q.value, full.value);
    }
}

#[test]
fn first_chaos_bound_matches_direct_quadrature() {
    let p = FractionalParams::new(0.75, 0.3).unwrap();
    let (h0, h) = (p.h0(), p.h());
    let alpha = 1.0 - 2.0 * h;
    let at = (2.0 * h - 2.0) / (4.0 * h0);
    let bt = -(alpha + 1.0) / (4.0 * h0);
    for t in [0.5, 1.0, 3.0] {
        let q = tanh_sinh(|_, s: f64, r: f64| s.powf(at) * r.powf(bt), 0.0, t, &QuadOptions::with_rel_tol(1e-13));
        let want = (alpha + 1.0) / (4.0 * h0) * t.ln()
            + q.value.ln()
            + (p.c_h().ln() + ln_gamma((1.0 + alpha) / 2.0)) / (2.0 * h0);
        let got = log_path_sum(1, t, &p).unwrap();
        assert!((got - want).abs() < 1e-10, "t={t}");
        let bound = term_bound(1, t, &p, BoundMode::ExactConstants).unwrap();
        assert!((bound.log_bound - 2.0 * h0 * want).abs() < 1e-10);
    }
}

#[test]
fn exact_bound_is_nondecreasing_in_time() {
    let p = FractionalParams::new(0.85, 0.2).unwrap();
    for n in [1, 3, 8] {
        let mut prev = f64::NEG_INFINITY;
        for t in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let b = term_bound(n, t, &p, BoundMode::ExactConstants).unwrap().log_bound;
            assert!(b >= prev);
            prev = b;
        }
    }
}

#[test]
fn stirling_threshold_examples() {
    let p = FractionalParams::new(0.75_f64, 0.25).unwrap();
    let (a, b) = stirling_exponents(&p);
    assert!((a - 0.5).abs() < 1e-15 && (b + 0.5).abs() < 1e-15);
    let check = stirling_lb_check(a, b, 0.5, 1, 200).unwrap();
    assert!(check.threshold <= 200);
    assert_eq!(stirling_lb_check(1.0, 0.0, 1.0, 1, 300).unwrap().threshold, 1);
    assert!(stirling_lb_check(0.5, 0.0, 2.0, 1, 500).is_err());
}
