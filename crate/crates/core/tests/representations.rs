use icewall::enumeration::{enumerate_configs, partition_dp};
use icewall::finite::*;
use icewall::hankel::*;
use icewall::linalg::{det, max_abs_diff};
use icewall::orthopoly::mp_eval;
use icewall::params::qgroup_weights;
use icewall::quadrature::QuadraturePlan;
use icewall::*;

const ICE_LAMBDA: f64 = std::f64::consts::FRAC_PI_2;
const ICE_ETA: f64 = std::f64::consts::FRAC_PI_6;

fn ice_value(n: usize, count: f64) -> LogScaled64 {
    LogScaled64::from_polar_log((n * n) as f64 * (3f64.sqrt() / 2.0).ln() + count.ln(), 0.0)
}

#[test]
fn hankel_against_enumeration() {
    let p = ModelParams64::real(0.9, 0.3);
    let z = partition_hankel(1, &p).unwrap().value.to_complex();
    assert!((z - C64::new(0.6f64.sin(), 0.0)).norm() < 1e-15);
    let e = enumerate_configs(3, &VertexWeights64::symmetric(&p)).unwrap();
    let h = partition_hankel_mp(3, &p, &PrecisionContext::for_order(3)).unwrap();
    assert!(h.value.rel_deviation(&e.z_value) < 1e-10);
}

#[test]
fn ice_point_n5() {
    let p = ModelParams64::real(ICE_LAMBDA, ICE_ETA);
    let ctx = PrecisionContext::for_order(5);
    let h = partition_hankel_mp(5, &p, &ctx).unwrap().value;
    assert!(h.rel_deviation(&ice_value(5, 429.0)) < 1e-10);
    let zt = z_tilde_det_mp(5, &p, &ctx).unwrap().value;
    let full = zt * qgroup_prefactor(5, &p);
    assert!(full.rel_deviation(&ice_value(5, 429.0)) < 1e-10);
}

#[test]
fn z_tilde_paths_agree() {
    let p = ModelParams64::real(1.1, 0.25);
    let ctx = PrecisionContext::for_order(8);
    let a = z_tilde_det_mp(8, &p, &ctx).unwrap().value;
    let b = z_tilde_via_ratio_mp(8, &p, &ctx).unwrap().value;
    assert!(a.rel_deviation(&b) < 1e-10);
    let ctx6 = PrecisionContext::for_order(6);
    let c = z_tilde_via_ratio_mp(6, &p, &ctx6).unwrap().value;
    let d = z_tilde_det(6, &p).unwrap().value;
    assert!(c.rel_deviation(&d) < 1e-10);
    let f = z_tilde_factorized(6, &p).unwrap().value;
    assert!(f.rel_deviation(&d) < 1e-10);
}

#[test]
fn z_tilde_against_qgroup_dp() {
    let p = ModelParams64::real(0.9, 0.3);
    let dp = partition_dp(3, &qgroup_weights(&p).unwrap()).unwrap();
    let zt = z_tilde_via_ratio_mp(3, &p, &PrecisionContext::for_order(3)).unwrap().value;
    assert!(zt.rel_deviation(&dp) < 1e-10);
}

#[test]
fn full_partition_against_hankel_and_dp() {
    let p = ModelParams64::real(0.9, 0.3);
    let ctx = PrecisionContext::for_order(4);
    let f = full_partition_mp(4, &p, &ctx).unwrap().value;
    let h = partition_hankel_mp(4, &p, &ctx).unwrap().value;
    assert!(f.rel_deviation(&h) < 1e-10);
    assert!(f.to_complex().im.abs() < 1e-10 * f.to_complex().norm());

    let q = ModelParams64::from_phis(C64::new(0.0, 0.8), C64::new(0.0, 0.3));
    let f = full_partition(4, &q).unwrap().value;
    let dp = partition_dp(4, &VertexWeights64::symmetric(&q)).unwrap();
    assert!(f.rel_deviation(&dp) < 1e-8, "{}", f.rel_deviation(&dp));
}

#[test]
fn matrix_a_closed_forms_high_precision() {
    let ctx = PrecisionContext::new(256).unwrap();
    let dev = |n: usize, re: f64, im: f64| {
        ctx.run(|| {
            let phi = CMp::new(Mp::cst(re), Mp::cst(im));
            let lu = det(&matrix_a(n, &phi).unwrap()).unwrap();
            let closed = det_a_closed(n, &phi).unwrap();
            lu.rel_deviation(&closed).to_f64_approx()
        })
    };
    assert!(dev(2, 0.7, 0.0) < 1e-20);
    assert!(dev(3, 0.7, 0.0) < 1e-20);
    assert!(dev(4, 0.3, 0.2) < 1e-20);
    let alpha_dev = ctx.run(|| {
        let phi = CMp::new(Mp::cst(0.5), Mp::cst(0.0));
        let alpha = CMp::new(Mp::cst(1.0), Mp::cst(0.0));
        let lu = alpha_det_numeric(3, &phi, &alpha).unwrap();
        lu.rel_deviation(&alpha_det(3, &phi, &alpha).unwrap()).to_f64_approx()
    });
    assert!(alpha_dev < 1e-18);
    let v = alpha_det(2, &C64::new(0.7, 0.0), &C64::new(0.0, 0.0)).unwrap().to_complex();
    assert!((v.re - 1.4f64.cos() / 0.7f64.sin().powi(4)).abs() < 1e-13);
}

#[test]
fn hankel_entries_from_generating_function() {
    // H_{jk} = ∂^{j+k}_ε [cot(φ₋+ε) - cot(φ₊+ε)] at ε = 0
    let p = ModelParams64::real(0.9, 0.3);
    let h = hankel_h(2, &p).unwrap();
    let g = |e: f64| 1.0 / (0.6 + e).tan() - 1.0 / (1.2 + e).tan();
    let s = 1e-4;
    let d1 = (g(s) - g(-s)) / (2.0 * s);
    let d2 = (g(s) - 2.0 * g(0.0) + g(-s)) / (s * s);
    assert!((h[(0, 0)].re - g(0.0)).abs() < 1e-12);
    assert!((h[(0, 1)].re - d1).abs() < 1e-6);
    assert!((h[(1, 0)].re - d1).abs() < 1e-6);
    assert!((h[(1, 1)].re - d2).abs() < 1e-6);
}

#[test]
fn w_matrix_three_ways() {
    let p = ModelParams64::real(0.9, 0.3);
    let bg = BetaGamma::from_params(&p).unwrap();
    let plan = w_integral_plan(3, 2, &p).unwrap();
    let w00 = w_entry_integral(0, 0, &p, &plan).unwrap();
    assert!(w00.is_clean());
    assert!((w00.value - C64::new(0.6f64.sin() / 1.2f64.sin(), 0.0)).norm() < 1e-10);
    let w32 = w_entry_integral(3, 2, &p, &plan).unwrap().value;
    assert!((w32 - w_entry(3, 2, &bg)).norm() < 1e-10);
    let w23 = w_entry_integral(2, 3, &p, &plan).unwrap().value;
    assert!((w32 - w23).norm() < 1e-12);
}

#[test]
fn w_eigenvalues_positive_on_samples() {
    for (l, e) in [(0.9, 0.3), (1.1, 0.25), (1.4, 0.5)] {
        let k = k_n_log(6, &ModelParams64::real(l, e));
        assert!(k.is_ok(), "({l},{e}): {:?}", k.err());
    }
}

#[test]
fn jacobi_matrix_eigenvector() {
    let nu = 0.8;
    let m = 40;
    let k = k_infty_matrix(m, &C64::new(nu, 0.0)).unwrap();
    let x = 1.3;
    let half = C64::new(0.5, 0.0);
    let v: Vec<C64> = (0..m).map(|n| mp_eval(n, &half, &C64::new(x / 2.0, 0.0), &C64::new(nu, 0.0))).collect();
    let kv = k.mul_vec(&v).unwrap();
    for n in 0..30 {
        assert!((kv[n] - v[n] * x).norm() < 1e-8 * v[n].norm().max(1.0), "n={n}");
    }
    // similarity-symmetrizable: K_{n,n+1} K_{n+1,n} > 0
    for n in 0..m - 1 {
        assert!((k[(n, n + 1)] * k[(n + 1, n)]).re > 0.0);
    }
}

#[test]
fn k_log_round_trip_and_convergence_probe() {
    let p = ModelParams64::real(1.1, 0.25);
    for n in [2, 5, 8] {
        let k = k_n_log(n, &p).unwrap().map(|&v| C64::new(0.5 * v, 0.0));
        let w = expm(&k).unwrap();
        let bg = BetaGamma::from_params(&p).unwrap();
        assert!(max_abs_diff(&w, &w_matrix(n, &bg)) < 1e-10);
    }
    let devs = k_n_convergence(&p, &[8, 16, 32], 3).unwrap();
    println!("K_N top-left 3x3 deviation from K_inf at N = 8, 16, 32: {devs:?}");
    assert!(devs.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn ztr_product_identity() {
    for (l, e) in [(0.9, 0.3), (1.1, 0.25)] {
        let bg = BetaGamma::from_params(&ModelParams64::real(l, e)).unwrap();
        for n in 1..=6 {
            assert!(ztr_identity_check(n, &bg).unwrap() < 1e-12);
        }
    }
    let a = linalg::Matrix::diag(&[C64::new(0.3, 0.0), C64::new(-1.0, 0.0), C64::new(0.7, 0.2)]);
    let b = linalg::Matrix::diag(&[C64::new(0.1, 0.0), C64::new(0.4, 0.0), C64::new(-0.2, 0.0)]);
    assert!(trace_identity_check(&[a, b]).unwrap() < 1e-15);
}

#[test]
fn pv_moments_match_matrix_a() {
    let phi = C64::new(0.9, 0.0);
    let a = matrix_a(4, &phi).unwrap();
    for k in 0..=6 {
        let plan: QuadraturePlan = icewall::orthopoly::pv_moment_plan(k, &phi).unwrap();
        let m = icewall::orthopoly::pv_moment(k, &phi, &plan).unwrap();
        let (j, l) = (k.min(3), k - k.min(3));
        assert!((m - a[(j, l)]).norm() < 1e-10 * a[(j, l)].norm().max(1.0), "k={k}: {m} vs {}", a[(j, l)]);
    }
}

#[test]
fn gauss_partition_matches_hankel() {
    let p = ModelParams64::real(1.1, 0.25);
    for n in 1..=6 {
        let g = full_partition_gauss(n, &p).unwrap().value;
        let h = partition_hankel_mp(n, &p, &PrecisionContext::for_order(n)).unwrap().value;
        assert!(g.rel_deviation(&h) < 1e-10, "N={n}");
    }
}

#[test]
fn rational_partition_matches_dp() {
    let (l, e) = (0.9, 0.3);
    let w = VertexWeights64::from_abc(C64::new(l + e, 0.0), C64::new(l - e, 0.0), C64::new(2.0 * e, 0.0));
    for n in 1..=5 {
        let z = rational_partition(n, &l, &e).unwrap();
        let dp = partition_dp(n, &w).unwrap();
        assert!(z.rel_deviation(&dp) < 1e-10, "N={n}: {}", z.rel_deviation(&dp));
    }
}
