use icewall::finite::{w_matrix, z_tilde_det, BetaGamma};
use icewall::fredholm::*;
use icewall::linalg::det;
use icewall::orthopoly::meixner_eval;
use icewall::quadrature::QuadraturePlan;
use icewall::*;

fn i_minus(v: &linalg::CMatrix<f64>, zeta: C64) -> linalg::CMatrix<f64> {
    &linalg::Matrix::identity(v.rows()) - &v.scale(&zeta)
}

#[test]
fn disordered_matches_finite_representation() {
    let p = ModelParams64::real(0.9, 0.3);
    let spec = KernelSpec::disordered(3, &p).unwrap();
    let f = fredholm_det_auto(&spec, DEFAULT_CONVERGENCE_TOL).unwrap();
    assert!(f.is_clean(), "{:?}", f.warnings);
    let z = z_tilde_det(3, &p).unwrap().value;
    assert!(f.value.rel_deviation(&z) < 1e-8, "{}", f.value.rel_deviation(&z));
}

#[test]
fn disordered_samples_up_to_six() {
    for (l, e, n) in [(0.9, 0.3, 6), (1.1, 0.25, 5), (1.4, 0.5, 4), (0.7, 0.2, 2), (1.6, 0.7, 3)] {
        let p = ModelParams64::real(l, e);
        let spec = KernelSpec::disordered(n, &p).unwrap();
        let f = fredholm_det_auto(&spec, DEFAULT_CONVERGENCE_TOL).unwrap();
        let z = z_tilde_det(n, &p).unwrap().value;
        assert!(f.value.rel_deviation(&z) < 1e-8, "({l},{e},{n}) {}", f.value.rel_deviation(&z));
    }
}

#[test]
fn rational_matches_finite_representation() {
    let spec = KernelSpec::rational_from(2, 0.9, 0.3).unwrap();
    let f = fredholm_det_auto(&spec, DEFAULT_CONVERGENCE_TOL).unwrap();
    let bg = BetaGamma::rational(&0.9, &0.3).unwrap();
    let z = det(&i_minus(&w_matrix(2, &bg), bg.zeta)).unwrap();
    assert!(f.value.rel_deviation(&z) < 1e-8);
}

#[test]
fn discrete_matches_continued_finite_representation() {
    let (tp, tm) = (0.8, 0.3);
    let spec = KernelSpec::discrete(2, C64::new(tp, 0.0), C64::new(tm, 0.0)).unwrap();
    let f = fredholm_det_auto(&spec, DEFAULT_CONVERGENCE_TOL).unwrap();
    assert!(f.is_clean(), "{:?}", f.warnings);
    let p = ModelParams64::from_phis(C64::new(0.0, tp), C64::new(0.0, tm));
    let z = z_tilde_det(2, &p).unwrap().value;
    assert!(f.value.rel_deviation(&z) < 1e-8, "{}", f.value.rel_deviation(&z));
}

#[test]
fn discrete_kernel_direct_sum() {
    let (tp, tm) = (C64::new(0.7, 0.0), C64::new(0.4, 0.0));
    let c = (tm * -2.0).exp();
    let one = C64::new(1.0, 0.0);
    let n = 3;
    for (x, y) in [(0usize, 0usize), (0, 1), (2, 2), (4, 1)] {
        let k = kernel_discrete(x, y, n, &tp, &tm).unwrap();
        let mut s = C64::new(0.0, 0.0);
        for j in 0..n {
            let mx = meixner_eval(j, &C64::new(x as f64, 0.0), &one, &c).unwrap();
            let my = meixner_eval(j, &C64::new(y as f64, 0.0), &one, &c).unwrap();
            s += mx * my * c.powi(j as i32) * (one - c);
        }
        s *= (tp * (-2.0 * y as f64)).exp();
        assert!((k - s).norm() < 1e-13 * s.norm().max(1.0), "({x},{y}) {k} vs {s}");
    }
}

#[test]
fn rational_limit_of_disordered_kernel() {
    let (lt, et, eps) = (0.9, 0.3, 1e-4);
    let (pp, pm) = (lt + et, lt - et);
    let p = ModelParams64::real(eps * lt, eps * et);
    let n = 3;
    for (sx, sy) in [(0.5, 1.3), (2.0, 0.7), (1.1, 1.1)] {
        let x = -sx / (2.0 * pp);
        let y = -sy / (2.0 * pp);
        let k = kernel_disordered(&(x / eps), &(y / eps), n, &p).unwrap() / (eps * 2.0 * pp);
        let r = kernel_rational(&sx, &sy, n, &(pm / pp)).unwrap();
        assert!((k.re - r).abs() < 1e-5 * r.abs() && k.im.abs() < 1e-5 * r.abs(), "{k} vs {r}");
    }
}

#[test]
fn truncation_extension_is_stable() {
    let spec = KernelSpec::discrete(3, C64::new(0.6, 0.0), C64::new(0.2, 0.0)).unwrap();
    let Discretization::Truncation { x_max } = spec.default_discretization().unwrap() else {
        panic!("expected a truncation")
    };
    let a = fredholm_det(&spec, &Discretization::Truncation { x_max }, 1e-8).unwrap().value;
    let b = fredholm_det(&spec, &Discretization::Truncation { x_max: x_max + 10 }, 1e-8).unwrap().value;
    assert!(a.rel_deviation(&b) < 1e-10);
}

#[test]
fn trace_moments_match_finite_traces() {
    let p = ModelParams64::real(0.9, 0.3);
    let spec = KernelSpec::disordered(2, &p).unwrap();
    let disc = spec.default_discretization().unwrap();
    let t = trace_moments(&spec, &disc, 3).unwrap();
    let bg = BetaGamma::from_params(&p).unwrap();
    let zw = w_matrix(2, &bg).scale(&bg.zeta);
    let mut pw = zw.clone();
    for (k, tk) in t.iter().enumerate() {
        assert!((tk - pw.trace()).norm() < 1e-8, "n={} {tk} vs {}", k + 1, pw.trace());
        pw = pw.matmul(&zw).unwrap();
    }
}

#[test]
fn non_integer_order_smoke() {
    let p = ModelParams64::real(0.45, 0.15);
    let plan = QuadraturePlan::for_tails(1.2, 2.0 * std::f64::consts::PI - 1.2, 6.0, 1e-18, 1.0, 16).unwrap();
    let v = fredholm_det_general_order(C64::new(2.5, 0.0), &p, &plan).unwrap();
    assert!(v.log_magnitude().is_finite());
    let at3 = fredholm_det_general_order(C64::new(3.0, 0.0), &p, &plan).unwrap();
    let z3 = z_tilde_det(3, &p).unwrap().value;
    assert!(at3.rel_deviation(&z3) < 1e-8, "{}", at3.rel_deviation(&z3));
}
