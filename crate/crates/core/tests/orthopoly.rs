use icewall::orthopoly::*;
use icewall::quadrature::QuadraturePlan;
use icewall::*;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[test]
fn p_n_orthonormal_on_shifted_contour() {
    // x = 2u - i turns ∫ p_j p_k ω dx into 2 sin φ ∫ P_j P_k e^{2φu}/(1+e^{2πu}) du
    let phi = c(1.1);
    let pi = std::f64::consts::PI;
    let plan = QuadraturePlan::for_tails(2.2, 2.0 * pi - 2.2, 10.0, 1e-18, 1.0, 32).unwrap();
    for j in 0..=5 {
        for k in 0..=5 {
            let v = plan.integrate_complex(|u| {
                let xc = C64::new(2.0 * u, -1.0);
                let pj = p_n_eval(j, &xc, &phi).unwrap();
                let pk = p_n_eval(k, &xc, &phi).unwrap();
                // ω(2u - i) = e^{-iφ} e^{2φu} / (1 + e^{2πu})
                pj * pk * weight_shifted(&(2.0 * u), &phi).unwrap() * (-C64::i() * phi).exp() * 2.0
            });
            let expect = if j == k { 1.0 } else { 0.0 };
            assert!((v - c(expect)).norm() < 1e-10, "({j},{k}) {v}");
        }
    }
}

#[test]
fn meixner_orthogonality() {
    let cc = c(0.4);
    let one = c(1.0);
    for j in 0..=5 {
        for k in 0..=5 {
            let mut s = c(0.0);
            for x in 0..200usize {
                let xc = c(x as f64);
                s += meixner_eval(j, &xc, &one, &cc).unwrap() * meixner_eval(k, &xc, &one, &cc).unwrap() * 0.4f64.powi(x as i32);
            }
            let expect = if j == k { meixner_norm(j, &cc).re } else { 0.0 };
            assert!((s.re - expect).abs() < 1e-10 * expect.max(1.0), "({j},{k})");
        }
    }
}

#[test]
fn laguerre_orthogonality_and_limit() {
    let plan = QuadraturePlan::half_line(1.0, 10.0, 1e-20, 1.0, 32).unwrap();
    for j in 0..=5 {
        for k in 0..=5 {
            let v = plan.integrate(|x| (laguerre_eval(j, &c(x)) * laguerre_eval(k, &c(x))).re * (-x).exp());
            let expect = if j == k { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-10, "({j},{k}) {v}");
        }
    }
    let eps = 1e-4;
    let phi = 0.7;
    for n in 0..=6 {
        for x in [-1.2, 0.3, 2.5] {
            let mp = mp_eval(n, &c(0.5), &c(x / eps), &c(eps * phi));
            let l = laguerre_eval(n, &c(-2.0 * phi * x));
            assert!((mp - l).norm() < 1e-6 * l.norm().max(1.0), "n={n} x={x}");
        }
    }
}

#[test]
fn connection_formula_residuals() {
    let xs: Vec<f64> = (0..20).map(|i| -3.0 + 0.31 * i as f64).collect();
    let check = |n: usize, lam: f64, tau: f64, phi: f64| {
        let coeffs = connection_coeffs(n, &c(lam), &c(tau), &c(phi)).unwrap();
        for &x in &xs {
            let lhs = mp_eval(n, &c(lam), &c(x), &c(tau));
            let rhs = mp_sequence(n, &c(lam), &c(x), &c(phi))
                .iter()
                .zip(&coeffs)
                .fold(c(0.0), |acc, (p, k)| acc + p * k);
            assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0), "n={n} lam={lam} x={x}");
        }
    };
    check(3, 0.5, 1.1, 0.7);
    for n in 0..=6 {
        check(n, 1.0, 1.1, 0.7);
    }
}

#[test]
fn inm_closed_against_quadrature() {
    let (tau, omega, phi) = (c(0.9), c(1.3), 0.6);
    let plan = inm_plan(2, 3, 0.5, phi).unwrap();
    let q = inm_quadrature(2, 3, 0.5, &tau, &omega, phi, &plan).unwrap();
    assert!(q.is_clean(), "{:?}", q.warnings);
    let closed = inm_closed(2, 3, &0.5, &tau, &omega, &c(phi)).unwrap();
    assert!((q.value - closed).norm() < 1e-10 * closed.norm().max(1.0), "{} vs {closed}", q.value);

    let v = inm_quadrature(0, 0, 0.5, &c(0.4), &c(0.8), std::f64::consts::FRAC_PI_2, &inm_plan(0, 0, 0.5, 1.5707963267948966).unwrap())
        .unwrap()
        .value;
    assert!((v - c(0.5)).norm() < 1e-12);

    for n in [0, 2, 4] {
        for m in [1, 3, 4] {
            let plan = inm_plan(n, m, 1.0, 1.2).unwrap();
            let q = inm_quadrature(n, m, 1.0, &c(0.5), &c(1.0), 1.2, &plan).unwrap().value;
            let swapped = inm_quadrature(m, n, 1.0, &c(1.0), &c(0.5), 1.2, &plan).unwrap().value;
            let closed = inm_closed(n, m, &1.0, &c(0.5), &c(1.0), &c(1.2)).unwrap();
            assert!((q - closed).norm() < 1e-10 * closed.norm().max(1.0));
            assert!((q - swapped).norm() < 1e-12 * q.norm().max(1.0));
        }
    }
}

#[test]
fn inm_reduces_to_norms() {
    let phi = c(0.8);
    for lam in [0.5, 1.0] {
        for n in 0..5 {
            for m in 0..5 {
                let v = inm_closed(n, m, &lam, &phi, &phi, &phi).unwrap();
                if n == m {
                    let norm = gamma_real(&(n as f64 + 2.0 * lam))
                        / gamma_real(&(n as f64 + 1.0))
                        / (2.0 * 0.8f64.sin()).powf(2.0 * lam);
                    assert!((v.re - norm).abs() < 1e-12 * norm);
                } else {
                    assert!(v.norm() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn exp_jplus_binomial_entries() {
    let g = c(0.42);
    let e = exp_jplus_entries(&g, &c(0.5), 4);
    let binom = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]];
    for n in 0..4 {
        for m in 0..=n {
            let expect = 0.42f64.powi((n - m) as i32) * binom[n][m];
            assert!((e[(n, m)].re - expect).abs() < 1e-15);
        }
    }
}
