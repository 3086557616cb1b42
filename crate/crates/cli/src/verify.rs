use anyhow::Result;
use clap::ValueEnum;
use icewall::enumeration::{config_iterator, enumerate_configs, partition_dp};
use icewall::finite::*;
use icewall::fredholm::*;
use icewall::hankel::*;
use icewall::linalg::{self, det, max_abs, max_abs_diff};
use icewall::orthopoly::*;
use icewall::params::check_unitarity;
use icewall::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Identities,
    Kernels,
    Appendix,
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: &'static str,
    pub invariant: String,
    pub deviation: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: &'static str,
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub passed: bool,
}

struct Collector {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Collector {
    fn new(suite: &'static str) -> Self {
        Collector { suite, checks: Vec::new() }
    }

    /// Records `deviation <= threshold`; an evaluation error counts as an
    /// infinite deviation.
    fn check(&mut self, invariant: impl Into<String>, threshold: f64, deviation: Result<f64>) {
        let (deviation, invariant) = match deviation {
            Ok(d) => (d, invariant.into()),
            Err(e) => (f64::INFINITY, format!("{} ({e:#})", invariant.into())),
        };
        self.checks.push(Check {
            suite: self.suite,
            invariant,
            deviation,
            threshold,
            passed: deviation <= threshold,
        });
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

const SAMPLES: [(f64, f64); 3] = [(0.9, 0.3), (1.1, 0.25), (1.4, 0.5)];
const ASM: [u64; 6] = [1, 2, 7, 42, 429, 7436];

pub fn run(suite: Suite) -> Report {
    let mut checks = Vec::new();
    if matches!(suite, Suite::Identities | Suite::All) {
        checks.extend(identities());
    }
    if matches!(suite, Suite::Kernels | Suite::All) {
        checks.extend(kernels());
    }
    if matches!(suite, Suite::Appendix | Suite::All) {
        checks.extend(appendix());
    }
    let passed = checks.iter().all(|c| c.passed);
    Report {
        schema: 1,
        command: "verify",
        suite,
        checks,
        passed,
    }
}

fn identities() -> Vec<Check> {
    let mut col = Collector::new("identities");

    col.check("R-matrix unitarity", 1e-12, (|| {
        let mut worst = 0f64;
        for i in 0..10 {
            for j in 0..10 {
                let nu = -1.9 + 0.41 * i as f64;
                let eta = 0.07 + 0.137 * j as f64;
                if [nu + 2.0 * eta, nu - 2.0 * eta].iter().any(|v: &f64| v.sin().abs() < 1e-2) {
                    continue;
                }
                worst = worst.max(check_unitarity(&c(nu), &c(eta), &1e-12)?.max_deviation);
            }
        }
        Ok(worst)
    })());

    col.check("Hankel split H = A(phi-) - A(phi+)", 1e-12, (|| {
        let mut worst = 0f64;
        for (l, e) in SAMPLES {
            let p = ModelParams64::real(l, e);
            let h = hankel_h(6, &p)?;
            let d = &matrix_a(6, &p.phi_minus())? - &matrix_a(6, &p.phi_plus())?;
            worst = worst.max(max_abs_diff(&h, &d) / max_abs(&d));
        }
        Ok(worst)
    })());

    for n in 1..=10 {
        let ctx = PrecisionContext::for_order(n);
        col.check(format!("det A closed form and alpha variant, N = {n}"), ctx.tolerance_f64(), ctx.run(|| {
            let mut worst = 0f64;
            for (re, im, are) in [(0.7, 0.0, 0.3), (1.9, 0.4, -1.1), (0.35, -0.25, 2.0)] {
                let phi = CMp::new(Mp::cst(re), Mp::cst(im));
                let alpha = CMp::new(Mp::cst(are), Mp::cst(0.5));
                let d = det(&matrix_a(n, &phi)?)?.rel_deviation(&det_a_closed(n, &phi)?);
                let da = alpha_det_numeric(n, &phi, &alpha)?.rel_deviation(&alpha_det(n, &phi, &alpha)?);
                worst = worst.max(d.to_f64_approx()).max(da.to_f64_approx());
            }
            Ok(worst)
        }));
    }

    col.check("ASM counts N = 1..6", 0.0, (|| {
        let mut worst = 0f64;
        for (n, &expect) in ASM.iter().enumerate() {
            let got = enumerate_configs(n + 1, &VertexWeights64::uniform(c(1.0)))?.config_count;
            worst = worst.max((got as f64 - expect as f64).abs());
        }
        Ok(worst)
    })());

    col.check("n6 - n5 = N on every configuration, N <= 6", 0.0, (|| {
        let mut bad = 0usize;
        for n in 1..=6 {
            bad += config_iterator(n)?
                .filter(|cfg| {
                    let t = cfg.type_counts();
                    t[5] != t[4] + n
                })
                .count();
        }
        Ok(bad as f64)
    })());

    col.check("DP equals enumeration, N <= 6", 1e-12, (|| {
        let w = VertexWeights64::new([c(1.3), C64::new(0.4, 0.7), c(0.8), C64::new(1.1, -0.2), c(0.6), C64::new(0.9, 0.5)]);
        let mut worst = 0f64;
        for n in 1..=6 {
            worst = worst.max(partition_dp(n, &w)?.rel_deviation(&enumerate_configs(n, &w)?.z_value));
        }
        Ok(worst)
    })());

    col.check("ice point Z_N = (sqrt3/2)^(N^2) A_N", 1e-10, (|| {
        let p = ModelParams64::real(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_6);
        let mut worst = 0f64;
        for (n, &a) in ASM.iter().enumerate().map(|(i, a)| (i + 1, a)) {
            let expect = LogScaled64::from_polar_log((n * n) as f64 * (0.75f64.sqrt()).ln() + (a as f64).ln(), 0.0);
            worst = worst.max(partition_hankel_mp(n, &p, &PrecisionContext::for_order(n))?.value.rel_deviation(&expect));
        }
        Ok(worst)
    })());

    col.check("Hankel equals W determinant, N <= 12", 1e-10, (|| {
        let p = ModelParams64::real(0.9, 0.3);
        let mut worst = 0f64;
        for n in 1..=12 {
            let ctx = PrecisionContext::for_order(n);
            let h = partition_hankel_mp(n, &p, &ctx)?;
            if !h.is_clean() {
                return Ok(f64::INFINITY);
            }
            worst = worst.max(h.value.rel_deviation(&full_partition_mp(n, &p, &ctx)?.value));
        }
        Ok(worst)
    })());

    col.checks
}

fn kernels() -> Vec<Check> {
    let mut col = Collector::new("kernels");
    let disordered = |n: usize, l: f64, e: f64| -> Result<f64> {
        let p = ModelParams64::real(l, e);
        let f = fredholm_det_auto(&KernelSpec::disordered(n, &p)?, DEFAULT_CONVERGENCE_TOL)?;
        Ok(f.value.rel_deviation(&z_tilde_det(n, &p)?.value))
    };
    for (l, e) in SAMPLES {
        col.check(format!("disordered Fredholm = det(I - zeta W), N <= 3, ({l}, {e})"), 1e-8, (|| {
            (1..=3).try_fold(0f64, |m, n| Ok(m.max(disordered(n, l, e)?)))
        })());
    }

    col.check("discrete Meixner kernel = continued det(I - zeta W), N <= 4", 1e-8, (|| {
        let mut worst = 0f64;
        for (tp, tm) in [(0.8, 0.3), (1.2, 0.5)] {
            let p = ModelParams64::from_phis(C64::new(0.0, tp), C64::new(0.0, tm));
            for n in 1..=4 {
                let f = fredholm_det_auto(&KernelSpec::discrete(n, c(tp), c(tm))?, DEFAULT_CONVERGENCE_TOL)?;
                worst = worst.max(f.value.rel_deviation(&z_tilde_det(n, &p)?.value));
            }
        }
        Ok(worst)
    })());

    col.check("rational Laguerre kernel = det(I - W rational), N <= 4", 1e-8, (|| {
        let mut worst = 0f64;
        for (l, e) in [(0.9, 0.3), (1.5, 0.2)] {
            for n in 1..=4 {
                let f = fredholm_det_auto(&KernelSpec::rational_from(n, l, e)?, DEFAULT_CONVERGENCE_TOL)?;
                worst = worst.max(f.value.rel_deviation(&z_tilde_det_rational(n, &l, &e)?));
            }
        }
        Ok(worst)
    })());

    col.check("trace moments tr(V^n) = zeta^n tr(W^n), n <= 3", 1e-8, (|| {
        let mut worst = 0f64;
        let p = ModelParams64::real(0.9, 0.3);
        for n in [2, 3] {
            let spec = KernelSpec::disordered(n, &p)?;
            let t = trace_moments(&spec, &spec.default_discretization()?, 3)?;
            let bg = BetaGamma::from_params(&p)?;
            let zw = w_matrix(n, &bg).scale(&bg.zeta);
            let mut pw = zw.clone();
            for tk in t {
                worst = worst.max(rel(tk, pw.trace()));
                pw = pw.matmul(&zw)?;
            }
        }
        Ok(worst)
    })());

    col.check("W closed = hypergeometric = Gauss = integral, N <= 6", 1e-10, (|| {
        let mut worst = 0f64;
        for (l, e) in SAMPLES {
            let p = ModelParams64::real(l, e);
            let bg = BetaGamma::from_params(&p)?;
            let gauss = w_matrix_gauss(6, &bg)?;
            for j in 0..6 {
                for k in 0..6 {
                    let w = w_entry(j, k, &bg);
                    let int = w_entry_integral(j, k, &p, &w_integral_plan(j, k, &p)?)?.value;
                    worst = worst
                        .max(rel(w_entry_hypergeometric(j, k, &bg)?, w))
                        .max(rel(gauss[(j, k)], w))
                        .max(rel(int, w));
                }
            }
        }
        Ok(worst)
    })());

    col.check("Christoffel-Darboux closed form = direct sum", 1e-9, (|| {
        let mut worst = 0f64;
        for n in 1..=8 {
            for (x, y) in [(0.3, -1.2), (2.0, 2.0 + 1e-9), (-0.7, 1.9)] {
                let d = cd_kernel_direct(n, &c(x), &c(y), &c(1.1))?;
                worst = worst.max(rel(cd_kernel(n, &c(x), &c(y), &c(1.1))?, d));
            }
        }
        Ok(worst)
    })());

    let eps = 1e-4;
    col.check("rational limit of the disordered kernel, eps = 1e-4", 1e-5, (|| {
        let (lt, et) = (0.9, 0.3);
        let pp = lt + et;
        let small = ModelParams64::real(eps * lt, eps * et);
        let mut worst = 0f64;
        for n in 1..=4 {
            for (sx, sy) in [(0.5, 1.3), (2.0, 0.7)] {
                let k = kernel_disordered(&(-sx / (2.0 * pp * eps)), &(-sy / (2.0 * pp * eps)), n, &small)?;
                let r = kernel_rational(&sx, &sy, n, &((lt - et) / pp))?;
                worst = worst.max((k / (eps * 2.0 * pp) - c(r)).norm() / r.abs());
            }
        }
        Ok(worst)
    })());

    col.check("Meixner-Pollaczek to Laguerre limit, eps = 1e-4", 1e-5, (|| {
        let mut worst = 0f64;
        for n in 0..=6 {
            for x in [-1.2, 0.3, 2.5] {
                let l = laguerre_eval(n, &c(-1.4 * x));
                worst = worst.max(rel(mp_eval(n, &c(0.5), &c(x / eps), &c(eps * 0.7)), l));
            }
        }
        Ok(worst)
    })());

    col.checks
}

fn appendix() -> Vec<Check> {
    let mut col = Collector::new("appendix");

    col.check("connection formula residual, n <= 10", 1e-12, (|| {
        let mut worst = 0f64;
        for (lam, tau, phi) in [(0.5, 1.1, 0.7), (1.0, 0.4, 1.9)] {
            for n in 0..=10 {
                let coeffs = connection_coeffs(n, &c(lam), &c(tau), &c(phi))?;
                for i in 0..12 {
                    let x = c(-2.0 + 0.37 * i as f64);
                    let seq = mp_sequence(n, &c(lam), &x, &c(phi));
                    let rhs = seq.iter().zip(&coeffs).fold(c(0.0), |a, (p, k)| a + p * k);
                    let scale = seq.iter().zip(&coeffs).fold(1f64, |s, (p, k)| s.max((p * k).norm()));
                    worst = worst.max((mp_eval(n, &c(lam), &x, &c(tau)) - rhs).norm() / scale);
                }
            }
        }
        Ok(worst)
    })());

    for lam in [0.5, 1.0] {
        col.check(format!("I_nm closed form = quadrature, n, m <= 8, lambda = {lam}"), 1e-10, (|| {
            let (tau, omega, phi) = if lam == 0.5 { (0.9, 1.3, 0.6) } else { (0.5, 1.0, 1.2) };
            let mut worst = 0f64;
            for n in 0..=8 {
                for m in 0..=8 {
                    let q = inm_quadrature(n, m, lam, &c(tau), &c(omega), phi, &inm_plan(n, m, lam, phi)?)?;
                    worst = worst.max(rel(q.value, inm_closed(n, m, &lam, &c(tau), &c(omega), &c(phi))?));
                }
            }
            Ok(worst)
        })());
    }

    col.check("su(1,1) commutation relations, M <= 12", 1e-12, (|| {
        let mut worst = 0f64;
        for m in 2..=12 {
            for conv in [Su11Convention::Half, Su11Convention::General] {
                let j = su11_matrices(m, &c(0.75), conv)?;
                for r in j.commutator_residuals()? {
                    worst = worst.max(max_abs(&r));
                }
            }
        }
        Ok(worst)
    })());

    col.check("exp(alpha J+) closed form = series", 1e-12, (|| {
        let mut worst = 0f64;
        for m in 2..=12 {
            let j = su11_matrices(m, &c(0.5), Su11Convention::General)?;
            let series = exp_nilpotent(&j.j_plus.scale(&c(0.6)))?;
            let closed = exp_jplus_entries(&c(0.6), &c(0.5), m);
            worst = worst.max(max_abs_diff(&series, &closed) / max_abs(&closed));
        }
        Ok(worst)
    })());

    col.check("key conjugation identity, masked blocks M <= 12", 1e-12, PrecisionContext::default().run(|| {
        let mut worst = 0f64;
        for lam in [0.5, 1.0, 1.5] {
            for alpha in [-0.8, 0.37, 1.0 / 0.9f64.tan()] {
                for m in 3..=12 {
                    let a = CMp::new(Mp::cst(alpha), Mp::cst(0.0));
                    let l = CMp::new(Mp::cst(lam), Mp::cst(0.0));
                    worst = worst.max(key_conjugation_check(&a, &l, m)?.to_f64_approx());
                }
            }
        }
        Ok(worst)
    }));

    col.check("trace identities det(1 + prod exp A_i) = det(1 + exp sum A_i)", 1e-12, (|| {
        let a = linalg::Matrix::diag(&[c(0.3), c(-1.0), C64::new(0.7, 0.2)]);
        let b = linalg::Matrix::diag(&[c(0.1), c(0.4), c(-0.2)]);
        let mut worst = trace_identity_check(&[a, b])?;
        let bg = BetaGamma::from_params(&ModelParams64::real(0.9, 0.3))?;
        for n in 1..=6 {
            worst = worst.max(ztr_identity_check(n, &bg)?);
        }
        Ok(worst)
    })());

    col.checks
}
