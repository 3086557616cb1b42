//! Finite-size representation `Z̃_N = det(I - ζW)`, the Jacobi matrix of the
//! `N → ∞` limit, and matrix-level trace identities.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Diagnosed, Error, Result};
use crate::hankel::qgroup_prefactor;
use crate::linalg::{det, det_with_condition, symmetric_eigen, CMatrix, Matrix};
use crate::logscaled::LogScaledValue;
use crate::mp::{Mp, PrecisionContext};
use crate::orthopoly::{exp_jplus_entries, mp_eval, su11_matrices, weight_shifted, Su11Convention};
use crate::params::{check_sin, ModelParams};
use crate::quadrature::{QuadraturePlan, DEFAULT_NODES_PER_PANEL, DEFAULT_PANEL_WIDTH, DEFAULT_TAIL_TOL};
use crate::scalar::{ComplexFn, Real};
use crate::Warning;

type C<T> = Complex<T>;

/// `β = sin φ₋ / sin φ₊`, `γ = sin 2η / sin φ₊`, `ζ = e^{-2iη}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaGamma<T> {
    pub beta: C<T>,
    pub gamma: C<T>,
    pub zeta: C<T>,
}

impl<T: Real> BetaGamma<T> {
    pub fn from_params(p: &ModelParams<T>) -> Result<Self> {
        let sp = check_sin("phi_plus", &p.phi_plus())?;
        let eta = p.eta();
        let beta = p.phi_minus().csin() / sp.clone();
        let gamma = (eta.clone() + eta.clone()).csin() / sp;
        let m2i_eta = Complex::new(eta.im.clone() + eta.im.clone(), -(eta.re.clone() + eta.re.clone()));
        Ok(BetaGamma {
            beta,
            gamma,
            zeta: m2i_eta.cexp(),
        })
    }

    /// `β = (λ-η)/(λ+η)`, `γ = 2η/(λ+η)`, `ζ = 1`.
    pub fn rational(lambda: &T, eta: &T) -> Result<Self> {
        let s = lambda.clone() + eta.clone();
        if s.is_zero() {
            return Err(Error::SingularParameter("lambda + eta vanishes".into()));
        }
        Ok(BetaGamma {
            beta: Complex::new((lambda.clone() - eta.clone()) / s.clone(), T::zero()),
            gamma: Complex::new((eta.clone() + eta.clone()) / s, T::zero()),
            zeta: C::<T>::one(),
        })
    }
}

/// `W_{jk} = γ^{j+k+1} Σ_n C(j,n) C(k,n) (β/γ)^{2n+1}`, written as
/// `Σ_n C(j,n) C(k,n) β^{2n+1} γ^{j+k-2n}` so that `γ = 0` needs no branch.
pub fn w_entry<T: Real>(j: usize, k: usize, bg: &BetaGamma<T>) -> C<T> {
    let b2 = bg.beta.clone() * bg.beta.clone();
    let mut binom_j = T::one();
    let mut binom_k = T::one();
    let mut sum = C::<T>::zero();
    for n in 0..=j.min(k) {
        if n > 0 {
            binom_j = binom_j * T::usize(j + 1 - n) / T::usize(n);
            binom_k = binom_k * T::usize(k + 1 - n) / T::usize(n);
        }
        let term = bg.beta.clone() * b2.cpowi(n as i64) * bg.gamma.cpowi((j + k - 2 * n) as i64);
        sum = sum + term.rscale(&(binom_j.clone() * binom_k.clone()));
    }
    sum
}

/// `β γ^{j+k} ₂F₁(-j, -k; 1; β²/γ²)`; requires `γ ≠ 0`.
pub fn w_entry_hypergeometric<T: Real>(j: usize, k: usize, bg: &BetaGamma<T>) -> Result<C<T>> {
    if bg.gamma.is_zero() {
        return Err(Error::SingularParameter("gamma = 0 in the hypergeometric form".into()));
    }
    let z = (bg.beta.clone() / bg.gamma.clone()).cpowi(2);
    let minus_k = Complex::new(-T::usize(k), T::zero());
    let f = crate::orthopoly::hyp2f1_terminating(j, &minus_k, &C::<T>::one(), &z)?;
    Ok(bg.beta.clone() * bg.gamma.cpowi((j + k) as i64) * f)
}

/// Default plan for [`w_entry_integral`].
pub fn w_integral_plan(j: usize, k: usize, p: &ModelParams<f64>) -> Result<QuadraturePlan> {
    let re = p.phi_plus().re;
    let pi = std::f64::consts::PI;
    if !(re > 0.0 && re < pi) {
        return Err(Error::Domain(format!("needs 0 < Re phi_plus < pi, got {re}")));
    }
    QuadraturePlan::for_tails(
        2.0 * re,
        2.0 * pi - 2.0 * re,
        (j + k) as f64,
        DEFAULT_TAIL_TOL,
        DEFAULT_PANEL_WIDTH,
        DEFAULT_NODES_PER_PANEL,
    )
}

/// `2 sin φ₋ ∫ P_j(x; φ₋) P_k(x; φ₋) e^{2φ₊x} / (1 + e^{2πx}) dx` with
/// `P = P^{(1/2)}`.
pub fn w_entry_integral(
    j: usize,
    k: usize,
    p: &ModelParams<f64>,
    plan: &QuadraturePlan,
) -> Result<Diagnosed<C<f64>>> {
    let pi = std::f64::consts::PI;
    let phi_p = p.phi_plus();
    let phi_m = p.phi_minus();
    if !(phi_p.re > 0.0 && phi_p.re < pi) {
        return Err(Error::Domain(format!("needs 0 < Re phi_plus < pi, got {}", phi_p.re)));
    }
    let half = Complex::new(0.5, 0.0);
    let f = |x: f64| {
        let xc = Complex::new(x, 0.0);
        let w = weight_shifted(&(2.0 * x), &phi_p).unwrap_or_default();
        mp_eval(j, &half, &xc, &phi_m) * mp_eval(k, &half, &xc, &phi_m) * w
    };
    let value = plan.integrate_complex(f) * phi_m.sin() * 2.0;
    let (lo, hi) = plan.interval();
    let tail = f(lo).norm() / (2.0 * phi_p.re) + f(hi).norm() / (2.0 * pi - 2.0 * phi_p.re);
    let scale = value.norm().max(f64::MIN_POSITIVE);
    let mut warnings = Vec::new();
    if tail > 1e-15 * scale {
        warnings.push(Warning::Convergence {
            what: "W integral tail".into(),
            change: tail / scale,
            tolerance: 1e-15,
        });
    }
    Ok(Diagnosed { value, warnings })
}

pub fn w_matrix<T: Real>(n: usize, bg: &BetaGamma<T>) -> CMatrix<T> {
    Matrix::from_fn(n, n, |j, k| if j <= k { w_entry(j, k, bg) } else { w_entry(k, j, bg) })
}

/// `exp(γJ₊) diag(β^{2n+1}) exp(γJ₋)` from the closed-form exponentials.
pub fn w_matrix_gauss<T: Real>(n: usize, bg: &BetaGamma<T>) -> Result<CMatrix<T>> {
    if n == 0 {
        return Err(Error::Parameter("matrix size must be at least 1".into()));
    }
    let half = Complex::new(T::one() / T::int(2), T::zero());
    let e_plus = exp_jplus_entries(&bg.gamma, &half, n);
    let d = Matrix::diag(&(0..n).map(|k| bg.beta.cpowi(2 * k as i64 + 1)).collect::<Vec<_>>());
    e_plus.matmul(&d)?.matmul(&e_plus.transpose())
}

fn i_minus_zeta_w<T: Real>(n: usize, bg: &BetaGamma<T>) -> CMatrix<T> {
    let w = w_matrix(n, bg);
    Matrix::from_fn(n, n, |j, k| {
        let id = if j == k { C::<T>::one() } else { C::<T>::zero() };
        id - bg.zeta.clone() * w[(j, k)].clone()
    })
}

/// `Z̃_N = det(I - ζW)`.
pub fn z_tilde_det<T: Real>(n: usize, p: &ModelParams<T>) -> Result<Diagnosed<LogScaledValue<T>>> {
    if n == 0 {
        return Err(Error::Parameter("N must be at least 1".into()));
    }
    let bg = BetaGamma::from_params(p)?;
    let cd = det_with_condition(&i_minus_zeta_w(n, &bg))?;
    let warnings = cd.precision_warning(T::mantissa_bits()).into_iter().collect();
    Ok(Diagnosed {
        value: cd.det,
        warnings,
    })
}

pub fn z_tilde_det_mp(
    n: usize,
    p: &ModelParams<f64>,
    ctx: &PrecisionContext,
) -> Result<Diagnosed<LogScaledValue<f64>>> {
    ctx.run(|| {
        let pm: ModelParams<Mp> = p.convert();
        z_tilde_det(n, &pm).map(|d| d.map(|v| v.to_f64()))
    })
}

/// `det(I - W)` for the rational weights.
pub fn z_tilde_det_rational<T: Real>(n: usize, lambda: &T, eta: &T) -> Result<LogScaledValue<T>> {
    let bg = BetaGamma::rational(lambda, eta)?;
    det(&i_minus_zeta_w(n, &bg))
}

/// `Z_N = Z̃_N [sin φ₊]^{N²} e^{-iNφ₋}`.
pub fn full_partition<T: Real>(n: usize, p: &ModelParams<T>) -> Result<Diagnosed<LogScaledValue<T>>> {
    let pref = qgroup_prefactor(n, p);
    Ok(z_tilde_det(n, p)?.map(|v| v * pref))
}

/// [`full_partition`] with `W` built from its Gauss decomposition.
pub fn full_partition_gauss<T: Real>(n: usize, p: &ModelParams<T>) -> Result<Diagnosed<LogScaledValue<T>>> {
    let bg = BetaGamma::from_params(p)?;
    let w = w_matrix_gauss(n, &bg)?;
    let m = Matrix::from_fn(n, n, |j, k| {
        let id = if j == k { C::<T>::one() } else { C::<T>::zero() };
        id - bg.zeta.clone() * w[(j, k)].clone()
    });
    let cd = det_with_condition(&m)?;
    let warnings = cd.precision_warning(T::mantissa_bits()).into_iter().collect();
    Ok(Diagnosed {
        value: cd.det * qgroup_prefactor(n, p),
        warnings,
    })
}

/// Rational-model `Z_N = (λ+η)^{N²} det(I - W)`.
pub fn rational_partition<T: Real>(n: usize, lambda: &T, eta: &T) -> Result<LogScaledValue<T>> {
    let pref = LogScaledValue::from_real(&(lambda.clone() + eta.clone())).powi((n * n) as i64);
    Ok(z_tilde_det_rational(n, lambda, eta)? * pref)
}

pub fn full_partition_mp(
    n: usize,
    p: &ModelParams<f64>,
    ctx: &PrecisionContext,
) -> Result<Diagnosed<LogScaledValue<f64>>> {
    ctx.run(|| {
        let pm: ModelParams<Mp> = p.convert();
        full_partition(n, &pm).map(|d| d.map(|v| v.to_f64()))
    })
}

/// `K = (J₋ + J₊ - 2 cos ν J₀) / sin ν` with `λ = 1/2`.
pub fn k_infty_matrix<T: Real>(m: usize, nu: &C<T>) -> Result<CMatrix<T>> {
    let s = check_sin("nu", nu)?;
    let j = su11_matrices(m, &Complex::new(T::one() / T::int(2), T::zero()), Su11Convention::Half)?;
    let two_cos = nu.ccos() + nu.ccos();
    let k = &(&j.j_minus + &j.j_plus) - &j.j_zero.scale(&two_cos);
    let inv = C::<T>::one() / s;
    Ok(k.scale(&inv))
}

/// Principal `ln W / 2η` for real symmetric `W`.
pub fn k_n_log<T: Real>(n: usize, p: &ModelParams<T>) -> Result<Matrix<T>> {
    let bg = BetaGamma::from_params(p)?;
    let eta = p.eta();
    let tol = T::epsilon() * T::int(64);
    let complex_part = |z: &C<T>| z.im.abs() > tol.clone() * z.cabs();
    if !eta.im.is_zero() || complex_part(&bg.beta) || complex_part(&bg.gamma) {
        return Err(Error::Branch("matrix logarithm is only supported for real beta, gamma".into()));
    }
    let w = w_matrix(n, &bg).map(|z| z.re.clone());
    let (vals, q) = symmetric_eigen(&w)?;
    if let Some(bad) = vals.iter().find(|v| !(**v > T::zero())) {
        return Err(Error::Branch(format!(
            "W has eigenvalue {:e} on the closed negative real axis",
            bad.to_f64_approx()
        )));
    }
    let two_eta = eta.re.clone() + eta.re.clone();
    let logs: Vec<T> = vals.iter().map(|v| v.ln() / two_eta.clone()).collect();
    q.matmul(&Matrix::diag(&logs))?.matmul(&q.transpose())
}

/// [`k_n_log`] at the given precision.
pub fn k_n_log_mp(n: usize, p: &ModelParams<f64>, ctx: &PrecisionContext) -> Result<Matrix<f64>> {
    ctx.run(|| {
        let pm: ModelParams<Mp> = p.convert();
        k_n_log(n, &pm).map(|m| m.map(|v| v.to_f64_approx()))
    })
}

/// [`k_n_log_mp`] with precision doubled from 128 bits until the spectrum
/// of `W` resolves, up to 4096 bits.
pub fn k_n_log_adaptive(n: usize, p: &ModelParams<f64>) -> Result<Matrix<f64>> {
    let mut bits = 128;
    loop {
        match k_n_log_mp(n, p, &PrecisionContext::new(bits)?) {
            Err(Error::Branch(_)) if bits < 4096 => bits *= 2,
            other => return other,
        }
    }
}

/// Max deviation of the top-left `block × block` corner of `k_n_log(N)`
/// from the `N = ∞` Jacobi matrix, for each `N` in `sizes`.
pub fn k_n_convergence(p: &ModelParams<f64>, sizes: &[usize], block: usize) -> Result<Vec<f64>> {
    let k_inf = k_infty_matrix(block.max(2), &p.nu())?;
    sizes
        .iter()
        .map(|&n| {
            let k = k_n_log_adaptive(n, p)?;
            let mut dev: f64 = 0.0;
            for a in 0..block {
                for b in 0..block {
                    dev = dev.max((k_inf[(a, b)] - k[(a, b)]).norm());
                }
            }
            Ok(dev)
        })
        .collect()
}

/// Matrix exponential by scaling and squaring of the Taylor series.
pub fn expm<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: a.cols(),
        });
    }
    let n = a.rows();
    let norm = (0..n).fold(T::zero(), |acc, i| {
        acc.max_of(a.row(i).iter().fold(T::zero(), |s, z| s + z.cabs()))
    });
    let mut squarings = 0u32;
    let mut scale = T::one();
    let half = T::one() / T::int(2);
    while norm.clone() * scale.clone() > half {
        scale = scale * half.clone();
        squarings += 1;
    }
    let b = a.map(|z| z.rscale(&scale));
    let mut acc: CMatrix<T> = Matrix::identity(n);
    let mut term: CMatrix<T> = Matrix::identity(n);
    let eps = T::epsilon();
    for k in 1..200 {
        term = term.matmul(&b)?.map(|z| z.unscale(T::usize(k)));
        acc = &acc + &term;
        let size = term.data().iter().fold(T::zero(), |m, z| m.max_of(z.cabs()));
        if size < eps.clone() * T::cst(1e-3) {
            break;
        }
    }
    for _ in 0..squarings {
        acc = acc.matmul(&acc)?;
    }
    Ok(acc)
}

/// `det(I + s ∏ exp Aᵢ)`.
pub fn det_one_plus_exp_product<T: Real>(matrices: &[CMatrix<T>], s: &C<T>) -> Result<LogScaledValue<T>> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::Parameter("empty matrix list".into()))?;
    let n = first.rows();
    let mut prod: CMatrix<T> = Matrix::identity(n);
    for a in matrices {
        if a.rows() != n || a.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.rows().max(a.cols()),
            });
        }
        prod = prod.matmul(&expm(a)?)?;
    }
    let m = &Matrix::identity(n) + &prod.scale(s);
    det(&m)
}

/// Relative gap between `det(I + ∏ exp Aᵢ)` and `det(I + exp ΣAᵢ)`. The
/// two agree for a singleton and for any commuting family.
pub fn trace_identity_check<T: Real>(matrices: &[CMatrix<T>]) -> Result<T> {
    let lhs = det_one_plus_exp_product(matrices, &C::<T>::one())?;
    let mut sum = matrices[0].clone();
    for a in &matrices[1..] {
        sum = &sum + a;
    }
    let rhs = det_one_plus_exp_product(&[sum], &C::<T>::one())?;
    Ok(lhs.rel_deviation(&rhs))
}

/// Relative gap between `det(I - ζ exp(γJ₊) exp(2 ln β J₀) exp(γJ₋))` and
/// `det(I - ζW)`.
pub fn ztr_identity_check<T: Real>(n: usize, bg: &BetaGamma<T>) -> Result<T> {
    let half = Complex::new(T::one() / T::int(2), T::zero());
    let j = su11_matrices(n.max(2), &half, Su11Convention::Half)?;
    let pick = |m: &CMatrix<T>| m.block(n, n);
    let ln_b = bg.beta.cln();
    let factors = [
        pick(&j.j_plus).scale(&bg.gamma),
        pick(&j.j_zero).scale(&(ln_b.clone() + ln_b)),
        pick(&j.j_minus).scale(&bg.gamma),
    ];
    let lhs = det_one_plus_exp_product(&factors, &(-bg.zeta.clone()))?;
    let rhs = det(&i_minus_zeta_w(n, bg))?;
    Ok(lhs.rel_deviation(&rhs))
}
