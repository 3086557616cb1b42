//! Meixner-Pollaczek, Meixner and Laguerre polynomials, their
//! Christoffel-Darboux kernels, and the su(1,1) matrices behind the
//! connection formula between Meixner-Pollaczek families.

use num_complex::Complex;
use num_traits::{Num, One, Zero};

use crate::error::{Diagnosed, Error, Result, Warning};
use crate::linalg::{CMatrix, Matrix};
use crate::params::check_sin;
use crate::quadrature::{QuadraturePlan, DEFAULT_NODES_PER_PANEL, DEFAULT_PANEL_WIDTH, DEFAULT_TAIL_TOL};
use crate::scalar::{ComplexFn, Real};

type C<T> = Complex<T>;

fn ci<T: Real>(k: i64) -> C<T> {
    Complex::new(T::int(k), T::zero())
}

fn times_i<T: Real>(z: &C<T>) -> C<T> {
    Complex::new(-z.im.clone(), z.re.clone())
}

fn half<T: Real>() -> T {
    T::one() / T::int(2)
}

/// A named orthogonal family with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum PolyFamily<T> {
    /// `P_n^{(λ)}(x; φ)`.
    MeixnerPollaczek { lambda: C<T>, phi: C<T> },
    /// `M_n(x; β, c)`.
    Meixner { beta: C<T>, c: C<T> },
    /// `L_n(x)`.
    Laguerre,
}

impl<T: Real> PolyFamily<T> {
    pub fn eval(&self, n: usize, x: &C<T>) -> Result<C<T>> {
        match self {
            PolyFamily::MeixnerPollaczek { lambda, phi } => Ok(mp_eval(n, lambda, x, phi)),
            PolyFamily::Meixner { beta, c } => meixner_eval(n, x, beta, c),
            PolyFamily::Laguerre => Ok(laguerre_eval(n, x)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolyFamily::MeixnerPollaczek { .. } => "meixner-pollaczek",
            PolyFamily::Meixner { .. } => "meixner",
            PolyFamily::Laguerre => "laguerre",
        }
    }
}

// ---------------------------------------------------------------------------
// hypergeometric helpers

/// `(a)_k = a (a+1) ⋯ (a+k-1)`.
pub fn pochhammer<T: Real>(a: &C<T>, k: usize) -> C<T> {
    let mut acc = C::<T>::one();
    for j in 0..k {
        acc = acc * (a.clone() + ci::<T>(j as i64));
    }
    acc
}

/// `₂F₁(-n, b; c; z)`, a polynomial of degree `n` in `z`.
pub fn hyp2f1_terminating<T: Real>(n: usize, b: &C<T>, c: &C<T>, z: &C<T>) -> Result<C<T>> {
    let mut term = C::<T>::one();
    let mut sum = C::<T>::one();
    for k in 0..n {
        let ck = c.clone() + ci::<T>(k as i64);
        if ck.is_zero() {
            return Err(Error::Parameter(format!(
                "Pochhammer symbol of the lower parameter vanishes at k = {}",
                k + 1
            )));
        }
        let kk = ci::<T>(k as i64);
        let num = (kk.clone() - ci::<T>(n as i64)) * (b.clone() + kk.clone()) * z.clone();
        term = term * num / (ck * (kk + C::<T>::one()));
        sum = sum + term.clone();
    }
    Ok(sum)
}

// ---------------------------------------------------------------------------
// Meixner-Pollaczek

/// `P_0, …, P_n` by the three-term recurrence
/// `(k+1) P_{k+1} = [2x sin φ + 2(k+λ) cos φ] P_k - (k+2λ-1) P_{k-1}`.
pub fn mp_sequence<T: Real>(n: usize, lambda: &C<T>, x: &C<T>, phi: &C<T>) -> Vec<C<T>> {
    mp_sequence_with_derivative(n, lambda, x, phi)
        .into_iter()
        .map(|(p, _)| p)
        .collect()
}

/// `(P_k, dP_k/dx)` for `k = 0..=n`.
pub fn mp_sequence_with_derivative<T: Real>(
    n: usize,
    lambda: &C<T>,
    x: &C<T>,
    phi: &C<T>,
) -> Vec<(C<T>, C<T>)> {
    let s = phi.csin();
    let c = phi.ccos();
    let two = ci::<T>(2);
    let mut out = Vec::with_capacity(n + 1);
    out.push((C::<T>::one(), C::<T>::zero()));
    if n == 0 {
        return out;
    }
    let p1 = two.clone() * (lambda.clone() * c.clone() + x.clone() * s.clone());
    out.push((p1, two.clone() * s.clone()));
    for k in 1..n {
        let kk = ci::<T>(k as i64);
        let a = two.clone() * x.clone() * s.clone() + two.clone() * (kk.clone() + lambda.clone()) * c.clone();
        let b = kk.clone() + two.clone() * lambda.clone() - C::<T>::one();
        let (pk, dk) = out[k].clone();
        let (pm, dm) = out[k - 1].clone();
        let inv = C::<T>::one() / (kk + C::<T>::one());
        let p = (a.clone() * pk.clone() - b.clone() * pm) * inv.clone();
        let d = (a * dk + two.clone() * s.clone() * pk - b * dm) * inv;
        out.push((p, d));
    }
    out
}

/// `P_n^{(λ)}(x; φ)` by recurrence.
pub fn mp_eval<T: Real>(n: usize, lambda: &C<T>, x: &C<T>, phi: &C<T>) -> C<T> {
    mp_sequence(n, lambda, x, phi).pop().expect("non-empty")
}

/// `P_n^{(λ)}(x; φ) = (2λ)_n / n! · e^{inφ} ₂F₁(-n, λ+ix; 2λ; 1 - e^{-2iφ})`.
pub fn mp_eval_hypergeometric<T: Real>(n: usize, lambda: &C<T>, x: &C<T>, phi: &C<T>) -> Result<C<T>> {
    let two_lambda = lambda.clone() + lambda.clone();
    let z = C::<T>::one() - times_i(&phi.rscale(&T::int(-2))).cexp();
    let f = hyp2f1_terminating(n, &(lambda.clone() + times_i(x)), &two_lambda, &z)?;
    let mut fact = T::one();
    for k in 2..=n {
        fact = fact * T::usize(k);
    }
    let pre = pochhammer(&two_lambda, n).unscale(fact) * times_i(&phi.rscale(&T::usize(n))).cexp();
    Ok(pre * f)
}

/// `P_ν^{(1/2)}(x; φ)` for complex order `ν`, from the non-terminating
/// series `e^{iνφ} ₂F₁(-ν, 1/2+ix; 1; 1 - e^{-2iφ})`. Requires
/// `|1 - e^{-2iφ}| < 1`. Experimental.
pub fn mp_half_eval_general<T: Real>(nu: &C<T>, x: &C<T>, phi: &C<T>) -> Result<C<T>> {
    Ok(mp_half_eval_general_with_derivative(nu, x, phi)?.0)
}

/// Value and `x`-derivative of [`mp_half_eval_general`].
pub fn mp_half_eval_general_with_derivative<T: Real>(nu: &C<T>, x: &C<T>, phi: &C<T>) -> Result<(C<T>, C<T>)> {
    let z = C::<T>::one() - times_i(&phi.rscale(&T::int(-2))).cexp();
    let rz = z.cabs();
    if rz >= T::one() {
        return Err(Error::Domain(format!(
            "series needs |1 - exp(-2i phi)| < 1, got {:.4}",
            rz.to_f64_approx()
        )));
    }
    let b = Complex::new(half::<T>(), T::zero()) + times_i(x);
    let eps = T::epsilon();
    let mut term = C::<T>::one();
    let mut sum = C::<T>::one();
    // d/dx log (b)_k = Σ_{l<k} i / (b + l)
    let mut dlog = C::<T>::zero();
    let mut dsum = C::<T>::zero();
    let mut quiet = 0;
    for k in 0..200_000usize {
        let kk = ci::<T>(k as i64);
        let k1 = kk.clone() + C::<T>::one();
        let bk = b.clone() + kk.clone();
        dlog = dlog + times_i(&(C::<T>::one() / bk.clone()));
        term = term * (kk - nu.clone()) * bk * z.clone() / (k1.clone() * k1);
        sum = sum + term.clone();
        let dterm = term.clone() * dlog.clone();
        dsum = dsum + dterm.clone();
        let small = |t: &C<T>, s: &C<T>| t.cabs() <= eps.clone() * s.cabs();
        if small(&term, &sum) && small(&dterm, &dsum) {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    let pre = times_i(&(nu.clone() * phi.clone())).cexp();
    Ok((pre.clone() * sum, pre * dsum))
}

fn sqrt_sin<T: Real>(phi: &C<T>) -> Result<C<T>> {
    let s = check_sin("phi", phi)?;
    if s.im.is_zero() && s.re < T::zero() {
        return Err(Error::Branch(
            "sin(phi) lies on the negative real axis; the square root branch is undefined".into(),
        ));
    }
    Ok(s.csqrt())
}

fn p_prefactor<T: Real>(phi: &C<T>) -> Result<C<T>> {
    Ok(times_i(&phi.rscale(&half::<T>())).cexp() * sqrt_sin(phi)?)
}

/// `p_0(x), …, p_n(x)` with `p_k(x) = e^{iφ/2} √(sin φ) P_k^{(1/2)}((x+i)/2; φ)`.
pub fn p_n_sequence<T: Real>(n: usize, x: &C<T>, phi: &C<T>) -> Result<Vec<C<T>>> {
    Ok(p_n_sequence_with_derivative(n, x, phi)?
        .into_iter()
        .map(|(p, _)| p)
        .collect())
}

pub fn p_n_sequence_with_derivative<T: Real>(n: usize, x: &C<T>, phi: &C<T>) -> Result<Vec<(C<T>, C<T>)>> {
    let pre = p_prefactor(phi)?;
    let u = (x.clone() + Complex::new(T::zero(), T::one())).unscale(T::int(2));
    let lam = Complex::new(half::<T>(), T::zero());
    Ok(mp_sequence_with_derivative(n, &lam, &u, phi)
        .into_iter()
        .map(|(p, d)| (pre.clone() * p, pre.clone() * d.unscale(T::int(2))))
        .collect())
}

pub fn p_n_eval<T: Real>(n: usize, x: &C<T>, phi: &C<T>) -> Result<C<T>> {
    Ok(p_n_sequence(n, x, phi)?.pop().expect("non-empty"))
}

/// Leading coefficient `κ_n = e^{iφ/2} (sin φ)^{n+1/2} / n!`.
pub fn kappa<T: Real>(n: usize, phi: &C<T>) -> Result<C<T>> {
    let mut fact = T::one();
    for k in 2..=n {
        fact = fact * T::usize(k);
    }
    Ok(p_prefactor(phi)? * phi.csin().cpowi(n as i64).unscale(fact))
}

/// `e^{φx} / (1 - e^{πx})` off the pole at `x = 0`.
pub fn weight_omega<T: Real>(x: &T, phi: &C<T>) -> Result<C<T>> {
    if x.is_zero() {
        return Err(Error::Domain("the weight has a pole at x = 0".into()));
    }
    let den = -(T::pi() * x.clone()).expm1();
    Ok(phi.rscale(x).cexp().unscale(den))
}

/// `e^{φx} / (1 + e^{πx})`, pole-free for `0 < Re φ < π`.
pub fn weight_shifted<T: Real>(x: &T, phi: &C<T>) -> Result<C<T>> {
    if !(phi.re > T::zero() && phi.re < T::pi()) {
        return Err(Error::Domain(format!(
            "shifted weight needs 0 < Re phi < pi, got {:.6}",
            phi.re.to_f64_approx()
        )));
    }
    let pi_x = T::pi() * x.clone();
    if *x > T::zero() {
        let e = (-pi_x).exp();
        Ok((phi.clone() - Complex::new(T::pi(), T::zero()))
            .rscale(x)
            .cexp()
            .unscale(T::one() + e))
    } else {
        Ok(phi.rscale(x).cexp().unscale(T::one() + pi_x.exp()))
    }
}

/// `∫ x^k ω(x) dx` with the `+i0` prescription: the principal value minus
/// `i` for `k = 0`.
pub fn pv_moment(k: usize, phi: &C<f64>, plan: &QuadraturePlan) -> Result<C<f64>> {
    if !(phi.re > 0.0 && phi.re < std::f64::consts::PI) {
        return Err(Error::Domain("moments need 0 < Re phi < pi".into()));
    }
    let pi = std::f64::consts::PI;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let pv = plan.integrate_complex(|x| {
        // e^{φx}/(1-e^{πx}) + (-1)^k e^{-φx}/(1-e^{-πx}), folded onto x > 0
        let right = -(*phi - pi).scale(x).exp() / (-(-pi * x).exp_m1());
        let left = (-*phi * x).exp() / (-(-pi * x).exp_m1());
        (right + left * sign) * x.powi(k as i32)
    });
    Ok(if k == 0 { pv - Complex::new(0.0, 1.0) } else { pv })
}

/// Half-line plan for [`pv_moment`].
pub fn pv_moment_plan(k: usize, phi: &C<f64>) -> Result<QuadraturePlan> {
    let rate = phi.re.min(std::f64::consts::PI - phi.re);
    QuadraturePlan::half_line(rate, k as f64, DEFAULT_TAIL_TOL, DEFAULT_PANEL_WIDTH, DEFAULT_NODES_PER_PANEL)
}

fn confluent<T: Real>(x: &C<T>, y: &C<T>) -> bool {
    let thr = T::cst(1e-6) * (T::one() + x.cabs() + y.cabs());
    (x.clone() - y.clone()).cabs() < thr
}

/// `Σ_{n<N} p_n(x) p_n(y)` through the Christoffel-Darboux quotient, with
/// the confluent form near the diagonal.
pub fn cd_kernel<T: Real>(n: usize, x: &C<T>, y: &C<T>, phi: &C<T>) -> Result<C<T>> {
    if n == 0 {
        return Err(Error::Parameter("kernel order must be at least 1".into()));
    }
    let ratio = ci::<T>(n as i64) / check_sin("phi", phi)?;
    if confluent(x, y) {
        let mid = (x.clone() + y.clone()).unscale(T::int(2));
        let px = p_n_sequence_with_derivative(n, &mid, phi)?;
        let (pn, dn) = px[n].clone();
        let (pm, dm) = px[n - 1].clone();
        return Ok(ratio * (dn * pm - dm * pn));
    }
    let px = p_n_sequence(n, x, phi)?;
    let py = p_n_sequence(n, y, phi)?;
    let num = px[n].clone() * py[n - 1].clone() - px[n - 1].clone() * py[n].clone();
    Ok(ratio * num / (x.clone() - y.clone()))
}

pub fn cd_kernel_direct<T: Real>(n: usize, x: &C<T>, y: &C<T>, phi: &C<T>) -> Result<C<T>> {
    let px = p_n_sequence(n.saturating_sub(1), x, phi)?;
    let py = p_n_sequence(n.saturating_sub(1), y, phi)?;
    Ok((0..n).fold(C::<T>::zero(), |acc, k| acc + px[k].clone() * py[k].clone()))
}

// ---------------------------------------------------------------------------
// Meixner and Laguerre

fn meixner_z<T: Real>(c: &C<T>) -> Result<C<T>> {
    if c.is_zero() {
        return Err(Error::Parameter("Meixner parameter c must be nonzero".into()));
    }
    Ok(C::<T>::one() - C::<T>::one() / c.clone())
}

/// `M_n(x; β, c) = ₂F₁(-n, -x; β; 1 - 1/c)`.
pub fn meixner_eval<T: Real>(n: usize, x: &C<T>, beta: &C<T>, c: &C<T>) -> Result<C<T>> {
    Ok(meixner_eval_with_derivative(n, x, beta, c)?.0)
}

/// `(M_n(x), dM_n/dx)`.
pub fn meixner_eval_with_derivative<T: Real>(
    n: usize,
    x: &C<T>,
    beta: &C<T>,
    c: &C<T>,
) -> Result<(C<T>, C<T>)> {
    let z = meixner_z(c)?;
    // running (-x)_k and its x-derivative
    let mut prod = C::<T>::one();
    let mut dprod = C::<T>::zero();
    // running (-n)_k z^k / ((β)_k k!)
    let mut coef = C::<T>::one();
    let mut sum = C::<T>::one();
    let mut dsum = C::<T>::zero();
    for k in 0..n {
        let kk = ci::<T>(k as i64);
        let bk = beta.clone() + kk.clone();
        if bk.is_zero() {
            return Err(Error::Parameter(format!(
                "(beta)_k vanishes at k = {} for beta = {}",
                k + 1,
                beta.re.to_f64_approx()
            )));
        }
        let f = kk.clone() - x.clone();
        dprod = dprod * f.clone() - prod.clone();
        prod = prod * f;
        coef = coef * (kk.clone() - ci::<T>(n as i64)) * z.clone() / (bk * (kk + C::<T>::one()));
        sum = sum + coef.clone() * prod.clone();
        dsum = dsum + coef.clone() * dprod.clone();
    }
    Ok((sum, dsum))
}

/// `c^{-j} / (1 - c)`, the squared norm for `β = 1`.
pub fn meixner_norm<T: Real>(j: usize, c: &C<T>) -> C<T> {
    c.cpowi(-(j as i64)) / (C::<T>::one() - c.clone())
}

/// `L_n(x)` by `(k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}`.
pub fn laguerre_eval<T: Real>(n: usize, x: &C<T>) -> C<T> {
    laguerre_sequence_with_derivative(n, x).pop().expect("non-empty").0
}

pub fn laguerre_sequence_with_derivative<T: Real>(n: usize, x: &C<T>) -> Vec<(C<T>, C<T>)> {
    let mut out = Vec::with_capacity(n + 1);
    out.push((C::<T>::one(), C::<T>::zero()));
    if n == 0 {
        return out;
    }
    out.push((C::<T>::one() - x.clone(), -C::<T>::one()));
    for k in 1..n {
        let kk = ci::<T>(k as i64);
        let a = kk.clone() + kk.clone() + C::<T>::one() - x.clone();
        let (lk, dk) = out[k].clone();
        let (lm, dm) = out[k - 1].clone();
        let inv = C::<T>::one() / (kk.clone() + C::<T>::one());
        let l = (a.clone() * lk.clone() - kk.clone() * lm) * inv.clone();
        let d = (a * dk - lk - kk * dm) * inv;
        out.push((l, d));
    }
    out
}

// ---------------------------------------------------------------------------
// connection formula and the integral I_nm

/// Coefficients `C_k` with `P_n^{(λ)}(x; τ) = Σ_k C_k P_k^{(λ)}(x; φ)`:
/// `C_k = Γ(n+2λ) / (Γ(k+2λ) (n-k)!) · sin(φ-τ)^{n-k} sin(τ)^k / sin(φ)^n`.
pub fn connection_coeffs<T: Real>(n: usize, lambda: &C<T>, tau: &C<T>, phi: &C<T>) -> Result<Vec<C<T>>> {
    let sp = check_sin("phi", phi)?;
    let st = tau.csin();
    let sd = (phi.clone() - tau.clone()).csin();
    let two_lambda = lambda.clone() + lambda.clone();
    let mut out = Vec::with_capacity(n + 1);
    let mut fact = T::one();
    let mut facts = vec![T::one()];
    for k in 1..=n {
        fact = fact * T::usize(k);
        facts.push(fact.clone());
    }
    let spn = sp.cpowi(n as i64);
    for k in 0..=n {
        let ratio = pochhammer(&(two_lambda.clone() + ci::<T>(k as i64)), n - k);
        let v = ratio.unscale(facts[n - k].clone()) * sd.cpowi((n - k) as i64) * st.cpowi(k as i64) / spn.clone();
        out.push(v);
    }
    Ok(out)
}

/// `Γ(x)` for real `x > 0`: exact for integers and half-integers, a
/// double-precision Lanczos value otherwise.
pub fn gamma_real<T: Real>(x: &T) -> T {
    let twice = (x.clone() + x.clone()).to_f64_approx();
    if twice > 0.0 && twice.fract() == 0.0 && twice < 340.0 {
        let k = twice as i64;
        if k % 2 == 0 {
            let mut acc = T::one();
            for j in 2..k / 2 {
                acc = acc * T::int(j);
            }
            return acc;
        }
        // Γ(m + 1/2) = √π (2m)! / (4^m m!)
        let m = (k - 1) / 2;
        let mut acc = T::pi().sqrt();
        for j in 0..m {
            acc = acc * (T::int(j) + half::<T>());
        }
        return acc;
    }
    T::cst(ln_gamma(Complex::new(x.to_f64_approx(), 0.0)).re.exp())
}

/// Closed form of the integral `I_nm`, summed term by term so that
/// `sin(τ-φ) = 0` or `sin(ω-φ) = 0` need no special treatment:
///
/// `(2 sin φ)^{-2λ} sin(φ)^{-n-m} Σ_k Γ(n+2λ)Γ(m+2λ) / (Γ(k+2λ)(n-k)!(m-k)!k!)
///  · sin(φ-τ)^{n-k} sin(φ-ω)^{m-k} (sin τ sin ω)^k`.
pub fn inm_closed<T: Real>(
    n: usize,
    m: usize,
    lambda: &T,
    tau: &C<T>,
    omega: &C<T>,
    phi: &C<T>,
) -> Result<C<T>> {
    let sp = check_sin("phi", phi)?;
    let two_lambda = lambda.clone() + lambda.clone();
    let tl = Complex::new(two_lambda.clone(), T::zero());
    let st = tau.csin();
    let so = omega.csin();
    let dt = (phi.clone() - tau.clone()).csin();
    let dw = (phi.clone() - omega.clone()).csin();
    let mut facts = vec![T::one()];
    for k in 1..=n.max(m) {
        let last = facts[k - 1].clone();
        facts.push(last * T::usize(k));
    }
    let pn = pochhammer(&tl, n);
    let pm = pochhammer(&tl, m);
    let mut sum = C::<T>::zero();
    for k in 0..=n.min(m) {
        let den = pochhammer(&tl, k) * ci::<T>(1).rscale(&(facts[n - k].clone() * facts[m - k].clone() * facts[k].clone()));
        let term = pn.clone() * pm.clone() / den
            * dt.cpowi((n - k) as i64)
            * dw.cpowi((m - k) as i64)
            * (st.clone() * so.clone()).cpowi(k as i64);
        sum = sum + term;
    }
    let log_two_sin = (sp.clone() + sp.clone()).cln();
    let pre = (-(log_two_sin.rscale(&two_lambda))).cexp() * sp.cpowi(-((n + m) as i64));
    Ok(sum * pre.rscale(&gamma_real(&two_lambda)))
}

/// The same integral through `₂F₁(-n, -m; 2λ; sin τ sin ω / (sin(τ-φ) sin(ω-φ)))`;
/// fails when either difference has vanishing sine.
pub fn inm_closed_hypergeometric<T: Real>(
    n: usize,
    m: usize,
    lambda: &T,
    tau: &C<T>,
    omega: &C<T>,
    phi: &C<T>,
) -> Result<C<T>> {
    let sp = check_sin("phi", phi)?;
    let dt = check_sin("tau-phi", &(tau.clone() - phi.clone()))?;
    let dw = check_sin("omega-phi", &(omega.clone() - phi.clone()))?;
    let two_lambda = lambda.clone() + lambda.clone();
    let tl = Complex::new(two_lambda.clone(), T::zero());
    let arg = tau.csin() * omega.csin() / (dt.clone() * dw.clone());
    let f = hyp2f1_terminating(n, &ci::<T>(-(m as i64)), &tl, &arg)?;
    let mut fn_ = T::one();
    for k in 2..=n {
        fn_ = fn_ * T::usize(k);
    }
    let mut fm = T::one();
    for k in 2..=m {
        fm = fm * T::usize(k);
    }
    let log_two_sin = (sp.clone() + sp.clone()).cln();
    let pre = (-(log_two_sin.rscale(&two_lambda))).cexp()
        * pochhammer(&tl, n)
        * pochhammer(&tl, m)
        * (-dt / sp.clone()).cpowi(n as i64)
        * (-dw / sp).cpowi(m as i64);
    Ok(pre.unscale(fn_ * fm).rscale(&gamma_real(&two_lambda)) * f)
}

/// Default plan for [`inm_quadrature`]: the integrand decays like
/// `e^{2φx}` on the left and `x^{n+m+2λ-1} e^{(2φ-2π)x}` on the right.
pub fn inm_plan(n: usize, m: usize, lambda: f64, phi: f64) -> Result<QuadraturePlan> {
    let pi = std::f64::consts::PI;
    if !(phi > 0.0 && phi < pi) {
        return Err(Error::Domain(format!("I_nm needs 0 < phi < pi, got {phi}")));
    }
    QuadraturePlan::for_tails(
        2.0 * phi,
        2.0 * pi - 2.0 * phi,
        (n + m) as f64 + 2.0 * lambda,
        DEFAULT_TAIL_TOL,
        DEFAULT_PANEL_WIDTH,
        DEFAULT_NODES_PER_PANEL,
    )
}

/// Direct quadrature of
/// `(1/2π) ∫ P_n^{(λ)}(x;τ) P_m^{(λ)}(x;ω) |Γ(λ+ix)|² e^{(2φ-π)x} dx`.
pub fn inm_quadrature(
    n: usize,
    m: usize,
    lambda: f64,
    tau: &C<f64>,
    omega: &C<f64>,
    phi: f64,
    plan: &QuadraturePlan,
) -> Result<Diagnosed<C<f64>>> {
    let pi = std::f64::consts::PI;
    if !(lambda > 0.0) {
        return Err(Error::Parameter(format!("I_nm needs lambda > 0, got {lambda}")));
    }
    if !(phi > 0.0 && phi < pi) {
        return Err(Error::Domain(format!("I_nm needs 0 < phi < pi, got {phi}")));
    }
    let lam = Complex::new(lambda, 0.0);
    let integrand = |x: f64| {
        let xc = Complex::new(x, 0.0);
        let a = mp_eval(n, &lam, &xc, tau);
        let b = mp_eval(m, &lam, &xc, omega);
        let g = (2.0 * ln_gamma(Complex::new(lambda, x)).re + (2.0 * phi - pi) * x).exp();
        a * b * g / (2.0 * pi)
    };
    let value = plan.integrate_complex(integrand);
    let (lo, hi) = plan.interval();
    let tail = integrand(lo).norm() / (2.0 * phi) + integrand(hi).norm() / (2.0 * pi - 2.0 * phi);
    let mut warnings = Vec::new();
    let scale = value.norm().max(f64::MIN_POSITIVE);
    if tail > 1e-15 * scale {
        warnings.push(Warning::Convergence {
            what: "I_nm quadrature tail".into(),
            change: tail / scale,
            tolerance: 1e-15,
        });
    }
    Ok(Diagnosed { value, warnings })
}

/// Principal `ln Γ(z)` (Lanczos, g = 7) with reflection for `Re z < 1/2`.
pub fn ln_gamma(z: C<f64>) -> C<f64> {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let pi = std::f64::consts::PI;
    if z.re < 0.5 {
        // Γ(z) Γ(1-z) = π / sin(πz)
        return Complex::new(pi.ln(), 0.0) - (z * pi).sin().ln() - ln_gamma(Complex::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut x = Complex::new(COEF[0], 0.0);
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    Complex::new(0.5 * (2.0 * pi).ln(), 0.0) + (z + 0.5) * t.ln() - t + x.ln()
}

// ---------------------------------------------------------------------------
// su(1,1)

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Su11Convention {
    /// `(J+)_{nm} = n δ_{n-1,m}`, `J0 = n + 1/2`, `(J-)_{nm} = (n+1) δ_{n+1,m}`.
    Half,
    /// `(J+)_{nm} = (n+2λ-1) δ_{n-1,m}`, `J0 = n + λ`, `(J-)_{nm} = (n+1) δ_{n+1,m}`.
    General,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Su11Matrices<E> {
    pub j_plus: Matrix<E>,
    pub j_zero: Matrix<E>,
    pub j_minus: Matrix<E>,
}

fn small<E: Num + Clone>(k: usize) -> E {
    (0..k).fold(E::zero(), |acc, _| acc + E::one())
}

/// Truncated `M × M` representation matrices. `lambda` is ignored for
/// [`Su11Convention::Half`], which is the `λ = 1/2` case.
pub fn su11_matrices<E: Num + Clone>(m: usize, lambda: &E, convention: Su11Convention) -> Result<Su11Matrices<E>> {
    if m < 2 {
        return Err(Error::SizeLimit {
            what: "su(1,1) matrix size (minimum 2)",
            got: m,
            max: usize::MAX,
        });
    }
    let two = small::<E>(2);
    let lam = match convention {
        Su11Convention::Half => E::one() / two.clone(),
        Su11Convention::General => lambda.clone(),
    };
    let shift = two * lam.clone() - E::one();
    let j_plus = Matrix::from_fn(m, m, |i, j| {
        if i == j + 1 {
            small::<E>(i) + shift.clone()
        } else {
            E::zero()
        }
    });
    let j_zero = Matrix::from_fn(m, m, |i, j| if i == j { small::<E>(i) + lam.clone() } else { E::zero() });
    let j_minus = Matrix::from_fn(m, m, |i, j| if j == i + 1 { small::<E>(i + 1) } else { E::zero() });
    Ok(Su11Matrices {
        j_plus,
        j_zero,
        j_minus,
    })
}

impl<E: Num + Clone> Su11Matrices<E> {
    pub fn dim(&self) -> usize {
        self.j_zero.rows()
    }

    /// `[J-,J+] - 2J0`, `[J+,J0] + J+` and `[J-,J0] - J-` on the top-left
    /// `(M-1) × (M-1)` block, where truncation does not interfere.
    pub fn commutator_residuals(&self) -> Result<[Matrix<E>; 3]> {
        let m = self.dim() - 1;
        let comm = |a: &Matrix<E>, b: &Matrix<E>| -> Result<Matrix<E>> { Ok(&a.matmul(b)? - &b.matmul(a)?) };
        let two = small::<E>(2);
        let r1 = &comm(&self.j_minus, &self.j_plus)? - &self.j_zero.scale(&two);
        let r2 = &comm(&self.j_plus, &self.j_zero)? + &self.j_plus;
        let r3 = &comm(&self.j_minus, &self.j_zero)? - &self.j_minus;
        Ok([r1.block(m, m), r2.block(m, m), r3.block(m, m)])
    }
}

/// `(exp{αJ+})_{nm} = Γ(n+2λ) / (Γ(m+2λ) (n-m)!) α^{n-m}` for `n ≥ m`.
pub fn exp_jplus_entries<T: Real>(alpha: &C<T>, lambda: &C<T>, m: usize) -> CMatrix<T> {
    let two_lambda = lambda.clone() + lambda.clone();
    Matrix::from_fn(m, m, |i, j| {
        if i < j {
            return C::<T>::zero();
        }
        let d = i - j;
        let mut fact = T::one();
        for k in 2..=d {
            fact = fact * T::usize(k);
        }
        pochhammer(&(two_lambda.clone() + ci::<T>(j as i64)), d).unscale(fact) * alpha.cpowi(d as i64)
    })
}

/// `Σ_k A^k / k!` for nilpotent `A`, stopping once the power vanishes.
pub fn exp_nilpotent<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = a.rows();
    let mut acc: CMatrix<T> = Matrix::identity(n);
    let mut power: CMatrix<T> = Matrix::identity(n);
    for k in 1..=n {
        power = power.matmul(a)?.map(|z| z.unscale(T::usize(k)));
        if power.data().iter().all(|z| z.is_zero()) {
            break;
        }
        acc = &acc + &power;
    }
    Ok(acc)
}

/// Residual of `exp{αJ+}(J- + J+) - [J- - 2αJ0 + (1+α²)J+] exp{αJ+}` on the
/// top-left `(M-1) × (M-1)` block, general-λ convention.
pub fn key_conjugation_check<T: Real>(alpha: &C<T>, lambda: &C<T>, m: usize) -> Result<T> {
    if m < 3 {
        return Err(Error::SizeLimit {
            what: "conjugation check size (minimum 3)",
            got: m,
            max: usize::MAX,
        });
    }
    let j = su11_matrices(m, lambda, Su11Convention::General)?;
    let e = exp_jplus_entries(alpha, lambda, m);
    let lhs = e.matmul(&(&j.j_minus + &j.j_plus))?;
    let two_alpha = alpha.clone() + alpha.clone();
    let one_a2 = C::<T>::one() + alpha.clone() * alpha.clone();
    let mid = &(&j.j_minus - &j.j_zero.scale(&two_alpha)) + &j.j_plus.scale(&one_a2);
    let rhs = mid.matmul(&e)?;
    let diff = &lhs - &rhs;
    let b = diff.block(m - 1, m - 1);
    Ok(b.data().iter().fold(T::zero(), |acc, z| acc.max_of(z.cabs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cf;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    type Cx = Complex<f64>;

    fn rel(a: Cx, b: Cx) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn low_orders() {
        let lam = cf(0.5, 0.0);
        let phi = cf(0.8, 0.0);
        let x = cf(0.37, 0.0);
        assert_eq!(mp_eval(0, &lam, &x, &phi), cf(1.0, 0.0));
        let p1 = mp_eval(1, &lam, &x, &phi);
        assert!(rel(p1, cf(0.8f64.cos() + 0.74 * 0.8f64.sin(), 0.0)) < 1e-15);
        let p5 = mp_eval(5, &cf(2.0, 0.0), &x, &phi);
        assert!(p5.im.abs() < 1e-14 * p5.norm());
    }

    #[test]
    fn recurrence_matches_hypergeometric() {
        for &(n, lam, x, phi) in &[(3, 0.5, 0.2, 0.7), (7, 1.0, -1.3, 2.1), (12, 2.0, 0.9, 1.4), (20, 0.5, 2.5, 0.4)] {
            let a = mp_eval(n, &cf(lam, 0.0), &cf(x, 0.0), &cf(phi, 0.0));
            let b = crate::PrecisionContext::new(256).unwrap().run(|| {
                let v = mp_eval_hypergeometric::<crate::Mp>(n, &cf(lam, 0.0), &cf(x, 0.0), &cf(phi, 0.0));
                crate::scalar::to_c64(&v.unwrap())
            });
            assert!(rel(a, b) < 1e-12, "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn general_order_agrees_at_integers() {
        let phi = cf(0.3, 0.0);
        let x = cf(0.4, 0.0);
        let a = mp_half_eval_general(&cf(4.0, 0.0), &x, &phi).unwrap();
        let b = mp_eval(4, &cf(0.5, 0.0), &x, &phi);
        assert!(rel(a, b) < 1e-12);
        assert!(mp_half_eval_general(&cf(4.5, 0.0), &x, &cf(1.2, 0.0)).is_err());
        let (_, d) = mp_half_eval_general_with_derivative(&cf(4.0, 0.0), &x, &phi).unwrap();
        let seq = mp_sequence_with_derivative(4, &cf(0.5, 0.0), &x, &phi);
        assert!(rel(d, seq[4].1) < 1e-12);
    }

    #[test]
    fn p_n_and_kappa() {
        let phi = cf::<f64>(0.9, 0.0);
        let p0 = p_n_eval(0, &cf(1.7, 0.0), &phi).unwrap();
        assert!(rel(p0, Complex::from_polar(0.9f64.sin().sqrt(), 0.45)) < 1e-15);
        // leading coefficient from a high-order finite difference
        let n = 4;
        let h = 0.5;
        let mut diff = cf(0.0, 0.0);
        let mut binom = 1.0;
        for k in 0..=n {
            let s = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
            diff += p_n_eval(n, &cf(k as f64 * h, 0.0), &phi).unwrap() * (s * binom);
            binom = binom * (n - k) as f64 / (k + 1) as f64;
        }
        let lead = diff / (24.0 * h.powi(4));
        assert!(rel(lead, kappa(n, &phi).unwrap()) < 1e-10);
        let r = kappa(3, &phi).unwrap() / kappa(4, &phi).unwrap();
        assert!(rel(r, cf(4.0 / 0.9f64.sin(), 0.0)) < 1e-14);
    }

    #[test]
    fn branch_error_on_negative_sine() {
        assert!(matches!(p_n_eval(1, &cf::<f64>(0.0, 0.0), &cf(-0.5, 0.0)), Err(Error::Branch(_))));
    }

    #[test]
    fn weights() {
        let w = weight_shifted(&0.0, &cf::<f64>(std::f64::consts::FRAC_PI_2, 0.0)).unwrap();
        assert!((w.re - 0.5).abs() < 1e-16);
        assert!(weight_shifted(&1.0, &cf::<f64>(3.5, 0.0)).is_err());
        let far = weight_shifted(&40.0, &cf::<f64>(1.0, 0.0)).unwrap();
        assert!((far.re / ((1.0 - std::f64::consts::PI) * 40.0).exp() - 1.0).abs() < 1e-12);
        assert!(weight_omega(&0.0, &cf::<f64>(1.0, 0.0)).is_err());
    }

    #[test]
    fn cd_forms_agree() {
        let phi = cf::<f64>(1.1, 0.0);
        let (x, y) = (cf(0.3, 0.0), cf(-1.2, 0.0));
        let a = cd_kernel(4, &x, &y, &phi).unwrap();
        let b = cd_kernel_direct(4, &x, &y, &phi).unwrap();
        assert!(rel(a, b) < 1e-12);
        let a = cd_kernel(4, &x, &x, &phi).unwrap();
        let b = cd_kernel_direct(4, &x, &x, &phi).unwrap();
        assert!(rel(a, b) < 1e-12);
        let one = cd_kernel(1, &x, &y, &phi).unwrap();
        assert!(rel(one, Complex::from_polar(1.1f64.sin(), 1.1)) < 1e-14);
        for d in [1e-9, 5e-7, 2e-6] {
            let z = cf(2.0 + d, 0.0);
            let a = cd_kernel(8, &cf(2.0, 0.0), &z, &phi).unwrap();
            let b = cd_kernel_direct(8, &cf(2.0, 0.0), &z, &phi).unwrap();
            assert!(rel(a, b) < 1e-10, "d={d}: {}", rel(a, b));
        }
    }

    #[test]
    fn meixner_basics() {
        let c = cf::<f64>(0.4, 0.0);
        let one = cf(1.0, 0.0);
        assert_eq!(meixner_eval(0, &cf(3.0, 0.0), &one, &c).unwrap(), one);
        for n in 0..5usize {
            for x in 0..5usize {
                let a = meixner_eval(n, &cf(x as f64, 0.0), &one, &c).unwrap();
                let b = meixner_eval(x, &cf(n as f64, 0.0), &one, &c).unwrap();
                assert!((a - b).norm() < 1e-12 * a.norm().max(1.0));
            }
        }
        assert!(meixner_eval(3, &cf(1.0, 0.0), &cf(-1.0, 0.0), &c).is_err());
    }

    #[test]
    fn laguerre_basics() {
        let x = cf::<f64>(0.7, 0.0);
        assert_eq!(laguerre_eval(0, &x), cf(1.0, 0.0));
        assert!((laguerre_eval(1, &x) - cf(0.3, 0.0)).norm() < 1e-15);
        let l3 = (-x * x * x + 9.0 * x * x - 18.0 * x + 6.0) / 6.0;
        assert!((laguerre_eval(3, &x) - l3).norm() < 1e-14);
    }

    #[test]
    fn connection_identity_trivial_case() {
        let c = connection_coeffs(4, &cf::<f64>(0.5, 0.0), &cf(0.7, 0.0), &cf(0.7, 0.0)).unwrap();
        for (k, v) in c.iter().enumerate() {
            let expect = if k == 4 { 1.0 } else { 0.0 };
            assert!((v - cf(expect, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn inm_trivial_values() {
        let pi = std::f64::consts::PI;
        let v = inm_closed(0, 0, &0.5, &cf(0.3, 0.0), &cf(0.2, 0.0), &cf(pi / 2.0, 0.0)).unwrap();
        assert!((v - cf(0.5, 0.0)).norm() < 1e-15);
        let v = inm_closed(0, 0, &1.0, &cf(0.3, 0.0), &cf(0.2, 0.0), &cf(0.7, 0.0)).unwrap();
        assert!((v.re - (2.0 * 0.7f64.sin()).powi(-2)).abs() < 1e-14);
        let phi = cf(0.6, 0.0);
        let h = inm_closed_hypergeometric(2, 3, &0.5, &cf(0.9, 0.0), &cf(1.3, 0.0), &phi).unwrap();
        let s = inm_closed(2, 3, &0.5, &cf(0.9, 0.0), &cf(1.3, 0.0), &phi).unwrap();
        assert!(rel(h, s) < 1e-13);
    }

    #[test]
    fn gamma_values() {
        assert!((gamma_real(&0.5f64) - std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_real(&5.0f64), 24.0);
        assert!((gamma_real(&2.5f64) - 1.329_340_388_179_137).abs() < 1e-14);
        let lg = ln_gamma(Complex::new(0.5, 3.0));
        // |Γ(1/2 + ix)|² = π / cosh(πx)
        let expect = (std::f64::consts::PI / (3.0 * std::f64::consts::PI).cosh()).ln();
        assert!((2.0 * lg.re - expect).abs() < 1e-13);
    }

    #[test]
    fn su11_exact_commutators() {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let s4 = su11_matrices(5, &half, Su11Convention::Half).unwrap();
        let ap = su11_matrices(5, &half, Su11Convention::General).unwrap();
        assert_eq!(s4, ap);
        let three = BigRational::new(BigInt::from(3), BigInt::from(1));
        let j = su11_matrices(6, &three, Su11Convention::General).unwrap();
        for r in j.commutator_residuals().unwrap() {
            assert!(r.data().iter().all(|z| z.is_zero()));
        }
        let s3 = su11_matrices(3, &half, Su11Convention::Half).unwrap();
        let expect: Vec<BigRational> = [1, 3, 5]
            .iter()
            .map(|&k| BigRational::new(BigInt::from(k), BigInt::from(2)))
            .collect();
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(&s3.j_zero[(i, i)], e);
        }
    }

    #[test]
    fn exp_jplus_closed_form() {
        let a = cf::<f64>(0.37, 0.0);
        let e = exp_jplus_entries(&cf::<f64>(0.0, 0.0), &cf(0.5, 0.0), 4);
        assert!(crate::linalg::max_abs_diff(&e, &Matrix::identity(4)) == 0.0);
        let e = exp_jplus_entries(&a, &cf(0.5, 0.0), 4);
        assert!((e[(3, 1)] - a * a * 3.0).norm() < 1e-15);
        let j = su11_matrices(6, &cf(1.5, 0.0), Su11Convention::General).unwrap();
        let series = exp_nilpotent(&j.j_plus.scale(&a)).unwrap();
        let closed = exp_jplus_entries(&a, &cf(1.5, 0.0), 6);
        assert!(crate::linalg::max_abs_diff(&series, &closed) < 1e-13);
    }

    #[test]
    fn key_conjugation() {
        assert_eq!(key_conjugation_check(&cf::<f64>(0.0, 0.0), &cf(0.5, 0.0), 5).unwrap(), 0.0);
        assert!(key_conjugation_check(&cf::<f64>(0.37, 0.0), &cf(0.5, 0.0), 8).unwrap() < 1e-12);
        let cot = 1.0 / 0.9f64.tan();
        assert!(key_conjugation_check(&cf::<f64>(cot, 0.0), &cf(1.0, 0.0), 10).unwrap() < 1e-12);
    }
}
