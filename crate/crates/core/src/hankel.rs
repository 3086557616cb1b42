//! Hankel determinant representation built from derivatives of `cot`.

use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Diagnosed, Result};
use crate::linalg::{det, det_with_condition, CMatrix, Lu, Matrix};
use crate::logscaled::LogScaledValue;
use crate::mp::{Mp, PrecisionContext};
use crate::params::{check_sin, ModelParams};
use crate::scalar::{ComplexFn, Real};

/// `T_k` with `d^k/dφ^k cot φ = T_k(cot φ)`; `coeffs[i]` multiplies `c^i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CotDerivPoly {
    k: usize,
    coeffs: Vec<BigInt>,
}

impl CotDerivPoly {
    pub fn order(&self) -> usize {
        self.k
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `T_{k+1}(c) = -(1 + c²) T_k'(c)`.
    fn next(&self) -> CotDerivPoly {
        let d: Vec<BigInt> = (1..self.coeffs.len())
            .map(|i| &self.coeffs[i] * BigInt::from(i))
            .collect();
        let mut out = vec![BigInt::zero(); d.len() + 2];
        for (i, di) in d.iter().enumerate() {
            out[i] -= di;
            out[i + 2] -= di;
        }
        while out.len() > 1 && out.last().is_some_and(|c| c.is_zero()) {
            out.pop();
        }
        CotDerivPoly {
            k: self.k + 1,
            coeffs: out,
        }
    }

    pub fn eval<T: Real>(&self, c: &Complex<T>) -> Complex<T> {
        let mut acc = Complex::<T>::zero();
        for coef in self.coeffs.iter().rev() {
            acc = acc * c.clone() + Complex::new(T::from_bigint(coef), T::zero());
        }
        acc
    }
}

fn cache() -> &'static RwLock<Vec<Arc<CotDerivPoly>>> {
    static CACHE: OnceLock<RwLock<Vec<Arc<CotDerivPoly>>>> = OnceLock::new();
    CACHE.get_or_init(|| {
        RwLock::new(vec![Arc::new(CotDerivPoly {
            k: 0,
            coeffs: vec![BigInt::zero(), BigInt::one()],
        })])
    })
}

/// Memoised; the table only ever grows and entries are immutable.
pub fn cot_derivative_poly(k: usize) -> Arc<CotDerivPoly> {
    if let Some(p) = cache().read().expect("poisoned cache").get(k) {
        return p.clone();
    }
    let mut table = cache().write().expect("poisoned cache");
    while table.len() <= k {
        let next = table.last().expect("seeded").next();
        table.push(Arc::new(next));
    }
    table[k].clone()
}

/// `T_0(cot φ), …, T_{m-1}(cot φ)`.
pub fn cot_derivatives<T: Real>(m: usize, phi: &Complex<T>) -> Result<Vec<Complex<T>>> {
    check_sin("phi", phi)?;
    let c = phi.ccot();
    Ok((0..m).map(|k| cot_derivative_poly(k).eval(&c)).collect())
}

fn hankel_from<T: Real>(n: usize, seq: &[Complex<T>]) -> CMatrix<T> {
    Matrix::from_fn(n, n, |j, k| seq[j + k].clone())
}

/// `ln ∏_{k=1}^{n-1} (k!)²`.
pub fn log_factorial_square_product<T: Real>(n: usize) -> T {
    let mut acc = T::zero();
    for m in 2..n {
        acc = acc + T::usize(2 * (n - m)) * T::usize(m).ln();
    }
    acc
}

/// `H_jk = T_{j+k}(cot φ-) - T_{j+k}(cot φ+)`.
pub fn hankel_h<T: Real>(n: usize, p: &ModelParams<T>) -> Result<CMatrix<T>> {
    let m = 2 * n.max(1) - 1;
    let minus = cot_derivatives(m, &p.phi_minus())?;
    let plus = cot_derivatives(m, &p.phi_plus())?;
    let seq: Vec<_> = minus.into_iter().zip(plus).map(|(a, b)| a - b).collect();
    Ok(hankel_from(n, &seq))
}

/// `Z_N = [sin φ- sin φ+]^{N²} / ∏(k!)² · det H`, at the working precision
/// of `T`.
pub fn partition_hankel<T: Real>(n: usize, p: &ModelParams<T>) -> Result<Diagnosed<LogScaledValue<T>>> {
    let h = hankel_h(n, p)?;
    let cd = det_with_condition(&h)?;
    let warnings = cd.precision_warning(T::mantissa_bits()).into_iter().collect();
    let s = p.phi_minus().csin() * p.phi_plus().csin();
    let n2 = (n * n) as i64;
    let value = cd.det
        * LogScaledValue::from_complex(&s).powi(n2)
        * LogScaledValue::from_parts(-log_factorial_square_product::<T>(n), Complex::one());
    Ok(Diagnosed { value, warnings })
}

/// Runs [`partition_hankel`] in multiprecision under `ctx`.
pub fn partition_hankel_mp(
    n: usize,
    p: &ModelParams<f64>,
    ctx: &PrecisionContext,
) -> Result<Diagnosed<LogScaledValue<f64>>> {
    ctx.run(|| {
        let pm: ModelParams<Mp> = p.convert();
        partition_hankel(n, &pm).map(|d| d.map(|v| v.to_f64()))
    })
}

/// `A_jk = ∂^{j+k}(cot φ - i)`.
pub fn matrix_a<T: Real>(n: usize, phi: &Complex<T>) -> Result<CMatrix<T>> {
    alpha_matrix(n, phi, &Complex::new(T::zero(), -T::one()))
}

/// Hankel matrix of derivatives of `cot φ + α`.
pub fn alpha_matrix<T: Real>(n: usize, phi: &Complex<T>, alpha: &Complex<T>) -> Result<CMatrix<T>> {
    let mut seq = cot_derivatives(2 * n.max(1) - 1, phi)?;
    seq[0] = seq[0].clone() + alpha.clone();
    Ok(hankel_from(n, &seq))
}

/// `e^{-iNφ} / (sin φ)^{N²} · ∏(n!)²`.
pub fn det_a_closed<T: Real>(n: usize, phi: &Complex<T>) -> Result<LogScaledValue<T>> {
    let s = check_sin("phi", phi)?;
    let nn = T::usize(n);
    let rotation = LogScaledValue::from_polar_log(nn.clone() * phi.im.clone(), -(nn * phi.re.clone()));
    Ok(rotation
        * LogScaledValue::from_complex(&s).powi(-((n * n) as i64))
        * LogScaledValue::from_parts(log_factorial_square_product::<T>(n), Complex::one()))
}

/// `[cos Nφ + α sin Nφ] / (sin φ)^{N²} · ∏(n!)²`.
pub fn alpha_det<T: Real>(n: usize, phi: &Complex<T>, alpha: &Complex<T>) -> Result<LogScaledValue<T>> {
    let s = check_sin("phi", phi)?;
    let n_phi = phi.rscale(&T::usize(n));
    let head = n_phi.ccos() + alpha.clone() * n_phi.csin();
    Ok(LogScaledValue::from_complex(&head)
        * LogScaledValue::from_complex(&s).powi(-((n * n) as i64))
        * LogScaledValue::from_parts(log_factorial_square_product::<T>(n), Complex::one()))
}

/// LU determinant of [`alpha_matrix`].
pub fn alpha_det_numeric<T: Real>(n: usize, phi: &Complex<T>, alpha: &Complex<T>) -> Result<LogScaledValue<T>> {
    det(&alpha_matrix(n, phi, alpha)?)
}

/// `[sin φ+]^{N²} e^{-iNφ-}`, the factor separating `Z_N` from `Z̃_N`.
pub fn qgroup_prefactor<T: Real>(n: usize, p: &ModelParams<T>) -> LogScaledValue<T> {
    let nn = T::usize(n);
    let phi_m = p.phi_minus();
    LogScaledValue::from_complex(&p.phi_plus().csin()).powi((n * n) as i64)
        * LogScaledValue::from_polar_log(nn.clone() * phi_m.im.clone(), -(nn * phi_m.re))
}

/// `Z̃_N = Z_N / ([sin φ+]^{N²} e^{-iNφ-})` from the Hankel value.
pub fn z_tilde_via_ratio<T: Real>(n: usize, p: &ModelParams<T>) -> Result<Diagnosed<LogScaledValue<T>>> {
    let z = partition_hankel(n, p)?;
    let pref = qgroup_prefactor(n, p);
    Ok(z.map(|v| v / pref))
}

pub fn z_tilde_via_ratio_mp(
    n: usize,
    p: &ModelParams<f64>,
    ctx: &PrecisionContext,
) -> Result<Diagnosed<LogScaledValue<f64>>> {
    ctx.run(|| {
        let pm: ModelParams<Mp> = p.convert();
        z_tilde_via_ratio(n, &pm).map(|d| d.map(|v| v.to_f64()))
    })
}

/// `det(I - A-^{-1} A+)` evaluated directly.
pub fn z_tilde_factorized<T: Real>(n: usize, p: &ModelParams<T>) -> Result<Diagnosed<LogScaledValue<T>>> {
    let a_minus = matrix_a(n, &p.phi_minus())?;
    let a_plus = matrix_a(n, &p.phi_plus())?;
    let lu = Lu::factor(&a_minus)?;
    let mut m: CMatrix<T> = Matrix::identity(n);
    for k in 0..n {
        let col: Vec<_> = (0..n).map(|j| a_plus[(j, k)].clone()).collect();
        let x = lu.solve(&col)?;
        for j in 0..n {
            m[(j, k)] = m[(j, k)].clone() - x[j].clone();
        }
    }
    let cd = det_with_condition(&m)?;
    let warnings = cd.precision_warning(T::mantissa_bits()).into_iter().collect();
    Ok(Diagnosed {
        value: cd.det,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cf;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn low_order_polynomials() {
        assert_eq!(cot_derivative_poly(0).coeffs(), ints(&[0, 1]).as_slice());
        assert_eq!(cot_derivative_poly(1).coeffs(), ints(&[-1, 0, -1]).as_slice());
        assert_eq!(cot_derivative_poly(2).coeffs(), ints(&[0, 2, 0, 2]).as_slice());
    }

    #[test]
    fn degree_and_leading_coefficient() {
        let mut fact = BigInt::one();
        for k in 0..40usize {
            if k > 0 {
                fact *= BigInt::from(k);
            }
            let t = cot_derivative_poly(k);
            assert_eq!(t.degree(), k + 1);
            let sign = if k % 2 == 0 { fact.clone() } else { -fact.clone() };
            assert_eq!(t.coeffs()[k + 1], sign);
        }
    }

    #[test]
    fn second_derivative_against_finite_difference() {
        let phi = 0.7f64;
        let h = 1e-4;
        let cot = |x: f64| 1.0 / x.tan();
        let fd = (cot(phi + h) - 2.0 * cot(phi) + cot(phi - h)) / (h * h);
        let exact = cot_derivative_poly(2).eval(&cf::<f64>(cot(phi), 0.0)).re;
        assert!((fd - exact).abs() < 1e-5 * exact.abs());
    }

    #[test]
    fn single_entry_hankel() {
        let p = ModelParams::<f64>::real(0.9, 0.3);
        let h = hankel_h(1, &p).unwrap();
        let expected = 0.6f64.sin() / (0.6f64.sin() * 1.2f64.sin());
        assert!((h[(0, 0)].re - expected).abs() < 1e-14);
        let z = partition_hankel(1, &p).unwrap().value.to_complex();
        assert!((z - cf(0.6f64.sin(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn matrix_a_first_entry() {
        let phi = cf::<f64>(0.7, 0.0);
        let a = matrix_a(1, &phi).unwrap();
        let expected = Complex::from_polar(1.0, -0.7) / 0.7f64.sin();
        assert!((a[(0, 0)] - expected).norm() < 1e-14);
        let closed = det_a_closed(1, &phi).unwrap().to_complex();
        assert!((closed - expected).norm() < 1e-14);
    }

    #[test]
    fn alpha_variant_reduces_to_closed_form() {
        let phi = cf::<f64>(0.4, 0.3);
        let a = alpha_det(3, &phi, &cf(0.0, -1.0)).unwrap();
        let b = det_a_closed(3, &phi).unwrap();
        assert!(a.rel_deviation(&b) < 1e-13);
        let z = alpha_det(2, &cf::<f64>(0.7, 0.0), &cf(0.0, 0.0)).unwrap().to_complex();
        assert!((z.re - 1.4f64.cos() / 0.7f64.sin().powi(4)).abs() < 1e-13);
    }

    #[test]
    fn singular_phi_rejected() {
        assert!(matrix_a::<f64>(2, &cf(0.0, 0.0)).is_err());
        assert!(hankel_h(2, &ModelParams::<f64>::real(0.3, 0.3)).is_err());
    }

    #[test]
    fn z_tilde_single_site_is_w6() {
        let p = ModelParams::<f64>::real(0.9, 0.3);
        let z = z_tilde_via_ratio(1, &p).unwrap().value.to_complex();
        let w6 = Complex::from_polar(0.6f64.sin() / 1.2f64.sin(), 0.6);
        assert!((z - w6).norm() < 1e-14);
        let f = z_tilde_factorized(1, &p).unwrap().value.to_complex();
        assert!((f - w6).norm() < 1e-14);
    }
}
