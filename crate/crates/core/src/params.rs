//! Spectral parameters, vertex weights and the R-matrix.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, CMatrix, Matrix};
use crate::scalar::{ComplexFn, Real};

/// `|sin φ|` below this is treated as singular: `2^-30` at double precision,
/// shrinking proportionally with the mantissa length.
pub fn singular_threshold<T: Real>() -> T {
    let bits = T::mantissa_bits().max(24) as i32;
    T::cst(2.0).powi(-(30 * bits) / 53)
}

pub(crate) fn check_sin<T: Real>(what: &str, phi: &Complex<T>) -> Result<Complex<T>> {
    let s = phi.csin();
    if s.cabs() < singular_threshold::<T>() {
        return Err(Error::SingularParameter(format!(
            "|sin({what})| = {:.3e} is below the singularity threshold",
            s.cabs().to_f64_approx()
        )));
    }
    Ok(s)
}

/// Spectral parameters `(λ, η)` in radians. `φ± = λ ± η` and `ν = λ - η`
/// are always derived, never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<T> {
    lambda: Complex<T>,
    eta: Complex<T>,
}

impl<T: Real> ModelParams<T> {
    pub fn new(lambda: Complex<T>, eta: Complex<T>) -> Self {
        ModelParams { lambda, eta }
    }

    pub fn real(lambda: f64, eta: f64) -> Self {
        ModelParams::new(
            Complex::new(T::cst(lambda), T::zero()),
            Complex::new(T::cst(eta), T::zero()),
        )
    }

    /// Parameters with prescribed `φ+` and `φ-`.
    pub fn from_phis(phi_plus: Complex<T>, phi_minus: Complex<T>) -> Self {
        let two = T::int(2);
        let lambda = (phi_plus.clone() + phi_minus.clone()).unscale(two.clone());
        let eta = (phi_plus - phi_minus).unscale(two);
        ModelParams { lambda, eta }
    }

    pub fn lambda(&self) -> &Complex<T> {
        &self.lambda
    }

    pub fn eta(&self) -> &Complex<T> {
        &self.eta
    }

    pub fn phi_plus(&self) -> Complex<T> {
        self.lambda.clone() + self.eta.clone()
    }

    pub fn phi_minus(&self) -> Complex<T> {
        self.lambda.clone() - self.eta.clone()
    }

    pub fn nu(&self) -> Complex<T> {
        self.phi_minus()
    }

    /// Fails when either `sin φ+` or `sin φ-` is within the singularity
    /// threshold of zero.
    pub fn validate(&self) -> Result<()> {
        check_sin("lambda+eta", &self.phi_plus())?;
        check_sin("lambda-eta", &self.phi_minus())?;
        Ok(())
    }

    /// Re-expresses the parameters in another scalar type through `f64`.
    pub fn convert<U: Real>(&self) -> ModelParams<U> {
        let cv = |z: &Complex<T>| Complex::new(U::cst(z.re.to_f64_approx()), U::cst(z.im.to_f64_approx()));
        ModelParams {
            lambda: cv(&self.lambda),
            eta: cv(&self.eta),
        }
    }

    pub fn is_real(&self) -> bool {
        self.lambda.im.is_zero() && self.eta.im.is_zero()
    }
}

/// The six Boltzmann weights, `w[0] = w1, …, w[5] = w6`.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexWeights<T> {
    pub w: [Complex<T>; 6],
}

impl<T: Real> VertexWeights<T> {
    pub fn new(w: [Complex<T>; 6]) -> Self {
        VertexWeights { w }
    }

    pub fn from_real(w: [f64; 6]) -> Self {
        VertexWeights {
            w: w.map(|x| Complex::new(T::cst(x), T::zero())),
        }
    }

    pub fn uniform(value: Complex<T>) -> Self {
        VertexWeights {
            w: std::array::from_fn(|_| value.clone()),
        }
    }

    /// `w1 = w2 = a`, `w3 = w4 = b`, `w5 = w6 = c`.
    pub fn from_abc(a: Complex<T>, b: Complex<T>, c: Complex<T>) -> Self {
        VertexWeights {
            w: [a.clone(), a, b.clone(), b, c.clone(), c],
        }
    }

    pub fn symmetric(p: &ModelParams<T>) -> Self {
        let (a, b, c) = symmetric_weights(p);
        Self::from_abc(a, b, c)
    }

    pub fn scaled(&self, s: &Complex<T>) -> Self {
        VertexWeights {
            w: self.w.clone().map(|x| x * s.clone()),
        }
    }

    /// Weight of vertex type `k` in `1..=6`.
    pub fn get(&self, k: usize) -> &Complex<T> {
        &self.w[k - 1]
    }

    pub fn convert<U: Real>(&self) -> VertexWeights<U> {
        VertexWeights {
            w: self.w.clone().map(|z| {
                Complex::new(U::cst(z.re.to_f64_approx()), U::cst(z.im.to_f64_approx()))
            }),
        }
    }
}

/// `(a, b, c) = (sin(λ+η), sin(λ-η), sin 2η)`.
pub fn symmetric_weights<T: Real>(p: &ModelParams<T>) -> (Complex<T>, Complex<T>, Complex<T>) {
    let two_eta = p.eta.clone() + p.eta.clone();
    (p.phi_plus().csin(), p.phi_minus().csin(), two_eta.csin())
}

/// `Δ = (a² + b² - c²) / (2ab)`.
pub fn delta_parameter<T: Real>(a: &Complex<T>, b: &Complex<T>, c: &Complex<T>) -> Result<Complex<T>> {
    let ab = a.clone() * b.clone();
    if ab.is_zero() {
        return Err(Error::DivisionByZero("delta parameter needs a·b ≠ 0".into()));
    }
    let num = a.clone() * a.clone() + b.clone() * b.clone() - c.clone() * c.clone();
    Ok(num / (ab.clone() + ab))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Disordered,
    FreeFermion,
    Ferroelectric,
    Antiferroelectric,
    /// Δ exactly ±1 (phase boundary).
    Critical,
    /// Complex Δ: no physical phase.
    Unphysical,
}

/// Informational only; nothing downstream branches on it.
pub fn classify_phase<T: Real>(delta: &Complex<T>) -> Phase {
    let tol = T::epsilon().sqrt();
    let d = delta.re.clone();
    if delta.im.abs() > tol.clone() * (T::one() + d.abs()) {
        return Phase::Unphysical;
    }
    if d.abs() < tol {
        Phase::FreeFermion
    } else if (d.abs() - T::one()).abs() < tol {
        Phase::Critical
    } else if d > T::one() {
        Phase::Ferroelectric
    } else if d < -T::one() {
        Phase::Antiferroelectric
    } else {
        Phase::Disordered
    }
}

/// Weights normalised so that `w1 = w2 = 1`; `w5`, `w6` carry the phases
/// `e^{∓iν}` that absorb the boundary factor.
pub fn qgroup_weights<T: Real>(p: &ModelParams<T>) -> Result<VertexWeights<T>> {
    check_sin("lambda+eta", &p.phi_plus())?;
    let (a, b, c) = symmetric_weights(p);
    let one = Complex::<T>::one();
    let ratio_b = b / a.clone();
    let ratio_c = c / a;
    let nu = p.nu();
    let i_nu = Complex::new(-nu.im.clone(), nu.re.clone());
    let w5 = ratio_c.clone() * (-i_nu.clone()).cexp();
    let w6 = ratio_c * i_nu.cexp();
    Ok(VertexWeights::new([one.clone(), one, ratio_b.clone(), ratio_b, w5, w6]))
}

/// 4×4 R-matrix in the basis `(↑↑, ↑↓, ↓↑, ↓↓)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix<T> {
    pub entries: CMatrix<T>,
}

/// `β(ν) = sin ν / sin(ν+2η)`, `γ(ν) = sin 2η / sin(ν+2η)`.
pub fn beta_gamma_nu<T: Real>(nu: &Complex<T>, eta: &Complex<T>) -> Result<(Complex<T>, Complex<T>)> {
    let two_eta = eta.clone() + eta.clone();
    let den = check_sin("nu+2eta", &(nu.clone() + two_eta.clone()))?;
    Ok((nu.csin() / den.clone(), two_eta.csin() / den))
}

pub fn r_matrix<T: Real>(nu: &Complex<T>, eta: &Complex<T>) -> Result<RMatrix<T>> {
    let (beta, gamma) = beta_gamma_nu(nu, eta)?;
    let i_nu = Complex::new(-nu.im.clone(), nu.re.clone());
    let mut m = Matrix::zeros(4, 4);
    m[(0, 0)] = Complex::one();
    m[(3, 3)] = Complex::one();
    m[(1, 1)] = beta.clone();
    m[(2, 2)] = beta;
    m[(1, 2)] = i_nu.cexp() * gamma.clone();
    m[(2, 1)] = (-i_nu).cexp() * gamma;
    Ok(RMatrix { entries: m })
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitarityReport<T> {
    pub max_deviation: T,
    pub passed: bool,
}

/// Max entrywise deviation of `R(ν) · P R(-ν) P` from the identity, with
/// `P = R(0)`.
pub fn check_unitarity<T: Real>(nu: &Complex<T>, eta: &Complex<T>, tol: &T) -> Result<UnitarityReport<T>> {
    let r = r_matrix(nu, eta)?.entries;
    let r_neg = r_matrix(&(-nu.clone()), eta)?.entries;
    let p = r_matrix(&Complex::zero(), eta)?.entries;
    let prp = p.matmul(&r_neg)?.matmul(&p)?;
    let prod = r.matmul(&prp)?;
    let max_deviation = max_abs_diff(&prod, &Matrix::identity(4));
    let passed = max_deviation <= *tol;
    Ok(UnitarityReport {
        max_deviation,
        passed,
    })
}
