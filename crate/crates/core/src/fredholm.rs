//! Fredholm determinants for the disordered (Meixner-Pollaczek),
//! ferroelectric (discrete Meixner) and rational (Laguerre) kernels.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Diagnosed, Error, Result, Warning};
use crate::linalg::{det, CMatrix, Matrix};
use crate::logscaled::LogScaledValue;
use crate::orthopoly::{
    laguerre_sequence_with_derivative, meixner_eval_with_derivative, mp_half_eval_general_with_derivative,
    mp_sequence_with_derivative, weight_shifted,
};
use crate::params::{check_sin, ModelParams};
use crate::quadrature::{tail_cutoff, QuadraturePlan, DEFAULT_NODES_PER_PANEL, DEFAULT_PANEL_WIDTH, DEFAULT_TAIL_TOL, MAX_NODES};
use crate::scalar::{ComplexFn, Real};

type C64 = Complex<f64>;
type C<T> = Complex<T>;

/// Accepted change in `ln det` between the 32- and 16-point rules.
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-8;
/// Accepted change when the discrete sum is extended by ten sites.
pub const TRUNCATION_TOL: f64 = 1e-10;
pub const MAX_TRACE_POWER: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    /// Real line, `P^{(1/2)}(x; φ₋)` and weight `e^{2φ₊y}/(1+e^{2πy})`.
    Disordered { phi_plus: C64, phi_minus: C64 },
    /// Nonnegative integers, `M_n(x; 1, e^{-2φ̃₋})` and weight `e^{-2φ̃₊y}`.
    Discrete { phi_plus: C64, phi_minus: C64 },
    /// Half line, `L_n(ξx)` and weight `e^{-y}`.
    Rational { xi: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub n: usize,
}

/// How the operator is discretized.
#[derive(Clone, Debug, PartialEq)]
pub enum Discretization {
    Quadrature(QuadraturePlan),
    /// Sites `0..=x_max`.
    Truncation { x_max: usize },
}

impl KernelSpec {
    pub fn disordered(n: usize, p: &ModelParams<f64>) -> Result<Self> {
        let s = KernelSpec {
            kind: KernelKind::Disordered {
                phi_plus: p.phi_plus(),
                phi_minus: p.phi_minus(),
            },
            n,
        };
        s.validate()?;
        Ok(s)
    }

    /// Ferroelectric kernel with `φ± = iφ̃±`.
    pub fn discrete(n: usize, phi_plus_t: C64, phi_minus_t: C64) -> Result<Self> {
        let s = KernelSpec {
            kind: KernelKind::Discrete {
                phi_plus: phi_plus_t,
                phi_minus: phi_minus_t,
            },
            n,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn rational(n: usize, xi: f64) -> Result<Self> {
        let s = KernelSpec {
            kind: KernelKind::Rational { xi },
            n,
        };
        s.validate()?;
        Ok(s)
    }

    /// `ξ = φ₋/φ₊ = (λ-η)/(λ+η)` for rational weights.
    pub fn rational_from(n: usize, lambda: f64, eta: f64) -> Result<Self> {
        Self::rational(n, (lambda - eta) / (lambda + eta))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Parameter("kernel order must be at least 1".into()));
        }
        match self.kind {
            KernelKind::Disordered { phi_plus, phi_minus } => {
                check_disordered_strip(&phi_plus)?;
                check_sin("phi_minus", &phi_minus)?;
                Ok(())
            }
            KernelKind::Discrete { phi_plus, phi_minus } => {
                if !(phi_plus.re > 0.0) {
                    return Err(Error::Domain(format!(
                        "discrete kernel needs Re phi_plus > 0, got {}",
                        phi_plus.re
                    )));
                }
                if !phi_minus.re.is_finite() || !phi_minus.im.is_finite() {
                    return Err(Error::Domain("phi_minus must be finite".into()));
                }
                Ok(())
            }
            KernelKind::Rational { xi } => {
                if !xi.is_finite() {
                    return Err(Error::Domain("xi must be finite".into()));
                }
                Ok(())
            }
        }
    }

    /// Factor in front of the operator: `e^{i(φ₋-φ₊)}` for the disordered
    /// kernel, one otherwise.
    pub fn zeta(&self) -> C64 {
        match self.kind {
            KernelKind::Disordered { phi_plus, phi_minus } => (C64::i() * (phi_minus - phi_plus)).exp(),
            _ => Complex::new(1.0, 0.0),
        }
    }

    pub fn default_discretization(&self) -> Result<Discretization> {
        self.validate()?;
        let degree = 2.0 * self.n as f64;
        match self.kind {
            KernelKind::Disordered { phi_plus, .. } => {
                let pi = std::f64::consts::PI;
                Ok(Discretization::Quadrature(QuadraturePlan::for_tails(
                    2.0 * phi_plus.re,
                    2.0 * pi - 2.0 * phi_plus.re,
                    degree,
                    DEFAULT_TAIL_TOL,
                    DEFAULT_PANEL_WIDTH,
                    DEFAULT_NODES_PER_PANEL,
                )?))
            }
            KernelKind::Discrete { phi_plus, .. } => {
                let l = tail_cutoff(2.0 * phi_plus.re, degree, DEFAULT_TAIL_TOL)?;
                let x_max = l.ceil() as usize;
                if x_max + 11 > MAX_NODES {
                    return Err(Error::SizeLimit {
                        what: "discrete truncation sites",
                        got: x_max + 11,
                        max: MAX_NODES,
                    });
                }
                Ok(Discretization::Truncation { x_max })
            }
            KernelKind::Rational { .. } => Ok(Discretization::Quadrature(QuadraturePlan::half_line(
                1.0,
                degree,
                DEFAULT_TAIL_TOL,
                DEFAULT_PANEL_WIDTH,
                DEFAULT_NODES_PER_PANEL,
            )?)),
        }
    }
}

fn check_disordered_strip<T: Real>(phi_plus: &C<T>) -> Result<()> {
    if !(phi_plus.re > T::zero() && phi_plus.re < T::pi()) {
        return Err(Error::Domain(format!(
            "disordered kernel needs 0 < Re phi_plus < pi, got {:.6}",
            phi_plus.re.to_f64_approx()
        )));
    }
    Ok(())
}

fn confluent<T: Real>(x: &T, y: &T) -> bool {
    (x.clone() - y.clone()).abs() < T::cst(1e-6) * (T::one() + x.abs() + y.abs())
}

/// `N [P_N(x) P_{N-1}(y) - P_{N-1}(x) P_N(y)] / (x-y) · e^{2φ₊y} / (1+e^{2πy})`
/// with `P = P^{(1/2)}(·; φ₋)`.
pub fn kernel_disordered<T: Real>(x: &T, y: &T, n: usize, p: &ModelParams<T>) -> Result<C<T>> {
    let phi_p = p.phi_plus();
    check_disordered_strip(&phi_p)?;
    if n == 0 {
        return Err(Error::Parameter("kernel order must be at least 1".into()));
    }
    let phi_m = p.phi_minus();
    let half = Complex::new(T::one() / T::int(2), T::zero());
    let xs = mp_sequence_with_derivative(n, &half, &Complex::new(x.clone(), T::zero()), &phi_m);
    let w = weight_shifted(&(y.clone() + y.clone()), &phi_p)?;
    let nn = T::usize(n);
    let bracket = if confluent(x, y) {
        xs[n].1.clone() * xs[n - 1].0.clone() - xs[n - 1].1.clone() * xs[n].0.clone()
    } else {
        let ys = mp_sequence_with_derivative(n, &half, &Complex::new(y.clone(), T::zero()), &phi_m);
        (xs[n].0.clone() * ys[n - 1].0.clone() - xs[n - 1].0.clone() * ys[n].0.clone())
            .unscale(x.clone() - y.clone())
    };
    Ok(bracket.rscale(&nn) * w)
}

/// `-N c^N [M_N(x) M_{N-1}(y) - M_{N-1}(x) M_N(y)] / (x-y) · e^{-2φ̃₊y}`
/// with `M_n = M_n(·; 1, c)`, `c = e^{-2φ̃₋}`.
pub fn kernel_discrete<T: Real>(x: usize, y: usize, n: usize, phi_plus_t: &C<T>, phi_minus_t: &C<T>) -> Result<C<T>> {
    if !(phi_plus_t.re > T::zero()) {
        return Err(Error::Domain("discrete kernel needs Re phi_plus > 0".into()));
    }
    if n == 0 {
        return Err(Error::Parameter("kernel order must be at least 1".into()));
    }
    let c = phi_minus_t.rscale(&T::int(-2)).cexp();
    let one = Complex::new(T::one(), T::zero());
    let xc = Complex::new(T::usize(x), T::zero());
    let yc = Complex::new(T::usize(y), T::zero());
    let (mnx, dnx) = meixner_eval_with_derivative(n, &xc, &one, &c)?;
    let (mmx, dmx) = meixner_eval_with_derivative(n - 1, &xc, &one, &c)?;
    let bracket = if x == y {
        dnx * mmx - dmx * mnx
    } else {
        let mny = meixner_eval_with_derivative(n, &yc, &one, &c)?.0;
        let mmy = meixner_eval_with_derivative(n - 1, &yc, &one, &c)?.0;
        (mnx * mmy - mmx * mny) / (xc - yc.clone())
    };
    let w = (-(phi_plus_t.clone() + phi_plus_t.clone()).rscale(&T::usize(y))).cexp();
    Ok(-(bracket * c.cpowi(n as i64)).rscale(&T::usize(n)) * w)
}

/// `-N [L_N(ξx) L_{N-1}(ξy) - L_{N-1}(ξx) L_N(ξy)] / (x-y) · e^{-y}` on `x, y ≥ 0`.
pub fn kernel_rational<T: Real>(x: &T, y: &T, n: usize, xi: &T) -> Result<T> {
    if *x < T::zero() || *y < T::zero() {
        return Err(Error::Domain("rational kernel lives on the half line".into()));
    }
    if n == 0 {
        return Err(Error::Parameter("kernel order must be at least 1".into()));
    }
    let lx = laguerre_sequence_with_derivative(n, &Complex::new(xi.clone() * x.clone(), T::zero()));
    let bracket = if confluent(x, y) {
        (lx[n].1.clone() * lx[n - 1].0.clone() - lx[n - 1].1.clone() * lx[n].0.clone()).re.clone() * xi.clone()
    } else {
        let ly = laguerre_sequence_with_derivative(n, &Complex::new(xi.clone() * y.clone(), T::zero()));
        (lx[n].0.clone() * ly[n - 1].0.clone() - lx[n - 1].0.clone() * ly[n].0.clone()).re.clone()
            / (x.clone() - y.clone())
    };
    Ok(-T::usize(n) * bracket * (-y.clone()).exp())
}

/// Values and derivatives of the two top polynomials at every node, so the
/// Nyström matrix costs one pass over node pairs.
struct NodeData {
    x: Vec<f64>,
    /// `(f_N, f_N', f_{N-1}, f_{N-1}')`.
    poly: Vec<[C64; 4]>,
    /// Weight times quadrature weight at each node.
    w: Vec<C64>,
    /// Overall factor and scale `s` of the argument: bracket is taken at `s·x`.
    factor: C64,
    arg_scale: f64,
}

impl NodeData {
    fn matrix(&self) -> CMatrix<f64> {
        let m = self.x.len();
        Matrix::from_fn(m, m, |i, j| {
            let [a, da, b, db] = self.poly[i];
            let [c, _, d, _] = self.poly[j];
            let br = if i == j {
                (da * b - db * a) * self.arg_scale
            } else {
                (a * d - b * c) / (self.x[i] - self.x[j])
            };
            self.factor * br * self.w[j]
        })
    }
}

fn top_pair(seq: &[(C64, C64)], n: usize) -> [C64; 4] {
    [seq[n].0, seq[n].1, seq[n - 1].0, seq[n - 1].1]
}

fn node_data(spec: &KernelSpec, nodes: &[f64], weights: &[f64]) -> Result<NodeData> {
    let n = spec.n;
    let half = Complex::new(0.5, 0.0);
    match spec.kind {
        KernelKind::Disordered { phi_plus, phi_minus } => {
            let mut poly = Vec::with_capacity(nodes.len());
            let mut w = Vec::with_capacity(nodes.len());
            for (&x, &q) in nodes.iter().zip(weights) {
                let seq = mp_sequence_with_derivative(n, &half, &Complex::new(x, 0.0), &phi_minus);
                poly.push(top_pair(&seq, n));
                w.push(weight_shifted(&(2.0 * x), &phi_plus)? * q);
            }
            Ok(NodeData {
                x: nodes.to_vec(),
                poly,
                w,
                factor: Complex::new(n as f64, 0.0),
                arg_scale: 1.0,
            })
        }
        KernelKind::Discrete { phi_plus, phi_minus } => {
            let c = (phi_minus * -2.0).exp();
            let one = Complex::new(1.0, 0.0);
            let mut poly = Vec::with_capacity(nodes.len());
            let mut w = Vec::with_capacity(nodes.len());
            for (&x, &q) in nodes.iter().zip(weights) {
                let xc = Complex::new(x, 0.0);
                let (a, da) = meixner_eval_with_derivative(n, &xc, &one, &c)?;
                let (b, db) = meixner_eval_with_derivative(n - 1, &xc, &one, &c)?;
                poly.push([a, da, b, db]);
                w.push((phi_plus * (-2.0 * x)).exp() * q);
            }
            Ok(NodeData {
                x: nodes.to_vec(),
                poly,
                w,
                factor: -c.powi(n as i32) * n as f64,
                arg_scale: 1.0,
            })
        }
        KernelKind::Rational { xi } => {
            let mut poly = Vec::with_capacity(nodes.len());
            let mut w = Vec::with_capacity(nodes.len());
            for (&x, &q) in nodes.iter().zip(weights) {
                let seq = laguerre_sequence_with_derivative(n, &Complex::new(xi * x, 0.0));
                poly.push(top_pair(&seq, n));
                w.push(Complex::new((-x).exp() * q, 0.0));
            }
            Ok(NodeData {
                x: nodes.to_vec(),
                poly,
                w,
                factor: Complex::new(-(n as f64), 0.0),
                arg_scale: xi,
            })
        }
    }
}

fn operator_matrix(spec: &KernelSpec, nodes: &[f64], weights: &[f64]) -> Result<CMatrix<f64>> {
    let zeta = spec.zeta();
    let d = node_data(spec, nodes, weights)?.matrix();
    Ok(if zeta == Complex::new(1.0, 0.0) { d } else { d.scale(&zeta) })
}

fn sites(x_max: usize) -> (Vec<f64>, Vec<f64>) {
    ((0..=x_max).map(|x| x as f64).collect(), vec![1.0; x_max + 1])
}

fn check_pairing(spec: &KernelSpec, disc: &Discretization) -> Result<()> {
    match (spec.kind, disc) {
        (KernelKind::Discrete { .. }, Discretization::Truncation { x_max }) => {
            if x_max + 11 > MAX_NODES {
                return Err(Error::SizeLimit {
                    what: "discrete truncation sites",
                    got: x_max + 11,
                    max: MAX_NODES,
                });
            }
            Ok(())
        }
        (KernelKind::Discrete { .. }, _) => Err(Error::Parameter("the discrete kernel needs a truncation".into())),
        (_, Discretization::Quadrature(_)) => Ok(()),
        _ => Err(Error::Parameter("continuous kernels need a quadrature plan".into())),
    }
}

/// The discretized operator `𝒱` whose `det(I - 𝒱)` is the Fredholm
/// determinant; includes `ζ` for the disordered kernel.
pub fn operator(spec: &KernelSpec, disc: &Discretization) -> Result<CMatrix<f64>> {
    spec.validate()?;
    check_pairing(spec, disc)?;
    match disc {
        Discretization::Quadrature(plan) => operator_matrix(spec, plan.nodes(), plan.weights()),
        Discretization::Truncation { x_max } => {
            let (x, w) = sites(*x_max);
            operator_matrix(spec, &x, &w)
        }
    }
}

fn det_i_minus(v: &CMatrix<f64>) -> Result<LogScaledValue<f64>> {
    let m = &Matrix::identity(v.rows()) - v;
    det(&m)
}

/// `det(I - 𝒱)` with a convergence check: the quadrature is repeated with
/// 16 points per panel, the truncation with ten more sites.
pub fn fredholm_det(spec: &KernelSpec, disc: &Discretization, tol: f64) -> Result<Diagnosed<LogScaledValue<f64>>> {
    let value = det_i_minus(&operator(spec, disc)?)?;
    let (coarse, what, tolerance) = match disc {
        Discretization::Quadrature(plan) => {
            let alt = plan.with_nodes_per_panel(plan.nodes_per_panel() / 2)?;
            (
                det_i_minus(&operator_matrix(spec, alt.nodes(), alt.weights())?)?,
                "Fredholm determinant under node refinement",
                tol,
            )
        }
        Discretization::Truncation { x_max } => {
            let (x, w) = sites(x_max + 10);
            (
                det_i_minus(&operator_matrix(spec, &x, &w)?)?,
                "Fredholm determinant under truncation extension",
                TRUNCATION_TOL,
            )
        }
    };
    let change = value.rel_deviation(&coarse);
    let mut warnings = Vec::new();
    if !(change <= tolerance) {
        warnings.push(Warning::Convergence {
            what: what.into(),
            change,
            tolerance,
        });
    }
    Ok(Diagnosed { value, warnings })
}

/// [`fredholm_det`] on the default discretization.
pub fn fredholm_det_auto(spec: &KernelSpec, tol: f64) -> Result<Diagnosed<LogScaledValue<f64>>> {
    fredholm_det(spec, &spec.default_discretization()?, tol)
}

/// `tr 𝒱ⁿ` for `n = 1..=n_max`, `n_max ≤ 6`.
pub fn trace_moments(spec: &KernelSpec, disc: &Discretization, n_max: usize) -> Result<Vec<C64>> {
    if n_max > MAX_TRACE_POWER {
        return Err(Error::SizeLimit {
            what: "trace moment order",
            got: n_max,
            max: MAX_TRACE_POWER,
        });
    }
    let v = operator(spec, disc)?;
    let pairing = |a: &CMatrix<f64>, b: &CMatrix<f64>| -> C64 {
        let m = a.rows();
        let mut s = Complex::new(0.0, 0.0);
        for i in 0..m {
            for j in 0..m {
                s += a[(i, j)] * b[(j, i)];
            }
        }
        s
    };
    let mut powers = vec![v.clone()];
    for k in 1..n_max.min(3) {
        let next = powers[k - 1].matmul(&v)?;
        powers.push(next);
    }
    Ok((1..=n_max)
        .map(|n| match n {
            1..=3 => powers[n - 1].trace(),
            _ => {
                let a = n / 2;
                pairing(&powers[a - 1], &powers[n - a - 1])
            }
        })
        .collect())
}

/// Non-integer order `ν` in the disordered kernel through the
/// hypergeometric series; needs `|2 sin φ₋| < 1`. Experimental.
pub fn fredholm_det_general_order(
    nu: C64,
    p: &ModelParams<f64>,
    plan: &QuadraturePlan,
) -> Result<LogScaledValue<f64>> {
    let phi_p = p.phi_plus();
    let phi_m = p.phi_minus();
    check_disordered_strip(&phi_p)?;
    let nu_m = nu - 1.0;
    let mut poly = Vec::with_capacity(plan.len());
    let mut w = Vec::with_capacity(plan.len());
    for (&x, &q) in plan.nodes().iter().zip(plan.weights()) {
        let xc = Complex::new(x, 0.0);
        let (a, da) = mp_half_eval_general_with_derivative(&nu, &xc, &phi_m)?;
        let (b, db) = mp_half_eval_general_with_derivative(&nu_m, &xc, &phi_m)?;
        poly.push([a, da, b, db]);
        w.push(weight_shifted(&(2.0 * x), &phi_p)? * q);
    }
    let data = NodeData {
        x: plan.nodes().to_vec(),
        poly,
        w,
        factor: nu,
        arg_scale: 1.0,
    };
    let zeta = (C64::i() * (phi_m - phi_p)).exp();
    det_i_minus(&data.matrix().scale(&zeta))
}
