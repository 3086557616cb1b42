//! Dense matrices and pivoted LU over any scalar type.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::logscaled::LogScaledValue;
use crate::scalar::{ComplexFn, Real};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

pub type CMatrix<T> = Matrix<Complex<T>>;

impl<E: Clone> Matrix<E> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<E>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * m);
        for r in rows {
            if r.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: r.len(),
                });
            }
            data.extend(r);
        }
        Ok(Matrix {
            rows: n,
            cols: m,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[E] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map<F: Clone>(&self, f: impl FnMut(&E) -> F) -> Matrix<F> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Top-left `n × m` block.
    pub fn block(&self, n: usize, m: usize) -> Self {
        Matrix::from_fn(n, m, |i, j| self[(i, j)].clone())
    }
}

impl<E: Clone + Zero> Matrix<E> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![E::zero(); rows * cols],
        }
    }

    pub fn diag(entries: &[E]) -> Self {
        let n = entries.len();
        Matrix::from_fn(n, n, |i, j| if i == j { entries[i].clone() } else { E::zero() })
    }

    pub fn trace(&self) -> E {
        (0..self.rows.min(self.cols)).fold(E::zero(), |acc, i| acc + self[(i, i)].clone())
    }
}

impl<E: Clone + Zero + One> Matrix<E> {
    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { E::one() } else { E::zero() })
    }
}

impl<E: Clone + Zero + Mul<Output = E>> Matrix<E> {
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: rhs.rows,
            });
        }
        let mut out: Matrix<E> = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(rrow) {
                    *o = o.clone() + a.clone() * b.clone();
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: &E) -> Self {
        self.map(|e| s.clone() * e.clone())
    }

    pub fn mul_vec(&self, v: &[E]) -> Result<Vec<E>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(E::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }
}

impl<E: Clone + Add<Output = E>> Add for &Matrix<E> {
    type Output = Matrix<E>;
    fn add(self, rhs: &Matrix<E>) -> Matrix<E> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<E: Clone + Sub<Output = E>> Sub for &Matrix<E> {
    type Output = Matrix<E>;
    fn sub(self, rhs: &Matrix<E>) -> Matrix<E> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl<E> Index<(usize, usize)> for Matrix<E> {
    type Output = E;
    fn index(&self, (i, j): (usize, usize)) -> &E {
        &self.data[i * self.cols + j]
    }
}

impl<E> IndexMut<(usize, usize)> for Matrix<E> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut E {
        &mut self.data[i * self.cols + j]
    }
}

fn norm1<T: Real>(z: &Complex<T>) -> T {
    z.re.abs() + z.im.abs()
}

pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.data()
        .iter()
        .map(ComplexFn::cabs)
        .fold(T::zero(), |a, b| a.max_of(b))
}

pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    max_abs(&(a - b))
}

/// `P A = L U` with partial pivoting; `L` is unit lower triangular and both
/// factors share one storage matrix.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: CMatrix<T>,
    perm: Vec<usize>,
    odd: bool,
    singular: bool,
}

impl<T: Real> Lu<T> {
    pub fn factor(a: &CMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                got: a.cols(),
            });
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        let mut singular = false;
        for c in 0..n {
            let mut p = c;
            let mut best = norm1(&lu[(c, c)]);
            for r in (c + 1)..n {
                let v = norm1(&lu[(r, c)]);
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best.is_zero() {
                singular = true;
                continue;
            }
            if p != c {
                for j in 0..n {
                    lu.data.swap(c * n + j, p * n + j);
                }
                perm.swap(c, p);
                odd = !odd;
            }
            let pivot_inv = Complex::<T>::one() / lu[(c, c)].clone();
            let (head, tail) = lu.data.split_at_mut((c + 1) * n);
            let prow = &head[c * n..(c + 1) * n];
            for r in 0..(n - c - 1) {
                let row = &mut tail[r * n..(r + 1) * n];
                let l = row[c].clone() * pivot_inv.clone();
                if l.is_zero() {
                    row[c] = l;
                    continue;
                }
                for (x, y) in row[(c + 1)..].iter_mut().zip(&prow[(c + 1)..]) {
                    *x = x.clone() - l.clone() * y.clone();
                }
                row[c] = l;
            }
        }
        Ok(Lu {
            lu,
            perm,
            odd,
            singular,
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> LogScaledValue<T> {
        if self.singular {
            return LogScaledValue::zero();
        }
        let n = self.dim();
        let mut log_mag = T::zero();
        let mut phase = Complex::<T>::one();
        for i in 0..n {
            let u = &self.lu[(i, i)];
            let m = u.cabs();
            log_mag = log_mag + m.ln();
            phase = phase * Complex::new(u.re.clone() / m.clone(), u.im.clone() / m);
            // renormalise to keep |phase| = 1 over long products
            let pm = phase.cabs();
            phase = Complex::new(phase.re.clone() / pm.clone(), phase.im.clone() / pm);
        }
        if self.odd {
            phase = -phase;
        }
        LogScaledValue::from_parts(log_mag, phase)
    }

    pub fn solve(&self, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        if self.singular {
            return Err(Error::SingularParameter("matrix is singular".into()));
        }
        let mut x: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            let mut s = x[i].clone();
            for j in 0..i {
                s = s - self.lu[(i, j)].clone() * x[j].clone();
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i].clone();
            for j in (i + 1)..n {
                s = s - self.lu[(i, j)].clone() * x[j].clone();
            }
            x[i] = s / self.lu[(i, i)].clone();
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<CMatrix<T>> {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![Complex::<T>::zero(); n];
            e[j] = Complex::one();
            let col = self.solve(&e)?;
            for (i, v) in col.into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        Ok(inv)
    }
}

pub fn det<T: Real>(a: &CMatrix<T>) -> Result<LogScaledValue<T>> {
    Ok(Lu::factor(a)?.det())
}

fn norm1_matrix<T: Real>(a: &CMatrix<T>) -> T {
    (0..a.cols())
        .map(|j| (0..a.rows()).fold(T::zero(), |s, i| s + a[(i, j)].cabs()))
        .fold(T::zero(), |m, v| m.max_of(v))
}

/// Row-then-column equilibration. Returns the scaled matrix and the log of
/// the factor by which its determinant exceeds the original one.
pub fn equilibrate<T: Real>(a: &CMatrix<T>) -> (CMatrix<T>, T) {
    let n = a.rows();
    let mut m = a.clone();
    let mut log_gain = T::zero();
    for i in 0..n {
        let s = (0..a.cols()).fold(T::zero(), |acc, j| acc.max_of(m[(i, j)].cabs()));
        if !s.is_zero() {
            let inv = T::one() / s.clone();
            for j in 0..a.cols() {
                m[(i, j)] = m[(i, j)].rscale(&inv);
            }
            log_gain = log_gain - s.ln();
        }
    }
    for j in 0..a.cols() {
        let s = (0..n).fold(T::zero(), |acc, i| acc.max_of(m[(i, j)].cabs()));
        if !s.is_zero() {
            let inv = T::one() / s.clone();
            for i in 0..n {
                m[(i, j)] = m[(i, j)].rscale(&inv);
            }
            log_gain = log_gain - s.ln();
        }
    }
    (m, log_gain)
}

/// Determinant of an equilibrated copy together with `log2` of its
/// 1-norm condition number, the number of mantissa bits the elimination
/// can lose.
#[derive(Clone, Debug)]
pub struct ConditionedDet<T> {
    pub det: LogScaledValue<T>,
    pub condition_bits: f64,
}

impl<T> ConditionedDet<T> {
    /// A precision warning when the condition estimate exceeds half of the
    /// mantissa.
    pub fn precision_warning(&self, mantissa_bits: u32) -> Option<crate::error::Warning> {
        (self.condition_bits > mantissa_bits as f64 / 2.0).then_some(
            crate::error::Warning::PrecisionExhausted {
                bits_lost: self.condition_bits,
                mantissa_bits,
            },
        )
    }
}

pub fn det_with_condition<T: Real>(a: &CMatrix<T>) -> Result<ConditionedDet<T>> {
    let (scaled, log_gain) = equilibrate(a);
    let lu = Lu::factor(&scaled)?;
    let det_scaled = lu.det();
    if lu.is_singular() {
        return Ok(ConditionedDet {
            det: LogScaledValue::zero(),
            condition_bits: f64::INFINITY,
        });
    }
    let inv = lu.inverse()?;
    let kappa = norm1_matrix(&scaled) * norm1_matrix(&inv);
    let condition_bits = kappa.ln().to_f64_approx() / std::f64::consts::LN_2;
    let det = LogScaledValue::from_parts(
        det_scaled.log_magnitude().clone() - log_gain,
        det_scaled.phase().clone(),
    );
    Ok(ConditionedDet {
        det,
        condition_bits,
    })
}

/// Eigen-decomposition `A = V diag(w) Vᵀ` of a real symmetric matrix by
/// cyclic Jacobi rotations. Off-diagonal entries are rotated away while
/// `|a_pq| > ε √|a_pp a_qq|`, which keeps small eigenvalues of graded
/// positive-definite matrices accurate to working precision.
pub fn symmetric_eigen<T: Real>(a: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>)> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: a.cols(),
        });
    }
    let n = a.rows();
    let mut m = a.clone();
    let mut v: Matrix<T> = Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() });
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)].clone();
                let bound = eps.clone() * (m[(p, p)].clone() * m[(q, q)].clone()).abs().sqrt();
                if apq.is_zero() || apq.abs() <= bound {
                    continue;
                }
                rotated = true;
                let two = T::int(2);
                let theta = (m[(q, q)].clone() - m[(p, p)].clone()) / (two * apq);
                let root = (theta.clone() * theta.clone() + T::one()).sqrt();
                let t = if theta < T::zero() {
                    -T::one() / (root - theta)
                } else {
                    T::one() / (theta + root)
                };
                let c = T::one() / (t.clone() * t.clone() + T::one()).sqrt();
                let s = t * c.clone();
                for k in 0..n {
                    let (kp, kq) = (m[(k, p)].clone(), m[(k, q)].clone());
                    m[(k, p)] = c.clone() * kp.clone() - s.clone() * kq.clone();
                    m[(k, q)] = s.clone() * kp + c.clone() * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (m[(p, k)].clone(), m[(q, k)].clone());
                    m[(p, k)] = c.clone() * pk.clone() - s.clone() * qk.clone();
                    m[(q, k)] = s.clone() * pk + c.clone() * qk;
                }
                for k in 0..n {
                    let (kp, kq) = (v[(k, p)].clone(), v[(k, q)].clone());
                    v[(k, p)] = c.clone() * kp.clone() - s.clone() * kq.clone();
                    v[(k, q)] = s.clone() * kp + c.clone() * kq;
                }
            }
        }
        if !rotated {
            return Ok(((0..n).map(|i| m[(i, i)].clone()).collect(), v));
        }
    }
    Err(Error::Domain("Jacobi eigenvalue iteration did not converge".into()))
}
