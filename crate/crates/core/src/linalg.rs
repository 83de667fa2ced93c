//! Dense complex matrix kernel.
//!
//! Row-major `Complex64` matrices with the handful of operations the rate
//! calculus and precoders need: products, Hermitian transpose, log-determinant
//! of Hermitian positive definite matrices, pivoted linear solves, and a
//! dominant generalized eigenvector via power iteration. Everything here is a
//! pure function on immutable inputs; matrices stay small (a few antennas),
//! so no blocking or SIMD heroics.

use num_complex::Complex64;
use thiserror::Error;

/// Relative tolerance for the Hermitian check in [`CMatrix::logdet_hpd`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Condition-number estimate above which a solve is rejected as singular.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Relative eigenvalue change at which power iteration stops.
pub const POWER_ITER_TOL: f64 = 1e-10;
/// Iteration cap for power iteration.
pub const POWER_ITER_MAX: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is not Hermitian positive definite ({0})")]
    NotHpd(String),
    #[error("matrix is singular or ill-conditioned (cond estimate {cond:.3e})")]
    Singular { cond: f64 },
    #[error("power iteration did not converge within {0} iterations")]
    NoConvergence(usize),
}

/// Dense complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// `c * I_n` for real `c`.
    pub fn scaled_identity(n: usize, c: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(c, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must be rows*cols");
        CMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        CMatrix { rows: r, cols: c, data }
    }

    /// Column vector from a slice.
    pub fn col_from_slice(v: &[Complex64]) -> Self {
        CMatrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Row `r` as a 1×cols matrix.
    pub fn row(&self, r: usize) -> CMatrix {
        assert!(r < self.rows);
        CMatrix {
            rows: 1,
            cols: self.cols,
            data: self.data[r * self.cols..(r + 1) * self.cols].to_vec(),
        }
    }

    /// Column `c` as a rows×1 matrix.
    pub fn col(&self, c: usize) -> CMatrix {
        assert!(c < self.cols);
        let mut data = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            data.push(self[(r, c)]);
        }
        CMatrix {
            rows: self.rows,
            cols: 1,
            data,
        }
    }

    pub fn set_col(&mut self, c: usize, v: &CMatrix) {
        assert!(c < self.cols && v.cols == 1 && v.rows == self.rows);
        for r in 0..self.rows {
            self[(r, c)] = v[(r, 0)];
        }
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "product shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, c: f64) -> CMatrix {
        let data = self.data.iter().map(|a| a * c).collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// `A * A^H`, the Gram matrix of the rows.
    pub fn outer_gram(&self) -> CMatrix {
        self.mul(&self.hermitian())
    }

    /// `A^H * A`, the Gram matrix of the columns.
    pub fn inner_gram(&self) -> CMatrix {
        self.hermitian().mul(self)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Natural-log determinant of a Hermitian positive definite matrix via
    /// Cholesky factorization. The Hermitian deviation must stay below
    /// `HERMITIAN_TOL` times the Frobenius norm; a nonpositive pivot means the
    /// matrix is not positive definite.
    pub fn logdet_hpd(&self) -> Result<f64, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::ShapeMismatch(format!(
                "logdet needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(0.0);
        }
        let norm = self.frobenius_norm();
        let herm_tol = HERMITIAN_TOL * norm.max(1e-300);
        for r in 0..n {
            for c in r..n {
                let dev = (self[(r, c)] - self[(c, r)].conj()).norm();
                if dev > herm_tol {
                    return Err(LinalgError::NotHpd(format!(
                        "Hermitian deviation {dev:.3e} at ({r},{c}) exceeds {herm_tol:.3e}"
                    )));
                }
            }
        }
        // Lower-triangular Cholesky, symmetrizing the diagonal as we go.
        let mut l = vec![Complex64::new(0.0, 0.0); n * n];
        let mut logdet = 0.0;
        for j in 0..n {
            let mut pivot = self[(j, j)].re;
            for k in 0..j {
                pivot -= l[j * n + k].norm_sqr();
            }
            if pivot <= 0.0 || !pivot.is_finite() {
                return Err(LinalgError::NotHpd(format!(
                    "nonpositive Cholesky pivot {pivot:.3e} at column {j}"
                )));
            }
            let ljj = pivot.sqrt();
            l[j * n + j] = Complex64::new(ljj, 0.0);
            logdet += ljj.ln();
            for i in (j + 1)..n {
                let mut s = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(2.0 * logdet)
    }

    /// Solve `A·X = B` by LU with partial pivoting. Rejects matrices whose
    /// pivot-ratio condition estimate exceeds `CONDITION_LIMIT`.
    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix, LinalgError> {
        self.solve_impl(b, true)
    }

    /// LU solve without the condition estimate gate; only exact zero pivots
    /// are rejected. Used where extreme conditioning is intentional, such as
    /// the Tikhonov-regularized zero-forcing Gram matrix.
    pub fn solve_unchecked(&self, b: &CMatrix) -> Result<CMatrix, LinalgError> {
        self.solve_impl(b, false)
    }

    fn solve_impl(&self, b: &CMatrix, check_condition: bool) -> Result<CMatrix, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::ShapeMismatch(format!(
                "solve needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        if self.rows != b.rows {
            return Err(LinalgError::ShapeMismatch(format!(
                "solve rhs has {} rows, expected {}",
                b.rows, self.rows
            )));
        }
        let n = self.rows;
        let nrhs = b.cols;
        let mut lu = self.data.clone();
        let mut x = b.data.clone();
        let mut max_pivot: f64 = 0.0;
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            // Partial pivot on column k.
            let mut p = k;
            let mut best = lu[k * n + k].norm();
            for r in (k + 1)..n {
                let mag = lu[r * n + k].norm();
                if mag > best {
                    best = mag;
                    p = r;
                }
            }
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                for c in 0..nrhs {
                    x.swap(k * nrhs + c, p * nrhs + c);
                }
            }
            let pivot = lu[k * n + k];
            let mag = pivot.norm();
            max_pivot = max_pivot.max(mag);
            min_pivot = min_pivot.min(mag);
            if mag == 0.0 || (check_condition && max_pivot / min_pivot > CONDITION_LIMIT) {
                let cond = if mag == 0.0 {
                    f64::INFINITY
                } else {
                    max_pivot / min_pivot
                };
                return Err(LinalgError::Singular { cond });
            }
            for r in (k + 1)..n {
                let factor = lu[r * n + k] / pivot;
                lu[r * n + k] = factor;
                for c in (k + 1)..n {
                    let sub = factor * lu[k * n + c];
                    lu[r * n + c] -= sub;
                }
                for c in 0..nrhs {
                    let sub = factor * x[k * nrhs + c];
                    x[r * nrhs + c] -= sub;
                }
            }
        }
        // Back substitution.
        for k in (0..n).rev() {
            let pivot = lu[k * n + k];
            for c in 0..nrhs {
                let mut s = x[k * nrhs + c];
                for j in (k + 1)..n {
                    s -= lu[k * n + j] * x[j * nrhs + c];
                }
                x[k * nrhs + c] = s / pivot;
            }
        }
        Ok(CMatrix {
            rows: n,
            cols: nrhs,
            data: x,
        })
    }

    /// `A^{-1}` via `solve(A, I)`.
    pub fn inverse(&self) -> Result<CMatrix, LinalgError> {
        self.solve(&CMatrix::identity(self.rows))
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Rayleigh quotient `(v^H A v) / (v^H B v)` for a column vector `v`.
pub fn rayleigh_quotient(a: &CMatrix, b: &CMatrix, v: &CMatrix) -> f64 {
    let num = v.hermitian().mul(&a.mul(v))[(0, 0)].re;
    let den = v.hermitian().mul(&b.mul(v))[(0, 0)].re;
    num / den
}

/// Dominant generalized eigenvector of the pencil `(A, B)`: the unit-norm `v`
/// maximizing `(v^H A v)/(v^H B v)`, with `A` Hermitian PSD and `B` Hermitian
/// positive definite. Power iteration on `B^{-1} A`, stopping when the
/// relative eigenvalue change drops below `POWER_ITER_TOL`.
///
/// The returned vector is phase-normalized: its largest-magnitude component
/// is rotated to the positive real axis.
pub fn dominant_gen_eigvec(a: &CMatrix, b: &CMatrix) -> Result<CMatrix, LinalgError> {
    if a.rows != a.cols || b.rows != b.cols || a.rows != b.rows {
        return Err(LinalgError::ShapeMismatch(format!(
            "pencil shapes {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let n = a.rows;
    // Deterministic start with unequal components so no eigenvector of a
    // generic pencil is exactly orthogonal to it.
    let mut v = CMatrix::col_from_slice(
        &(0..n)
            .map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.05 * (i + 1) as f64))
            .collect::<Vec<_>>(),
    );
    normalize_vec(&mut v);
    let mut lambda = rayleigh_quotient(a, b, &v);
    for iter in 0..POWER_ITER_MAX {
        let av = a.mul(&v);
        if av.frobenius_norm() <= 1e-300 {
            // A annihilates v: quotient is identically zero along this
            // direction; any vector attains the (zero) maximum.
            break;
        }
        let mut w = b.solve(&av)?;
        normalize_vec(&mut w);
        v = w;
        let next = rayleigh_quotient(a, b, &v);
        let change = (next - lambda).abs();
        lambda = next;
        if change <= POWER_ITER_TOL * lambda.abs().max(1e-300) {
            phase_normalize(&mut v);
            return Ok(v);
        }
        if iter + 1 == POWER_ITER_MAX && change > 1e-6 * lambda.abs().max(1e-300) {
            return Err(LinalgError::NoConvergence(POWER_ITER_MAX));
        }
    }
    phase_normalize(&mut v);
    Ok(v)
}

fn normalize_vec(v: &mut CMatrix) {
    let norm = v.frobenius_norm();
    if norm > 0.0 {
        for z in &mut v.data {
            *z /= norm;
        }
    }
}

/// Rotate so the largest-magnitude component (lowest index on ties) is real
/// positive.
pub fn phase_normalize(v: &mut CMatrix) {
    let mut best = 0;
    let mut best_mag = 0.0;
    for (i, z) in v.data.iter().enumerate() {
        let mag = z.norm();
        if mag > best_mag {
            best_mag = mag;
            best = i;
        }
    }
    if best_mag > 0.0 {
        let phase = v.data[best] / best_mag;
        let rot = phase.conj();
        for z in &mut v.data {
            *z *= rot;
        }
    }
}
