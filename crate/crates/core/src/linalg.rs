//! Dense complex matrices and a Hermitian eigensolver.
//!
//! The eigensolver reduces to real symmetric tridiagonal form with complex
//! Householder reflections, rotates the off-diagonal to be real, and finishes
//! with implicit QL iterations (Wilkinson shift). Eigenvalues are returned in
//! ascending order.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

#[allow(unused_imports)] // inherent float methods win when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::{C64, ONE, ZERO};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
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

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, a) in self.row(i).iter().enumerate() {
                if *a == ZERO {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// `self * rhs - rhs * self`.
    pub fn commutator(&self, rhs: &Self) -> Self {
        self.mul(rhs).sub(&rhs.mul(self))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, Float::max)
    }

    /// Largest entrywise deviation from Hermitian symmetry.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    /// Spectral norm (largest singular value), via the eigenvalues of `A^H A`.
    pub fn spectral_norm(&self) -> Result<f64> {
        let gram = self.adjoint().mul(self);
        let vals = hermitian_eigenvalues(&gram)?;
        Ok(vals.last().copied().unwrap_or(0.0).max(0.0).sqrt())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
///
/// `vectors` holds the eigenvectors as columns, in the same order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(a: &CMatrix) -> Result<Self> {
        let (values, vectors) = solve(a, true)?;
        Ok(Self {
            values,
            vectors: vectors.expect("vectors requested"),
        })
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }
}

pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    Ok(solve(a, false)?.0)
}

const MAX_QL_ITERATIONS: usize = 60;

fn solve(a: &CMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<CMatrix>)> {
    assert!(a.is_square(), "eigensolver needs a square matrix");
    let n = a.rows;
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(|| CMatrix::zeros(0, 0))));
    }
    let (diag, offdiag, mut q) = tridiagonalize(a, want_vectors);

    // Phase the complex off-diagonal to real non-negative values. With
    // T = Q^H A Q and D = diag(phase), D^H T D is real symmetric.
    let mut d = diag;
    let mut e = vec![0.0; n];
    let mut phase = vec![ONE; n];
    for k in 0..n - 1 {
        let z = offdiag[k];
        let r = z.norm();
        e[k] = r;
        phase[k + 1] = if r > 0.0 {
            phase[k] * (z / r)
        } else {
            phase[k]
        };
    }
    if let Some(q) = q.as_mut() {
        for i in 0..n {
            for (j, p) in phase.iter().enumerate() {
                q[(i, j)] *= p;
            }
        }
    }

    tql2(&mut d, &mut e, q.as_mut())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = q.map(|q| CMatrix::from_fn(n, n, |i, j| q[(i, order[j])]));
    Ok((values, vectors))
}

/// Returns (diagonal, subdiagonal, Q) with `Q^H A Q` tridiagonal.
fn tridiagonalize(a: &CMatrix, want_q: bool) -> (Vec<f64>, Vec<C64>, Option<CMatrix>) {
    let n = a.rows;
    let mut m = a.clone();
    // enforce exact Hermitian symmetry from the lower triangle
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in 0..i {
            m[(j, i)] = m[(i, j)].conj();
        }
    }
    let mut q = want_q.then(|| CMatrix::identity(n));
    let mut sub = vec![ZERO; n.saturating_sub(1)];
    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];

    for k in 0..n.saturating_sub(1) {
        let lo = k + 1;
        let alpha_norm = (lo..n).map(|i| m[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let x0 = m[(lo, k)];
        if alpha_norm == 0.0 || (lo + 1..n).all(|i| m[(i, k)] == ZERO) {
            sub[k] = x0;
            continue;
        }
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * alpha_norm;
        // v = x - alpha e1, normalized
        for i in lo..n {
            v[i] = m[(i, k)];
        }
        v[lo] -= alpha;
        let vnorm = (lo..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        for vi in v[lo..n].iter_mut() {
            *vi /= vnorm;
        }
        // p = M v on the trailing block
        for i in lo..n {
            let mut s = ZERO;
            for j in lo..n {
                s += m[(i, j)] * v[j];
            }
            p[i] = s;
        }
        let kappa: C64 = (lo..n).map(|i| v[i].conj() * p[i]).sum();
        // w = p - kappa v ; M <- M - 2 v w^H - 2 w v^H
        for i in lo..n {
            p[i] -= kappa * v[i];
        }
        for i in lo..n {
            for j in lo..n {
                let upd = v[i] * p[j].conj() + p[i] * v[j].conj();
                m[(i, j)] -= upd * 2.0;
            }
        }
        m[(lo, k)] = alpha;
        m[(k, lo)] = alpha.conj();
        for i in lo + 1..n {
            m[(i, k)] = ZERO;
            m[(k, i)] = ZERO;
        }
        sub[k] = alpha;
        // Q <- Q (I - 2 v v^H)
        if let Some(q) = q.as_mut() {
            for r in 0..n {
                let mut s = ZERO;
                for j in lo..n {
                    s += q[(r, j)] * v[j];
                }
                s *= 2.0;
                for j in lo..n {
                    q[(r, j)] -= s * v[j].conj();
                }
            }
        }
    }
    let diag = (0..n).map(|i| m[(i, i)].re).collect();
    (diag, sub, q)
}

/// Implicit QL on a real symmetric tridiagonal matrix. `e[k]` couples rows
/// `k` and `k + 1`; `e[n - 1]` is ignored. Rotations are applied to the
/// columns of `z` when present.
fn tql2(d: &mut [f64], e: &mut [f64], mut z: Option<&mut CMatrix>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    // deflate against the matrix scale, not neighbouring entries, so that
    // clusters of near-zero eigenvalues still converge
    let scale = (0..n).fold(0.0_f64, |acc, k| acc.max(d[k].abs() + e[k].abs()));
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                if e[m].abs() <= f64::EPSILON * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence(MAX_QL_ITERATIONS));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..z.rows {
                        let f = z[(k, i + 1)];
                        let zi = z[(k, i)];
                        z[(k, i + 1)] = zi * s + f * c;
                        z[(k, i)] = zi * c - f * s;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// `exp(-i H t)` for Hermitian `H` given its eigendecomposition.
pub fn unitary_propagator(eig: &HermitianEigen, t: f64) -> CMatrix {
    let n = eig.values.len();
    let v = &eig.vectors;
    let phases: Vec<C64> = eig
        .values
        .iter()
        .map(|&e| C64::from_polar(1.0, -e * t))
        .collect();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = ZERO;
            for k in 0..n {
                s += v[(i, k)] * phases[k] * v[(j, k)].conj();
            }
            out[(i, j)] = s;
        }
    }
    out
}
