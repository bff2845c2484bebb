//! Momentum-space machinery for the free 1+1D Dirac equation.
//!
//! Units are natural (`hbar = c = 1`). The Dirac symbol is
//! `h(p) = p * alpha + m * beta` with `alpha = sigma_x` and `beta = sigma_z`;
//! that choice of representation is confined to this module. Fields live on a
//! periodic grid `x_n = (n - N/2) dx`, and all norms are `sum |psi|^2 dx`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent float methods win when std is linked
use num_traits::Float;

use crate::error::{config_err, Error, Result};
use crate::fft::{self, Fft};
use crate::linalg::CMatrix;
use crate::{C64, ONE, ZERO};

/// Physical and discretization constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationParams {
    mass: f64,
    length: f64,
    points: usize,
    dt: f64,
}

impl SimulationParams {
    /// Largest admissible `dx * m`; the Compton length must be resolved.
    pub const MAX_DX_MASS: f64 = 0.25;

    pub fn new(mass: f64, length: f64, points: usize, dt: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(config_err("mass must be positive and finite"));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(config_err("box length must be positive and finite"));
        }
        if points == 0 || !points.is_multiple_of(2) {
            return Err(config_err(alloc::format!(
                "grid points must be even and positive, got {points}"
            )));
        }
        let dx = length / points as f64;
        if dx * mass > Self::MAX_DX_MASS * (1.0 + 1e-12) {
            return Err(config_err(alloc::format!(
                "dx * m = {} exceeds {}",
                dx * mass,
                Self::MAX_DX_MASS
            )));
        }
        if !(dt > 0.0 && dt <= dx * (1.0 + 1e-12)) {
            return Err(config_err(alloc::format!(
                "time step {dt} must lie in (0, dx = {dx}]"
            )));
        }
        Ok(Self {
            mass,
            length,
            points,
            dt,
        })
    }

    /// Parameters with `dt = dx / 2`.
    pub fn with_half_step(mass: f64, length: f64, points: usize) -> Result<Self> {
        Self::new(mass, length, points, 0.5 * length / points as f64)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dx(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Position of grid point `n`.
    pub fn position(&self, n: usize) -> f64 {
        (n as f64 - (self.points / 2) as f64) * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.points).map(|n| self.position(n)).collect()
    }

    /// Nearest grid index to `x`, wrapped into the box.
    pub fn index_of(&self, x: f64) -> usize {
        let raw = (x / self.dx()).round() as i64 + (self.points / 2) as i64;
        raw.rem_euclid(self.points as i64) as usize
    }

    pub fn momentum_grid(&self) -> MomentumGrid {
        MomentumGrid::new(self)
    }

    /// Energy `E(p) = sqrt(p^2 + m^2)`.
    pub fn energy(&self, p: f64) -> f64 {
        p.hypot(self.mass)
    }
}

/// Discrete momenta `p = 2 pi j / L`, stored in DFT bin order.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    values: Vec<f64>,
}

impl MomentumGrid {
    pub fn new(params: &SimulationParams) -> Self {
        let n = params.points();
        let values = (0..n)
            .map(|k| 2.0 * PI * fft::signed_index(k, n) as f64 / params.length())
            .collect();
        Self { values }
    }

    /// Momentum of DFT bin `k`.
    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, p| a.max(p.abs()))
    }
}

/// A two-component spinor.
pub type Spinor = [C64; 2];

/// A 2x2 complex matrix acting on spinor components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Self = Self([[ONE, ZERO], [ZERO, ONE]]);

    pub fn apply(&self, v: Spinor) -> Spinor {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, o) in row.iter_mut().enumerate() {
                *o = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self(out)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self(core::array::from_fn(|i| {
            core::array::from_fn(|j| self.0[i][j] + rhs.0[i][j])
        }))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(core::array::from_fn(|i| {
            core::array::from_fn(|j| self.0[i][j] * s)
        }))
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - rhs.0[i][j]).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let m = &self.0;
        m[0][0].im.abs() <= tol
            && m[1][1].im.abs() <= tol
            && (m[0][1] - m[1][0].conj()).norm() <= tol
    }

    /// Eigenvalues of a Hermitian 2x2 matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let m = &self.0;
        let mean = 0.5 * (m[0][0].re + m[1][1].re);
        let half_gap = (0.5 * (m[0][0].re - m[1][1].re)).hypot(m[0][1].norm());
        [mean - half_gap, mean + half_gap]
    }
}

/// Sign of an energy branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergySign {
    Positive,
    Negative,
}

impl EnergySign {
    pub fn factor(self) -> f64 {
        match self {
            Self::Positive => 1.0,
            Self::Negative => -1.0,
        }
    }
}

/// The free Dirac symbol `h(p) = p sigma_x + m sigma_z`, with eigenvalues
/// `+-sqrt(p^2 + m^2)`.
pub fn dirac_symbol(p: f64, m: f64) -> Mat2 {
    let p = C64::new(p, 0.0);
    let m = C64::new(m, 0.0);
    Mat2([[m, p], [p, -m]])
}

/// Spectral projector `P(p) = (1 +- h(p)/E(p)) / 2`.
pub fn energy_projector(p: f64, m: f64, sign: EnergySign) -> Mat2 {
    let e = p.hypot(m);
    Mat2::IDENTITY
        .add(&dirac_symbol(p, m).scale(sign.factor() / e))
        .scale(0.5)
}

/// Unit positive-energy spinor `(E + m, p) / sqrt(2E(E + m))`.
pub fn positive_spinor(p: f64, m: f64) -> Spinor {
    let e = p.hypot(m);
    let norm = (2.0 * e * (e + m)).sqrt();
    [C64::new((e + m) / norm, 0.0), C64::new(p / norm, 0.0)]
}

/// Unit negative-energy spinor `(-p, E + m) / sqrt(2E(E + m))`.
pub fn negative_spinor(p: f64, m: f64) -> Spinor {
    let e = p.hypot(m);
    let norm = (2.0 * e * (e + m)).sqrt();
    [C64::new(-p / norm, 0.0), C64::new((e + m) / norm, 0.0)]
}

/// Two-component complex field on the periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    params: SimulationParams,
    upper: Vec<C64>,
    lower: Vec<C64>,
}

impl SpinorField {
    pub fn zeros(params: SimulationParams) -> Self {
        let n = params.points();
        Self {
            params,
            upper: vec![ZERO; n],
            lower: vec![ZERO; n],
        }
    }

    pub fn from_components(
        params: SimulationParams,
        upper: Vec<C64>,
        lower: Vec<C64>,
    ) -> Result<Self> {
        let n = params.points();
        if upper.len() != n || lower.len() != n {
            return Err(Error::InvalidInput(alloc::format!(
                "component lengths {} / {} do not match grid size {n}",
                upper.len(),
                lower.len()
            )));
        }
        Ok(Self {
            params,
            upper,
            lower,
        })
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(params: SimulationParams, mut f: impl FnMut(f64) -> Spinor) -> Self {
        let (upper, lower) = (0..params.points())
            .map(|n| {
                let [a, b] = f(params.position(n));
                (a, b)
            })
            .unzip();
        Self {
            params,
            upper,
            lower,
        }
    }

    /// Builds a field from per-mode momentum-space spinors (DFT bin order),
    /// normalized so the result has unit norm. Zero input yields a zero field.
    pub fn from_momentum_profile(
        params: SimulationParams,
        mut profile: impl FnMut(usize, f64) -> Spinor,
    ) -> Self {
        let grid = params.momentum_grid();
        let n = params.points();
        let mut up = Vec::with_capacity(n);
        let mut lo = Vec::with_capacity(n);
        for k in 0..n {
            let [a, b] = profile(k, grid.get(k));
            up.push(a);
            lo.push(b);
        }
        let plan = Fft::new(n);
        plan.inverse(&mut up);
        plan.inverse(&mut lo);
        let mut field = Self {
            params,
            upper: up,
            lower: lo,
        };
        let _ = field.normalize();
        field
    }

    /// Stacked vector `(upper_0..upper_{N-1}, lower_0..lower_{N-1})`.
    pub fn from_vector(params: SimulationParams, v: &[C64]) -> Result<Self> {
        let n = params.points();
        if v.len() != 2 * n {
            return Err(Error::InvalidInput(alloc::format!(
                "vector length {} != 2N = {}",
                v.len(),
                2 * n
            )));
        }
        Ok(Self {
            params,
            upper: v[..n].to_vec(),
            lower: v[n..].to_vec(),
        })
    }

    pub fn to_vector(&self) -> Vec<C64> {
        let mut v = self.upper.clone();
        v.extend_from_slice(&self.lower);
        v
    }

    pub fn params(&self) -> &SimulationParams {
        &self.params
    }

    pub fn upper(&self) -> &[C64] {
        &self.upper
    }

    pub fn lower(&self) -> &[C64] {
        &self.lower
    }

    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }

    pub fn at(&self, n: usize) -> Spinor {
        [self.upper[n], self.lower[n]]
    }

    pub fn set(&mut self, n: usize, v: Spinor) {
        self.upper[n] = v[0];
        self.lower[n] = v[1];
    }

    /// `|psi(x_n)|`, the spinor norm at a grid point.
    pub fn abs_at(&self, n: usize) -> f64 {
        (self.upper[n].norm_sqr() + self.lower[n].norm_sqr()).sqrt()
    }

    pub fn density(&self) -> Vec<f64> {
        self.upper
            .iter()
            .zip(&self.lower)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        (0..self.len()).map(|n| self.abs_at(n)).fold(0.0, f64::max)
    }

    pub fn norm_sqr(&self) -> f64 {
        (fft::norm_sqr(&self.upper) + fft::norm_sqr(&self.lower)) * self.params.dx()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales to unit norm; returns the previous norm. Zero fields are left alone.
    pub fn normalize(&mut self) -> f64 {
        let norm = self.norm();
        if norm > 0.0 {
            self.scale_mut(C64::new(1.0 / norm, 0.0));
        }
        norm
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn inner(&self, other: &Self) -> C64 {
        let dx = self.params.dx();
        let s: C64 = self
            .upper
            .iter()
            .zip(&other.upper)
            .chain(self.lower.iter().zip(&other.lower))
            .map(|(a, b)| a.conj() * b)
            .sum();
        s * dx
    }

    /// Mass `sum |psi|^2 dx` over the grid points selected by `keep`.
    pub fn mass_where(&self, mut keep: impl FnMut(usize) -> bool) -> f64 {
        let dx = self.params.dx();
        (0..self.len())
            .filter(|&n| keep(n))
            .map(|n| self.upper[n].norm_sqr() + self.lower[n].norm_sqr())
            .sum::<f64>()
            * dx
    }

    pub fn scale_mut(&mut self, s: C64) {
        for z in self.upper.iter_mut().chain(self.lower.iter_mut()) {
            *z *= s;
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.scale_mut(s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.len(), other.len(), "fields live on different grids");
        Self {
            params: self.params,
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| f(*a, *b))
                .collect(),
            lower: self
                .lower
                .iter()
                .zip(&other.lower)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    /// Pointwise multiplication by a real function of the grid index.
    pub fn multiply_pointwise(&self, mut f: impl FnMut(usize) -> C64) -> Self {
        let mut out = self.clone();
        for n in 0..self.len() {
            let w = f(n);
            out.upper[n] *= w;
            out.lower[n] *= w;
        }
        out
    }

    /// Largest entrywise difference of the two components.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.upper
            .iter()
            .zip(&other.upper)
            .chain(self.lower.iter().zip(&other.lower))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `(T_s psi)(x_n) = psi(x_{n - s})`: translation by `s` grid points.
    pub fn shifted(&self, s: i64) -> Self {
        let n = self.len() as i64;
        let idx = |i: usize| ((i as i64 - s).rem_euclid(n)) as usize;
        Self {
            params: self.params,
            upper: (0..self.len()).map(|i| self.upper[idx(i)]).collect(),
            lower: (0..self.len()).map(|i| self.lower[idx(i)]).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.upper
            .iter()
            .chain(&self.lower)
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Forward DFT of both components.
    pub fn to_momentum(&self) -> (Vec<C64>, Vec<C64>) {
        let plan = Fft::new(self.len());
        let mut up = self.upper.clone();
        let mut lo = self.lower.clone();
        plan.forward(&mut up);
        plan.forward(&mut lo);
        (up, lo)
    }

    /// Applies a per-mode 2x2 matrix in momentum space.
    pub fn apply_symbol(&self, mut symbol: impl FnMut(f64) -> Mat2) -> Self {
        let plan = Fft::new(self.len());
        let grid = self.params.momentum_grid();
        let (mut up, mut lo) = self.to_momentum();
        for k in 0..self.len() {
            let [a, b] = symbol(grid.get(k)).apply([up[k], lo[k]]);
            up[k] = a;
            lo[k] = b;
        }
        plan.inverse(&mut up);
        plan.inverse(&mut lo);
        Self {
            params: self.params,
            upper: up,
            lower: lo,
        }
    }
}

/// A field split as `psi = plus + minus` by the free energy projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySplit {
    pub plus: SpinorField,
    pub minus: SpinorField,
}

impl EnergySplit {
    pub fn reconstruct(&self) -> SpinorField {
        self.plus.add(&self.minus)
    }
}

/// Splits a field into positive- and negative-energy parts, mode by mode.
pub fn split_energy(field: &SpinorField) -> Result<EnergySplit> {
    if !field.is_finite() {
        return Err(Error::InvalidInput("field has non-finite entries".into()));
    }
    let params = *field.params();
    let m = params.mass();
    let n = field.len();
    let grid = params.momentum_grid();
    let plan = Fft::new(n);
    let (up, lo) = field.to_momentum();
    let mut plus_u = vec![ZERO; n];
    let mut plus_l = vec![ZERO; n];
    let mut minus_u = vec![ZERO; n];
    let mut minus_l = vec![ZERO; n];
    for k in 0..n {
        let p = grid.get(k);
        let e = params.energy(p);
        let [hu, hl] = dirac_symbol(p, m).apply([up[k], lo[k]]);
        let (hu, hl) = (hu / e, hl / e);
        plus_u[k] = (up[k] + hu) * 0.5;
        plus_l[k] = (lo[k] + hl) * 0.5;
        minus_u[k] = (up[k] - hu) * 0.5;
        minus_l[k] = (lo[k] - hl) * 0.5;
    }
    for v in [&mut plus_u, &mut plus_l, &mut minus_u, &mut minus_l] {
        plan.inverse(v);
    }
    Ok(EnergySplit {
        plus: SpinorField::from_components(params, plus_u, plus_l)?,
        minus: SpinorField::from_components(params, minus_u, minus_l)?,
    })
}

/// `||P_- psi||^2 / ||psi||^2`.
pub fn negative_fraction(field: &SpinorField) -> Result<f64> {
    let total = field.norm_sqr();
    if total == 0.0 {
        return Err(Error::UndefinedFraction);
    }
    let split = split_energy(field)?;
    Ok((split.minus.norm_sqr() / total).clamp(0.0, 1.0))
}

/// Normalized positive-energy packet with a Gaussian momentum profile
/// `exp(-(p - k0)^2 sigma^2 / 2)` times the positive-energy spinor, centered at `x0`.
pub fn make_positive_packet(
    params: SimulationParams,
    x0: f64,
    sigma: f64,
    k0: f64,
) -> Result<SpinorField> {
    let dx = params.dx();
    if !(sigma > dx) {
        return Err(config_err(alloc::format!(
            "packet width {sigma} must exceed dx = {dx}"
        )));
    }
    if !(k0.abs() < PI / dx - 3.0 / sigma) {
        return Err(config_err(alloc::format!(
            "carrier momentum {k0} violates |k0| < pi/dx - 3/sigma"
        )));
    }
    let m = params.mass();
    let origin = params.position(0);
    Ok(SpinorField::from_momentum_profile(params, |_, p| {
        let amp = (-0.5 * ((p - k0) * sigma).powi(2)).exp();
        let phase = C64::from_polar(amp, -p * (x0 - origin));
        positive_spinor(p, m).map(|c| c * phase)
    }))
}

/// Dense `2N x 2N` position-space matrix of the energy projector, in the
/// stacked `(upper, lower)` ordering of [`SpinorField::to_vector`].
pub fn projector_matrix(params: &SimulationParams, sign: EnergySign) -> CMatrix {
    circulant_from_symbol(params, |p| energy_projector(p, params.mass(), sign))
}

/// Dense position-space matrix of the free Dirac Hamiltonian.
pub fn hamiltonian_matrix(params: &SimulationParams) -> CMatrix {
    circulant_from_symbol(params, |p| dirac_symbol(p, params.mass()))
}

/// Translation-invariant operator with the given momentum-space symbol.
pub fn circulant_from_symbol(params: &SimulationParams, symbol: impl Fn(f64) -> Mat2) -> CMatrix {
    let n = params.points();
    let grid = params.momentum_grid();
    let plan = Fft::new(n);
    // kernel[a][b][d] = (1/N) sum_k symbol_ab(p_k) exp(i p_k d dx)
    let mut kernel = [
        [vec![ZERO; n], vec![ZERO; n]],
        [vec![ZERO; n], vec![ZERO; n]],
    ];
    for (k, &p) in grid.as_slice().iter().enumerate() {
        let s = symbol(p);
        for (row, srow) in kernel.iter_mut().zip(&s.0) {
            for (entry, &v) in row.iter_mut().zip(srow) {
                entry[k] = v;
            }
        }
    }
    for row in kernel.iter_mut() {
        for k in row.iter_mut() {
            plan.inverse(k);
        }
    }
    CMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let (a, x) = (i / n, i % n);
        let (b, y) = (j / n, j % n);
        kernel[a][b][(x + n - y) % n]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, l: f64) -> SimulationParams {
        SimulationParams::with_half_step(1.0, l, n).unwrap()
    }

    #[test]
    fn params_reject_invariant_violations() {
        assert!(SimulationParams::new(0.0, 10.0, 64, 0.01).is_err());
        assert!(SimulationParams::new(1.0, -1.0, 64, 0.01).is_err());
        assert!(SimulationParams::new(1.0, 10.0, 63, 0.01).is_err());
        // dx * m = 0.5
        assert!(SimulationParams::new(1.0, 32.0, 64, 0.01).is_err());
        // dt > dx
        assert!(SimulationParams::new(1.0, 16.0, 64, 0.3).is_err());
        assert!(SimulationParams::new(1.0, 16.0, 64, 0.25).is_ok());
    }

    #[test]
    fn momentum_grid_is_symmetric_except_nyquist() {
        let p = params(16, 4.0);
        let g = p.momentum_grid();
        let nyquist = PI * 16.0 / 4.0;
        assert!((g.max_abs() - nyquist).abs() < 1e-12);
        let mut vals: Vec<f64> = g.as_slice().to_vec();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] + nyquist).abs() < 1e-12);
        for j in 1..8 {
            assert!((vals[8 + j] + vals[8 - j]).abs() < 1e-12);
        }
    }

    #[test]
    fn dirac_symbol_rest_frame_and_triple() {
        let h = dirac_symbol(0.0, 1.0);
        assert_eq!(h.0[0][0], ONE);
        assert_eq!(h.0[1][1], -ONE);
        assert_eq!(h.hermitian_eigenvalues(), [-1.0, 1.0]);
        let [lo, hi] = dirac_symbol(3.0, 4.0).hermitian_eigenvalues();
        assert!((lo + 5.0).abs() < 1e-14 && (hi - 5.0).abs() < 1e-14);
        assert_eq!(
            dirac_symbol(-2.5, 1.0).hermitian_eigenvalues(),
            dirac_symbol(2.5, 1.0).hermitian_eigenvalues()
        );
    }

    #[test]
    fn projector_rest_frame() {
        let p = energy_projector(0.0, 1.0, EnergySign::Positive);
        assert!(p.max_abs_diff(&Mat2([[ONE, ZERO], [ZERO, ZERO]])) < 1e-15);
        let p = energy_projector(3.0, 4.0, EnergySign::Positive);
        assert!((p.trace() - ONE).norm() < 1e-14);
        assert!(p.mul(&p).max_abs_diff(&p) < 1e-14);
    }

    #[test]
    fn rest_frame_spinor() {
        assert_eq!(positive_spinor(0.0, 1.0), [ONE, ZERO]);
    }

    #[test]
    fn packet_is_normalized_and_positive() {
        let p = params(256, 40.0);
        let psi = make_positive_packet(p, 0.0, 2.0, 0.0).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(negative_fraction(&psi).unwrap() < 1e-10);
        let peak = (0..psi.len())
            .max_by(|&a, &b| psi.abs_at(a).total_cmp(&psi.abs_at(b)))
            .unwrap();
        assert_eq!(p.position(peak), 0.0);
    }

    #[test]
    fn packet_precondition_errors() {
        let p = params(256, 40.0);
        assert!(matches!(
            make_positive_packet(p, 0.0, p.dx() * 0.5, 0.0),
            Err(Error::Config(_))
        ));
        let kmax = PI / p.dx();
        assert!(make_positive_packet(p, 0.0, 2.0, kmax).is_err());
    }

    #[test]
    fn negative_fraction_edge_cases() {
        let p = params(64, 16.0);
        assert_eq!(
            negative_fraction(&SpinorField::zeros(p)),
            Err(Error::UndefinedFraction)
        );
        let mut bad = SpinorField::zeros(p);
        bad.set(3, [C64::new(f64::NAN, 0.0), ZERO]);
        assert!(matches!(split_energy(&bad), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn plane_wave_modes() {
        let p = params(64, 16.0);
        let grid = p.momentum_grid();
        let k = 5;
        let pk = grid.get(k);
        let plus = SpinorField::from_momentum_profile(p, |j, _| {
            if j == k {
                positive_spinor(pk, 1.0)
            } else {
                [ZERO; 2]
            }
        });
        assert!(negative_fraction(&plus).unwrap() < 1e-12);
        let mixed = SpinorField::from_momentum_profile(p, |j, _| {
            if j == k {
                let a = positive_spinor(pk, 1.0);
                let b = negative_spinor(pk, 1.0);
                [a[0] + b[0], a[1] + b[1]]
            } else {
                [ZERO; 2]
            }
        });
        assert!((negative_fraction(&mixed).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn projector_matrix_is_idempotent() {
        let p = params(16, 4.0);
        let pp = projector_matrix(&p, EnergySign::Positive);
        let pm = projector_matrix(&p, EnergySign::Negative);
        assert!(pp.mul(&pp).sub(&pp).max_abs() < 1e-13);
        assert!(pp.add(&pm).sub(&CMatrix::identity(32)).max_abs() < 1e-13);
        assert!(pp.hermiticity_defect() < 1e-14);
    }
}
