//! Time evolution of spinor fields and the diagnostics built on it.
//!
//! Free evolution is exact per Fourier mode:
//! `exp(-i h(p) t) = cos(E t) - i sin(E t) h(p) / E`.
//! A scalar potential `V(x) * 1` is added with second-order Strang splitting.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods win when std is linked
use num_traits::Float;

use crate::error::{config_err, Result};
use crate::fft::Fft;
use crate::spectral::{dirac_symbol, negative_fraction, Mat2, SimulationParams, SpinorField};
use crate::{C64, ONE, ZERO};

/// Default relative amplitude threshold that defines a field's support.
pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-8;

/// Per-mode free propagator for a fixed time step.
fn free_symbol(p: f64, m: f64, t: f64) -> Mat2 {
    let e = p.hypot(m);
    let (s, c) = (e * t).sin_cos();
    let h = dirac_symbol(p, m);
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, o) in row.iter_mut().enumerate() {
            let id = if i == j { ONE } else { ZERO };
            *o = id * c - C64::new(0.0, s / e) * h.0[i][j];
        }
    }
    Mat2(out)
}

/// Free Dirac evolution by time `t` (any sign).
pub fn evolve_free(field: &SpinorField, t: f64) -> SpinorField {
    let m = field.params().mass();
    field.apply_symbol(|p| free_symbol(p, m, t))
}

/// Shape of a local scalar potential, without its strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialShape {
    Zero,
    /// Constant inside `|x - center| < half_width`, exactly zero outside.
    Box {
        center: f64,
        half_width: f64,
    },
    /// `exp(-(x - center)^2 / (2 width^2))`.
    GaussianWell {
        center: f64,
        width: f64,
    },
}

impl PotentialShape {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Box { .. } => "box",
            Self::GaussianWell { .. } => "gaussian-well",
        }
    }

    fn value(&self, params: &SimulationParams, x: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Box { center, half_width } => {
                if periodic_distance(params, x, center) < half_width {
                    1.0
                } else {
                    0.0
                }
            }
            Self::GaussianWell { center, width } => {
                let d = periodic_distance(params, x, center);
                (-0.5 * (d / width).powi(2)).exp()
            }
        }
    }
}

/// Scalar potential sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    shape: PotentialShape,
    strength: f64,
    values: Vec<f64>,
}

impl PotentialProfile {
    pub fn new(params: &SimulationParams, shape: PotentialShape, strength: f64) -> Result<Self> {
        if !strength.is_finite() {
            return Err(config_err("potential strength must be finite"));
        }
        match shape {
            PotentialShape::Box { half_width, .. } if !(half_width > 0.0) => {
                return Err(config_err("box half width must be positive"))
            }
            PotentialShape::GaussianWell { width, .. } if !(width > 0.0) => {
                return Err(config_err("gaussian width must be positive"))
            }
            _ => {}
        }
        let values = (0..params.points())
            .map(|n| strength * shape.value(params, params.position(n)))
            .collect();
        Ok(Self {
            shape,
            strength,
            values,
        })
    }

    pub fn zero(params: &SimulationParams) -> Self {
        Self {
            shape: PotentialShape::Zero,
            strength: 0.0,
            values: alloc::vec![0.0; params.points()],
        }
    }

    pub fn shape(&self) -> PotentialShape {
        self.shape
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Strang-split evolution `exp(-iV dt/2) exp(-i H0 dt) exp(-iV dt/2)` repeated `T/dt` times.
pub fn evolve_with_potential(
    field: &SpinorField,
    potential: &PotentialProfile,
    total_time: f64,
    dt: f64,
) -> Result<SpinorField> {
    let params = *field.params();
    let steps = step_count(&params, total_time, dt)?;
    if potential.values.len() != field.len() {
        return Err(config_err("potential and field grids differ"));
    }
    let n = field.len();
    let m = params.mass();
    let grid = params.momentum_grid();
    let kinetic: Vec<Mat2> = (0..n).map(|k| free_symbol(grid.get(k), m, dt)).collect();
    let half_kick: Vec<C64> = potential
        .values
        .iter()
        .map(|v| C64::from_polar(1.0, -0.5 * v * dt))
        .collect();
    let plan = Fft::new(n);
    let mut up = field.upper().to_vec();
    let mut lo = field.lower().to_vec();
    for _ in 0..steps {
        kick(&mut up, &mut lo, &half_kick);
        plan.forward(&mut up);
        plan.forward(&mut lo);
        for k in 0..n {
            let [a, b] = kinetic[k].apply([up[k], lo[k]]);
            up[k] = a;
            lo[k] = b;
        }
        plan.inverse(&mut up);
        plan.inverse(&mut lo);
        kick(&mut up, &mut lo, &half_kick);
    }
    SpinorField::from_components(params, up, lo)
}

fn kick(up: &mut [C64], lo: &mut [C64], phases: &[C64]) {
    for ((a, b), w) in up.iter_mut().zip(lo.iter_mut()).zip(phases) {
        *a *= w;
        *b *= w;
    }
}

fn step_count(params: &SimulationParams, total_time: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || dt > params.dx() * (1.0 + 1e-12) {
        return Err(config_err(format!(
            "time step {dt} must lie in (0, dx = {}]",
            params.dx()
        )));
    }
    if !(total_time >= 0.0 && total_time.is_finite()) {
        return Err(config_err("total time must be finite and non-negative"));
    }
    let steps = (total_time / dt).round();
    if (steps * dt - total_time).abs() > 1e-12 * total_time.max(1.0) {
        return Err(config_err(format!(
            "time step {dt} does not divide total time {total_time}"
        )));
    }
    Ok(steps as usize)
}

/// Largest step `<= dt_max` that divides `total_time` exactly.
pub fn dividing_step(total_time: f64, dt_max: f64) -> f64 {
    if total_time <= 0.0 {
        return dt_max;
    }
    total_time / (total_time / dt_max).ceil()
}

/// One row of a fragility scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FragilityPoint {
    pub strength: f64,
    pub negative_fraction: f64,
}

/// Negative-energy fraction generated by a local potential of each strength,
/// acting for `total_time` on `packet`.
pub fn fragility_scan(
    packet: &SpinorField,
    shape: PotentialShape,
    strengths: &[f64],
    total_time: f64,
    dt_max: f64,
) -> Result<Vec<FragilityPoint>> {
    if strengths.is_empty() {
        return Err(config_err("fragility scan needs at least one strength"));
    }
    if strengths.iter().any(|s| !(*s >= 0.0)) {
        return Err(config_err("strengths must be non-negative"));
    }
    if strengths.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(config_err("strengths must be strictly ascending"));
    }
    let params = *packet.params();
    let dt = dividing_step(total_time, dt_max.min(params.dx()));
    strengths
        .iter()
        .map(|&strength| {
            let v = PotentialProfile::new(&params, shape, strength)?;
            let evolved = evolve_with_potential(packet, &v, total_time, dt)?;
            Ok(FragilityPoint {
                strength,
                negative_fraction: negative_fraction(&evolved)?,
            })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    linear_fit(&logs).map(|(slope, _, _)| slope)
}

/// Ordinary least squares `y = slope x + intercept`; returns
/// `(slope, intercept, rms residual)`.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Some((slope, intercept, rms))
}

/// Light-cone leakage of a freely evolved field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausalityReport {
    /// Grid position the support radius is measured from.
    pub center: f64,
    pub support_threshold: f64,
    pub initial_radius: f64,
    pub elapsed: f64,
    /// Fraction of `||psi_t||^2` farther than `initial_radius + elapsed` from `center`.
    pub leaked_mass: f64,
    /// False once `initial_radius + elapsed` reaches half the box (wrap-around).
    pub within_horizon: bool,
    /// `L/2 - initial_radius`: the last time light-cone reasoning is valid.
    pub validity_horizon: f64,
}

/// Minimal periodic distance between two positions.
pub fn periodic_distance(params: &SimulationParams, a: f64, b: f64) -> f64 {
    let l = params.length();
    let mut d = (a - b) % l;
    if d < 0.0 {
        d += l;
    }
    d.min(l - d)
}

/// Support of a field at relative amplitude threshold `eps`:
/// `(center, radius)` with center at the amplitude maximum.
pub fn support_radius(field: &SpinorField, eps: f64) -> (f64, f64) {
    let params = field.params();
    let max = field.max_abs();
    let peak = (0..field.len())
        .max_by(|&a, &b| field.abs_at(a).total_cmp(&field.abs_at(b)))
        .unwrap_or(0);
    let center = params.position(peak);
    let radius = (0..field.len())
        .filter(|&n| field.abs_at(n) > eps * max)
        .map(|n| periodic_distance(params, params.position(n), center))
        .fold(0.0, f64::max);
    (center, radius)
}

/// Fraction of the field's mass farther than `radius` from `center`.
pub fn mass_outside(field: &SpinorField, center: f64, radius: f64) -> f64 {
    let params = *field.params();
    let total = field.norm_sqr();
    if total == 0.0 {
        return 0.0;
    }
    field.mass_where(|n| periodic_distance(&params, params.position(n), center) > radius) / total
}

/// Evolves `field` freely for `t` and measures the mass that left the
/// light cone of its initial support.
pub fn causality_check(field: &SpinorField, t: f64, eps_supp: f64) -> Result<CausalityReport> {
    if !(t > 0.0) {
        return Err(config_err("causality check needs t > 0"));
    }
    if !(eps_supp > 0.0 && eps_supp < 1.0) {
        return Err(config_err("support threshold must lie in (0, 1)"));
    }
    if field.norm_sqr() == 0.0 {
        return Err(crate::Error::UndefinedFraction);
    }
    let params = field.params();
    let (center, r0) = support_radius(field, eps_supp);
    let evolved = evolve_free(field, t);
    let half = 0.5 * params.length();
    Ok(CausalityReport {
        center,
        support_threshold: eps_supp,
        initial_radius: r0,
        elapsed: t,
        leaked_mass: mass_outside(&evolved, center, r0 + t).clamp(0.0, 1.0),
        within_horizon: r0 + t < half,
        validity_horizon: half - r0,
    })
}

/// Smooth compactly supported bump `exp(-1 / (1 - (x/R)^2))` in the upper
/// component, exactly zero for `|x - center| >= R`, normalized.
pub fn compact_bump(params: SimulationParams, center: f64, radius: f64) -> Result<SpinorField> {
    if !(radius > params.dx()) || radius >= 0.5 * params.length() {
        return Err(config_err("bump radius must lie in (dx, L/2)"));
    }
    let field = SpinorField::from_fn(params, |x| {
        let r = periodic_distance(&params, x, center) / radius;
        let v = if r < 1.0 {
            (-1.0 / (1.0 - r * r)).exp()
        } else {
            0.0
        };
        [C64::new(v, 0.0), ZERO]
    });
    Ok(field.normalized())
}
