//! Localized positive-energy states and how well they can be localized.
//!
//! The minimal-localization problem asks for the unit-norm positive-energy
//! state with the least mass outside a region `D`. Its value is the smallest
//! eigenvalue of `P+ chi(complement of D) P+` restricted to the positive-energy
//! subspace, computed here in the orthonormal plane-wave basis
//! `u_k(x) = w+(p_k) exp(i p_k x) / sqrt(L)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

#[allow(unused_imports)] // inherent float methods win when std is linked
use num_traits::Float;

use crate::error::{config_err, Error, Result};
use crate::evolution::{linear_fit, periodic_distance};
use crate::fft::Fft;
use crate::linalg::{CMatrix, HermitianEigen};
use crate::spectral::{negative_fraction, positive_spinor, SimulationParams, SpinorField};
use crate::{C64, ONE, ZERO};

/// A union of grid-index intervals on the periodic grid.
///
/// Intervals are half-open, sorted, non-overlapping and non-adjacent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Region {
    points: usize,
    intervals: Vec<Range<usize>>,
}

impl Region {
    pub fn empty(points: usize) -> Self {
        Self {
            points,
            intervals: Vec::new(),
        }
    }

    pub fn full(points: usize) -> Self {
        Self {
            points,
            intervals: vec![0..points],
        }
    }

    /// Region from index intervals; ranges may overlap and are merged.
    pub fn from_intervals(points: usize, ranges: &[Range<usize>]) -> Result<Self> {
        let mut mask = vec![false; points];
        for r in ranges {
            if r.end > points || r.start > r.end {
                return Err(config_err(format!(
                    "interval {r:?} out of bounds for {points} points"
                )));
            }
            mask[r.clone()].iter_mut().for_each(|m| *m = true);
        }
        Ok(Self::from_mask(&mask))
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        let mut intervals = Vec::new();
        let mut start = None;
        for (i, &m) in mask.iter().enumerate() {
            match (m, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    intervals.push(s..i);
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            intervals.push(s..mask.len());
        }
        Self {
            points: mask.len(),
            intervals,
        }
    }

    /// Grid points with `|x - center| < half_width` (periodic distance).
    pub fn centered(params: &SimulationParams, center: f64, half_width: f64) -> Self {
        let mask: Vec<bool> = (0..params.points())
            .map(|n| periodic_distance(params, params.position(n), center) < half_width)
            .collect();
        Self::from_mask(&mask)
    }

    /// Grid points with `lo <= x < hi`, no wrap-around.
    pub fn span(params: &SimulationParams, lo: f64, hi: f64) -> Self {
        let mask: Vec<bool> = (0..params.points())
            .map(|n| {
                let x = params.position(n);
                x >= lo && x < hi
            })
            .collect();
        Self::from_mask(&mask)
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn intervals(&self) -> &[Range<usize>] {
        &self.intervals
    }

    pub fn contains(&self, n: usize) -> bool {
        self.intervals.iter().any(|r| r.contains(&n))
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.points];
        for r in &self.intervals {
            mask[r.clone()].iter_mut().for_each(|m| *m = true);
        }
        mask
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.intervals.iter().flat_map(|r| r.clone())
    }

    /// Number of grid points in the region.
    pub fn count(&self) -> usize {
        self.intervals.iter().map(|r| r.len()).sum()
    }

    pub fn measure(&self, dx: f64) -> f64 {
        self.count() as f64 * dx
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.points
    }

    /// Neither empty nor the whole box.
    pub fn is_proper(&self) -> bool {
        !self.is_empty() && !self.is_full()
    }

    pub fn complement(&self) -> Self {
        let mask: Vec<bool> = self.mask().into_iter().map(|m| !m).collect();
        Self::from_mask(&mask)
    }

    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.points, other.points);
        let mask: Vec<bool> = self
            .mask()
            .into_iter()
            .zip(other.mask())
            .map(|(a, b)| a || b)
            .collect();
        Self::from_mask(&mask)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.mask()
            .into_iter()
            .zip(other.mask())
            .all(|(a, b)| !(a && b))
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.mask()
            .into_iter()
            .zip(other.mask())
            .all(|(a, b)| !a || b)
    }

    /// Region shifted by `shift` grid points, wrapping periodically.
    pub fn translate(&self, shift: i64) -> Self {
        let n = self.points as i64;
        let mut mask = vec![false; self.points];
        for i in self.indices() {
            mask[(i as i64 + shift).rem_euclid(n) as usize] = true;
        }
        Self::from_mask(&mask)
    }

    /// Smallest periodic distance between member points of the two regions.
    pub fn gap(&self, other: &Self, dx: f64) -> f64 {
        let n = self.points;
        let mut best = usize::MAX;
        for a in self.indices() {
            for b in other.indices() {
                let d = a.abs_diff(b);
                best = best.min(d.min(n - d));
            }
        }
        best as f64 * dx
    }
}

impl core::fmt::Display for Region {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let parts: Vec<alloc::string::String> = self
            .intervals
            .iter()
            .map(|r| format!("[{},{})", r.start, r.end))
            .collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// Linear fit of `ln |psi|` over a distance window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub window: (f64, f64),
    /// Decay rate, positive for decaying tails.
    pub slope: f64,
    /// RMS residual of the fit in `ln |psi|`.
    pub residual: f64,
}

/// Momentum cutoff used by [`newton_wigner_state`], as a fraction of the
/// Nyquist momentum. The Gaussian factor `exp(-(p / cutoff)^2 / 2)` removes
/// the discontinuity of `w+(p)` at the periodic wrap of the momentum grid;
/// at Nyquist it is `exp(-32)`.
pub const NW_CUTOFF_FRACTION: f64 = 0.125;

/// Newton–Wigner-type state localized at grid point `x0`: momentum profile
/// `exp(-i p x0) w+(p)` with the smooth cutoff of [`NW_CUTOFF_FRACTION`], normalized.
pub fn newton_wigner_state(params: SimulationParams, x0: f64) -> Result<SpinorField> {
    let cutoff = NW_CUTOFF_FRACTION * PI / params.dx();
    newton_wigner_state_with_cutoff(params, x0, Some(cutoff))
}

/// As [`newton_wigner_state`], with an explicit Gaussian cutoff momentum
/// (`None` keeps the bare profile up to Nyquist).
pub fn newton_wigner_state_with_cutoff(
    params: SimulationParams,
    x0: f64,
    cutoff: Option<f64>,
) -> Result<SpinorField> {
    let idx = params.index_of(x0);
    let snapped = params.position(idx);
    if periodic_distance(&params, snapped, x0) > 1e-9 * params.dx() {
        return Err(config_err(format!("x0 = {x0} is not a grid point")));
    }
    let n = params.points();
    let m = params.mass();
    Ok(SpinorField::from_momentum_profile(params, |k, p| {
        let damp = cutoff.map_or(1.0, |c| (-0.5 * (p / c).powi(2)).exp());
        // exp(-i p (x0 - x_first)) with the index phase reduced exactly
        let turns = ((k * idx) % n) as f64 / n as f64;
        let phase = C64::from_polar(damp, -2.0 * PI * turns);
        positive_spinor(p, m).map(|c| c * phase)
    }))
}

/// Fits the decay rate of `|psi|` at distances `window.0 ..= window.1` to the
/// right of the field's amplitude maximum.
pub fn tail_decay_rate(field: &SpinorField, window: (f64, f64)) -> Result<TailFit> {
    let params = field.params();
    let (a, b) = window;
    if !(a > 0.0 && b > a && b < 0.5 * params.length()) {
        return Err(config_err(format!(
            "tail window ({a}, {b}) must satisfy 0 < a < b < L/2"
        )));
    }
    let peak = (0..field.len())
        .max_by(|&i, &j| field.abs_at(i).total_cmp(&field.abs_at(j)))
        .unwrap_or(0);
    let n = field.len();
    let dx = params.dx();
    let mut points = Vec::new();
    let first = (a / dx).ceil() as usize;
    let last = (b / dx + 1e-9).floor() as usize;
    for s in first..=last {
        let idx = (peak + s) % n;
        let amp = field.abs_at(idx);
        let x = s as f64 * dx;
        if !(amp > 1e-300) {
            return Err(Error::WindowTooFar { x });
        }
        points.push((x, amp.ln()));
    }
    let (slope, _, residual) =
        linear_fit(&points).ok_or_else(|| config_err("tail window holds fewer than two points"))?;
    Ok(TailFit {
        window,
        slope: -slope,
        residual,
    })
}

/// Result of the minimal-localization eigenproblem.
#[derive(Debug, Clone)]
pub struct MinLocalization {
    /// Least achievable mass outside the region.
    pub lambda_min: f64,
    /// A unit-norm positive-energy state attaining it.
    pub minimizer: SpinorField,
    /// Full ascending spectrum of the compressed operator.
    pub spectrum: Vec<f64>,
}

/// Matrix of `chi(outside)` in the positive-energy plane-wave basis.
pub fn compressed_outside_operator(region: &Region, params: &SimulationParams) -> CMatrix {
    let n = params.points();
    let m = params.mass();
    let grid = params.momentum_grid();
    // g[d] = (1/N) sum_{x outside} exp(2 pi i d (x_n - x_first)/L) ; then
    // <u_j, chi u_k> = w_j . w_k * g[k - j] * exp(i (p_k - p_j) x_first)
    let mut g: Vec<C64> = region
        .mask()
        .into_iter()
        .map(|inside| if inside { ZERO } else { ONE })
        .collect();
    Fft::new(n).inverse(&mut g);
    let spinors: Vec<[C64; 2]> = (0..n).map(|k| positive_spinor(grid.get(k), m)).collect();
    let x_first = params.position(0);
    CMatrix::from_fn(n, n, |j, k| {
        let overlap = spinors[j][0].conj() * spinors[k][0] + spinors[j][1].conj() * spinors[k][1];
        let d = (k + n - j) % n;
        let phase = C64::from_polar(1.0, (grid.get(k) - grid.get(j)) * x_first);
        overlap * g[d] * phase
    })
}

/// Minimizes the mass outside `region` over unit-norm positive-energy states.
pub fn min_localization(region: &Region, params: &SimulationParams) -> Result<MinLocalization> {
    if region.points() != params.points() {
        return Err(config_err("region and grid sizes differ"));
    }
    if !region.is_proper() {
        return Err(config_err(
            "region and its complement must both be nonempty",
        ));
    }
    let a = compressed_outside_operator(region, params);
    let eig = HermitianEigen::new(&a)?;
    let coeffs = eig.vector(0);
    let minimizer = field_from_basis(params, &coeffs);
    Ok(MinLocalization {
        lambda_min: eig.values[0].clamp(0.0, 1.0),
        minimizer,
        spectrum: eig.values,
    })
}

/// Field `sum_k c_k u_k`, phased so its largest entry is real and positive.
pub fn field_from_basis(params: &SimulationParams, coeffs: &[C64]) -> SpinorField {
    let m = params.mass();
    let x_first = params.position(0);
    let scale = (params.points() as f64 / params.length()).sqrt();
    let mut field = SpinorField::from_momentum_profile(*params, |k, p| {
        let c = coeffs[k] * C64::from_polar(scale, p * x_first);
        positive_spinor(p, m).map(|w| w * c)
    });
    let (mut best, mut phase) = (0.0, ONE);
    for z in field.upper().iter().chain(field.lower()) {
        if z.norm() > best {
            best = z.norm();
            phase = z.conj() / best;
        }
    }
    field.scale_mut(phase);
    field
}

/// The same minimization without the energy constraint: the minimum is 0,
/// attained by a state concentrated on one grid point of the region.
pub fn unconstrained_min_localization(
    region: &Region,
    params: &SimulationParams,
) -> Result<(f64, SpinorField)> {
    if !region.is_proper() {
        return Err(config_err(
            "region and its complement must both be nonempty",
        ));
    }
    // chi(outside) is diagonal with 0/1 entries; its least eigenvalue is 0
    let lambda = region
        .complement()
        .mask()
        .iter()
        .map(|&out| if out { 1.0 } else { 0.0 })
        .fold(1.0, f64::min);
    let site = region.indices().next().expect("region is nonempty");
    let mut witness = SpinorField::zeros(*params);
    witness.set(site, [ONE, ZERO]);
    Ok((lambda, witness.normalized()))
}

/// Largest `|psi - psi'|` over the region, for two distinct positive-energy states.
pub fn coincidence_gap(psi: &SpinorField, other: &SpinorField, region: &Region) -> Result<f64> {
    for (name, f) in [("first", psi), ("second", other)] {
        if negative_fraction(f)? >= 1e-10 {
            return Err(Error::InvalidInput(format!(
                "{name} state is not positive-energy"
            )));
        }
    }
    let diff = psi.sub(other);
    if diff.max_abs() == 0.0 {
        return Err(Error::Degenerate("the two states are identical".into()));
    }
    Ok(region.indices().map(|n| diff.abs_at(n)).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn params() -> SimulationParams {
        SimulationParams::with_half_step(1.0, 16.0, 64).unwrap()
    }

    #[test]
    fn region_algebra() {
        let r = Region::from_intervals(10, &[2..4, 3..6, 8..10]).unwrap();
        assert_eq!(r.intervals(), &[2..6, 8..10]);
        assert_eq!(r.count(), 6);
        assert_eq!(r.complement().intervals(), &[0..2, 6..8]);
        let t = r.translate(3);
        assert_eq!(t.intervals(), &[1..3, 5..9]);
        assert!(r.is_disjoint(&r.complement()));
        assert!(r.union(&r.complement()).is_full());
        assert!(Region::from_intervals(10, &[4..11]).is_err());
        let a = Region::from_intervals(10, &[0..2]).unwrap();
        let b = Region::from_intervals(10, &[5..7]).unwrap();
        assert_eq!(a.gap(&b, 1.0), 4.0);
        assert_eq!(r.to_string(), "[2,6)+[8,10)");
    }

    #[test]
    fn nw_state_peaks_on_its_center() {
        let p = params();
        for x0 in [0.0, 2.5, -4.0] {
            let psi = newton_wigner_state(p, x0).unwrap();
            let peak = (0..psi.len())
                .max_by(|&a, &b| psi.abs_at(a).total_cmp(&psi.abs_at(b)))
                .unwrap();
            assert_eq!(p.position(peak), x0);
            assert!(negative_fraction(&psi).unwrap() < 1e-10);
        }
        assert!(newton_wigner_state(p, 0.1).is_err());
    }

    #[test]
    fn nw_translation_is_a_shift() {
        let p = params();
        let a = newton_wigner_state(p, 0.0).unwrap();
        let b = newton_wigner_state(p, 3.0 * p.dx()).unwrap();
        assert!(a.shifted(3).max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn exponential_fit_is_exact() {
        let p = SimulationParams::with_half_step(1.0, 40.0, 1024).unwrap();
        let kappa = 0.7;
        let f = SpinorField::from_fn(p, |x| [C64::new((-kappa * x.abs()).exp(), 0.0), ZERO]);
        let fit = tail_decay_rate(&f, (5.0, 10.0)).unwrap();
        assert!((fit.slope - kappa).abs() < 1e-9);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn tail_window_errors() {
        let p = SimulationParams::with_half_step(1.0, 40.0, 1024).unwrap();
        let f = SpinorField::from_fn(p, |x| [C64::new((-4.0 * x * x).exp(), 0.0), ZERO]);
        assert!(matches!(
            tail_decay_rate(&f, (15.0, 19.0)),
            Err(Error::WindowTooFar { .. })
        ));
        assert!(tail_decay_rate(&f, (5.0, 25.0)).is_err());
        assert!(tail_decay_rate(&f, (5.0, 4.0)).is_err());
    }

    #[test]
    fn minimizer_satisfies_its_contract() {
        let p = params();
        let region = Region::centered(&p, 0.0, 1.0);
        let res = min_localization(&region, &p).unwrap();
        assert!(res.lambda_min > 0.0 && res.lambda_min < 1.0);
        assert!((res.minimizer.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(negative_fraction(&res.minimizer).unwrap() < 1e-10);
        let outside = res.minimizer.mass_where(|n| !region.contains(n));
        assert!((outside - res.lambda_min).abs() < 1e-10);
    }

    #[test]
    fn trivial_regions_rejected() {
        let p = params();
        assert!(min_localization(&Region::empty(64), &p).is_err());
        assert!(min_localization(&Region::full(64), &p).is_err());
        assert!(unconstrained_min_localization(&Region::full(64), &p).is_err());
    }

    #[test]
    fn unconstrained_minimum_is_zero() {
        let p = params();
        let region = Region::centered(&p, 0.0, 4.0);
        let (lambda, witness) = unconstrained_min_localization(&region, &p).unwrap();
        assert_eq!(lambda, 0.0);
        assert_eq!(witness.mass_where(|n| !region.contains(n)), 0.0);
    }

    #[test]
    fn coincidence_gap_paths() {
        let p = params();
        let psi = newton_wigner_state(p, -4.0).unwrap();
        let region = Region::centered(&p, 3.0, 1.0);
        assert!(matches!(
            coincidence_gap(&psi, &psi, &region),
            Err(Error::Degenerate(_))
        ));
        let theta = PI / 7.0;
        let rotated = psi.scaled(C64::from_polar(1.0, theta));
        let gap = coincidence_gap(&psi, &rotated, &region).unwrap();
        let max_in = region.indices().map(|n| psi.abs_at(n)).fold(0.0, f64::max);
        let expect = (ONE - C64::from_polar(1.0, theta)).norm() * max_in;
        assert!((gap - expect).abs() < 1e-12);
    }
}
