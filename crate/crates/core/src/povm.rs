//! Detector operators on the discretized one-particle spinor space.
//!
//! Two families are built for every region `D`: the plain indicator
//! `chi(D)` and its compression `P+ chi(D) P+` to the positive-energy
//! subspace. The first commutes for disjoint regions but does not preserve
//! positive energy; the second preserves positive energy but fails to commute.
//! Matrices act on the stacked `(upper, lower)` vector of a [`SpinorField`].

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods win when std is linked
use num_traits::Float;

use crate::error::{config_err, Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix};
use crate::localization::Region;
use crate::spectral::{projector_matrix, EnergySign, SimulationParams, SpinorField};
use crate::{C64, I, ONE, ZERO};

/// Commutator norms at or below this are treated as zero.
pub const COMMUTATOR_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    Indicator,
    ProjectedIndicator,
}

impl DetectorKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Indicator => "indicator",
            Self::ProjectedIndicator => "projected_indicator",
        }
    }
}

/// Hermitian effect `0 <= D <= 1` attached to a spatial region.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorOperator {
    params: SimulationParams,
    kind: DetectorKind,
    region: Region,
    matrix: CMatrix,
}

impl DetectorOperator {
    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn params(&self) -> &SimulationParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, field: &SpinorField) -> SpinorField {
        let v = self.matrix.mul_vec(&field.to_vector());
        SpinorField::from_vector(self.params, &v).expect("dimension fixed at construction")
    }

    /// Smallest and largest eigenvalue.
    pub fn spectrum_bounds(&self) -> Result<(f64, f64)> {
        let vals = hermitian_eigenvalues(&self.matrix)?;
        Ok((vals[0], vals[vals.len() - 1]))
    }

    /// `||P- D P+||`: how far `D` maps positive-energy states out of the
    /// positive-energy subspace.
    pub fn positive_subspace_leakage(&self) -> Result<f64> {
        let plus = projector_matrix(&self.params, EnergySign::Positive);
        let minus = projector_matrix(&self.params, EnergySign::Negative);
        minus.mul(&self.matrix).mul(&plus).spectral_norm()
    }

    /// `||D^2 - D||`, zero exactly for projections.
    pub fn idempotence_defect(&self) -> Result<f64> {
        self.matrix
            .mul(&self.matrix)
            .sub(&self.matrix)
            .spectral_norm()
    }
}

fn check_region(params: &SimulationParams, region: &Region) -> Result<()> {
    if region.points() != params.points() {
        return Err(config_err("region and grid sizes differ"));
    }
    if region.is_empty() {
        return Err(config_err("detector region is empty"));
    }
    Ok(())
}

/// Diagonal projection `chi(D)` on both spinor components.
pub fn build_indicator(params: &SimulationParams, region: &Region) -> Result<DetectorOperator> {
    check_region(params, region)?;
    let n = params.points();
    let mask = region.mask();
    let diag: Vec<C64> = (0..2 * n)
        .map(|i| if mask[i % n] { ONE } else { ZERO })
        .collect();
    Ok(DetectorOperator {
        params: *params,
        kind: DetectorKind::Indicator,
        region: region.clone(),
        matrix: CMatrix::from_diagonal(&diag),
    })
}

/// `P+ chi(D) P+`.
pub fn build_projected_indicator(
    params: &SimulationParams,
    region: &Region,
) -> Result<DetectorOperator> {
    check_region(params, region)?;
    let n = params.points();
    let plus = projector_matrix(params, EnergySign::Positive);
    let inside: Vec<usize> = region.indices().flat_map(|i| [i, i + n]).collect();
    let dim = 2 * n;
    // P chi P = sum over inside columns c of P[:, c] P[c, :]
    let mut out = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for &c in &inside {
            let a = plus[(i, c)];
            if a == ZERO {
                continue;
            }
            let row = plus.row(c);
            for (j, b) in row.iter().enumerate() {
                out[(i, j)] += a * b;
            }
        }
    }
    Ok(DetectorOperator {
        params: *params,
        kind: DetectorKind::ProjectedIndicator,
        region: region.clone(),
        matrix: out,
    })
}

/// Norm of `[D1, D2]` for two detectors at equal time.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorReport {
    pub region_a: Region,
    pub region_b: Region,
    /// Smallest distance between points of the two regions.
    pub gap: f64,
    /// Largest singular value of the commutator.
    pub norm: f64,
    pub kind_a: DetectorKind,
    pub kind_b: DetectorKind,
}

pub fn commutator_norm(a: &DetectorOperator, b: &DetectorOperator) -> Result<CommutatorReport> {
    if a.dim() != b.dim() {
        return Err(config_err(format!(
            "incompatible detector dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let comm = a.matrix.commutator(&b.matrix);
    // [A, B] is anti-Hermitian for Hermitian A, B: i [A, B] is Hermitian
    let norm = if comm.max_abs() == 0.0 {
        0.0
    } else {
        let vals = hermitian_eigenvalues(&comm.scale(I))?;
        vals.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    };
    Ok(CommutatorReport {
        region_a: a.region.clone(),
        region_b: b.region.clone(),
        gap: a.region.gap(&b.region, a.params.dx()),
        norm,
        kind_a: a.kind,
        kind_b: b.kind,
    })
}

/// `T_a D T_a^-1` for a translation by `shift` (a multiple of `dx`).
pub fn translate_operator(d: &DetectorOperator, shift: f64) -> Result<DetectorOperator> {
    let dx = d.params.dx();
    let steps = (shift / dx).round();
    if (steps * dx - shift).abs() > 1e-9 * dx.max(shift.abs()) {
        return Err(config_err(format!(
            "translation {shift} is not a multiple of dx = {dx}"
        )));
    }
    let n = d.params.points();
    let s = (steps as i64).rem_euclid(n as i64) as usize;
    let src = |i: usize| {
        let (comp, x) = (i / n, i % n);
        comp * n + (x + n - s) % n
    };
    let matrix = CMatrix::from_fn(2 * n, 2 * n, |i, j| d.matrix[(src(i), src(j))]);
    Ok(DetectorOperator {
        params: d.params,
        kind: d.kind,
        region: d.region.translate(s as i64),
        matrix,
    })
}

/// Click probability `<psi, D psi>` for a unit-norm state.
pub fn click_probability(psi: &SpinorField, d: &DetectorOperator) -> Result<f64> {
    const TOL: f64 = 1e-10;
    let norm_sqr = psi.norm_sqr();
    if (norm_sqr - 1.0).abs() > TOL {
        return Err(Error::NotNormalized { norm_sqr });
    }
    if psi.len() != d.params.points() {
        return Err(config_err("state and detector grids differ"));
    }
    let v = psi.to_vector();
    let dv = d.matrix.mul_vec(&v);
    let value: C64 = v.iter().zip(&dv).map(|(a, b)| a.conj() * b).sum::<C64>() * d.params.dx();
    if value.im.abs() > TOL {
        return Err(Error::InvalidInput(format!(
            "expectation has imaginary part {}",
            value.im
        )));
    }
    if value.re < -TOL || value.re > 1.0 + TOL {
        return Err(Error::InvalidInput(format!(
            "click probability {} outside [0, 1]",
            value.re
        )));
    }
    Ok(value.re.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_positive_packet, negative_fraction};

    fn params() -> SimulationParams {
        SimulationParams::with_half_step(1.0, 8.0, 32).unwrap()
    }

    #[test]
    fn whole_box_indicator_is_identity() {
        let p = params();
        let d = build_indicator(&p, &Region::full(32)).unwrap();
        assert_eq!(d.matrix(), &CMatrix::identity(64));
        let pd = build_projected_indicator(&p, &Region::full(32)).unwrap();
        let plus = projector_matrix(&p, EnergySign::Positive);
        assert!(pd.matrix().sub(&plus).max_abs() < 1e-12);
    }

    #[test]
    fn indicator_is_a_projection() {
        let p = params();
        let r = Region::centered(&p, 0.0, 2.0);
        let d = build_indicator(&p, &r).unwrap();
        assert_eq!(d.matrix().mul(d.matrix()), *d.matrix());
        let dc = build_indicator(&p, &r.complement()).unwrap();
        assert_eq!(d.matrix().mul(dc.matrix()).max_abs(), 0.0);
        assert!(build_indicator(&p, &Region::empty(32)).is_err());
    }

    #[test]
    fn self_commutator_is_zero() {
        let p = params();
        let r = Region::centered(&p, 0.0, 2.0);
        let d = build_projected_indicator(&p, &r).unwrap();
        assert_eq!(commutator_norm(&d, &d).unwrap().norm, 0.0);
    }

    #[test]
    fn translation_edge_cases() {
        let p = params();
        let r = Region::centered(&p, 0.0, 1.0);
        let d = build_indicator(&p, &r).unwrap();
        assert_eq!(translate_operator(&d, 0.0).unwrap(), d);
        assert_eq!(
            translate_operator(&d, p.length()).unwrap().matrix(),
            d.matrix()
        );
        assert!(translate_operator(&d, 0.3 * p.dx()).is_err());
        let shifted = translate_operator(&d, 3.0 * p.dx()).unwrap();
        let direct = build_indicator(&p, &r.translate(3)).unwrap();
        assert_eq!(shifted, direct);
    }

    #[test]
    fn click_probability_errors_and_identity() {
        let p = params();
        let psi = make_positive_packet(p, 0.0, 1.0, 0.0).unwrap();
        let id = build_indicator(&p, &Region::full(32)).unwrap();
        assert!((click_probability(&psi, &id).unwrap() - 1.0).abs() < 1e-12);
        let half = psi.scaled(C64::new(0.5, 0.0));
        assert!(matches!(
            click_probability(&half, &id),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn indicator_breaks_positive_energy() {
        let p = params();
        let psi = make_positive_packet(p, 0.0, 1.0, 0.0).unwrap();
        let d = build_indicator(&p, &Region::centered(&p, 0.5, 1.0)).unwrap();
        assert!(negative_fraction(&d.apply(&psi)).unwrap() > 1e-6);
    }
}
