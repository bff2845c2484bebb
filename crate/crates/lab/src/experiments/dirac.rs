//! Experiments on the periodic Dirac grid.

use poslab_core::evolution::{
    causality_check, compact_bump, fragility_scan, loglog_slope, mass_outside, PotentialProfile,
    PotentialShape,
};
use poslab_core::localization::{
    min_localization, newton_wigner_state_with_cutoff, tail_decay_rate,
    unconstrained_min_localization, Region,
};
use poslab_core::povm::{
    build_indicator, build_projected_indicator, commutator_norm, COMMUTATOR_FLOOR,
};
use poslab_core::spectral::{
    make_positive_packet, negative_fraction, split_energy, SimulationParams, SpinorField,
};
use poslab_core::{Error, Result};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::output::{Artifacts, Csv};

fn invalid(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Grid from `mass`, `length`, `points` and an optional `time_step` (default dx/2).
fn grid(cfg: &ExperimentConfig, with_step: bool) -> Result<SimulationParams> {
    let (m, l, n) = (cfg.f64("mass"), cfg.f64("length"), cfg.usize("points"));
    match with_step.then(|| cfg.opt_f64("time_step")).flatten() {
        Some(dt) => SimulationParams::new(m, l, n, dt),
        None => SimulationParams::with_half_step(m, l, n),
    }
}

fn positive(key: &str, x: f64) -> Result<f64> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(invalid(format!("`{key}` must be positive, got {x}")))
    }
}

/// `x, abs_psi, log_abs_psi` over the whole grid.
fn profile_csv(field: &SpinorField) -> Csv {
    let params = field.params();
    let mut csv = Csv::new(&["x", "abs_psi", "log_abs_psi"]);
    for n in 0..field.len() {
        let a = field.abs_at(n);
        csv.row(vec![params.position(n).into(), a.into(), a.ln().into()]);
    }
    csv
}

/// `first:last` grid positions of each interval of the region, joined by `;`.
pub fn describe_region(params: &SimulationParams, region: &Region) -> String {
    region
        .intervals()
        .iter()
        .map(|r| {
            format!(
                "{}:{}",
                params.position(r.start),
                params.position(r.end - 1)
            )
        })
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Debug, Clone)]
pub struct TailsPlan {
    center: f64,
    window: (f64, f64),
    cutoff_fraction: f64,
    state: SpinorField,
}

#[derive(Serialize)]
struct TailSummary {
    center: f64,
    window_start: f64,
    window_end: f64,
    slope: f64,
    residual: f64,
    mass: f64,
    relative_error: f64,
    cutoff_fraction: f64,
}

impl TailsPlan {
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Self> {
        let params = grid(cfg, false)?;
        let window = (cfg.f64("window_start"), cfg.f64("window_end"));
        if !(window.0 > 0.0 && window.1 > window.0 && window.1 < 0.5 * params.length()) {
            return Err(invalid(format!(
                "tail window ({}, {}) must satisfy 0 < start < end < length/2",
                window.0, window.1
            )));
        }
        let cutoff_fraction = cfg.f64("cutoff_fraction");
        if !(cutoff_fraction > 0.0 && cutoff_fraction <= 1.0) {
            return Err(invalid("`cutoff_fraction` must lie in (0, 1]"));
        }
        let center = cfg.f64("center");
        let cutoff = cutoff_fraction * std::f64::consts::PI / params.dx();
        let state = newton_wigner_state_with_cutoff(params, center, Some(cutoff))?;
        Ok(Self {
            center,
            window,
            cutoff_fraction,
            state,
        })
    }

    pub fn execute(&self, out: &mut Artifacts) -> Result<()> {
        let params = *self.state.params();
        let fit = tail_decay_rate(&self.state, self.window)?;
        let m = params.mass();
        out.add_csv("tail_profile.csv", profile_csv(&self.state));
        out.add_json(
            "tail_fit.json",
            &TailSummary {
                center: self.center,
                window_start: fit.window.0,
                window_end: fit.window.1,
                slope: fit.slope,
                residual: fit.residual,
                mass: m,
                relative_error: (fit.slope - m).abs() / m,
                cutoff_fraction: self.cutoff_fraction,
            },
        );
        let far = self
            .state
            .abs_at(params.index_of(self.center + self.window.1));
        let ratio = far / self.state.max_abs();
        out.flag(
            "tail_window_above_roundoff",
            ratio > 1e-12,
            format!("|psi| at window end is {ratio:e} of the maximum"),
        );
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ProjectPlan {
    center: f64,
    radius: f64,
    bump: SpinorField,
}

#[derive(Serialize)]
struct ProjectSummary {
    bump_center: f64,
    bump_radius: f64,
    negative_fraction: f64,
    min_relative_abs_plus: f64,
    points_below_1e_13: usize,
    plus_mass_outside_support: f64,
}

impl ProjectPlan {
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Self> {
        let params = grid(cfg, false)?;
        let (center, radius) = (cfg.f64("bump_center"), cfg.f64("bump_radius"));
        let bump = compact_bump(params, center, radius)?;
        Ok(Self {
            center,
            radius,
            bump,
        })
    }

    pub fn execute(&self, out: &mut Artifacts) -> Result<()> {
        let params = *self.bump.params();
        let split = split_energy(&self.bump)?;
        let mut csv = Csv::new(&["x", "abs_bump", "abs_plus", "abs_minus"]);
        for n in 0..self.bump.len() {
            csv.row(vec![
                params.position(n).into(),
                self.bump.abs_at(n).into(),
                split.plus.abs_at(n).into(),
                split.minus.abs_at(n).into(),
            ]);
        }
        let peak = split.plus.max_abs();
        let min = (0..split.plus.len())
            .map(|n| split.plus.abs_at(n))
            .fold(f64::INFINITY, f64::min);
        let below = (0..split.plus.len())
            .filter(|&n| split.plus.abs_at(n) <= 1e-13 * peak)
            .count();
        out.add_csv("project.csv", csv);
        out.add_json(
            "project.json",
            &ProjectSummary {
                bump_center: self.center,
                bump_radius: self.radius,
                negative_fraction: negative_fraction(&self.bump)?,
                min_relative_abs_plus: min / peak,
                points_below_1e_13: below,
                plus_mass_outside_support: mass_outside(&split.plus, self.center, self.radius),
            },
        );
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FragilityPlan {
    packet: SpinorField,
    shape: PotentialShape,
    strengths: Vec<f64>,
    total_time: f64,
    fit_max: f64,
}

#[derive(Serialize)]
struct FragilitySummary {
    potential: &'static str,
    total_time: f64,
    time_step_max: f64,
    fit_max_strength: f64,
    fit_points: usize,
    loglog_slope: Option<f64>,
    positive_for_nonzero_strength: bool,
    strengths: Vec<f64>,
    negative_fractions: Vec<f64>,
}

impl FragilityPlan {
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Self> {
        let params = grid(cfg, true)?;
        let (pc, pw) = (cfg.f64("potential_center"), cfg.f64("potential_width"));
        positive("potential_width", pw)?;
        let shape = match cfg.text("potential") {
            "box" => PotentialShape::Box {
                center: pc,
                half_width: pw,
            },
            "gaussian-well" => PotentialShape::GaussianWell {
                center: pc,
                width: pw,
            },
            other => {
                return Err(invalid(format!(
                    "`potential` must be box or gaussian-well, got {other:?}"
                )))
            }
        };
        let strengths = cfg.list("strengths").to_vec();
        if strengths.iter().any(|s| !(*s >= 0.0)) || strengths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(
                "`strengths` must be non-negative and strictly ascending",
            ));
        }
        for &s in &strengths {
            PotentialProfile::new(&params, shape, s)?;
        }
        let packet = make_positive_packet(
            params,
            cfg.f64("packet_center"),
            cfg.f64("packet_width"),
            cfg.f64("packet_momentum"),
        )?;
        Ok(Self {
            packet,
            shape,
            strengths,
            total_time: positive("total_time", cfg.f64("total_time"))?,
            fit_max: positive("fit_max_strength", cfg.f64("fit_max_strength"))?,
        })
    }

    pub fn execute(&self, out: &mut Artifacts) -> Result<()> {
        let dt = self.packet.params().dt();
        let points = fragility_scan(
            &self.packet,
            self.shape,
            &self.strengths,
            self.total_time,
            dt,
        )?;
        let mut csv = Csv::new(&["strength", "negative_fraction"]);
        for p in &points {
            csv.row(vec![p.strength.into(), p.negative_fraction.into()]);
        }
        let fit: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| p.strength > 0.0 && p.strength <= self.fit_max)
            .map(|p| (p.strength, p.negative_fraction))
            .collect();
        out.add_csv("fragility.csv", csv);
        out.add_json(
            "fragility.json",
            &FragilitySummary {
                potential: self.shape.kind_name(),
                total_time: self.total_time,
                time_step_max: dt,
                fit_max_strength: self.fit_max,
                fit_points: fit.len(),
                loglog_slope: loglog_slope(&fit),
                positive_for_nonzero_strength: points
                    .iter()
                    .all(|p| p.strength == 0.0 || p.negative_fraction > 0.0),
                strengths: points.iter().map(|p| p.strength).collect(),
                negative_fractions: points.iter().map(|p| p.negative_fraction).collect(),
            },
        );
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CausalityPlan {
    bump: SpinorField,
    time: f64,
    threshold: f64,
}

#[derive(Serialize)]
struct CausalitySummary {
    center: f64,
    support_threshold: f64,
    initial_radius: f64,
    elapsed: f64,
    leaked_mass: f64,
    within_horizon: bool,
    validity_horizon: f64,
    plus_mass_outside_support: f64,
}

impl CausalityPlan {
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Self> {
        let params = grid(cfg, false)?;
        let bump = compact_bump(params, cfg.f64("bump_center"), cfg.f64("bump_radius"))?;
        let threshold = cfg.f64("support_threshold");
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(invalid("`support_threshold` must lie in (0, 1)"));
        }
        Ok(Self {
            bump,
            time: positive("time", cfg.f64("time"))?,
            threshold,
        })
    }

    pub fn execute(&self, out: &mut Artifacts) -> Result<()> {
        let r = causality_check(&self.bump, self.time, self.threshold)?;
        let plus = split_energy(&self.bump)?.plus;
        let plus_outside = mass_outside(&plus, r.center, r.initial_radius);
        let mut csv = Csv::new(&[
            "center",
            "support_threshold",
            "initial_radius",
            "elapsed",
            "leaked_mass",
            "within_horizon",
            "validity_horizon",
            "plus_mass_outside_support",
        ]);
        csv.row(vec![
            r.center.into(),
            r.support_threshold.into(),
            r.initial_radius.into(),
            r.elapsed.into(),
            r.leaked_mass.into(),
            r.within_horizon.into(),
            r.validity_horizon.into(),
            plus_outside.into(),
        ]);
        out.add_csv("causality.csv", csv);
        out.add_json(
            "causality.json",
            &CausalitySummary {
                center: r.center,
                support_threshold: r.support_threshold,
                initial_radius: r.initial_radius,
                elapsed: r.elapsed,
                leaked_mass: r.leaked_mass,
                within_horizon: r.within_horizon,
                validity_horizon: r.validity_horizon,
                plus_mass_outside_support: plus_outside,
            },
        );
        out.flag(
            "causality_within_horizon",
            r.within_horizon,
            format!(
                "radius {} + elapsed {} against half box {}",
                r.initial_radius,
                r.elapsed,
                0.5 * self.bump.params().length()
            ),
        );
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MinlocPlan {
    params: SimulationParams,
    regions: Vec<Region>,
}

#[derive(Serialize)]
struct MinlocRow {
    region: String,
    measure: f64,
    lambda_min: f64,
    unconstrained_min: f64,
}

#[derive(Serialize)]
struct MinlocSummary {
    rows: Vec<MinlocRow>,
    antitone_under_shrinkage: bool,
}

impl MinlocPlan {
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Self> {
        let params = grid(cfg, false)?;
        let hw = positive("region_half_width", cfg.f64("region_half_width"))?;
        let c = cfg.f64("region_center");
        let regions: Vec<Region> = (0..=cfg.usize("shrink_levels"))
            .map(|k| Region::centered(&params, c, hw / (1u64 << k.min(62)) as f64))
            .collect();
        if let Some(k) = regions.iter().position(|r| !r.is_proper()) {
            return Err(invalid(format!(
                "region at shrink level {k} is empty or covers the whole grid"
            )));
        }
        Ok(Self { params, regions })
    }

    pub fn execute(&self, out: &mut Artifacts) -> Result<()> {
        let dx = self.params.dx();
        let mut csv = Csv::new(&["region", "measure", "lambda_min", "unconstrained_min"]);
        let mut rows = Vec::new();
        let mut first_minimizer = None;
        for region in &self.regions {
            let ml = min_localization(region, &self.params)?;
            let (free, _) = unconstrained_min_localization(region, &self.params)?;
            let row = MinlocRow {
                region: describe_region(&self.params, region),
                measure: region.measure(dx),
                lambda_min: ml.lambda_min,
                unconstrained_min: free,
            };
            csv.row(vec![
                row.region.clone().into(),
                row.measure.into(),
                row.lambda_min.into(),
                row.unconstrained_min.into(),
            ]);
            rows.push(row);
            first_minimizer.get_or_insert(ml.minimizer);
        }
        let antitone = rows
            .windows(2)
            .all(|w| w[1].lambda_min >= w[0].lambda_min - 1e-12);
        out.add_csv("minloc.csv", csv);
        if let Some(f) = &first_minimizer {
            out.add_csv("minimizer.csv", profile_csv(f));
        }
        out.add_json(
            "minloc.json",
            &MinlocSummary {
                rows,
                antitone_under_shrinkage: antitone,
            },
        );
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CommutatorPlan {
    params: SimulationParams,
    pairs: Vec<(Region, Region)>,
}

#[derive(Serialize)]
struct CommutatorSummary {
    floor: f64,
    indicator_max_norm: f64,
    indicator_leakage: f64,
    projected_max_leakage: f64,
    projected_gaps: Vec<f64>,
    projected_norms: Vec<f64>,
    projected_above_floor: bool,
    projected_decreasing: bool,
}

impl CommutatorPlan {
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Self> {
        let params = grid(cfg, false)?;
        let width = positive("region_width", cfg.f64("region_width"))?;
        let gaps = cfg.list("gaps");
        if gaps.iter().any(|g| !(*g > 0.0)) || gaps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("`gaps` must be positive and strictly ascending"));
        }
        let mut pairs = Vec::new();
        for &g in gaps {
            let h = 0.5 * g;
            let a = Region::span(&params, -h - width, -h);
            let b = Region::span(&params, h, h + width);
            if a.is_empty() || b.is_empty() || !a.is_disjoint(&b) {
                return Err(invalid(format!(
                    "gap {g} with width {width} does not give two disjoint nonempty regions"
                )));
            }
            pairs.push((a, b));
        }
        Ok(Self { params, pairs })
    }

    pub fn execute(&self, out: &mut Artifacts) -> Result<()> {
        let p = &self.params;
        let mut csv = Csv::new(&["region_a", "region_b", "gap", "comm_norm", "operator_kind"]);
        let mut indicator_max = 0.0_f64;
        let mut indicator_leakage = 0.0_f64;
        let mut projected_leak = 0.0_f64;
        let (mut gaps, mut norms) = (Vec::new(), Vec::new());
        for (a, b) in &self.pairs {
            let ind = (build_indicator(p, a)?, build_indicator(p, b)?);
            let proj = (
                build_projected_indicator(p, a)?,
                build_projected_indicator(p, b)?,
            );
            for (da, db) in [&ind, &proj] {
                let r = commutator_norm(da, db)?;
                csv.row(vec![
                    describe_region(p, &r.region_a).into(),
                    describe_region(p, &r.region_b).into(),
                    r.gap.into(),
                    r.norm.into(),
                    r.kind_a.name().into(),
                ]);
                if da.kind() == ind.0.kind() {
                    indicator_max = indicator_max.max(r.norm);
                } else {
                    gaps.push(r.gap);
                    norms.push(r.norm);
                }
            }
            indicator_leakage = indicator_leakage.max(ind.0.positive_subspace_leakage()?);
            projected_leak = projected_leak
                .max(proj.0.positive_subspace_leakage()?)
                .max(proj.1.positive_subspace_leakage()?);
        }
        out.add_csv("commutator.csv", csv);
        out.add_json(
            "commutator.json",
            &CommutatorSummary {
                floor: COMMUTATOR_FLOOR,
                indicator_max_norm: indicator_max,
                indicator_leakage,
                projected_max_leakage: projected_leak,
                projected_above_floor: norms.iter().any(|&n| n > COMMUTATOR_FLOOR),
                projected_decreasing: norms.windows(2).all(|w| w[1] < w[0]),
                projected_gaps: gaps,
                projected_norms: norms,
            },
        );
        Ok(())
    }
}
