//! Experiments on the truncated Fock lattice.

use std::ops::Range;

use poslab_core::bell::{
    equivariance_report, joint_region_frequency, one_particle_packet, BellModel, ConfigSpace,
    Configuration, FockLatticeState, JumpProcess, LatticeConfig, Trajectory, TrajectorySummary,
    MAX_STEP_JUMP_PROBABILITY,
};
use poslab_core::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::output::{Artifacts, Csv};

fn invalid(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Runs one trajectory per stream in parallel; results come back in stream
/// order, with the full jump log kept for the first `keep_logs` streams.
pub fn run_ensemble(
    process: &JumpProcess<'_>,
    seed: u64,
    streams: Range<u64>,
    keep_logs: usize,
) -> Result<Vec<(TrajectorySummary, Option<Trajectory>)>> {
    let first = streams.start;
    let space = process.model().space();
    streams
        .into_par_iter()
        .map(|stream| {
            let t = process.run(seed, stream, None)?;
            let summary = TrajectorySummary::of(space, &t);
            let keep = (stream - first) < keep_logs as u64;
            Ok((summary, keep.then_some(t)))
        })
        .collect()
}

fn lattice(cfg: &ExperimentConfig, coupling: f64) -> Result<LatticeConfig> {
    LatticeConfig::new(
        cfg.usize("sites"),
        cfg.usize("max_particles"),
        cfg.f64("hopping"),
        coupling,
        cfg.usize("source_site"),
    )
}

fn packet(cfg: &ExperimentConfig, model: &BellModel) -> Result<FockLatticeState> {
    one_particle_packet(
        model.config(),
        model.space(),
        cfg.f64("packet_center"),
        cfg.f64("packet_width"),
        cfg.f64("packet_momentum"),
    )
}

/// Probability mass per particle number.
fn sector_sums(space: &ConfigSpace, p: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for (c, x) in space.configs().iter().zip(p) {
        let k = c.count();
        if out.len() <= k {
            out.resize(k + 1, 0.0);
        }
        out[k] += x;
    }
    out
}

fn check_times(total_time: f64, dt: f64) -> Result<()> {
    if !(total_time >= 0.0 && dt > 0.0) {
        return Err(invalid("need `total_time` >= 0 and `time_step` > 0"));
    }
    let steps = (total_time / dt).round();
    if (steps * dt - total_time).abs() > 1e-9 * total_time.max(1.0) {
        return Err(invalid(format!(
            "`time_step` {dt} does not divide `total_time` {total_time}"
        )));
    }
    Ok(())
}

fn step_flag(out: &mut Artifacts, name: &str, p: f64) {
    out.flag(
        name,
        p <= MAX_STEP_JUMP_PROBABILITY,
        format!("largest per-step jump probability {p:e}, bound {MAX_STEP_JUMP_PROBABILITY}"),
    );
}

#[derive(Debug, Clone)]
pub struct BelljumpPlan {
    seed: u64,
    model: BellModel,
    psi0: FockLatticeState,
    total_time: f64,
    dt: f64,
    trajectories: usize,
    logged: usize,
}

#[derive(Serialize)]
struct BelljumpSummary {
    trajectories: usize,
    total_time: f64,
    time_step: f64,
    dimension: usize,
    tv_distance: f64,
    sampling_scale: f64,
    envelope: f64,
    within_envelope: bool,
    max_jump_probability: f64,
    total_jumps: usize,
    sector_changing_jumps: usize,
    born_sector_weights: Vec<f64>,
    empirical_sector_weights: Vec<f64>,
}

impl BelljumpPlan {
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Self> {
        let model = BellModel::new(lattice(cfg, cfg.f64("coupling"))?)?;
        let psi0 = packet(cfg, &model)?;
        let (total_time, dt) = (cfg.f64("total_time"), cfg.f64("time_step"));
        check_times(total_time, dt)?;
        let trajectories = cfg.usize("trajectories");
        if trajectories == 0 {
            return Err(invalid("`trajectories` must be at least 1"));
        }
        Ok(Self {
            seed: cfg.seed,
            model,
            psi0,
            total_time,
            dt,
            trajectories,
            logged: cfg.usize("logged_trajectories").min(trajectories),
        })
    }

    pub fn execute(&self, out: &mut Artifacts) -> Result<()> {
        let process = self
            .model
            .jump_process(&self.psi0, self.total_time, self.dt)?;
        let runs = run_ensemble(
            &process,
            self.seed,
            0..self.trajectories as u64,
            self.logged,
        )?;
        let summaries: Vec<TrajectorySummary> = runs.iter().map(|(s, _)| *s).collect();
        let report = equivariance_report(&process, &summaries);
        let space = self.model.space();

        let mut hist = Csv::new(&["config", "empirical_p", "born_p"]);
        for (i, c) in space.configs().iter().enumerate() {
            hist.row(vec![
                c.to_string().into(),
                report.empirical[i].into(),
                report.born[i].into(),
            ]);
        }
        let mut log = Csv::new(&["traj_id", "t_jump", "from_config", "to_config"]);
        for (id, (_, t)) in runs.iter().enumerate() {
            for j in t.iter().flat_map(|t| &t.jumps) {
                log.row(vec![
                    id.into(),
                    j.time.into(),
                    j.from.to_string().into(),
                    j.to.to_string().into(),
                ]);
            }
        }
        let sectors = |p: &[f64]| sector_sums(space, p);
        out.add_csv("histogram.csv", hist);
        out.add_csv("trajectories.csv", log);
        out.add_json(
            "belljump.json",
            &BelljumpSummary {
                trajectories: report.trajectories,
                total_time: process.final_time(),
                time_step: process.dt(),
                dimension: space.len(),
                tv_distance: report.tv_distance,
                sampling_scale: report.sampling_scale,
                envelope: report.envelope,
                within_envelope: report.within_envelope(),
                max_jump_probability: report.max_jump_probability,
                total_jumps: report.total_jumps,
                sector_changing_jumps: report.sector_changing_jumps,
                born_sector_weights: sectors(&report.born),
                empirical_sector_weights: sectors(&report.empirical),
            },
        );
        step_flag(out, "jump_step_bound", report.max_jump_probability);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct JointclickPlan {
    seed: u64,
    models: Vec<BellModel>,
    psi0: FockLatticeState,
    region_a: Configuration,
    region_b: Configuration,
    total_time: f64,
    dt: f64,
    trajectories: usize,
}

#[derive(Serialize)]
struct JointclickSummary {
    region_a: String,
    region_b: String,
    total_time: f64,
    couplings: Vec<f64>,
    joint_initial: Vec<f64>,
    joint_final: Vec<f64>,
    joint_empirical: Option<Vec<f64>>,
    initial_all_zero: bool,
    final_increasing_in_coupling: bool,
}

fn site_region(cfg: &ExperimentConfig, key: &str) -> Result<Configuration> {
    let sites = cfg.sites(key);
    let m = cfg.usize("sites");
    if sites.is_empty() || sites.iter().any(|&s| s >= m) {
        return Err(invalid(format!("`{key}` must list sites below {m}")));
    }
    Ok(Configuration::from_sites(sites))
}

impl JointclickPlan {
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Self> {
        let couplings = cfg.list("couplings");
        if couplings.is_empty() || couplings.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(
                "`couplings` must be nonempty and strictly ascending",
            ));
        }
        let models = couplings
            .iter()
            .map(|&g| BellModel::new(lattice(cfg, g)?))
            .collect::<Result<Vec<_>>>()?;
        let psi0 = packet(cfg, &models[0])?;
        let (region_a, region_b) = (site_region(cfg, "region_a")?, site_region(cfg, "region_b")?);
        if region_a.intersects(&region_b) {
            return Err(invalid("`region_a` and `region_b` overlap"));
        }
        let (total_time, dt) = (cfg.f64("total_time"), cfg.f64("time_step"));
        let trajectories = cfg.usize("trajectories");
        if trajectories > 0 {
            check_times(total_time, dt)?;
        } else if !(total_time >= 0.0) {
            return Err(invalid("`total_time` must be non-negative"));
        }
        Ok(Self {
            seed: cfg.seed,
            models,
            psi0,
            region_a,
            region_b,
            total_time,
            dt,
            trajectories,
        })
    }

    pub fn execute(&self, out: &mut Artifacts) -> Result<()> {
        use poslab_core::bell::joint_region_probability as joint;
        let sampled = self.trajectories > 0;
        let mut header = vec!["coupling", "joint_initial", "joint_final"];
        if sampled {
            header.push("joint_empirical");
        }
        let mut csv = Csv::new(&header);
        let (mut initial, mut fin, mut emp) = (Vec::new(), Vec::new(), Vec::new());
        let mut max_p = 0.0_f64;
        for (j, model) in self.models.iter().enumerate() {
            let space = model.space();
            let p0 = joint(space, &self.psi0, self.region_a, self.region_b)?;
            let psi_t = model.schrodinger_step(&self.psi0, self.total_time)?;
            let pt = joint(space, &psi_t, self.region_a, self.region_b)?;
            let mut row = vec![model.config().coupling.into(), p0.into(), pt.into()];
            if sampled {
                let process = model.jump_process(&self.psi0, self.total_time, self.dt)?;
                let n = self.trajectories as u64;
                let runs = run_ensemble(&process, self.seed, j as u64 * n..(j as u64 + 1) * n, 0)?;
                let finals: Vec<Configuration> = runs
                    .iter()
                    .map(|(s, _)| space.get(s.final_config))
                    .collect();
                max_p = runs
                    .iter()
                    .fold(max_p, |m, (s, _)| m.max(s.max_jump_probability));
                let f = joint_region_frequency(&finals, self.region_a, self.region_b)?;
                row.push(f.into());
                emp.push(f);
            }
            csv.row(row);
            initial.push(p0);
            fin.push(pt);
        }
        out.add_csv("jointclick.csv", csv);
        out.add_json(
            "jointclick.json",
            &JointclickSummary {
                region_a: self.region_a.to_string(),
                region_b: self.region_b.to_string(),
                total_time: self.total_time,
                couplings: self.models.iter().map(|m| m.config().coupling).collect(),
                initial_all_zero: initial.iter().all(|&p| p == 0.0),
                final_increasing_in_coupling: fin.windows(2).all(|w| w[1] > w[0]),
                joint_initial: initial,
                joint_final: fin,
                joint_empirical: sampled.then_some(emp),
            },
        );
        if sampled {
            step_flag(out, "jump_step_bound", max_p);
        }
        Ok(())
    }
}
