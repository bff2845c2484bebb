//! Bell-type jump process on a truncated Fock space.
//!
//! Hard-core particles live on a periodic ring of `M` sites. A configuration
//! is the set of occupied sites, with at most `N_max` particles. The
//! Hamiltonian has nearest-neighbour hopping (amplitude `-kappa`) and a source
//! term `g (a_s^dagger + a_s)` that creates or annihilates one particle at the
//! source site, coupling sector `n` to `n +- 1`.
//!
//! The actual configuration `q` jumps to `q'` at rate
//!
//! ```text
//! sigma(q' | q) = max(0, 2 Im(conj(psi(q')) H[q', q] psi(q))) / |psi(q)|^2
//! ```
//!
//! which makes `|psi_t|^2` an equivariant distribution of the process. Time is
//! discretized: during a step of length `dt` the process jumps to `q'` with
//! probability `sigma(q' | q) dt`.
//!
//! Trajectory `i` of an ensemble with root seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` on stream `i`; its first draw samples the
//! initial configuration when none is given.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // inherent float methods win when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{config_err, Error, Result};
use crate::linalg::{CMatrix, HermitianEigen};
use crate::{C64, ZERO};

/// Largest configuration space handled by the dense propagator.
pub const MAX_DIMENSION: usize = 4096;

/// Lattice and coupling constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeConfig {
    pub sites: usize,
    pub max_particles: usize,
    pub hopping: f64,
    pub coupling: f64,
    pub source_site: usize,
}

impl LatticeConfig {
    pub fn new(
        sites: usize,
        max_particles: usize,
        hopping: f64,
        coupling: f64,
        source_site: usize,
    ) -> Result<Self> {
        let cfg = Self {
            sites,
            max_particles,
            hopping,
            coupling,
            source_site,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 || self.sites > 64 {
            return Err(config_err(format!(
                "site count {} must lie in [2, 64]",
                self.sites
            )));
        }
        if self.max_particles > self.sites {
            return Err(config_err("max particle number exceeds site count"));
        }
        if self.source_site >= self.sites {
            return Err(config_err("source site outside the lattice"));
        }
        if !self.hopping.is_finite() || !self.coupling.is_finite() {
            return Err(config_err("hopping and coupling must be finite"));
        }
        Ok(())
    }

    /// `sum_{n <= N_max} C(M, n)`.
    pub fn dimension(&self) -> usize {
        let mut total = 0usize;
        let mut binom = 1usize;
        for n in 0..=self.max_particles {
            total = total.saturating_add(binom);
            binom = binom.saturating_mul(self.sites - n) / (n + 1);
        }
        total
    }
}

/// Set of occupied sites, as a bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Configuration(pub u64);

impl Configuration {
    pub const EMPTY: Self = Self(0);

    pub fn from_sites(sites: &[usize]) -> Self {
        Self(sites.iter().fold(0, |acc, &s| acc | (1u64 << s)))
    }

    pub fn sites(&self) -> Vec<usize> {
        (0..64).filter(|&s| self.contains(s)).collect()
    }

    pub fn contains(&self, site: usize) -> bool {
        site < 64 && self.0 & (1u64 << site) != 0
    }

    pub fn count(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.0 & other.0 != 0
    }

    pub fn with(&self, site: usize) -> Self {
        Self(self.0 | (1u64 << site))
    }

    pub fn without(&self, site: usize) -> Self {
        Self(self.0 & !(1u64 << site))
    }

    /// Parses a semicolon-separated site list; the empty string is the vacuum.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Self::EMPTY);
        }
        let mut sites = Vec::new();
        for part in text.split(';') {
            let s: usize = part
                .trim()
                .parse()
                .map_err(|_| config_err(format!("bad site index {part:?}")))?;
            if s >= 64 {
                return Err(config_err(format!("site index {s} out of range")));
            }
            sites.push(s);
        }
        Ok(Self::from_sites(&sites))
    }
}

/// Sorted site list joined by `;` (empty for the vacuum).
impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sites().iter().map(|s| format!("{s}")).collect();
        f.write_str(&parts.join(";"))
    }
}

/// All admissible configurations, ordered by particle number and then
/// lexicographically by sorted site list.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSpace {
    configs: Vec<Configuration>,
    index: BTreeMap<u64, usize>,
}

impl ConfigSpace {
    pub fn new(cfg: &LatticeConfig) -> Self {
        let mut configs = Vec::with_capacity(cfg.dimension());
        for n in 0..=cfg.max_particles {
            let mut combo: Vec<usize> = (0..n).collect();
            loop {
                configs.push(Configuration::from_sites(&combo));
                if !next_combination(&mut combo, cfg.sites) {
                    break;
                }
            }
        }
        let index = configs.iter().enumerate().map(|(i, c)| (c.0, i)).collect();
        Self { configs, index }
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn get(&self, i: usize) -> Configuration {
        self.configs[i]
    }

    pub fn index_of(&self, c: Configuration) -> Option<usize> {
        self.index.get(&c.0).copied()
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Amplitudes over a [`ConfigSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct FockLatticeState {
    amplitudes: Vec<C64>,
}

impl FockLatticeState {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n > 0.0) {
            return Err(Error::Degenerate("zero lattice state".into()));
        }
        for a in self.amplitudes.iter_mut() {
            *a /= n;
        }
        Ok(self)
    }

    /// Born weights `|psi(q)|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Total weight in each particle-number sector.
    pub fn sector_weights(&self, space: &ConfigSpace) -> Vec<f64> {
        let top = space.configs().iter().map(|c| c.count()).max().unwrap_or(0);
        let mut w = vec![0.0; top + 1];
        for (i, a) in self.amplitudes.iter().enumerate() {
            w[space.get(i).count()] += a.norm_sqr();
        }
        w
    }
}

/// Configuration space and dense Hamiltonian for a lattice.
pub fn build_hamiltonian(cfg: &LatticeConfig) -> Result<(ConfigSpace, CMatrix)> {
    cfg.validate()?;
    if cfg.dimension() > MAX_DIMENSION {
        return Err(config_err(format!(
            "configuration space of dimension {} exceeds {MAX_DIMENSION}",
            cfg.dimension()
        )));
    }
    let space = ConfigSpace::new(cfg);
    let dim = space.len();
    let mut h = CMatrix::zeros(dim, dim);
    let m = cfg.sites;
    let hop = C64::new(-cfg.hopping, 0.0);
    let src = C64::new(cfg.coupling, 0.0);
    for (col, &q) in space.configs().iter().enumerate() {
        for j in q.sites() {
            for nb in [(j + 1) % m, (j + m - 1) % m] {
                if q.contains(nb) {
                    continue;
                }
                let target = q.without(j).with(nb);
                let row = space
                    .index_of(target)
                    .expect("hopping preserves particle number");
                // assignment, not accumulation: on two sites both neighbours coincide
                h[(row, col)] = hop;
            }
        }
        let s = cfg.source_site;
        if !q.contains(s) && q.count() < cfg.max_particles {
            let row = space
                .index_of(q.with(s))
                .expect("created configuration is admissible");
            h[(row, col)] = src;
            h[(col, row)] = src;
        }
    }
    Ok((space, h))
}

/// Lattice model with its precomputed propagator.
#[derive(Debug, Clone)]
pub struct BellModel {
    config: LatticeConfig,
    space: ConfigSpace,
    hamiltonian: CMatrix,
    eigen: HermitianEigen,
    /// CSR adjacency of `H`: `(target, H[target, source])` per source column.
    offsets: Vec<usize>,
    targets: Vec<usize>,
    couplings: Vec<C64>,
}

impl BellModel {
    pub fn new(config: LatticeConfig) -> Result<Self> {
        let (space, hamiltonian) = build_hamiltonian(&config)?;
        let eigen = HermitianEigen::new(&hamiltonian)?;
        let dim = space.len();
        let mut offsets = Vec::with_capacity(dim + 1);
        let mut targets = Vec::new();
        let mut couplings = Vec::new();
        offsets.push(0);
        for col in 0..dim {
            for row in 0..dim {
                let h = hamiltonian[(row, col)];
                if row != col && h != ZERO {
                    targets.push(row);
                    couplings.push(h);
                }
            }
            offsets.push(targets.len());
        }
        Ok(Self {
            config,
            space,
            hamiltonian,
            eigen,
            offsets,
            targets,
            couplings,
        })
    }

    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    pub fn space(&self) -> &ConfigSpace {
        &self.space
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn dimension(&self) -> usize {
        self.space.len()
    }

    /// Configurations reachable from `q` by one Hamiltonian move.
    pub fn neighbors(&self, q: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let r = self.offsets[q]..self.offsets[q + 1];
        self.targets[r.clone()]
            .iter()
            .copied()
            .zip(self.couplings[r].iter().copied())
    }

    fn check_state(&self, psi: &FockLatticeState) -> Result<()> {
        if psi.len() != self.dimension() {
            return Err(Error::InvalidInput(format!(
                "state dimension {} != configuration space dimension {}",
                psi.len(),
                self.dimension()
            )));
        }
        Ok(())
    }

    /// Exact propagation `exp(-i H dt) psi` through the eigendecomposition.
    pub fn schrodinger_step(&self, psi: &FockLatticeState, dt: f64) -> Result<FockLatticeState> {
        self.check_state(psi)?;
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(config_err("time step must be finite and non-negative"));
        }
        if dt == 0.0 {
            return Ok(psi.clone());
        }
        let coeffs = self.eigen_coefficients(psi);
        Ok(self.state_at(&coeffs, dt))
    }

    fn eigen_coefficients(&self, psi: &FockLatticeState) -> Vec<C64> {
        let v = &self.eigen.vectors;
        let dim = self.dimension();
        (0..dim)
            .map(|k| (0..dim).map(|i| v[(i, k)].conj() * psi.amplitudes[i]).sum())
            .collect()
    }

    fn state_at(&self, coeffs: &[C64], t: f64) -> FockLatticeState {
        let v = &self.eigen.vectors;
        let dim = self.dimension();
        let phased: Vec<C64> = coeffs
            .iter()
            .zip(&self.eigen.values)
            .map(|(c, &e)| c * C64::from_polar(1.0, -e * t))
            .collect();
        FockLatticeState::new(
            (0..dim)
                .map(|i| (0..dim).map(|k| v[(i, k)] * phased[k]).sum())
                .collect(),
        )
    }

    /// Net probability current `2 Im(conj(psi(q')) H[q', q] psi(q))` from `q` into `q'`.
    pub fn current(&self, psi: &FockLatticeState, to: usize, from: usize, h: C64) -> f64 {
        2.0 * (psi.amplitudes[to].conj() * h * psi.amplitudes[from]).im
    }

    /// Jump rates out of configuration index `q`, as `(target, rate)` pairs
    /// over all Hamiltonian neighbours (zero rates included).
    pub fn jump_rates(&self, psi: &FockLatticeState, q: usize) -> Result<Vec<(usize, f64)>> {
        self.check_state(psi)?;
        let weight = psi.amplitudes[q].norm_sqr();
        if !(weight >= f64::MIN_POSITIVE) {
            return Err(Error::Stranded {
                config: self.space.get(q).0,
                time: f64::NAN,
            });
        }
        Ok(self
            .neighbors(q)
            .map(|(to, h)| (to, self.current(psi, to, q, h).max(0.0) / weight))
            .collect())
    }

    /// `d|psi(q)|^2/dt = 2 Im(conj(psi(q)) (H psi)(q))` for every `q`.
    pub fn born_derivative(&self, psi: &FockLatticeState) -> Vec<f64> {
        let hpsi = self.hamiltonian.mul_vec(&psi.amplitudes);
        psi.amplitudes
            .iter()
            .zip(&hpsi)
            .map(|(a, b)| 2.0 * (a.conj() * b).im)
            .collect()
    }

    /// Precomputes the wave function and jump rates on the time grid
    /// `t_k = k dt`, `k = 0..=T/dt`.
    pub fn jump_process(
        &self,
        psi0: &FockLatticeState,
        total_time: f64,
        dt: f64,
    ) -> Result<JumpProcess<'_>> {
        self.check_state(psi0)?;
        if !(dt > 0.0) || !(total_time >= 0.0) {
            return Err(config_err("need dt > 0 and T >= 0"));
        }
        let steps_f = (total_time / dt).round();
        if (steps_f * dt - total_time).abs() > 1e-9 * total_time.max(1.0) {
            return Err(config_err(format!(
                "time step {dt} does not divide total time {total_time}"
            )));
        }
        let steps = steps_f as usize;
        let psi0 = psi0.clone().normalized()?;
        let coeffs = self.eigen_coefficients(&psi0);
        let dim = self.dimension();
        let nnz = self.targets.len();
        let mut states = Vec::with_capacity(steps + 1);
        let mut rates = vec![0.0; steps * nnz];
        let mut totals = vec![0.0; steps * dim];
        for k in 0..=steps {
            let psi = if k == 0 {
                psi0.clone()
            } else {
                self.state_at(&coeffs, k as f64 * dt)
            };
            if k < steps {
                for q in 0..dim {
                    let weight = psi.amplitudes[q].norm_sqr();
                    let mut total = 0.0;
                    for e in self.offsets[q]..self.offsets[q + 1] {
                        let r = if weight >= f64::MIN_POSITIVE {
                            self.current(&psi, self.targets[e], q, self.couplings[e])
                                .max(0.0)
                                / weight
                        } else {
                            0.0
                        };
                        rates[k * nnz + e] = r;
                        total += r;
                    }
                    totals[k * dim + q] = if weight >= f64::MIN_POSITIVE {
                        total
                    } else {
                        f64::NAN
                    };
                }
            }
            states.push(psi);
        }
        Ok(JumpProcess {
            model: self,
            dt,
            steps,
            states,
            rates,
            totals,
        })
    }
}

/// One jump of a trajectory, recorded at the end of the step it occurred in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpRecord {
    pub time: f64,
    pub from: Configuration,
    pub to: Configuration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub stream: u64,
    pub final_time: f64,
    pub initial: Configuration,
    pub jumps: Vec<JumpRecord>,
    /// Largest per-step total jump probability `dt * sum sigma` encountered.
    pub max_jump_probability: f64,
}

impl Trajectory {
    pub fn final_config(&self) -> Configuration {
        self.jumps.last().map_or(self.initial, |j| j.to)
    }

    pub fn sector_changes(&self) -> usize {
        self.jumps
            .iter()
            .filter(|j| j.from.count() != j.to.count())
            .count()
    }
}

/// Recommended bound on `dt * (total rate)` per step.
pub const MAX_STEP_JUMP_PROBABILITY: f64 = 0.1;

/// Wave-function flow and rate tables shared read-only by all trajectories.
#[derive(Debug, Clone)]
pub struct JumpProcess<'a> {
    model: &'a BellModel,
    dt: f64,
    steps: usize,
    states: Vec<FockLatticeState>,
    /// `rates[k * nnz + e]`: rate along adjacency entry `e` at step `k`.
    rates: Vec<f64>,
    /// Total exit rate per step and configuration; NaN where `psi(q) = 0`.
    totals: Vec<f64>,
}

impl<'a> JumpProcess<'a> {
    pub fn model(&self) -> &'a BellModel {
        self.model
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn final_time(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn initial_state(&self) -> &FockLatticeState {
        &self.states[0]
    }

    pub fn final_state(&self) -> &FockLatticeState {
        &self.states[self.steps]
    }

    /// `psi(t_k)`.
    pub fn state(&self, k: usize) -> &FockLatticeState {
        &self.states[k]
    }

    /// Total exit rate of configuration index `q` at step `k`.
    pub fn total_rate(&self, k: usize, q: usize) -> f64 {
        self.totals[k * self.model.dimension() + q]
    }

    /// Rate of `q -> target` at step `k` (zero when not connected).
    pub fn rate(&self, k: usize, q: usize, target: usize) -> f64 {
        let nnz = self.model.targets.len();
        (self.model.offsets[q]..self.model.offsets[q + 1])
            .find(|&e| self.model.targets[e] == target)
            .map_or(0.0, |e| self.rates[k * nnz + e])
    }

    /// Largest `dt * total rate` over the table, restricted to configurations
    /// with nonzero weight.
    pub fn max_jump_probability(&self) -> f64 {
        self.totals
            .iter()
            .filter(|t| t.is_finite())
            .fold(0.0, |a, &t| a.max(t * self.dt))
    }

    /// RNG of trajectory `stream` under `seed`.
    pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng
    }

    /// Samples a configuration index from `|psi_0|^2` with one uniform draw.
    pub fn sample_initial(&self, rng: &mut ChaCha8Rng) -> usize {
        sample_index(&self.states[0].probabilities(), rng.gen::<f64>())
    }

    /// Runs trajectory `stream`. With `start = None` the initial
    /// configuration is drawn from `|psi_0|^2` on the same stream.
    pub fn run(&self, seed: u64, stream: u64, start: Option<usize>) -> Result<Trajectory> {
        let mut rng = Self::rng(seed, stream);
        let mut q = match start {
            Some(q) => q,
            None => self.sample_initial(&mut rng),
        };
        let space = &self.model.space;
        let initial = space.get(q);
        let dim = self.model.dimension();
        let nnz = self.model.targets.len();
        let mut jumps = Vec::new();
        let mut max_p = 0.0_f64;
        for k in 0..self.steps {
            let total = self.totals[k * dim + q];
            if total.is_nan() {
                return Err(Error::Stranded {
                    config: space.get(q).0,
                    time: k as f64 * self.dt,
                });
            }
            let p_jump = total * self.dt;
            max_p = max_p.max(p_jump);
            let u: f64 = rng.gen();
            let threshold = u * p_jump.max(1.0);
            if threshold >= p_jump {
                continue;
            }
            let mut acc = 0.0;
            let range = self.model.offsets[q]..self.model.offsets[q + 1];
            let mut next = None;
            for e in range.clone() {
                acc += self.rates[k * nnz + e] * self.dt;
                if threshold < acc {
                    next = Some(self.model.targets[e]);
                    break;
                }
            }
            // rounding can leave the threshold just past the last partial sum
            let next = next.unwrap_or_else(|| {
                range
                    .rev()
                    .find(|&e| self.rates[k * nnz + e] > 0.0)
                    .map(|e| self.model.targets[e])
                    .expect("positive total rate has a positive entry")
            });
            jumps.push(JumpRecord {
                time: (k + 1) as f64 * self.dt,
                from: space.get(q),
                to: space.get(next),
            });
            q = next;
        }
        Ok(Trajectory {
            seed,
            stream,
            final_time: self.final_time(),
            initial,
            jumps,
            max_jump_probability: max_p,
        })
    }
}

/// Index `i` with `sum_{j<i} p_j <= u < sum_{j<=i} p_j`, skipping zero weights.
pub fn sample_index(probabilities: &[f64], u: f64) -> usize {
    let total: f64 = probabilities.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probabilities.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
            acc += p;
            if target < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Single trajectory from `psi0` and `q0` with its own flow table.
pub fn simulate_trajectory(
    model: &BellModel,
    psi0: &FockLatticeState,
    q0: Configuration,
    total_time: f64,
    dt: f64,
    seed: u64,
) -> Result<Trajectory> {
    let q = model
        .space()
        .index_of(q0)
        .ok_or_else(|| config_err(format!("configuration {{{q0}}} is not admissible")))?;
    let process = model.jump_process(psi0, total_time, dt)?;
    if process.initial_state().amplitudes()[q].norm_sqr() < f64::MIN_POSITIVE {
        return Err(Error::Stranded {
            config: q0.0,
            time: 0.0,
        });
    }
    process.run(seed, 0, Some(q))
}

/// Final-time comparison of an ensemble with the Born distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivarianceReport {
    pub trajectories: usize,
    /// Total-variation distance between the empirical histogram and `|psi_T|^2`.
    pub tv_distance: f64,
    /// Approximate mean TV of pure multinomial sampling noise.
    pub sampling_scale: f64,
    /// `sampling_scale` plus three approximate standard deviations.
    pub envelope: f64,
    pub empirical: Vec<f64>,
    pub born: Vec<f64>,
    pub max_jump_probability: f64,
    pub total_jumps: usize,
    pub sector_changing_jumps: usize,
}

impl EquivarianceReport {
    pub fn within_envelope(&self) -> bool {
        self.tv_distance <= self.envelope
    }

    pub fn step_bound_respected(&self) -> bool {
        self.max_jump_probability < MAX_STEP_JUMP_PROBABILITY
    }
}

/// Summary of one trajectory kept by ensemble runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySummary {
    pub final_config: usize,
    pub jumps: usize,
    pub sector_changes: usize,
    pub max_jump_probability: f64,
}

impl TrajectorySummary {
    pub fn of(space: &ConfigSpace, t: &Trajectory) -> Self {
        Self {
            final_config: space
                .index_of(t.final_config())
                .expect("trajectory stays admissible"),
            jumps: t.jumps.len(),
            sector_changes: t.sector_changes(),
            max_jump_probability: t.max_jump_probability,
        }
    }
}

/// Builds the report from per-trajectory summaries (in any order).
pub fn equivariance_report(
    process: &JumpProcess<'_>,
    summaries: &[TrajectorySummary],
) -> EquivarianceReport {
    let dim = process.model().dimension();
    let n = summaries.len();
    let mut counts = vec![0usize; dim];
    let (mut total_jumps, mut sector) = (0, 0);
    let mut max_p = 0.0_f64;
    for s in summaries {
        counts[s.final_config] += 1;
        total_jumps += s.jumps;
        sector += s.sector_changes;
        max_p = max_p.max(s.max_jump_probability);
    }
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / n.max(1) as f64).collect();
    let born = process.final_state().probabilities();
    let (scale, envelope) = sampling_envelope(&born, n);
    EquivarianceReport {
        trajectories: n,
        tv_distance: total_variation(&empirical, &born),
        sampling_scale: scale,
        envelope,
        empirical,
        born,
        max_jump_probability: max_p,
        total_jumps,
        sector_changing_jumps: sector,
    }
}

/// Sequential ensemble: trajectory `i` uses stream `i` of `seed` and draws its
/// start from `|psi_0|^2`.
pub fn equivariance_test(
    model: &BellModel,
    psi0: &FockLatticeState,
    total_time: f64,
    dt: f64,
    n_traj: usize,
    seed: u64,
) -> Result<EquivarianceReport> {
    if n_traj == 0 {
        return Err(config_err("need at least one trajectory"));
    }
    let process = model.jump_process(psi0, total_time, dt)?;
    let summaries = (0..n_traj as u64)
        .map(|i| {
            process
                .run(seed, i, None)
                .map(|t| TrajectorySummary::of(model.space(), &t))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(equivariance_report(&process, &summaries))
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Normal approximation to the TV distance of an `n`-sample multinomial
/// histogram from its law `p`: `(mean, mean + 3 sd)`.
pub fn sampling_envelope(p: &[f64], n: usize) -> (f64, f64) {
    let n = n.max(1) as f64;
    let two_over_pi = 2.0 / core::f64::consts::PI;
    let mean = 0.5
        * p.iter()
            .map(|&x| (two_over_pi * x * (1.0 - x) / n).sqrt())
            .sum::<f64>();
    let var = 0.25
        * p.iter()
            .map(|&x| (1.0 - two_over_pi) * x * (1.0 - x) / n)
            .sum::<f64>();
    (mean, mean + 3.0 * var.sqrt())
}

fn check_disjoint(a: Configuration, b: Configuration) -> Result<()> {
    if a.intersects(&b) {
        return Err(config_err(format!(
            "detector regions {{{a}}} and {{{b}}} overlap"
        )));
    }
    Ok(())
}

/// Probability that at least one particle is in `region_a` and at least one
/// in `region_b`.
pub fn joint_region_probability(
    space: &ConfigSpace,
    psi: &FockLatticeState,
    region_a: Configuration,
    region_b: Configuration,
) -> Result<f64> {
    check_disjoint(region_a, region_b)?;
    if psi.len() != space.len() {
        return Err(Error::InvalidInput(
            "state and space dimensions differ".into(),
        ));
    }
    Ok(space
        .configs()
        .iter()
        .zip(psi.amplitudes())
        .filter(|(c, _)| c.intersects(&region_a) && c.intersects(&region_b))
        .map(|(_, a)| a.norm_sqr())
        .sum())
}

/// Empirical version of [`joint_region_probability`] over sampled configurations.
pub fn joint_region_frequency(
    configs: &[Configuration],
    region_a: Configuration,
    region_b: Configuration,
) -> Result<f64> {
    check_disjoint(region_a, region_b)?;
    if configs.is_empty() {
        return Err(config_err("empty ensemble"));
    }
    let hits = configs
        .iter()
        .filter(|c| c.intersects(&region_a) && c.intersects(&region_b))
        .count();
    Ok(hits as f64 / configs.len() as f64)
}

/// One-particle packet `exp(-d^2 / (2 w^2) + i k j)` around `center`
/// (periodic distance `d`), normalized.
pub fn one_particle_packet(
    cfg: &LatticeConfig,
    space: &ConfigSpace,
    center: f64,
    width: f64,
    momentum: f64,
) -> Result<FockLatticeState> {
    if cfg.max_particles < 1 {
        return Err(config_err("one-particle sector is truncated away"));
    }
    if !(width > 0.0) {
        return Err(config_err("packet width must be positive"));
    }
    let m = cfg.sites as f64;
    let amps = space
        .configs()
        .iter()
        .map(|c| {
            if c.count() != 1 {
                return ZERO;
            }
            let j = c.sites()[0] as f64;
            let mut d = (j - center).abs() % m;
            d = d.min(m - d);
            C64::from_polar((-0.5 * (d / width).powi(2)).exp(), momentum * j)
        })
        .collect();
    FockLatticeState::new(amps).normalized()
}
