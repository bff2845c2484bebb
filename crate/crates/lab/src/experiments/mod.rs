//! Validated experiment plans.
//!
//! [`Plan::prepare`] checks every parameter against the core constructors
//! without doing the expensive work; [`Plan::execute`] runs it.

mod dirac;
mod lattice;

pub use dirac::{
    describe_region, CausalityPlan, CommutatorPlan, FragilityPlan, MinlocPlan, ProjectPlan,
    TailsPlan,
};
pub use lattice::{run_ensemble, BelljumpPlan, JointclickPlan};

use crate::config::{Experiment, ExperimentConfig};
use crate::output::Artifacts;

#[derive(Debug, Clone)]
pub enum Plan {
    Tails(TailsPlan),
    Project(ProjectPlan),
    Fragility(FragilityPlan),
    Causality(CausalityPlan),
    Minloc(MinlocPlan),
    Commutator(CommutatorPlan),
    Belljump(BelljumpPlan),
    Jointclick(JointclickPlan),
}

impl Plan {
    pub fn prepare(cfg: &ExperimentConfig) -> poslab_core::Result<Self> {
        Ok(match cfg.experiment {
            Experiment::Tails => Self::Tails(TailsPlan::prepare(cfg)?),
            Experiment::Project => Self::Project(ProjectPlan::prepare(cfg)?),
            Experiment::Fragility => Self::Fragility(FragilityPlan::prepare(cfg)?),
            Experiment::Causality => Self::Causality(CausalityPlan::prepare(cfg)?),
            Experiment::Minloc => Self::Minloc(MinlocPlan::prepare(cfg)?),
            Experiment::Commutator => Self::Commutator(CommutatorPlan::prepare(cfg)?),
            Experiment::Belljump => Self::Belljump(BelljumpPlan::prepare(cfg)?),
            Experiment::Jointclick => Self::Jointclick(JointclickPlan::prepare(cfg)?),
        })
    }

    pub fn execute(&self, out: &mut Artifacts) -> poslab_core::Result<()> {
        match self {
            Self::Tails(p) => p.execute(out),
            Self::Project(p) => p.execute(out),
            Self::Fragility(p) => p.execute(out),
            Self::Causality(p) => p.execute(out),
            Self::Minloc(p) => p.execute(out),
            Self::Commutator(p) => p.execute(out),
            Self::Belljump(p) => p.execute(out),
            Self::Jointclick(p) => p.execute(out),
        }
    }
}
