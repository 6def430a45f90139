//! Constructive discrimination tasks whose advantage ratio reaches `1 + R`,
//! each returned with the numerical checks that back it.

mod coherence;
mod entanglement;
mod magic;
pub mod named;
mod witness_tasks;

pub use coherence::{prop5_task, prop5_task_with, prop5_unitaries, unbiasedness_residual};
pub use entanglement::{phi_plus_povm, thm4_task, thm4_task_with};
pub use magic::{
    canonical_frame, prop6_axis_probabilities, theta_limit, prop6_task, prop6_task_with, rank_one_witness, sm_demo, sm_demo_with, u_nc,
    AxisProbabilities, CanonicalFrame, RankOneWitness,
};
pub use named::{named_state, NamedState};
pub use witness_tasks::{prop3_verify, thm1_channels, thm1_channels_with, thm2_task, thm2_task_with, Prop3Check, Thm1Channels};

use crate::discrimination::{Instrument, Povm};
use crate::robustness::{RobustnessCertificate, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    Thm1,
    Thm2,
    Thm4,
    Prop5,
    Prop6,
    SmDemo,
}

impl Construction {
    pub fn name(&self) -> &'static str {
        match self {
            Construction::Thm1 => "thm1",
            Construction::Thm2 => "thm2",
            Construction::Thm4 => "thm4",
            Construction::Prop5 => "prop5",
            Construction::Prop6 => "prop6",
            Construction::SmDemo => "sm_demo",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::Thm1, Self::Thm2, Self::Thm4, Self::Prop5, Self::Prop6, Self::SmDemo].into_iter().find(|c| c.name() == s)
    }
}

/// One named numerical check. `residual` is the quantity compared against the
/// check's threshold; its meaning is given by the name.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
}

impl Check {
    /// Passes when `residual <= tol`.
    pub fn within(name: &str, residual: f64, tol: f64) -> Self {
        Check { name: name.into(), passed: residual <= tol, residual }
    }

    pub fn flag(name: &str, passed: bool, residual: f64) -> Self {
        Check { name: name.into(), passed, residual }
    }
}

#[derive(Debug, Clone)]
pub struct AdvantageCertificate {
    pub construction: Construction,
    pub task: Instrument,
    pub povm: Povm,
    pub p_resource: f64,
    pub p_free_best: f64,
    pub ratio: f64,
    pub robustness: RobustnessCertificate,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl AdvantageCertificate {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// `|ratio − (1 + R)|`
    pub fn ratio_deviation(&self) -> f64 {
        (self.ratio - 1.0 - self.robustness.value).abs()
    }
}

/// Solver settings plus the seed for randomized spot checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOptions {
    pub solver: SolverOptions,
    pub seed: u64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions { solver: SolverOptions::default(), seed: 0 }
    }
}

/// Allowed `|ratio − (1+R)|` given the solver's reported gap.
fn ratio_tolerance(rob: &RobustnessCertificate) -> f64 {
    rob.gap + 1e-6
}

/// Scales every Kraus operator of a one-subchannel instrument by `√w` and
/// sandwiches it with `u`.
fn conjugated_subchannel(
    channel: &crate::discrimination::Subchannel,
    u: &crate::linalg::matrix::ComplexMatrix,
    weight: f64,
    label: String,
) -> crate::Result<crate::discrimination::Subchannel> {
    channel.compose(None, Some(u), weight, label)
}
