//! Certificates as JSON values.

use serde_json::Value;

use crate::discrimination::{Instrument, MeasurementClassKind, Povm};
use crate::robustness::RobustnessCertificate;
use crate::synthesis::AdvantageCertificate;

use super::json::{matrix, real, vector, Object};

pub fn robustness_json(cert: &RobustnessCertificate) -> Value {
    let bisection: Vec<Value> = cert
        .bisection
        .iter()
        .map(|b| Object::new().real("s", b.s).with("feasible", b.feasible).real("margin", b.margin).real("dual_bound", b.dual_bound).build())
        .collect();
    Object::new()
        .real("robustness", cert.value)
        .real("primal_value", cert.primal_value)
        .real("dual_value", cert.dual_value)
        .real("gap", cert.gap)
        .with("iterations", cert.iterations)
        .real("tolerance_used", cert.tolerance_used)
        .with("converged", cert.converged)
        .real("weak_duality_violation", cert.weak_duality_violation())
        .with("witness", witness_json(cert))
        .with("optimal_sigma", matrix(cert.optimal_sigma.matrix()))
        .with("optimal_tau", cert.optimal_tau.as_ref().map(|t| matrix(t.matrix())).unwrap_or(Value::Null))
        .with("bisection", bisection)
        .build()
}

pub fn witness_json(cert: &RobustnessCertificate) -> Value {
    let w = &cert.witness;
    Object::new()
        .with("matrix", matrix(w.x.as_matrix()))
        .real("scale", w.scale)
        .with("direction", vector(&w.direction))
        .real("support_value", w.support_value)
        .build()
}

pub fn instrument_json(task: &Instrument) -> Value {
    Value::Array(
        task.subchannels()
            .iter()
            .map(|s| Object::new().with("label", s.label()).with("kraus", s.kraus().iter().map(matrix).collect::<Vec<_>>()).build())
            .collect(),
    )
}

pub fn povm_json(povm: &Povm) -> Value {
    let class = match povm.class() {
        MeasurementClassKind::Unconstrained => "unconstrained",
        MeasurementClassKind::Free => "free",
        MeasurementClassKind::RankOneFree => "rank_one_free",
    };
    Object::new()
        .with("class", class)
        .with("elements", povm.elements().iter().map(|e| matrix(e.as_matrix())).collect::<Vec<_>>())
        .build()
}

pub fn advantage_json(cert: &AdvantageCertificate) -> Value {
    let checks: Vec<Value> = cert
        .checks
        .iter()
        .map(|c| Object::new().with("name", c.name.as_str()).with("passed", c.passed).with("residual", real(c.residual)).build())
        .collect();
    Object::new()
        .with("construction", cert.construction.name())
        .with("task", instrument_json(&cert.task))
        .with("povm", povm_json(&cert.povm))
        .real("p_resource", cert.p_resource)
        .real("p_free_best", cert.p_free_best)
        .real("ratio", cert.ratio)
        .real("ratio_deviation", cert.ratio_deviation())
        .with("robustness", robustness_json(&cert.robustness))
        .with("checks", checks)
        .with("all_checks_passed", cert.all_passed())
        .with("notes", cert.notes.clone())
        .build()
}
