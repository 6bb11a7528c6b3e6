use super::{AuxRegistry, Provenance, ReductionResult};
use crate::error::{Error, Result};
use crate::model::{AuxAllocator, IsingModel};

/// Splits every coupling with `|J_ij| > bound` into `k = ceil(|J_ij| / bound)`
/// couplings of weight `w = J_ij / k`: one direct term `w s_i s_j` and `k - 1`
/// auxiliary spins `a`, each attached as
///
/// * `J_ij > 0`: `+w s_i s_a - w s_j s_a`
/// * `J_ij < 0`: `+w s_i s_a + w s_j s_a`
///
/// Both keep the gap `2|J_ij|` between aligned and anti-aligned `(s_i, s_j)`
/// once the auxiliary spins are minimised out, so ground states projected onto
/// the original variables are unchanged. Fields are left as they are.
pub fn iem_reduce(model: &IsingModel, bound: f64) -> Result<ReductionResult> {
    if !(bound > 0.0) || !bound.is_finite() {
        return Err(Error::param(format!("IEM bound must be positive, got {bound}")));
    }
    let mut alloc = AuxAllocator::after(model.variables());
    let mut out = IsingModel::new();
    let mut registry = AuxRegistry::new();
    for &v in model.variables() {
        out.add_variable(v);
    }
    for (v, w) in model.fields() {
        out.add_field(v, w);
    }
    out.add_offset(model.offset());
    for ((a, b), coupling) in model.couplings() {
        if coupling.abs() <= bound {
            out.add_coupling(a, b, coupling);
            continue;
        }
        let k = (coupling.abs() / bound).ceil();
        let w = coupling / k;
        out.add_coupling(a, b, w);
        let sign_b = if coupling > 0.0 { -1.0 } else { 1.0 };
        for index in 1..k as u32 {
            let aux = alloc.fresh();
            out.add_coupling(a, aux, w);
            out.add_coupling(b, aux, sign_b * w);
            registry.insert(aux, Provenance::IemEdge { a, b, index });
        }
    }
    Ok(ReductionResult {
        model: out,
        aux_registry: registry,
    })
}
