use crate::embedding::{pegasus_clique_estimate, physical_scaling, EmbeddedModel};
use crate::error::Result;
use crate::model::{scaling_factors, AcceptRanges, IsingModel};
use serde::{Deserialize, Serialize};

pub struct SurveyInstance {
    pub name: String,
    pub model: IsingModel,
    /// A real embedding, if one exists; otherwise the Pegasus estimate is used.
    pub embedded: Option<EmbeddedModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRow {
    pub instance: String,
    pub n: usize,
    pub s_h: f64,
    pub s_j: f64,
    /// Field scaling factor after embedding (or its upper bound `s_h / m`).
    pub s_h_tilde: f64,
    /// `s_h_tilde / s_j`.
    pub ratio: f64,
    pub estimated: bool,
    pub pegasus_m: Option<u64>,
    /// Fields still dominate the scaling after embedding.
    pub exceeds_s_j: bool,
}

pub fn scaling_survey(instances: &[SurveyInstance], ranges: &AcceptRanges) -> Result<Vec<SurveyRow>> {
    instances
        .iter()
        .map(|inst| {
            let logical = scaling_factors(&inst.model, ranges);
            let n = inst.model.num_variables();
            let (s_h_tilde, estimated, pegasus_m) = match &inst.embedded {
                Some(e) => (physical_scaling(e, ranges).s_h, false, None),
                None => {
                    let est = pegasus_clique_estimate(n.max(1) as u64, logical.s_h)?;
                    (est.s_h_tilde_bound, true, Some(est.m))
                }
            };
            Ok(SurveyRow {
                instance: inst.name.clone(),
                n,
                s_h: logical.s_h,
                s_j: logical.s_j,
                s_h_tilde,
                ratio: s_h_tilde / logical.s_j,
                estimated,
                pegasus_m,
                exceeds_s_j: s_h_tilde > logical.s_j,
            })
        })
        .collect()
}
