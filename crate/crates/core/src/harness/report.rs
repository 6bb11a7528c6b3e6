use super::metrics::MetricsRow;
use super::survey::SurveyRow;
use super::sweep::SweepOutcome;
use std::fmt::{self, Write};

pub const RESULTS_HEADER: &str = "instance,method,param,embedding_seed,chain_strength,avg_energy,p_opt,feasibility_rate,best_objective,mean_objective,chain_break_rate";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedLabel {
    Seed(u64),
    /// Samples of all embedding seeds pooled.
    Pooled,
    /// Not an embedded run.
    NotApplicable,
}

impl fmt::Display for SeedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedLabel::Seed(s) => write!(f, "{s}"),
            SeedLabel::Pooled => f.write_str("pooled"),
            SeedLabel::NotApplicable => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub instance: String,
    pub method: String,
    pub param: String,
    pub embedding_seed: SeedLabel,
    pub row: MetricsRow,
}

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(RESULTS_HEADER);
    s.push('\n');
    for r in rows {
        let m = &r.row;
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            field(&r.instance),
            field(&r.method),
            field(&r.param),
            r.embedding_seed,
            opt(m.chain_strength),
            m.avg_energy,
            opt(m.p_opt),
            opt(m.feasibility_rate),
            opt(m.best_objective),
            opt(m.mean_objective),
            m.chain_break_rate
        )
        .unwrap();
    }
    s
}

/// Per-cell rows followed by the pooled rows.
pub fn sweep_rows(instance: &str, method: &str, param: &str, outcome: &SweepOutcome) -> Vec<ResultRow> {
    let make = |embedding_seed, row: &MetricsRow| ResultRow {
        instance: instance.to_string(),
        method: method.to_string(),
        param: param.to_string(),
        embedding_seed,
        row: row.clone(),
    };
    outcome
        .cells
        .iter()
        .map(|c| make(SeedLabel::Seed(c.embedding_seed), &c.row))
        .chain(outcome.pooled.iter().map(|r| make(SeedLabel::Pooled, r)))
        .collect()
}

pub const SURVEY_HEADER: &str = "instance,n,s_h,s_j,s_h_tilde,ratio,estimated,pegasus_m,exceeds_s_j";

pub fn survey_csv(rows: &[SurveyRow]) -> String {
    let mut s = String::from(SURVEY_HEADER);
    s.push('\n');
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            field(&r.instance),
            r.n,
            r.s_h,
            r.s_j,
            r.s_h_tilde,
            r.ratio,
            r.estimated,
            r.pegasus_m.map(|m| m.to_string()).unwrap_or_default(),
            r.exceeds_s_j
        )
        .unwrap();
    }
    s
}
