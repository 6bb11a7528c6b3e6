use crate::error::{Error, Result};
use crate::model::{IsingModel, QuboModel, Var};
use crate::reduction::{bce_encode, perturbed_penalty, IntegerEncoding, LinearConstraint};

/// `s0 s1 + (1/J) s1 s2`, or `J s0 s1 + s1 s2` when `rescaled`. Ground states
/// are `(+,-,+)` and `(-,+,-)` for every `J > 0`.
pub fn trivial_ising(j: f64, rescaled: bool) -> Result<IsingModel> {
    if !(j > 0.0) || !j.is_finite() {
        return Err(Error::param(format!("J must be positive, got {j}")));
    }
    let mut m = IsingModel::new();
    if rescaled {
        m.add_coupling(Var(0), Var(1), j);
        m.add_coupling(Var(1), Var(2), 1.0);
    } else {
        m.add_coupling(Var(0), Var(1), 1.0);
        m.add_coupling(Var(1), Var(2), 1.0 / j);
    }
    Ok(m)
}

/// `(z - 1)^2` with `z in [0, 191]` encoded at coefficient cap `mu`; bits are
/// `Var(0..)`.
pub fn trivial_integer(mu: i64) -> Result<(QuboModel, IntegerEncoding)> {
    if !(1..=191).contains(&mu) {
        return Err(Error::param(format!("mu must lie in [1, 191], got {mu}")));
    }
    let enc = bce_encode(0, 191, mu)?;
    let ids = (0..enc.len() as u64).map(Var).collect();
    let enc = enc.bind(ids)?;
    let g = LinearConstraint::new(
        enc.terms().map(|(v, a)| (v, a as f64)),
        1.0,
        crate::reduction::Domain::Binary,
    )?;
    let q = perturbed_penalty(&g, 1.0, 0.0)?;
    Ok((q, enc))
}
