use crate::error::{Error, Result};
use crate::model::{QuboModel, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random QUBO in the style of the gka "b" family: each pair is present with
/// probability `density` and gets a coupling uniform on `j_range`; every
/// variable gets a linear term uniform on `h_range`. No offset, so the
/// all-zero string has energy 0.
pub fn gka_style_random(
    n: usize,
    j_range: (f64, f64),
    h_range: (f64, f64),
    density: f64,
    seed: u64,
) -> Result<QuboModel> {
    for (lo, hi) in [j_range, h_range] {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::param(format!("invalid range [{lo}, {hi}]")));
        }
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::param(format!("density must lie in (0, 1], got {density}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = QuboModel::new();
    for i in 0..n as u64 {
        q.add_variable(Var(i));
        q.add_linear(Var(i), rng.random_range(h_range.0..=h_range.1));
    }
    for i in 0..n as u64 {
        for j in i + 1..n as u64 {
            if density >= 1.0 || rng.random::<f64>() < density {
                q.add_term(Var(i), Var(j), rng.random_range(j_range.0..=j_range.1));
            }
        }
    }
    Ok(q)
}
