use crate::error::{Error, Result};
use crate::model::Var;
use serde::{Deserialize, Serialize};

/// Integer `z in [lower, upper]` written as `lower + sum_i a_i y_i` with
/// binary `y_i` and every `a_i <= mu`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerEncoding {
    pub lower: i64,
    pub upper: i64,
    pub mu: i64,
    pub coefficients: Vec<i64>,
    /// Binary variable per coefficient; empty until [`IntegerEncoding::bind`].
    pub variable_ids: Vec<Var>,
}

/// Bounded-coefficient encoding of `[lower, upper]` with coefficient cap `mu`.
///
/// With `D = upper - lower`, `m = D / mu`, `r = mu + (D - mu m)` and
/// `k = floor(log2 r)`, the coefficients are `2^0 .. 2^(k-1)`, then
/// `r + 1 - 2^k`, then `m - 1` copies of `mu`.
pub fn bce_encode(lower: i64, upper: i64, mu: i64) -> Result<IntegerEncoding> {
    if upper <= lower {
        return Err(Error::param(format!(
            "encoding needs upper > lower, got [{lower}, {upper}]"
        )));
    }
    let d = upper - lower;
    if mu < 1 || mu > d {
        return Err(Error::param(format!("mu must lie in [1, {d}], got {mu}")));
    }
    let m = d / mu;
    let r = mu + (d - mu * m);
    let k = 63 - r.leading_zeros() as i64;
    let mut coefficients: Vec<i64> = (0..k).map(|i| 1i64 << i).collect();
    coefficients.push(r + 1 - (1i64 << k));
    coefficients.extend(std::iter::repeat_n(mu, (m - 1) as usize));
    Ok(IntegerEncoding {
        lower,
        upper,
        mu,
        coefficients,
        variable_ids: Vec::new(),
    })
}

impl IntegerEncoding {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn range(&self) -> i64 {
        self.upper - self.lower
    }

    /// Attaches binary variable ids, one per coefficient.
    pub fn bind(mut self, ids: Vec<Var>) -> Result<Self> {
        if ids.len() != self.coefficients.len() {
            return Err(Error::LengthMismatch {
                expected: self.coefficients.len(),
                actual: ids.len(),
            });
        }
        self.variable_ids = ids;
        Ok(self)
    }

    /// Bits decoding to `value`: as many `mu` copies as fit, the remainder
    /// coefficient if still needed, then the binary part.
    pub fn bits_for(&self, value: i64) -> Result<Vec<u8>> {
        if value < self.lower || value > self.upper {
            return Err(Error::param(format!(
                "{value} outside [{}, {}]",
                self.lower, self.upper
            )));
        }
        let a = &self.coefficients;
        let d = self.range();
        let r = self.mu + d % self.mu;
        let k = (63 - r.leading_zeros()) as usize;
        let mut rest = value - self.lower;
        let mut bits = vec![0u8; a.len()];
        let take = (a.len() - k - 1).min((rest / self.mu) as usize);
        for b in bits.iter_mut().skip(k + 1).take(take) {
            *b = 1;
        }
        rest -= take as i64 * self.mu;
        if rest >= a[k] {
            bits[k] = 1;
            rest -= a[k];
        }
        for (i, b) in bits.iter_mut().enumerate().take(k) {
            *b = ((rest >> i) & 1) as u8;
        }
        Ok(bits)
    }

    /// `(variable, coefficient)` pairs of the bound encoding.
    pub fn terms(&self) -> impl Iterator<Item = (Var, i64)> + '_ {
        self.variable_ids
            .iter()
            .copied()
            .zip(self.coefficients.iter().copied())
    }
}

/// `lower + sum a_i y_i`.
pub fn bce_decode(enc: &IntegerEncoding, bits: &[u8]) -> Result<i64> {
    if bits.len() != enc.coefficients.len() {
        return Err(Error::LengthMismatch {
            expected: enc.coefficients.len(),
            actual: bits.len(),
        });
    }
    Ok(enc.lower
        + enc
            .coefficients
            .iter()
            .zip(bits)
            .filter(|(_, &b)| b != 0)
            .map(|(&a, _)| a)
            .sum::<i64>())
}
