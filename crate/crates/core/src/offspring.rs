//! Critical offspring distributions with finite support.
//!
//! Everything downstream needs the same small set of derived objects: the
//! variance σ², the generating function Υ as a polynomial, Φ(a) = Υ(1-a) -
//! (1-a) and its antiderivative Γ, and an alias table for O(1) sampling.

use crate::error::{Error, Result};
use crate::rng::Stream;
use serde::{Deserialize, Serialize};

const MEAN_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OffspringDistribution {
    pmf: Vec<(u32, f64)>,
    sigma2: f64,
    /// Coefficients of Φ(v) = Σ_k p_k (1-v)^k - (1-v), ascending powers of v.
    phi_coeffs: Vec<f64>,
    alias_prob: Vec<f64>,
    alias_idx: Vec<u32>,
}

impl OffspringDistribution {
    pub fn new(pmf: Vec<(u32, f64)>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::config("offspring pmf is empty"));
        }
        let mut seen = std::collections::BTreeMap::new();
        for &(k, p) in &pmf {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::config(format!("offspring probability p_{k} = {p} invalid")));
            }
            if seen.insert(k, p).is_some() {
                return Err(Error::config(format!("duplicate offspring count {k} in pmf")));
            }
        }
        let pmf: Vec<(u32, f64)> = seen.into_iter().collect();
        let total: f64 = pmf.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > MEAN_TOL {
            return Err(Error::config(format!("offspring probabilities sum to {total}, expected 1")));
        }
        let mean: f64 = pmf.iter().map(|&(k, p)| k as f64 * p).sum();
        if (mean - 1.0).abs() > MEAN_TOL {
            return Err(Error::config(format!(
                "offspring distribution must be critical (mean 1), got mean {mean}"
            )));
        }
        let sigma2: f64 = pmf.iter().map(|&(k, p)| (k as f64) * (k as f64 - 1.0) * p).sum();
        if !(sigma2 > 0.0) {
            return Err(Error::config(
                "offspring variance must satisfy sigma^2 > 0; the degenerate pmf {1: 1} is not allowed",
            ));
        }

        // Φ(v) = Σ_k p_k (1-v)^k - (1-v): expand (1-v)^k by binomials.
        let kmax = pmf.iter().map(|&(k, _)| k).max().unwrap() as usize;
        let mut phi = vec![0.0; kmax.max(1) + 1];
        for &(k, p) in &pmf {
            let k = k as usize;
            let mut binom = 1.0; // C(k, j) (-1)^j accumulated with sign
            for j in 0..=k {
                phi[j] += p * binom;
                binom *= -((k - j) as f64) / (j as f64 + 1.0);
            }
        }
        phi[0] -= 1.0;
        phi[1] += 1.0;
        // Φ(0) = 0 exactly; clear the rounding residue.
        phi[0] = 0.0;

        let (alias_prob, alias_idx) = build_alias(&pmf);

        Ok(OffspringDistribution { pmf, sigma2, phi_coeffs: phi, alias_prob, alias_idx })
    }

    /// Binary branching {0: 1/2, 2: 1/2}; σ² = 1.
    pub fn binary() -> Self {
        OffspringDistribution::new(vec![(0, 0.5), (2, 0.5)]).unwrap()
    }

    /// Truncated geometric-type law {0: 1/2, 1: 1/4, 2: 1/8, 3: 1/16,
    /// 4: 1/32, 6: 1/32}; critical with σ² = 31/16.
    pub fn geometric_type() -> Self {
        OffspringDistribution::new(vec![
            (0, 0.5),
            (1, 0.25),
            (2, 0.125),
            (3, 0.0625),
            (4, 0.03125),
            (6, 0.03125),
        ])
        .unwrap()
    }

    pub fn pmf(&self) -> &[(u32, f64)] {
        &self.pmf
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Generating function Υ(s) = Σ p_k s^k.
    pub fn upsilon(&self, s: f64) -> f64 {
        self.pmf.iter().map(|&(k, p)| p * s.powi(k as i32)).sum()
    }

    /// Φ(v) = Υ(1-v) - (1-v), evaluated as a polynomial in v.
    pub fn phi(&self, v: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::numerics("phi", format!("argument {v} outside [0, 1]")));
        }
        Ok(horner(&self.phi_coeffs, v))
    }

    /// Γ(u) = ∫_0^u Φ(v) dv, in closed form from the Φ coefficients.
    pub fn gamma_int(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::numerics("gamma_int", format!("argument {u} outside [0, 1]")));
        }
        let mut acc = 0.0;
        for j in (0..self.phi_coeffs.len()).rev() {
            acc = acc * u + self.phi_coeffs[j] / (j as f64 + 1.0);
        }
        Ok(acc * u)
    }

    /// O(1) offspring-count sample via the alias table.
    #[inline]
    pub fn sample(&self, s: &mut Stream) -> u32 {
        let n = self.alias_prob.len();
        let r = s.next_u64();
        // High bits pick the column, low 53 bits the threshold.
        let col = ((r >> 32) as usize * n) >> 32;
        let u = (r & 0x1F_FFFF_FFFF_FFFF) as f64 * (1.0 / 9007199254740992.0);
        if u < self.alias_prob[col] {
            self.pmf[col].0
        } else {
            self.alias_idx[col]
        }
    }
}

fn build_alias(pmf: &[(u32, f64)]) -> (Vec<f64>, Vec<u32>) {
    let n = pmf.len();
    let mut prob = vec![0.0; n];
    let mut alias = vec![0u32; n];
    let mut scaled: Vec<f64> = pmf.iter().map(|&(_, p)| p * n as f64).collect();
    let mut small: Vec<usize> = (0..n).filter(|&i| scaled[i] < 1.0).collect();
    let mut large: Vec<usize> = (0..n).filter(|&i| scaled[i] >= 1.0).collect();
    while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
        small.pop();
        large.pop();
        prob[s] = scaled[s];
        alias[s] = pmf[l].0;
        scaled[l] -= 1.0 - scaled[s];
        if scaled[l] < 1.0 {
            small.push(l);
        } else {
            large.push(l);
        }
    }
    for &i in small.iter().chain(large.iter()) {
        prob[i] = 1.0;
        alias[i] = pmf[i].0;
    }
    (prob, alias)
}

#[inline]
fn horner(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}
