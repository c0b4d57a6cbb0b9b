use serde::{Deserialize, Serialize};

use crate::error::{check_probability, param, Error, Result};

use super::{DeRecursion, CONVERGED_BELOW};

/// Probability mass function on the integer interval `min..min + pmf.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDensity {
    min: i64,
    pmf: Vec<f64>,
}

impl DiscreteDensity {
    /// Density on `min..=max`; `pmf.len()` must equal `max - min + 1`.
    pub fn new(min: i64, pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return param("empty pmf");
        }
        if let Some(p) = pmf.iter().find(|p| !(**p >= 0.0)) {
            return param(format!("negative or NaN mass {p}"));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return param(format!("pmf sums to {total}"));
        }
        Ok(Self { min, pmf })
    }

    pub fn point_mass(value: i64) -> Self {
        Self { min: value, pmf: vec![1.0] }
    }

    pub fn min_value(&self) -> i64 {
        self.min
    }

    pub fn max_value(&self) -> i64 {
        self.min + self.pmf.len() as i64 - 1
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// `P(X = v)`, zero outside the support.
    pub fn prob(&self, v: i64) -> f64 {
        let i = v - self.min;
        if i < 0 || i >= self.pmf.len() as i64 {
            0.0
        } else {
            self.pmf[i as usize]
        }
    }

    /// `P(X >= v)`.
    pub fn tail_ge(&self, v: i64) -> f64 {
        let start = (v - self.min).max(0) as usize;
        self.pmf.iter().skip(start).sum::<f64>().min(1.0)
    }

    /// `P(X <= v)`.
    pub fn tail_le(&self, v: i64) -> f64 {
        let end = v - self.min + 1;
        if end <= 0 {
            return 0.0;
        }
        self.pmf.iter().take(end as usize).sum::<f64>().min(1.0)
    }

    pub fn total(&self) -> f64 {
        self.pmf.iter().sum()
    }

    fn convolve(&self, other: &Self) -> Self {
        let mut pmf = vec![0.0; self.pmf.len() + other.pmf.len() - 1];
        for (i, a) in self.pmf.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.pmf.iter().enumerate() {
                pmf[i + j] += a * b;
            }
        }
        Self { min: self.min + other.min, pmf }
    }
}

/// Check-node rule of a saturated min-sum decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MinSumVariant {
    /// Sign product times minimum reliability.
    MinSum,
    /// Plain minimum of the incoming values (linearized).
    LinearMinSum,
}

fn check_ms_params(m: i64, l: usize, r: usize) -> Result<()> {
    if m < 1 {
        return param(format!("saturation M = {m} must be >= 1"));
    }
    if l < 2 || r < 2 {
        return param(format!("degrees must be >= 2 (got l={l}, r={r})"));
    }
    Ok(())
}

/// Range of variable-to-check messages: channel `±1` plus `l - 1` check
/// messages of magnitude at most `M`.
pub fn variable_alphabet(m: i64, l: usize) -> (i64, i64) {
    let b = (l as i64 - 1) * m + 1;
    (-b, b)
}

/// Density of the channel messages: `+1` with probability `1 - eps`.
pub fn channel_density(eps: f64) -> Result<DiscreteDensity> {
    check_probability("eps", eps)?;
    DiscreteDensity::new(-1, vec![eps, 0.0, 1.0 - eps])
}

/// Check-node output density on `-M..=M`.
pub fn ms_check_step(d: &DiscreteDensity, m: i64, r: usize, variant: MinSumVariant) -> DiscreteDensity {
    let k = r as i32 - 1;
    let size = (2 * m + 1) as usize;
    let mut pmf = vec![0.0; size];
    let at = |v: i64| (v + m) as usize;
    match variant {
        MinSumVariant::MinSum => {
            // P(out >= a) and P(out <= -a) for a >= 1
            let pos = |a: i64| {
                let p = d.tail_ge(a);
                let n = d.tail_le(-a);
                0.5 * ((p + n).powi(k) + (p - n).powi(k))
            };
            let neg = |a: i64| {
                let p = d.tail_ge(a);
                let n = d.tail_le(-a);
                0.5 * ((p + n).powi(k) - (p - n).powi(k))
            };
            for a in 1..m {
                pmf[at(a)] = (pos(a) - pos(a + 1)).max(0.0);
                pmf[at(-a)] = (neg(a) - neg(a + 1)).max(0.0);
            }
            pmf[at(m)] = pos(m).max(0.0);
            pmf[at(-m)] = neg(m).max(0.0);
            let nonzero = (d.tail_ge(1) + d.tail_le(-1)).min(1.0);
            pmf[at(0)] = (1.0 - nonzero.powi(k)).max(0.0);
        }
        MinSumVariant::LinearMinSum => {
            // P(min >= a) = P(X >= a)^(r-1), then clip to [-M, M]
            let surv = |a: i64| d.tail_ge(a).powi(k);
            pmf[at(m)] = surv(m);
            for a in (-m + 1)..m {
                pmf[at(a)] = (surv(a) - surv(a + 1)).max(0.0);
            }
            pmf[at(-m)] = (1.0 - surv(-m + 1)).max(0.0);
        }
    }
    DiscreteDensity { min: -m, pmf }
}

/// Variable-node output: channel plus `l - 1` independent check messages.
pub fn ms_variable_step(check: &DiscreteDensity, eps: f64, l: usize) -> Result<DiscreteDensity> {
    let mut acc = channel_density(eps)?;
    for _ in 0..l - 1 {
        acc = acc.convolve(check);
    }
    Ok(acc)
}

/// One exact DE iteration: check step on `d`, then variable step.
pub fn ms_de_step(
    d: &DiscreteDensity,
    eps: f64,
    m: i64,
    l: usize,
    r: usize,
    variant: MinSumVariant,
) -> Result<DiscreteDensity> {
    check_probability("eps", eps)?;
    check_ms_params(m, l, r)?;
    let (lo, hi) = variable_alphabet(m, l);
    if d.min_value() < lo || d.max_value() > hi {
        return Err(Error::Internal(format!(
            "density support [{}, {}] exceeds variable alphabet [{lo}, {hi}]",
            d.min_value(),
            d.max_value()
        )));
    }
    let c = ms_check_step(d, m, r, variant);
    ms_variable_step(&c, eps, l)
}

/// Discrete DE bound to its parameters.
///
/// For [`MinSumVariant::MinSum`] DE converges when the probability of a
/// non-positive variable message vanishes. For the linearized decoder the
/// requirement is stronger: every check message must saturate at `+M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteMap {
    pub variant: MinSumVariant,
    pub m: i64,
    pub l: usize,
    pub r: usize,
}

impl DiscreteMap {
    pub fn new(variant: MinSumVariant, m: i64, l: usize, r: usize) -> Result<Self> {
        check_ms_params(m, l, r)?;
        Ok(Self { variant, m, l, r })
    }

    /// Error measure driven to zero below threshold.
    pub fn badness(&self, v: &DiscreteDensity) -> f64 {
        match self.variant {
            MinSumVariant::MinSum => v.tail_le(0),
            MinSumVariant::LinearMinSum => {
                let c = ms_check_step(v, self.m, self.r, self.variant);
                1.0 - c.prob(self.m)
            }
        }
    }

    /// Variable-message densities for iterations `1..=iters`.
    pub fn trajectory(&self, eps: f64, iters: usize) -> Result<Vec<DiscreteDensity>> {
        let mut v = channel_density(eps)?;
        let mut out = Vec::with_capacity(iters);
        for _ in 0..iters {
            let next = ms_de_step(&v, eps, self.m, self.l, self.r, self.variant)?;
            out.push(std::mem::replace(&mut v, next));
        }
        Ok(out)
    }
}

impl DeRecursion for DiscreteMap {
    fn converges(&self, eps: f64, max_iters: usize) -> Result<bool> {
        let mut v = channel_density(eps)?;
        for _ in 0..max_iters {
            if self.badness(&v) < CONVERGED_BELOW {
                return Ok(true);
            }
            v = ms_de_step(&v, eps, self.m, self.l, self.r, self.variant)?;
        }
        Ok(self.badness(&v) < CONVERGED_BELOW)
    }
}
