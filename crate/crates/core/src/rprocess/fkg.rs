//! Exhaustive FKG checks on `{0,1}^n` for small `n`.
//!
//! Points of the lattice are bit masks; a table holds one value per mask.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, param, Error, Result};

/// Largest dimension handled exhaustively.
pub const FKG_MAX_N: usize = 12;

/// The iid measure `P{x} = eps^|x| (1 - eps)^(n - |x|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductMeasure {
    pub n: usize,
    pub eps: f64,
}

impl ProductMeasure {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        check_probability("eps", eps)?;
        if n > FKG_MAX_N {
            return param(format!("n = {n} exceeds the exhaustive limit {FKG_MAX_N}"));
        }
        Ok(Self { n, eps })
    }

    pub fn prob(&self, x: usize) -> f64 {
        let k = x.count_ones() as i32;
        self.eps.powi(k) * (1.0 - self.eps).powi(self.n as i32 - k)
    }

    pub fn size(&self) -> usize {
        1 << self.n
    }

    /// First pair violating `P{x}P{y} <= P{x|y}P{x&y}` beyond a relative
    /// tolerance, over all pairs.
    pub fn lattice_violation(&self) -> Option<(usize, usize)> {
        let size = self.size();
        (0..size).flat_map(|x| (x..size).map(move |y| (x, y))).find(|&(x, y)| {
            let lhs = self.prob(x) * self.prob(y);
            let rhs = self.prob(x | y) * self.prob(x & y);
            lhs > rhs * (1.0 + 1e-12) + f64::MIN_POSITIVE
        })
    }

    pub fn expect(&self, f: &[f64]) -> f64 {
        f.iter().enumerate().map(|(x, v)| self.prob(x) * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    /// Both increasing and decreasing.
    Constant,
    Increasing,
    Decreasing,
}

/// Direction of monotonicity of `f`, or a precondition error naming a pair
/// `x < y` on which `f` goes up and one on which it goes down.
pub fn monotonicity(n: usize, f: &[f64]) -> Result<Monotonicity> {
    if f.len() != 1 << n {
        return param(format!("table has {} entries, expected 2^{n}", f.len()));
    }
    let mut up = None;
    let mut down = None;
    for x in 0..f.len() {
        for i in 0..n {
            if x >> i & 1 == 0 {
                let y = x | 1 << i;
                if f[y] > f[x] && up.is_none() {
                    up = Some((x, y));
                }
                if f[y] < f[x] && down.is_none() {
                    down = Some((x, y));
                }
            }
        }
    }
    match (up, down) {
        (None, None) => Ok(Monotonicity::Constant),
        (Some(_), None) => Ok(Monotonicity::Increasing),
        (None, Some(_)) => Ok(Monotonicity::Decreasing),
        (Some((a, b)), Some((c, d))) => Err(Error::Precondition(format!(
            "table is not monotone: f({a:#b}) < f({b:#b}) but f({c:#b}) > f({d:#b})"
        ))),
    }
}

/// `(E[fg], E[f], E[g])` under the product measure.
pub fn fkg_expectations(n: usize, eps: f64, f: &[f64], g: &[f64]) -> Result<(f64, f64, f64)> {
    let mu = ProductMeasure::new(n, eps)?;
    if f.len() != mu.size() || g.len() != mu.size() {
        return param(format!("tables must have 2^{n} entries"));
    }
    let fg: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    Ok((mu.expect(&fg), mu.expect(f), mu.expect(g)))
}

/// Check `E[fg] >= E[f] E[g]` for non-negative `f`, `g` monotone in the
/// same direction.
pub fn fkg_verify(n: usize, eps: f64, f: &[f64], g: &[f64]) -> Result<bool> {
    ProductMeasure::new(n, eps)?;
    for (name, t) in [("f", f), ("g", g)] {
        if let Some(x) = t.iter().position(|v| !(*v >= 0.0)) {
            return Err(Error::Precondition(format!("{name}({x:#b}) = {} is negative", t[x])));
        }
    }
    let mf = monotonicity(n, f)?;
    let mg = monotonicity(n, g)?;
    use Monotonicity::*;
    if matches!((mf, mg), (Increasing, Decreasing) | (Decreasing, Increasing)) {
        return Err(Error::Precondition(format!("f is {mf:?} but g is {mg:?}")));
    }
    let (efg, ef, eg) = fkg_expectations(n, eps, f, g)?;
    Ok(efg >= ef * eg - 1e-12 * (1.0 + ef * eg))
}

/// Random non-negative increasing table: a constant plus weighted
/// indicators of `terms` random up-sets `{x : x contains A_j}`.
pub fn random_increasing_table<R: Rng + ?Sized>(n: usize, terms: usize, rng: &mut R) -> Vec<f64> {
    let mut t = vec![rng.random::<f64>(); 1 << n];
    for _ in 0..terms {
        let a = rng.random_range(0..1usize << n);
        let w: f64 = rng.random();
        for (x, v) in t.iter_mut().enumerate() {
            if x & a == a {
                *v += w;
            }
        }
    }
    t
}
