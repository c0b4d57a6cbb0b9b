use serde::{Deserialize, Serialize};

use crate::error::{check_probability, param, Result};

/// Witness-size DE for LGalB on `(3, r)` ensembles.
///
/// `p_val` is the probability that a variable-to-check message is bad and
/// `p_der` the expected size (in variables) of its witness, counted as zero
/// when the message is good. `q_*` are the check-to-variable analogues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessDEState {
    pub p_val: f64,
    pub p_der: f64,
    pub q_val: f64,
    pub q_der: f64,
    pub iteration: usize,
}

impl WitnessDEState {
    /// Iteration-1 state: the bad message is the channel value itself and
    /// its witness is the emitting variable.
    pub fn initial(eps: f64) -> Result<Self> {
        check_probability("eps", eps)?;
        Ok(Self { p_val: eps, p_der: eps, q_val: 0.0, q_der: 0.0, iteration: 1 })
    }

    /// True once no bad message survives; the state is absorbing.
    pub fn vanished(&self) -> bool {
        self.p_val == 0.0
    }
}

fn check_r(r: usize) -> Result<()> {
    if r < 2 {
        return param(format!("check degree r = {r} must be >= 2"));
    }
    Ok(())
}

/// Advance one iteration by differentiating the generating-function
/// recursion at `x = 1`.
pub fn witness_de_step(s: &WitnessDEState, eps: f64, r: usize) -> Result<WitnessDEState> {
    check_probability("eps", eps)?;
    check_r(r)?;
    let next = s.iteration + 1;
    if s.vanished() {
        return Ok(WitnessDEState { p_val: 0.0, p_der: 0.0, q_val: 0.0, q_der: 0.0, iteration: next });
    }
    let ebar = 1.0 - eps;
    // 1 - (1 - p)^(r-1) without cancellation for tiny p
    let q = -((r - 1) as f64 * (-s.p_val).ln_1p()).exp_m1();
    let qd = s.p_der / s.p_val * q;
    // p(x) = eps (2 - q(1)) q(x) x + ebar q(x)^2 x
    let p_val = eps * (2.0 - q) * q + ebar * q * q;
    let p_der = eps * (2.0 - q) * (qd + q) + ebar * (2.0 * q * qd + q * q);
    Ok(WitnessDEState { p_val, p_der, q_val: q, q_der: qd, iteration: next })
}

/// Upper bound on `p_der` at the next iteration from the scalar inequality
/// obtained by bounding `2 - q` by 2 and the check amplification by `r - 1`.
pub fn witness_bound_step(p_der_prev: f64, x_prev: f64, eps: f64, r: usize) -> f64 {
    let k = (r - 1) as f64;
    let ebar = 1.0 - eps;
    2.0 * eps * k * p_der_prev + 2.0 * eps * k * x_prev + ebar * k * k * x_prev * x_prev + 2.0 * ebar * k * k * x_prev * p_der_prev
}

/// Upper bound on the ratio `p_der(l) / p_der(l-1)` given `x_{l-1}`.
pub fn witness_ratio_bound(eps: f64, r: usize, iteration: usize, x_prev: f64) -> f64 {
    let k = (r - 1) as f64;
    2.0 * eps * k + 2.0 * eps * k / iteration as f64 + 3.0 * (1.0 - eps) * k * k * x_prev
}

/// States for iterations `1..=iters`.
pub fn witness_trajectory(eps: f64, r: usize, iters: usize) -> Result<Vec<WitnessDEState>> {
    check_r(r)?;
    let mut s = WitnessDEState::initial(eps)?;
    let mut out = Vec::with_capacity(iters);
    for _ in 0..iters {
        out.push(s);
        s = witness_de_step(&s, eps, r)?;
    }
    Ok(out)
}

/// Index of message value `mu` in the per-value arrays of [`Ms2WitnessState`].
pub const fn ms2_index(mu: i64) -> usize {
    (mu + 2) as usize
}

/// Witness-size DE for the linearized MS(2) decoder on `(3, r)` ensembles.
///
/// Entry `ms2_index(mu)` holds the probability that a variable-to-check
/// message equals `mu` (values saturate at `±2`) and the expected witness
/// size carried by such messages. Messages at `+2` are the good ones and
/// carry no witness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ms2WitnessState {
    pub p_val: [f64; 5],
    pub p_der: [f64; 5],
    pub q_val: [f64; 5],
    pub q_der: [f64; 5],
    pub iteration: usize,
}

impl Ms2WitnessState {
    pub fn initial(eps: f64) -> Result<Self> {
        check_probability("eps", eps)?;
        let mut p_val = [0.0; 5];
        let mut p_der = [0.0; 5];
        p_val[ms2_index(-1)] = eps;
        p_der[ms2_index(-1)] = eps;
        p_val[ms2_index(1)] = 1.0 - eps;
        p_der[ms2_index(1)] = 1.0 - eps;
        Ok(Self { p_val, p_der, q_val: [0.0; 5], q_der: [0.0; 5], iteration: 1 })
    }

    /// Expected witness size summed over the bad values `-2..=1`.
    pub fn total_der(&self) -> f64 {
        self.p_der[..4].iter().sum()
    }

    /// Probability of a bad message.
    pub fn bad_prob(&self) -> f64 {
        self.p_val[..4].iter().sum()
    }
}

/// One iteration of the MS(2) witness system.
pub fn ms2_witness_de_step(s: &Ms2WitnessState, eps: f64, r: usize) -> Result<Ms2WitnessState> {
    check_probability("eps", eps)?;
    check_r(r)?;
    let k = r as i32 - 1;
    let ebar = 1.0 - eps;

    // check node: the minimum of r - 1 inputs
    let mut q_val = [0.0; 5];
    let mut q_der = [0.0; 5];
    let mut below = 0.0;
    for mu in -2..=2i64 {
        let i = ms2_index(mu);
        let upto = below + s.p_val[i];
        q_val[i] = ((1.0 - below).max(0.0).powi(k) - (1.0 - upto).max(0.0).powi(k)).max(0.0);
        if mu < 2 && s.p_val[i] > 0.0 {
            q_der[i] = s.p_der[i] / s.p_val[i] * q_val[i];
        }
        below = upto;
    }

    // (value, derivative) products; +2 enters only as a constant
    let v = |mu: i64| q_val[ms2_index(mu)];
    let d = |mu: i64| q_der[ms2_index(mu)];
    let c2 = v(2);
    // product of two check messages: (value, derivative)
    let pair = |a: i64, b: i64| (v(a) * v(b), d(a) * v(b) + v(a) * d(b));
    let with_good = |a: i64| (c2 * v(a), c2 * d(a));
    let sum = |terms: &[(f64, (f64, f64))]| {
        terms.iter().fold((0.0, 0.0), |acc, (w, (x, y))| (acc.0 + w * x, acc.1 + w * y))
    };
    // x * A(x) at x = 1 has value A(1) and derivative A(1) + A'(1)
    let times_x = |(a, ad): (f64, f64)| (a, a + ad);

    let p_p1 = times_x(sum(&[
        (eps, pair(1, 1)),
        (2.0 * eps, with_good(0)),
        (2.0 * ebar, with_good(-2)),
        (2.0 * ebar, pair(1, -1)),
        (ebar, pair(0, 0)),
    ]));
    let p_0 = times_x(sum(&[
        (2.0 * eps, with_good(-1)),
        (2.0 * eps, pair(1, 0)),
        (2.0 * ebar, pair(1, -2)),
        (2.0 * ebar, pair(0, -1)),
    ]));
    let p_m1 = times_x(sum(&[
        (ebar, pair(-1, -1)),
        (2.0 * ebar, pair(-2, 0)),
        (2.0 * eps, with_good(-2)),
        (2.0 * eps, pair(1, -1)),
        (eps, pair(0, 0)),
    ]));
    let p_m2 = times_x(sum(&[
        (2.0 * eps, pair(-2, 1)),
        (2.0 * eps, pair(-2, 0)),
        (2.0 * eps, pair(-2, -1)),
        (2.0 * eps, pair(0, -1)),
        (eps, pair(-1, -1)),
        (eps, pair(-2, -2)),
        (2.0 * ebar, pair(-1, -2)),
        (ebar, pair(-2, -2)),
    ]));
    // +2 needs a channel +1 with check sum >= 1, or a channel -1 with sum >= 3
    let p_p2 = c2 * c2 + 2.0 * c2 * v(1) + ebar * (2.0 * c2 * v(0) + v(1) * v(1) + 2.0 * v(1) * v(0) + 2.0 * c2 * v(-1));

    let mut p_val = [0.0; 5];
    let mut p_der = [0.0; 5];
    for (mu, (val, der)) in [(-2, p_m2), (-1, p_m1), (0, p_0), (1, p_p1)] {
        p_val[ms2_index(mu)] = val;
        p_der[ms2_index(mu)] = der;
    }
    p_val[ms2_index(2)] = p_p2;
    Ok(Ms2WitnessState { p_val, p_der, q_val, q_der, iteration: s.iteration + 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::de::lgalb_map;

    #[test]
    fn initial_states() {
        let s = WitnessDEState::initial(0.03).unwrap();
        assert_eq!((s.p_val, s.p_der), (0.03, 0.03));
        let m = Ms2WitnessState::initial(0.03).unwrap();
        assert_eq!(m.p_val[ms2_index(-1)], 0.03);
        assert_eq!(m.p_der[ms2_index(1)], 0.97);
        assert_eq!(m.p_val[ms2_index(2)], 0.0);
    }

    #[test]
    fn value_track_is_scalar_de() {
        let mut s = WitnessDEState::initial(0.04).unwrap();
        let mut x = 0.04;
        for _ in 0..50 {
            s = witness_de_step(&s, 0.04, 6).unwrap();
            x = lgalb_map(x, 0.04, 3, 6).unwrap();
            assert!((s.p_val - x).abs() < 1e-14);
        }
    }

    #[test]
    fn vanished_state_is_absorbing() {
        let s = WitnessDEState::initial(0.0).unwrap();
        let t = witness_de_step(&s, 0.0, 6).unwrap();
        assert!(t.vanished());
        assert_eq!(t.iteration, 2);
    }

    #[test]
    fn ms2_values_sum_to_one() {
        let mut s = Ms2WitnessState::initial(0.05).unwrap();
        for _ in 0..100 {
            s = ms2_witness_de_step(&s, 0.05, 6).unwrap();
            let total: f64 = s.p_val.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "total {total} at {}", s.iteration);
            let qt: f64 = s.q_val.iter().sum();
            assert!((qt - 1.0).abs() < 1e-12);
        }
    }
}
