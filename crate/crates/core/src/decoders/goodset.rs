use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

use super::DecoderSpec;

/// A subset of the message alphabet, described by a predicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MessageSet {
    /// Non-erased messages.
    Known,
    /// Messages agreeing with the transmitted bit.
    Correct,
    /// Correct-sign messages with reliability in `[lo, hi]`.
    Reliability { lo: f64, hi: f64 },
}

/// A good pair of message subsets and its strength.
///
/// `g_v` holds messages entering variable nodes, `g_c` messages entering
/// check nodes. If at least `good_inputs = beta (l-1)` of the messages
/// entering a variable lie in `g_v`, the outgoing message lies in `g_c`; if
/// all messages entering a check lie in `g_c`, its outputs lie in `g_v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodSetSpec {
    pub g_v: MessageSet,
    pub g_c: MessageSet,
    pub beta: f64,
    pub good_inputs: usize,
}

impl GoodSetSpec {
    fn new(g_v: MessageSet, g_c: MessageSet, good_inputs: usize, l: usize) -> Result<Self> {
        if good_inputs == 0 || good_inputs > l - 1 {
            return Err(Error::Unsupported(format!(
                "no good set: {good_inputs} of {} good inputs would be required",
                l - 1
            )));
        }
        Ok(Self { g_v, g_c, beta: good_inputs as f64 / (l - 1) as f64, good_inputs })
    }
}

/// Good message subsets for the catalogued decoders.
///
/// * BEC/BP: good means known and one known input suffices.
/// * GalB: good means correct; `ceil((l-1)/2) + 1` correct inputs outvote
///   a wrong channel value.
/// * MS(M): `g_v = g_c = [M-1, M]` with channel reliabilities at most
///   `channel_llr_bound`. Reliabilities above `M` count as `M` because
///   check outputs are clipped.
/// * BP(M): `g_v = [M-1, M]` and `g_c = [lo, (l-1)M + B]`, where `lo` is the
///   worst-case variable output with the required number of good inputs;
///   the check must map `g_c` inputs back into `g_v`.
pub fn good_set_for(decoder: &DecoderSpec, l: usize, r: usize, channel_llr_bound: f64) -> Result<GoodSetSpec> {
    if l < 2 || r < 2 {
        return param(format!("degrees must be >= 2 (got l={l}, r={r})"));
    }
    let d = l - 1;
    match *decoder {
        DecoderSpec::BecBp => GoodSetSpec::new(MessageSet::Known, MessageSet::Known, 1, l),
        DecoderSpec::GalB => GoodSetSpec::new(MessageSet::Correct, MessageSet::Correct, d.div_ceil(2) + 1, l),
        DecoderSpec::MinSum { saturation: Some(m) } => {
            let (m, b) = (m as f64, channel_llr_bound);
            let a = m - 1.0;
            if !(b >= 0.0) || a <= 0.0 {
                return param("MS good set needs M >= 2 and a non-negative channel bound");
            }
            // k inputs at >= a, the rest at worst -M, channel at worst -B
            let k = (0..=d).find(|&k| k as f64 * a - (d - k) as f64 * m - b >= a).ok_or_else(|| {
                Error::Unsupported(format!("MS({m}) with l={l}: no number of good inputs reaches {a}"))
            })?;
            let set = MessageSet::Reliability { lo: a, hi: m };
            GoodSetSpec::new(set, set, k, l)
        }
        DecoderSpec::Bp { saturation: Some(m), .. } => {
            let b = channel_llr_bound;
            let a = m - 1.0;
            if !(b >= 0.0) || a <= 0.0 {
                return param("BP good set needs M > 1 and a non-negative channel bound");
            }
            let hi = d as f64 * m + b;
            for k in 1..=d {
                let lo = k as f64 * a - (d - k) as f64 * m - b;
                if lo <= 0.0 {
                    continue;
                }
                let check_out = 2.0 * (0.5 * lo).tanh().powi(r as i32 - 1).atanh();
                if check_out >= a {
                    return GoodSetSpec::new(
                        MessageSet::Reliability { lo: a, hi: m },
                        MessageSet::Reliability { lo, hi },
                        k,
                        l,
                    );
                }
            }
            Err(Error::Unsupported(format!("BP({m}) with l={l}, r={r}: no good set of this shape")))
        }
        other => Err(Error::Unsupported(format!("no catalogued good set for {}", other.name()))),
    }
}

/// Conditions under which iteration and blocklength limits can be exchanged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeReport {
    pub bit_ok: bool,
    pub block_ok: bool,
    pub gamma_bit: f64,
    pub gamma_block: f64,
    pub p_bit: f64,
    pub p_block: f64,
}

/// Bit-error condition `beta < 1` and block-error condition
/// `beta < (l-2)/(l-1)` with the expansion factors and probability margins
/// used to establish them.
pub fn exchange_conditions(l: usize, r: usize, beta: f64, alpha: f64) -> Result<ExchangeReport> {
    if l < 2 || r < 2 {
        return param(format!("degrees must be >= 2 (got l={l}, r={r})"));
    }
    if !(0.0..=1.0).contains(&beta) || !(alpha > 0.0 && alpha <= 1.0) {
        return param(format!("need beta in [0, 1] and alpha in (0, 1], got {beta}, {alpha}"));
    }
    let (lf, rf) = (l as f64, r as f64);
    // compare on the integer scale beta (l-1) to avoid rounding at the boundary
    let k = beta * (lf - 1.0);
    let k = if (k - k.round()).abs() < 1e-9 { k.round() } else { k };
    Ok(ExchangeReport {
        bit_ok: k < lf - 1.0,
        block_ok: k < lf - 2.0,
        gamma_bit: (1.0 - 1.0 / lf) * (1.0 + beta) / 2.0,
        gamma_block: (1.0 - 1.0 / lf) * (3.0 + beta) / 4.0,
        p_bit: alpha * (1.0 - beta) * (lf - 1.0) / 4.0,
        p_block: alpha * (lf - beta * (lf - 1.0)) / (2.0 * lf * rf),
    })
}
