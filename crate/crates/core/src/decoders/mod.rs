//! Finite-length decoding under the all-one codeword convention.
//!
//! Channel outcomes are stored relative to the transmitted codeword, so a
//! noise realization is just the set of variables whose received value is
//! wrong (BSC) or erased (BEC). Decoders run on the flooding schedule and
//! report per-iteration error metrics.

mod engine;
mod expansion_run;
mod goodset;

pub use engine::{run_decoder, Decoder, MessageState, Messages, Trace, TracePoint};
pub use expansion_run::{expansion_decoding_search, ExpansionSearch, ExpansionSearchReport};
pub use goodset::{exchange_conditions, good_set_for, ExchangeReport, GoodSetSpec, MessageSet};

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, param, Error, Result};
use crate::graph::TannerGraph;
use crate::rng::StreamRng;

/// Binary memoryless symmetric channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    /// Binary symmetric channel: a bad outcome is a flipped bit.
    Bsc,
    /// Binary erasure channel: a bad outcome is an erasure.
    Bec,
}

impl std::str::FromStr for Channel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bsc" => Ok(Self::Bsc),
            "bec" => Ok(Self::Bec),
            _ => Err(Error::Unsupported(format!("channel {s:?}"))),
        }
    }
}

/// Per-variable channel outcome; `bad[v]` means flipped (BSC) or erased (BEC).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRealization {
    pub channel: Channel,
    pub eps: f64,
    pub bad: Vec<bool>,
}

impl NoiseRealization {
    pub fn new(channel: Channel, eps: f64, bad: Vec<bool>) -> Result<Self> {
        check_probability("eps", eps)?;
        Ok(Self { channel, eps, bad })
    }

    /// All-correct realization of length `n`.
    pub fn clean(channel: Channel, eps: f64, n: usize) -> Result<Self> {
        Self::new(channel, eps, vec![false; n])
    }

    pub fn len(&self) -> usize {
        self.bad.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bad.is_empty()
    }

    pub fn bad_count(&self) -> usize {
        self.bad.iter().filter(|b| **b).count()
    }
}

/// IID channel outcomes, each bad with probability `eps`.
pub fn sample_noise(n: usize, channel: Channel, eps: f64, seed: u64) -> Result<NoiseRealization> {
    check_probability("eps", eps)?;
    let mut rng = StreamRng::seed_from_u64(seed);
    let bad = (0..n).map(|_| rng.random_bool(eps)).collect();
    NoiseRealization::new(channel, eps, bad)
}

/// Decoder variants.
///
/// Integer decoders work on the BSC with the channel mapped to `±1`; their
/// messages are integer multiples of the channel log-likelihood ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecoderSpec {
    /// Gallager B: sign product at checks, majority at variables.
    GalB,
    /// Linearized Gallager B: minimum at checks, majority at variables.
    LGalB,
    /// Min-sum; check outputs clipped to `saturation` when given.
    MinSum { saturation: Option<i64> },
    /// Min-sum with the plain minimum at checks, clipped to `[-M, M]`.
    LinearMinSum { saturation: i64 },
    /// Belief propagation on log-likelihood ratios. Check outputs are
    /// clipped to `saturation` and channel values to `channel_llr_bound`.
    Bp { saturation: Option<f64>, channel_llr_bound: Option<f64> },
    /// Belief propagation on the erasure channel.
    BecBp,
}

impl DecoderSpec {
    pub fn name(&self) -> String {
        match self {
            Self::GalB => "galb".into(),
            Self::LGalB => "lgalb".into(),
            Self::MinSum { saturation: None } => "ms".into(),
            Self::MinSum { saturation: Some(m) } => format!("ms({m})"),
            Self::LinearMinSum { saturation } => format!("lms({saturation})"),
            Self::Bp { saturation: None, .. } => "bp".into(),
            Self::Bp { saturation: Some(m), .. } => format!("bp({m})"),
            Self::BecBp => "bec-bp".into(),
        }
    }

    /// Channel the decoder is defined for.
    pub fn channel(&self) -> Channel {
        match self {
            Self::BecBp => Channel::Bec,
            _ => Channel::Bsc,
        }
    }

    /// Parse names such as `galb`, `lgalb`, `ms`, `ms(5)`, `lms(2)`,
    /// `bp`, `bp(10)` and `bec-bp`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (head, arg) = match s.find('(') {
            Some(i) if s.ends_with(')') => (&s[..i], Some(&s[i + 1..s.len() - 1])),
            _ => (s.as_str(), None),
        };
        let int_arg = |a: &str| -> Result<i64> {
            a.trim().parse().map_err(|_| Error::Parameter(format!("bad saturation {a:?} in {s:?}")))
        };
        let spec = match (head, arg) {
            ("galb", None) => Self::GalB,
            ("lgalb", None) => Self::LGalB,
            ("ms", None) => Self::MinSum { saturation: None },
            ("ms", Some(a)) => Self::MinSum { saturation: Some(int_arg(a)?) },
            ("lms", Some(a)) => Self::LinearMinSum { saturation: int_arg(a)? },
            ("bp", None) => Self::Bp { saturation: None, channel_llr_bound: None },
            ("bp", Some(a)) => Self::Bp {
                saturation: Some(a.trim().parse().map_err(|_| Error::Parameter(format!("bad saturation in {s:?}")))?),
                channel_llr_bound: None,
            },
            ("bec-bp" | "becbp", None) => Self::BecBp,
            _ => return Err(Error::Unsupported(format!("decoder {s:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::MinSum { saturation: Some(m) } | Self::LinearMinSum { saturation: m } if m < 1 => {
                param(format!("saturation {m} must be >= 1"))
            }
            Self::Bp { saturation: Some(m), .. } if !(m > 0.0) => param(format!("saturation {m} must be positive")),
            Self::Bp { channel_llr_bound: Some(b), .. } if !(b > 0.0) => {
                param(format!("channel LLR bound {b} must be positive"))
            }
            _ => Ok(()),
        }
    }
}

/// Check that a noise realization fits the graph and decoder.
pub(crate) fn check_inputs(g: &TannerGraph, e: &NoiseRealization, spec: &DecoderSpec) -> Result<()> {
    spec.validate()?;
    if e.len() != g.n() {
        return param(format!("noise has length {}, graph has n = {}", e.len(), g.n()));
    }
    if e.channel != spec.channel() {
        return param(format!("decoder {} needs the {:?} channel, got {:?}", spec.name(), spec.channel(), e.channel));
    }
    Ok(())
}

/// Everything needed to re-run one decoding experiment bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replay {
    /// Graph in the adjacency text format.
    pub graph: String,
    pub noise: NoiseRealization,
    pub decoder: DecoderSpec,
    pub iters: usize,
    pub seed: u64,
}

impl Replay {
    pub fn capture(g: &TannerGraph, e: &NoiseRealization, decoder: DecoderSpec, iters: usize, seed: u64) -> Self {
        Self { graph: g.to_text(), noise: e.clone(), decoder, iters, seed }
    }

    pub fn run(&self) -> Result<Trace> {
        let g = TannerGraph::from_text(&self.graph)?;
        run_decoder(&g, &self.noise, &self.decoder, self.iters, self.seed)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
    }
}
