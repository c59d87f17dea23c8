//! Toy-scale rate-splitting codec for the full-CSI probing channel.
//!
//! The message is split into an action part `M₁`, carried by the probing
//! sequence itself, and a data part `M₂`. Action codewords are drawn i.i.d.
//! from `P_A`; for every action codeword and every observation value the
//! data codebook holds an i.i.d. row from `P_{X|Se,A}`, and the transmitter
//! multiplexes between them on the observed `Se`. The receiver knows `Sⁿ`
//! and decodes successively by strong typicality, keeping the smallest
//! candidate index.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{roles, ProbingModel};
use crate::solver::thm1_joint;

/// Largest supported blocklength.
pub const MAX_BLOCKLENGTH: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodecConfig {
    /// Action-message rate in bits per symbol.
    pub r1: f64,
    /// Data-message rate in bits per symbol.
    pub r2: f64,
    pub n: usize,
    /// Relative slack of the typicality tests.
    pub epsilon: f64,
    pub trials: usize,
    /// Bound on codebook symbols drawn over all trials.
    pub work_cap: u64,
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig {
            r1: 0.0,
            r2: 0.0,
            n: 8,
            epsilon: 1.0,
            trials: 1000,
            work_cap: 200_000_000,
        }
    }
}

impl CodecConfig {
    fn validate(&self) -> Result<()> {
        if !(self.r1 >= 0.0 && self.r2 >= 0.0) {
            return Err(Error::Domain("rates must be nonnegative".into()));
        }
        if self.n == 0 || self.n > MAX_BLOCKLENGTH {
            return Err(Error::Domain(format!(
                "blocklength must be in 1..={MAX_BLOCKLENGTH}, got {}",
                self.n
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Domain("typicality slack must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::Domain("at least one trial is needed".into()));
        }
        Ok(())
    }

    /// `max(1, round(2^{nR}))`.
    pub fn messages(&self, rate: f64) -> usize {
        (2f64.powf(self.n as f64 * rate).round() as usize).max(1)
    }
}

/// Splits `rate` in proportion to `I(A;Y|S)` and `I(X;Y|S,A)` for the given
/// parts, so that each stage stays below its own limit whenever `rate` is
/// below their sum.
pub fn split_rate(m: &ProbingModel, pa: &[f64], px: &[Vec<f64>], rate: f64) -> Result<(f64, f64)> {
    let j = thm1_joint(m, pa, px)?;
    let ia = j.conditional_mutual_information(&[roles::A], &[roles::Y], &[roles::S])?;
    let ix = j.conditional_mutual_information(&[roles::X], &[roles::Y], &[roles::S, roles::A])?;
    if ia + ix <= 0.0 {
        return Ok((0.0, rate));
    }
    let r1 = rate * ia / (ia + ix);
    Ok((r1, rate - r1))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodecReport {
    pub error_rate: f64,
    pub errors: usize,
    /// Trials whose action message was decoded wrongly.
    pub action_errors: usize,
    /// Trials where the action codeword was atypical and the fallback used.
    pub fallbacks: usize,
    pub trials: usize,
    pub action_messages: usize,
    pub data_messages: usize,
    pub seed: u64,
    pub config: CodecConfig,
}

struct Tables {
    na: usize,
    ns: usize,
    nx: usize,
    ny: usize,
    pa: Vec<f64>,
    /// `h(s, a)`.
    observe: Vec<usize>,
    /// `P(a, y, s)` at `(a·ny + y)·ns + s`.
    ays: Vec<f64>,
    /// `P(x, y, s | a)` at `((a·nx + x)·ny + y)·ns + s`.
    xys: Vec<f64>,
    action: WeightedIndex<f64>,
    state: WeightedIndex<f64>,
    /// Input sampler for row `(se, a)`.
    inputs: Vec<Option<WeightedIndex<f64>>>,
    /// Output sampler for `(x, s)`.
    outputs: Vec<WeightedIndex<f64>>,
    fallback: usize,
}

fn sampler(w: &[f64]) -> Option<WeightedIndex<f64>> {
    WeightedIndex::new(w).ok()
}

impl Tables {
    fn new(m: &ProbingModel, pa: &[f64], px: &[Vec<f64>]) -> Result<Self> {
        m.require_encoder_only()?;
        if !m.has_decoder_csi() {
            return Err(Error::Unsupported("the codec needs the state at the receiver".into()));
        }
        let obs = m.encoder_observation()?;
        if !obs.is_deterministic() {
            return Err(Error::Unsupported("the codec needs a deterministic probe".into()));
        }
        let (na, ns, nse, nx, ny) = (m.ae.size(), m.s.size(), m.se.size(), m.x.size(), m.y.size());
        if pa.len() != na || px.len() != nse * na {
            return Err(Error::Dimension("parts do not match the model".into()));
        }
        let mut observe = vec![0; ns * na];
        for s in 0..ns {
            for a in 0..na {
                observe[s * na + a] = (0..nse).find(|&se| obs.prob(&[s, a], se) > 0.5).unwrap_or(0);
            }
        }
        let mut ays = vec![0.0; na * ny * ns];
        let mut xys = vec![0.0; na * nx * ny * ns];
        for a in 0..na {
            for s in 0..ns {
                let row = &px[observe[s * na + a] * na + a];
                let w = m.channel.row(&[0, s]).len();
                debug_assert_eq!(w, ny);
                for x in 0..nx {
                    let wy = m.channel.row(&[x, s]);
                    for y in 0..ny {
                        let p = m.state.prob(s) * row[x] * wy[y];
                        xys[((a * nx + x) * ny + y) * ns + s] = p;
                        ays[(a * ny + y) * ns + s] += pa[a] * p;
                    }
                }
            }
        }
        let fallback = (0..na)
            .min_by(|&i, &j| m.cost.get(i, 0).total_cmp(&m.cost.get(j, 0)))
            .unwrap_or(0);
        Ok(Tables {
            na,
            ns,
            nx,
            ny,
            pa: pa.to_vec(),
            observe,
            ays,
            xys,
            action: sampler(pa).ok_or_else(|| Error::InvalidDistribution("action law".into()))?,
            state: sampler(m.state.mass()).ok_or_else(|| Error::InvalidDistribution("state law".into()))?,
            inputs: px.iter().map(|r| sampler(r)).collect(),
            outputs: (0..nx * ns)
                .map(|i| sampler(m.channel.row(&[i / ns, i % ns])).expect("channel rows are valid"))
                .collect(),
            fallback,
        })
    }
}

/// Every cell within `eps` relative slack of its expectation; cells of
/// probability zero must be empty.
fn typical(counts: &[u32], probs: &[f64], total: f64, eps: f64) -> bool {
    counts.iter().zip(probs).all(|(&c, &p)| {
        let expect = total * p;
        if p <= 0.0 {
            c == 0
        } else {
            (c as f64 - expect).abs() <= eps * expect
        }
    })
}

/// Input rows for one message, one per observation value and position.
type Codeword = Vec<Vec<u8>>;

struct Trial {
    error: bool,
    action_error: bool,
    fallback: bool,
}

struct Codec<'a> {
    t: &'a Tables,
    nse: usize,
    cfg: &'a CodecConfig,
    m1: usize,
    m2: usize,
}

impl Codec<'_> {
    fn action_typical(&self, a: &[u8]) -> bool {
        let mut counts = vec![0u32; self.t.na];
        a.iter().for_each(|&v| counts[v as usize] += 1);
        typical(&counts, &self.t.pa, self.cfg.n as f64, self.cfg.epsilon)
    }

    fn codeword(&self, rng: &mut ChaCha8Rng, actions: &[u8]) -> Codeword {
        (0..self.nse)
            .map(|se| {
                actions
                    .iter()
                    .map(|&a| match &self.t.inputs[se * self.t.na + a as usize] {
                        Some(w) => w.sample(rng) as u8,
                        None => 0,
                    })
                    .collect()
            })
            .collect()
    }

    fn multiplex(&self, cw: &Codeword, actions: &[u8], states: &[u8]) -> Vec<u8> {
        (0..self.cfg.n)
            .map(|i| {
                let se = self.t.observe[states[i] as usize * self.t.na + actions[i] as usize];
                cw[se][i]
            })
            .collect()
    }

    fn data_typical(&self, actions: &[u8], x: &[u8], y: &[u8], s: &[u8]) -> bool {
        let t = self.t;
        let cells = t.nx * t.ny * t.ns;
        let mut counts = vec![0u32; t.na * cells];
        let mut per_action = vec![0u32; t.na];
        for i in 0..self.cfg.n {
            let a = actions[i] as usize;
            per_action[a] += 1;
            counts[a * cells + ((x[i] as usize) * t.ny + y[i] as usize) * t.ns + s[i] as usize] += 1;
        }
        (0..t.na).all(|a| {
            per_action[a] == 0
                || typical(
                    &counts[a * cells..(a + 1) * cells],
                    &t.xys[a * cells..(a + 1) * cells],
                    per_action[a] as f64,
                    self.cfg.epsilon,
                )
        })
    }

    fn run(&self, seed: u64, trial: usize) -> Trial {
        let (t, n) = (self.t, self.cfg.n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let msg1 = rng.random_range(0..self.m1);
        let msg2 = rng.random_range(0..self.m2);
        let states: Vec<u8> = (0..n).map(|_| t.state.sample(&mut rng) as u8).collect();
        let actions: Vec<Vec<u8>> = (0..self.m1)
            .map(|_| (0..n).map(|_| t.action.sample(&mut rng) as u8).collect())
            .collect();
        let book: Vec<Vec<Codeword>> = actions
            .iter()
            .map(|a| (0..self.m2).map(|_| self.codeword(&mut rng, a)).collect())
            .collect();
        let blind = vec![t.fallback as u8; n];
        let fallback_book: Vec<Codeword> = (0..self.m2).map(|_| self.codeword(&mut rng, &blind)).collect();

        // Encoder.
        let use_book = self.action_typical(&actions[msg1]);
        let (sent_actions, cw) = if use_book {
            (&actions[msg1], &book[msg1][msg2])
        } else {
            (&blind, &fallback_book[msg2])
        };
        let x = self.multiplex(cw, sent_actions, &states);
        let y: Vec<u8> = (0..n)
            .map(|i| t.outputs[x[i] as usize * t.ns + states[i] as usize].sample(&mut rng) as u8)
            .collect();

        // Receiver, stage one: the action message.
        let est1 = (0..self.m1)
            .find(|&k| {
                let mut counts = vec![0u32; t.na * t.ny * t.ns];
                for i in 0..n {
                    counts[(actions[k][i] as usize * t.ny + y[i] as usize) * t.ns + states[i] as usize] += 1;
                }
                typical(&counts, &t.ays, n as f64, self.cfg.epsilon)
            })
            .unwrap_or(0);

        // Stage two: demultiplex on the implied observations.
        let (acts, candidates) = if self.action_typical(&actions[est1]) {
            (&actions[est1], &book[est1])
        } else {
            (&blind, &fallback_book)
        };
        let est2 = (0..self.m2)
            .find(|&k| self.data_typical(acts, &self.multiplex(&candidates[k], acts, &states), &y, &states))
            .unwrap_or(0);
        Trial {
            error: est1 != msg1 || est2 != msg2,
            action_error: est1 != msg1,
            fallback: !use_book,
        }
    }
}

/// Fraction of trials decoded wrongly at the configured rates.
pub fn rate_split_codec(
    m: &ProbingModel,
    pa: &[f64],
    px: &[Vec<f64>],
    cfg: &CodecConfig,
    seed: u64,
) -> Result<CodecReport> {
    cfg.validate()?;
    let tables = Tables::new(m, pa, px)?;
    if m.x.size() > 256 || m.s.size() > 256 || m.y.size() > 256 || m.ae.size() > 256 {
        return Err(Error::Unsupported("alphabets above 256 symbols".into()));
    }
    let (m1, m2) = (cfg.messages(cfg.r1), cfg.messages(cfg.r2));
    let nse = m.se.size() as u64;
    let per_trial = (m1 as u64)
        .saturating_mul(m2 as u64 + 1)
        .saturating_add(m2 as u64)
        .saturating_mul(nse + 1)
        .saturating_mul(cfg.n as u64);
    let work = per_trial.saturating_mul(cfg.trials as u64);
    if work > cfg.work_cap {
        return Err(Error::Overflow {
            size: work as u128,
            cap: cfg.work_cap as u128,
        });
    }
    let codec = Codec {
        t: &tables,
        nse: m.se.size(),
        cfg,
        m1,
        m2,
    };
    let outcomes: Vec<Trial> = (0..cfg.trials).into_par_iter().map(|k| codec.run(seed, k)).collect();
    let errors = outcomes.iter().filter(|o| o.error).count();
    Ok(CodecReport {
        error_rate: errors as f64 / cfg.trials as f64,
        errors,
        action_errors: outcomes.iter().filter(|o| o.action_error).count(),
        fallbacks: outcomes.iter().filter(|o| o.fallback).count(),
        trials: cfg.trials,
        action_messages: m1,
        data_messages: m2,
        seed,
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_example1, build_observe_or_not, bsc, state_selected_channel};
    use crate::prob::Alphabet;
    use crate::ProbDist;

    fn noiseless() -> ProbingModel {
        // One live state: per-cell typicality then only forbids mismatches.
        let state = ProbDist::point(Alphabet::binary("S"), 0).unwrap();
        let ch = state_selected_channel(&[bsc(0.0), bsc(0.0)]).unwrap();
        build_observe_or_not(&ch, &state, true).unwrap()
    }

    #[test]
    fn single_message_never_fails() {
        let m = build_example1().unwrap();
        let px = vec![vec![0.5, 0.5]; 6];
        let cfg = CodecConfig {
            trials: 200,
            ..Default::default()
        };
        let r = rate_split_codec(&m, &[0.0, 1.0], &px, &cfg, 1).unwrap();
        assert_eq!(r.errors, 0);
        assert_eq!((r.action_messages, r.data_messages), (1, 1));
    }

    #[test]
    fn noiseless_channel_below_capacity() {
        let m = noiseless();
        let px = vec![vec![0.5, 0.5]; m.se.size() * 2];
        let cfg = CodecConfig {
            r2: 0.5,
            n: 8,
            trials: 2000,
            ..Default::default()
        };
        let r = rate_split_codec(&m, &[1.0, 0.0], &px, &cfg, 7).unwrap();
        assert!(r.error_rate <= 0.05, "{r:?}");
    }

    #[test]
    fn reproducible_and_capped() {
        let m = build_example1().unwrap();
        let px = vec![vec![0.5, 0.5]; 6];
        let cfg = CodecConfig {
            r2: 0.25,
            trials: 100,
            ..Default::default()
        };
        let a = rate_split_codec(&m, &[0.5, 0.5], &px, &cfg, 4).unwrap();
        let b = rate_split_codec(&m, &[0.5, 0.5], &px, &cfg, 4).unwrap();
        assert_eq!(a, b);
        let big = CodecConfig {
            r2: 1.0,
            n: 16,
            work_cap: 1000,
            ..Default::default()
        };
        assert!(matches!(
            rate_split_codec(&m, &[0.5, 0.5], &px, &big, 4),
            Err(Error::Overflow { .. })
        ));
    }
}
