//! Problem instances: alphabets, state law, channel, probe, costs.

mod builders;
mod file;
mod joints;

pub use builders::{
    bsc, build_example1, build_example2, build_example3, build_observe_or_not,
    build_two_sided_observe, observe_or_not_probe, s_channel, state_selected_channel, z_channel,
};
pub use file::{parse_model, read_model, write_model};
pub use joints::{
    expected_cost, joint_thm1, joint_thm2, joint_thm3, joint_thm4, thm2_u_bound, thm3_u_bound,
    thm4_u_bound, StrategyPair,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::Alphabet;
use crate::{CondKernel, ProbDist};

/// Axis labels used by the joint-law builders.
pub mod roles {
    pub const A: &str = "A";
    pub const AE: &str = "Ae";
    pub const AD: &str = "Ad";
    pub const S: &str = "S";
    pub const SE: &str = "Se";
    pub const SD: &str = "Sd";
    pub const U: &str = "U";
    pub const X: &str = "X";
    pub const Y: &str = "Y";
}

/// Erasure symbol of the observe-or-not probe.
pub const ERASURE: &str = "*";

/// Probing cost Λ(a_e, a_d), stored row-major with a_e outer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostTable {
    ae: usize,
    ad: usize,
    values: Vec<f64>,
}

impl CostTable {
    pub fn new(ae: usize, ad: usize, values: Vec<f64>) -> Result<Self> {
        if ae == 0 || ad == 0 || values.len() != ae * ad {
            return Err(Error::Dimension(format!(
                "cost table {ae}x{ad} given {} entries",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!("cost entry {v} is not a nonnegative number")));
        }
        Ok(CostTable { ae, ad, values })
    }

    /// Cost depending on an encoder action only.
    pub fn encoder(values: Vec<f64>) -> Result<Self> {
        Self::new(values.len(), 1, values)
    }

    pub fn get(&self, ae: usize, ad: usize) -> f64 {
        self.values[ae * self.ad + ad]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.ae, self.ad)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same table shifted so that its smallest entry is zero.
    pub fn normalized(&self) -> CostTable {
        let m = self.min();
        CostTable {
            ae: self.ae,
            ad: self.ad,
            values: self.values.iter().map(|v| v - m).collect(),
        }
    }
}

/// Linear constraint `Σ_x P(x) w(x) ≤ bound` on the channel input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputConstraint {
    pub weights: Vec<f64>,
    pub bound: f64,
}

/// A channel whose state is revealed through costly probing actions.
///
/// The channel kernel has inputs `[X, S]`; the probe kernel has inputs
/// `[S, Ae, Ad]` and outputs the product alphabet `Se × Sd` (Se outer).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbingModel {
    pub s: Alphabet,
    pub se: Alphabet,
    pub sd: Alphabet,
    pub ae: Alphabet,
    pub ad: Alphabet,
    pub x: Alphabet,
    pub y: Alphabet,
    pub state: ProbDist,
    pub channel: CondKernel,
    pub probe: CondKernel,
    pub cost: CostTable,
    pub budget: f64,
    pub input_constraint: Option<InputConstraint>,
}

impl ProbingModel {
    /// Checks that all parts agree in size and that the budget is feasible.
    pub fn validate(&self) -> Result<()> {
        let dims = |k: &CondKernel, inputs: &[&Alphabet], out: usize, what: &str| -> Result<()> {
            let want: Vec<usize> = inputs.iter().map(|a| a.size()).collect();
            if k.radices() != want || k.output().size() != out {
                return Err(Error::Dimension(format!(
                    "{what} kernel is {:?} -> {}, expected {:?} -> {}",
                    k.radices(),
                    k.output().size(),
                    want,
                    out
                )));
            }
            Ok(())
        };
        if self.state.len() != self.s.size() {
            return Err(Error::Dimension(format!(
                "state law has {} entries for |S| = {}",
                self.state.len(),
                self.s.size()
            )));
        }
        dims(&self.channel, &[&self.x, &self.s], self.y.size(), "channel")?;
        dims(
            &self.probe,
            &[&self.s, &self.ae, &self.ad],
            self.se.size() * self.sd.size(),
            "probe",
        )?;
        if self.cost.shape() != (self.ae.size(), self.ad.size()) {
            return Err(Error::Dimension(format!(
                "cost table is {:?}, actions are {}x{}",
                self.cost.shape(),
                self.ae.size(),
                self.ad.size()
            )));
        }
        if !self.budget.is_finite() || self.budget < 0.0 {
            return Err(Error::Domain(format!("budget {} must be >= 0", self.budget)));
        }
        self.check_budget(self.budget)?;
        if let Some(c) = &self.input_constraint {
            if c.weights.len() != self.x.size() {
                return Err(Error::Dimension(format!(
                    "input constraint has {} weights for |X| = {}",
                    c.weights.len(),
                    self.x.size()
                )));
            }
            let lo = c.weights.iter().copied().fold(f64::INFINITY, f64::min);
            if !(lo <= c.bound + 1e-12) {
                return Err(Error::Domain(format!(
                    "input constraint bound {} below smallest weight {lo}",
                    c.bound
                )));
            }
        }
        Ok(())
    }

    /// Errors when `gamma` is below the cheapest action.
    pub fn check_budget(&self, gamma: f64) -> Result<()> {
        let min_cost = self.min_cost();
        if !(gamma >= min_cost - 1e-12) {
            return Err(Error::Infeasible { gamma, min_cost });
        }
        Ok(())
    }

    pub fn min_cost(&self) -> f64 {
        self.cost.min()
    }

    pub fn max_cost(&self) -> f64 {
        self.cost.max()
    }

    pub fn with_budget(mut self, gamma: f64) -> Result<Self> {
        self.budget = gamma;
        self.validate()?;
        Ok(self)
    }

    /// True when the decoder takes no probing action.
    pub fn is_encoder_only(&self) -> bool {
        self.ad.size() == 1
    }

    pub fn probe_prob(&self, s: usize, ae: usize, ad: usize, se: usize, sd: usize) -> f64 {
        self.probe.prob(&[s, ae, ad], se * self.sd.size() + sd)
    }

    /// Encoder-side probe `P(Se, Sd | S, Ae)` at the (only) decoder action.
    pub fn encoder_probe(&self) -> Result<CondKernel> {
        self.require_encoder_only()?;
        CondKernel::from_fn(
            vec![self.s.clone(), self.ae.clone()],
            self.probe.output().clone(),
            |t| self.probe.row(&[t[0], t[1], 0]).to_vec(),
        )
    }

    /// `P(Se | S, Ae)` at the (only) decoder action.
    pub fn encoder_observation(&self) -> Result<CondKernel> {
        self.require_encoder_only()?;
        let nd = self.sd.size();
        CondKernel::from_fn(vec![self.s.clone(), self.ae.clone()], self.se.clone(), |t| {
            let row = self.probe.row(&[t[0], t[1], 0]);
            row.chunks(nd).map(|c| c.iter().sum()).collect()
        })
    }

    /// Map `s -> s_d` when the decoder sees the state exactly under every
    /// action, `None` otherwise. States of zero probability are ignored.
    pub fn decoder_state_map(&self) -> Option<Vec<usize>> {
        let nd = self.sd.size();
        let mut map = vec![0; self.s.size()];
        for s in 0..self.s.size() {
            if self.state.prob(s) == 0.0 {
                continue;
            }
            let mut seen = None;
            for ae in 0..self.ae.size() {
                for ad in 0..self.ad.size() {
                    let row = self.probe.row(&[s, ae, ad]);
                    let mut sd_mass = vec![0.0; nd];
                    for (k, &p) in row.iter().enumerate() {
                        sd_mass[k % nd] += p;
                    }
                    let hit = sd_mass.iter().position(|&p| p > 1.0 - 1e-12)?;
                    match seen {
                        None => seen = Some(hit),
                        Some(h) if h != hit => return None,
                        _ => {}
                    }
                }
            }
            map[s] = seen?;
        }
        let live: Vec<usize> = (0..self.s.size())
            .filter(|&s| self.state.prob(s) > 0.0)
            .collect();
        for (i, &a) in live.iter().enumerate() {
            if live[..i].iter().any(|&b| map[b] == map[a]) {
                return None;
            }
        }
        Some(map)
    }

    pub fn has_decoder_csi(&self) -> bool {
        self.decoder_state_map().is_some()
    }

    pub(crate) fn require_encoder_only(&self) -> Result<()> {
        if self.is_encoder_only() {
            Ok(())
        } else {
            Err(Error::Unsupported(format!(
                "model has {} decoder actions; an encoder-only model is required",
                self.ad.size()
            )))
        }
    }
}
