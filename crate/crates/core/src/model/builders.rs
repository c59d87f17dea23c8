//! Canonical model constructors.

use super::{CostTable, InputConstraint, ProbingModel, ERASURE};
use crate::error::{Error, Result};
use crate::prob::Alphabet;
use crate::{CondKernel, ProbDist};

/// S-channel rows `[x=0, x=1]` over `y`: a one is received intact, a zero
/// survives with probability `alpha`.
pub fn s_channel(alpha: f64) -> [[f64; 2]; 2] {
    [[alpha, 1.0 - alpha], [0.0, 1.0]]
}

/// Z-channel rows: a zero is received intact, a one survives with
/// probability `beta`.
pub fn z_channel(beta: f64) -> [[f64; 2]; 2] {
    [[1.0, 0.0], [1.0 - beta, beta]]
}

pub fn bsc(delta: f64) -> [[f64; 2]; 2] {
    [[1.0 - delta, delta], [delta, 1.0 - delta]]
}

/// Binary channel `P(Y | X, S)` that applies `per_state[s]` in state `s`.
pub fn state_selected_channel(per_state: &[[[f64; 2]; 2]]) -> Result<CondKernel> {
    let s = Alphabet::range("S", per_state.len())?;
    CondKernel::from_fn(
        vec![Alphabet::binary("X"), s],
        Alphabet::binary("Y"),
        |t| per_state[t[1]][t[0]].to_vec(),
    )
}

fn erasure_alphabet(s: &Alphabet, name: &str) -> Alphabet {
    let mut symbols = vec![ERASURE.to_string()];
    symbols.extend(s.symbols().iter().cloned());
    Alphabet::new(name, symbols).expect("state symbols never include the erasure")
}

/// Observe-or-not probe `P(Se | S, A)`: action 1 reveals the state, action 0
/// yields the erasure at index 0.
pub fn observe_or_not_probe(s: &Alphabet, actions: &Alphabet) -> Result<CondKernel> {
    if actions.size() != 2 {
        return Err(Error::Domain(format!(
            "observe-or-not needs a binary action alphabet, got {}",
            actions.size()
        )));
    }
    if s.index_of(ERASURE).is_some() {
        return Err(Error::Domain("state alphabet already contains `*`".into()));
    }
    let se = erasure_alphabet(s, "Se");
    CondKernel::deterministic(vec![s.clone(), actions.clone()], se, |t| {
        if t[1] == 1 {
            t[0] + 1
        } else {
            0
        }
    })
}

fn channel_alphabets(channel: &CondKernel) -> Result<(Alphabet, Alphabet)> {
    if channel.inputs().len() != 2 {
        return Err(Error::Dimension("channel kernel must have inputs [X, S]".into()));
    }
    Ok((
        channel.inputs()[0].renamed("X"),
        channel.inputs()[1].renamed("S"),
    ))
}

/// Encoder chooses whether to observe the state at cost `Λ(a) = a`. With
/// `decoder_csi` the decoder sees `S` exactly, otherwise nothing.
pub fn build_observe_or_not(
    channel: &CondKernel,
    state: &ProbDist,
    decoder_csi: bool,
) -> Result<ProbingModel> {
    let (x, s) = channel_alphabets(channel)?;
    let a = Alphabet::binary("Ae");
    let enc = observe_or_not_probe(&s, &a)?;
    let se = enc.output().clone();
    let sd = if decoder_csi {
        s.renamed("Sd")
    } else {
        Alphabet::singleton("Sd")
    };
    let ad = Alphabet::singleton("Ad");
    let nd = sd.size();
    let out = Alphabet::product("SeSd", &[&se, &sd]);
    let probe = CondKernel::deterministic(vec![s.clone(), a.clone(), ad.clone()], out, |t| {
        let e = enc.row(&[t[0], t[1]]).iter().position(|&p| p == 1.0).unwrap_or(0);
        let d = if decoder_csi { t[0] } else { 0 };
        e * nd + d
    })?;
    let model = ProbingModel {
        state: ProbDist::new(s.clone(), state.mass().to_vec())?,
        channel: CondKernel::new(vec![x.clone(), s.clone()], channel.output().renamed("Y"), channel.rows().to_vec())?,
        y: channel.output().renamed("Y"),
        s,
        se,
        sd,
        ae: a,
        ad,
        x,
        probe,
        cost: CostTable::encoder(vec![0.0, 1.0])?,
        budget: 1.0,
        input_constraint: None,
    };
    model.validate()?;
    Ok(model)
}

/// Both ends may observe the state: `Se = S` iff `a_e = 1`, `Sd = S` iff
/// `a_d = 1`, erasures otherwise.
pub fn build_two_sided_observe(
    channel: &CondKernel,
    state: &ProbDist,
    cost: CostTable,
) -> Result<ProbingModel> {
    let (x, s) = channel_alphabets(channel)?;
    let ae = Alphabet::binary("Ae");
    let ad = Alphabet::binary("Ad");
    let se = erasure_alphabet(&s, "Se");
    let sd = erasure_alphabet(&s, "Sd");
    let nd = sd.size();
    let out = Alphabet::product("SeSd", &[&se, &sd]);
    let probe = CondKernel::deterministic(vec![s.clone(), ae.clone(), ad.clone()], out, |t| {
        let e = if t[1] == 1 { t[0] + 1 } else { 0 };
        let d = if t[2] == 1 { t[0] + 1 } else { 0 };
        e * nd + d
    })?;
    let model = ProbingModel {
        state: ProbDist::new(s.clone(), state.mass().to_vec())?,
        channel: CondKernel::new(vec![x.clone(), s.clone()], channel.output().renamed("Y"), channel.rows().to_vec())?,
        y: channel.output().renamed("Y"),
        s,
        se,
        sd,
        ae,
        ad,
        x,
        probe,
        budget: cost.max(),
        cost,
        input_constraint: None,
    };
    model.validate()?;
    Ok(model)
}

fn bernoulli_state(p_zero: f64) -> Result<ProbDist> {
    ProbDist::new(Alphabet::binary("S"), vec![p_zero, 1.0 - p_zero])
}

/// S(0.5) in state 0, Z(0.5) in state 1, equiprobable states, decoder knows
/// the state.
pub fn build_example1() -> Result<ProbingModel> {
    let channel = state_selected_channel(&[s_channel(0.5), z_channel(0.5)])?;
    build_observe_or_not(&channel, &bernoulli_state(0.5)?, true)
}

/// S(0.1) in state 0, BSC(0.3) in state 1, equiprobable states, no decoder
/// state information.
pub fn build_example2() -> Result<ProbingModel> {
    let channel = state_selected_channel(&[s_channel(0.1), bsc(0.3)])?;
    build_observe_or_not(&channel, &bernoulli_state(0.5)?, false)
}

/// Multiplier channel `Y = S·X` with `S ~ Bern(1/2)`, decoder state
/// information and input constraint `P(X = 1) ≤ 0.25`.
pub fn build_example3() -> Result<ProbingModel> {
    let channel = CondKernel::deterministic(
        vec![Alphabet::binary("X"), Alphabet::binary("S")],
        Alphabet::binary("Y"),
        |t| t[0] * t[1],
    )?;
    let mut model = build_observe_or_not(&channel, &bernoulli_state(0.5)?, true)?;
    model.input_constraint = Some(InputConstraint {
        weights: vec![0.0, 1.0],
        bound: 0.25,
    });
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erasure_row_and_sizes() {
        let m = build_example1().unwrap();
        assert_eq!(m.se.size(), 3);
        assert_eq!(m.se.symbol(0), "*");
        for s in 0..2 {
            assert_eq!(m.probe_prob(s, 0, 0, 0, s), 1.0);
            assert_eq!(m.probe_prob(s, 1, 0, s + 1, s), 1.0);
        }
        assert!(m.has_decoder_csi());
        assert_eq!(m.decoder_state_map(), Some(vec![0, 1]));
    }

    #[test]
    fn example1_channel_rows() {
        let m = build_example1().unwrap();
        // state 0: S(0.5)
        assert_eq!(m.channel.row(&[0, 0]), &[0.5, 0.5]);
        assert_eq!(m.channel.row(&[1, 0]), &[0.0, 1.0]);
        // state 1: Z(0.5)
        assert_eq!(m.channel.row(&[0, 1]), &[1.0, 0.0]);
        assert_eq!(m.channel.row(&[1, 1]), &[0.5, 0.5]);
        assert_eq!(m.cost.get(1, 0), 1.0);
    }

    #[test]
    fn example2_has_no_decoder_csi() {
        let m = build_example2().unwrap();
        assert_eq!(m.sd.size(), 1);
        assert!(!m.has_decoder_csi());
        assert_eq!(m.channel.row(&[0, 1]), &[0.7, 0.3]);
    }

    #[test]
    fn example3_multiplier() {
        let m = build_example3().unwrap();
        assert_eq!(m.channel.row(&[1, 1]), &[0.0, 1.0]);
        assert_eq!(m.channel.row(&[1, 0]), &[1.0, 0.0]);
        assert_eq!(m.input_constraint.as_ref().unwrap().bound, 0.25);
    }

    #[test]
    fn non_binary_actions_rejected() {
        let s = Alphabet::binary("S");
        let a = Alphabet::range("A", 3).unwrap();
        assert!(observe_or_not_probe(&s, &a).is_err());
    }

    #[test]
    fn budget_below_min_cost_is_infeasible() {
        let mut m = build_example1().unwrap();
        m.cost = CostTable::encoder(vec![0.2, 1.0]).unwrap();
        assert!(matches!(
            m.with_budget(0.1),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn two_sided_shapes() {
        let ch = state_selected_channel(&[s_channel(0.5), z_channel(0.5)]).unwrap();
        let st = bernoulli_state(0.5).unwrap();
        let cost = CostTable::new(2, 2, vec![0.0, 0.5, 1.0, 1.5]).unwrap();
        let m = build_two_sided_observe(&ch, &st, cost).unwrap();
        assert_eq!(m.probe.output().size(), 9);
        assert_eq!(m.probe_prob(1, 1, 1, 2, 2), 1.0);
        assert_eq!(m.probe_prob(1, 0, 1, 0, 2), 1.0);
        assert!(!m.has_decoder_csi());
    }
}
