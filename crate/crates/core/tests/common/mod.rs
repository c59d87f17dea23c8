#![allow(dead_code)]

use probecap::model::{parse_model, ProbingModel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Binary state, input and output; the decoder sees the state. Action 1
/// observes the state through a binary symmetric flip of probability
/// `noise_hi`; action 0 yields an erasure, or with `noise_lo` a flipped
/// observation as well.
pub fn observe_model(p0: f64, channel: [[f64; 2]; 4], noise_hi: f64, noise_lo: Option<f64>) -> ProbingModel {
    let mut text = String::from(
        "[alphabets]\nS = 0 1\nSe = * 0 1\nSd = 0 1\nAe = 0 1\nX = 0 1\nY = 0 1\n[state]\n",
    );
    text += &format!("{:.17} {:.17}\n[channel]\n", p0, 1.0 - p0);
    for row in channel {
        text += &format!("{:.17} {:.17}\n", row[0], 1.0 - row[0]);
    }
    text += "[probe]\n";
    for s in 0..2 {
        for a in 0..2 {
            // Entries ordered (se, sd) with se outer; sd always equals s.
            let mut cells = [0.0; 6];
            let noise = if a == 1 { Some(noise_hi) } else { noise_lo };
            match noise {
                None => cells[s] = 1.0,
                Some(e) => {
                    cells[2 * (1 + s) + s] = 1.0 - e;
                    cells[2 * (2 - s) + s] = e;
                }
            }
            let line: Vec<String> = cells.iter().map(|c| format!("{c:.17}")).collect();
            text += &line.join(" ");
            text += "\n";
        }
    }
    text += "[cost]\n0 1\n[budget]\n1\n";
    parse_model(&text).expect("generated model parses")
}

/// Random member of the [`observe_model`] family.
pub fn random_observe_model(rng: &mut ChaCha8Rng, cheap_informative: bool) -> ProbingModel {
    let p0 = rng.random_range(0.2..0.8);
    let mut channel = [[0.0; 2]; 4];
    for row in channel.iter_mut() {
        row[0] = rng.random_range(0.0..1.0);
    }
    let noise_hi = rng.random_range(0.0..0.25);
    let noise_lo = cheap_informative.then(|| rng.random_range(0.25..0.5));
    observe_model(p0, channel, noise_hi, noise_lo)
}

/// Random member with an exact observation under action 1.
pub fn random_exact_model(rng: &mut ChaCha8Rng) -> ProbingModel {
    let p0 = rng.random_range(0.2..0.8);
    let mut channel = [[0.0; 2]; 4];
    for row in channel.iter_mut() {
        row[0] = rng.random_range(0.0..1.0);
    }
    observe_model(p0, channel, 0.0, None)
}
