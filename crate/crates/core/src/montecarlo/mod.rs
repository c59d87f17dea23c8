//! Sampling checks of solver outputs and a toy achievability codec.

mod codec;
mod sample;

pub use codec::{rate_split_codec, split_rate, CodecConfig, CodecReport, MAX_BLOCKLENGTH};
pub use sample::{empirical_cmi, sample_joint, CmiEstimate, SampleBatch, BOOTSTRAP};
