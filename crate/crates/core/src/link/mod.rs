//! Time-domain OFDM link simulation through the ray channel with joint or
//! per-beam synchronization at the UT.
//!
//! A frame is one comb pilot symbol followed by six QPSK data symbols on each
//! scheduled BS beam. The receiver estimates the channel per subcarrier by
//! least squares with linear interpolation across the comb, separates the
//! streams by zero forcing over its receive beams and makes hard decisions.

mod channel;
mod ofdm;
mod receiver;


pub use channel::{apply_sync, channel_apply_dl, delay_samples};
pub use ofdm::{ofdm_demodulate, ofdm_modulate, ofdm_modulate_symbols, qpsk_demap, qpsk_map, OfdmFrame, NUM_DATA_SYMBOLS};
pub use receiver::{link_beams, run_link, LinkMetrics, LinkParams};

use num_complex::Complex64;

/// Per-beam sample streams; `samples[j]` belongs to beam `beams[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub beams: Vec<usize>,
    pub samples: Vec<Vec<Complex64>>,
}

impl Waveform {
    /// Length of the longest stream.
    pub fn len(&self) -> usize {
        self.samples.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().flatten().map(|z| z.norm_sqr()).sum()
    }
}
