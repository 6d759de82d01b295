use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::Waveform;
use crate::pbs::OfdmConfig;

/// Data symbols following the pilot symbol in every frame.
pub const NUM_DATA_SYMBOLS: usize = 6;

/// Gray-mapped unit-energy QPSK point for the bit pair `(b0, b1)`.
pub fn qpsk_map(b0: bool, b1: bool) -> Complex64 {
    let s = |b: bool| if b { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    Complex64::new(s(b0), s(b1))
}

/// Hard decision inverse of [`qpsk_map`].
pub fn qpsk_demap(z: Complex64) -> (bool, bool) {
    (z.re < 0.0, z.im < 0.0)
}

/// One pilot symbol and [`NUM_DATA_SYMBOLS`] QPSK data symbols per scheduled
/// transmit beam. Beam `j` of `S` carries pilots on subcarriers `n ≡ j (mod S)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfdmFrame {
    pub tx_beams: Vec<usize>,
    /// `[beam][subcarrier]`
    pub pilot: Vec<Vec<Complex64>>,
    /// `[beam][symbol][subcarrier]`
    pub data: Vec<Vec<Vec<Complex64>>>,
}

impl OfdmFrame {
    pub fn random<R: Rng + ?Sized>(tx_beams: &[usize], ofdm: &OfdmConfig, rng: &mut R) -> Self {
        let n = ofdm.num_subcarriers;
        let s = tx_beams.len();
        let mut point = || qpsk_map(rng.random(), rng.random());
        let pilot = (0..s)
            .map(|j| (0..n).map(|k| if k % s == j { point() } else { Complex64::ZERO }).collect())
            .collect();
        let data = (0..s)
            .map(|_| (0..NUM_DATA_SYMBOLS).map(|_| (0..n).map(|_| point()).collect()).collect())
            .collect();
        Self { tx_beams: tx_beams.to_vec(), pilot, data }
    }

    /// Symbols of beam `j`, pilot first.
    pub fn symbols(&self, j: usize) -> impl Iterator<Item = &Vec<Complex64>> {
        std::iter::once(&self.pilot[j]).chain(self.data[j].iter())
    }

    pub fn num_symbols(&self) -> usize {
        1 + NUM_DATA_SYMBOLS
    }

    pub fn pilot_overhead(&self) -> f64 {
        1.0 / self.num_symbols() as f64
    }
}

/// Time-domain OFDM signal of one beam: `samples[i]` is taken at
/// `(i - N_cp)·T_s` relative to the start of the first useful part.
pub fn ofdm_modulate_symbols<'a>(
    symbols: impl IntoIterator<Item = &'a Vec<Complex64>>,
    ofdm: &OfdmConfig,
) -> Vec<Complex64> {
    let n = ofdm.num_subcarriers;
    let cp = ofdm.cp_samples;
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let mut out = Vec::new();
    for sym in symbols {
        assert_eq!(sym.len(), n, "symbol length must equal the number of subcarriers");
        // Σ_n X_n·exp(j2π n i/N): the unnormalized inverse DFT
        let mut buf = sym.clone();
        ifft.process(&mut buf);
        out.extend((0..cp).map(|i| buf[(n + i - cp % n) % n]));
        out.extend_from_slice(&buf);
    }
    out
}

/// Modulates every beam of a frame.
pub fn ofdm_modulate(frame: &OfdmFrame, ofdm: &OfdmConfig) -> Waveform {
    Waveform {
        beams: frame.tx_beams.clone(),
        samples: (0..frame.tx_beams.len()).map(|j| ofdm_modulate_symbols(frame.symbols(j), ofdm)).collect(),
    }
}

/// `Y_n = (1/N)·Σ_i y_i·exp(-j2π n i/N)` over the useful part of each of the
/// first `num_symbols` symbols. Missing samples count as zero.
pub fn ofdm_demodulate(samples: &[Complex64], ofdm: &OfdmConfig, num_symbols: usize) -> Vec<Vec<Complex64>> {
    let n = ofdm.num_subcarriers;
    let len = ofdm.samples_per_symbol();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let scale = 1.0 / n as f64;
    (0..num_symbols)
        .map(|s| {
            let start = s * len + ofdm.cp_samples;
            let mut buf: Vec<Complex64> =
                (start..start + n).map(|i| samples.get(i).copied().unwrap_or(Complex64::ZERO)).collect();
            fft.process(&mut buf);
            buf.iter_mut().for_each(|z| *z *= scale);
            buf
        })
        .collect()
}
