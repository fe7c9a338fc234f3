//! Link quality metrics and the receiver operation-count model.

use alloc::vec::Vec;

use crate::channel::ChannelRealization;
use crate::link::TxSignal;
use crate::modem::OfdmModem;
use crate::numerics::{db, from_db};
use crate::precoding::PrecodingMatrix;
use crate::receiver::ReceiverKind;
use crate::{Error, FrequencyGrid, Result, C64};

/// Measured quality of one link point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub snr_db: f64,
    pub ebn0_db: f64,
    pub sdr_db: f64,
    pub bit_errors: u64,
    pub total_bits: u64,
}

impl MetricReport {
    pub fn ber(&self) -> f64 {
        if self.total_bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.total_bits as f64
        }
    }
}

/// `|sum_k alpha_k h[k][n] v[k][n]|^2` per data subcarrier.
pub fn coherent_gain(
    h: &ChannelRealization,
    v: &PrecodingMatrix,
    alphas: &[f64],
) -> Result<Vec<f64>> {
    if alphas.len() != h.antennas() {
        return Err(Error::LengthMismatch {
            expected: h.antennas(),
            actual: alphas.len(),
        });
    }
    Ok(h.gains()
        .column_dot(v.grid(), Some(alphas))?
        .iter()
        .map(|d| d.norm_sqr())
        .collect())
}

/// Per-antenna spectra of the Bussgang residual `y^ - alpha_k y`.
pub fn distortion_spectra(
    tx: &TxSignal,
    alphas: &[f64],
    modem: &OfdmModem,
) -> Result<FrequencyGrid> {
    if tx.clean.len() != alphas.len() || tx.amplified.len() != alphas.len() {
        return Err(Error::LengthMismatch {
            expected: alphas.len(),
            actual: tx.clean.len(),
        });
    }
    let rows = tx
        .clean
        .iter()
        .zip(&tx.amplified)
        .zip(alphas)
        .map(|((y, yh), a)| {
            let resid: Vec<C64> = y
                .body()
                .iter()
                .zip(yh.body())
                .map(|(y, yh)| yh - y * a)
                .collect();
            modem.spectrum_of(&resid)
        })
        .collect();
    FrequencyGrid::from_rows(rows)
}

/// Wanted and distortion energy summed over data subcarriers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SdrTerms {
    pub wanted: f64,
    pub distortion: f64,
}

impl SdrTerms {
    pub fn add(&mut self, other: SdrTerms) {
        self.wanted += other.wanted;
        self.distortion += other.distortion;
    }

    /// Ratio in dB; `+inf` when no distortion reaches the receiver.
    pub fn db(&self) -> f64 {
        if self.distortion == 0.0 {
            f64::INFINITY
        } else {
            db(self.wanted / self.distortion)
        }
    }
}

pub fn sdr_terms(
    h: &ChannelRealization,
    v: &PrecodingMatrix,
    alphas: &[f64],
    distortion: &FrequencyGrid,
    symbol_power: f64,
) -> Result<SdrTerms> {
    let wanted = coherent_gain(h, v, alphas)?.iter().sum::<f64>() * symbol_power;
    h.gains().same_shape(distortion)?;
    let received = h.gains().column_dot(distortion, None)?;
    Ok(SdrTerms {
        wanted,
        distortion: received.iter().map(|x| x.norm_sqr()).sum(),
    })
}

/// Signal-to-distortion ratio at the receiver, dB.
pub fn sdr(
    h: &ChannelRealization,
    v: &PrecodingMatrix,
    alphas: &[f64],
    distortion: &FrequencyGrid,
    symbol_power: f64,
) -> Result<f64> {
    sdr_terms(h, v, alphas, distortion, symbol_power).map(|t| t.db())
}

fn bits_per_symbol(order: u32) -> f64 {
    libm::log2(order as f64)
}

/// `(SNR, Eb/N0)` in dB for a given noise power per subcarrier.
pub fn snr_and_ebn0(
    h: &ChannelRealization,
    v: &PrecodingMatrix,
    alphas: &[f64],
    noise_power: f64,
    symbol_power: f64,
    order: u32,
) -> Result<(f64, f64)> {
    if !(noise_power > 0.0) {
        return Err(Error::Invalid("noise power must be positive"));
    }
    let g = coherent_gain(h, v, alphas)?;
    let signal = symbol_power * g.iter().sum::<f64>() / g.len() as f64;
    let snr = db(signal / noise_power);
    Ok((snr, snr - db(bits_per_symbol(order))))
}

/// Noise power per subcarrier that yields `ebn0_db`; zero for `+inf`.
pub fn noise_power_for_ebn0(
    h: &ChannelRealization,
    v: &PrecodingMatrix,
    alphas: &[f64],
    symbol_power: f64,
    order: u32,
    ebn0_db: f64,
) -> Result<f64> {
    if ebn0_db == f64::INFINITY {
        return Ok(0.0);
    }
    let g = coherent_gain(h, v, alphas)?;
    let signal = symbol_power * g.iter().sum::<f64>() / g.len() as f64;
    Ok(signal / (from_db(ebn0_db) * bits_per_symbol(order)))
}

pub fn bit_errors(tx: &[u8], rx: &[u8]) -> Result<u64> {
    if tx.len() != rx.len() {
        return Err(Error::LengthMismatch {
            expected: tx.len(),
            actual: rx.len(),
        });
    }
    Ok(tx
        .iter()
        .zip(rx)
        .filter(|(a, b)| (*a ^ *b) & 1 != 0)
        .count() as u64)
}

pub fn ber(tx: &[u8], rx: &[u8]) -> Result<f64> {
    let e = bit_errors(tx, rx)?;
    Ok(if tx.is_empty() {
        0.0
    } else {
        e as f64 / tx.len() as f64
    })
}

/// Square-root iterations charged for each clipped sample.
pub const CORDIC_ITERATIONS: u64 = 23;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityParams {
    pub order: u64,
    pub fft_size: u64,
    pub data_subcarriers: u64,
    pub antennas: u64,
    pub iterations: u64,
}

impl ComplexityParams {
    /// 64-QAM, N = 4096, N_U = 2048, K = 64.
    pub fn reference(iterations: u64) -> Self {
        Self {
            order: 64,
            fft_size: 4096,
            data_subcarriers: 2048,
            antennas: 64,
            iterations,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fft_size < 2 || !self.fft_size.is_power_of_two() {
            return Err(Error::NotPowerOfTwo {
                len: self.fft_size as usize,
            });
        }
        if self.data_subcarriers == 0 || self.data_subcarriers > self.fft_size {
            return Err(Error::Invalid("data subcarriers must be in 1..=N"));
        }
        if self.antennas == 0 {
            return Err(Error::Invalid("antenna count must be positive"));
        }
        let r = self.sqrt_order();
        if r * r != self.order || r == 0 {
            return Err(Error::Invalid(
                "constellation order must be a perfect square",
            ));
        }
        Ok(())
    }

    fn sqrt_order(&self) -> u64 {
        let mut r = libm::sqrt(self.order as f64) as u64;
        while r * r > self.order {
            r -= 1;
        }
        while (r + 1) * (r + 1) <= self.order {
            r += 1;
        }
        r
    }
}

/// Real additions/subtractions and multiplications/divisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OperationCount {
    pub additions: u64,
    pub multiplications: u64,
    pub data_subcarriers: u64,
}

impl OperationCount {
    pub fn additions_per_subcarrier(&self) -> f64 {
        self.additions as f64 / self.data_subcarriers as f64
    }

    pub fn multiplications_per_subcarrier(&self) -> f64 {
        self.multiplications as f64 / self.data_subcarriers as f64
    }
}

/// Cost of one processing step, `(adds, mults)`.
pub mod steps {
    use super::CORDIC_ITERATIONS;

    fn half_n_log_n(n: u64) -> u64 {
        n / 2 * n.trailing_zeros() as u64
    }

    /// Radix-2 FFT/IFFT; each complex multiply is 3 real mults + 5 adds.
    pub fn fft(n: u64) -> (u64, u64) {
        let log = n.trailing_zeros() as u64;
        (5 * half_n_log_n(n) + 2 * n * log, 3 * half_n_log_n(n))
    }

    /// Per-axis slicing detection of `nu` symbols.
    pub fn detection(nu: u64, sqrt_m: u64) -> (u64, u64) {
        (6 * nu * sqrt_m, 4 * nu * sqrt_m)
    }

    /// One complex multiply per data subcarrier (equalization, SISO
    /// precoding or SISO propagation).
    pub fn per_subcarrier_complex_mult(nu: u64) -> (u64, u64) {
        (5 * nu, 3 * nu)
    }

    /// Soft limiter over `n` samples: one comparison counted as an add, the
    /// power (2 mults + 1 add), CORDIC square root (3 adds per iteration),
    /// the ratio (1 div) and the rescale (2 mults).
    pub fn nonlinearity(n: u64) -> (u64, u64) {
        (n + 3 * CORDIC_ITERATIONS * n, 2 * n + n + 2 * n)
    }
}

pub fn complexity(kind: ReceiverKind, p: &ComplexityParams) -> OperationCount {
    let n = p.fft_size;
    let nu = p.data_subcarriers;
    let k = p.antennas;
    let i = p.iterations;
    let sqrt_m = p.sqrt_order();

    let (fft_a, fft_m) = steps::fft(n);
    let (det_a, det_m) = steps::detection(nu, sqrt_m);
    let (eq_a, eq_m) = steps::per_subcarrier_complex_mult(nu);
    let (nl_a, nl_m) = steps::nonlinearity(n);

    let base_a = eq_a + fft_a + det_a;
    let base_m = eq_m + fft_m + det_m;

    let (iter_a, iter_m) = match kind {
        ReceiverKind::Standard => (0, 0),
        // IFFT + limiter + FFT, alpha division (2 per sample), subtraction, detection
        ReceiverKind::Cnc => (
            2 * fft_a + nl_a + 2 * nu + det_a,
            2 * fft_m + nl_m + 2 * nu + det_m,
        ),
        // K IFFTs and limiters, K propagations, one FFT of the sum, K precodings,
        // one equalization, K-1 antenna sums, subtraction, detection
        ReceiverKind::Mcnc => (
            (k + 1) * fft_a + k * nl_a + (2 * k + 1) * eq_a + (k - 1) * nu + 2 * nu + det_a,
            (k + 1) * fft_m + k * nl_m + (2 * k + 1) * eq_m + det_m,
        ),
    };
    let iters = if kind == ReceiverKind::Standard { 0 } else { i };
    OperationCount {
        additions: base_a + iters * iter_a,
        multiplications: base_m + iters * iter_m,
        data_subcarriers: nu,
    }
}
