//! Per-antenna soft-limiter amplifier and its Bussgang linear gain.
//!
//! The limiter passes samples with `|y|^2 <= P_max` untouched and clamps
//! the rest to amplitude `sqrt(P_max)` with the input phase. All K front-ends
//! share one [`AmplifierModel`]; the clipping threshold is set from the
//! array-wide mean sample power, so antennas that the precoder loads more
//! heavily run at a lower effective back-off.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::modem::{OfdmConfig, TimeFrame};
use crate::precoding::PrecodingMatrix;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplifierModel {
    ibo_db: f64,
    p_max: f64,
    reference_power: f64,
}

impl AmplifierModel {
    /// Saturation at `ibo_db` above `reference_power` (mean input sample power).
    /// `ibo_db = +inf` gives a linear amplifier.
    pub fn from_ibo(ibo_db: f64, reference_power: f64) -> Result<Self> {
        if ibo_db.is_nan() || ibo_db == f64::NEG_INFINITY {
            return Err(Error::Invalid("input back-off must be a number"));
        }
        let p_max = libm::pow(10.0, ibo_db / 10.0) * reference_power;
        if !(p_max > 0.0) {
            return Err(Error::SaturationPower(p_max));
        }
        Ok(Self {
            ibo_db,
            p_max,
            reference_power,
        })
    }

    pub fn linear(reference_power: f64) -> Self {
        Self {
            ibo_db: f64::INFINITY,
            p_max: f64::INFINITY,
            reference_power,
        }
    }

    pub fn ibo_db(&self) -> f64 {
        self.ibo_db
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn reference_power(&self) -> f64 {
        self.reference_power
    }

    pub fn is_linear(&self) -> bool {
        self.p_max.is_infinite()
    }

    /// Same back-off referred to a different mean input power.
    pub fn rescaled(&self, reference_power: f64) -> Result<Self> {
        if self.is_linear() {
            return Ok(Self::linear(reference_power));
        }
        Self::from_ibo(self.ibo_db, reference_power)
    }

    pub fn clip(&self, y: C64) -> C64 {
        let p = y.norm_sqr();
        if p <= self.p_max {
            return y;
        }
        let mut scale = libm::sqrt(self.p_max / p);
        let mut out = y * scale;
        // rounding can leave |out|^2 an ulp above P_max; pull it under so a
        // second pass is a no-op
        while out.norm_sqr() > self.p_max {
            scale *= 1.0 - f64::EPSILON;
            out = y * scale;
        }
        out
    }

    pub fn clip_in_place(&self, samples: &mut [C64]) {
        if self.is_linear() {
            return;
        }
        for y in samples {
            *y = self.clip(*y);
        }
    }
}

/// Per-antenna mean sample power under unit-gain precoding: `Ps N_U / (K N)`.
pub fn reference_power(cfg: &OfdmConfig, antennas: usize, symbol_power: f64) -> f64 {
    symbol_power * cfg.data_subcarriers as f64 / (antennas as f64 * cfg.fft_size as f64)
}

pub fn soft_limit(frame: &TimeFrame, amp: &AmplifierModel) -> TimeFrame {
    let mut out = frame.clone();
    amp.clip_in_place(&mut out.samples);
    out
}

/// Bussgang gain of a soft limiter driven by complex Gaussian input at
/// `ibo_db` back-off: `1 - exp(-g^2) + sqrt(pi) g / 2 * erfc(g)`, `g = 10^(ibo/20)`.
pub fn alpha_analytic(ibo_db: f64) -> f64 {
    if ibo_db == f64::INFINITY {
        return 1.0;
    }
    let g = libm::pow(10.0, ibo_db / 20.0);
    let a = 1.0 - libm::exp(-g * g) + libm::sqrt(PI) * g / 2.0 * libm::erfc(g);
    a.min(1.0)
}

/// Running sample estimate of `E[out in*] / E[in in*]`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AlphaEstimator {
    cross: C64,
    power: f64,
    samples: u64,
}

impl AlphaEstimator {
    pub fn push(&mut self, input: &[C64], output: &[C64]) -> Result<()> {
        if input.len() != output.len() {
            return Err(Error::LengthMismatch {
                expected: input.len(),
                actual: output.len(),
            });
        }
        for (y, yh) in input.iter().zip(output) {
            self.cross += yh * y.conj();
            self.power += y.norm_sqr();
        }
        self.samples += input.len() as u64;
        Ok(())
    }

    pub fn merge(&mut self, other: &Self) {
        self.cross += other.cross;
        self.power += other.power;
        self.samples += other.samples;
    }

    /// Complex ratio; real-valued for any phase-preserving nonlinearity.
    pub fn ratio(&self) -> Result<C64> {
        if self.samples == 0 || !(self.power > 0.0) {
            return Err(Error::ZeroInputPower);
        }
        Ok(self.cross / self.power)
    }

    pub fn alpha(&self) -> Result<f64> {
        self.ratio().map(|r| r.re)
    }
}

/// Empirical Bussgang gain over matched sets of input/output frames.
pub fn alpha_empirical<'a>(pairs: impl IntoIterator<Item = (&'a [C64], &'a [C64])>) -> Result<f64> {
    let mut est = AlphaEstimator::default();
    for (i, o) in pairs {
        est.push(i, o)?;
    }
    est.alpha()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BussgangCoefficients {
    pub alphas: Vec<f64>,
    pub ibo_db: Vec<f64>,
    /// Antennas with no precoding power; their gain is pinned to 1.
    pub silent: Vec<usize>,
}

impl BussgangCoefficients {
    pub fn uniform(antennas: usize, ibo_db: f64) -> Self {
        Self {
            alphas: alloc::vec![alpha_analytic(ibo_db); antennas],
            ibo_db: alloc::vec![ibo_db; antennas],
            silent: Vec::new(),
        }
    }

    pub fn mean_alpha(&self) -> f64 {
        self.alphas.iter().sum::<f64>() / self.alphas.len().max(1) as f64
    }
}

/// Effective back-off of each antenna given how the precoder loads it:
/// `IBO_k = 10 log10(P_max / (Ps/N * sum_n |v[k][n]|^2))`.
pub fn per_antenna_ibo(
    v: &PrecodingMatrix,
    amp: &AmplifierModel,
    symbol_power: f64,
    cfg: &OfdmConfig,
) -> BussgangCoefficients {
    let k = v.antennas();
    let mut out = BussgangCoefficients {
        alphas: Vec::with_capacity(k),
        ibo_db: Vec::with_capacity(k),
        silent: Vec::new(),
    };
    for (a, row_power) in v.row_powers().into_iter().enumerate() {
        let mean = symbol_power / cfg.fft_size as f64 * row_power;
        if !(mean > 0.0) {
            out.silent.push(a);
            out.alphas.push(1.0);
            out.ibo_db.push(f64::INFINITY);
            continue;
        }
        let ibo = if amp.is_linear() {
            f64::INFINITY
        } else {
            10.0 * libm::log10(amp.p_max() / mean)
        };
        out.ibo_db.push(ibo);
        out.alphas.push(alpha_analytic(ibo));
    }
    out
}
