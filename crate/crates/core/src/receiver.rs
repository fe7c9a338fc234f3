//! Zero-forcing detection and the two decision-aided clipping-noise
//! cancellation receivers.
//!
//! Both iterative receivers share one loop. Starting from the equalized
//! observation `g`:
//!
//! 1. hard-detect `s~` from the current observation,
//! 2. regenerate what `s~` would have produced after equalization, `g~`,
//! 3. take the distortion estimate `q = g~ - s~`,
//! 4. form the next observation `g - q` and go back to 1.
//!
//! MCNC regenerates through the full K-antenna transmitter (precoder,
//! per-antenna limiter, channel). CNC regenerates through a single
//! unprecoded chain clipped at the K = 1 threshold and scaled by `1/alpha`,
//! which is exact for an equal-magnitude phase-only precoder and needs no
//! channel or precoder knowledge beyond the equalizer.

use alloc::vec::Vec;

use crate::channel::ChannelRealization;
use crate::frontend::{alpha_analytic, AmplifierModel};
use crate::link::Transmitter;
use crate::modem::{Constellation, OfdmModem};
use crate::precoding::PrecodingMatrix;
use crate::{Error, Result, C64};

/// Denominators smaller than this are treated as a deep fade.
pub const DEEP_FADE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverKind {
    Standard,
    Cnc,
    Mcnc,
}

impl ReceiverKind {
    pub fn name(&self) -> &'static str {
        match self {
            ReceiverKind::Standard => "standard",
            ReceiverKind::Cnc => "cnc",
            ReceiverKind::Mcnc => "mcnc",
        }
    }
}

/// Everything MCNC needs to emulate the transmitter: channel (or its
/// estimate), precoder, per-antenna Bussgang gains and the amplifier.
#[derive(Debug, Clone, Copy)]
pub struct ReceiverSideInfo<'a> {
    pub channel: &'a ChannelRealization,
    pub precoder: &'a PrecodingMatrix,
    pub alphas: &'a [f64],
    pub amplifier: AmplifierModel,
    pub modem: &'a OfdmModem,
    pub constellation: &'a Constellation,
}

impl ReceiverSideInfo<'_> {
    /// `D[n] = sum_k alpha_k h[k][n] v[k][n]`.
    pub fn denominator(&self) -> Result<Vec<C64>> {
        if self.alphas.len() != self.channel.antennas() {
            return Err(Error::LengthMismatch {
                expected: self.channel.antennas(),
                actual: self.alphas.len(),
            });
        }
        self.channel
            .gains()
            .column_dot(self.precoder.grid(), Some(self.alphas))
    }
}

/// CNC only knows the equalizer, the common back-off and the symbol power.
#[derive(Debug, Clone)]
pub struct CncSideInfo<'a> {
    pub denominator: &'a [C64],
    pub alpha: f64,
    /// Limiter at the single-antenna threshold `10^(IBO/10) Ps N_U / N`.
    pub amplifier: AmplifierModel,
    pub modem: &'a OfdmModem,
    pub constellation: &'a Constellation,
}

impl<'a> CncSideInfo<'a> {
    pub fn new(
        denominator: &'a [C64],
        ibo_db: f64,
        symbol_power: f64,
        modem: &'a OfdmModem,
        constellation: &'a Constellation,
    ) -> Result<Self> {
        let cfg = modem.config();
        let siso_power = symbol_power * cfg.data_subcarriers as f64 / cfg.fft_size as f64;
        let amplifier = if ibo_db == f64::INFINITY {
            AmplifierModel::linear(siso_power)
        } else {
            AmplifierModel::from_ibo(ibo_db, siso_power)?
        };
        Ok(Self {
            denominator,
            alpha: alpha_analytic(ibo_db),
            amplifier,
            modem,
            constellation,
        })
    }
}

/// Per-iteration record of a receiver run. Index `i` of `decisions`/`bits`
/// is the detection made from observation `g^i`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub decisions: Vec<Vec<C64>>,
    pub bits: Vec<Vec<u8>>,
    /// `q^i`, one per completed iteration.
    pub distortion: Vec<Vec<C64>>,
    /// `g^{i+1}`, one per completed iteration.
    pub refined: Vec<Vec<C64>>,
}

impl IterationTrace {
    pub fn iterations(&self) -> usize {
        self.distortion.len()
    }

    pub fn final_symbols(&self) -> &[C64] {
        self.decisions.last().map_or(&[], Vec::as_slice)
    }

    pub fn final_bits(&self) -> &[u8] {
        self.bits.last().map_or(&[], Vec::as_slice)
    }
}

/// `g[n] = r[n] / D[n]`.
pub fn equalize(r: &[C64], denominator: &[C64]) -> Result<Vec<C64>> {
    if r.len() != denominator.len() {
        return Err(Error::LengthMismatch {
            expected: denominator.len(),
            actual: r.len(),
        });
    }
    r.iter()
        .zip(denominator)
        .enumerate()
        .map(|(n, (x, d))| {
            if d.norm() < DEEP_FADE || !d.is_finite() {
                Err(Error::DeepFade { subcarrier: n })
            } else {
                Ok(x / d)
            }
        })
        .collect()
}

/// ZF equalization followed by nearest-point detection.
pub fn standard_receive(
    r: &[C64],
    denominator: &[C64],
    c: &Constellation,
) -> Result<IterationTrace> {
    let g = equalize(r, denominator)?;
    run_loop(g, 0, c, |_| unreachable!())
}

fn run_loop(
    g: Vec<C64>,
    iterations: usize,
    c: &Constellation,
    mut regenerate: impl FnMut(&[C64]) -> Result<Vec<C64>>,
) -> Result<IterationTrace> {
    let mut trace = IterationTrace::default();
    let mut current = g.clone();
    for i in 0..=iterations {
        let (symbols, bits) = c.detect_all(&current);
        trace.bits.push(bits);
        if i < iterations {
            let q = regenerate(&symbols)?;
            current = g.iter().zip(&q).map(|(g, q)| g - q).collect();
            trace.distortion.push(q);
            trace.refined.push(current.clone());
        }
        trace.decisions.push(symbols);
    }
    Ok(trace)
}

/// MCNC distortion estimate `q = r~ / D - s~` for the given decisions.
pub fn mcnc_distortion(
    decisions: &[C64],
    info: &ReceiverSideInfo<'_>,
    denominator: &[C64],
) -> Result<Vec<C64>> {
    let tx = Transmitter::new(info.modem, info.precoder, info.amplifier);
    let regen = tx.received(decisions, info.channel)?;
    let g = equalize(&regen, denominator)?;
    Ok(g.iter().zip(decisions).map(|(g, s)| g - s).collect())
}

/// CNC distortion estimate: single unprecoded chain, divided by alpha.
pub fn cnc_distortion(decisions: &[C64], info: &CncSideInfo<'_>) -> Result<Vec<C64>> {
    let mut frame = info.modem.modulate(decisions)?;
    info.amplifier.clip_in_place(&mut frame.samples);
    let spec = info.modem.demodulate(&frame)?;
    Ok(spec
        .iter()
        .zip(decisions)
        .map(|(y, s)| y / info.alpha - s)
        .collect())
}

pub fn mcnc_receive(
    r: &[C64],
    info: &ReceiverSideInfo<'_>,
    iterations: usize,
) -> Result<IterationTrace> {
    let d = info.denominator()?;
    let g = equalize(r, &d)?;
    run_loop(g, iterations, info.constellation, |s| {
        mcnc_distortion(s, info, &d)
    })
}

pub fn cnc_receive(r: &[C64], info: &CncSideInfo<'_>, iterations: usize) -> Result<IterationTrace> {
    let g = equalize(r, info.denominator)?;
    run_loop(g, iterations, info.constellation, |s| {
        cnc_distortion(s, info)
    })
}
