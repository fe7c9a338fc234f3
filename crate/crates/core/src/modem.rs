//! Square QAM with per-axis Gray labels, OFDM (de)modulation and hard detection.
//!
//! Bit convention: a symbol carries `2b` bits, `b = log2(sqrt(M))`. The first
//! `b` bits (MSB first) label the in-phase axis, the last `b` the quadrature
//! axis. On each axis level index `j = 0` is the most positive amplitude and
//! the label is the binary-reflected Gray code of `j`, so `00` maps to
//! `(+1 + j)/sqrt(2)` for QPSK.
//!
//! Subcarrier convention: the data set is `{-N_U/2, .., -1, 1, .., N_U/2}`,
//! stored in that (ascending) order. Negative index `n` lives in FFT bin `N + n`.

use alloc::vec;
use alloc::vec::Vec;

use crate::numerics::{Direction, Fft};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: u32,
    bits_per_axis: u32,
    /// Amplitude of level index `j` on either axis.
    levels: Vec<f64>,
    /// Gray label -> level index.
    label_to_level: Vec<u32>,
}

impl Constellation {
    pub fn new(order: u32) -> Result<Self> {
        let bits_per_axis = match order {
            4 => 1,
            16 => 2,
            64 => 3,
            256 => 4,
            _ => return Err(Error::UnsupportedOrder(order)),
        };
        let side = 1u32 << bits_per_axis;
        let scale = libm::sqrt(2.0 * (order as f64 - 1.0) / 3.0);
        let levels = (0..side)
            .map(|j| (side as f64 - 1.0 - 2.0 * j as f64) / scale)
            .collect();
        let mut label_to_level = vec![0; side as usize];
        for j in 0..side {
            label_to_level[(j ^ (j >> 1)) as usize] = j;
        }
        Ok(Self {
            order,
            bits_per_axis,
            levels,
            label_to_level,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.bits_per_axis as usize
    }

    /// Levels per axis, `sqrt(M)`.
    pub fn side(&self) -> usize {
        self.levels.len()
    }

    /// Symbol carrying the `2b`-bit label.
    pub fn point(&self, label: u32) -> C64 {
        let b = self.bits_per_axis;
        let mask = (1 << b) - 1;
        let i = self.label_to_level[((label >> b) & mask) as usize];
        let q = self.label_to_level[(label & mask) as usize];
        C64::new(self.levels[i as usize], self.levels[q as usize])
    }

    pub fn points(&self) -> Vec<C64> {
        (0..self.order).map(|l| self.point(l)).collect()
    }

    /// Minimum distance between constellation points.
    pub fn min_distance(&self) -> f64 {
        self.levels[0] - self.levels[1]
    }

    /// Nearest level index on one axis; ties go to the larger amplitude.
    fn slice(&self, x: f64) -> u32 {
        let side = self.levels.len() as f64;
        let t = (side - 1.0 - x / self.min_distance() * 2.0) / 2.0;
        let j = libm::ceil(t - 0.5);
        j.clamp(0.0, side - 1.0) as u32
    }

    /// Label of the point nearest to `g`.
    pub fn detect_label(&self, g: C64) -> u32 {
        let i = self.slice(g.re);
        let q = self.slice(g.im);
        ((i ^ (i >> 1)) << self.bits_per_axis) | (q ^ (q >> 1))
    }

    pub fn detect(&self, g: C64) -> C64 {
        self.point(self.detect_label(g))
    }

    pub fn label_from_bits(&self, bits: &[u8]) -> u32 {
        bits.iter().fold(0, |acc, &b| (acc << 1) | (b & 1) as u32)
    }

    pub fn push_label_bits(&self, label: u32, out: &mut Vec<u8>) {
        let n = self.bits_per_symbol();
        out.extend((0..n).rev().map(|s| ((label >> s) & 1) as u8));
    }

    pub fn map_bits(&self, bits: &[u8]) -> Result<Vec<C64>> {
        let per = self.bits_per_symbol();
        if !bits.len().is_multiple_of(per) {
            return Err(Error::BitCount {
                bits: bits.len(),
                bits_per_symbol: per,
            });
        }
        Ok(bits
            .chunks_exact(per)
            .map(|c| self.point(self.label_from_bits(c)))
            .collect())
    }

    /// Hard decisions and their bits for a vector of observations.
    pub fn detect_all(&self, g: &[C64]) -> (Vec<C64>, Vec<u8>) {
        let mut symbols = Vec::with_capacity(g.len());
        let mut bits = Vec::with_capacity(g.len() * self.bits_per_symbol());
        for &x in g {
            let label = self.detect_label(x);
            symbols.push(self.point(label));
            self.push_label_bits(label, &mut bits);
        }
        (symbols, bits)
    }
}

pub fn map_bits(bits: &[u8], c: &Constellation) -> Result<Vec<C64>> {
    c.map_bits(bits)
}

pub fn hard_detect(g: C64, c: &Constellation) -> C64 {
    c.detect(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfdmConfig {
    pub fft_size: usize,
    pub data_subcarriers: usize,
    pub cp_len: usize,
    pub subcarrier_spacing_hz: f64,
    pub carrier_hz: f64,
}

impl OfdmConfig {
    /// Reduced-size grid used for quick runs: N = 256, N_U = 128.
    pub fn desk() -> Self {
        Self::with_sizes(256, 128)
    }

    /// N = 4096, N_U = 2048, 15 kHz spacing at 3.5 GHz.
    pub fn full_scale() -> Self {
        Self::with_sizes(4096, 2048)
    }

    /// Default cyclic prefix is N/16.
    pub fn with_sizes(fft_size: usize, data_subcarriers: usize) -> Self {
        Self {
            fft_size,
            data_subcarriers,
            cp_len: fft_size / 16,
            subcarrier_spacing_hz: 15e3,
            carrier_hz: 3.5e9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.fft_size;
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidOfdm("fft_size must be a power of two >= 4"));
        }
        let nu = self.data_subcarriers;
        if nu == 0 || !nu.is_multiple_of(2) {
            return Err(Error::InvalidOfdm(
                "data_subcarriers must be even and positive",
            ));
        }
        // |n| <= N/2 - 1 for every used index
        if nu / 2 > n / 2 - 1 {
            return Err(Error::InvalidOfdm(
                "data_subcarriers too large for fft_size",
            ));
        }
        if self.cp_len > n {
            return Err(Error::InvalidOfdm("cp_len exceeds fft_size"));
        }
        if !(self.subcarrier_spacing_hz > 0.0) || !(self.carrier_hz > 0.0) {
            return Err(Error::InvalidOfdm("frequencies must be positive"));
        }
        Ok(())
    }

    /// Signed subcarrier index of data position `i`.
    pub fn subcarrier(&self, i: usize) -> i64 {
        let half = (self.data_subcarriers / 2) as i64;
        let i = i as i64;
        if i < half {
            i - half
        } else {
            i - half + 1
        }
    }

    pub fn subcarriers(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.data_subcarriers).map(|i| self.subcarrier(i))
    }

    /// Data position of signed subcarrier `n`, if it carries data.
    pub fn position(&self, n: i64) -> Option<usize> {
        let half = (self.data_subcarriers / 2) as i64;
        match n {
            0 => None,
            n if n < -half || n > half => None,
            n if n < 0 => Some((n + half) as usize),
            n => Some((n + half - 1) as usize),
        }
    }

    pub fn bin(&self, n: i64) -> usize {
        n.rem_euclid(self.fft_size as i64) as usize
    }

    /// Absolute RF frequency of signed subcarrier `n`.
    pub fn frequency(&self, n: i64) -> f64 {
        self.carrier_hz + n as f64 * self.subcarrier_spacing_hz
    }

    pub fn frame_len(&self) -> usize {
        self.fft_size + self.cp_len
    }
}

/// One OFDM symbol in time, cyclic prefix first.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeFrame {
    pub samples: Vec<C64>,
    pub cp_len: usize,
}

impl TimeFrame {
    pub fn zeros(cfg: &OfdmConfig) -> Self {
        Self {
            samples: vec![C64::new(0.0, 0.0); cfg.frame_len()],
            cp_len: cfg.cp_len,
        }
    }

    /// Samples `t = 0..N-1`, i.e. without the prefix.
    pub fn body(&self) -> &[C64] {
        &self.samples[self.cp_len..]
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// OFDM modulator/demodulator bound to one configuration and FFT plan.
#[derive(Debug, Clone)]
pub struct OfdmModem {
    cfg: OfdmConfig,
    fft: Fft,
    bins: Vec<usize>,
}

impl OfdmModem {
    pub fn new(cfg: OfdmConfig) -> Result<Self> {
        cfg.validate()?;
        let fft = Fft::new(cfg.fft_size)?;
        let bins = cfg.subcarriers().map(|n| cfg.bin(n)).collect();
        Ok(Self { cfg, fft, bins })
    }

    pub fn config(&self) -> &OfdmConfig {
        &self.cfg
    }

    pub fn fft(&self) -> &Fft {
        &self.fft
    }

    /// FFT bin of each data position.
    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    /// Place a data row on the grid, inverse-transform and prepend the prefix.
    pub fn modulate(&self, row: &[C64]) -> Result<TimeFrame> {
        let mut frame = TimeFrame::zeros(&self.cfg);
        self.modulate_into(row, &mut frame)?;
        Ok(frame)
    }

    pub fn modulate_into(&self, row: &[C64], frame: &mut TimeFrame) -> Result<()> {
        let nu = self.cfg.data_subcarriers;
        if row.len() != nu {
            return Err(Error::LengthMismatch {
                expected: nu,
                actual: row.len(),
            });
        }
        let n = self.cfg.fft_size;
        let cp = self.cfg.cp_len;
        frame.cp_len = cp;
        frame.samples.clear();
        frame.samples.resize(n + cp, C64::new(0.0, 0.0));
        let body = &mut frame.samples[cp..];
        for (&b, &x) in self.bins.iter().zip(row) {
            body[b] = x;
        }
        self.fft.process(body, Direction::Inverse);
        let (head, body) = frame.samples.split_at_mut(cp);
        head.copy_from_slice(&body[n - cp..]);
        Ok(())
    }

    /// Modulate a sparse set of `(subcarrier, value)` pairs.
    pub fn modulate_tones(&self, tones: &[(i64, C64)]) -> Result<TimeFrame> {
        let mut row = vec![C64::new(0.0, 0.0); self.cfg.data_subcarriers];
        for &(n, x) in tones {
            let pos = self.cfg.position(n).ok_or(Error::InvalidSubcarrier(n))?;
            row[pos] += x;
        }
        self.modulate(&row)
    }

    /// Strip the prefix, forward-transform and pick the data positions.
    pub fn demodulate(&self, frame: &TimeFrame) -> Result<Vec<C64>> {
        let expected = self.cfg.frame_len();
        if frame.samples.len() != expected || frame.cp_len != self.cfg.cp_len {
            return Err(Error::LengthMismatch {
                expected,
                actual: frame.samples.len(),
            });
        }
        Ok(self.spectrum_of(frame.body()))
    }

    /// Data-position spectrum of `N` samples that carry no prefix.
    pub fn spectrum_of(&self, body: &[C64]) -> Vec<C64> {
        let mut buf = body.to_vec();
        self.fft.forward(&mut buf);
        self.bins.iter().map(|&b| buf[b]).collect()
    }
}

pub fn ofdm_modulate(row: &[C64], modem: &OfdmModem) -> Result<TimeFrame> {
    modem.modulate(row)
}

pub fn ofdm_demodulate(frame: &TimeFrame, modem: &OfdmModem) -> Result<Vec<C64>> {
    modem.demodulate(frame)
}
