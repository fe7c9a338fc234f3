//! Complex-vector primitives shared by the rest of the crate.
//!
//! Both transform directions carry a `1/sqrt(N)` factor, so the pair is
//! unitary and power is preserved exactly between time and frequency.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Time to frequency, kernel `exp(-j 2 pi n t / N)`.
    Forward,
    /// Frequency to time, kernel `exp(+j 2 pi n t / N)`.
    Inverse,
}

/// Precomputed radix-2 decimation-in-time plan for one power-of-two size.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    scale: f64,
    /// `exp(-j 2 pi m / N)` for `m < N/2`.
    twiddles: Vec<C64>,
    bitrev: Vec<u32>,
}

impl Fft {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { len });
        }
        let bits = len.trailing_zeros();
        let bitrev = (0..len as u32)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (32 - bits)
                }
            })
            .collect();
        let twiddles = (0..len / 2)
            .map(|m| {
                let phase = -2.0 * PI * m as f64 / len as f64;
                C64::new(libm::cos(phase), libm::sin(phase))
            })
            .collect();
        Ok(Self {
            len,
            scale: 1.0 / libm::sqrt(len as f64),
            twiddles,
            bitrev,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unitary transform of `buf` in place. Panics if `buf.len() != self.len()`.
    pub fn process(&self, buf: &mut [C64], direction: Direction) {
        assert_eq!(buf.len(), self.len, "buffer does not match FFT plan");
        let n = self.len;
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let conj = direction == Direction::Inverse;
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for m in 0..half {
                    let w = self.twiddles[m * stride];
                    let w = if conj { w.conj() } else { w };
                    let a = buf[start + m];
                    let b = buf[start + m + half] * w;
                    buf[start + m] = a + b;
                    buf[start + m + half] = a - b;
                }
            }
            half *= 2;
        }
        for v in buf.iter_mut() {
            *v *= self.scale;
        }
    }

    pub fn forward(&self, buf: &mut [C64]) {
        self.process(buf, Direction::Forward);
    }

    pub fn inverse(&self, buf: &mut [C64]) {
        self.process(buf, Direction::Inverse);
    }
}

/// One-shot unitary DFT. Builds a plan per call; hot loops should hold an [`Fft`].
pub fn dft(v: &[C64], direction: Direction) -> Result<Vec<C64>> {
    let plan = Fft::new(v.len())?;
    let mut out = v.to_vec();
    plan.process(&mut out, direction);
    Ok(out)
}

/// Reproducible random stream identified by `(seed, stream)`.
///
/// Backed by ChaCha20, whose 64-bit stream selector gives every
/// `(scenario, trial)` pair its own independent sequence without any
/// coordination between workers.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    /// Stream for trial `trial` of sweep point `point`.
    pub fn for_trial(seed: u64, point: u32, trial: u32) -> Self {
        Self::new(seed, ((point as u64) << 32) | trial as u64)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bit(&mut self) -> u8 {
        (self.inner.next_u32() & 1) as u8
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Circularly-symmetric complex Gaussian sample with `E|x|^2 = variance`.
pub fn gaussian_pair(rng: &mut RngStream, variance: f64) -> Result<C64> {
    if !(variance >= 0.0) {
        return Err(Error::NegativeVariance(variance));
    }
    Ok(unit_gaussian(rng) * libm::sqrt(variance))
}

/// `CN(0, 1)` sample.
pub fn unit_gaussian(rng: &mut RngStream) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

pub fn energy(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

pub fn mean_power(v: &[C64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        energy(v) / v.len() as f64
    }
}

pub fn db(linear: f64) -> f64 {
    10.0 * libm::log10(linear)
}

pub fn from_db(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}
