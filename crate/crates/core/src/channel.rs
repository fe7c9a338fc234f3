//! Narrowband-per-subcarrier MISO channels, receiver noise and CSI errors.
//!
//! Geometry: the transmit array is a uniform linear array along the x axis,
//! centred on the origin at height `array.height_m`, broadside towards +y.
//! The receiver sits at horizontal distance `distance_m` and azimuth
//! `azimuth_deg` from broadside. Each element-receiver link is evaluated
//! with its exact 3-D length at the absolute frequency of every subcarrier.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::modem::{OfdmConfig, OfdmModem, TimeFrame};
use crate::numerics::{unit_gaussian, RngStream};
use crate::{Error, FrequencyGrid, Result, C64};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelModel {
    Los,
    TwoPath,
    Rayleigh,
}

impl ChannelModel {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelModel::Los => "los",
            ChannelModel::TwoPath => "two_path",
            ChannelModel::Rayleigh => "rayleigh",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub antennas: usize,
    pub spacing_m: f64,
    pub height_m: f64,
}

impl ArrayGeometry {
    /// Half-wavelength spacing at `carrier_hz`, 15 m mast.
    pub fn half_wavelength(antennas: usize, carrier_hz: f64) -> Self {
        Self {
            antennas,
            spacing_m: SPEED_OF_LIGHT / carrier_hz / 2.0,
            height_m: 15.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 {
            return Err(Error::Invalid("array needs at least one element"));
        }
        if !(self.spacing_m > 0.0) {
            return Err(Error::Invalid("element spacing must be positive"));
        }
        if !(self.height_m >= 0.0) {
            return Err(Error::Invalid("array height must be non-negative"));
        }
        Ok(())
    }

    pub fn element_position(&self, k: usize) -> [f64; 3] {
        let offset = (k as f64 - (self.antennas as f64 - 1.0) / 2.0) * self.spacing_m;
        [offset, 0.0, self.height_m]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverPlacement {
    pub distance_m: f64,
    pub azimuth_deg: f64,
    pub height_m: f64,
    /// Side of the square (horizontal plane) the receiver is drawn from,
    /// centred on the nominal position. Zero disables jitter.
    pub jitter_m: f64,
}

impl Default for ReceiverPlacement {
    fn default() -> Self {
        Self {
            distance_m: 300.0,
            azimuth_deg: 45.0,
            height_m: 1.5,
            jitter_m: 10.0,
        }
    }
}

impl ReceiverPlacement {
    pub fn fixed(distance_m: f64, azimuth_deg: f64, height_m: f64) -> Self {
        Self {
            distance_m,
            azimuth_deg,
            height_m,
            jitter_m: 0.0,
        }
    }

    pub fn nominal_position(&self) -> [f64; 3] {
        let az = self.azimuth_deg.to_radians();
        [
            self.distance_m * libm::sin(az),
            self.distance_m * libm::cos(az),
            self.height_m,
        ]
    }

    /// Nominal position, jittered uniformly over the square when enabled.
    pub fn draw(&self, rng: &mut RngStream) -> [f64; 3] {
        let mut p = self.nominal_position();
        if self.jitter_m > 0.0 {
            p[0] += (rng.uniform() - 0.5) * self.jitter_m;
            p[1] += (rng.uniform() - 0.5) * self.jitter_m;
        }
        p
    }

    fn validate(&self) -> Result<()> {
        if !(self.distance_m > 0.0) {
            return Err(Error::ZeroDistance);
        }
        if !(self.height_m >= 0.0) || !(self.jitter_m >= 0.0) {
            return Err(Error::Invalid(
                "receiver height and jitter must be non-negative",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    gains: FrequencyGrid,
    model: ChannelModel,
}

impl ChannelRealization {
    pub fn new(gains: FrequencyGrid, model: ChannelModel) -> Self {
        Self { gains, model }
    }

    pub fn gains(&self) -> &FrequencyGrid {
        &self.gains
    }

    pub fn model(&self) -> ChannelModel {
        self.model
    }

    pub fn antennas(&self) -> usize {
        self.gains.antennas()
    }

    pub fn subcarriers(&self) -> usize {
        self.gains.subcarriers()
    }
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    libm::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
}

/// Free-space gain of a path of length `d` at frequency `f`: amplitude
/// `c / (4 pi d f)`, phase `-2 pi d f / c`.
pub fn free_space(d: f64, f: f64) -> C64 {
    let amp = SPEED_OF_LIGHT / (4.0 * PI * d * f);
    // reduce the cycle count before forming the phase to keep precision at 3.5 GHz
    let cycles = d * f / SPEED_OF_LIGHT;
    let frac = cycles - libm::floor(cycles);
    C64::from_polar(amp, -2.0 * PI * frac)
}

fn ray_traced(
    geom: &ArrayGeometry,
    rx: [f64; 3],
    cfg: &OfdmConfig,
    reflection: f64,
    model: ChannelModel,
) -> Result<ChannelRealization> {
    let mut direct = Vec::with_capacity(geom.antennas);
    let mut image = Vec::with_capacity(geom.antennas);
    for k in 0..geom.antennas {
        let tx = geom.element_position(k);
        let d = distance(tx, rx);
        // ground reflection: mirror the element below z = 0
        let di = distance([tx[0], tx[1], -tx[2]], rx);
        if !(d > 0.0) || (reflection != 0.0 && !(di > 0.0)) {
            return Err(Error::ZeroDistance);
        }
        direct.push(d);
        image.push(di);
    }
    let freqs: Vec<f64> = cfg.subcarriers().map(|n| cfg.frequency(n)).collect();
    let gains = FrequencyGrid::from_fn(geom.antennas, freqs.len(), |k, n| {
        let h = free_space(direct[k], freqs[n]);
        if reflection == 0.0 {
            h
        } else {
            h + free_space(image[k], freqs[n]) * reflection
        }
    });
    Ok(ChannelRealization::new(gains, model))
}

/// Free-space line of sight. Draws the receiver position from `rng`.
pub fn los(
    geom: &ArrayGeometry,
    placement: &ReceiverPlacement,
    cfg: &OfdmConfig,
    rng: &mut RngStream,
) -> Result<ChannelRealization> {
    geom.validate()?;
    placement.validate()?;
    let rx = placement.draw(rng);
    ray_traced(geom, rx, cfg, 0.0, ChannelModel::Los)
}

/// Direct ray plus a ground reflection with coefficient -1 (image method).
pub fn two_path(
    geom: &ArrayGeometry,
    placement: &ReceiverPlacement,
    cfg: &OfdmConfig,
    rng: &mut RngStream,
) -> Result<ChannelRealization> {
    two_path_with_reflection(geom, placement, cfg, rng, -1.0)
}

pub fn two_path_with_reflection(
    geom: &ArrayGeometry,
    placement: &ReceiverPlacement,
    cfg: &OfdmConfig,
    rng: &mut RngStream,
    reflection: f64,
) -> Result<ChannelRealization> {
    geom.validate()?;
    placement.validate()?;
    let rx = placement.draw(rng);
    ray_traced(geom, rx, cfg, reflection, ChannelModel::TwoPath)
}

/// IID unit-variance complex Gaussian gains.
pub fn rayleigh(
    antennas: usize,
    subcarriers: usize,
    rng: &mut RngStream,
) -> Result<ChannelRealization> {
    if antennas == 0 || subcarriers == 0 {
        return Err(Error::Invalid("channel dimensions must be positive"));
    }
    let gains = FrequencyGrid::from_fn(antennas, subcarriers, |_, _| unit_gaussian(rng));
    Ok(ChannelRealization::new(gains, ChannelModel::Rayleigh))
}

/// Noiseless received spectrum: `r[n] = sum_k FFT{tx_k}[n] h[k][n]`.
pub fn propagate(tx: &[TimeFrame], h: &ChannelRealization, modem: &OfdmModem) -> Result<Vec<C64>> {
    if tx.len() != h.antennas() {
        return Err(Error::LengthMismatch {
            expected: h.antennas(),
            actual: tx.len(),
        });
    }
    let nu = modem.config().data_subcarriers;
    if h.subcarriers() != nu {
        return Err(Error::LengthMismatch {
            expected: nu,
            actual: h.subcarriers(),
        });
    }
    let mut r = alloc::vec![C64::new(0.0, 0.0); nu];
    for (k, frame) in tx.iter().enumerate() {
        let spec = modem.demodulate(frame)?;
        for ((acc, x), g) in r.iter_mut().zip(&spec).zip(h.gains().row(k)) {
            *acc += x * g;
        }
    }
    Ok(r)
}

/// `len` independent `CN(0, 1)` draws; scale by `sqrt(noise_power)` to use.
pub fn unit_noise(len: usize, rng: &mut RngStream) -> Vec<C64> {
    (0..len).map(|_| unit_gaussian(rng)).collect()
}

/// Adds `CN(0, noise_power)` to every data subcarrier.
pub fn add_awgn(r: &[C64], noise_power: f64, rng: &mut RngStream) -> Result<Vec<C64>> {
    if !(noise_power >= 0.0) {
        return Err(Error::NegativeVariance(noise_power));
    }
    if noise_power == 0.0 {
        return Ok(r.to_vec());
    }
    let s = libm::sqrt(noise_power);
    Ok(r.iter().map(|x| x + unit_gaussian(rng) * s).collect())
}

/// `r + sqrt(noise_power) w` for pre-drawn unit noise `w`.
pub fn add_scaled_noise(r: &[C64], unit: &[C64], noise_power: f64) -> Vec<C64> {
    if noise_power == 0.0 {
        return r.to_vec();
    }
    let s = libm::sqrt(noise_power);
    r.iter().zip(unit).map(|(x, w)| x + w * s).collect()
}

/// Imperfect channel knowledge: `sqrt(1 - e^2) h + e w`, with `w` complex
/// Gaussian at each antenna's mean channel power over the data subcarriers.
pub fn corrupt_csi(
    h: &ChannelRealization,
    epsilon: f64,
    rng: &mut RngStream,
) -> Result<ChannelRealization> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::CsiEpsilon(epsilon));
    }
    if epsilon == 0.0 {
        return Ok(h.clone());
    }
    let keep = libm::sqrt(1.0 - epsilon * epsilon);
    let g = h.gains();
    let mut out = FrequencyGrid::zeros(g.antennas(), g.subcarriers());
    for k in 0..g.antennas() {
        let row = g.row(k);
        let scale = libm::sqrt(row.iter().map(|x| x.norm_sqr()).sum::<f64>() / row.len() as f64);
        for (o, x) in out.row_mut(k).iter_mut().zip(row) {
            *o = x * keep + unit_gaussian(rng) * (epsilon * scale);
        }
    }
    Ok(ChannelRealization::new(out, h.model()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> OfdmConfig {
        OfdmConfig::with_sizes(64, 32)
    }

    #[test]
    fn one_wavelength_has_zero_phase() {
        let f = 3.5e9;
        let h = free_space(SPEED_OF_LIGHT / f, f);
        assert!(h.arg().abs() < 1e-9);
        let h2 = free_space(2.0 * SPEED_OF_LIGHT / f, f);
        assert!((h.norm() / h2.norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_distance_halves_amplitude() {
        let geom = ArrayGeometry::half_wavelength(4, 3.5e9);
        let mut rng = RngStream::new(0, 0);
        let a = los(
            &geom,
            &ReceiverPlacement::fixed(300.0, 45.0, 1.5),
            &cfg(),
            &mut rng,
        )
        .unwrap();
        let b = los(
            &geom,
            &ReceiverPlacement::fixed(600.0, 45.0, 1.5),
            &cfg(),
            &mut rng,
        )
        .unwrap();
        for k in 0..4 {
            for n in 0..32 {
                let ratio = a.gains().get(k, n).norm() / b.gains().get(k, n).norm();
                // heights make the paths slightly less than a factor of two apart
                assert!((ratio - 2.0).abs() < 2e-3, "{ratio}");
                assert!(ratio > 1.0);
            }
        }
    }

    #[test]
    fn zero_distance_rejected() {
        let mut geom = ArrayGeometry::half_wavelength(1, 3.5e9);
        geom.height_m = 1.5;
        let mut rng = RngStream::new(0, 0);
        assert_eq!(
            los(
                &geom,
                &ReceiverPlacement::fixed(0.0, 0.0, 1.5),
                &cfg(),
                &mut rng
            )
            .unwrap_err(),
            Error::ZeroDistance
        );
        let tiny = ReceiverPlacement::fixed(1e-300, 0.0, 1.5);
        assert_eq!(
            los(&geom, &tiny, &cfg(), &mut rng).unwrap_err(),
            Error::ZeroDistance
        );
    }

    #[test]
    fn reflection_zero_is_los() {
        let geom = ArrayGeometry::half_wavelength(8, 3.5e9);
        let place = ReceiverPlacement::default();
        let a = los(&geom, &place, &cfg(), &mut RngStream::new(3, 3)).unwrap();
        let b = two_path_with_reflection(&geom, &place, &cfg(), &mut RngStream::new(3, 3), 0.0)
            .unwrap();
        assert_eq!(a.gains(), b.gains());
    }

    #[test]
    fn grounded_receiver_cancels() {
        let geom = ArrayGeometry::half_wavelength(2, 3.5e9);
        let h = two_path(
            &geom,
            &ReceiverPlacement::fixed(300.0, 45.0, 0.0),
            &cfg(),
            &mut RngStream::new(0, 0),
        )
        .unwrap();
        assert!(h.gains().as_slice().iter().all(|x| x.norm() < 1e-15));
        let h = two_path(
            &geom,
            &ReceiverPlacement::fixed(300.0, 45.0, 1e-6),
            &cfg(),
            &mut RngStream::new(0, 0),
        )
        .unwrap();
        let l = los(
            &geom,
            &ReceiverPlacement::fixed(300.0, 45.0, 1e-6),
            &cfg(),
            &mut RngStream::new(0, 0),
        )
        .unwrap();
        assert!(h.gains().get(0, 0).norm() < 1e-3 * l.gains().get(0, 0).norm());
    }

    #[test]
    fn rayleigh_power_and_determinism() {
        let a = rayleigh(100, 10_000, &mut RngStream::new(9, 1)).unwrap();
        let p = a
            .gains()
            .as_slice()
            .iter()
            .map(|x| x.norm_sqr())
            .sum::<f64>()
            / 1e6;
        assert!((0.995..=1.005).contains(&p), "{p}");
        let b = rayleigh(100, 10_000, &mut RngStream::new(9, 1)).unwrap();
        assert_eq!(a, b);
        assert!(rayleigh(0, 1, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn awgn_zero_is_identity() {
        let r = [C64::new(1.0, 2.0), C64::new(-3.0, 0.5)];
        assert_eq!(add_awgn(&r, 0.0, &mut RngStream::new(0, 0)).unwrap(), r);
        assert!(add_awgn(&r, -1.0, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn csi_endpoints() {
        let h = rayleigh(4, 16, &mut RngStream::new(1, 1)).unwrap();
        assert_eq!(corrupt_csi(&h, 0.0, &mut RngStream::new(2, 2)).unwrap(), h);
        assert_eq!(
            corrupt_csi(&h, 1.5, &mut RngStream::new(2, 2)).unwrap_err(),
            Error::CsiEpsilon(1.5)
        );
        assert!(corrupt_csi(&h, -0.1, &mut RngStream::new(2, 2)).is_err());
    }
}
