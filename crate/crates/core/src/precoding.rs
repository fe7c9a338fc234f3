//! Per-subcarrier precoders normalized to unit total transmit gain.

use alloc::vec::Vec;

use crate::channel::ChannelRealization;
use crate::{Error, FrequencyGrid, Result, C64};

/// `K x N_U` coefficients with `sum_k |v[k][n]|^2 = 1` on every subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecodingMatrix {
    coeffs: FrequencyGrid,
}

impl PrecodingMatrix {
    /// Normalizes each subcarrier column of `raw` to unit power.
    pub fn normalized(mut raw: FrequencyGrid) -> Result<Self> {
        for n in 0..raw.subcarriers() {
            let p: f64 = (0..raw.antennas()).map(|k| raw.get(k, n).norm_sqr()).sum();
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::SingularChannel { subcarrier: n });
            }
            let s = 1.0 / libm::sqrt(p);
            for k in 0..raw.antennas() {
                raw.set(k, n, raw.get(k, n) * s);
            }
        }
        Ok(Self { coeffs: raw })
    }

    pub fn antennas(&self) -> usize {
        self.coeffs.antennas()
    }

    pub fn subcarriers(&self) -> usize {
        self.coeffs.subcarriers()
    }

    pub fn get(&self, k: usize, n: usize) -> C64 {
        self.coeffs.get(k, n)
    }

    pub fn row(&self, k: usize) -> &[C64] {
        self.coeffs.row(k)
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.coeffs
    }

    /// `sum_n |v[k][n]|^2` for every antenna.
    pub fn row_powers(&self) -> Vec<f64> {
        self.coeffs
            .rows()
            .map(|r| r.iter().map(|v| v.norm_sqr()).sum())
            .collect()
    }

    /// Scale one antenna row by `gain`. Breaks the unit-power normalization,
    /// which is only useful for probing per-antenna power bookkeeping.
    pub fn scale_row_unnormalized(&mut self, k: usize, gain: f64) {
        for v in self.coeffs.row_mut(k) {
            *v *= gain;
        }
    }
}

/// Maximum ratio transmission: `v = h* / ||h_n||`.
pub fn mrt(h: &ChannelRealization) -> Result<PrecodingMatrix> {
    let g = h.gains();
    let raw = FrequencyGrid::from_fn(g.antennas(), g.subcarriers(), |k, n| g.get(k, n).conj());
    PrecodingMatrix::normalized(raw)
}

/// Equal-magnitude precoder with one phase per antenna, constant over frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOnlyPrecoder {
    pub phases: Vec<f64>,
}

impl PhaseOnlyPrecoder {
    pub fn new(phases: Vec<f64>) -> Self {
        Self { phases }
    }

    /// Phases that co-phase the channel on data position `reference`.
    pub fn matched_to(h: &ChannelRealization, reference: usize) -> Self {
        let g = h.gains();
        Self {
            phases: (0..g.antennas())
                .map(|k| -g.get(k, reference).arg())
                .collect(),
        }
    }

    pub fn antennas(&self) -> usize {
        self.phases.len()
    }
}

/// `v[k][n] = exp(j phi_k) / sqrt(K)` for all `n`.
pub fn phase_only_matrix(p: &PhaseOnlyPrecoder, subcarriers: usize) -> Result<PrecodingMatrix> {
    let k = p.antennas();
    if k == 0 {
        return Err(Error::Invalid(
            "phase-only precoder needs at least one antenna",
        ));
    }
    let amp = 1.0 / libm::sqrt(k as f64);
    let coeffs = FrequencyGrid::from_fn(k, subcarriers, |a, _| C64::from_polar(amp, p.phases[a]));
    Ok(PrecodingMatrix { coeffs })
}

/// `x[k][n] = s[n] v[k][n]`.
pub fn apply(symbols: &[C64], v: &PrecodingMatrix) -> Result<FrequencyGrid> {
    if symbols.len() != v.subcarriers() {
        return Err(Error::LengthMismatch {
            expected: v.subcarriers(),
            actual: symbols.len(),
        });
    }
    Ok(FrequencyGrid::from_fn(
        v.antennas(),
        v.subcarriers(),
        |k, n| symbols[n] * v.get(k, n),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{rayleigh, ChannelModel};
    use crate::numerics::{unit_gaussian, RngStream};
    use std::vec;

    fn column_power(v: &PrecodingMatrix, n: usize) -> f64 {
        (0..v.antennas()).map(|k| v.get(k, n).norm_sqr()).sum()
    }

    #[test]
    fn scalar_mrt_removes_phase() {
        let h = ChannelRealization::new(
            FrequencyGrid::from_rows(vec![vec![
                C64::from_polar(0.3, 1.1),
                C64::from_polar(2.0, -0.4),
            ]])
            .unwrap(),
            ChannelModel::Rayleigh,
        );
        let v = mrt(&h).unwrap();
        for n in 0..2 {
            assert!((v.get(0, n).norm() - 1.0).abs() < 1e-15);
            let expect = -h.gains().get(0, n).arg();
            assert!((v.get(0, n).arg() - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn two_antenna_mrt_by_hand() {
        let h = ChannelRealization::new(
            FrequencyGrid::from_rows(vec![vec![C64::new(1.0, 0.0)], vec![C64::new(0.0, 1.0)]])
                .unwrap(),
            ChannelModel::Rayleigh,
        );
        let v = mrt(&h).unwrap();
        let r = core::f64::consts::FRAC_1_SQRT_2;
        assert!((v.get(0, 0) - C64::new(r, 0.0)).norm() < 1e-15);
        assert!((v.get(1, 0) - C64::new(0.0, -r)).norm() < 1e-15);
    }

    #[test]
    fn mrt_coherent_gain_is_real_norm() {
        let mut rng = RngStream::new(5, 1);
        let h = rayleigh(8, 32, &mut rng).unwrap();
        let v = mrt(&h).unwrap();
        for n in 0..32 {
            let gain: C64 = (0..8).map(|k| v.get(k, n) * h.gains().get(k, n)).sum();
            let norm = (0..8)
                .map(|k| h.gains().get(k, n).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!((gain - C64::new(norm, 0.0)).norm() < 1e-12 * norm);
            assert!((column_power(&v, n) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_column_is_singular() {
        let h = ChannelRealization::new(
            FrequencyGrid::from_rows(vec![vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]]).unwrap(),
            ChannelModel::Rayleigh,
        );
        assert_eq!(
            mrt(&h).unwrap_err(),
            Error::SingularChannel { subcarrier: 1 }
        );
    }

    #[test]
    fn phase_only_magnitudes() {
        let v = phase_only_matrix(&PhaseOnlyPrecoder::new(vec![0.0]), 4).unwrap();
        assert!(v.grid().as_slice().iter().all(|x| *x == C64::new(1.0, 0.0)));
        let v = phase_only_matrix(&PhaseOnlyPrecoder::new(vec![0.1, 2.0, -1.0, 3.0]), 8).unwrap();
        for n in 0..8 {
            for k in 0..4 {
                assert!((v.get(k, n).norm_sqr() - 0.25).abs() < 1e-15);
            }
            assert!((column_power(&v, n) - 1.0).abs() < 1e-12);
        }
        assert!(phase_only_matrix(&PhaseOnlyPrecoder::new(vec![]), 4).is_err());
    }

    #[test]
    fn apply_preserves_symbol_power() {
        let v = phase_only_matrix(&PhaseOnlyPrecoder::new(vec![0.0, 0.0]), 1).unwrap();
        let x = apply(&[C64::new(1.0, 0.0)], &v).unwrap();
        let r = core::f64::consts::FRAC_1_SQRT_2;
        assert!((x.get(0, 0).re - r).abs() < 1e-15 && (x.get(1, 0).re - r).abs() < 1e-15);

        let mut rng = RngStream::new(8, 8);
        let h = rayleigh(6, 16, &mut rng).unwrap();
        let v = mrt(&h).unwrap();
        let zero = apply(&vec![C64::new(0.0, 0.0); 16], &v).unwrap();
        assert!(zero.as_slice().iter().all(|x| x.norm() == 0.0));
        let s: Vec<C64> = (0..16).map(|_| unit_gaussian(&mut rng)).collect();
        let x = apply(&s, &v).unwrap();
        for (n, sn) in s.iter().enumerate() {
            let p: f64 = (0..6).map(|k| x.get(k, n).norm_sqr()).sum();
            assert!((p - sn.norm_sqr()).abs() < 1e-12 * sn.norm_sqr().max(1.0));
        }
        assert!(apply(&s[..15], &v).is_err());
    }
}
