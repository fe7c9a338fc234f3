use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result, C64};

/// Antenna-by-subcarrier array of complex values, one row per antenna.
///
/// Used for precoded symbols, precoding coefficients, channel responses and
/// per-antenna distortion spectra alike.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    antennas: usize,
    subcarriers: usize,
    data: Vec<C64>,
}

impl FrequencyGrid {
    pub fn zeros(antennas: usize, subcarriers: usize) -> Self {
        Self {
            antennas,
            subcarriers,
            data: vec![C64::new(0.0, 0.0); antennas * subcarriers],
        }
    }

    pub fn from_fn(
        antennas: usize,
        subcarriers: usize,
        mut f: impl FnMut(usize, usize) -> C64,
    ) -> Self {
        let mut data = Vec::with_capacity(antennas * subcarriers);
        for k in 0..antennas {
            for n in 0..subcarriers {
                data.push(f(k, n));
            }
        }
        Self {
            antennas,
            subcarriers,
            data,
        }
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let subcarriers = rows.first().map_or(0, Vec::len);
        let antennas = rows.len();
        let mut data = Vec::with_capacity(antennas * subcarriers);
        for row in rows {
            if row.len() != subcarriers {
                return Err(Error::LengthMismatch {
                    expected: subcarriers,
                    actual: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self {
            antennas,
            subcarriers,
            data,
        })
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn get(&self, k: usize, n: usize) -> C64 {
        self.data[k * self.subcarriers + n]
    }

    pub fn set(&mut self, k: usize, n: usize, v: C64) {
        self.data[k * self.subcarriers + n] = v;
    }

    pub fn row(&self, k: usize) -> &[C64] {
        &self.data[k * self.subcarriers..(k + 1) * self.subcarriers]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [C64] {
        &mut self.data[k * self.subcarriers..(k + 1) * self.subcarriers]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[C64]> {
        self.data
            .chunks_exact(self.subcarriers.max(1))
            .take(self.antennas)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.antennas != other.antennas {
            return Err(Error::LengthMismatch {
                expected: self.antennas,
                actual: other.antennas,
            });
        }
        if self.subcarriers != other.subcarriers {
            return Err(Error::LengthMismatch {
                expected: self.subcarriers,
                actual: other.subcarriers,
            });
        }
        Ok(())
    }

    /// `sum_k self[k][n] * other[k][n]` for every subcarrier, optionally
    /// weighted per antenna.
    pub fn column_dot(&self, other: &Self, weights: Option<&[f64]>) -> Result<Vec<C64>> {
        self.same_shape(other)?;
        let mut out = vec![C64::new(0.0, 0.0); self.subcarriers];
        for k in 0..self.antennas {
            let w = weights.map_or(1.0, |w| w[k]);
            for ((o, a), b) in out.iter_mut().zip(self.row(k)).zip(other.row(k)) {
                *o += a * b * w;
            }
        }
        Ok(out)
    }
}
