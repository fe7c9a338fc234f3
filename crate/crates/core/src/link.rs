//! Precoder -> OFDM modulator -> amplifier -> channel, as one reusable chain.
//!
//! The simulator uses it to produce what goes over the air and the MCNC
//! receiver uses the very same code to regenerate it from decisions.

use alloc::vec::Vec;

use crate::channel::ChannelRealization;
use crate::frontend::AmplifierModel;
use crate::modem::{OfdmModem, TimeFrame};
use crate::precoding::PrecodingMatrix;
use crate::{Error, Result, C64};

/// Per-antenna time frames before and after the amplifiers.
#[derive(Debug, Clone)]
pub struct TxSignal {
    pub clean: Vec<TimeFrame>,
    pub amplified: Vec<TimeFrame>,
}

#[derive(Debug, Clone, Copy)]
pub struct Transmitter<'a> {
    pub modem: &'a OfdmModem,
    pub precoder: &'a PrecodingMatrix,
    pub amplifier: AmplifierModel,
}

impl<'a> Transmitter<'a> {
    pub fn new(
        modem: &'a OfdmModem,
        precoder: &'a PrecodingMatrix,
        amplifier: AmplifierModel,
    ) -> Self {
        Self {
            modem,
            precoder,
            amplifier,
        }
    }

    fn check(&self, symbols: &[C64]) -> Result<()> {
        let nu = self.modem.config().data_subcarriers;
        if symbols.len() != nu {
            return Err(Error::LengthMismatch {
                expected: nu,
                actual: symbols.len(),
            });
        }
        if self.precoder.subcarriers() != nu {
            return Err(Error::LengthMismatch {
                expected: nu,
                actual: self.precoder.subcarriers(),
            });
        }
        Ok(())
    }

    fn precode_row(&self, symbols: &[C64], k: usize, row: &mut Vec<C64>) {
        row.clear();
        row.extend(symbols.iter().zip(self.precoder.row(k)).map(|(s, v)| s * v));
    }

    pub fn transmit(&self, symbols: &[C64]) -> Result<TxSignal> {
        self.check(symbols)?;
        let k = self.precoder.antennas();
        let mut clean = Vec::with_capacity(k);
        let mut amplified = Vec::with_capacity(k);
        let mut row = Vec::with_capacity(symbols.len());
        for a in 0..k {
            self.precode_row(symbols, a, &mut row);
            let frame = self.modem.modulate(&row)?;
            let mut out = frame.clone();
            self.amplifier.clip_in_place(&mut out.samples);
            clean.push(frame);
            amplified.push(out);
        }
        Ok(TxSignal { clean, amplified })
    }

    /// Noiseless received spectrum for `symbols` sent through `h`.
    pub fn received(&self, symbols: &[C64], h: &ChannelRealization) -> Result<Vec<C64>> {
        self.check(symbols)?;
        if h.antennas() != self.precoder.antennas() || h.subcarriers() != symbols.len() {
            return Err(Error::LengthMismatch {
                expected: self.precoder.antennas(),
                actual: h.antennas(),
            });
        }
        let mut r = alloc::vec![C64::new(0.0, 0.0); symbols.len()];
        let mut row = Vec::with_capacity(symbols.len());
        let mut frame = TimeFrame::zeros(self.modem.config());
        for a in 0..self.precoder.antennas() {
            self.precode_row(symbols, a, &mut row);
            self.modem.modulate_into(&row, &mut frame)?;
            self.amplifier.clip_in_place(&mut frame.samples);
            let spec = self.modem.demodulate(&frame)?;
            for ((acc, x), g) in r.iter_mut().zip(&spec).zip(h.gains().row(a)) {
                *acc += x * g;
            }
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{propagate, rayleigh};
    use crate::frontend::reference_power;
    use crate::modem::{Constellation, OfdmConfig};
    use crate::numerics::RngStream;
    use crate::precoding::mrt;

    #[test]
    fn streaming_receive_matches_propagate() {
        let cfg = OfdmConfig::with_sizes(64, 32);
        let modem = OfdmModem::new(cfg.clone()).unwrap();
        let mut rng = RngStream::new(1, 1);
        let h = rayleigh(4, 32, &mut rng).unwrap();
        let v = mrt(&h).unwrap();
        let c = Constellation::new(16).unwrap();
        let bits: Vec<u8> = (0..32 * 4).map(|_| rng.bit()).collect();
        let s = c.map_bits(&bits).unwrap();
        let amp = AmplifierModel::from_ibo(0.0, reference_power(&cfg, 4, 1.0)).unwrap();
        let tx = Transmitter::new(&modem, &v, amp);
        let sig = tx.transmit(&s).unwrap();
        let a = propagate(&sig.amplified, &h, &modem).unwrap();
        let b = tx.received(&s, &h).unwrap();
        assert_eq!(a, b);
        assert!(tx.received(&s[..31], &h).is_err());
    }
}
