//! Single-trial link simulation: one OFDM symbol from bits to decisions.

use mimo_cnc::analysis::{
    bit_errors, distortion_spectra, noise_power_for_ebn0, sdr_terms, SdrTerms,
};
use mimo_cnc::channel::{
    self, add_scaled_noise, corrupt_csi, propagate, unit_noise, ChannelRealization,
};
use mimo_cnc::frontend::{per_antenna_ibo, reference_power, AmplifierModel, BussgangCoefficients};
use mimo_cnc::link::{Transmitter, TxSignal};
use mimo_cnc::modem::{Constellation, OfdmModem};
use mimo_cnc::numerics::RngStream;
use mimo_cnc::precoding::{mrt, phase_only_matrix, PhaseOnlyPrecoder, PrecodingMatrix};
use mimo_cnc::receiver::{
    cnc_receive, mcnc_receive, standard_receive, CncSideInfo, ReceiverSideInfo,
};
use mimo_cnc::C64;

use crate::config::{ChannelKind, PrecoderKind, ReceiverChoice, ScenarioConfig};
use crate::error::SimError;

/// Coordinates shared by every trial of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkPoint {
    pub channel: ChannelKind,
    pub antennas: usize,
    pub ibo_db: f64,
    pub csi_epsilon: f64,
}

/// Everything drawn and computed on the transmit side for one trial.
pub struct TrialData {
    pub bits: Vec<u8>,
    pub symbols: Vec<C64>,
    pub channel: ChannelRealization,
    pub estimate: ChannelRealization,
    pub precoder: PrecodingMatrix,
    pub amplifier: AmplifierModel,
    pub coefficients: BussgangCoefficients,
    pub tx: TxSignal,
    /// Noiseless received spectrum through the clipping amplifiers.
    pub received: Vec<C64>,
    pub noise: Vec<C64>,
}

/// Error counts of one trial, indexed `[ebn0][receiver][iteration]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub errors: Vec<Vec<Vec<u64>>>,
    pub bits: u64,
    pub sdr: SdrTerms,
    pub alpha_sum: f64,
}

pub struct Simulator {
    pub scenario: ScenarioConfig,
    pub modem: OfdmModem,
    pub constellation: Constellation,
}

impl Simulator {
    pub fn new(scenario: ScenarioConfig) -> Result<Self, SimError> {
        scenario.validate()?;
        let modem = OfdmModem::new(scenario.ofdm_config())?;
        let constellation = Constellation::new(scenario.link.qam_order)?;
        Ok(Self {
            scenario,
            modem,
            constellation,
        })
    }

    fn symbol_power(&self) -> f64 {
        self.scenario.link.symbol_power
    }

    pub fn draw_channel(
        &self,
        point: &LinkPoint,
        rng: &mut RngStream,
    ) -> Result<ChannelRealization, SimError> {
        let cfg = self.modem.config();
        let geom = self.scenario.array(point.antennas);
        let place = self.scenario.placement();
        Ok(match point.channel {
            ChannelKind::Los => channel::los(&geom, &place, cfg, rng)?,
            ChannelKind::TwoPath => channel::two_path(&geom, &place, cfg, rng)?,
            ChannelKind::Rayleigh => channel::rayleigh(point.antennas, cfg.data_subcarriers, rng)?,
        })
    }

    pub fn precoder(&self, estimate: &ChannelRealization) -> Result<PrecodingMatrix, SimError> {
        Ok(match self.scenario.link.precoder {
            PrecoderKind::Mrt => mrt(estimate)?,
            PrecoderKind::PhaseOnly => {
                let p = PhaseOnlyPrecoder::matched_to(estimate, estimate.subcarriers() / 2);
                phase_only_matrix(&p, estimate.subcarriers())?
            }
        })
    }

    pub fn amplifier(&self, point: &LinkPoint) -> Result<AmplifierModel, SimError> {
        let p_ref = reference_power(self.modem.config(), point.antennas, self.symbol_power());
        Ok(if point.ibo_db == f64::INFINITY {
            AmplifierModel::linear(p_ref)
        } else {
            AmplifierModel::from_ibo(point.ibo_db, p_ref)?
        })
    }

    /// Draw one trial with a given channel (used when the channel is held
    /// fixed over many symbols).
    pub fn draw_symbols(
        &self,
        point: &LinkPoint,
        channel: ChannelRealization,
        estimate: ChannelRealization,
        rng: &mut RngStream,
    ) -> Result<TrialData, SimError> {
        let nbits = self.modem.config().data_subcarriers * self.constellation.bits_per_symbol();
        let bits: Vec<u8> = (0..nbits).map(|_| rng.bit()).collect();
        let symbols = self.constellation.map_bits(&bits)?;
        let precoder = self.precoder(&estimate)?;
        let amplifier = self.amplifier(point)?;
        let coefficients = per_antenna_ibo(
            &precoder,
            &amplifier,
            self.symbol_power(),
            self.modem.config(),
        );
        let tx = Transmitter::new(&self.modem, &precoder, amplifier).transmit(&symbols)?;
        let received = propagate(&tx.amplified, &channel, &self.modem)?;
        let noise = unit_noise(symbols.len(), rng);
        Ok(TrialData {
            bits,
            symbols,
            channel,
            estimate,
            precoder,
            amplifier,
            coefficients,
            tx,
            received,
            noise,
        })
    }

    pub fn draw_trial(
        &self,
        point: &LinkPoint,
        rng: &mut RngStream,
    ) -> Result<TrialData, SimError> {
        let channel = self.draw_channel(point, rng)?;
        let estimate = corrupt_csi(&channel, point.csi_epsilon, rng)?;
        self.draw_symbols(point, channel, estimate, rng)
    }

    /// Reference spectrum of the same symbols through linear amplifiers.
    pub fn linear_received(&self, t: &TrialData) -> Result<Vec<C64>, SimError> {
        Ok(propagate(&t.tx.clean, &t.channel, &self.modem)?)
    }

    pub fn sdr_terms(&self, t: &TrialData) -> Result<SdrTerms, SimError> {
        let d = distortion_spectra(&t.tx, &t.coefficients.alphas, &self.modem)?;
        Ok(sdr_terms(
            &t.channel,
            &t.precoder,
            &t.coefficients.alphas,
            &d,
            self.symbol_power(),
        )?)
    }

    /// Run every configured receiver at every Eb/N0 on one trial.
    pub fn run_trial(
        &self,
        point: &LinkPoint,
        point_index: u32,
        trial: u32,
    ) -> Result<TrialOutcome, SimError> {
        let mut rng = RngStream::for_trial(self.scenario.seed, point_index, trial);
        let t = self.draw_trial(point, &mut rng)?;
        let link = &self.scenario.link;
        let iters = self.scenario.max_iterations();
        let order = self.constellation.order();
        let ps = self.symbol_power();
        let alphas = &t.coefficients.alphas;

        let info = ReceiverSideInfo {
            channel: &t.estimate,
            precoder: &t.precoder,
            alphas,
            amplifier: t.amplifier,
            modem: &self.modem,
            constellation: &self.constellation,
        };
        let denominator = info.denominator()?;
        let cnc_info = CncSideInfo::new(
            &denominator,
            point.ibo_db,
            ps,
            &self.modem,
            &self.constellation,
        )?;

        let ones = vec![1.0; point.antennas];
        let needs_linear = link.receivers.contains(&ReceiverChoice::NoDist);
        let (linear_rx, linear_den) = if needs_linear {
            let den = t.estimate.gains().column_dot(t.precoder.grid(), None)?;
            (self.linear_received(&t)?, den)
        } else {
            (Vec::new(), Vec::new())
        };

        let mut errors = Vec::with_capacity(link.ebn0_db.len());
        for &ebn0 in &link.ebn0_db {
            let np = noise_power_for_ebn0(&t.channel, &t.precoder, alphas, ps, order, ebn0)?;
            let r = add_scaled_noise(&t.received, &t.noise, np);
            let mut per_rx = Vec::with_capacity(link.receivers.len());
            for rx in &link.receivers {
                let counts = match rx {
                    ReceiverChoice::Standard => {
                        let tr = standard_receive(&r, &denominator, &self.constellation)?;
                        vec![bit_errors(&t.bits, tr.final_bits())?]
                    }
                    ReceiverChoice::Cnc => {
                        count_all(&t.bits, &cnc_receive(&r, &cnc_info, iters)?.bits)?
                    }
                    ReceiverChoice::Mcnc => {
                        count_all(&t.bits, &mcnc_receive(&r, &info, iters)?.bits)?
                    }
                    ReceiverChoice::NoDist => {
                        let np =
                            noise_power_for_ebn0(&t.channel, &t.precoder, &ones, ps, order, ebn0)?;
                        let r = add_scaled_noise(&linear_rx, &t.noise, np);
                        let tr = standard_receive(&r, &linear_den, &self.constellation)?;
                        vec![bit_errors(&t.bits, tr.final_bits())?]
                    }
                };
                per_rx.push(counts);
            }
            errors.push(per_rx);
        }

        Ok(TrialOutcome {
            errors,
            bits: t.bits.len() as u64,
            sdr: self.sdr_terms(&t)?,
            alpha_sum: t.coefficients.mean_alpha(),
        })
    }
}

fn count_all(tx: &[u8], per_iteration: &[Vec<u8>]) -> Result<Vec<u64>, SimError> {
    per_iteration
        .iter()
        .map(|b| bit_errors(tx, b).map_err(SimError::from))
        .collect()
}
