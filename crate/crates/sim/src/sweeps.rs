//! Sweep runners. Each returns the CSV rows for one subcommand.
//!
//! Trials of a sweep point run in parallel on the current rayon pool and are
//! reduced in trial order, so output does not depend on the thread count.

use std::time::Instant;

use mimo_cnc::analysis::{complexity, ComplexityParams, OperationCount, SdrTerms};
use mimo_cnc::frontend::{alpha_analytic, AlphaEstimator};
use mimo_cnc::numerics::RngStream;
use mimo_cnc::receiver::ReceiverKind;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::engine::{LinkPoint, Simulator, TrialOutcome};
use crate::error::SimError;
use crate::record::SweepRecord;

/// Grid points in a fixed order: channel, then K, then IBO, then CSI error.
pub fn link_points(c: &ScenarioConfig) -> Vec<LinkPoint> {
    let l = &c.link;
    let mut out = Vec::new();
    for &channel in &l.channels {
        for &antennas in &l.antennas {
            for &ibo_db in &l.ibo_db {
                for &csi_epsilon in &l.csi_epsilon {
                    out.push(LinkPoint {
                        channel,
                        antennas,
                        ibo_db,
                        csi_epsilon,
                    });
                }
            }
        }
    }
    out
}

fn base_record(sim: &Simulator, sweep: &'static str, index: u32, p: &LinkPoint) -> SweepRecord {
    let c = &sim.scenario;
    SweepRecord {
        sweep,
        point: index,
        fft_size: c.ofdm.fft_size,
        data_subcarriers: c.ofdm.data_subcarriers,
        qam_order: c.link.qam_order,
        precoder: c.link.precoder.name(),
        csi_epsilon: p.csi_epsilon,
        symbols: c.symbols_per_point,
        seed: c.seed,
        ibo_db: p.ibo_db,
        k: p.antennas,
        channel: p.channel.name(),
        ..Default::default()
    }
}

fn run_trials<T: Send>(
    n: usize,
    f: impl Fn(u32) -> Result<T, SimError> + Sync + Send,
) -> Result<Vec<T>, SimError> {
    (0..n as u32).into_par_iter().map(f).collect()
}

/// Accumulated error counts for one sweep point.
struct PointTotals {
    errors: Vec<Vec<Vec<u64>>>,
    bits: u64,
    sdr: SdrTerms,
    alpha_sum: f64,
    trials: usize,
}

fn accumulate(outcomes: Vec<TrialOutcome>) -> PointTotals {
    let mut it = outcomes.into_iter();
    let first = it.next().expect("at least one trial");
    let mut t = PointTotals {
        errors: first.errors,
        bits: first.bits,
        sdr: first.sdr,
        alpha_sum: first.alpha_sum,
        trials: 1,
    };
    for o in it {
        for (acc, e) in t.errors.iter_mut().flatten().zip(o.errors.iter().flatten()) {
            for (a, b) in acc.iter_mut().zip(e) {
                *a += b;
            }
        }
        t.bits += o.bits;
        t.sdr.add(o.sdr);
        t.alpha_sum += o.alpha_sum;
        t.trials += 1;
    }
    t
}

/// Shared body of the BER-type sweeps. `iterations` lists the iteration
/// counts to report for the iterative receivers.
fn ber_records(
    sim: &Simulator,
    sweep: &'static str,
    iterations: &[usize],
) -> Result<Vec<SweepRecord>, SimError> {
    let c = &sim.scenario;
    let mut out = Vec::new();
    for (index, p) in link_points(c).iter().enumerate() {
        let index = index as u32;
        let start = Instant::now();
        let outcomes = run_trials(c.symbols_per_point, |t| sim.run_trial(p, index, t))?;
        let totals = accumulate(outcomes);
        let wall = start.elapsed().as_secs_f64();
        let sdr_db = totals.sdr.db();
        let alpha_mean = totals.alpha_sum / totals.trials as f64;
        for (e, &ebn0) in c.link.ebn0_db.iter().enumerate() {
            for (r, &rx) in c.link.receivers.iter().enumerate() {
                let counts = &totals.errors[e][r];
                let iters: &[usize] = if rx.iterative() { iterations } else { &[0] };
                for &i in iters {
                    let errors = counts[i];
                    out.push(SweepRecord {
                        receiver: Some(rx.name()),
                        iterations: Some(i),
                        ebn0_db: Some(ebn0),
                        ber: Some(errors as f64 / totals.bits as f64),
                        bit_errors: Some(errors),
                        total_bits: Some(totals.bits),
                        sdr_db: Some(sdr_db),
                        alpha_mean: Some(alpha_mean),
                        wall_time_s: wall,
                        ..base_record(sim, sweep, index, p)
                    });
                }
            }
        }
    }
    Ok(out)
}

fn sorted_unique(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

/// BER against Eb/N0 for every receiver at the configured iteration counts.
pub fn run_ber_sweep(c: &ScenarioConfig) -> Result<Vec<SweepRecord>, SimError> {
    let sim = Simulator::new(c.clone())?;
    ber_records(&sim, "ber", &sorted_unique(c.link.iterations.clone()))
}

/// Like [`run_ber_sweep`] but always reports iteration 0, the BER-in.
pub fn run_berin_berout(c: &ScenarioConfig) -> Result<Vec<SweepRecord>, SimError> {
    let sim = Simulator::new(c.clone())?;
    let mut iters = c.link.iterations.clone();
    iters.push(0);
    ber_records(&sim, "berin_berout", &sorted_unique(iters))
}

/// BER after every iteration from 0 to the largest configured count.
pub fn run_convergence(c: &ScenarioConfig) -> Result<Vec<SweepRecord>, SimError> {
    let sim = Simulator::new(c.clone())?;
    let iters: Vec<usize> = (0..=c.max_iterations()).collect();
    ber_records(&sim, "convergence", &iters)
}

/// Received SDR for every grid point. No receivers are run.
pub fn run_sdr_sweep(c: &ScenarioConfig) -> Result<Vec<SweepRecord>, SimError> {
    let sim = Simulator::new(c.clone())?;
    let mut out = Vec::new();
    for (index, p) in link_points(c).iter().enumerate() {
        let index = index as u32;
        let start = Instant::now();
        let per_trial = run_trials(c.symbols_per_point, |t| {
            let mut rng = RngStream::for_trial(c.seed, index, t);
            let trial = sim.draw_trial(p, &mut rng)?;
            Ok((sim.sdr_terms(&trial)?, trial.coefficients.mean_alpha()))
        })?;
        let mut sdr = SdrTerms::default();
        let mut alpha_sum = 0.0;
        for (s, a) in &per_trial {
            sdr.add(*s);
            alpha_sum += a;
        }
        out.push(SweepRecord {
            sdr_db: Some(sdr.db()),
            alpha_mean: Some(alpha_sum / per_trial.len() as f64),
            wall_time_s: start.elapsed().as_secs_f64(),
            ..base_record(&sim, "sdr", index, p)
        });
    }
    Ok(out)
}

/// Per-antenna back-off and Bussgang gain, empirical against analytic. The
/// channel is drawn once per point and held while `symbols_per_point`
/// symbols are sent through it.
pub fn run_alpha_check(c: &ScenarioConfig) -> Result<Vec<SweepRecord>, SimError> {
    let sim = Simulator::new(c.clone())?;
    let mut out = Vec::new();
    for (index, p) in link_points(c).iter().enumerate() {
        let index = index as u32;
        let start = Instant::now();
        let mut rng = RngStream::new(c.seed, u64::from(index) << 32 | 0xffff_ffff);
        let channel = sim.draw_channel(p, &mut rng)?;
        let estimate = mimo_cnc::channel::corrupt_csi(&channel, p.csi_epsilon, &mut rng)?;

        let per_trial = run_trials(c.symbols_per_point, |t| {
            let mut rng = RngStream::for_trial(c.seed, index, t);
            let trial = sim.draw_symbols(p, channel.clone(), estimate.clone(), &mut rng)?;
            let mut est = vec![AlphaEstimator::default(); p.antennas];
            for (k, e) in est.iter_mut().enumerate() {
                e.push(trial.tx.clean[k].body(), trial.tx.amplified[k].body())?;
            }
            Ok((est, trial.coefficients))
        })?;

        let coefficients = per_trial[0].1.clone();
        let mut totals = vec![AlphaEstimator::default(); p.antennas];
        for (est, _) in &per_trial {
            for (acc, e) in totals.iter_mut().zip(est) {
                acc.merge(e);
            }
        }
        let wall = start.elapsed().as_secs_f64();
        let alpha_mean = coefficients.mean_alpha();
        for (k, est) in totals.iter().enumerate() {
            let ibo_k = coefficients.ibo_db[k];
            let empirical = if coefficients.silent.contains(&k) {
                1.0
            } else {
                est.alpha()?
            };
            out.push(SweepRecord {
                antenna: Some(k),
                ibo_k_db: Some(ibo_k),
                alpha_analytic: Some(alpha_analytic(ibo_k)),
                alpha_empirical: Some(empirical),
                alpha_mean: Some(alpha_mean),
                wall_time_s: wall,
                ..base_record(&sim, "alpha", index, p)
            });
        }
    }
    Ok(out)
}

/// One row of the operation-count table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityRecord {
    pub qam_order: u64,
    pub fft_size: u64,
    pub data_subcarriers: u64,
    pub k: u64,
    pub receiver: &'static str,
    pub iterations: u64,
    pub additions: u64,
    pub multiplications: u64,
    pub additions_per_subcarrier: f64,
    pub multiplications_per_subcarrier: f64,
}

/// Standard receiver once per K, then CNC and MCNC at every iteration count.
pub fn complexity_report(c: &ScenarioConfig) -> Result<Vec<ComplexityRecord>, SimError> {
    c.validate()?;
    let s = &c.complexity;
    let mut out = Vec::new();
    for &k in &s.antennas {
        let params = |iterations| ComplexityParams {
            order: s.qam_order,
            fft_size: s.fft_size,
            data_subcarriers: s.data_subcarriers,
            antennas: k,
            iterations,
        };
        let row = |kind: ReceiverKind, i: u64, n: OperationCount| ComplexityRecord {
            qam_order: s.qam_order,
            fft_size: s.fft_size,
            data_subcarriers: s.data_subcarriers,
            k,
            receiver: kind.name(),
            iterations: i,
            additions: n.additions,
            multiplications: n.multiplications,
            additions_per_subcarrier: n.additions_per_subcarrier(),
            multiplications_per_subcarrier: n.multiplications_per_subcarrier(),
        };
        out.push(row(
            ReceiverKind::Standard,
            0,
            complexity(ReceiverKind::Standard, &params(0)),
        ));
        for kind in [ReceiverKind::Cnc, ReceiverKind::Mcnc] {
            for &i in &s.iterations {
                out.push(row(kind, i, complexity(kind, &params(i))));
            }
        }
    }
    Ok(out)
}

pub fn write_complexity<W: std::io::Write>(
    out: W,
    rows: &[ComplexityRecord],
) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
