use mimo_cnc::channel::{
    los, propagate, rayleigh, ArrayGeometry, ChannelModel, ChannelRealization, ReceiverPlacement,
};
use mimo_cnc::frontend::{reference_power, AmplifierModel};
use mimo_cnc::link::Transmitter;
use mimo_cnc::modem::{Constellation, OfdmConfig, OfdmModem};
use mimo_cnc::numerics::{mean_power, RngStream};
use mimo_cnc::precoding::{mrt, phase_only_matrix, PhaseOnlyPrecoder};
use mimo_cnc::{FrequencyGrid, C64};
use proptest::prelude::*;

fn random_symbols(c: &Constellation, n: usize, rng: &mut RngStream) -> Vec<C64> {
    let bits: Vec<u8> = (0..n * c.bits_per_symbol()).map(|_| rng.bit()).collect();
    c.map_bits(&bits).unwrap()
}

#[test]
fn mrt_delivers_channel_norm_times_symbol() {
    let cfg = OfdmConfig::with_sizes(128, 64);
    let modem = OfdmModem::new(cfg.clone()).unwrap();
    let c = Constellation::new(16).unwrap();
    let mut rng = RngStream::new(1, 1);
    let h = rayleigh(8, 64, &mut rng).unwrap();
    let v = mrt(&h).unwrap();
    let s = random_symbols(&c, 64, &mut rng);
    let amp = AmplifierModel::linear(reference_power(&cfg, 8, 1.0));
    let tx = Transmitter::new(&modem, &v, amp).transmit(&s).unwrap();
    let r = propagate(&tx.amplified, &h, &modem).unwrap();
    for n in 0..64 {
        let norm = (0..8)
            .map(|k| h.gains().get(k, n).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!((r[n] - s[n] * norm).norm() < 1e-12);
    }
}

#[test]
fn single_antenna_unit_channel_is_transparent() {
    let cfg = OfdmConfig::with_sizes(64, 32);
    let modem = OfdmModem::new(cfg.clone()).unwrap();
    let c = Constellation::new(64).unwrap();
    let mut rng = RngStream::new(2, 2);
    let h = ChannelRealization::new(
        FrequencyGrid::from_fn(1, 32, |_, _| C64::new(1.0, 0.0)),
        ChannelModel::Los,
    );
    let v = mrt(&h).unwrap();
    let s = random_symbols(&c, 32, &mut rng);
    let r = Transmitter::new(&modem, &v, AmplifierModel::linear(1.0))
        .received(&s, &h)
        .unwrap();
    let (_, bits) = c.detect_all(&r);
    let (_, sent) = c.detect_all(&s);
    assert_eq!(bits, sent);
    assert!(r.iter().zip(&s).all(|(a, b)| (a - b).norm() < 1e-12));
}

#[test]
fn phase_only_tracks_mrt_in_line_of_sight() {
    let cfg = OfdmConfig::desk();
    let geom = ArrayGeometry::half_wavelength(8, cfg.carrier_hz);
    let mut rng = RngStream::new(3, 3);
    let h = los(&geom, &ReceiverPlacement::default(), &cfg, &mut rng).unwrap();
    let m = mrt(&h).unwrap();
    let p = phase_only_matrix(&PhaseOnlyPrecoder::matched_to(&h, 64), 128).unwrap();
    let gm = h.gains().column_dot(m.grid(), None).unwrap();
    let gp = h.gains().column_dot(p.grid(), None).unwrap();
    for n in 0..128 {
        assert!(
            gp[n].norm_sqr() / gm[n].norm_sqr() > 0.999,
            "subcarrier {n}"
        );
        // Per subcarrier the two differ by one phase common to all elements.
        let common = (p.get(0, n) / m.get(0, n)).arg();
        for k in 1..8 {
            let d = (p.get(k, n) / m.get(k, n)).arg() - common;
            assert!(d.sin().abs() < 0.02, "subcarrier {n}, element {k}");
        }
    }
}

#[test]
fn frame_power_matches_reference() {
    let cfg = OfdmConfig::desk();
    let modem = OfdmModem::new(cfg.clone()).unwrap();
    let c = Constellation::new(64).unwrap();
    let mut rng = RngStream::new(4, 4);
    let k = 16;
    let mut acc = 0.0;
    let trials = 200;
    for _ in 0..trials {
        let h = rayleigh(k, 128, &mut rng).unwrap();
        let v = mrt(&h).unwrap();
        let s = random_symbols(&c, 128, &mut rng);
        let tx = Transmitter::new(&modem, &v, AmplifierModel::linear(1.0))
            .transmit(&s)
            .unwrap();
        acc += tx.clean.iter().map(|f| mean_power(f.body())).sum::<f64>() / k as f64;
    }
    let measured = acc / trials as f64;
    let expect = reference_power(&cfg, k, 1.0);
    assert!(
        (measured / expect - 1.0).abs() < 0.02,
        "{measured} vs {expect}"
    );

    // K = 1: mean frame power is Ps N_U / N.
    let h = ChannelRealization::new(
        FrequencyGrid::from_fn(1, 128, |_, _| C64::new(1.0, 0.0)),
        ChannelModel::Los,
    );
    let v = mrt(&h).unwrap();
    let mut p = 0.0;
    for _ in 0..trials {
        let s = random_symbols(&c, 128, &mut rng);
        let tx = Transmitter::new(&modem, &v, AmplifierModel::linear(1.0))
            .transmit(&s)
            .unwrap();
        p += mean_power(tx.clean[0].body());
    }
    assert!((p / trials as f64 / 0.5 - 1.0).abs() < 0.02);
}

proptest! {
    #[test]
    fn precoders_have_unit_column_norm(seed in any::<u64>(), k in 1usize..16) {
        let mut rng = RngStream::new(seed, 0);
        let h = rayleigh(k, 16, &mut rng).unwrap();
        let m = mrt(&h).unwrap();
        let p = phase_only_matrix(&PhaseOnlyPrecoder::matched_to(&h, 3), 16).unwrap();
        for v in [&m, &p] {
            for n in 0..16 {
                let s: f64 = (0..k).map(|a| v.get(a, n).norm_sqr()).sum();
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
        }
        for a in 0..k {
            prop_assert!(p.row(a).iter().all(|x| (x.norm_sqr() - 1.0 / k as f64).abs() < 1e-12));
        }
    }
}
