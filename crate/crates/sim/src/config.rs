//! Scenario files.
//!
//! A scenario is a TOML document: top-level `seed` and `symbols_per_point`,
//! then `[ofdm]`, `[link]`, `[geometry]` and `[complexity]` tables. Every key
//! is optional and falls back to the desk-scale defaults below; unknown keys
//! are rejected. See `configs/` for annotated examples.

use std::path::Path;

use mimo_cnc::channel::{ArrayGeometry, ChannelModel, ReceiverPlacement};
use mimo_cnc::modem::{Constellation, OfdmConfig};
use serde::Deserialize;

use crate::error::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Los,
    TwoPath,
    Rayleigh,
}

impl ChannelKind {
    pub fn model(self) -> ChannelModel {
        match self {
            ChannelKind::Los => ChannelModel::Los,
            ChannelKind::TwoPath => ChannelModel::TwoPath,
            ChannelKind::Rayleigh => ChannelModel::Rayleigh,
        }
    }

    pub fn name(self) -> &'static str {
        self.model().name()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecoderKind {
    Mrt,
    PhaseOnly,
}

impl PrecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            PrecoderKind::Mrt => "mrt",
            PrecoderKind::PhaseOnly => "phase_only",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReceiverChoice {
    Standard,
    Cnc,
    Mcnc,
    /// Standard receiver on a linear-amplifier copy of the link.
    NoDist,
}

impl ReceiverChoice {
    pub fn name(self) -> &'static str {
        match self {
            ReceiverChoice::Standard => "standard",
            ReceiverChoice::Cnc => "cnc",
            ReceiverChoice::Mcnc => "mcnc",
            ReceiverChoice::NoDist => "no_dist",
        }
    }

    pub fn iterative(self) -> bool {
        matches!(self, ReceiverChoice::Cnc | ReceiverChoice::Mcnc)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OfdmSection {
    pub fft_size: usize,
    pub data_subcarriers: usize,
    pub cp_len: usize,
    pub subcarrier_spacing_hz: f64,
    pub carrier_hz: f64,
}

impl Default for OfdmSection {
    fn default() -> Self {
        let c = OfdmConfig::desk();
        Self {
            fft_size: c.fft_size,
            data_subcarriers: c.data_subcarriers,
            cp_len: c.cp_len,
            subcarrier_spacing_hz: c.subcarrier_spacing_hz,
            carrier_hz: c.carrier_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    pub qam_order: u32,
    pub symbol_power: f64,
    pub antennas: Vec<usize>,
    pub channels: Vec<ChannelKind>,
    pub precoder: PrecoderKind,
    pub ibo_db: Vec<f64>,
    pub ebn0_db: Vec<f64>,
    pub iterations: Vec<usize>,
    pub receivers: Vec<ReceiverChoice>,
    pub csi_epsilon: Vec<f64>,
}

impl Default for LinkSection {
    fn default() -> Self {
        Self {
            qam_order: 64,
            symbol_power: 1.0,
            antennas: vec![64],
            channels: vec![ChannelKind::Los],
            precoder: PrecoderKind::Mrt,
            ibo_db: vec![0.0],
            ebn0_db: vec![10.0, 15.0, 20.0, 25.0, 30.0],
            iterations: vec![0, 1, 2, 8],
            receivers: vec![
                ReceiverChoice::Standard,
                ReceiverChoice::Cnc,
                ReceiverChoice::Mcnc,
                ReceiverChoice::NoDist,
            ],
            csi_epsilon: vec![0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    /// Element spacing in wavelengths at the carrier.
    pub spacing_wavelengths: f64,
    pub array_height_m: f64,
    pub distance_m: f64,
    pub azimuth_deg: f64,
    pub rx_height_m: f64,
    pub jitter_m: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        let p = ReceiverPlacement::default();
        Self {
            spacing_wavelengths: 0.5,
            array_height_m: 15.0,
            distance_m: p.distance_m,
            azimuth_deg: p.azimuth_deg,
            rx_height_m: p.height_m,
            jitter_m: p.jitter_m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComplexitySection {
    pub qam_order: u64,
    pub fft_size: u64,
    pub data_subcarriers: u64,
    pub antennas: Vec<u64>,
    pub iterations: Vec<u64>,
}

impl Default for ComplexitySection {
    fn default() -> Self {
        Self {
            qam_order: 64,
            fft_size: 4096,
            data_subcarriers: 2048,
            antennas: vec![64],
            iterations: vec![0, 1, 3, 8],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub symbols_per_point: usize,
    pub ofdm: OfdmSection,
    pub link: LinkSection,
    pub geometry: GeometrySection,
    pub complexity: ComplexitySection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            symbols_per_point: 200,
            ofdm: OfdmSection::default(),
            link: LinkSection::default(),
            geometry: GeometrySection::default(),
            complexity: ComplexitySection::default(),
        }
    }
}

fn invalid(path: &str, message: impl Into<String>) -> SimError {
    SimError::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let path = e
                .span()
                .and_then(|s| text.get(..s.start))
                .map(|head| format!("line {}", head.matches('\n').count() + 1))
                .unwrap_or_else(|| "<document>".into());
            invalid(&path, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(&path.display().to_string(), e.to_string()))?;
        Self::from_toml(&text)
    }

    pub fn ofdm_config(&self) -> OfdmConfig {
        OfdmConfig {
            fft_size: self.ofdm.fft_size,
            data_subcarriers: self.ofdm.data_subcarriers,
            cp_len: self.ofdm.cp_len,
            subcarrier_spacing_hz: self.ofdm.subcarrier_spacing_hz,
            carrier_hz: self.ofdm.carrier_hz,
        }
    }

    pub fn array(&self, antennas: usize) -> ArrayGeometry {
        let mut g = ArrayGeometry::half_wavelength(antennas, self.ofdm.carrier_hz);
        g.spacing_m *= self.geometry.spacing_wavelengths / 0.5;
        g.height_m = self.geometry.array_height_m;
        g
    }

    pub fn placement(&self) -> ReceiverPlacement {
        ReceiverPlacement {
            distance_m: self.geometry.distance_m,
            azimuth_deg: self.geometry.azimuth_deg,
            height_m: self.geometry.rx_height_m,
            jitter_m: self.geometry.jitter_m,
        }
    }

    pub fn max_iterations(&self) -> usize {
        self.link.iterations.iter().copied().max().unwrap_or(0)
    }

    /// Checks every field, reporting the first failure with its key path.
    pub fn validate(&self) -> Result<(), SimError> {
        if self.symbols_per_point == 0 {
            return Err(invalid("symbols_per_point", "must be at least 1"));
        }
        self.ofdm_config()
            .validate()
            .map_err(|e| invalid("ofdm", e.to_string()))?;

        let l = &self.link;
        Constellation::new(l.qam_order).map_err(|e| invalid("link.qam_order", e.to_string()))?;
        if !(l.symbol_power > 0.0 && l.symbol_power.is_finite()) {
            return Err(invalid("link.symbol_power", "must be positive and finite"));
        }
        let nonempty = [
            ("link.antennas", l.antennas.is_empty()),
            ("link.channels", l.channels.is_empty()),
            ("link.ibo_db", l.ibo_db.is_empty()),
            ("link.ebn0_db", l.ebn0_db.is_empty()),
            ("link.iterations", l.iterations.is_empty()),
            ("link.receivers", l.receivers.is_empty()),
            ("link.csi_epsilon", l.csi_epsilon.is_empty()),
        ];
        for (path, empty) in nonempty {
            if empty {
                return Err(invalid(path, "list must not be empty"));
            }
        }
        for (i, k) in l.antennas.iter().enumerate() {
            if *k == 0 {
                return Err(invalid(
                    &format!("link.antennas[{i}]"),
                    "must be at least 1",
                ));
            }
        }
        for (i, v) in l.ibo_db.iter().enumerate() {
            if v.is_nan() || *v == f64::NEG_INFINITY {
                return Err(invalid(
                    &format!("link.ibo_db[{i}]"),
                    "must be a number or +inf",
                ));
            }
        }
        for (i, v) in l.ebn0_db.iter().enumerate() {
            if v.is_nan() || *v == f64::NEG_INFINITY {
                return Err(invalid(
                    &format!("link.ebn0_db[{i}]"),
                    "must be a number or +inf",
                ));
            }
        }
        for (i, e) in l.csi_epsilon.iter().enumerate() {
            if !(0.0..=1.0).contains(e) {
                return Err(invalid(
                    &format!("link.csi_epsilon[{i}]"),
                    "must lie in [0, 1]",
                ));
            }
        }

        let g = &self.geometry;
        let checks = [
            ("geometry.spacing_wavelengths", g.spacing_wavelengths > 0.0),
            ("geometry.array_height_m", g.array_height_m >= 0.0),
            ("geometry.distance_m", g.distance_m > 0.0),
            ("geometry.rx_height_m", g.rx_height_m >= 0.0),
            ("geometry.jitter_m", g.jitter_m >= 0.0),
            ("geometry.azimuth_deg", g.azimuth_deg.is_finite()),
        ];
        for (path, ok) in checks {
            if !ok {
                return Err(invalid(path, "out of range"));
            }
        }

        let c = &self.complexity;
        if c.antennas.is_empty() {
            return Err(invalid("complexity.antennas", "list must not be empty"));
        }
        if c.iterations.is_empty() {
            return Err(invalid("complexity.iterations", "list must not be empty"));
        }
        for (i, k) in c.antennas.iter().enumerate() {
            let p = mimo_cnc::analysis::ComplexityParams {
                order: c.qam_order,
                fft_size: c.fft_size,
                data_subcarriers: c.data_subcarriers,
                antennas: *k,
                iterations: 0,
            };
            p.validate()
                .map_err(|e| invalid(&format!("complexity.antennas[{i}]"), e.to_string()))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_desk_default() {
        let c = ScenarioConfig::from_toml("").unwrap();
        assert_eq!(c, ScenarioConfig::default());
        assert_eq!(c.ofdm_config(), OfdmConfig::desk());
    }

    #[test]
    fn parses_full_document() {
        let text = r#"
seed = 7
symbols_per_point = 50

[ofdm]
fft_size = 64
data_subcarriers = 32
cp_len = 4

[link]
qam_order = 16
antennas = [1, 8]
channels = ["two_path", "rayleigh"]
precoder = "phase_only"
ibo_db = [0.0, 3.0, inf]
ebn0_db = [10, 20, inf]
iterations = [0, 3]
receivers = ["standard", "mcnc", "no_dist"]
csi_epsilon = [0.0, 0.3]

[geometry]
distance_m = 100
jitter_m = 0
"#;
        let c = ScenarioConfig::from_toml(text).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(
            c.link.channels,
            [ChannelKind::TwoPath, ChannelKind::Rayleigh]
        );
        assert_eq!(c.link.ebn0_db[2], f64::INFINITY);
        assert_eq!(c.link.precoder, PrecoderKind::PhaseOnly);
        assert_eq!(c.max_iterations(), 3);
        assert_eq!(c.placement().distance_m, 100.0);
        assert_eq!(c.geometry.azimuth_deg, 45.0);
    }

    fn path_of(text: &str) -> String {
        match ScenarioConfig::from_toml(text).unwrap_err() {
            SimError::Config { path, .. } => path,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(path_of("symbols_per_point = 0"), "symbols_per_point");
        assert_eq!(path_of("[link]\nqam_order = 32"), "link.qam_order");
        assert_eq!(path_of("[link]\nibo_db = []"), "link.ibo_db");
        assert_eq!(
            path_of("[link]\ncsi_epsilon = [0.1, 1.5]"),
            "link.csi_epsilon[1]"
        );
        assert_eq!(path_of("[link]\nantennas = [4, 0]"), "link.antennas[1]");
        assert_eq!(path_of("[geometry]\ndistance_m = 0"), "geometry.distance_m");
        assert_eq!(path_of("[ofdm]\nfft_size = 100"), "ofdm");
        assert_eq!(
            path_of("[complexity]\nqam_order = 8"),
            "complexity.antennas[0]"
        );
        assert!(path_of("[link]\nbogus = 1").starts_with("line"));
        assert!(path_of("[link]\nchannels = [\"fog\"]").starts_with("line"));
    }
}
