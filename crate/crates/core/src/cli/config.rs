//! Scenario files: TOML with units in key names, converted once at load.

use crate::beamforming::{AlgorithmConfig, BfProblem, Initializer, InterfererPower, NegativeWeights};
use crate::capacity::Conditioning;
use crate::channels::{
    random_geometry, steering_vector, steering_vector_phased, BeamGeometry, FsoPathLoss, LayoutSpec, MalagaParams,
    Presets, ShadowedRicianParams,
};
use crate::error::{Error, Result};
use crate::feeder::{FeederConfig, FeederMode, Gateway, NodeScale, QuadratureSpec};
use crate::rng::RngStream;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// The configuration used when no file is given.
pub const DEFAULT_CONFIG: &str = include_str!("../../configs/default.toml");

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

fn cfg_err(path: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeederModeKey {
    Stbc,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeScaleKey {
    MeanSnr,
    Literal,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GatewaySection {
    /// Turbulence preset name.
    pub turbulence: String,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
    pub pointing_loss_db: f64,
    pub atmospheric_loss_db: f64,
}

impl Default for GatewaySection {
    fn default() -> Self {
        Self {
            turbulence: "moderate".into(),
            tx_gain_db: 0.0,
            rx_gain_db: 0.0,
            pointing_loss_db: 1.0,
            atmospheric_loss_db: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeederSection {
    pub power_dbm: f64,
    /// Optical-to-electrical conversion coefficient η.
    pub efficiency: f64,
    pub noise_dbm: f64,
    pub mode: FeederModeKey,
    pub quadrature_nodes: usize,
    pub node_scale: NodeScaleKey,
    pub gateways: Vec<GatewaySection>,
}

impl Default for FeederSection {
    fn default() -> Self {
        Self {
            power_dbm: 20.0,
            efficiency: 0.5,
            noise_dbm: -24.0,
            mode: FeederModeKey::Stbc,
            quadrature_nodes: 30,
            node_scale: NodeScaleKey::MeanSnr,
            gateways: vec![GatewaySection::default(), GatewaySection::default()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditioningKey {
    Truncated,
    Conditional,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UserLinkSection {
    pub beams: usize,
    pub users: usize,
    /// Off-axis angle at which the beam gain is 3 dB below its peak.
    pub beamwidth_3db_deg: f64,
    pub max_gain_dbi: f64,
    pub freq_ghz: f64,
    pub rx_gain_dbi: f64,
    /// Distance between adjacent beam centers, in 3 dB beamwidths.
    pub beam_spacing_beamwidths: f64,
    /// Radius of the disk users are dropped in around their beam center.
    pub user_radius_beamwidths: f64,
    pub layout_seed: u64,
    /// Per-user transmit power P₂.
    pub power_dbw: f64,
    /// Optional per-user offsets added to `power_dbw`; empty or one per user.
    pub power_offsets_db: Vec<f64>,
    pub noise_temp_k: f64,
    pub bandwidth_mhz: f64,
    /// Shadowed-Rician preset name.
    pub shadowing: String,
    /// One-bit feedback threshold Λ_th; absent means 0 (linear).
    pub sinr_threshold_db: Option<f64>,
    pub phased_steering: bool,
    /// Design beamformers on the fading-averaged channel √E|ρ|²·a_k.
    pub design_on_mean_fading: bool,
    pub conditioning: ConditioningKey,
}

impl Default for UserLinkSection {
    fn default() -> Self {
        Self {
            beams: 7,
            users: 4,
            beamwidth_3db_deg: 0.2,
            max_gain_dbi: 52.0,
            freq_ghz: 20.0,
            rx_gain_dbi: 41.7,
            beam_spacing_beamwidths: 3f64.sqrt(),
            user_radius_beamwidths: 1.0,
            layout_seed: 1,
            power_dbw: 0.0,
            power_offsets_db: Vec::new(),
            noise_temp_k: 207.0,
            bandwidth_mhz: 500.0,
            shadowing: "average".into(),
            sinr_threshold_db: None,
            phased_steering: false,
            design_on_mean_fading: true,
            conditioning: ConditioningKey::Truncated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKey {
    UnitWeights,
    MatchedFilter,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativeWeightsKey {
    Saturate,
    Floor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterfererPowerKey {
    Common,
    PerInterferer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeedbackKey {
    /// Deterministic E[γ] feedback.
    Expected,
    /// SINR of a fresh channel draw per outer round.
    ChannelDraw,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgorithmSection {
    pub epsilon: f64,
    pub max_iters: usize,
    pub init: InitKey,
    pub init_seed: u64,
    pub negative_weights: NegativeWeightsKey,
    pub saturation_delta: f64,
    pub interferer_power: InterfererPowerKey,
    pub feedback: FeedbackKey,
}

impl Default for AlgorithmSection {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            max_iters: 200,
            init: InitKey::UnitWeights,
            init_seed: 0,
            negative_weights: NegativeWeightsKey::Saturate,
            saturation_delta: 1e-2,
            interferer_power: InterfererPowerKey::Common,
            feedback: FeedbackKey::Expected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    UserPowerDbw,
    FeederPowerDbm,
}

impl SweepVariable {
    pub fn key(&self) -> &'static str {
        match self {
            Self::UserPowerDbw => "user_power_dbw",
            Self::FeederPowerDbm => "feeder_power_dbm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    /// Monte Carlo draws per estimate.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            variable: SweepVariable::UserPowerDbw,
            grid: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            samples: 100_000,
            seed: 2024,
        }
    }
}

/// Extra or replacement presets.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PresetOverrides {
    pub malaga: BTreeMap<String, MalagaParams>,
    pub shadowed_rician: BTreeMap<String, ShadowedRicianParams>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub feeder: FeederSection,
    pub userlink: UserLinkSection,
    pub algorithm: AlgorithmSection,
    pub sweep: SweepSection,
    pub presets: PresetOverrides,
}

impl ScenarioConfig {
    /// Parse TOML text; errors carry the offending key path.
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| cfg_err("<document>", e.to_string().trim()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            cfg_err(if path == "." { "<document>" } else { &path }, e.into_inner().message())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg_err("<file>", format!("cannot read {}: {e}", path.display())))?;
        let cfg = Self::parse(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn default_config() -> Self {
        Self::parse(DEFAULT_CONFIG).expect("bundled default config parses")
    }

    /// Embedded presets with this file's overrides applied.
    pub fn presets(&self) -> Presets {
        let mut p = Presets::embedded();
        p.merge(Presets {
            label: String::new(),
            malaga: self.presets.malaga.clone(),
            shadowed_rician: self.presets.shadowed_rician.clone(),
        });
        p
    }

    /// Point `--preset <name>` at whichever family defines it.
    pub fn apply_preset(&mut self, name: &str) -> Result<()> {
        let presets = self.presets();
        if presets.malaga.contains_key(name) {
            for g in &mut self.feeder.gateways {
                g.turbulence = name.to_string();
            }
            Ok(())
        } else if presets.shadowed_rician.contains_key(name) {
            self.userlink.shadowing = name.to_string();
            Ok(())
        } else {
            Err(cfg_err(
                "--preset",
                format!(
                    "unknown preset `{name}`; turbulence: {:?}, shadowing: {:?}",
                    presets.malaga.keys().collect::<Vec<_>>(),
                    presets.shadowed_rician.keys().collect::<Vec<_>>()
                ),
            ))
        }
    }

    /// Schema-level checks; every message names the key it concerns.
    pub fn validate(&self) -> Result<()> {
        let f = &self.feeder;
        let u = &self.userlink;
        let a = &self.algorithm;
        let s = &self.sweep;
        let finite = |path: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(cfg_err(path, "must be finite"))
            }
        };
        let positive = |path: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(cfg_err(path, format!("must be positive, got {v}")))
            }
        };
        finite("feeder.power_dbm", f.power_dbm)?;
        positive("feeder.efficiency", f.efficiency)?;
        finite("feeder.noise_dbm", f.noise_dbm)?;
        if f.quadrature_nodes < 1 {
            return Err(cfg_err("feeder.quadrature_nodes", "must be ≥ 1"));
        }
        let need = match f.mode {
            FeederModeKey::Stbc => 2,
            FeederModeKey::Single => 1,
        };
        if f.gateways.len() < need || f.gateways.len() > 2 {
            return Err(cfg_err(
                "feeder.gateways",
                format!("{:?} mode needs {need} gateway(s), found {}", f.mode, f.gateways.len()),
            ));
        }
        let presets = self.presets();
        for (i, g) in f.gateways.iter().enumerate() {
            if !presets.malaga.contains_key(&g.turbulence) {
                return Err(cfg_err(
                    &format!("feeder.gateways[{i}].turbulence"),
                    format!("unknown preset `{}`", g.turbulence),
                ));
            }
            for (k, v) in [("pointing_loss_db", g.pointing_loss_db), ("atmospheric_loss_db", g.atmospheric_loss_db)] {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(cfg_err(&format!("feeder.gateways[{i}].{k}"), "loss must be ≥ 0 dB"));
                }
            }
            finite(&format!("feeder.gateways[{i}].tx_gain_db"), g.tx_gain_db)?;
            finite(&format!("feeder.gateways[{i}].rx_gain_db"), g.rx_gain_db)?;
        }
        if u.beams == 0 {
            return Err(cfg_err("userlink.beams", "must be ≥ 1"));
        }
        if u.users == 0 {
            return Err(cfg_err("userlink.users", "must be ≥ 1"));
        }
        positive("userlink.beamwidth_3db_deg", u.beamwidth_3db_deg)?;
        finite("userlink.max_gain_dbi", u.max_gain_dbi)?;
        positive("userlink.freq_ghz", u.freq_ghz)?;
        finite("userlink.rx_gain_dbi", u.rx_gain_dbi)?;
        positive("userlink.beam_spacing_beamwidths", u.beam_spacing_beamwidths)?;
        if !(u.user_radius_beamwidths >= 0.0) {
            return Err(cfg_err("userlink.user_radius_beamwidths", "must be ≥ 0"));
        }
        finite("userlink.power_dbw", u.power_dbw)?;
        if !u.power_offsets_db.is_empty() && u.power_offsets_db.len() != u.users {
            return Err(cfg_err(
                "userlink.power_offsets_db",
                format!("needs 0 or {} entries, found {}", u.users, u.power_offsets_db.len()),
            ));
        }
        for (i, v) in u.power_offsets_db.iter().enumerate() {
            finite(&format!("userlink.power_offsets_db[{i}]"), *v)?;
        }
        positive("userlink.noise_temp_k", u.noise_temp_k)?;
        positive("userlink.bandwidth_mhz", u.bandwidth_mhz)?;
        if !presets.shadowed_rician.contains_key(&u.shadowing) {
            return Err(cfg_err("userlink.shadowing", format!("unknown preset `{}`", u.shadowing)));
        }
        if let Some(t) = u.sinr_threshold_db {
            finite("userlink.sinr_threshold_db", t)?;
        }
        positive("algorithm.epsilon", a.epsilon)?;
        if a.max_iters < 1 {
            return Err(cfg_err("algorithm.max_iters", "must be ≥ 1"));
        }
        if !(a.saturation_delta > 0.0 && a.saturation_delta < 1.0) {
            return Err(cfg_err("algorithm.saturation_delta", "must lie in (0, 1)"));
        }
        if s.grid.is_empty() {
            return Err(cfg_err("sweep.grid", "must not be empty"));
        }
        for (i, v) in s.grid.iter().enumerate() {
            finite(&format!("sweep.grid[{i}]"), *v)?;
        }
        if s.samples < 10_000 {
            return Err(cfg_err("sweep.samples", format!("must be ≥ 10000, got {}", s.samples)));
        }
        Ok(())
    }

    /// Linear-unit scenario at the configured operating point.
    pub fn resolve(&self) -> Result<Scenario> {
        self.validate()?;
        let presets = self.presets();
        let f = &self.feeder;
        let gateways = f
            .gateways
            .iter()
            .map(|g| {
                Ok(Gateway {
                    path: FsoPathLoss::from_db(g.tx_gain_db, g.rx_gain_db, -g.pointing_loss_db, -g.atmospheric_loss_db),
                    turbulence: presets.malaga(&g.turbulence)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let feeder = FeederConfig {
            p1_w: db(f.power_dbm - 30.0),
            eta: f.efficiency,
            n0_w: db(f.noise_dbm - 30.0),
            gateways,
        };
        feeder.validate()?;

        let u = &self.userlink;
        let spec = LayoutSpec {
            beams: u.beams,
            users: u.users,
            phi3db: u.beamwidth_3db_deg.to_radians(),
            gmax: db(u.max_gain_dbi),
            fc: u.freq_ghz * 1e9,
            gr: db(u.rx_gain_dbi),
            spacing: u.beam_spacing_beamwidths,
            user_radius: u.user_radius_beamwidths,
        };
        let geometry = random_geometry(&mut RngStream::new(u.layout_seed, 0).rng(), &spec)?;
        let fading = presets.shadowed_rician(&u.shadowing)?;
        fading.validate()?;
        let a = self.steering(&geometry);
        let mut channel = BfProblem::new(a, self.user_powers(u.power_dbw), BOLTZMANN * u.noise_temp_k * u.bandwidth_mhz * 1e6)?;
        channel.interferer_power = match self.algorithm.interferer_power {
            InterfererPowerKey::Common => InterfererPower::Common,
            InterfererPowerKey::PerInterferer => InterfererPower::PerInterferer,
        };
        let al = &self.algorithm;
        let algorithm = AlgorithmConfig {
            epsilon: al.epsilon,
            lambda_th: u.sinr_threshold_db.map_or(0.0, db),
            max_iters: al.max_iters,
            init: match al.init {
                InitKey::UnitWeights => Initializer::UnitWeights,
                InitKey::MatchedFilter => Initializer::MatchedFilter,
                InitKey::Random => Initializer::Random { seed: al.init_seed },
            },
            negative_weights: match al.negative_weights {
                NegativeWeightsKey::Saturate => NegativeWeights::Saturate { delta: al.saturation_delta },
                NegativeWeightsKey::Floor => NegativeWeights::Floor,
            },
        };
        algorithm.validate()?;
        Ok(Scenario {
            feeder,
            feeder_mode: match f.mode {
                FeederModeKey::Stbc => FeederMode::Stbc,
                FeederModeKey::Single => FeederMode::Single,
            },
            quadrature: QuadratureSpec {
                t: f.quadrature_nodes,
                scale: match f.node_scale {
                    NodeScaleKey::MeanSnr => NodeScale::MeanSnr,
                    NodeScaleKey::Literal => NodeScale::Literal,
                },
            },
            geometry,
            channel,
            fading,
            algorithm,
            feedback: al.feedback,
            design_on_mean_fading: u.design_on_mean_fading,
            conditioning: match u.conditioning {
                ConditioningKey::Truncated => Conditioning::Truncated,
                ConditioningKey::Conditional => Conditioning::Conditional,
            },
            samples: self.sweep.samples,
            seed: self.sweep.seed,
            user_offsets_db: u.power_offsets_db.clone(),
        })
    }

    fn steering(&self, g: &BeamGeometry) -> DMatrix<Complex64> {
        let cols: Vec<DVector<Complex64>> = (0..g.n_users())
            .map(|k| {
                if self.userlink.phased_steering {
                    steering_vector_phased(g, k)
                } else {
                    steering_vector(g, k).map(|v| Complex64::new(v, 0.0))
                }
            })
            .collect();
        DMatrix::from_columns(&cols)
    }

    fn user_powers(&self, power_dbw: f64) -> DVector<f64> {
        let u = &self.userlink;
        DVector::from_fn(u.users, |k, _| db(power_dbw + u.power_offsets_db.get(k).copied().unwrap_or(0.0)))
    }
}

/// A resolved scenario in linear units.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub feeder: FeederConfig,
    pub feeder_mode: FeederMode,
    pub quadrature: QuadratureSpec,
    pub geometry: BeamGeometry,
    /// True channel means a_k, powers and noise.
    pub channel: BfProblem,
    pub fading: ShadowedRicianParams,
    pub algorithm: AlgorithmConfig,
    pub feedback: FeedbackKey,
    pub design_on_mean_fading: bool,
    pub conditioning: Conditioning,
    pub samples: usize,
    pub seed: u64,
    user_offsets_db: Vec<f64>,
}

impl Scenario {
    /// The problem the beamformers are designed on.
    pub fn design_problem(&self) -> Result<BfProblem> {
        if self.design_on_mean_fading {
            self.channel.averaged(self.fading.mean_power())
        } else {
            Ok(self.channel.clone())
        }
    }

    pub fn with_feeder_power_dbm(&self, dbm: f64) -> Self {
        let mut s = self.clone();
        s.feeder.p1_w = db(dbm - 30.0);
        s
    }

    pub fn with_user_power_dbw(&self, dbw: f64) -> Self {
        let mut s = self.clone();
        for k in 0..s.channel.p.len() {
            s.channel.p[k] = db(dbw + self.user_offsets_db.get(k).copied().unwrap_or(0.0));
        }
        s
    }
}
