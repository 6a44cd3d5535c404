//! Scenario geometry and the probabilistic air-to-ground channel.
//!
//! Path loss mixes a LoS and an NLoS log-distance term, weighted by an
//! elevation-dependent LoS probability. The mixture is taken in dB, and the
//! resulting loss is linearized as `10^(-loss/10)` for SINR computations.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn horizontal_distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Radio and channel parameters shared by every link of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub carrier_freq_hz: f64,
    pub light_speed_mps: f64,
    pub env_a: f64,
    pub env_b: f64,
    pub eta_los_db: f64,
    pub eta_nlos_db: f64,
    pub noise_dbm: f64,
    /// Strictly increasing transmit power levels.
    pub power_levels_dbm: Vec<f64>,
    pub num_subchannels: usize,
    pub altitude_m: f64,
    pub coverage_radius_m: f64,
    /// Soft cap, reported as a warning only.
    pub max_gus_per_uav: usize,
}

impl Default for RadioParams {
    /// Dense-urban parameters at 2 GHz.
    fn default() -> Self {
        Self {
            carrier_freq_hz: 2e9,
            light_speed_mps: 299_792_458.0,
            env_a: 9.6,
            env_b: 0.16,
            eta_los_db: 1.0,
            eta_nlos_db: 20.0,
            noise_dbm: -96.0,
            power_levels_dbm: vec![10.0, 15.0, 20.0, 25.0, 30.0],
            num_subchannels: 2,
            altitude_m: 100.0,
            coverage_radius_m: 500.0,
            max_gus_per_uav: 30,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        let finite = [
            self.carrier_freq_hz,
            self.light_speed_mps,
            self.env_a,
            self.env_b,
            self.eta_los_db,
            self.eta_nlos_db,
            self.noise_dbm,
            self.altitude_m,
            self.coverage_radius_m,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("radio parameters".into()));
        }
        if self.carrier_freq_hz <= 0.0 || self.light_speed_mps <= 0.0 {
            return bad("carrier frequency and light speed must be positive");
        }
        if self.env_b <= 0.0 || self.env_a < 0.0 {
            return bad("env_b must be > 0 and env_a >= 0");
        }
        if self.altitude_m <= 0.0 {
            return bad("altitude must be positive");
        }
        if self.eta_nlos_db < self.eta_los_db {
            return bad("eta_nlos_db must be >= eta_los_db");
        }
        if self.power_levels_dbm.is_empty() {
            return bad("at least one power level required");
        }
        if self.power_levels_dbm.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("power levels".into()));
        }
        if self.power_levels_dbm.windows(2).any(|w| w[1] <= w[0]) {
            return bad("power levels must be strictly increasing");
        }
        if self.num_subchannels == 0 || self.max_gus_per_uav == 0 {
            return bad("counts must be >= 1");
        }
        Ok(())
    }

    pub fn noise_w(&self) -> f64 {
        dbm_to_watts(self.noise_dbm)
    }

    pub fn power_levels_w(&self) -> Vec<f64> {
        self.power_levels_dbm.iter().map(|&p| dbm_to_watts(p)).collect()
    }

    pub fn num_power_levels(&self) -> usize {
        self.power_levels_dbm.len()
    }

    /// Free-space term `20 log10(4π f_c d / c)`.
    pub fn free_space_db(&self, d: f64) -> f64 {
        20.0 * (4.0 * PI * self.carrier_freq_hz * d / self.light_speed_mps).log10()
    }
}

/// 3-D link distance between a UAV at altitude `h` and a ground user.
pub fn distance(u: &Point, v: &Point, h: f64) -> f64 {
    let dx = u.x - v.x;
    let dy = u.y - v.y;
    (dx * dx + dy * dy + h * h).sqrt()
}

/// LoS probability for link length `d` and altitude `h`.
///
/// Errors when `d < h`, where the elevation angle is undefined.
pub fn los_probability(d: f64, h: f64, a: f64, b: f64) -> Result<f64> {
    if !(d.is_finite() && h.is_finite()) {
        return Err(Error::NonFinite("los_probability inputs".into()));
    }
    if h <= 0.0 || d < h {
        return Err(Error::InvalidParameter(format!("link length {d} shorter than altitude {h}")));
    }
    let elevation_deg = (180.0 / PI) * (h / d).asin();
    Ok(1.0 / (1.0 + a * (-b * (elevation_deg - a)).exp()))
}

/// Mean path loss in dB: LoS/NLoS losses mixed by the LoS probability.
pub fn mean_pathloss_db(d: f64, params: &RadioParams) -> Result<f64> {
    let rho = los_probability(d, params.altitude_m, params.env_a, params.env_b)?;
    let fs = params.free_space_db(d);
    Ok(rho * (fs + params.eta_los_db) + (1.0 - rho) * (fs + params.eta_nlos_db))
}

/// Input of [`generate_scenario`]; mirrors the JSON config document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub carrier_freq_hz: f64,
    pub light_speed_mps: f64,
    pub num_gus: usize,
    pub num_uavs: usize,
    pub num_subchannels: usize,
    pub coverage_radius_m: f64,
    pub env_a: f64,
    pub env_b: f64,
    pub eta_los_db: f64,
    pub eta_nlos_db: f64,
    pub power_levels_dbm: Vec<f64>,
    pub noise_dbm: f64,
    pub altitude_m: f64,
    /// Width and height of the service area.
    pub area_m: [f64; 2],
    /// Radius of the UAV placement circle; defaults to half the shorter
    /// side minus the coverage radius.
    pub placement_radius_m: Option<f64>,
    pub max_gus_per_uav: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let r = RadioParams::default();
        Self {
            carrier_freq_hz: r.carrier_freq_hz,
            light_speed_mps: r.light_speed_mps,
            num_gus: 100,
            num_uavs: 7,
            num_subchannels: r.num_subchannels,
            coverage_radius_m: r.coverage_radius_m,
            env_a: r.env_a,
            env_b: r.env_b,
            eta_los_db: r.eta_los_db,
            eta_nlos_db: r.eta_nlos_db,
            power_levels_dbm: r.power_levels_dbm,
            noise_dbm: r.noise_dbm,
            altitude_m: r.altitude_m,
            area_m: [2500.0, 2500.0],
            placement_radius_m: None,
            max_gus_per_uav: r.max_gus_per_uav,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn radio(&self) -> RadioParams {
        RadioParams {
            carrier_freq_hz: self.carrier_freq_hz,
            light_speed_mps: self.light_speed_mps,
            env_a: self.env_a,
            env_b: self.env_b,
            eta_los_db: self.eta_los_db,
            eta_nlos_db: self.eta_nlos_db,
            noise_dbm: self.noise_dbm,
            power_levels_dbm: self.power_levels_dbm.clone(),
            num_subchannels: self.num_subchannels,
            altitude_m: self.altitude_m,
            coverage_radius_m: self.coverage_radius_m,
            max_gus_per_uav: self.max_gus_per_uav,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub uav_positions: Vec<Point>,
    pub gu_positions: Vec<Point>,
    pub radio: RadioParams,
    pub area_m: [f64; 2],
    pub seed: u64,
}

impl Scenario {
    /// Builds a scenario from explicit positions.
    pub fn new(uav_positions: Vec<Point>, gu_positions: Vec<Point>, radio: RadioParams) -> Result<Self> {
        let s = Self { uav_positions, gu_positions, radio, area_m: [0.0, 0.0], seed: 0 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.radio.validate()?;
        if self.uav_positions.is_empty() || self.gu_positions.is_empty() {
            return Err(Error::InvalidParameter("need at least one UAV and one GU".into()));
        }
        let all = self.uav_positions.iter().chain(&self.gu_positions);
        if all.into_iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::NonFinite("scenario coordinates".into()));
        }
        Ok(())
    }

    pub fn num_uavs(&self) -> usize {
        self.uav_positions.len()
    }

    pub fn num_gus(&self) -> usize {
        self.gu_positions.len()
    }

    /// M×N matrix of 3-D UAV–GU distances.
    pub fn distances(&self) -> Vec<Vec<f64>> {
        let h = self.radio.altitude_m;
        self.uav_positions.iter().map(|u| self.gu_positions.iter().map(|v| distance(u, v, h)).collect()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }
}

/// Places UAVs on a regular polygon around the area center and drops GUs
/// uniformly over the area. Deterministic in `config.seed`.
pub fn generate_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    let radio = config.radio();
    radio.validate()?;
    let [w, h] = config.area_m;
    if !(w.is_finite() && h.is_finite()) {
        return Err(Error::NonFinite("area".into()));
    }
    if w <= 0.0 || h <= 0.0 {
        return Err(Error::InvalidParameter(format!("area {w} x {h} has no extent")));
    }
    if config.num_uavs == 0 || config.num_gus == 0 {
        return Err(Error::InvalidParameter("need at least one UAV and one GU".into()));
    }
    let radius = config.placement_radius_m.unwrap_or(0.5 * w.min(h) - config.coverage_radius_m);
    if config.num_uavs > 1 && (radius.is_nan() || radius <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "placement radius {radius} must be positive for more than one UAV"
        )));
    }

    let center = Point::new(0.5 * w, 0.5 * h);
    let m = config.num_uavs;
    let uav_positions = if m == 1 {
        vec![center]
    } else {
        (0..m)
            .map(|i| {
                let theta = 2.0 * PI * i as f64 / m as f64;
                Point::new(center.x + radius * theta.cos(), center.y + radius * theta.sin())
            })
            .collect()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let gu_positions =
        (0..config.num_gus).map(|_| Point::new(rng.random_range(0.0..w), rng.random_range(0.0..h))).collect();

    Ok(Scenario { uav_positions, gu_positions, radio, area_m: config.area_m, seed: config.seed })
}

/// Per-link mean path loss and the corresponding linear power gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainMatrix {
    /// `|g_{m,n}|^2`, indexed `[uav][gu]`.
    pub linear_gain: Vec<Vec<f64>>,
    pub pathloss_db: Vec<Vec<f64>>,
}

impl GainMatrix {
    pub fn gain(&self, uav: usize, gu: usize) -> f64 {
        self.linear_gain[uav][gu]
    }

    pub fn num_uavs(&self) -> usize {
        self.linear_gain.len()
    }

    pub fn num_gus(&self) -> usize {
        self.linear_gain.first().map_or(0, Vec::len)
    }
}

pub fn gain_matrix(scenario: &Scenario) -> Result<GainMatrix> {
    let radio = &scenario.radio;
    let mut linear_gain = Vec::with_capacity(scenario.num_uavs());
    let mut pathloss_db = Vec::with_capacity(scenario.num_uavs());
    for row in scenario.distances() {
        let pl = row.iter().map(|&d| mean_pathloss_db(d, radio)).collect::<Result<Vec<f64>>>()?;
        linear_gain.push(pl.iter().map(|&l| 10f64.powf(-l / 10.0)).collect());
        pathloss_db.push(pl);
    }
    Ok(GainMatrix { linear_gain, pathloss_db })
}
