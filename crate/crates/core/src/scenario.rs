//! Random instances following a 3GPP-style macro-cell IoT setup, and the JSON
//! instance file format.
//!
//! Path loss in dB at distance `d` km is `120.9 + 37.6 log10(d) + G_ant + L_pen`.
//! Fading is Rayleigh (unit-mean exponential power gain), redrawn for every
//! (device, slot, frame). Gains are divided by the noise power of one RB, so a
//! device transmitting `p` watts sees SNR `p * g`.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelTensor, DeviceProfile, FrameDemand, Instance, InstanceParams};
use crate::rng;

const STREAM_POSITION: u64 = 0x504F_5349;
const STREAM_FRAME: u64 = 0x4652_414D;

/// Minimum device to base-station distance in meters.
pub const MIN_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    pub num_devices: usize,
    pub num_slots: usize,
    #[serde(default = "one")]
    pub num_frames: usize,
    #[serde(default = "two")]
    pub group_cap: usize,
    #[serde(default = "defaults::area_side_m")]
    pub area_side_m: f64,
    #[serde(default = "defaults::carrier")]
    pub carrier: String,
    #[serde(default = "defaults::total_bandwidth_hz")]
    pub total_bandwidth_hz: f64,
    #[serde(default = "defaults::max_power_dbm")]
    pub max_power_dbm: f64,
    #[serde(default = "defaults::l_max_bits")]
    pub l_max_bits: u64,
    #[serde(default = "defaults::noise_psd_dbm_hz")]
    pub noise_psd_dbm_hz: f64,
    #[serde(default = "defaults::noise_figure_db")]
    pub noise_figure_db: f64,
    #[serde(default = "defaults::antenna_gain_db")]
    pub antenna_gain_db: f64,
    #[serde(default = "defaults::penetration_loss_db")]
    pub penetration_loss_db: f64,
    /// Power lattice size for every device; 1 is binary power.
    #[serde(default = "one_u32")]
    pub power_level: u32,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

fn two() -> usize {
    2
}

fn one_u32() -> u32 {
    1
}

mod defaults {
    pub fn area_side_m() -> f64 {
        1000.0
    }
    pub fn carrier() -> String {
        "900MHz".into()
    }
    pub fn total_bandwidth_hz() -> f64 {
        200e3
    }
    pub fn max_power_dbm() -> f64 {
        23.0
    }
    pub fn l_max_bits() -> u64 {
        100_000
    }
    pub fn noise_psd_dbm_hz() -> f64 {
        -174.0
    }
    pub fn noise_figure_db() -> f64 {
        5.0
    }
    pub fn antenna_gain_db() -> f64 {
        -4.0
    }
    pub fn penetration_loss_db() -> f64 {
        10.0
    }
}

impl ScenarioParams {
    /// Default deployment with the given sizes.
    pub fn new(num_devices: usize, num_slots: usize, num_frames: usize, group_cap: usize) -> Self {
        Self {
            num_devices,
            num_slots,
            num_frames,
            group_cap,
            area_side_m: defaults::area_side_m(),
            carrier: defaults::carrier(),
            total_bandwidth_hz: defaults::total_bandwidth_hz(),
            max_power_dbm: defaults::max_power_dbm(),
            l_max_bits: defaults::l_max_bits(),
            noise_psd_dbm_hz: defaults::noise_psd_dbm_hz(),
            noise_figure_db: defaults::noise_figure_db(),
            antenna_gain_db: defaults::antenna_gain_db(),
            penetration_loss_db: defaults::penetration_loss_db(),
            power_level: 1,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn rb_bandwidth_hz(&self) -> f64 {
        self.total_bandwidth_hz / self.num_slots as f64
    }

    /// Path loss in dB at `distance_km`, antenna gain and penetration loss included.
    pub fn path_loss_db(&self, distance_km: f64) -> f64 {
        120.9 + 37.6 * distance_km.log10() + self.antenna_gain_db + self.penetration_loss_db
    }

    /// Noise power over one RB in dBm, noise figure included.
    pub fn noise_dbm(&self) -> f64 {
        self.noise_psd_dbm_hz + 10.0 * self.rb_bandwidth_hz().log10() + self.noise_figure_db
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_devices == 0 || self.num_slots == 0 || self.num_frames == 0 {
            return Err(Error::param(
                "num_devices/num_slots/num_frames",
                "must be >= 1",
            ));
        }
        if self.group_cap == 0 || self.group_cap > self.num_devices {
            return Err(Error::param(
                "group_cap",
                format!("must lie in 1..={}", self.num_devices),
            ));
        }
        if !(self.total_bandwidth_hz.is_finite() && self.total_bandwidth_hz > 0.0) {
            return Err(Error::param("total_bandwidth_hz", "must be positive"));
        }
        if !(self.area_side_m.is_finite() && self.area_side_m > 0.0) {
            return Err(Error::param("area_side_m", "must be positive"));
        }
        if self.power_level == 0 {
            return Err(Error::param("power_level", "must be >= 1"));
        }
        for (name, v) in [
            ("max_power_dbm", self.max_power_dbm),
            ("noise_psd_dbm_hz", self.noise_psd_dbm_hz),
            ("noise_figure_db", self.noise_figure_db),
            ("antenna_gain_db", self.antenna_gain_db),
            ("penetration_loss_db", self.penetration_loss_db),
        ] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        Ok(())
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Unit-mean exponential draw by inversion; value-stable across rand releases.
pub(crate) fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    -(-u).ln_1p()
}

/// Draws an instance. Positions depend only on (seed, device), demands and
/// fading only on (seed, device, frame).
pub fn generate_instance(params: &ScenarioParams) -> Result<Instance> {
    params.validate()?;
    let (m, n, k) = (params.num_devices, params.num_slots, params.num_frames);
    let side = params.area_side_m;
    let center = (side / 2.0, side / 2.0);
    let noise_w = dbm_to_watts(params.noise_dbm());
    let max_energy = dbm_to_watts(params.max_power_dbm);

    let mut devices = Vec::with_capacity(m);
    let mut demands = Vec::with_capacity(m);
    let mut channels = ChannelTensor::zeros(m, n, k);
    for i in 0..m {
        let mut pos_rng = rng::stream(&[params.seed, STREAM_POSITION, i as u64]);
        let position = (
            pos_rng.random::<f64>() * side,
            pos_rng.random::<f64>() * side,
        );
        let dist_m = (position.0 - center.0)
            .hypot(position.1 - center.1)
            .max(MIN_DISTANCE_M);
        let mean_gain = 10f64.powf(-params.path_loss_db(dist_m / 1000.0) / 10.0) / noise_w;
        devices.push(DeviceProfile {
            id: i,
            max_energy,
            power_level: params.power_level,
            position,
        });

        let mut row = Vec::with_capacity(k);
        for t in 0..k {
            let mut r = rng::stream(&[params.seed, STREAM_FRAME, i as u64, t as u64]);
            let bits = r.random_range(0..=params.l_max_bits);
            let arrival = r.random_range(1..=n);
            let deadline = r.random_range(arrival + 1..=n + 1);
            row.push(FrameDemand::new(bits as f64, arrival, deadline));
            for j in 0..n {
                let mut fading = exp1(&mut r);
                // inversion can return exactly 0 for u == 0
                if fading == 0.0 {
                    fading = f64::MIN_POSITIVE;
                }
                channels.set(i, j, t, fading * mean_gain);
            }
        }
        demands.push(row);
    }
    let instance_params = InstanceParams {
        num_devices: m,
        num_slots: n,
        num_frames: k,
        group_cap: params.group_cap,
        rb_bandwidth_hz: params.rb_bandwidth_hz(),
        seed: Some(params.seed),
    };
    Instance::from_parts(instance_params, devices, demands, channels)
}

/// On-disk layout of an instance. Gains are indexed `[device][slot][frame]`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    params: InstanceParams,
    devices: Vec<DeviceProfile>,
    demands: Vec<Vec<FrameDemand>>,
    gains: Vec<Vec<Vec<f64>>>,
}

pub fn instance_to_json(instance: &Instance) -> String {
    let file = InstanceFile {
        params: instance.params().clone(),
        devices: instance.devices().to_vec(),
        demands: instance.demands().to_vec(),
        gains: instance.channels().to_nested(),
    };
    serde_json::to_string_pretty(&file).expect("instance serializes")
}

pub fn instance_from_json(text: &str, origin: &Path) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let channels = ChannelTensor::from_nested(&file.gains)?;
    Instance::from_parts(file.params, file.devices, file.demands, channels)
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, instance_to_json(instance)).map_err(|e| Error::io(path, e))
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    instance_from_json(&text, path)
}
