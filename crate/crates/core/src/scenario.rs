//! Ground truth, simulated scans and the two built-in scenarios.
//!
//! Truth moves with noiseless constant velocity; the filters assume a
//! noisy constant-velocity model. Scans are drawn from a ChaCha8 generator
//! seeded per run, with stream `s` reserved for sensor `s`.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{Gaussian, GaussianMixture};
use crate::glmb::{BirthComponent, BirthModel, MeasurementScan, MotionModel, Region, SensorModel};
use crate::rfs::Label;

/// One straight-line truth trajectory, alive for `birth ≤ k < death`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthTrack {
    pub id: u32,
    pub birth: u32,
    /// `None` means alive until the end of the run.
    #[serde(default)]
    pub death: Option<u32>,
    /// `[px, py, vx, vy]` at the birth step.
    pub initial: [f64; 4],
}

impl TruthTrack {
    pub fn alive_at(&self, step: u32) -> bool {
        step >= self.birth && self.death.is_none_or(|d| step < d)
    }

    pub fn state_at(&self, step: u32, dt: f64) -> [f64; 4] {
        let t = (step - self.birth) as f64 * dt;
        let [px, py, vx, vy] = self.initial;
        [px + vx * t, py + vy * t, vx, vy]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionParams {
    pub sigma_v: f64,
    pub survival: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorParams {
    pub detection: f64,
    pub clutter_rate: f64,
    pub sigma: f64,
}

/// Gaussian birth term with diagonal covariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirthParams {
    pub existence: f64,
    pub mean: [f64; 4],
    /// Standard deviations of `[px, py, vx, vy]`.
    pub std: [f64; 4],
}

/// Everything needed to simulate and track one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub region: Region,
    /// Steps run `1..=duration`.
    pub duration: u32,
    #[serde(default = "one")]
    pub dt: f64,
    pub seed: u64,
    pub motion: MotionParams,
    pub sensors: Vec<SensorParams>,
    pub births: Vec<BirthParams>,
    pub tracks: Vec<TruthTrack>,
}

fn one() -> f64 {
    1.0
}

/// Truth at one step: `(track id, state)` for every live track.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthStep {
    pub step: u32,
    pub targets: Vec<(u32, DVector<f64>)>,
}

impl TruthStep {
    pub fn positions(&self) -> Vec<[f64; 2]> {
        self.targets.iter().map(|(_, x)| [x[0], x[1]]).collect()
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.region.area() > 0.0) {
            return bad("region has no area".into());
        }
        if self.duration == 0 {
            return bad("duration must be at least one step".into());
        }
        if !(self.dt > 0.0) {
            return bad(format!("time step {} must be positive", self.dt));
        }
        if self.sensors.is_empty() {
            return bad("at least one sensor is required".into());
        }
        let mut ids: Vec<u32> = self.tracks.iter().map(|t| t.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return bad("truth track ids must be distinct".into());
        }
        for t in &self.tracks {
            if t.birth == 0 || t.birth > self.duration {
                return bad(format!("track {} is born outside 1..={}", t.id, self.duration));
            }
            if let Some(d) = t.death {
                if d <= t.birth {
                    return bad(format!("track {} dies at {d}, not after its birth {}", t.id, t.birth));
                }
            }
            if !self.region.contains(t.initial[0], t.initial[1]) {
                return bad(format!("track {} starts outside the region", t.id));
            }
        }
        for b in &self.births {
            if b.std.iter().any(|s| !(*s > 0.0)) {
                return bad("birth standard deviations must be positive".into());
            }
        }
        self.motion_model()?;
        self.sensor_models()?;
        self.birth_model()?;
        Ok(())
    }

    pub fn motion_model(&self) -> Result<MotionModel> {
        MotionModel::constant_velocity(self.dt, self.motion.sigma_v, self.motion.survival)
    }

    pub fn sensor_models(&self) -> Result<Vec<SensorModel>> {
        self.sensors
            .iter()
            .map(|s| SensorModel::position(s.detection, s.clutter_rate, self.region, s.sigma))
            .collect()
    }

    /// Birth model with placeholder labels; filters relabel it per step.
    pub fn birth_model(&self) -> Result<BirthModel> {
        let components = self
            .births
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let cov = DMatrix::from_diagonal(&DVector::from_iterator(4, b.std.iter().map(|s| s * s)));
                let g = Gaussian::new(DVector::from_row_slice(&b.mean), cov)?;
                Ok(BirthComponent {
                    label: Label::new(0, i as u32),
                    existence: b.existence,
                    density: Arc::new(GaussianMixture::single(g)),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        BirthModel::new(components)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

/// Truth for steps `1..=duration`. Deterministic: the truth has no noise,
/// the seed is accepted for interface symmetry with the scans.
pub fn generate_truth(config: &ScenarioConfig, _seed: u64) -> Vec<TruthStep> {
    (1..=config.duration)
        .map(|step| TruthStep {
            step,
            targets: config
                .tracks
                .iter()
                .filter(|t| t.alive_at(step))
                .map(|t| (t.id, DVector::from_row_slice(&t.state_at(step, config.dt))))
                .collect(),
        })
        .collect()
}

/// Generator for sensor `sensor` in the run seeded with `seed`.
pub fn sensor_rng(seed: u64, sensor: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sensor as u64);
    rng
}

/// One scan: independent detections with Gaussian noise plus Poisson
/// clutter uniform over the region. Points are shuffled and anything
/// outside the region is discarded.
pub fn generate_scan(
    step: u32,
    states: &[DVector<f64>],
    sensor: &SensorModel,
    rng: &mut impl Rng,
) -> MeasurementScan {
    let noise = sensor
        .noise
        .clone()
        .cholesky()
        .map(|c| c.l())
        .unwrap_or_else(|| DMatrix::zeros(sensor.noise.nrows(), sensor.noise.ncols()));
    let zdim = sensor.observation.nrows();
    let mut points = Vec::new();
    for x in states {
        if rng.random::<f64>() < sensor.detection {
            let e = DVector::from_iterator(zdim, (0..zdim).map(|_| rng.sample::<f64, _>(StandardNormal)));
            points.push(&sensor.observation * x + &noise * e);
        }
    }
    if sensor.clutter_rate > 0.0 {
        let count = Poisson::new(sensor.clutter_rate)
            .map(|p| p.sample(rng) as usize)
            .unwrap_or(0);
        let r = sensor.region;
        for _ in 0..count {
            points.push(DVector::from_vec(vec![
                rng.random_range(r.x[0]..r.x[1]),
                rng.random_range(r.y[0]..r.y[1]),
            ]));
        }
    }
    points.retain(|z| sensor.region.contains(z[0], z[1]));
    points.shuffle(rng);
    MeasurementScan { step, points }
}

/// Scans of every sensor for a whole run: `scans[sensor][k]` is step `k+1`.
pub fn generate_scans(
    config: &ScenarioConfig,
    truth: &[TruthStep],
    seed: u64,
) -> Result<Vec<Vec<MeasurementScan>>> {
    config
        .sensor_models()?
        .iter()
        .enumerate()
        .map(|(s, sensor)| {
            let mut rng = sensor_rng(seed, s);
            Ok(truth
                .iter()
                .map(|t| {
                    let states: Vec<DVector<f64>> = t.targets.iter().map(|(_, x)| x.clone()).collect();
                    generate_scan(t.step, &states, sensor, &mut rng)
                })
                .collect())
        })
        .collect()
}

const REGION: Region = Region {
    x: [0.0, 10_000.0],
    y: [0.0, 10_000.0],
};

const MOTION: MotionParams = MotionParams {
    sigma_v: 5.0,
    survival: 0.98,
};

const SENSOR: SensorParams = SensorParams {
    detection: 0.9,
    clutter_rate: 15.0,
    sigma: 14.0,
};

/// Birth velocity spread. The trajectories move at 150 to 225 m/s, far
/// outside a 20 m/s spread around zero velocity, so new tracks could
/// never be confirmed with it.
pub const BIRTH_VELOCITY_STD: f64 = 200.0;

fn birth(px: f64, py: f64) -> BirthParams {
    BirthParams {
        existence: 0.06,
        mean: [px, py, 0.0, 0.0],
        std: [100.0, 100.0, BIRTH_VELOCITY_STD, BIRTH_VELOCITY_STD],
    }
}

/// Four straight tracks in the 10 km square: two cross at (4000, 2200)
/// at step 5, three meet at (6000, 4900) at step 20.
pub fn scenario1() -> ScenarioConfig {
    ScenarioConfig {
        name: "scenario1".into(),
        region: REGION,
        duration: 40,
        dt: 1.0,
        seed: 1,
        motion: MOTION,
        sensors: vec![SENSOR, SENSOR],
        births: vec![
            birth(3500.0, 1500.0),
            birth(4500.0, 1500.0),
            birth(3150.0, 4900.0),
            birth(6050.0, 7150.0),
        ],
        tracks: vec![
            TruthTrack {
                id: 1,
                birth: 1,
                death: None,
                initial: [4000.0 - 4.0 * 2000.0 / 15.0, 1480.0, 2000.0 / 15.0, 180.0],
            },
            TruthTrack {
                id: 2,
                birth: 1,
                death: Some(25),
                initial: [4500.0, 1500.0, -125.0, 175.0],
            },
            TruthTrack {
                id: 3,
                birth: 1,
                death: Some(35),
                initial: [3150.0, 4900.0, 150.0, 0.0],
            },
            TruthTrack {
                id: 4,
                birth: 8,
                death: None,
                initial: [6050.0, 7150.0, -50.0 / 12.0, -187.5],
            },
        ],
    }
}

/// Four tracks inside a 500 m band moving in parallel: two of them cross
/// the central track and later die, one is born mid-run next to it.
pub fn scenario2() -> ScenarioConfig {
    ScenarioConfig {
        name: "scenario2".into(),
        region: REGION,
        duration: 40,
        dt: 1.0,
        seed: 2,
        motion: MOTION,
        sensors: vec![SENSOR, SENSOR],
        births: vec![
            birth(1000.0, 5000.0),
            birth(1000.0, 5250.0),
            birth(1000.0, 4750.0),
            birth(2650.0, 5150.0),
        ],
        tracks: vec![
            TruthTrack {
                id: 1,
                birth: 1,
                death: None,
                initial: [1000.0, 5000.0, 150.0, 0.0],
            },
            TruthTrack {
                id: 2,
                birth: 1,
                death: Some(30),
                initial: [1000.0, 5250.0, 150.0, -12.5],
            },
            TruthTrack {
                id: 3,
                birth: 1,
                death: Some(35),
                initial: [1000.0, 4750.0, 150.0, 10.0],
            },
            TruthTrack {
                id: 4,
                birth: 10,
                death: None,
                initial: [2650.0, 5150.0, 150.0, -2.0],
            },
        ],
    }
}

/// Built-in scenario by name.
pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    match name {
        "scenario1" => Some(scenario1()),
        "scenario2" => Some(scenario2()),
        _ => None,
    }
}
