//! Experiment configuration with units spelled out in the field names.

use std::path::{Path, PathBuf};

use irs_covert::{Geometry, Position, SystemParams};
use serde::{Deserialize, Serialize};

use crate::algorithms::Algorithm;
use crate::error::{HarnessError, Result};

/// `10^(x/10)`
pub fn from_db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// Node positions (metres) and path-loss exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub alice_m: [f64; 3],
    pub irs_m: [f64; 3],
    pub bob_m: [f64; 3],
    pub willie_m: [f64; 3],
    pub alpha_ar: f64,
    pub alpha_ab: f64,
    pub alpha_aw: f64,
    pub alpha_rb: f64,
    pub alpha_rw: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let g = Geometry::reference();
        let p = |q: Position| [q.x, q.y, q.z];
        Self {
            alice_m: p(g.alice),
            irs_m: p(g.irs),
            bob_m: p(g.bob),
            willie_m: p(g.willie),
            alpha_ar: g.alpha_ar,
            alpha_ab: g.alpha_ab,
            alpha_aw: g.alpha_aw,
            alpha_rb: g.alpha_rb,
            alpha_rw: g.alpha_rw,
        }
    }
}

impl GeometryConfig {
    pub fn to_geometry(&self) -> Geometry {
        let p = |a: [f64; 3]| Position::new(a[0], a[1], a[2]);
        Geometry {
            alice: p(self.alice_m),
            irs: p(self.irs_m),
            bob: p(self.bob_m),
            willie: p(self.willie_m),
            alpha_ar: self.alpha_ar,
            alpha_ab: self.alpha_ab,
            alpha_aw: self.alpha_aw,
            alpha_rb: self.alpha_rb,
            alpha_rw: self.alpha_rw,
        }
    }
}

/// Link budget in dBm / dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub p_max_dbm: f64,
    pub sigma_b2_dbm: f64,
    pub sigma_w2_dbm: f64,
    pub epsilon: f64,
    pub blocklength: u32,
    pub n_x: usize,
    pub n_z: usize,
    pub rician_k_db: f64,
    pub beta0_db: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            p_max_dbm: 36.0,
            sigma_b2_dbm: -80.0,
            sigma_w2_dbm: -80.0,
            epsilon: 0.1,
            blocklength: 100,
            n_x: 5,
            n_z: 10,
            rician_k_db: 5.0,
            beta0_db: -30.0,
        }
    }
}

impl ParamsConfig {
    pub fn to_params(&self) -> SystemParams {
        SystemParams {
            p_max: from_db(self.p_max_dbm - 30.0),
            blocklength: self.blocklength,
            sigma_b2: from_db(self.sigma_b2_dbm - 30.0),
            sigma_w2: from_db(self.sigma_w2_dbm - 30.0),
            epsilon: self.epsilon,
            n_x: self.n_x,
            n_z: self.n_z,
            rician_k: from_db(self.rician_k_db),
            beta0: from_db(self.beta0_db),
        }
    }
}

/// The swept quantity and its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Sweep {
    /// Total element count `N`; each must be a multiple of `n_x`.
    Elements(Vec<usize>),
    Epsilon(Vec<f64>),
    /// IRS x coordinate (m); y and z stay as configured.
    IrsX(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Elements,
    Epsilon,
    IrsX,
}

impl Sweep {
    pub fn kind(&self) -> SweepKind {
        match self {
            Sweep::Elements(_) => SweepKind::Elements,
            Sweep::Epsilon(_) => SweepKind::Epsilon,
            Sweep::IrsX(_) => SweepKind::IrsX,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Sweep::Elements(v) => v.len(),
            Sweep::Epsilon(v) | Sweep::IrsX(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, i: usize) -> f64 {
        match self {
            Sweep::Elements(v) => v[i] as f64,
            Sweep::Epsilon(v) | Sweep::IrsX(v) => v[i],
        }
    }

    /// Default values for a subcommand when the config names no sweep.
    pub fn default_for(kind: SweepKind) -> Self {
        match kind {
            SweepKind::Elements => Sweep::Elements(vec![25, 50, 75, 100]),
            SweepKind::Epsilon => Sweep::Epsilon(vec![0.01, 0.05, 0.1, 0.2]),
            SweepKind::IrsX => Sweep::IrsX(vec![40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    pub params: ParamsConfig,
    pub sweep: Option<Sweep>,
    pub trials: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub output_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            params: ParamsConfig::default(),
            sweep: None,
            trials: 100,
            seed: 0,
            algorithms: Algorithm::ALL.to_vec(),
            output_path: None,
        }
    }
}

/// One sweep value resolved into concrete inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    pub geometry: Geometry,
    pub params: SystemParams,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| HarnessError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("algorithm list is empty".into());
        }
        if let Some(sweep) = &self.sweep {
            if sweep.is_empty() {
                return bad("sweep list is empty".into());
            }
        }
        for point in self.points()? {
            point.params.validate()?;
            point.geometry.path_gains(point.params.beta0)?;
        }
        Ok(())
    }

    /// Sweep values in configuration order; a config without a sweep is a
    /// single point at its own parameters.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        let base_geometry = self.geometry.to_geometry();
        let base_params = self.params.to_params();
        let Some(sweep) = &self.sweep else {
            return Ok(vec![SweepPoint {
                index: 0,
                value: base_params.n_elements() as f64,
                geometry: base_geometry,
                params: base_params,
            }]);
        };
        (0..sweep.len())
            .map(|index| {
                let (mut geometry, mut params) = (base_geometry, base_params);
                match sweep {
                    Sweep::Elements(ns) => {
                        let n = ns[index];
                        if n == 0 || params.n_x == 0 || n % params.n_x != 0 {
                            return Err(HarnessError::Config(format!(
                                "N = {n} is not a positive multiple of n_x = {}",
                                params.n_x
                            )));
                        }
                        params.n_z = n / params.n_x;
                    }
                    Sweep::Epsilon(e) => params.epsilon = e[index],
                    Sweep::IrsX(x) => geometry = geometry.with_irs_x(x[index]),
                }
                Ok(SweepPoint {
                    index,
                    value: sweep.value(index),
                    geometry,
                    params,
                })
            })
            .collect()
    }
}
