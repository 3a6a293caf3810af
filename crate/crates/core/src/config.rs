//! Run configuration shared by the verification suites and the CLI.

use crate::error::{Error, Result};
use crate::grids::GridSpec1D;
use crate::representations::{LatticeParams, ReprParams};
use crate::special::ThetaTruncation;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Flat configuration; every key can be set from a JSON file or a flag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub hbar: f64,
    pub kappa: f64,
    pub m: u32,
    /// Line domain `[−L, L)` with `n` nodes.
    pub line_l: f64,
    pub line_n: usize,
    /// Plane domain `[−Lx, Lx) × [−Ly, Ly)`.
    pub plane_lx: f64,
    pub plane_ly: f64,
    pub plane_nx: usize,
    pub plane_ny: usize,
    pub torus_nu: usize,
    pub torus_nv: usize,
    pub ntrunc: usize,
    pub theta_eps: f64,
    pub seed: u64,
    /// Overrides keyed by check name (`zak.intertwining`) or class
    /// (`intertwining`).
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            kappa: 1.0,
            m: 1,
            line_l: 8.0,
            line_n: 2048,
            plane_lx: 6.0,
            plane_ly: 6.0,
            plane_nx: 256,
            plane_ny: 256,
            torus_nu: 128,
            torus_nv: 128,
            ntrunc: 16,
            theta_eps: 1e-14,
            seed: 42,
            tolerances: BTreeMap::new(),
        }
    }
}

fn bad(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| bad(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Sets one key from its textual value, as given on the command line.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| bad(format!("cannot parse {key}={value}")))
        }
        match key {
            "hbar" => self.hbar = parse(key, value)?,
            "kappa" => self.kappa = parse(key, value)?,
            "m" => self.m = parse(key, value)?,
            "line_l" => self.line_l = parse(key, value)?,
            "line_n" => self.line_n = parse(key, value)?,
            "plane_lx" => self.plane_lx = parse(key, value)?,
            "plane_ly" => self.plane_ly = parse(key, value)?,
            "plane_nx" => self.plane_nx = parse(key, value)?,
            "plane_ny" => self.plane_ny = parse(key, value)?,
            "torus_nu" => self.torus_nu = parse(key, value)?,
            "torus_nv" => self.torus_nv = parse(key, value)?,
            "ntrunc" => self.ntrunc = parse(key, value)?,
            "theta_eps" => self.theta_eps = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            _ => return Err(bad(format!("unknown config key {key}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("hbar", self.hbar),
            ("kappa", self.kappa),
            ("line_l", self.line_l),
            ("plane_lx", self.plane_lx),
            ("plane_ly", self.plane_ly),
            ("theta_eps", self.theta_eps),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(format!("{k} must be positive, got {v}")));
            }
        }
        let counts = [
            ("m", self.m as usize),
            ("line_n", self.line_n),
            ("plane_nx", self.plane_nx),
            ("plane_ny", self.plane_ny),
            ("torus_nu", self.torus_nu),
            ("torus_nv", self.torus_nv),
            ("ntrunc", self.ntrunc),
        ];
        for (k, v) in counts {
            if v == 0 {
                return Err(bad(format!("{k} must be positive")));
            }
        }
        if self.line_n < 16 || self.plane_nx < 16 || self.plane_ny < 16 {
            return Err(bad("grids need at least 16 nodes per axis".into()));
        }
        if self.theta_eps >= 1e-6 {
            return Err(bad(format!("theta_eps must be below 1e-6, got {}", self.theta_eps)));
        }
        // Zak grid compatibility: samples per unit must be a multiple of nu
        let per_unit = self.line_n as f64 / (2.0 * self.line_l);
        let spu = per_unit.round();
        if (per_unit - spu).abs() > 1e-9 * per_unit || spu as usize % self.torus_nu != 0 {
            return Err(bad(format!(
                "line sampling of {per_unit} per unit is not a multiple of torus_nu={}",
                self.torus_nu
            )));
        }
        for (k, v) in &self.tolerances {
            if !(*v >= 0.0) {
                return Err(bad(format!("tolerance {k} must be non-negative")));
            }
        }
        Ok(())
    }

    pub fn repr(&self) -> Result<ReprParams> {
        ReprParams::new(self.hbar, self.kappa)
    }

    pub fn lattice(&self) -> Result<LatticeParams> {
        LatticeParams::new(self.m, self.kappa)
    }

    pub fn line_grid(&self) -> Result<GridSpec1D> {
        GridSpec1D::centered(self.line_l, self.line_n)
    }

    pub fn plane_grids(&self) -> Result<(GridSpec1D, GridSpec1D)> {
        Ok((
            GridSpec1D::centered(self.plane_lx, self.plane_nx)?,
            GridSpec1D::centered(self.plane_ly, self.plane_ny)?,
        ))
    }

    pub fn theta_truncation(&self) -> Result<ThetaTruncation> {
        ThetaTruncation::new(self.m, self.kappa, self.theta_eps)
    }

    /// Overridden tolerance for a check, by full name first, then class.
    pub fn tolerance(&self, name: &str, class: &str, default: f64) -> f64 {
        self.tolerances
            .get(name)
            .or_else(|| self.tolerances.get(class))
            .copied()
            .unwrap_or(default)
    }
}
