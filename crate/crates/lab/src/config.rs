//! Run configuration as flat `key = value` text, units spelled out in the keys.

use std::path::PathBuf;
use std::str::FromStr;

use ini::Ini;

use crate::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Oracle,
    OracleLattice,
    Spectrum,
    Lattice,
    Stats(StatsVerb),
    Shape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsVerb {
    Poisson,
    Minami,
    Wegner,
    Equilibrium,
    Shape,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Oracle => "oracle",
            Command::OracleLattice => "oracle-lattice",
            Command::Spectrum => "spectrum",
            Command::Lattice => "lattice",
            Command::Stats(StatsVerb::Poisson) => "stats-poisson",
            Command::Stats(StatsVerb::Minami) => "stats-minami",
            Command::Stats(StatsVerb::Wegner) => "stats-wegner",
            Command::Stats(StatsVerb::Equilibrium) => "stats-equilibrium",
            Command::Stats(StatsVerb::Shape) => "stats-shape",
            Command::Shape => "shape",
        }
    }
}

impl FromStr for Command {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, LabError> {
        Ok(match s {
            "oracle" => Command::Oracle,
            "oracle-lattice" => Command::OracleLattice,
            "spectrum" => Command::Spectrum,
            "lattice" => Command::Lattice,
            "stats-poisson" => Command::Stats(StatsVerb::Poisson),
            "stats-minami" => Command::Stats(StatsVerb::Minami),
            "stats-wegner" => Command::Stats(StatsVerb::Wegner),
            "stats-equilibrium" => Command::Stats(StatsVerb::Equilibrium),
            "stats-shape" => Command::Stats(StatsVerb::Shape),
            "shape" => Command::Shape,
            other => return Err(LabError::Config(format!("unknown command '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub master_seed: u64,
    pub seed_start: u64,
    pub seed_count: u64,
    /// 0 selects every available core.
    pub workers: usize,
    pub out_dir: PathBuf,
    pub length: f64,
    pub scale: f64,
    pub center: f64,
    pub half_width: f64,
    pub lambda_tol: Option<f64>,
    pub match_tol: f64,
    pub step: f64,
    pub mesh: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_points: usize,
    /// Sample count for samplers and histogram runs.
    pub samples: usize,
    pub t_max: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Spectrum,
            master_seed: 1,
            seed_start: 0,
            seed_count: 10,
            workers: 0,
            out_dir: PathBuf::from("out"),
            length: 400.0,
            scale: 1.0,
            center: 1.0,
            half_width: 1.0,
            lambda_tol: None,
            match_tol: 1e-3,
            step: 0.01,
            mesh: 1e-3,
            lambda_min: -2.0,
            lambda_max: 10.0,
            lambda_points: 25,
            samples: 1000,
            t_max: 100.0,
        }
    }
}

fn f(x: f64) -> String {
    format!("{x:?}")
}

impl RunConfig {
    /// Keys in file order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("command", self.command.as_str().to_string()),
            ("master_seed", self.master_seed.to_string()),
            ("seed_start", self.seed_start.to_string()),
            ("seed_count", self.seed_count.to_string()),
            ("workers", self.workers.to_string()),
            ("out_dir", self.out_dir.display().to_string()),
            ("L_time_units", f(self.length)),
            ("E_scale", f(self.scale)),
            ("center_energy_units", f(self.center)),
            ("h_mean_spacings", f(self.half_width)),
            ("lambda_tol_energy_units", self.lambda_tol.map(f).unwrap_or_default()),
            ("match_tol_radians", f(self.match_tol)),
            ("step_time_units", f(self.step)),
            ("mesh_time_units", f(self.mesh)),
            ("lambda_min_energy_units", f(self.lambda_min)),
            ("lambda_max_energy_units", f(self.lambda_max)),
            ("lambda_points", self.lambda_points.to_string()),
            ("samples", self.samples.to_string()),
            ("t_max_time_units", f(self.t_max)),
        ]
    }

    pub fn to_text(&self) -> String {
        let mut ini = Ini::new();
        for (k, v) in self.entries() {
            ini.with_general_section().set(k, v);
        }
        let mut out = Vec::new();
        ini.write_to(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("utf-8")
    }

    /// Parses `text`; keys absent from it keep their defaults.
    pub fn from_text(text: &str) -> Result<Self, LabError> {
        let ini = Ini::load_from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        let mut cfg = Self::default();
        let general = ini.general_section();
        for (k, v) in general.iter() {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), LabError> {
        fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, LabError> {
            v.trim().parse().map_err(|_| LabError::Config(format!("bad value '{v}' for {key}")))
        }
        let v = value.trim();
        match key {
            "command" => self.command = v.parse()?,
            "master_seed" => self.master_seed = parse(key, v)?,
            "seed_start" => self.seed_start = parse(key, v)?,
            "seed_count" => self.seed_count = parse(key, v)?,
            "workers" => self.workers = parse(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "L_time_units" => self.length = parse(key, v)?,
            "E_scale" => self.scale = parse(key, v)?,
            "center_energy_units" => self.center = parse(key, v)?,
            "h_mean_spacings" => self.half_width = parse(key, v)?,
            "lambda_tol_energy_units" => self.lambda_tol = if v.is_empty() { None } else { Some(parse(key, v)?) },
            "match_tol_radians" => self.match_tol = parse(key, v)?,
            "step_time_units" => self.step = parse(key, v)?,
            "mesh_time_units" => self.mesh = parse(key, v)?,
            "lambda_min_energy_units" => self.lambda_min = parse(key, v)?,
            "lambda_max_energy_units" => self.lambda_max = parse(key, v)?,
            "lambda_points" => self.lambda_points = parse(key, v)?,
            "samples" => self.samples = parse(key, v)?,
            "t_max_time_units" => self.t_max = parse(key, v)?,
            other => return Err(LabError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |m: &str| Err(LabError::Config(m.into()));
        if !(self.length > 0.0) {
            return bad("L_time_units must be positive");
        }
        if !(self.scale >= 1.0) {
            return bad("E_scale must be at least 1");
        }
        if !(self.half_width > 0.0) {
            return bad("h_mean_spacings must be positive");
        }
        if !(self.step > 0.0 && self.mesh > 0.0 && self.match_tol > 0.0) {
            return bad("step, mesh and match tolerance must be positive");
        }
        if matches!(self.lambda_tol, Some(t) if !(t > 0.0)) {
            return bad("lambda_tol_energy_units must be positive");
        }
        if !(self.lambda_max > self.lambda_min) || self.lambda_points < 2 {
            return bad("lambda grid needs lambda_max > lambda_min and at least 2 points");
        }
        if !(self.t_max > 0.0) {
            return bad("t_max_time_units must be positive");
        }
        Ok(())
    }
}
