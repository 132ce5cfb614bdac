use serde::{Deserialize, Serialize};

use crate::analysis::{Csi, LargeScale, LinkParams, ReceiverKind, Scaling, COHERENCE_SYMBOLS};
use crate::channel::{gen_multicell, MultiCellConfig};
use crate::detection::{LinkConfig, Modulation, Waveform};
use crate::error::{invalid, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// y = G b + η per subcarrier.
    Analytic,
    /// Full synthesis, dispersive channel and analysis.
    Waveform,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Waveform => "waveform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Rate,
    Ser,
}

/// How the power field is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerRule {
    /// `power_db` is 2P_d (or E^u under a scaling schedule).
    PerUser,
    /// `power_db` is the total of a cell, split equally among its users.
    PerCell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    /// One cell with D = diag(beta); the first U entries are used.
    Single { beta: Vec<f64> },
    /// Every cross-cell gain equal to `cross`, serving cell 0.
    Uniform { cells: usize, cross: f64 },
    /// Random hexagonal layout, redrawn per trial; serving cell 0 is the centre.
    Hexagonal {
        cells: usize,
        radius: f64,
        inner_radius: f64,
        pathloss_exp: f64,
        shadowing_db: f64,
    },
}

impl Geometry {
    pub fn is_multi(&self) -> bool {
        !matches!(self, Geometry::Single { .. })
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Geometry::Hexagonal { .. })
    }

    pub fn hexagonal() -> Self {
        let c = MultiCellConfig::default();
        Geometry::Hexagonal {
            cells: c.cells,
            radius: c.radius,
            inner_radius: c.inner_radius,
            pathloss_exp: c.pathloss_exp,
            shadowing_db: c.shadowing_db,
        }
    }

    /// Large-scale gains for `users` users; `stream` is only used by random layouts.
    pub fn large_scale(&self, users: usize, stream: &mut RngStream) -> Result<LargeScale> {
        match self {
            Geometry::Single { beta } => {
                if beta.len() < users {
                    return invalid(format!("geometry.beta has {} entries but U={users}", beta.len()));
                }
                Ok(LargeScale::Single(beta[..users].to_vec()))
            }
            Geometry::Uniform { cells, cross } => {
                if *cells == 0 || !(*cross >= 0.0) {
                    return invalid("geometry.uniform needs cells ≥ 1 and cross ≥ 0");
                }
                let beta = (0..*cells).map(|i| vec![if i == 0 { 1.0 } else { *cross }; users]).collect();
                Ok(LargeScale::Multi { beta, serving: 0 })
            }
            Geometry::Hexagonal { cells, radius, inner_radius, pathloss_exp, shadowing_db } => {
                let cfg = MultiCellConfig {
                    cells: *cells,
                    users,
                    radius: *radius,
                    inner_radius: *inner_radius,
                    pathloss_exp: *pathloss_exp,
                    shadowing_db: *shadowing_db,
                };
                let scene = gen_multicell(stream, &cfg)?;
                Ok(LargeScale::Multi { beta: scene.beta[0].clone(), serving: 0 })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    Antennas,
    PowerDb,
    Users,
    Taps,
    Cfo,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Antennas => "antennas",
            SweepVar::PowerDb => "power_db",
            SweepVar::Users => "users",
            SweepVar::Taps => "taps",
            SweepVar::Cfo => "cfo",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "antennas" => Ok(SweepVar::Antennas),
            "power_db" => Ok(SweepVar::PowerDb),
            "users" => Ok(SweepVar::Users),
            "taps" => Ok(SweepVar::Taps),
            "cfo" => Ok(SweepVar::Cfo),
            _ => invalid(format!("unknown sweep variable '{s}'")),
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, SweepVar::Antennas | SweepVar::Users | SweepVar::Taps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub var: SweepVar,
    pub values: Vec<f64>,
}

/// A second parameter; each value becomes its own output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "var", content = "values", rename_all = "snake_case")]
pub enum Series {
    Antennas(Vec<usize>),
    PowerDb(Vec<f64>),
    Scaling(Vec<Scaling>),
    Waveform(Vec<Waveform>),
}

impl Series {
    pub fn len(&self) -> usize {
        match self {
            Series::Antennas(v) => v.len(),
            Series::PowerDb(v) => v.len(),
            Series::Scaling(v) => v.len(),
            Series::Waveform(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// File-name label of entry `i`.
    pub fn label(&self, i: usize) -> String {
        match self {
            Series::Antennas(v) => format!("n{}", v[i]),
            Series::PowerDb(v) => format!("p{}db", v[i]).replace('-', "m").replace('.', "_"),
            Series::Scaling(v) => match v[i] {
                Scaling::None => "fixed".into(),
                Scaling::InvSqrtN => "inv_sqrt_n".into(),
                Scaling::InvN => "inv_n".into(),
            },
            Series::Waveform(v) => v[i].name().into(),
        }
    }

    /// The scenario with entry `i` applied and the series removed.
    pub fn apply(&self, s: &Scenario, i: usize) -> Scenario {
        let mut out = s.clone();
        out.series = None;
        match self {
            Series::Antennas(v) => out.antennas = v[i],
            Series::PowerDb(v) => out.power_db = v[i],
            Series::Scaling(v) => out.scaling = v[i],
            Series::Waveform(v) => out.waveform = v[i],
        }
        out
    }
}

fn default_subcarriers() -> usize {
    128
}
fn default_coherence() -> usize {
    COHERENCE_SYMBOLS
}
fn default_noise() -> f64 {
    1.0
}
fn default_overlap() -> usize {
    4
}
fn default_data_symbols() -> usize {
    16
}
fn default_power_rule() -> PowerRule {
    PowerRule::PerUser
}
fn default_scaling() -> Scaling {
    Scaling::None
}
fn default_waveform() -> Waveform {
    Waveform::Fbmc
}
fn default_modulation() -> Modulation {
    Modulation::Qam4
}

/// Everything needed to reproduce one experiment. Powers are in dB relative
/// to σ²_η (so 2P_d = 10^(power_db/10)·σ²_η / σ²_η with σ²_η = 1 by default).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub mode: Mode,
    pub experiment: Experiment,
    pub antennas: usize,
    pub users: usize,
    pub pilots: usize,
    #[serde(default = "default_subcarriers")]
    pub subcarriers: usize,
    #[serde(default = "default_coherence")]
    pub coherence: usize,
    pub power_db: f64,
    #[serde(default = "default_power_rule")]
    pub power_rule: PowerRule,
    #[serde(default = "default_scaling")]
    pub scaling: Scaling,
    #[serde(default = "default_noise")]
    pub noise_var: f64,
    pub geometry: Geometry,
    pub receivers: Vec<ReceiverKind>,
    pub csi: Vec<Csi>,
    #[serde(default = "default_waveform")]
    pub waveform: Waveform,
    pub taps: usize,
    #[serde(default = "default_overlap")]
    pub overlap: usize,
    #[serde(default)]
    pub cfo: f64,
    #[serde(default = "default_modulation")]
    pub modulation: Modulation,
    /// QAM data symbols per subcarrier and frame (waveform mode).
    #[serde(default = "default_data_symbols")]
    pub data_symbols: usize,
    pub sweep: Sweep,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Series>,
    pub trials: usize,
    pub seed: u64,
}

/// Smallest trial count accepted for rate experiments.
pub const MIN_RATE_TRIALS: usize = 100;

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)
            .map_err(|e| crate::Error::InvalidParameter(format!("scenario JSON: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let v = &self.sweep.values;
        if v.is_empty() {
            return invalid("sweep.values must not be empty");
        }
        if v.iter().any(|x| !x.is_finite()) {
            return invalid("sweep.values must be finite");
        }
        if v.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("sweep.values must be strictly increasing");
        }
        if self.sweep.var.is_integer() && v.iter().any(|x| x.fract() != 0.0 || *x < 1.0) {
            return invalid(format!("sweep over {} needs positive integers", self.sweep.var.name()));
        }
        if let Some(series) = &self.series {
            if series.is_empty() {
                return invalid("series.values must not be empty");
            }
        }
        if self.users == 0 {
            return invalid("users must be ≥ 1");
        }
        if self.antennas == 0 {
            return invalid("antennas must be ≥ 1");
        }
        if self.receivers.is_empty() {
            return invalid("receivers must not be empty");
        }
        if self.csi.is_empty() {
            return invalid("csi must not be empty");
        }
        if self.experiment == Experiment::Rate && self.trials < MIN_RATE_TRIALS {
            return invalid(format!("trials must be ≥ {MIN_RATE_TRIALS} for rate experiments, got {}", self.trials));
        }
        if self.trials == 0 {
            return invalid("trials must be ≥ 1");
        }
        if self.experiment == Experiment::Ser && self.mode != Mode::Waveform {
            return invalid("SER experiments run in waveform mode");
        }
        if self.taps == 0 {
            return invalid("taps must be ≥ 1");
        }
        if self.cfo.abs() > 0.5 {
            return invalid("cfo must satisfy |cfo| ≤ 0.5");
        }
        if self.geometry.is_multi() && self.receivers.contains(&ReceiverKind::Mmse) {
            return invalid("receivers: mmse is not modelled for multi-cell geometries");
        }
        let waveforms: Vec<Waveform> = match &self.series {
            Some(Series::Waveform(w)) => w.clone(),
            _ => vec![self.waveform],
        };
        if self.mode == Mode::Analytic && self.geometry.is_multi() && waveforms.contains(&Waveform::Ofdm) {
            return invalid("waveform: the analytic OFDM path is single-cell only");
        }
        if self.experiment == Experiment::Ser && self.csi.contains(&Csi::Imperfect) {
            return invalid("csi: SER experiments use perfect CSI");
        }
        // Every point must yield valid link parameters.
        for series in 0..self.series.as_ref().map_or(1, Series::len) {
            let s = match &self.series {
                Some(ser) => ser.apply(self, series),
                None => self.clone(),
            };
            for &x in v {
                let pt = s.at(x);
                let ls = pt.geometry.large_scale(pt.users, &mut RngStream::new(self.seed, 0))?;
                pt.link_params(ls)?;
                if self.mode == Mode::Waveform && !pt.pilots.is_power_of_two() {
                    return invalid("pilots must be a power of two in waveform mode");
                }
            }
        }
        Ok(())
    }

    /// The scenario at sweep value `x` (series already applied).
    pub fn at(&self, x: f64) -> Scenario {
        let mut s = self.clone();
        match self.sweep.var {
            SweepVar::Antennas => s.antennas = x as usize,
            SweepVar::PowerDb => s.power_db = x,
            SweepVar::Users => {
                s.users = x as usize;
                // Orthogonal training needs K ≥ U; Sylvester sequences need a power of two.
                s.pilots = s.pilots.max(s.users.next_power_of_two());
            }
            SweepVar::Taps => s.taps = x as usize,
            SweepVar::Cfo => s.cfo = x,
        }
        s
    }

    /// Reference power E (linear, relative to σ²) per user.
    pub fn user_power(&self) -> f64 {
        let total = 10f64.powf(self.power_db / 10.0) * self.noise_var;
        match self.power_rule {
            PowerRule::PerUser => total,
            PowerRule::PerCell => total / self.users as f64,
        }
    }

    /// Half-symbol power P_d after the scaling schedule.
    pub fn pd(&self) -> f64 {
        self.scaling.pd(self.user_power(), self.antennas)
    }

    pub fn link_params(&self, large_scale: LargeScale) -> Result<LinkParams> {
        let mut p = LinkParams::new(self.antennas, self.pilots, self.pd(), self.noise_var, large_scale)?;
        p.subcarriers = self.subcarriers;
        p.coherence = self.coherence;
        p.validate()?;
        Ok(p)
    }

    pub fn link_config(&self, params: LinkParams, csi: Csi) -> LinkConfig {
        LinkConfig {
            waveform: self.waveform,
            params,
            csi,
            taps: self.taps,
            overlap: self.overlap,
            cfo: self.cfo,
            modulation: self.modulation,
            data_symbols: self.data_symbols,
        }
    }

    /// Scenarios with each series entry applied, with their file labels.
    pub fn expand(&self) -> Vec<(Option<String>, Scenario)> {
        match &self.series {
            None => vec![(None, self.clone())],
            Some(series) => (0..series.len()).map(|i| (Some(series.label(i)), series.apply(self, i))).collect(),
        }
    }
}
