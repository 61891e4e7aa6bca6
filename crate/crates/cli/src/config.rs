//! JSON experiment configuration: defaults, validation, hashing.

use std::path::{Path, PathBuf};

use fracsub::bump::ThetaConvention;
use fracsub::discretization::{Grid1D, WeightField};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::Command;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub s: f64,
    pub alpha: f64,
    pub p: f64,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "T")]
    pub horizon: Horizon,
    pub q_spec: QSpec,
    pub bump: BumpSpec,
    pub theta_convention: ConventionSpec,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    /// Time shifts for `evolve`, rounded to the nearest multiple of `dt`.
    pub taus: Vec<f64>,
    pub uniqueness: UniquenessSpec,
    /// Radii scanned for the ratio bound `C`.
    pub ratio_resolution: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            s: 0.5,
            alpha: 0.5,
            p: 2.0,
            half_width: 1.0,
            n: 512,
            m: 512,
            horizon: Horizon::default(),
            q_spec: QSpec::default(),
            bump: BumpSpec::default(),
            theta_convention: ConventionSpec::Exact,
            tolerances: Tolerances::default(),
            seed: 0,
            output_dir: None,
            taus: vec![0.1, 0.2],
            uniqueness: UniquenessSpec::default(),
            ratio_resolution: 256,
        }
    }
}

/// `"auto"` (largest admissible horizon) or an explicit final time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Horizon {
    #[default]
    Auto,
    Fixed(f64),
}

impl Serialize for Horizon {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            Horizon::Auto => ser.serialize_str("auto"),
            Horizon::Fixed(t) => ser.serialize_f64(*t),
        }
    }
}

impl<'de> Deserialize<'de> for Horizon {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(de)? {
            Repr::Number(t) => Ok(Horizon::Fixed(t)),
            Repr::Text(s) if s == "auto" => Ok(Horizon::Auto),
            Repr::Text(s) => Err(serde::de::Error::custom(format!(
                "T must be \"auto\" or a number, got \"{s}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QSpec {
    /// Value of `q` on the floor interval.
    pub value: f64,
    /// Floor `q₀`; defaults to `value`.
    pub q0: Option<f64>,
    pub floor_interval: [f64; 2],
    /// Value of `q` outside the floor interval; defaults to `value`.
    pub outside: Option<f64>,
    /// `[x, q]` pairs, linearly interpolated and held constant beyond the ends; replaces `value`/`outside`.
    pub profile: Option<Vec<[f64; 2]>>,
}

impl Default for QSpec {
    fn default() -> Self {
        Self {
            value: 1.0,
            q0: None,
            floor_interval: [-0.5, 0.5],
            outside: None,
            profile: None,
        }
    }
}

impl QSpec {
    pub fn floor(&self) -> f64 {
        self.q0.unwrap_or(self.value)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if let Some(table) = &self.profile {
            return interpolate(table, x);
        }
        let [a, b] = self.floor_interval;
        if x > a && x < b {
            self.value
        } else {
            self.outside.unwrap_or(self.value)
        }
    }

    pub fn weight(&self, grid: &Grid1D) -> Result<WeightField, CliError> {
        let [a, b] = self.floor_interval;
        WeightField::new(grid, self.floor(), (a, b), |x| self.eval(x)).map_err(CliError::from)
    }
}

fn interpolate(table: &[[f64; 2]], x: f64) -> f64 {
    let first = table[0];
    let last = table[table.len() - 1];
    if x <= first[0] {
        return first[1];
    }
    if x >= last[0] {
        return last[1];
    }
    let j = table.partition_point(|r| r[0] <= x);
    let ([x0, y0], [x1, y1]) = (table[j - 1], table[j]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BumpSpec {
    pub x0: f64,
    #[serde(rename = "R")]
    pub radius: f64,
}

impl Default for BumpSpec {
    fn default() -> Self {
        Self { x0: 0.0, radius: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionSpec {
    Exact,
    PaperNormalized,
}

impl From<ConventionSpec> for ThetaConvention {
    fn from(c: ConventionSpec) -> Self {
        match c {
            ConventionSpec::Exact => ThetaConvention::Exact,
            ConventionSpec::PaperNormalized => ThetaConvention::PaperNormalized,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub quadrature: f64,
    /// Stopping tolerance of the fixed-point and monotone iterations.
    pub iteration: f64,
    /// Bound on the stationary residual `‖Aû - qû^α‖`.
    pub residual: f64,
    pub max_iterations: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quadrature: 1e-10,
            iteration: 1e-10,
            residual: 1e-8,
            max_iterations: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UniquenessSpec {
    /// Exponents swept by `all`; `uniqueness` uses the top-level `alpha`.
    pub alphas: Vec<f64>,
    pub eps0: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
}

impl Default for UniquenessSpec {
    fn default() -> Self {
        Self {
            alphas: vec![1.0, 2.0],
            eps0: 1e-3,
            t_end: 0.5,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| invalid(format!("cannot parse config: {e}")))
    }

    /// Reads and parses `path`; validation is separate because it depends on the subcommand.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn grid(&self) -> Result<Grid1D, CliError> {
        Grid1D::new(self.half_width, self.n).map_err(CliError::from)
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self, command: Command) -> Result<(), CliError> {
        let finite = [self.s, self.alpha, self.p, self.half_width];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(invalid("s, alpha, p and L must be finite numbers"));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(invalid(format!("fractional order s = {} must lie in (0, 1)", self.s)));
        }
        if !(self.p > 1.0_f64.max(2.0 * self.s)) {
            return Err(invalid(format!(
                "bump exponent p = {} must exceed max(1, 2s) = {}",
                self.p,
                1.0_f64.max(2.0 * self.s)
            )));
        }
        if !(self.half_width > 0.0) {
            return Err(invalid(format!("domain half-width L = {} must be positive", self.half_width)));
        }
        if self.n < 3 {
            return Err(invalid(format!("n = {} interior nodes, need at least 3", self.n)));
        }
        if self.m < 1 {
            return Err(invalid("m must be at least 1"));
        }
        match command {
            Command::Uniqueness => {
                if !(self.alpha >= 1.0) {
                    return Err(invalid(format!(
                        "alpha = {} is sublinear; the uniqueness experiment needs alpha >= 1 \
                         (for alpha < 1 use `evolve`, which exhibits two solutions)",
                        self.alpha
                    )));
                }
            }
            Command::VerifySpecfun => {}
            _ => {
                if !(self.alpha > 0.0 && self.alpha < 1.0) {
                    return Err(invalid(format!(
                        "alpha = {} is outside the sublinear range (0, 1); alpha >= 1 is the \
                         uniqueness regime where zero data only admits the trivial solution \
                         (see the `uniqueness` subcommand)",
                        self.alpha
                    )));
                }
            }
        }
        if let Horizon::Fixed(t) = self.horizon {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid(format!("T = {t} must be positive or \"auto\"")));
            }
        }
        self.validate_weight()?;
        let (x0, r) = (self.bump.x0, self.bump.radius);
        if !(r > 0.0 && x0.is_finite()) {
            return Err(invalid(format!("bump radius R = {r} must be positive")));
        }
        if x0.abs() + r > self.half_width {
            return Err(invalid(format!(
                "bump ball ({}, {}) must lie inside the domain (-{L}, {L})",
                x0 - r,
                x0 + r,
                L = self.half_width
            )));
        }
        let [a, b] = self.q_spec.floor_interval;
        if x0 - r < a || x0 + r > b {
            return Err(invalid(format!(
                "(Q2) the bump ball ({}, {}) must lie inside the floor interval ({a}, {b}) where q >= q0",
                x0 - r,
                x0 + r
            )));
        }
        let t = &self.tolerances;
        if !(t.quadrature > 0.0 && t.iteration > 0.0 && t.residual > 0.0 && t.max_iterations > 0) {
            return Err(invalid("tolerances and max_iterations must be positive"));
        }
        if self.taus.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(invalid("time shifts taus must be nonnegative"));
        }
        if self.ratio_resolution < 64 {
            return Err(invalid(format!(
                "ratio_resolution = {} must be at least 64",
                self.ratio_resolution
            )));
        }
        let u = &self.uniqueness;
        if u.alphas.iter().any(|a| !(*a >= 1.0 && a.is_finite())) {
            return Err(invalid("uniqueness.alphas must all be >= 1"));
        }
        if !(u.eps0 > 0.0 && u.t_end > 0.0) {
            return Err(invalid("uniqueness.eps0 and uniqueness.T must be positive"));
        }
        self.grid()?;
        Ok(())
    }

    fn validate_weight(&self) -> Result<(), CliError> {
        let q = &self.q_spec;
        let q0 = q.floor();
        if !(q0 > 0.0 && q0.is_finite()) {
            return Err(invalid(format!("(Q2) requires q0 > 0, got q0 = {q0}")));
        }
        let [a, b] = q.floor_interval;
        if !(a < b && a >= -self.half_width && b <= self.half_width) {
            return Err(invalid(format!(
                "(Q2) floor interval ({a}, {b}) must be nonempty and inside (-{L}, {L})",
                L = self.half_width
            )));
        }
        let values = [Some(q.value), q.outside];
        if values.iter().flatten().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(invalid("(Q1) requires q bounded and nonnegative"));
        }
        if q.profile.is_none() && q.value < q0 {
            return Err(invalid(format!(
                "(Q2) requires q >= q0 on the floor interval, got value {} < q0 = {q0}",
                q.value
            )));
        }
        if let Some(table) = &q.profile {
            if table.is_empty() {
                return Err(invalid("q_spec.profile must have at least one row"));
            }
            if table.windows(2).any(|w| !(w[1][0] > w[0][0])) {
                return Err(invalid("q_spec.profile abscissae must increase"));
            }
            if table.iter().any(|r| !(r[1] >= 0.0 && r[1].is_finite() && r[0].is_finite())) {
                return Err(invalid("(Q1) requires q bounded and nonnegative"));
            }
        }
        q.weight(&self.grid()?)?;
        Ok(())
    }
}
