//! Experiment configuration (TOML) and built-in presets.
//!
//! ```toml
//! [domain]
//! x_min = 0.0
//! x_max = 4.0
//! y_min = 0.0
//! y_max = 4.0
//! boundary = [
//!   { side = "right", lo = 0.0, hi = 4.0, label = "dirichlet" },
//!   { side = "bottom", lo = 0.0, hi = 4.0, label = "contact" },
//! ]
//!
//! [material]
//! young = 200.0
//! poisson = 0.3
//! assumption = "plane-strain"
//!
//! [loads]
//! friction_bound = 0.0012
//! traction = [
//!   { side = "left", lo = 0.0, hi = 4.0, x = [0.1, 0.0, -0.02], y = [-0.01, 0.0, 0.0], time = "linear" },
//! ]
//! ```
//!
//! Affine fields are written as `[c0, cx, cy]` per component, meaning
//! `c0 + cx * x + cy * y`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assembly::{AffineField, LoadSpec, SegmentTraction, TimeFactor};
use crate::error::{Error, Result};
use crate::material::{MaterialModel, PlaneAssumption};
use crate::mesh::{BoundaryLabel, BoundarySegment, Domain, Side};
use crate::solver::{MultiplierStep, UzawaConfig};
use crate::sparse::CgConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub side: Side,
    pub lo: f64,
    pub hi: f64,
    pub label: BoundaryLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub boundary: Vec<SegmentConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub young: f64,
    pub poisson: f64,
    #[serde(default)]
    pub assumption: PlaneAssumption,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    #[serde(default)]
    pub x: [f64; 3],
    #[serde(default)]
    pub y: [f64; 3],
    #[serde(default)]
    pub time: TimeFactor,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            x: [0.0; 3],
            y: [0.0; 3],
            time: TimeFactor::Constant,
        }
    }
}

impl FieldConfig {
    fn field(&self) -> AffineField<f64> {
        AffineField::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TractionConfig {
    pub side: Side,
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub x: [f64; 3],
    #[serde(default)]
    pub y: [f64; 3],
    #[serde(default)]
    pub time: TimeFactor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadsConfig {
    pub friction_bound: f64,
    #[serde(default)]
    pub body: FieldConfig,
    #[serde(default)]
    pub traction: Vec<TractionConfig>,
    #[serde(default)]
    pub initial: FieldConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub final_time: f64,
    /// Steps on level 0; level `l` uses `base_steps * 2^l`.
    pub base_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    /// Squares per side on level 0.
    pub base_subdivisions: usize,
    pub levels: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearSolverChoice {
    #[default]
    Cholesky,
    Cg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub rho: f64,
    #[serde(default = "one")]
    pub rho_tilde: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub multiplier_step: MultiplierStep,
    /// Exact active-set solve of the contact block after the Uzawa stop.
    #[serde(default = "yes")]
    pub finalize: bool,
    #[serde(default)]
    pub linear: LinearSolverChoice,
    #[serde(default = "default_cg_tol")]
    pub cg_tol: f64,
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_eps() -> f64 {
    1e-8
}
fn default_max_iter() -> usize {
    10_000
}
fn default_cg_tol() -> f64 {
    1e-10
}

/// Which time nodes enter the inter-mesh error.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorMetric {
    /// Error at the final time `T` only.
    #[default]
    FinalTime,
    /// Maximum over the coarse level's time nodes.
    MaxOverTime,
}

/// Norm in which inter-level differences are measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorNorm {
    /// Mesh-dependent energy norm `|||.|||` (stress-weighted, with jump penalty).
    #[default]
    Energy,
    /// `(sum_T int_T eps : eps)^(1/2)`, no material weighting and no jumps.
    Strain,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default)]
    pub error_metric: ErrorMetric,
    #[serde(default)]
    pub error_norm: ErrorNorm,
    /// Solve the levels on separate threads.
    #[serde(default)]
    pub parallel: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    pub dump_fields: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub domain: DomainConfig,
    pub material: MaterialConfig,
    pub loads: LoadsConfig,
    pub time: TimeConfig,
    pub mesh: MeshConfig,
    pub solver: SolverConfig,
    #[serde(default)]
    pub study: StudyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

impl ProblemConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Named built-in configuration.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "example-5.1" => Ok(Self::example_5_1()),
            "example-5.1-time" => Ok(Self::example_5_1_time()),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (available: example-5.1, example-5.1-time)"
            ))),
        }
    }

    /// Clamped square `(0,4)^2` pushed from the left and sliding on a rigid base.
    ///
    /// Refinement schedule: 2x2 grid with 40 steps, h and k halved together over five levels.
    pub fn example_5_1() -> Self {
        let seg = |side, label| SegmentConfig {
            side,
            lo: 0.0,
            hi: 4.0,
            label,
        };
        Self {
            domain: DomainConfig {
                x_min: 0.0,
                x_max: 4.0,
                y_min: 0.0,
                y_max: 4.0,
                boundary: vec![
                    seg(Side::Right, BoundaryLabel::Dirichlet),
                    seg(Side::Left, BoundaryLabel::Neumann),
                    seg(Side::Top, BoundaryLabel::Neumann),
                    seg(Side::Bottom, BoundaryLabel::Contact),
                ],
            },
            material: MaterialConfig {
                young: 200.0,
                poisson: 0.3,
                assumption: PlaneAssumption::PlaneStrain,
            },
            loads: LoadsConfig {
                friction_bound: 0.0012,
                body: FieldConfig::default(),
                // g = (0.02 (5 - y) t, -0.01 t) on {0} x (0,4); the top side is traction free
                traction: vec![TractionConfig {
                    side: Side::Left,
                    lo: 0.0,
                    hi: 4.0,
                    x: [0.1, 0.0, -0.02],
                    y: [-0.01, 0.0, 0.0],
                    time: TimeFactor::Linear,
                }],
                initial: FieldConfig::default(),
            },
            time: TimeConfig {
                final_time: 1.0,
                base_steps: 40,
            },
            mesh: MeshConfig {
                base_subdivisions: 2,
                levels: 5,
            },
            solver: SolverConfig {
                rho: 10.0,
                rho_tilde: 1.0,
                eps: 1e-8,
                max_iter: 10_000,
                multiplier_step: MultiplierStep::Spectral,
                finalize: true,
                linear: LinearSolverChoice::Cholesky,
                cg_tol: 1e-10,
            },
            study: StudyConfig::default(),
            output: OutputConfig::default(),
        }
    }

    /// Same problem on the 4x4 / 20-step start of the time-refinement schedule.
    pub fn example_5_1_time() -> Self {
        let mut c = Self::example_5_1();
        c.mesh.base_subdivisions = 4;
        c.time.base_steps = 20;
        c
    }

    pub fn validate(&self) -> Result<()> {
        self.domain()?;
        self.material_model()?;
        if !(self.loads.friction_bound >= 0.0) {
            return Err(field_err("loads.friction_bound", "must be non-negative"));
        }
        if !(self.time.final_time > 0.0) {
            return Err(field_err("time.final_time", "must be positive"));
        }
        if self.time.base_steps == 0 {
            return Err(field_err("time.base_steps", "must be at least 1"));
        }
        if self.mesh.base_subdivisions == 0 {
            return Err(field_err("mesh.base_subdivisions", "must be at least 1"));
        }
        if self.mesh.levels == 0 {
            return Err(field_err("mesh.levels", "must be at least 1"));
        }
        if !(self.solver.rho > 0.0) {
            return Err(field_err("solver.rho", "must be positive"));
        }
        if !(self.solver.rho_tilde > 0.0) {
            return Err(field_err("solver.rho_tilde", "must be positive"));
        }
        if !(self.solver.eps > 0.0) {
            return Err(field_err("solver.eps", "must be positive"));
        }
        if self.solver.max_iter == 0 {
            return Err(field_err("solver.max_iter", "must be at least 1"));
        }
        if !(self.solver.cg_tol > 0.0 && self.solver.cg_tol <= 1e-10) {
            return Err(field_err("solver.cg_tol", "must lie in (0, 1e-10]"));
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<Domain<f64>> {
        let d = &self.domain;
        let segs = d
            .boundary
            .iter()
            .map(|s| BoundarySegment::new(s.side, s.lo, s.hi, s.label))
            .collect();
        let dom = Domain::new(d.x_min, d.x_max, d.y_min, d.y_max, segs)
            .map_err(|e| field_err("domain", e))?;
        if !dom.has_dirichlet() {
            return Err(field_err(
                "domain.boundary",
                "a Dirichlet segment of positive length is required",
            ));
        }
        Ok(dom)
    }

    pub fn material_model(&self) -> Result<MaterialModel<f64>> {
        MaterialModel::new(
            self.material.young,
            self.material.poisson,
            self.material.assumption,
        )
        .map_err(|e| field_err("material", e))
    }

    pub fn load_spec(&self) -> LoadSpec<f64> {
        LoadSpec {
            body: self.loads.body.field(),
            body_time: self.loads.body.time,
            tractions: self
                .loads
                .traction
                .iter()
                .map(|t| SegmentTraction {
                    side: t.side,
                    lo: t.lo,
                    hi: t.hi,
                    field: AffineField::new(t.x, t.y),
                    time: t.time,
                })
                .collect(),
            friction_bound: self.loads.friction_bound,
            initial: self.loads.initial.field(),
        }
    }

    pub fn uzawa_config(&self) -> UzawaConfig<f64> {
        UzawaConfig {
            rho_tilde: self.solver.rho_tilde,
            eps: self.solver.eps,
            max_iter: self.solver.max_iter,
            step: self.solver.multiplier_step,
            finalize: self.solver.finalize,
        }
    }

    pub fn linear_solver(&self) -> crate::solver::LinearSolverKind {
        match self.solver.linear {
            LinearSolverChoice::Cholesky => crate::solver::LinearSolverKind::Cholesky,
            LinearSolverChoice::Cg => {
                crate::solver::LinearSolverKind::ConjugateGradient(CgConfig {
                    rel_tol: self.solver.cg_tol,
                    max_iter: 100_000,
                })
            }
        }
    }

    /// Grid subdivisions on `level`.
    pub fn subdivisions(&self, level: usize) -> usize {
        self.mesh.base_subdivisions << level
    }

    /// Time steps on `level`.
    pub fn steps(&self, level: usize) -> usize {
        self.time.base_steps << level
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_round_trips_through_toml() {
        let c = ProblemConfig::example_5_1();
        let text = c.to_toml_string();
        let back = ProblemConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn preset_data() {
        let c = ProblemConfig::preset("example-5.1").unwrap();
        let m = c.material_model().unwrap();
        assert!((m.mu - 76.923_076_923).abs() < 1e-6);
        assert_eq!(c.loads.friction_bound, 0.0012);
        assert_eq!(c.solver.rho, 10.0);
        let g = c.load_spec().tractions[0].field;
        // 0.02 (5 - y) at y = 1 and y = 4
        assert!((g.eval([0.0, 1.0])[0] - 0.08).abs() < 1e-15);
        assert!((g.eval([0.0, 4.0])[0] - 0.02).abs() < 1e-15);
        assert_eq!(g.eval([0.0, 2.0])[1], -0.01);
        assert!(ProblemConfig::preset("nope").is_err());
        let t = ProblemConfig::preset("example-5.1-time").unwrap();
        assert_eq!((t.subdivisions(4), t.steps(4)), (64, 320));
    }

    #[test]
    fn invalid_poisson_is_a_material_error() {
        let mut c = ProblemConfig::example_5_1();
        c.material.poisson = 0.6;
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("material"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut text = ProblemConfig::example_5_1().to_toml_string();
        text.push_str("\n[bogus]\nx = 1\n");
        assert!(matches!(
            ProblemConfig::from_toml_str(&text),
            Err(Error::Config(_))
        ));
    }
}
