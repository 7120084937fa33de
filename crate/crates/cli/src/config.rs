//! Run configuration: a TOML file, overridden field by field from flags.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use emscatter::geometry::{mesh_cube, m_phi_for_points, ShapeSpec, WeightRule};
use emscatter::linalg::GmresOptions;
use emscatter::many_body::{self, Domain, ManyBodyLayout, TauMode};
use emscatter::one_body::{GammaFrame, GammaSource};
use emscatter::wave::{REFERENCE_OMEGA, REFERENCE_WAVELENGTH, SPEED_OF_LIGHT};
use emscatter::{CollocationMesh, IncidentWave, Vec3};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub wave: WaveConfig,
    pub shape: ShapeConfig,
    pub mesh: MeshConfig,
    pub many_body: ManyBodyConfig,
    pub solver: GmresOptions,
    pub evaluation: EvaluationConfig,
    pub output: OutputConfig,
}

/// Physical parameters in CGS units. `omega` is the frequency in Hz, so the
/// dispersion relation reads k = 2π ω √(εμ) / c.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveConfig {
    pub c: f64,
    pub omega: f64,
    /// Explicit wavenumber; when absent k = 2π/λ.
    pub k: Option<f64>,
    pub lambda: f64,
    pub direction: [f64; 3],
    pub amplitude: [f64; 3],
    pub mu: f64,
    pub epsilon: f64,
}

impl Default for WaveConfig {
    fn default() -> Self {
        Self {
            c: SPEED_OF_LIGHT,
            omega: REFERENCE_OMEGA,
            k: None,
            lambda: REFERENCE_WAVELENGTH,
            direction: [0.0, 1.0, 0.0],
            amplitude: [1.0, 0.0, 0.0],
            mu: 1.0,
            epsilon: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ShapeConfig {
    Sphere { radius: f64 },
    Ellipsoid { a: f64, b: f64, c: f64 },
    /// Axis-aligned cube; the default center puts one vertex at the origin.
    Cube {
        half_side: f64,
        #[serde(default = "default_n_per_face")]
        n_per_face: usize,
        #[serde(default)]
        center: Option<[f64; 3]>,
    },
}

fn default_n_per_face() -> usize {
    10
}

impl Default for ShapeConfig {
    fn default() -> Self {
        ShapeConfig::Sphere { radius: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaChoice {
    /// Analytic for spheres, local-frame numeric otherwise.
    #[default]
    Auto,
    Sphere,
    Local,
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    /// Number of polar bands for spheres and ellipsoids.
    pub m_phi: Option<usize>,
    /// Target point count; the matching band count is searched for.
    pub points: Option<usize>,
    pub weight_rule: WeightRule,
    pub gamma: GammaChoice,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { m_phi: None, points: None, weight_rule: WeightRule::EqualArea, gamma: GammaChoice::Auto }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManyBodyConfig {
    /// Number of particles; must be a perfect cube for the lattice layout.
    pub m: usize,
    pub d: f64,
    pub a: f64,
    pub domain_min: [f64; 3],
    pub domain_max: [f64; 3],
    pub tau_mode: TauMode,
    /// |D| = c_D a³ instead of the sphere volume.
    pub shape_constant: Option<f64>,
    /// CSV of centers (x,y,z[,volume]) replacing the lattice.
    pub centers_file: Option<PathBuf>,
    /// Point used for the error estimate; defaults to one spacing before the
    /// first center along −x.
    pub probe: Option<[f64; 3]>,
}

impl Default for ManyBodyConfig {
    fn default() -> Self {
        Self {
            m: 27,
            d: 1e-7,
            a: 1e-9,
            domain_min: [0.0; 3],
            domain_max: [1.0; 3],
            tau_mode: TauMode::Diagonal,
            shape_constant: None,
            centers_file: None,
            probe: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Anchor {
    #[default]
    Center,
    Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub distances: Vec<f64>,
    pub direction: [f64; 3],
    /// Whether distances are measured from the body center or the origin.
    pub from: Anchor,
    /// Extra absolute points.
    pub points: Vec<[f64; 3]>,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self { distances: vec![1.73e-8, 1.73e-7, 1.73e-6], direction: [1.0, 1.0, 1.0], from: Anchor::Center, points: vec![] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::from_array(a)
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// Builds the wave, warning when k, λ and ω disagree by more than 1e-3.
    pub fn wave(&self) -> Result<IncidentWave, CliError> {
        let w = &self.wave;
        let k_lambda = 2.0 * PI / w.lambda;
        let k_omega = 2.0 * PI * w.omega * (w.epsilon * w.mu).sqrt() / w.c;
        let k = w.k.unwrap_or(k_lambda);
        for (name, other) in [("2*pi/lambda", k_lambda), ("2*pi*omega*sqrt(eps*mu)/c", k_omega)] {
            if (other - k).abs() > 1e-3 * k.abs() {
                log::warn!("wavenumber k = {k:e} disagrees with {name} = {other:e}; using k = {k:e}");
            }
        }
        IncidentWave::new(v3(w.amplitude), v3(w.direction), k, w.omega, w.mu, w.epsilon).map_err(config_err)
    }

    fn m_phi(&self) -> Result<usize, CliError> {
        match (self.mesh.m_phi, self.mesh.points) {
            (Some(_), Some(_)) => Err(CliError::Config("set either mesh.m_phi or mesh.points, not both".into())),
            (Some(m), None) => Ok(m),
            (None, Some(p)) => m_phi_for_points(p)
                .ok_or_else(|| CliError::Config(format!("no band layout gives {p} collocation points"))),
            (None, None) => Ok(12),
        }
    }

    pub fn shape_spec(&self) -> Result<ShapeSpec, CliError> {
        Ok(match self.shape {
            ShapeConfig::Sphere { radius } => ShapeSpec::Sphere { radius, m_phi: self.m_phi()? },
            ShapeConfig::Ellipsoid { a, b, c } => ShapeSpec::Ellipsoid { a, b, c, m_phi: self.m_phi()? },
            ShapeConfig::Cube { half_side, n_per_face, .. } => ShapeSpec::Cube { half_side, n_per_face },
        })
    }

    pub fn mesh(&self) -> Result<CollocationMesh, CliError> {
        if let ShapeConfig::Cube { half_side, n_per_face, center: Some(c) } = self.shape {
            return mesh_cube(half_side, n_per_face, v3(c)).map_err(config_err);
        }
        self.shape_spec()?.build(self.mesh.weight_rule).map_err(config_err)
    }

    pub fn gamma_source(&self) -> GammaSource {
        match self.mesh.gamma {
            GammaChoice::Auto => match self.shape {
                ShapeConfig::Sphere { .. } => GammaSource::SphereAnalytic,
                _ => GammaSource::Numeric(GammaFrame::Local),
            },
            GammaChoice::Sphere => GammaSource::SphereAnalytic,
            GammaChoice::Local => GammaSource::Numeric(GammaFrame::Local),
            GammaChoice::Global => GammaSource::Numeric(GammaFrame::Global),
        }
    }

    /// Evaluation points for the E table.
    pub fn evaluation_points(&self, mesh: &CollocationMesh) -> Result<Vec<Vec3>, CliError> {
        let e = &self.evaluation;
        let anchor = match e.from {
            Anchor::Center => mesh.center(),
            Anchor::Origin => Vec3::ZERO,
        };
        let mut points = e
            .distances
            .iter()
            .map(|&d| emscatter::diagnostics::evaluation_point(anchor, v3(e.direction), d))
            .collect::<emscatter::Result<Vec<_>>>()
            .map_err(config_err)?;
        points.extend(e.points.iter().map(|&p| v3(p)));
        Ok(points)
    }

    pub fn layout(&self) -> Result<ManyBodyLayout, CliError> {
        let mb = &self.many_body;
        let domain = Domain::new(v3(mb.domain_min), v3(mb.domain_max)).map_err(config_err)?;
        let layout = match &mb.centers_file {
            Some(path) => {
                let file = std::fs::File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                ManyBodyLayout::read_csv(std::io::BufReader::new(file), mb.a, domain).map_err(config_err)?
            }
            None => many_body::lattice_layout(mb.m, mb.d, mb.a, domain).map_err(config_err)?,
        };
        match mb.shape_constant {
            Some(c) => layout.with_shape_constant(c).map_err(config_err),
            None => Ok(layout),
        }
    }

    pub fn probe(&self, layout: &ManyBodyLayout) -> Vec3 {
        self.many_body.probe.map(v3).unwrap_or_else(|| many_body::default_probe(layout))
    }
}
