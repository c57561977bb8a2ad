use crate::error::{Error, Result};
use crate::fem2d::{FieldSpec, PolygonalDomain, SizeField};
use crate::sector::SectorOptions;
use crate::spectra::QueryMode;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

/// The domain of an experiment: a preset, explicit vertices, or a file in
/// the domain text format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub preset: Option<String>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    /// Opening angle of the `wedge` preset.
    pub alpha: Option<f64>,
    pub vertices: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub dirichlet: Vec<usize>,
    pub file: Option<PathBuf>,
}

impl DomainConfig {
    pub fn resolve(&self, base: &Path) -> Result<PolygonalDomain> {
        let sources = [self.preset.is_some(), self.vertices.is_some(), self.file.is_some()];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return Err(Error::InvalidParameter(
                "domain needs exactly one of preset, vertices, file".into(),
            ));
        }
        if let Some(v) = &self.vertices {
            return PolygonalDomain::with_dirichlet(v.clone(), self.dirichlet.clone());
        }
        if let Some(f) = &self.file {
            let path = if f.is_absolute() { f.clone() } else { base.join(f) };
            let file = std::fs::File::open(&path)?;
            return PolygonalDomain::read_text(std::io::BufReader::new(file));
        }
        let name = self.preset.as_deref().unwrap();
        let mut domain = match name.to_ascii_lowercase().as_str() {
            "rectangle" => PolygonalDomain::rectangle(self.width.unwrap_or(2.0), self.height.unwrap_or(1.0)),
            "wedge" | "sector" => PolygonalDomain::wedge(self.alpha.unwrap_or(PI / 3.0))?,
            _ => PolygonalDomain::preset(name)?,
        };
        if !self.dirichlet.is_empty() {
            domain = PolygonalDomain::with_dirichlet(domain.vertices, self.dirichlet.clone())?;
        }
        Ok(domain)
    }
}

/// Mesh sizes as multiples of the magnetic length `√h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshRule {
    pub boundary: f64,
    pub interior: f64,
    /// Width of the boundary layer.
    pub layer: f64,
    pub grading: f64,
}

impl Default for MeshRule {
    fn default() -> Self {
        MeshRule {
            boundary: 0.125,
            interior: 0.25,
            layer: 4.0,
            grading: 2.0,
        }
    }
}

impl MeshRule {
    pub fn size_field(&self, domain: &PolygonalDomain, h: f64) -> SizeField {
        let l = h.sqrt();
        let mut f = SizeField::graded(domain, self.boundary * l, self.grading);
        f.interior_size = self.interior * l;
        f.layer_width = self.layer * l;
        f
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.boundary > 0.0 && self.boundary <= 0.125) {
            return Err(Error::InvalidParameter(format!(
                "boundary size {}·√h must resolve √h by at least 8 elements",
                self.boundary
            )));
        }
        if !(self.interior >= self.boundary && self.layer >= 0.0 && self.grading >= 1.0) {
            return Err(Error::InvalidParameter(format!("inconsistent mesh rule {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Relative threshold; rows count eigenvalues below `lambda·h`.
    pub lambda: f64,
    pub h_ladder: Vec<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: QueryMode,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_tolerance")]
    pub solver_tolerance: f64,
}

fn default_seed() -> u64 {
    0x5eed_c0de
}

fn default_mode() -> QueryMode {
    QueryMode::Both
}

fn default_k_max() -> usize {
    400
}

fn default_tolerance() -> f64 {
    1e-12
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest admissible `|ratio − 1|` at the smallest `h`.
    pub ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { ratio: 0.15 }
    }
}

fn default_field() -> FieldSpec {
    FieldSpec::Constant { beta: 1.0, gauge_xy: 0.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainConfig,
    #[serde(default = "default_field")]
    pub field: FieldSpec,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub mesh: MeshRule,
    #[serde(default)]
    pub sector: SectorOptions,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut config = Self::from_toml(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let ladder = &self.sweep.h_ladder;
        if ladder.is_empty() {
            return Err(Error::InvalidParameter("h_ladder is empty".into()));
        }
        if ladder.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidParameter("h_ladder entries must be positive".into()));
        }
        if ladder.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidParameter("h_ladder must be strictly decreasing".into()));
        }
        if !self.sweep.lambda.is_finite() {
            return Err(Error::InvalidParameter("lambda must be finite".into()));
        }
        self.mesh.validate()
    }

    pub fn domain(&self) -> Result<PolygonalDomain> {
        self.domain.resolve(&self.base_dir)
    }
}
