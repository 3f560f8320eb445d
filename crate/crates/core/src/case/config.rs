use crate::error::{Error, Result};
use crate::fem::{FluidProps, ViscousForm};
use crate::krylov::SolverSettings;
use crate::mesh::{
    channel, load_mesh, nozzle, pipe, unit_square, BoundaryGeometry, ChannelSpec, Mesh, MeshFormat,
    NozzleSpec, PatchKind, PipeSpec, Surface,
};
use crate::registry::Registry;
use crate::spectral::{BoundaryWaveform, Signal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Case description read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    #[serde(default = "default_name")]
    pub name: String,
    /// Period; may be omitted when a waveform file provides it.
    pub period: Option<f64>,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub fluid: FluidConfig,
    #[serde(default, rename = "boundary")]
    pub boundaries: Vec<BoundaryConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub scvs: ScvsConfig,
    #[serde(default)]
    pub mss: MssConfig,
    #[serde(default)]
    pub output: OutputConfig,
    pub oracle: Option<OracleConfig>,
}

fn default_name() -> String {
    "case".into()
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    /// `file`, `channel`, `nozzle`, `pipe` or `unit-square`.
    pub generator: String,
    pub path: Option<PathBuf>,
    pub format: Option<String>,
    pub length: Option<f64>,
    pub half_height: Option<f64>,
    pub radius: Option<f64>,
    pub expansion: Option<f64>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub rings: Option<usize>,
    pub layers: Option<usize>,
    /// Patch kind overrides, e.g. `outlet = "dirichlet"`.
    #[serde(default)]
    pub kinds: BTreeMap<String, String>,
    #[serde(default, rename = "surface")]
    pub surfaces: Vec<SurfaceConfig>,
}

/// Curved boundary descriptor for mid-edge node projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub patch: String,
    /// `circle` or `cylinder`.
    pub kind: String,
    pub center: Option<[f64; 3]>,
    pub axis: Option<[f64; 3]>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluidConfig {
    pub rho: f64,
    pub mu: f64,
    /// `full` or `symmetric` viscous form.
    pub form: String,
}

impl Default for FluidConfig {
    fn default() -> Self {
        Self {
            rho: 1.0,
            mu: 1.0,
            form: "full".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosineConfig {
    pub amplitude: f64,
    pub harmonic: usize,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangleConfig {
    pub amplitude: f64,
    pub peak: f64,
}

/// Waveform of one patch: a direction times exactly one signal source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub patch: String,
    #[serde(default = "default_direction")]
    pub direction: [f64; 3],
    pub file: Option<PathBuf>,
    pub constant: Option<f64>,
    pub cosine: Option<CosineConfig>,
    pub square: Option<f64>,
    pub triangle: Option<TriangleConfig>,
}

fn default_direction() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// `scvs` or `mss`.
    pub kind: String,
    pub tol: f64,
    pub restart: usize,
    pub max_iters: usize,
    pub preconditioner: String,
    pub workers: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolverSettings::default();
        Self {
            kind: "scvs".into(),
            tol: s.tol,
            restart: s.restart,
            max_iters: s.max_iters,
            preconditioner: s.preconditioner,
            workers: None,
        }
    }
}

impl SolverConfig {
    pub fn settings(&self) -> SolverSettings {
        SolverSettings {
            tol: self.tol,
            restart: self.restart,
            max_iters: self.max_iters,
            preconditioner: self.preconditioner.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScvsConfig {
    /// Fixed truncation bound.
    pub modes: Option<usize>,
    /// Adaptive refinement tolerance.
    pub adaptive_tol: Option<f64>,
    pub max_modes: usize,
    /// `consecutive`, `skip-mean` or `amplitude`.
    pub selector: String,
    pub threshold: f64,
    pub samples: usize,
}

impl Default for ScvsConfig {
    fn default() -> Self {
        Self {
            modes: None,
            adaptive_tol: None,
            max_modes: 64,
            selector: "consecutive".into(),
            threshold: 1e-3,
            samples: crate::spectral::DEFAULT_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MssConfig {
    pub rho_inf: f64,
    pub steps_per_cycle: Option<usize>,
    pub dt: Option<f64>,
    pub cycles: usize,
    pub steady_tol: Option<f64>,
}

impl Default for MssConfig {
    fn default() -> Self {
        Self {
            rho_inf: 0.2,
            steps_per_cycle: None,
            dt: None,
            cycles: 5,
            steady_tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Snapshot times within `[0, T)`.
    pub times: Vec<f64>,
    /// `native` and/or `vtk`.
    pub formats: Vec<String>,
    /// Flow-rate samples per period (frequency-domain runs).
    pub flow_samples: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            times: vec![0.0],
            formats: vec!["native".into()],
            flow_samples: 100,
        }
    }
}

/// Analytic reference used for the metrics file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// `channel` or `pipe`.
    pub case: String,
    /// Half height or radius.
    pub size: f64,
    pub length: f64,
    /// Patch whose waveform is the driving traction.
    #[serde(default = "default_oracle_patch")]
    pub patch: String,
}

fn default_oracle_patch() -> String {
    "inlet".into()
}

impl CaseConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config; relative paths are taken from the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.mesh.path.as_mut() {
            fix(p);
        }
        for b in &mut self.boundaries {
            if let Some(p) = b.file.as_mut() {
                fix(p);
            }
        }
        fix(&mut self.output.directory);
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn props(&self) -> Result<FluidProps> {
        FluidProps::new(self.fluid.rho, self.fluid.mu).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn form(&self) -> Result<ViscousForm> {
        self.fluid
            .form
            .parse()
            .map_err(|e: Error| Error::Config(e.to_string()))
    }

    /// Checks the invariants that do not need the mesh.
    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        self.props()?;
        self.form()?;
        if !(self.solver.tol > 0.0 && self.solver.tol < 1.0) {
            return cfg(format!("solver.tol {} not in (0, 1)", self.solver.tol));
        }
        match self.solver.kind.as_str() {
            "scvs" => match (self.scvs.modes, self.scvs.adaptive_tol) {
                (Some(_), None) => {}
                (None, Some(t)) if t > 0.0 => {}
                (None, Some(t)) => return cfg(format!("scvs.adaptive_tol {t} must be positive")),
                _ => return cfg("set exactly one of scvs.modes and scvs.adaptive_tol".into()),
            },
            "mss" => {
                if self.mss.steps_per_cycle.is_some() == self.mss.dt.is_some() {
                    return cfg("set exactly one of mss.steps_per_cycle and mss.dt".into());
                }
                if self.mss.cycles == 0 {
                    return cfg("mss.cycles must be at least 1".into());
                }
            }
            other => return cfg(format!("unknown solver '{other}' (expected scvs or mss)")),
        }
        if self.boundaries.is_empty() {
            return cfg("no [[boundary]] entries".into());
        }
        for b in &self.boundaries {
            let n = [
                b.file.is_some(),
                b.constant.is_some(),
                b.cosine.is_some(),
                b.square.is_some(),
                b.triangle.is_some(),
            ]
            .iter()
            .filter(|&&x| x)
            .count();
            if n != 1 {
                return cfg(format!(
                    "boundary '{}' needs exactly one signal source",
                    b.patch
                ));
            }
            if let Some(f) = &b.file {
                if !f.exists() {
                    return cfg(format!("waveform file {} does not exist", f.display()));
                }
            }
        }
        if let Some(p) = &self.mesh.path {
            if !p.exists() {
                return cfg(format!("mesh file {} does not exist", p.display()));
            }
        }
        if self.output.formats.is_empty() {
            return cfg("output.formats is empty".into());
        }
        for f in &self.output.formats {
            if f != "native" && f != "vtk" {
                return cfg(format!("unknown output format '{f}'"));
            }
        }
        Ok(())
    }

    /// Mesh and curved-boundary descriptors, with kind overrides applied.
    pub fn build_mesh(&self) -> Result<(Mesh, BoundaryGeometry)> {
        let (mut mesh, mut geom) = mesh_generators()
            .get(&self.mesh.generator)
            .map_err(|e| Error::Config(e.to_string()))?
            .build(&self.mesh)?;
        for (patch, kind) in &self.mesh.kinds {
            let kind: PatchKind = kind
                .parse()
                .map_err(|e: Error| Error::Config(e.to_string()))?;
            mesh.set_patch_kind(patch, kind)?;
        }
        for s in &self.mesh.surfaces {
            let c = s.center.unwrap_or([0.0; 3]);
            let surface = match s.kind.as_str() {
                "circle" => Surface::Circle {
                    center: [c[0], c[1]],
                    radius: s.radius,
                },
                "cylinder" => Surface::cylinder(c, s.axis.unwrap_or([1.0, 0.0, 0.0]), s.radius),
                other => return Err(Error::Config(format!("unknown surface kind '{other}'"))),
            };
            geom.insert(s.patch.clone(), surface);
        }
        Ok((mesh, geom))
    }

    /// Waveforms of the configured patches, with the patch kinds of `mesh`.
    pub fn waveforms(&self, mesh: &Mesh) -> Result<(Vec<BoundaryWaveform>, f64)> {
        let mut loaded = Vec::new();
        let mut period = self.period;
        for b in &self.boundaries {
            let signal = if let Some(f) = &b.file {
                let (s, t) = Signal::load(f)?;
                match period {
                    Some(p) if (p - t).abs() > 1e-12 * p => {
                        return Err(Error::Config(format!(
                            "{} has period {t}, the case uses {p}",
                            f.display()
                        )))
                    }
                    _ => period = Some(t),
                }
                s
            } else if let Some(c) = b.constant {
                Signal::Constant(c)
            } else if let Some(c) = &b.cosine {
                Signal::Cosine {
                    amplitude: c.amplitude,
                    harmonic: c.harmonic,
                    phase: c.phase,
                }
            } else if let Some(a) = b.square {
                Signal::Square { amplitude: a }
            } else if let Some(t) = &b.triangle {
                Signal::Triangle {
                    amplitude: t.amplitude,
                    peak: t.peak,
                }
            } else {
                return Err(Error::Config(format!(
                    "boundary '{}' has no signal",
                    b.patch
                )));
            };
            loaded.push((b, signal));
        }
        let period = period.ok_or_else(|| Error::Config("no period given".into()))?;
        let waveforms = loaded
            .into_iter()
            .map(|(b, s)| {
                let kind = mesh.patch(&b.patch)?.kind;
                BoundaryWaveform::new(b.patch.clone(), kind, b.direction, period, s)
                    .map_err(|e| Error::Config(e.to_string()))
            })
            .collect::<Result<_>>()?;
        Ok((waveforms, period))
    }
}

/// Builds a linear mesh from the `[mesh]` section.
pub trait MeshGenerator: Send + Sync {
    fn build(&self, cfg: &MeshConfig) -> Result<(Mesh, BoundaryGeometry)>;
}

fn need<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("mesh.{key} is required for this generator")))
}

struct FileMesh;
struct ChannelMesh;
struct NozzleMesh;
struct PipeMesh;
struct UnitSquare;

impl MeshGenerator for FileMesh {
    fn build(&self, cfg: &MeshConfig) -> Result<(Mesh, BoundaryGeometry)> {
        let path = cfg
            .path
            .as_ref()
            .ok_or_else(|| Error::Config("mesh.path is required".into()))?;
        let format = match &cfg.format {
            Some(f) => f.parse()?,
            None if path.extension().is_some_and(|e| e == "vtk") => MeshFormat::Vtk,
            None => MeshFormat::Native,
        };
        Ok((load_mesh(path, format)?, BoundaryGeometry::new()))
    }
}

impl MeshGenerator for ChannelMesh {
    fn build(&self, cfg: &MeshConfig) -> Result<(Mesh, BoundaryGeometry)> {
        let spec = ChannelSpec {
            length: need(cfg.length, "length")?,
            half_height: need(cfg.half_height, "half_height")?,
            nx: need(cfg.nx, "nx")?,
            ny: need(cfg.ny, "ny")?,
        };
        Ok((channel(&spec), BoundaryGeometry::new()))
    }
}

impl MeshGenerator for NozzleMesh {
    fn build(&self, cfg: &MeshConfig) -> Result<(Mesh, BoundaryGeometry)> {
        let spec = NozzleSpec {
            length: need(cfg.length, "length")?,
            inlet_half_height: need(cfg.half_height, "half_height")?,
            expansion: need(cfg.expansion, "expansion")?,
            nx: need(cfg.nx, "nx")?,
            ny: need(cfg.ny, "ny")?,
        };
        Ok((nozzle(&spec), BoundaryGeometry::new()))
    }
}

impl MeshGenerator for PipeMesh {
    fn build(&self, cfg: &MeshConfig) -> Result<(Mesh, BoundaryGeometry)> {
        let spec = PipeSpec {
            radius: need(cfg.radius, "radius")?,
            length: need(cfg.length, "length")?,
            rings: need(cfg.rings, "rings")?,
            layers: need(cfg.layers, "layers")?,
        };
        let geom = BoundaryGeometry::new().with(
            "wall",
            Surface::cylinder([0.0; 3], [1.0, 0.0, 0.0], spec.radius),
        );
        Ok((pipe(&spec), geom))
    }
}

impl MeshGenerator for UnitSquare {
    fn build(&self, _cfg: &MeshConfig) -> Result<(Mesh, BoundaryGeometry)> {
        Ok((unit_square(), BoundaryGeometry::new()))
    }
}

/// Mesh sources selectable by `mesh.generator`.
pub fn mesh_generators() -> Registry<dyn MeshGenerator> {
    let mut r: Registry<dyn MeshGenerator> = Registry::new("mesh generator");
    r.register("file", Box::new(FileMesh));
    r.register("channel", Box::new(ChannelMesh));
    r.register("nozzle", Box::new(NozzleMesh));
    r.register("pipe", Box::new(PipeMesh));
    r.register("unit-square", Box::new(UnitSquare));
    r
}
