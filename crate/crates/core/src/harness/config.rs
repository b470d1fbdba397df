use std::path::{Path, PathBuf};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::effective::Scheme;
use crate::error::{Error, Result};
use crate::manybody::HamiltonianSpec;
use crate::numerics::{Grid, PotentialSpec};
use crate::semiclassics::TfOptions;

/// One experiment run: what to compute, where to write it, and the seed for randomized
/// property batteries.
#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Output directory; the command line may override it.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Scatter(ScatterParams),
    Hartree(WaveParams),
    Gp(GpParams),
    Hf(HfParams),
    Exact(ExactParams),
    ConvergeHartree(ConvergeHartreeParams),
    ConvergeHf(ConvergeHfParams),
    Fluct(FluctParams),
    Tf(TfParams),
    Semiclass(SemiclassParams),
    Bbgky(BbgkyParams),
    Report(ReportParams),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Scatter(_) => "scatter",
            Experiment::Hartree(_) => "hartree",
            Experiment::Gp(_) => "gp",
            Experiment::Hf(_) => "hf",
            Experiment::Exact(_) => "exact",
            Experiment::ConvergeHartree(_) => "converge-hartree",
            Experiment::ConvergeHf(_) => "converge-hf",
            Experiment::Fluct(_) => "fluct",
            Experiment::Tf(_) => "tf",
            Experiment::Semiclass(_) => "semiclass",
            Experiment::Bbgky(_) => "bbgky",
            Experiment::Report(_) => "report",
        }
    }
}

/// Gaussian wave packet e^{-|x-x₀|²/(2w²)} e^{ik·x}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Packet {
    #[serde(default)]
    pub center: [f64; 3],
    pub width: f64,
    #[serde(default)]
    pub momentum: [f64; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ScatterParams {
    pub potential: PotentialSpec,
    pub r_max: f64,
    #[serde(default = "default_mesh")]
    pub mesh: usize,
    /// N values for the a₀(N²V(N·)) = a₀/N check.
    #[serde(default = "default_rescalings")]
    pub rescalings: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct WaveParams {
    pub grid: Grid,
    #[serde(default = "PotentialSpec::zero")]
    pub v_ext: PotentialSpec,
    pub interaction: PotentialSpec,
    pub packet: Packet,
    pub t: f64,
    pub dt: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub scheme: Scheme,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GpParams {
    pub grid: Grid,
    #[serde(default = "PotentialSpec::zero")]
    pub v_ext: PotentialSpec,
    pub a0: f64,
    pub packet: Packet,
    pub t: f64,
    pub dt: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub scheme: Scheme,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum FermiInitial {
    /// Projection onto the N lowest plane waves.
    FreeFermi,
    /// N lowest orbitals of -ε²Δ + a(x - center)².
    Trap { amplitude: f64, center: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct HfParams {
    pub grid: Grid,
    pub particles: usize,
    pub eps: f64,
    #[serde(default = "PotentialSpec::zero")]
    pub v_ext: PotentialSpec,
    pub interaction: PotentialSpec,
    pub initial: FermiInitial,
    #[serde(default = "yes")]
    pub exchange: bool,
    pub t: f64,
    pub dt: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExactParams {
    pub grid: Grid,
    pub hamiltonian: HamiltonianSpec,
    pub particles: usize,
    pub packet: Packet,
    pub t: f64,
    /// Krylov step of the many-body propagation.
    #[serde(default = "default_exact_dt")]
    pub dt: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ConvergeHartreeParams {
    pub grid: Grid,
    #[serde(default = "PotentialSpec::zero")]
    pub v_ext: PotentialSpec,
    pub interaction: PotentialSpec,
    pub packet: Packet,
    pub t: f64,
    pub particles: Vec<usize>,
    #[serde(default = "default_exact_dt")]
    pub exact_dt: f64,
    #[serde(default = "default_hartree_dt")]
    pub hartree_dt: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ConvergeHfParams {
    pub grid: Grid,
    #[serde(default = "default_trap")]
    pub v_ext: PotentialSpec,
    pub interaction: PotentialSpec,
    pub initial: FermiInitial,
    pub t: f64,
    pub particles: Vec<usize>,
    #[serde(default = "default_hf_dt")]
    pub dt: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Dimer {
    pub hopping: f64,
    pub onsite: f64,
    pub cross: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct FluctParams {
    pub dimer: Dimer,
    /// Condensate coefficients as [re, im] pairs.
    pub condensate: Vec<[f64; 2]>,
    pub particles: Vec<usize>,
    pub t: f64,
    #[serde(default = "default_hf_dt")]
    pub dt: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TfParams {
    pub grid: Grid,
    pub v_ext: PotentialSpec,
    pub interaction: PotentialSpec,
    #[serde(default)]
    pub options: TfOptions,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SemiclassParams {
    /// 1D grid; N = round(1/ε) fermions start in the trap ground state.
    pub grid: Grid,
    #[serde(default = "default_trap")]
    pub v_ext: PotentialSpec,
    pub interaction: PotentialSpec,
    pub eps: Vec<f64>,
    pub t: f64,
    #[serde(default = "default_hf_dt")]
    pub dt: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct BbgkyParams {
    pub grid: Grid,
    pub hamiltonian: HamiltonianSpec,
    pub particles: usize,
    pub packet: Packet,
    pub t: f64,
    pub level: usize,
    /// Central-difference steps, each half the previous for a Richardson check.
    pub steps: Vec<f64>,
    /// Random PSD inputs for the collision trace bound.
    #[serde(default = "default_bound_trials")]
    pub bound_trials: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ReportParams {
    /// Directory holding completed runs.
    pub input: PathBuf,
}

fn default_mesh() -> usize {
    crate::scattering::DEFAULT_MESH
}
fn default_rescalings() -> Vec<usize> {
    vec![1, 2, 4, 8, 16]
}
fn default_samples() -> usize {
    10
}
fn default_exact_dt() -> f64 {
    0.05
}
fn default_hartree_dt() -> f64 {
    1e-3
}
fn default_hf_dt() -> f64 {
    1e-2
}
fn default_bound_trials() -> usize {
    100
}
fn default_trap() -> PotentialSpec {
    PotentialSpec::harmonic(1.0)
}
fn yes() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Missing(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Canonical JSON of the resolved configuration (defaults filled in).
    pub fn resolved(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("configuration serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// `<kind>-<first 12 hex digits of the hash>`.
    pub fn run_id(&self) -> String {
        format!("{}-{}", self.experiment.kind(), &self.hash()[..12])
    }
}

/// JSON schema of [`ExperimentConfig`].
pub fn config_schema() -> String {
    serde_json::to_string_pretty(&schemars::schema_for!(ExperimentConfig)).expect("schema serializes")
}
