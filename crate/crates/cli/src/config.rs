//! TOML run configuration: one section per pipeline stage, every knob
//! explicit after resolution so the config hash pins the whole run.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use fractalab::checks::CheckConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractalSection {
    pub name: String,
    pub level: usize,
    #[serde(default)]
    pub truncation: usize,
    /// Custom iterated function system; the registry is used when absent.
    #[serde(default)]
    pub ifs: Option<IfsSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IfsSection {
    pub contraction: f64,
    pub translations: Vec<Vec<f64>>,
    /// Row-major d x d orthogonal matrix per map; identity when omitted.
    #[serde(default)]
    pub rotations: Option<Vec<Vec<Vec<f64>>>>,
    /// Expected resistance factor, validated against the computed one.
    #[serde(default)]
    pub rho: Option<f64>,
}

fn default_p() -> f64 {
    2.0
}
fn default_seed() -> u64 {
    7
}
fn default_cells() -> usize {
    3
}
fn default_centers() -> usize {
    4
}
fn default_pairs() -> usize {
    1000
}
fn default_tol() -> f64 {
    0.15
}
fn default_stability() -> f64 {
    3.0
}
fn default_doubling() -> f64 {
    1.5
}
fn default_simplices() -> usize {
    16_000
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSection {
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Empty means every level in 1..level capped at 3 entries.
    #[serde(default)]
    pub coarse_levels: Vec<usize>,
    #[serde(default)]
    pub radius_levels: Vec<usize>,
    #[serde(default = "default_cells")]
    pub cells_per_level: usize,
    #[serde(default = "default_centers")]
    pub n_ball_centers: usize,
    #[serde(default = "default_pairs")]
    pub n_pairs: usize,
    #[serde(default = "default_tol")]
    pub exponent_tol: f64,
    #[serde(default = "default_stability")]
    pub stability_limit: f64,
    #[serde(default = "default_doubling")]
    pub pair_doubling_limit: f64,
    #[serde(default)]
    pub big_a: Option<f64>,
    #[serde(default = "default_simplices")]
    pub max_simplices: usize,
    #[serde(default = "default_true")]
    pub with_spectral: bool,
}

impl Default for ChecksSection {
    fn default() -> Self {
        toml::from_str("").unwrap()
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatSection {
    /// Explicit time grid; a geometric grid inside the resolvable window
    /// when empty.
    #[serde(default)]
    pub times: Vec<f64>,
    /// Vertex for the on-diagonal trace; the first junction when absent.
    #[serde(default)]
    pub x: Option<u32>,
}

fn default_kinds() -> Vec<String> {
    vec!["ks".into(), "sub-gaussian".into()]
}
fn default_min_level() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationSection {
    /// Suite function ids to evaluate; the whole suite when empty.
    #[serde(default)]
    pub functions: Vec<String>,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<String>,
    #[serde(default = "default_min_level")]
    pub min_level: usize,
}

impl Default for VariationSection {
    fn default() -> Self {
        toml::from_str("").unwrap()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub fractal: FractalSection,
    #[serde(default)]
    pub checks: ChecksSection,
    #[serde(default)]
    pub heat: HeatSection,
    #[serde(default)]
    pub variation: VariationSection,
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub level: Option<usize>,
    pub p: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &std::path::Path, over: &Overrides) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| format!("config parse error in {}: {e}", path.display()))?;
        if let Some(s) = over.seed {
            cfg.checks.seed = s;
        }
        if let Some(l) = over.level {
            cfg.fractal.level = l;
        }
        if let Some(p) = over.p {
            cfg.checks.p = p;
        }
        Ok(cfg)
    }

    /// Hash of the resolved configuration; identical hashes promise
    /// byte-identical reports and CSVs.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex(&Sha256::digest(&bytes))
    }

    /// Hash of the stages upstream of the spectral decomposition; keys the
    /// spectral cache.
    pub fn spectral_hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.fractal).expect("section serializes");
        let mut h = Sha256::new();
        h.update(b"spectral-v1:");
        h.update(&bytes);
        hex(&h.finalize())
    }

    pub fn check_config(&self) -> CheckConfig {
        let c = &self.checks;
        let mut cfg = CheckConfig::new(&self.fractal.name, self.fractal.level, c.p);
        cfg.truncation = self.fractal.truncation;
        if !c.coarse_levels.is_empty() {
            cfg.coarse_levels = c.coarse_levels.clone();
        }
        if !c.radius_levels.is_empty() {
            cfg.radius_levels = c.radius_levels.clone();
        }
        cfg.cells_per_level = c.cells_per_level;
        cfg.n_ball_centers = c.n_ball_centers;
        cfg.n_pairs = c.n_pairs;
        cfg.exponent_tol = c.exponent_tol;
        cfg.stability_limit = c.stability_limit;
        cfg.pair_doubling_limit = c.pair_doubling_limit;
        cfg.big_a = c.big_a;
        cfg.seed = c.seed;
        cfg.max_simplices = c.max_simplices;
        cfg.with_spectral = c.with_spectral;
        cfg
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
