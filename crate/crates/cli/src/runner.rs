//! Stage execution: mesh assembly, spectral caching, check orchestration,
//! and report/manifest emission.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use fractalab::checks::{
    check_adjacent_simplices_l1, check_coarea, check_heat_regularity, check_lusin_holder,
    check_morrey, check_poincare, check_pseudo_poincare, check_sobolev,
    check_truncation_bound, check_variation_comparison, CheckReport, LabContext, MorreyLocus,
    PoincareLocus, PseudoMechanism,
};
use fractalab::export;
use fractalab::functions::{variation, VariationKind};
use fractalab::geometry::{
    build_spec, build_spec_from_ifs, FractalSpec, IfsData, LevelMesh, MeshBudget,
};
use fractalab::spectral::{
    heat_asymptotics, resolvable_window, spectral_decompose, EnergyForm, SpectralData,
};

use crate::config::RunConfig;

pub const CACHE_ENV: &str = "FRACTALAB_CACHE";

/// Every named check, in report order.
pub const CHECK_NAMES: &[&str] = &[
    "poincare-simplex",
    "poincare-ball",
    "pseudo-poincare-heat",
    "pseudo-poincare-average",
    "morrey-simplex",
    "morrey-star",
    "morrey-double-star",
    "morrey-ball",
    "sobolev-balls",
    "coarea",
    "adjacent-simplices-l1",
    "truncation-bound",
    "lusin-holder",
    "heat-regularity",
    "variation-comparison",
];

pub fn run_named_check(ctx: &LabContext, name: &str) -> fractalab::Result<CheckReport> {
    match name {
        "poincare-simplex" => {
            check_poincare(ctx, PoincareLocus::Simplex, VariationKind::KorevaarSchoen)
        }
        "poincare-ball" => {
            check_poincare(ctx, PoincareLocus::Ball, VariationKind::KorevaarSchoen)
        }
        "pseudo-poincare-heat" => check_pseudo_poincare(ctx, PseudoMechanism::Heat),
        "pseudo-poincare-average" => check_pseudo_poincare(ctx, PseudoMechanism::Average),
        "morrey-simplex" => check_morrey(ctx, MorreyLocus::Simplex),
        "morrey-star" => check_morrey(ctx, MorreyLocus::Star),
        "morrey-double-star" => check_morrey(ctx, MorreyLocus::DoubleStar),
        "morrey-ball" => check_morrey(ctx, MorreyLocus::Ball),
        "sobolev-balls" => check_sobolev(ctx),
        "coarea" => check_coarea(ctx),
        "adjacent-simplices-l1" => check_adjacent_simplices_l1(ctx),
        "truncation-bound" => check_truncation_bound(ctx),
        "lusin-holder" => check_lusin_holder(ctx),
        "heat-regularity" => check_heat_regularity(ctx),
        "variation-comparison" => check_variation_comparison(ctx),
        other => Err(fractalab::Error::Usage(format!(
            "unknown check '{other}'; known: {}",
            CHECK_NAMES.join(", ")
        ))),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SkippedCheck {
    pub check: String,
    pub reason: String,
}

/// The one JSON document of a check run; its bytes are a pure function of
/// the configuration.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub config_hash: String,
    pub config: RunConfig,
    pub requested: Vec<String>,
    pub reports: Vec<CheckReport>,
    pub skipped: Vec<SkippedCheck>,
    /// False iff some hard assertion failed.
    pub hard_pass: bool,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub spec_name: String,
    pub level: usize,
    pub truncation: usize,
    pub seed: u64,
    pub command: String,
    pub checks: Vec<String>,
    pub out_dir: String,
    /// Wall-clock seconds per stage; not covered by the determinism contract.
    pub timings: Vec<(String, f64)>,
}

pub struct Runner {
    pub config: RunConfig,
    pub out: PathBuf,
    timings: Vec<(String, f64)>,
}

impl Runner {
    pub fn new(config: RunConfig, out: PathBuf) -> Self {
        Self {
            config,
            out,
            timings: Vec::new(),
        }
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T, String>) -> Result<T, String> {
        let t0 = Instant::now();
        let v = f()?;
        self.timings.push((stage.to_string(), t0.elapsed().as_secs_f64()));
        Ok(v)
    }

    fn cache_dir(&self) -> PathBuf {
        match std::env::var_os(CACHE_ENV) {
            Some(dir) => PathBuf::from(dir),
            None => self.out.join("cache"),
        }
    }

    pub fn build_fractal(&self) -> Result<Arc<FractalSpec>, String> {
        let f = &self.config.fractal;
        let spec = match &f.ifs {
            None => build_spec(&f.name),
            Some(ifs) => {
                let n_maps = ifs.translations.len();
                let dim = ifs
                    .translations
                    .first()
                    .map(|t| t.len())
                    .unwrap_or_default();
                let mut unitaries = Vec::with_capacity(n_maps);
                match &ifs.rotations {
                    None => unitaries.resize_with(n_maps, || Array2::eye(dim)),
                    Some(rows) => {
                        for (i, mat) in rows.iter().enumerate() {
                            let flat: Vec<f64> = mat.iter().flatten().copied().collect();
                            let a = Array2::from_shape_vec((dim, dim), flat).map_err(|e| {
                                format!("rotation {i} is not a {dim}x{dim} matrix: {e}")
                            })?;
                            unitaries.push(a);
                        }
                    }
                }
                let data = IfsData {
                    contraction: ifs.contraction,
                    unitaries,
                    translations: ifs
                        .translations
                        .iter()
                        .map(|t| Array1::from_vec(t.clone()))
                        .collect(),
                    rho: ifs.rho,
                };
                build_spec_from_ifs(&f.name, &data)
            }
        };
        spec.map(Arc::new).map_err(|e| e.to_string())
    }

    pub fn build_mesh(&self) -> Result<(Arc<FractalSpec>, Arc<LevelMesh>), String> {
        let spec = self.build_fractal()?;
        let budget = MeshBudget {
            max_simplices: self.config.checks.max_simplices,
        };
        let mesh = LevelMesh::build(
            spec.clone(),
            self.config.fractal.level,
            self.config.fractal.truncation,
            &budget,
        )
        .map(Arc::new)
        .map_err(|e| e.to_string())?;
        Ok((spec, mesh))
    }

    fn build_context(&self) -> Result<LabContext, String> {
        let (_, mesh) = self.build_mesh()?;
        LabContext::with_mesh(self.config.check_config(), mesh).map_err(|e| e.to_string())
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), String> {
        std::fs::create_dir_all(&self.out)
            .map_err(|e| format!("cannot create {}: {e}", self.out.display()))?;
        let path = self.out.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))
    }

    fn write_manifest(&self, command: &str, checks: &[String]) -> Result<(), String> {
        let manifest = RunManifest {
            config_hash: self.config.hash(),
            spec_name: self.config.fractal.name.clone(),
            level: self.config.fractal.level,
            truncation: self.config.fractal.truncation,
            seed: self.config.checks.seed,
            command: command.to_string(),
            checks: checks.to_vec(),
            out_dir: self.out.display().to_string(),
            timings: self.timings.clone(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        self.write("manifest.json", &text)
    }

    /// Loads the spectral decomposition from the cache, or computes and
    /// stores it. The cache key hashes everything upstream of the spectrum.
    fn ensure_spectral(&mut self, mesh: &Arc<LevelMesh>) -> Result<SpectralData, String> {
        let key = self.config.spectral_hash();
        let dir = self.cache_dir();
        let path = dir.join(format!("spectral-{key}.json"));
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(cached) = serde_json::from_str::<SpectralCache>(&text) {
                if let Some(sd) = cached.restore(mesh) {
                    self.timings.push(("spectral-cache-hit".into(), 0.0));
                    return Ok(sd);
                }
            }
            eprintln!("warning: ignoring stale spectral cache {}", path.display());
        }
        let mesh2 = mesh.clone();
        let sd = self.timed("spectral", move || {
            spectral_decompose(&EnergyForm::new(mesh2), None).map_err(|e| e.to_string())
        })?;
        std::fs::create_dir_all(&dir)
            .map_err(|e| format!("cannot create cache dir {}: {e}", dir.display()))?;
        let text = serde_json::to_string(&SpectralCache::capture(&sd)).expect("cache serializes");
        std::fs::write(&path, text)
            .map_err(|e| format!("cannot write cache {}: {e}", path.display()))?;
        Ok(sd)
    }

    pub fn cmd_build(&mut self) -> Result<(), String> {
        let (_, mesh) = self.timed("mesh", {
            let this = &*self;
            move || this.build_mesh()
        })?;
        self.write("vertices.csv", &export::mesh_vertices_csv(&mesh))?;
        self.write("edges.csv", &export::mesh_edges_csv(&mesh))?;
        self.write_manifest("build", &[])?;
        println!(
            "{}: level {} mesh, {} vertices, {} edges",
            self.config.fractal.name,
            mesh.level,
            mesh.n_vertices(),
            mesh.edges.len()
        );
        Ok(())
    }

    pub fn cmd_spectrum(&mut self) -> Result<(), String> {
        let (_, mesh) = self.build_mesh()?;
        let sd = self.ensure_spectral(&mesh)?;
        self.write("spectrum.csv", &export::spectrum_csv(&sd))?;
        self.write_manifest("spectrum", &[])?;
        println!(
            "{} eigenpairs, lambda_1 = {:.6e}, lambda_max = {:.6e}",
            sd.count(),
            sd.eigenvalues.get(1).copied().unwrap_or(0.0),
            sd.lambda_max()
        );
        Ok(())
    }

    pub fn cmd_heat(&mut self) -> Result<(), String> {
        let (_, mesh) = self.build_mesh()?;
        let sd = self.ensure_spectral(&mesh)?;
        let (lo, hi) = resolvable_window(&sd);
        let times: Vec<f64> = if self.config.heat.times.is_empty() {
            (0..8)
                .map(|i| lo * (hi / lo).powf(i as f64 / 7.0))
                .collect()
        } else {
            self.config.heat.times.clone()
        };
        let x = match self.config.heat.x {
            Some(x) if (x as usize) < mesh.n_vertices() => x,
            Some(x) => return Err(format!("heat vertex {x} outside the mesh")),
            None => (0..mesh.n_vertices() as u32)
                .find(|&id| mesh.incidence[id as usize].len() > 1)
                .unwrap_or(0),
        };
        let g = fractalab::functions::make_test_function(
            &mesh,
            &fractalab::functions::TestFunctionKind::RandomCellwise {
                m: 1,
                seed: self.config.checks.seed,
            },
            None,
        )
        .map_err(|e| e.to_string())?;
        let ha = self
            .timed("heat", || {
                heat_asymptotics(&sd, &times, x, &g).map_err(|e| e.to_string())
            })?;
        let mut csv = String::from("t,p_diag,weak_be_ratio\n");
        for ((t, d), r) in ha
            .times
            .iter()
            .zip(&ha.diag_values)
            .zip(&ha.weak_be_ratios)
        {
            csv.push_str(&format!(
                "{},{},{}\n",
                export::fmt_f64(*t),
                export::fmt_f64(*d),
                export::fmt_f64(*r)
            ));
        }
        self.write("heat_diag.csv", &csv)?;
        self.write_manifest("heat", &[])?;
        println!(
            "on-diagonal slope {:.4} (target {:.4}) at vertex {x} over {} times",
            ha.slope,
            ha.target_slope,
            ha.times.len()
        );
        Ok(())
    }

    pub fn cmd_variation(&mut self) -> Result<(), String> {
        let ctx = self.timed("context", {
            let this = &*self;
            move || this.build_context()
        })?;
        let wanted = &self.config.variation.functions;
        let mut kinds = Vec::new();
        for k in &self.config.variation.kinds {
            kinds.push(match k.as_str() {
                "ks" => VariationKind::KorevaarSchoen,
                "sub-gaussian" => VariationKind::SubGaussian,
                other => return Err(format!("unknown variation kind '{other}'")),
            });
        }
        let all: Vec<u32> = (0..ctx.mesh.n_vertices() as u32).collect();
        let mut csv = String::from("function,kind,p,scale,raw,normalized\n");
        let mut rows = 0usize;
        for (fid, f) in &ctx.suite {
            if !wanted.is_empty() && !wanted.contains(fid) {
                continue;
            }
            for &kind in &kinds {
                let profile = match variation(
                    f,
                    &all,
                    ctx.config.p,
                    kind,
                    ctx.beta.beta,
                    self.config.variation.min_level,
                ) {
                    Ok(p) => p,
                    Err(fractalab::Error::Resolution(msg)) => {
                        eprintln!("skipping {fid}: {msg}");
                        continue;
                    }
                    Err(e) => return Err(e.to_string()),
                };
                let kind_name = match kind {
                    VariationKind::KorevaarSchoen => "ks",
                    VariationKind::SubGaussian => "sub-gaussian",
                };
                for (scale, raw, normalized) in &profile.entries {
                    csv.push_str(&format!(
                        "{fid},{kind_name},{},{},{},{}\n",
                        export::fmt_f64(ctx.config.p),
                        export::fmt_f64(*scale),
                        export::fmt_f64(*raw),
                        export::fmt_f64(*normalized)
                    ));
                    rows += 1;
                }
            }
        }
        self.write("variation.csv", &csv)?;
        self.write_manifest("variation", &[])?;
        println!("{rows} variation rows over {} functions", ctx.suite.len());
        Ok(())
    }

    /// Runs the requested checks; `all` expands to every known check, with
    /// the ones a fractal or exponent does not support recorded as skipped.
    pub fn cmd_check(&mut self, names: &[String]) -> Result<bool, String> {
        let explicit = !(names.len() == 1 && names[0] == "all");
        let requested: Vec<String> = if explicit {
            names.to_vec()
        } else {
            CHECK_NAMES.iter().map(|s| s.to_string()).collect()
        };
        let ctx = self.timed("context", {
            let this = &*self;
            move || this.build_context()
        })?;
        let mut reports = Vec::new();
        let mut skipped = Vec::new();
        for name in &requested {
            let t0 = Instant::now();
            match run_named_check(&ctx, name) {
                Ok(rep) => {
                    self.write(&format!("check-{}.csv", rep.id), &export::check_instances_csv(&rep))?;
                    reports.push(rep);
                }
                Err(fractalab::Error::Unsupported(reason)) if !explicit => {
                    skipped.push(SkippedCheck {
                        check: name.clone(),
                        reason,
                    });
                }
                Err(e) => return Err(format!("check {name}: {e}")),
            }
            self.timings
                .push((format!("check-{name}"), t0.elapsed().as_secs_f64()));
        }
        let hard_pass = reports.iter().all(|r| r.hard_failures.is_empty());
        let run = RunReport {
            config_hash: self.config.hash(),
            config: self.config.clone(),
            requested: requested.clone(),
            reports,
            skipped,
            hard_pass,
        };
        let mut text = serde_json::to_string_pretty(&run).expect("report serializes");
        text.push('\n');
        self.write("report.json", &text)?;
        self.write_manifest("check", &requested)?;
        print_summary(&run);
        Ok(hard_pass)
    }

    pub fn cmd_report(&mut self) -> Result<bool, String> {
        let path = self.out.join("report.json");
        let text = std::fs::read_to_string(&path)
            .map_err(|e| format!("no report at {}: {e}", path.display()))?;
        let run: RunReport = serde_json::from_str(&text)
            .map_err(|e| format!("malformed report {}: {e}", path.display()))?;
        print_summary(&run);
        Ok(run.hard_pass)
    }
}

/// Flat dump of a decomposition; the mesh is rebuilt, not stored.
#[derive(Serialize, Deserialize)]
struct SpectralCache {
    n: usize,
    k: usize,
    full: bool,
    eigenvalues: Vec<f64>,
    /// Row-major (vertex, mode).
    eigenfunctions: Vec<f64>,
}

impl SpectralCache {
    fn capture(sd: &SpectralData) -> Self {
        Self {
            n: sd.eigenfunctions.nrows(),
            k: sd.eigenfunctions.ncols(),
            full: sd.full,
            eigenvalues: sd.eigenvalues.clone(),
            eigenfunctions: sd.eigenfunctions.iter().copied().collect(),
        }
    }

    fn restore(self, mesh: &Arc<LevelMesh>) -> Option<SpectralData> {
        if self.n != mesh.n_vertices() || self.eigenvalues.len() != self.k {
            return None;
        }
        let phi = Array2::from_shape_vec((self.n, self.k), self.eigenfunctions).ok()?;
        Some(SpectralData {
            mesh: mesh.clone(),
            eigenvalues: self.eigenvalues,
            eigenfunctions: phi,
            full: self.full,
        })
    }
}

fn print_summary(run: &RunReport) {
    println!(
        "{:<24} {:>12} {:>10} {:>18} {:>8}",
        "check", "max-ratio", "stability", "fit slope/target", "status"
    );
    for rep in &run.reports {
        let fit = match &rep.exponent_fit {
            Some(f) => format!("{:.3}/{:.3}", f.slope, f.target),
            None => "-".to_string(),
        };
        let status = if !rep.hard_failures.is_empty() {
            "HARD-FAIL"
        } else if rep.pass {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "{:<24} {:>12.4e} {:>10.3} {:>18} {:>8}",
            rep.id, rep.max_ratio, rep.stability_factor, fit, status
        );
    }
    for s in &run.skipped {
        println!("{:<24} {:>12} {:>10} {:>18} {:>8}  ({})", s.check, "-", "-", "-", "SKIPPED", s.reason);
    }
    for name in &run.requested {
        let have = run.reports.iter().any(|r| &r.id == name)
            || run.skipped.iter().any(|s| &s.check == name);
        if !have {
            println!("{:<24} {:>12} {:>10} {:>18} {:>8}", name, "-", "-", "-", "SKIPPED");
        }
    }
}
