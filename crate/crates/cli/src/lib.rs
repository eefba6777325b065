//! Configuration ingestion, pipeline orchestration, and report emission
//! for the loop-space fixed-point experiments.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use cupflow_core::action::{condition_a_certificate, ChiCutoff};
use cupflow_core::dynamics::{
    audit_isolating_neighborhood, auto_radius, cluster_families, continuation_sweep,
    multistart_search, AuditParams, ContinuationReport, CriticalFamily, IsolationAudit,
    MultistartConfig, SolveOutcome, SolveStatus, TruncationLevel,
};
use cupflow_core::hamiltonian::{lift, HamiltonianSpec, LiftedHamiltonian, QuadraticForm, TrigTerm};
use cupflow_core::report::{RunReport, Timings, REPORT_SCHEMA_VERSION};
use cupflow_core::{model_by_name, rest_point_lower_bound};

/// Outer radius of the isolation box: a number, or "auto" to derive it
/// from an audit of the unperturbed flow.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum RadiusConfig {
    Fixed(f64),
    Auto(AutoTag),
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl Default for RadiusConfig {
    fn default() -> Self {
        RadiusConfig::Auto(AutoTag::Auto)
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct TermConfig {
    pub amplitude: f64,
    #[serde(default)]
    pub freq_t: i64,
    pub freq_x: Vec<i64>,
    #[serde(default)]
    pub phase: f64,
    /// Quadratic form on R^(2n+2), given by matrix rows.
    pub form: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    #[serde(default)]
    pub terms: Vec<TermConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateConfig {
    #[serde(default = "default_cert_samples")]
    pub samples: usize,
    #[serde(default = "default_smallness_grid")]
    pub smallness_grid: usize,
}

fn default_cert_samples() -> usize {
    2000
}

fn default_smallness_grid() -> usize {
    16
}

impl Default for CertificateConfig {
    fn default() -> Self {
        CertificateConfig {
            samples: default_cert_samples(),
            smallness_grid: default_smallness_grid(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultistartSection {
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default = "default_perturbation")]
    pub perturbation: f64,
}

fn default_starts() -> usize {
    200
}

fn default_perturbation() -> f64 {
    0.05
}

impl Default for MultistartSection {
    fn default() -> Self {
        MultistartSection {
            starts: default_starts(),
            perturbation: default_perturbation(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    #[serde(default = "default_solver_tol")]
    pub solver: f64,
    #[serde(default = "default_solver_iters")]
    pub solver_iters: usize,
    #[serde(default = "default_cluster_radius")]
    pub cluster_radius: f64,
}

fn default_solver_tol() -> f64 {
    1e-10
}

fn default_solver_iters() -> usize {
    120
}

fn default_cluster_radius() -> f64 {
    1e-3
}

impl Default for ToleranceSection {
    fn default() -> Self {
        ToleranceSection {
            solver: default_solver_tol(),
            solver_iters: default_solver_iters(),
            cluster_radius: default_cluster_radius(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    #[serde(default = "default_shell_samples")]
    pub shell_samples: usize,
    #[serde(default = "default_interior_samples")]
    pub interior_samples: usize,
    #[serde(default = "default_rest_starts")]
    pub rest_starts: usize,
    #[serde(default = "default_tail_samples")]
    pub tail_samples: usize,
}

fn default_shell_samples() -> usize {
    40
}

fn default_interior_samples() -> usize {
    80
}

fn default_rest_starts() -> usize {
    4
}

fn default_tail_samples() -> usize {
    20
}

impl Default for AuditSection {
    fn default() -> Self {
        AuditSection {
            shell_samples: default_shell_samples(),
            interior_samples: default_interior_samples(),
            rest_starts: default_rest_starts(),
            tail_samples: default_tail_samples(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub m: usize,
    pub n: usize,
    /// Symmetric truncation depth: modes -k through k are retained.
    pub k: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub radius: RadiusConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_s_steps")]
    pub s_steps: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub hamiltonian: HamiltonianConfig,
    #[serde(default)]
    pub certificate: CertificateConfig,
    #[serde(default)]
    pub multistart: MultistartSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
    #[serde(default)]
    pub audit: AuditSection,
}

fn default_eps() -> f64 {
    0.05
}

fn default_seed() -> u64 {
    1
}

fn default_s_steps() -> usize {
    10
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("parsing run configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            bail!("m and n must be at least 1");
        }
        if self.k < 2 {
            bail!("truncation depth k must be at least 2");
        }
        if !(self.eps > 0.0 && self.eps < 0.25) {
            bail!("eps must lie in (0, 1/4)");
        }
        if self.s_steps < 2 {
            bail!("s_steps must be at least 2");
        }
        if self.tolerances.solver <= 0.0 || self.tolerances.cluster_radius <= 0.0 {
            bail!("tolerances must be positive");
        }
        if let RadiusConfig::Fixed(r) = self.radius {
            if r <= 0.0 {
                bail!("radius must be positive");
            }
        }
        Ok(())
    }

    pub fn hamiltonian_spec(&self) -> Result<HamiltonianSpec> {
        let ydim = 2 * self.n + 2;
        let mut terms = Vec::new();
        for t in &self.hamiltonian.terms {
            if t.form.len() != ydim || t.form.iter().any(|row| row.len() != ydim) {
                bail!("each form must be a {ydim} x {ydim} matrix");
            }
            let flat: Vec<f64> = t.form.iter().flatten().copied().collect();
            terms.push(TrigTerm {
                amplitude: t.amplitude,
                freq_t: t.freq_t,
                freq_x: t.freq_x.clone(),
                phase: t.phase,
                form: QuadraticForm::new(ydim, flat)?,
            });
        }
        let spec = HamiltonianSpec {
            m: self.m,
            n: self.n,
            terms,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn level(&self) -> Result<TruncationLevel> {
        Ok(TruncationLevel::symmetric(self.k)?)
    }

    pub fn audit_params(&self) -> AuditParams {
        AuditParams {
            shell_samples: self.audit.shell_samples,
            interior_samples: self.audit.interior_samples,
            rest_starts: self.audit.rest_starts,
            tail_samples: self.audit.tail_samples,
            seed: self.seed,
            solver_tol: self.tolerances.solver.max(1e-8),
            solver_iters: self.tolerances.solver_iters,
            ..AuditParams::default()
        }
    }
}

/// Resolves the output path against CUPFLOW_OUTDIR when set.
pub fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os("CUPFLOW_OUTDIR") {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Honors CUPFLOW_THREADS; silently keeps the default pool if it was
/// already initialized.
pub fn configure_threads() {
    if let Ok(v) = std::env::var("CUPFLOW_THREADS") {
        if let Ok(threads) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
}

pub struct Pipeline {
    pub config: RunConfig,
    pub hamiltonian: LiftedHamiltonian,
    pub chi: ChiCutoff,
    pub level: TruncationLevel,
}

impl Pipeline {
    pub fn new(config: RunConfig) -> Result<Self> {
        let hamiltonian = lift(config.hamiltonian_spec()?)?;
        let chi = ChiCutoff::standard(config.eps)?;
        let level = config.level()?;
        Ok(Pipeline {
            config,
            hamiltonian,
            chi,
            level,
        })
    }

    pub fn resolve_radius(&self) -> Result<(f64, Option<IsolationAudit>)> {
        match self.config.radius {
            RadiusConfig::Fixed(r) => Ok((r, None)),
            RadiusConfig::Auto(_) => {
                let (r, audit) = auto_radius(
                    self.config.m,
                    self.config.n,
                    &self.chi,
                    &self.level,
                    &self.config.audit_params(),
                )?;
                Ok((r, Some(audit)))
            }
        }
    }

    pub fn sweep(&self, radius: f64) -> Result<ContinuationReport> {
        Ok(continuation_sweep(
            &self.hamiltonian,
            &self.chi,
            &self.level,
            radius,
            self.config.s_steps,
            &self.config.audit_params(),
        )?)
    }

    pub fn search(&self, radius: f64) -> Vec<SolveOutcome> {
        let cfg = MultistartConfig {
            starts: self.config.multistart.starts,
            seed: self.config.seed,
            perturbation: self.config.multistart.perturbation,
            tol: self.config.tolerances.solver,
            max_iters: self.config.tolerances.solver_iters,
            radius,
        };
        multistart_search(&self.hamiltonian, &self.chi, &self.level, &cfg)
    }

    pub fn families(&self, outcomes: &[SolveOutcome]) -> Vec<CriticalFamily> {
        let points: Vec<_> = outcomes
            .iter()
            .filter(|o| o.status == SolveStatus::Converged && o.lambda_interior)
            .map(|o| o.point.clone())
            .collect();
        cluster_families(
            &self.hamiltonian,
            &self.chi,
            &points,
            self.config.tolerances.cluster_radius,
        )
    }
}

/// Runs lift -> certificate -> radius -> continuation -> multistart ->
/// clustering -> cohomology bound and assembles the report. A failed
/// certificate does not abort the run; it clears `hypotheses_met`.
pub fn run_pipeline(config: RunConfig) -> Result<RunReport> {
    let mut seconds = BTreeMap::new();
    let mut clock = |name: &str, t0: Instant| {
        seconds.insert(name.to_string(), t0.elapsed().as_secs_f64());
    };

    let pipe = Pipeline::new(config)?;
    let cfg = &pipe.config;

    let t0 = Instant::now();
    let certificate = condition_a_certificate(
        &pipe.hamiltonian,
        pipe.level.max_mode(),
        cfg.eps,
        cfg.certificate.samples,
        cfg.seed,
        cfg.certificate.smallness_grid,
    )?;
    clock("certificate", t0);

    let t0 = Instant::now();
    let (radius, reference_audit) = pipe.resolve_radius()?;
    clock("radius", t0);

    let t0 = Instant::now();
    let continuation = pipe.sweep(radius)?;
    clock("continuation", t0);

    let t0 = Instant::now();
    let outcomes = pipe.search(radius);
    clock("multistart", t0);

    let t0 = Instant::now();
    let families = pipe.families(&outcomes);
    clock("clustering", t0);

    let converged = outcomes
        .iter()
        .filter(|o| o.status == SolveStatus::Converged)
        .count();
    let family_count = families.len();
    // a continuum leaves nearly every start in its own cluster
    let continuum_suspected = family_count > 8.max(converged / 2);

    let t0 = Instant::now();
    let model = model_by_name(&format!("product {} {}", cfg.m, cfg.n))?;
    let cohomology_lower_bound = rest_point_lower_bound(&model);
    clock("cohomology", t0);

    let hypotheses_met = certificate.verdict && continuation.pass;
    let verdict = hypotheses_met && family_count >= cohomology_lower_bound;

    let report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        seed: cfg.seed,
        m: cfg.m,
        n: cfg.n,
        level: pipe.level,
        eps: cfg.eps,
        radius,
        certificate,
        reference_audit,
        continuation,
        families,
        family_count,
        continuum_suspected,
        cohomology_lower_bound,
        hypotheses_met,
        verdict,
        timings: Timings { seconds },
    };

    if let Some(path) = &cfg.output {
        let path = resolve_output(path);
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::write(&path, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(report)
}

/// Report serialization with the timing block removed, for byte-level
/// reproducibility comparisons.
pub fn report_without_timings(report: &RunReport) -> Result<String> {
    let mut value = serde_json::to_value(report)?;
    if let Some(obj) = value.as_object_mut() {
        obj.remove("timings");
    }
    Ok(serde_json::to_string_pretty(&value)?)
}

/// Standalone audit entry point used by the `audit` subcommand.
pub fn run_audit(config: &RunConfig, radius: f64, s_grid: &[f64]) -> Result<IsolationAudit> {
    let pipe = Pipeline::new(config.clone())?;
    Ok(audit_isolating_neighborhood(
        &pipe.hamiltonian,
        &pipe.chi,
        &pipe.level,
        radius,
        s_grid,
        &config.audit_params(),
    ))
}
