//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; blank lines and lines starting with `#` are
//! skipped. Lists are comma separated. `--set key=value` flags are applied on
//! top of the file, and `--workers` on top of both.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rotor_core::nonlinear::Variant;
use rotor_core::state::DEFAULT_BASIS_SIZE;
use rotor_core::{make_params, MapKind, SimParams};

/// Sub-commands; each maps onto one core module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Evolve,
    Classical,
    Semiclassical,
    Caustics,
    Scaling,
    Nonlinear,
    Sweep,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Evolve => "evolve",
            Mode::Classical => "classical",
            Mode::Semiclassical => "semiclassical",
            Mode::Caustics => "caustics",
            Mode::Scaling => "scaling",
            Mode::Nonlinear => "nonlinear",
            Mode::Sweep => "sweep",
        }
    }

    /// Modes driven by the `K_values × delta_values` grid instead of `K`, `delta`.
    fn uses_grid(self) -> bool {
        matches!(self, Mode::Scaling | Mode::Sweep)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Every accepted key with its default (`None` when required) and a short description.
pub const SCHEMA: &[(&str, Option<&str>, &str)] = &[
    ("K", None, "kick strength (single-run modes)"),
    ("delta", None, "detuning from T = 4π (single-run modes)"),
    ("M", Some("2048"), "momentum basis size, even"),
    (
        "kicks",
        Some("300"),
        "kick count for evolve/classical/semiclassical/sweep",
    ),
    ("workers", Some("1"), "worker threads"),
    ("map", Some("eps_classical"), "classical map: standard | eps_classical"),
    (
        "trajectories",
        Some("5"),
        "classical trajectories started at p0 with uniform θ0",
    ),
    ("p0", Some("0"), "initial momentum of classical trajectories"),
    ("fold_grid", Some("512"), "θ0 grid size for fold detection"),
    (
        "section_seeds",
        Some("0"),
        "seeds for a phase-space section (0 disables)",
    ),
    ("theta0", Some("1,2,3,4,5"), "launch angles for semiclassical mode"),
    ("branches", Some("0"), "caustic branches m"),
    ("k_max", Some("0.95"), "largest |k| on the caustic grid"),
    ("k_count", Some("95"), "caustic grid points per sign of k"),
    ("K_values", Some("0.1,0.5,1"), "kick strengths for scaling/sweep"),
    (
        "delta_values",
        Some("0.0001,0.0005,0.001"),
        "detunings for scaling/sweep",
    ),
    ("refit_prefactor", Some("false"), "also fit the cusp prefactor"),
    (
        "g_values",
        Some("-0.25,0.25"),
        "interaction strengths for nonlinear mode",
    ),
    ("variant", Some("continuous"), "nonlinear variant: continuous | kicked"),
    (
        "substeps",
        Some("16"),
        "Strang substeps per period (continuous variant)",
    ),
    (
        "write_field",
        Some("true"),
        "write the dense amplitude field in evolve mode",
    ),
];

/// All problems found while building a [`RunConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationErrors(pub Vec<String>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} problem(s)):", self.0.len())?;
        for e in &self.0 {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

/// Validated configuration for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    /// One entry for single-run modes; the row-major `K × delta` grid otherwise.
    pub jobs: Vec<SimParams>,
    pub workers: usize,
    pub output_dir: PathBuf,
    pub map: MapKind,
    pub trajectories: usize,
    pub p0: f64,
    pub fold_grid: usize,
    pub section_seeds: usize,
    pub theta0: Vec<f64>,
    pub branches: Vec<u32>,
    pub k_max: f64,
    pub k_count: usize,
    pub refit_prefactor: bool,
    pub g_values: Vec<f64>,
    pub variant: Variant,
    pub substeps: usize,
    pub write_field: bool,
    /// Effective value of every key, defaults included.
    pub echo: BTreeMap<String, String>,
}

impl RunConfig {
    /// The single job of a single-run mode.
    pub fn params(&self) -> &SimParams {
        &self.jobs[0]
    }
}

/// Raw entries from a config file body.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, String>, ValidationErrors> {
    let mut out = BTreeMap::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                let key = k.trim().to_string();
                if out.insert(key.clone(), v.trim().to_string()).is_some() {
                    errors.push(format!("line {}: duplicate key `{key}`", i + 1));
                }
            }
            None => errors.push(format!("line {}: expected `key = value`, got `{line}`", i + 1)),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(ValidationErrors(errors))
    }
}

/// Reads `file` (if any), applies `sets` and `workers`, and validates.
pub fn parse_config(
    mode: Mode,
    file: Option<&Path>,
    sets: &[String],
    workers: Option<usize>,
    output_dir: PathBuf,
) -> Result<RunConfig, ValidationErrors> {
    let mut entries = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ValidationErrors(vec![format!("cannot read {}: {e}", path.display())]))?;
            parse_entries(&text)?
        }
        None => BTreeMap::new(),
    };
    let mut errors = Vec::new();
    for s in sets {
        match s.split_once('=') {
            Some((k, v)) => {
                entries.insert(k.trim().to_string(), v.trim().to_string());
            }
            None => errors.push(format!("--set `{s}`: expected key=value")),
        }
    }
    if let Some(w) = workers {
        entries.insert("workers".into(), w.to_string());
    }
    match build(mode, &entries, output_dir) {
        Ok(cfg) if errors.is_empty() => Ok(cfg),
        Ok(_) => Err(ValidationErrors(errors)),
        Err(ValidationErrors(more)) => {
            errors.extend(more);
            Err(ValidationErrors(errors))
        }
    }
}

struct Reader<'a> {
    entries: &'a BTreeMap<String, String>,
    echo: BTreeMap<String, String>,
    errors: Vec<String>,
}

impl Reader<'_> {
    fn raw(&mut self, key: &str) -> Option<String> {
        let default = SCHEMA.iter().find(|(k, _, _)| *k == key).and_then(|(_, d, _)| *d);
        let value = self.entries.get(key).cloned().or_else(|| default.map(str::to_string))?;
        self.echo.insert(key.to_string(), value.clone());
        Some(value)
    }

    fn parse<T: FromStr>(&mut self, key: &str, fallback: T) -> T
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            Some(v) => v.parse().unwrap_or_else(|e| {
                self.errors.push(format!("{key}: cannot parse `{v}`: {e}"));
                fallback
            }),
            None => fallback,
        }
    }

    fn required_f64(&mut self, key: &str) -> f64 {
        if self.raw(key).is_none() {
            self.errors.push(format!("{key}: required"));
            return f64::NAN;
        }
        self.parse(key, f64::NAN)
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Vec<T>
    where
        T::Err: fmt::Display,
    {
        let Some(v) = self.raw(key) else { return Vec::new() };
        let mut out = Vec::new();
        for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.parse() {
                Ok(x) => out.push(x),
                Err(e) => self.errors.push(format!("{key}: cannot parse `{item}`: {e}")),
            }
        }
        if out.is_empty() {
            self.errors.push(format!("{key}: must not be empty"));
        }
        out
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.errors.push(msg());
        }
    }
}

fn build(mode: Mode, entries: &BTreeMap<String, String>, output_dir: PathBuf) -> Result<RunConfig, ValidationErrors> {
    let mut r = Reader {
        entries,
        echo: BTreeMap::new(),
        errors: Vec::new(),
    };
    for key in entries.keys() {
        if !SCHEMA.iter().any(|(k, _, _)| k == key) {
            r.errors.push(format!("unknown key `{key}`"));
        }
    }

    let basis: i64 = r.parse("M", DEFAULT_BASIS_SIZE as i64);
    let kicks: i64 = r.parse("kicks", 300);
    let workers: usize = r.parse("workers", 1);
    r.check(workers >= 1, || "workers: must be >= 1".into());
    let map: MapKind = r.parse("map", MapKind::EpsClassical);
    let trajectories: usize = r.parse("trajectories", 5);
    let p0: f64 = r.parse("p0", 0.0);
    r.check(p0.is_finite(), || "p0: must be finite".into());
    let fold_grid: usize = r.parse("fold_grid", 512);
    r.check(fold_grid >= 3, || "fold_grid: must be >= 3".into());
    let section_seeds: usize = r.parse("section_seeds", 0);
    let theta0: Vec<f64> = r.list("theta0");
    r.check(theta0.iter().all(|t| *t > 0.0 && *t < TAU), || {
        "theta0: every angle must lie in (0, 2π)".into()
    });
    let branches: Vec<u32> = r.list("branches");
    let k_max: f64 = r.parse("k_max", 0.95);
    r.check(k_max > 0.0 && k_max < 1.0, || {
        format!("k_max: must lie in (0, 1), got {k_max}")
    });
    let k_count: usize = r.parse("k_count", 95);
    r.check(k_count >= 1, || "k_count: must be >= 1".into());
    let refit_prefactor: bool = r.parse("refit_prefactor", false);
    let g_values: Vec<f64> = r.list("g_values");
    r.check(g_values.iter().all(|g| g.is_finite()), || {
        "g_values: must be finite".into()
    });
    let variant: Variant = r.parse("variant", Variant::Continuous);
    let substeps: usize = r.parse("substeps", 16);
    r.check(substeps >= 1, || "substeps: must be >= 1".into());
    let write_field: bool = r.parse("write_field", true);

    let mut jobs = Vec::new();
    if mode.uses_grid() {
        let ks: Vec<f64> = r.list("K_values");
        let ds: Vec<f64> = r.list("delta_values");
        for &k in &ks {
            for &d in &ds {
                match make_params(k, d, basis, kicks, 0.0) {
                    Ok(p) => jobs.push(p),
                    Err(e) => r.errors.push(format!("job (K={k}, delta={d}): {e}")),
                }
            }
        }
        if mode == Mode::Scaling {
            r.check(ks.iter().chain(&ds).all(|v| *v > 0.0), || {
                "K_values, delta_values: must be > 0 for scaling".into()
            });
        }
    } else {
        // NaN means the key was missing or unparsable, which is already reported.
        let k = r.required_f64("K");
        let d = r.required_f64("delta");
        let k_ok = k.is_finite() && k >= 0.0;
        let d_ok = d.is_finite() && d >= 0.0;
        r.check(k.is_nan() || k_ok, || format!("K: must be finite and >= 0, got {k}"));
        r.check(d.is_nan() || d_ok, || {
            format!("delta: must be finite and >= 0, got {d}")
        });
        if k_ok && d_ok {
            match make_params(k, d, basis, kicks, 0.0) {
                Ok(p) => jobs.push(p),
                Err(e) => r.errors.push(e.to_string()),
            }
            if matches!(mode, Mode::Semiclassical | Mode::Caustics | Mode::Nonlinear) {
                r.check(k > 0.0 && d > 0.0, || format!("K, delta: {mode} mode needs both > 0"));
            }
        }
    }

    if r.errors.is_empty() {
        Ok(RunConfig {
            mode,
            jobs,
            workers,
            output_dir,
            map,
            trajectories,
            p0,
            fold_grid,
            section_seeds,
            theta0,
            branches,
            k_max,
            k_count,
            refit_prefactor,
            g_values,
            variant,
            substeps,
            write_field,
            echo: r.echo,
        })
    } else {
        Err(ValidationErrors(r.errors))
    }
}
