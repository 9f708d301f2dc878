//! Mode dispatch and file layout.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use rotor_core::classical::poincare_section;
use rotor_core::nonlinear::{recurrence_window, suppression_run, window_ratio};
use rotor_core::quantum::{first_cusp_window, KickWindow};
use rotor_core::scaling::{measure_grid, refit_prefactor};
use rotor_core::semiclassics::{map_step_time, pendulum_solution};
use rotor_core::{
    caustic_curve, evolve, fit_arnold_index, fold_detect, peak_amplitude, propagate, uniform_state, ClassicalEnsemble,
    EvolutionRecord, NonlinearConfig, Pendulum, PhasePoint, SimParams,
};

use crate::config::{Mode, RunConfig};
use crate::output::{csv_text, write_file, Cell, Manifest, OutputDir};

pub const AXIS_HEADER: &str = "kick,theta,amplitude";
pub const CAUSTICS_HEADER: &str = "m,k,time,kick_index,theta";
pub const SCALING_HEADER: &str = "K,delta,lambda,measured,predicted";

type Summary = Map<String, Value>;

/// Runs `config`, writing data files and `manifest.json` into its output
/// directory. The manifest is written even when the run fails.
pub fn run(config: &RunConfig) -> Result<Manifest> {
    let start = Instant::now();
    let mut out = OutputDir::create(&config.output_dir)?;
    let mut summary = Summary::new();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .context("building worker pool")?;
    let result = pool.install(|| dispatch(config, &mut out, &mut summary));
    let manifest = Manifest {
        artifact: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        mode: config.mode.name().to_string(),
        config: config.echo.clone(),
        duration_seconds: start.elapsed().as_secs_f64(),
        status: if result.is_ok() { "ok" } else { "error" }.to_string(),
        error: result.as_ref().err().map(|e| format!("{e:#}")),
        files: out.files().to_vec(),
        summary,
    };
    out.write_manifest(&manifest)?;
    result.map(|()| manifest)
}

fn dispatch(config: &RunConfig, out: &mut OutputDir, summary: &mut Summary) -> Result<()> {
    match config.mode {
        Mode::Evolve => run_evolve(config, out, summary),
        Mode::Classical => run_classical(config, out, summary),
        Mode::Semiclassical => run_semiclassical(config, out, summary),
        Mode::Caustics => run_caustics(config, out, summary),
        Mode::Scaling => run_scaling(config, out, summary),
        Mode::Nonlinear => run_nonlinear(config, out, summary),
        Mode::Sweep => run_sweep(config, out, summary),
    }
}

fn axis_rows(rec: &EvolutionRecord) -> Vec<Vec<Cell>> {
    let theta = rec.field.grid().node(rec.axis_node());
    rec.axis_cut
        .iter()
        .enumerate()
        .map(|(n, &v)| vec![n.into(), theta.into(), v.into()])
        .collect()
}

/// First-cusp window clipped to the recorded kicks, if anything is left.
fn clipped_cusp_window(params: &SimParams, recorded: usize) -> Option<KickWindow> {
    if params.kick_strength() <= 0.0 || params.delta() <= 0.0 || recorded == 0 {
        return None;
    }
    let w = first_cusp_window(params.kick_strength(), params.delta());
    let w = KickWindow::new(w.start.max(1), w.end.min(recorded));
    (!w.is_empty()).then_some(w)
}

fn run_evolve(config: &RunConfig, out: &mut OutputDir, summary: &mut Summary) -> Result<()> {
    let params = config.params();
    let rec = evolve(&uniform_state(params.basis_size())?, params)?;
    out.write_csv("axis_cut.csv", AXIS_HEADER, axis_rows(&rec))?;
    if config.write_field {
        out.write_field(
            "field.bin",
            rec.field.as_slice(),
            rec.field.n_rows(),
            rec.field.n_nodes(),
        )?;
    }
    summary.insert("tail_mass".into(), json!(rec.tail_mass));
    summary.insert("max_norm_drift".into(), json!(rec.max_norm_drift));
    if let Some(w) = clipped_cusp_window(params, params.n_kicks()) {
        let peak = peak_amplitude(&rec, w)?;
        summary.insert(
            "first_cusp_peak".into(),
            json!({ "kick": peak.kick, "node": peak.node, "theta": peak.theta, "value": peak.value,
                    "window": [w.start, w.end] }),
        );
    }
    Ok(())
}

fn run_classical(config: &RunConfig, out: &mut OutputDir, summary: &mut Summary) -> Result<()> {
    let params = config.params();
    let n = params.n_kicks();
    let ens = ClassicalEnsemble::uniform(config.trajectories, config.p0, 0.0, TAU);
    let snaps = propagate(&ens, config.map, params, n)?;
    let rows = (0..ens.len()).flat_map(|i| {
        snaps
            .iter()
            .enumerate()
            .map(move |(step, s)| vec![i.into(), step.into(), s.points[i].theta.into(), s.points[i].p.into()])
    });
    out.write_csv("trajectories.csv", "traj,step,theta,p", rows)?;

    let grid: Vec<f64> = (0..config.fold_grid)
        .map(|i| TAU * (i as f64 + 0.5) / config.fold_grid as f64)
        .collect();
    let folds = fold_detect(&grid, config.map, params, n)?;
    out.write_csv(
        "folds.csv",
        "step,theta",
        folds.iter().map(|f| vec![f.step.into(), f.theta.into()]),
    )?;
    summary.insert("fold_points".into(), json!(folds.len()));
    summary.insert("first_fold_step".into(), json!(folds.iter().map(|f| f.step).min()));

    if config.section_seeds > 0 {
        let s = config.section_seeds;
        let seeds: Vec<PhasePoint> = (0..s)
            .map(|i| {
                let u = (i as f64 + 0.5) / s as f64;
                PhasePoint::new(TAU * u, -PI + TAU * u)
            })
            .collect();
        let cloud = poincare_section(params, config.map, &seeds, n)?;
        let rows = cloud
            .iter()
            .enumerate()
            .map(|(j, pt)| vec![(j % s).into(), (j / s).into(), pt.theta.into(), pt.p.into()]);
        out.write_csv("section.csv", "seed,step,theta,p", rows)?;
    }
    Ok(())
}

fn run_semiclassical(config: &RunConfig, out: &mut OutputDir, summary: &mut Summary) -> Result<()> {
    let params = config.params();
    let (k, d, n) = (params.kick_strength(), params.delta(), params.n_kicks());
    let per_angle: Vec<(Vec<Vec<Cell>>, f64, Vec<f64>)> = config
        .theta0
        .par_iter()
        .map(|&theta0| -> Result<_> {
            let pend = Pendulum::new(theta0, k, d)?;
            let traj = rotor_core::classical::trajectory(
                PhasePoint::new(theta0, 0.0),
                rotor_core::MapKind::EpsClassical,
                params,
                n,
            )?;
            let mut rows = Vec::with_capacity(n + 1);
            let mut worst = 0.0f64;
            for (kick, pt) in traj.iter().enumerate() {
                let t = map_step_time(kick, d);
                let exact = pendulum_solution(theta0, t, k, d)?;
                worst = worst.max(rotor_core::classical::angle_diff(pt.theta, exact).abs());
                rows.push(vec![
                    theta0.into(),
                    kick.into(),
                    t.into(),
                    pt.theta.into(),
                    exact.into(),
                    pend.variational(t)?.into(),
                    pend.gelfand_yaglom(t)?.into(),
                ]);
            }
            let zeros = pend.variational_zeros(map_step_time(n, d))?;
            Ok((rows, worst, zeros))
        })
        .collect::<Result<_>>()?;
    let mut discrepancy = Map::new();
    let mut caustics = Map::new();
    for (theta0, (_, worst, zeros)) in config.theta0.iter().zip(&per_angle) {
        discrepancy.insert(theta0.to_string(), json!(worst));
        caustics.insert(
            theta0.to_string(),
            json!(zeros.iter().map(|z| z / d).collect::<Vec<_>>()),
        );
    }
    out.write_csv(
        "semiclassical.csv",
        "theta0,kick,time,map_theta,pendulum_theta,variational,gelfand_yaglom",
        per_angle.into_iter().flat_map(|(rows, _, _)| rows),
    )?;
    summary.insert("max_map_discrepancy".into(), Value::Object(discrepancy));
    summary.insert("caustic_kicks".into(), Value::Object(caustics));
    Ok(())
}

/// `±k_max·i/k_count` for `i = 1..=k_count`, ascending.
pub fn caustic_k_grid(k_max: f64, k_count: usize) -> Vec<f64> {
    let pos: Vec<f64> = (1..=k_count).map(|i| k_max * i as f64 / k_count as f64).collect();
    pos.iter().rev().map(|k| -k).chain(pos.iter().copied()).collect()
}

fn run_caustics(config: &RunConfig, out: &mut OutputDir, summary: &mut Summary) -> Result<()> {
    let params = config.params();
    let grid = caustic_k_grid(config.k_max, config.k_count);
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &m in &config.branches {
        let curve = caustic_curve(params.kick_strength(), params.delta(), m, &grid)?;
        for p in &curve.points {
            rows.push(vec![
                p.m.into(),
                p.k.into(),
                p.time.into(),
                p.kick_index.into(),
                p.theta.into(),
            ]);
        }
        for (k, e) in &curve.failures {
            failures.push(json!({ "m": m, "k": k, "error": e.to_string() }));
        }
    }
    out.write_csv("caustics.csv", CAUSTICS_HEADER, rows)?;
    summary.insert("failures".into(), Value::Array(failures));
    Ok(())
}

fn run_scaling(config: &RunConfig, out: &mut OutputDir, summary: &mut Summary) -> Result<()> {
    let records = measure_grid(&config.jobs)
        .into_iter()
        .zip(&config.jobs)
        .map(|(r, p)| r.with_context(|| format!("K={}, delta={}", p.kick_strength(), p.delta())))
        .collect::<Result<Vec<_>>>()?;
    out.write_csv(
        "scaling.csv",
        SCALING_HEADER,
        records.iter().map(|r| {
            vec![
                r.kick_strength.into(),
                r.delta.into(),
                r.lambda.into(),
                r.measured.into(),
                r.predicted.into(),
            ]
        }),
    )?;
    match fit_arnold_index(&records) {
        Ok(fit) => {
            summary.insert(
                "fit".into(),
                json!({ "exponent": fit.exponent, "intercept": fit.intercept, "residual": fit.residual }),
            );
        }
        Err(e) => {
            summary.insert("fit_error".into(), json!(e.to_string()));
        }
    }
    if config.refit_prefactor {
        summary.insert("prefactor".into(), json!(refit_prefactor(&records)?));
    }
    Ok(())
}

fn run_nonlinear(config: &RunConfig, out: &mut OutputDir, summary: &mut Summary) -> Result<()> {
    let params = config.params();
    let (k, d) = (params.kick_strength(), params.delta());
    let second = recurrence_window(k, d, 1);
    let first = first_cusp_window(k, d);
    let kicks = params.n_kicks().max(second.end);
    let baseline = evolve(&uniform_state(params.basis_size())?, &params.with_kicks(kicks))?;
    let runs = config
        .g_values
        .par_iter()
        .map(|&g| -> Result<_> {
            let cfg = NonlinearConfig::new(g, config.variant, config.substeps)?;
            let (rec, _) = suppression_run(params, &cfg, &baseline).with_context(|| format!("g = {g}"))?;
            let r1 = window_ratio(&rec, &baseline, first)?;
            let r2 = window_ratio(&rec, &baseline, second)?;
            Ok((g, rec, r1, r2))
        })
        .collect::<Result<Vec<_>>>()?;

    let variant = config.variant.to_string();
    let mut rows = Vec::new();
    let mut axis = axis_rows(&baseline)
        .into_iter()
        .map(|r| [vec![Cell::Float(0.0)], r].concat())
        .collect::<Vec<_>>();
    let mut ratios = Map::new();
    for (g, rec, r1, r2) in &runs {
        for (name, w, r) in [("first", first, r1), ("recurrence", second, r2)] {
            rows.push(vec![
                (*g).into(),
                variant.as_str().into(),
                config.substeps.into(),
                name.into(),
                w.start.into(),
                w.end.into(),
                (*r).into(),
            ]);
        }
        ratios.insert(
            g.to_string(),
            json!({ "first": r1, "recurrence": r2, "tail_mass": rec.tail_mass }),
        );
        axis.extend(axis_rows(rec).into_iter().map(|r| [vec![Cell::Float(*g)], r].concat()));
    }
    out.write_csv("nonlinear.csv", "g,variant,substeps,window,start,end,ratio", rows)?;
    out.write_csv("nonlinear_axis.csv", "g,kick,theta,amplitude", axis)?;
    summary.insert("ratios".into(), Value::Object(ratios));
    Ok(())
}

struct SweepJob {
    file: crate::output::FileEntry,
    peak: Option<(usize, f64, f64)>,
}

fn run_sweep(config: &RunConfig, out: &mut OutputDir, summary: &mut Summary) -> Result<()> {
    let root = out.root().to_path_buf();
    let jobs = config
        .jobs
        .par_iter()
        .enumerate()
        .map(|(i, params)| -> Result<SweepJob> {
            let rec = evolve(&uniform_state(params.basis_size())?, params)
                .with_context(|| format!("job {i} (K={}, delta={})", params.kick_strength(), params.delta()))?;
            let text = csv_text(AXIS_HEADER, axis_rows(&rec))?;
            let file = write_file(&root, &job_file(i), text.as_bytes(), rec.axis_cut.len(), None)?;
            let peak = match clipped_cusp_window(params, params.n_kicks()) {
                Some(w) => {
                    let p = peak_amplitude(&rec, w)?;
                    Some((p.kick, p.theta, p.value))
                }
                None => None,
            };
            Ok(SweepJob { file, peak })
        })
        .collect::<Result<Vec<_>>>()?;

    // Merge in job order from the per-job files.
    let mut merged = String::from("job,K,delta,");
    merged.push_str(AXIS_HEADER);
    merged.push('\n');
    let mut peaks = Vec::new();
    for (i, (job, params)) in jobs.into_iter().zip(&config.jobs).enumerate() {
        let text = std::fs::read_to_string(root.join(&job.file.name))?;
        let prefix = format!("{i},{:?},{:?},", params.kick_strength(), params.delta());
        for line in text.lines().skip(1) {
            merged.push_str(&prefix);
            merged.push_str(line);
            merged.push('\n');
        }
        if let Some((kick, theta, value)) = job.peak {
            peaks.push(vec![
                i.into(),
                params.kick_strength().into(),
                params.delta().into(),
                kick.into(),
                theta.into(),
                value.into(),
            ]);
        }
        out.record(job.file);
    }
    out.write_csv_text("sweep_axis.csv", &merged)?;
    out.write_csv("sweep_peaks.csv", "job,K,delta,kick,theta,amplitude", peaks)?;
    summary.insert("jobs".into(), json!(config.jobs.len()));
    Ok(())
}

pub fn job_file(index: usize) -> String {
    format!("jobs/job_{index:04}.csv")
}
