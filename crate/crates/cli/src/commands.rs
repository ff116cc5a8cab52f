use std::fs;
use std::path::Path;

use modpde::diagnostics::{
    conservation_audit, convergence_study, operator_norm_probe, regime_check, CsvTable,
};
use modpde::fsio::write_atomic;
use modpde::modulation::{estimate_rho_with, irregularity_norm, write_path, IrregularityGrid};
use modpde::rng::{derive_seed, stream};
use modpde::solvers::{solve, write_trajectory};

use crate::config::ExperimentConfig;
use crate::Failure;

fn prepare_dir(out: &Path) -> Result<(), Failure> {
    fs::create_dir_all(out).map_err(|e| Failure::Config(format!("cannot create {}: {e}", out.display())))
}

fn write_table(path: &Path, table: &CsvTable) -> Result<(), Failure> {
    Ok(write_atomic(path, |w| table.write(w))?)
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

pub fn simulate(cfg: &ExperimentConfig, out: &Path) -> Result<(), Failure> {
    let ctx = cfg.context()?;
    let u0 = cfg.initial_data()?;
    let solver = cfg.solver_config()?;
    let traj = solve(&ctx, &u0, cfg.tau()?, &solver)?;

    let (mean, drift) = conservation_audit(&traj);
    let m0 = traj.states()[0].mass();
    let mut audit = CsvTable::new(&["k", "t", "mean_abs", "mass", "relative_drift"]);
    audit
        .comment(format!("equation: {}", ctx.equation()))
        .comment(format!("scheme: {}", solver.scheme))
        .comment(format!("steps: {}", solver.step_count))
        .comment(format!("picard_iterations: {}", traj.picard_iterations))
        .comment(format!("max_mean_abs: {mean:e}"))
        .comment(format!("max_relative_drift: {drift:e}"));
    for (k, (t, s)) in traj.times().iter().zip(traj.states()).enumerate() {
        let d = (s.mass() - m0).abs();
        let rel = if d == 0.0 { 0.0 } else { d / m0 };
        audit.row(&[&k, t, &s.get(0).norm(), &s.mass(), &rel]);
    }

    prepare_dir(out)?;
    write_trajectory(&traj, &out.join("trajectory"))?;
    write_atomic(&out.join("path.txt"), |w| write_path(ctx.path(), w))?;
    write_table(&out.join("audit.csv"), &audit)?;
    println!("{} {} K={} drift={drift:e}", ctx.equation(), solver.scheme, solver.step_count);
    Ok(())
}

pub fn converge(cfg: &ExperimentConfig, out: &Path) -> Result<(), Failure> {
    let specs = cfg.study_specs()?;
    let ctx = cfg.context()?;
    let u0 = cfg.initial_data()?;
    let base = cfg.solver_config()?;
    let tau = cfg.tau()?;

    let mut errors = CsvTable::new(&["scheme", "steps", "mesh_size", "error"]);
    let mut rates = CsvTable::new(&["scheme", "fitted_rate", "terminal_error", "passed"]);
    for t in [&mut errors, &mut rates] {
        t.comment(format!("equation: {}", ctx.equation()));
    }
    let mut failed = Vec::new();
    for spec in &specs {
        let report = convergence_study(&ctx, &u0, tau, &base, spec)?;
        for ((k, h), e) in spec.meshes.iter().zip(&report.mesh_sizes).zip(&report.errors) {
            errors.row(&[&spec.scheme, k, h, e]);
        }
        rates.comment(format!("{}: reference {}", spec.scheme, report.reference));
        rates.row(&[&spec.scheme, &report.fitted_rate, &report.terminal_error(), &report.passed]);
        println!("{} rate={:.3} passed={}", spec.scheme, report.fitted_rate, report.passed);
        if !report.passed {
            failed.push(spec.scheme.to_string());
        }
    }

    prepare_dir(out)?;
    write_table(&out.join("convergence.csv"), &errors)?;
    write_table(&out.join("rates.csv"), &rates)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Thresholds(format!("thresholds failed for {}", failed.join(", "))))
    }
}

fn grid(cfg: &ExperimentConfig) -> IrregularityGrid {
    let mut g = IrregularityGrid::with_a_max(cfg.irregularity.a_max);
    if let Some(n) = cfg.irregularity.time_nodes {
        g.time_grid_size = n;
    }
    g
}

pub fn irregularity(cfg: &ExperimentConfig, out: &Path) -> Result<(), Failure> {
    let sec = &cfg.irregularity;
    if sec.ensemble == 0 {
        return Err(Failure::Config("irregularity.ensemble must be at least 1".into()));
    }
    let g = grid(cfg);
    let members = if cfg.path_is_random() { sec.ensemble } else { 1 };
    let mut table = CsvTable::new(&["seed", "rho_hat", "norm_estimate"]);
    table
        .comment(format!("path: {}", cfg.path.kind))
        .comment(format!("gamma: {}", sec.gamma))
        .comment(format!("a_max: {}", g.a_max))
        .comment(format!("time_nodes: {}", g.time_grid_size));
    for i in 0..members {
        let (seed, path) = if !cfg.path_is_random() {
            ("-".to_string(), cfg.build_path()?)
        } else {
            let seed = if members == 1 {
                cfg.path_seed()
            } else {
                derive_seed(cfg.path_seed(), stream::ENSEMBLE + i as u64)
            };
            (seed.to_string(), cfg.build_path_with_seed(seed)?)
        };
        let rho_hat = estimate_rho_with(&path, sec.gamma, &g)?;
        let rho = sec.rho.unwrap_or(rho_hat);
        let norm = irregularity_norm(&path, rho, sec.gamma, g.a_max, g.a_grid_size, g.time_grid_size)?;
        table.row(&[&seed, &rho_hat, &norm.norm_estimate]);
    }

    prepare_dir(out)?;
    write_table(&out.join("irregularity.csv"), &table)
}

pub fn probe(cfg: &ExperimentConfig, out: &Path) -> Result<(), Failure> {
    let tags = cfg.probe_tags()?;
    let ctx = cfg.context()?;
    let sec = &cfg.probe;
    let mut norms = CsvTable::new(&["operator", "interval", "max_norm"]);
    let mut rates = CsvTable::new(&["operator", "fitted_rate", "passed"]);
    for t in [&mut norms, &mut rates] {
        t.comment(format!("equation: {}", ctx.equation()))
            .comment(format!("s: {}", sec.s))
            .comment(format!("gamma: {}", sec.gamma))
            .comment(format!("samples: {}", sec.samples));
    }
    let mut failed = Vec::new();
    for tag in tags {
        let report = operator_norm_probe(&ctx, tag, sec.s, sec.gamma, sec.samples, cfg.run.seed)?;
        for (d, m) in report.mesh_sizes.iter().zip(&report.errors) {
            norms.row(&[&tag, d, m]);
        }
        rates.row(&[&tag, &report.fitted_rate, &report.passed]);
        println!("{tag} rate={:.3} passed={}", report.fitted_rate, report.passed);
        if !report.passed {
            failed.push(tag.to_string());
        }
    }

    prepare_dir(out)?;
    write_table(&out.join("probe.csv"), &norms)?;
    write_table(&out.join("probe_rates.csv"), &rates)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Thresholds(format!("bounds failed for {}", failed.join(", "))))
    }
}

pub fn regime(cfg: &ExperimentConfig, out: &Path) -> Result<(), Failure> {
    let eq = cfg.equation()?;
    let sec = &cfg.regime;
    let rho = match sec.rho {
        Some(r) => r,
        None => estimate_rho_with(&cfg.build_path()?, cfg.irregularity.gamma, &grid(cfg))?,
    };
    let verdict = regime_check(eq, rho, sec.gamma, sec.s, sec.s0)?;
    let mut table = CsvTable::new(&["claim", "satisfied", "statement"]);
    table
        .comment(format!("equation: {eq}"))
        .comment(format!("rho: {rho}"))
        .comment(format!("gamma: {}", sec.gamma))
        .comment(format!("s: {}", sec.s));
    for c in &verdict.claims {
        table.row(&[&c.tag, &c.satisfied, &quoted(c.statement)]);
    }

    prepare_dir(out)?;
    write_table(&out.join("regime.csv"), &table)?;
    print!("{verdict}");
    Ok(())
}
