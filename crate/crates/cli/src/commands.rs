//! One function per subcommand. Each writes its tables (and plots) through
//! [`Outputs`]; parallel loops collect in input order so files are
//! byte-identical between runs.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use nonbloch::config::ModelSpec;
use nonbloch::dynamics::{evolve_lattice, gaussian_initial, EvolveOptions, EDGE_LIMIT};
use nonbloch::model::pbc_band;
use nonbloch::wannier_stark::ws_solve_with_steps;
use nonbloch::{
    bloch_hamiltonian, build_obc_matrix, obc_spectrum, skin_metrics, trace_gbz, wkb_angle, ws_solve, LatticeModel, C64,
};
use rayon::prelude::*;

use crate::config::{Command, RunConfig, SweepAxis};
use crate::csvout::{num, Table};
use crate::error::{CliError, Context};
use crate::svg::{Plot, Series, Style};

pub const WS_HEADER: [&str; 5] = [
    "F_over_E0",
    "Re(cos_theta)",
    "Im(cos_theta)",
    "Theta_overlap",
    "Re(theta_wkb_cos)",
];

/// Where tables and plots go, and what has been written so far.
#[derive(Debug)]
pub struct Outputs {
    pub dir: PathBuf,
    pub svg: bool,
    pub written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: PathBuf, svg: bool) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| CliError::Write {
            path: dir.clone(),
            message: e.to_string(),
        })?;
        Ok(Outputs {
            dir,
            svg,
            written: Vec::new(),
        })
    }

    fn table(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        let path = self.dir.join(name);
        table.write(&path)?;
        self.written.push(path);
        Ok(())
    }

    fn plot(&mut self, name: &str, plot: impl FnOnce() -> Plot) -> Result<(), CliError> {
        if !self.svg {
            return Ok(());
        }
        let path = self.dir.join(name);
        write_text(&path, &plot().render())?;
        self.written.push(path);
        Ok(())
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Write {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Run a fallible job over `items` on the current pool, keeping input order
/// and reporting the first failure in that order.
fn ordered<T: Sync, R: Send>(
    items: &[T],
    job: impl Fn(&T) -> Result<R, CliError> + Sync + Send,
) -> Result<Vec<R>, CliError> {
    let results: Vec<Result<R, CliError>> = items.par_iter().map(job).collect();
    results.into_iter().collect()
}

pub fn execute(cfg: &RunConfig, commands: &[Command], out: &mut Outputs) -> Result<(), CliError> {
    let model = cfg.model.build();
    for cmd in commands {
        log::info!("running {cmd:?}");
        match cmd {
            Command::Bands => bands(cfg, &model, out)?,
            Command::Gbz => gbz(cfg, &model, out)?,
            Command::Obc => obc(cfg, &model, out)?,
            Command::Ws => ws(cfg, &model, out)?,
            Command::Evolve => evolve(cfg, &model, out)?,
            Command::Sweep => sweep(cfg, out)?,
        }
    }
    Ok(())
}

fn pbc_loop(model: &LatticeModel) -> Series {
    let mut pts: Vec<(f64, f64)> = pbc_band(model, 512).iter().map(|e| (e.re, e.im)).collect();
    if let Some(&first) = pts.first() {
        pts.push(first);
    }
    Series::new("periodic E+(k)", Style::Line, pts)
}

fn bands(cfg: &RunConfig, model: &LatticeModel, out: &mut Outputs) -> Result<(), CliError> {
    let n = cfg.bands.samples;
    if n == 0 {
        return Err(CliError::Usage("bands.samples must be positive".into()));
    }
    let mut table = Table::new(&["k", "Re(E_plus)", "Im(E_plus)", "Re(E_minus)", "Im(E_minus)"]);
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for j in 0..n {
        let k = -PI + 2.0 * PI * j as f64 / n as f64;
        let s = bloch_hamiltonian(model, k);
        table.push(vec![
            num(k),
            num(s.e_plus.re),
            num(s.e_plus.im),
            num(s.e_minus.re),
            num(s.e_minus.im),
        ]);
        plus.push((s.e_plus.re, s.e_plus.im));
        minus.push((s.e_minus.re, s.e_minus.im));
    }
    out.table("bands.csv", &table)?;
    out.plot("bands.svg", || {
        Plot::new("Bloch bands", "Re E", "Im E")
            .with(Series::new("E+(k)", Style::Dots, plus))
            .with(Series::new("E-(k)", Style::Dots, minus))
    })
}

fn gbz(cfg: &RunConfig, model: &LatticeModel, out: &mut Outputs) -> Result<(), CliError> {
    let curve = trace_gbz(model, &cfg.gbz).context(|| "tracing the generalized Brillouin zone".into())?;
    let mut table = Table::new(&["Re(E)", "Im(E)", "Re(beta)", "Im(beta)", "abs_beta", "residual"]);
    for p in &curve.points {
        for b in p.betas {
            table.push(vec![
                num(p.energy.re),
                num(p.energy.im),
                num(b.re),
                num(b.im),
                num(b.norm()),
                num(p.residual),
            ]);
        }
    }
    log::info!(
        "{} curve points, branch diameter {:.3e}, collapsed: {}",
        curve.points.len(),
        curve.diameter,
        curve.collapsed
    );
    out.table("gbz.csv", &table)?;
    out.plot("gbz.svg", || {
        Plot::new("Non-Bloch energies", "Re E", "Im E")
            .with(pbc_loop(model))
            .with(Series::new(
                "generalized Brillouin zone",
                Style::Dots,
                curve.points.iter().map(|p| (p.energy.re, p.energy.im)).collect(),
            ))
    })?;
    out.plot("gbz_beta.svg", || {
        let circle = (0..=256)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / 256.0;
                (a.cos(), a.sin())
            })
            .collect();
        Plot::new("Brillouin zones", "Re beta", "Im beta")
            .with(Series::new("unit circle", Style::Dashed, circle))
            .with(Series::new(
                "generalized",
                Style::Dots,
                curve
                    .points
                    .iter()
                    .flat_map(|p| p.betas)
                    .map(|b| (b.re, b.im))
                    .collect(),
            ))
    })
}

fn obc(cfg: &RunConfig, model: &LatticeModel, out: &mut Outputs) -> Result<(), CliError> {
    let n = cfg.obc.cells;
    let chain = build_obc_matrix(model, n).context(|| format!("building the open chain with N = {n}"))?;
    let spec = obc_spectrum(&chain).context(|| format!("diagonalizing the open chain with N = {n}"))?;
    let mut table = Table::new(&["index", "Re(E)", "Im(E)", "center_of_mass", "participation_ratio"]);
    for (i, e) in spec.eigenvalues.iter().enumerate() {
        let v: Vec<C64> = spec.eigenvectors.column(i).iter().copied().collect();
        let (com, pr) = skin_metrics(&v, n).context(|| format!("skin metrics of eigenvector {i}"))?;
        table.push(vec![i.to_string(), num(e.re), num(e.im), num(com), num(pr)]);
    }
    out.table("obc.csv", &table)?;
    out.plot("obc.svg", || {
        Plot::new(format!("Open chain, N = {n}"), "Re E", "Im E")
            .with(pbc_loop(model))
            .with(Series::new(
                "open-chain eigenvalues",
                Style::Dots,
                spec.eigenvalues.iter().map(|e| (e.re, e.im)).collect(),
            ))
    })
}

/// One `ws` row: `F/E_0`, `cos θ`, `Θ` and the semiclassical `cos θ`.
pub fn ws_row(model: &LatticeModel, e0: f64, force: f64, steps: Option<usize>) -> Result<[f64; 5], CliError> {
    let what = || format!("Wannier-Stark problem at F = {force}");
    let res = match steps {
        Some(s) => ws_solve_with_steps(model, force, s),
        None => ws_solve(model, force),
    }
    .context(what)?;
    let wkb = wkb_angle(model, force).context(what)?;
    Ok([
        force / e0,
        res.cos_theta.re,
        res.cos_theta.im,
        res.theta_overlap,
        wkb.closed_form.cos().re,
    ])
}

fn ws_plots(out: &mut Outputs, stem: &str, x_label: &str, rows: &[(f64, [f64; 5])]) -> Result<(), CliError> {
    let series = |col: usize| rows.iter().map(|(x, r)| (*x, r[col])).collect::<Vec<_>>();
    out.plot(&format!("{stem}.svg"), || {
        Plot::new("cos theta", x_label, "cos theta")
            .with(Series::new("Re cos theta", Style::Line, series(1)))
            .with(Series::new("semiclassical", Style::Dashed, series(4)))
    })?;
    out.plot(&format!("{stem}_overlap.svg"), || {
        Plot::new("Eigenvector overlap", x_label, "Theta").with(Series::new("Theta", Style::Line, series(3)))
    })
}

fn ws(cfg: &RunConfig, model: &LatticeModel, out: &mut Outputs) -> Result<(), CliError> {
    let e0 = cfg.e0();
    let forces = cfg
        .ws
        .forces
        .as_ref()
        .ok_or_else(|| CliError::Usage("ws needs ws.f_over_e0 or ws.force".into()))?
        .resolve(e0)
        .context(|| "resolving ws forces".into())?;
    let rows = ordered(&forces, |&f| ws_row(model, e0, f, cfg.ws.steps))?;
    let mut table = Table::new(&WS_HEADER);
    for r in &rows {
        table.push(r.iter().map(|&x| num(x)).collect());
    }
    out.table("ws.csv", &table)?;
    let keyed: Vec<(f64, [f64; 5])> = rows.iter().map(|r| (r[0], *r)).collect();
    ws_plots(out, "ws", "F / E0", &keyed)
}

fn sweep(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let sw = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Usage("sweep needs a sweep section (sweep.axis, sweep.values)".into()))?;
    match sw.axis {
        SweepAxis::FOverE0 => {
            let model = cfg.model.build();
            let e0 = cfg.e0();
            let rows = ordered(&sw.values, |&r| ws_row(&model, e0, r * e0, cfg.ws.steps))?;
            let mut table = Table::new(&WS_HEADER);
            for r in &rows {
                table.push(r.iter().map(|&x| num(x)).collect());
            }
            out.table("sweep.csv", &table)?;
            let keyed: Vec<(f64, [f64; 5])> = rows.iter().map(|r| (r[0], *r)).collect();
            ws_plots(out, "sweep", "F / E0", &keyed)
        }
        SweepAxis::Delta => {
            let base = match &cfg.model {
                ModelSpec::Example(p) => *p,
                ModelSpec::Explicit(_) => {
                    return Err(CliError::Usage(
                        "a delta sweep needs the example.* model parameters".into(),
                    ))
                }
            };
            let ratio = sw.f_over_e0.expect("checked when parsing");
            let rows = ordered(&sw.values, |&delta| {
                let p = nonbloch::config::ExampleParams { delta, ..base };
                let model = p.build();
                let e0 = nonbloch::collapse_energy(&model).re;
                ws_row(&model, e0, ratio * e0, cfg.ws.steps).map(|r| (delta, r))
            })?;
            let mut header = vec!["delta"];
            header.extend(WS_HEADER);
            let mut table = Table::new(&header);
            for (delta, r) in &rows {
                let mut row = vec![num(*delta)];
                row.extend(r.iter().map(|&x| num(x)));
                table.push(row);
            }
            out.table("sweep.csv", &table)?;
            ws_plots(out, "sweep", "delta", &rows)
        }
    }
}

fn evolve(cfg: &RunConfig, model: &LatticeModel, out: &mut Outputs) -> Result<(), CliError> {
    let ev = &cfg.evolve;
    let e0 = cfg.e0();
    let forces = ev
        .forces
        .as_ref()
        .ok_or_else(|| CliError::Usage("evolve needs evolve.f_over_e0 or evolve.force".into()))?
        .resolve(e0)
        .context(|| "resolving evolve forces".into())?;
    let periods: Vec<f64> = match ev.periods.len() {
        1 => vec![ev.periods[0]; forces.len()],
        n if n == forces.len() => ev.periods.clone(),
        n => {
            return Err(CliError::Usage(format!(
                "evolve.periods has {n} entries for {} forces",
                forces.len()
            )))
        }
    };
    let init = gaussian_initial(ev.cells, ev.width, ev.k0, ev.sublattice).context(|| "initial wave packet".into())?;
    let jobs: Vec<(f64, f64)> = forces.iter().copied().zip(periods).collect();
    let runs = ordered(&jobs, |&(force, periods)| {
        let mut opts = EvolveOptions::bloch_periods(force, periods, ev.samples_per_period);
        opts.dt = ev.dt;
        opts.snapshot_stride = ev.snapshot_stride;
        opts.edge_limit = ev.edge_check.then_some(EDGE_LIMIT);
        opts.error_estimate = ev.error_estimate;
        evolve_lattice(model, force, &init, &opts).context(|| format!("evolving the wave packet at F = {force}"))
    })?;

    for (i, ((force, _), traj)) in jobs.iter().zip(&runs).enumerate() {
        let suffix = if jobs.len() == 1 {
            String::new()
        } else {
            format!("_{}", i + 1)
        };
        let tb = 2.0 * PI / force.abs();
        let mut table = Table::new(&["t_over_tB", "P", "P_A", "P_B", "edge_occupancy"]);
        for s in &traj.samples {
            table.push(vec![
                num(s.time / tb),
                num(s.norm),
                num(s.frac_a),
                num(s.frac_b),
                num(s.edge_occupancy),
            ]);
        }
        out.table(&format!("evolve{suffix}.csv"), &table)?;
        if !traj.snapshots.is_empty() {
            let mut snap = Table::new(&["t_over_tB", "n", "abs_a_sq", "abs_b_sq"]);
            for s in &traj.snapshots {
                for (n, (a, b)) in s.abs_a_sq.iter().zip(&s.abs_b_sq).enumerate() {
                    snap.push(vec![num(s.time / tb), (n + 1).to_string(), num(*a), num(*b)]);
                }
            }
            out.table(&format!("evolve{suffix}_snapshots.csv"), &snap)?;
        }
        if let Some(err) = traj.step_halving_error {
            println!(
                "F/E0 = {}: step-halving error {err:.3e} at dt = {:.3e}",
                force / e0,
                traj.dt
            );
        }
        let col = |f: fn(&nonbloch::dynamics::Observables) -> f64| {
            traj.samples.iter().map(|s| (s.time / tb, f(s))).collect::<Vec<_>>()
        };
        let title = format!("F / E0 = {:.4}", force / e0);
        out.plot(&format!("evolve{suffix}.svg"), || {
            Plot::new(title.clone(), "t / tB", "occupation")
                .with(Series::new("P_A", Style::Line, col(|s| s.frac_a)))
                .with(Series::new("P_B", Style::Line, col(|s| s.frac_b)))
        })?;
        out.plot(&format!("evolve{suffix}_norm.svg"), || {
            Plot::new(title.clone(), "t / tB", "P").with(Series::new("norm P", Style::Line, col(|s| s.norm)))
        })?;
    }
    Ok(())
}
