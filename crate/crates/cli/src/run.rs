use std::path::{Path, PathBuf};

use densinv_core::endpoint::{classify, fit_profile, Boundary, EndpointClass};
use densinv_core::fixedpoint::{iterate_with, self_generated_target, InversionProblem, IterationReport};
use densinv_core::norms::{NormConfig, Order};
use densinv_core::observables::{current, density};
use densinv_core::propagator::{driving_potential, make_driving_potential, make_initial_bump, make_plane_wave, propagate, InitialState};
use densinv_core::sturm::track_spectrum;
use densinv_core::{DensityTrajectory, Error, Grid1D, SpaceTimeField, TimeGrid};
use num_complex::Complex64;

use crate::error::{config_err, CliError, CliResult};
use crate::scenario::{InitialPreset, PotentialPreset, Scenario, StartGuess};
use crate::table::{field_header, fmt_f64, read_field, read_table, write_atomic, write_field, write_table, Provenance};

/// Iterations whose error against the reference is written to `v_error.csv`.
pub const ERROR_SNAPSHOTS: [usize; 3] = [1, 200, 1000];

struct Context {
    scenario: Scenario,
    grid: Grid1D,
    times: TimeGrid,
    out: PathBuf,
    prov: Provenance,
}

impl Context {
    fn new(scenario: Scenario, out: Option<&Path>) -> CliResult<Self> {
        let grid = scenario.grid()?;
        let times = scenario.times()?;
        let out = scenario.output_dir(out);
        let prov = Provenance {
            scenario_hash: scenario.hash.clone(),
            grid,
            dt: times.dt(),
        };
        Ok(Self {
            scenario,
            grid,
            times,
            out,
            prov,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn initial_state(&self) -> CliResult<InitialState> {
        match &self.scenario.initial_state {
            InitialPreset::BumpRing => make_initial_bump(&self.grid).map_err(config_err),
            InitialPreset::PlaneWave { k } => make_plane_wave(&self.grid, *k).map_err(config_err),
            InitialPreset::CustomTable { path } => {
                let rows = read_field(&self.scenario.resolve(path), &self.grid, None)?;
                let psi = rows[0].iter().map(|n| Complex64::new(n.max(0.0).sqrt(), 0.0)).collect();
                InitialState::new(self.grid, psi).map_err(config_err)
            }
        }
    }

    fn potential(&self) -> CliResult<SpaceTimeField> {
        match &self.scenario.potential {
            PotentialPreset::Zero => Ok(SpaceTimeField::zeros(self.grid, self.times)),
            PotentialPreset::Sin2Sin => make_driving_potential(&self.grid, &self.times).map_err(config_err),
            PotentialPreset::CustomTable { path } => {
                let rows = read_field(&self.scenario.resolve(path), &self.grid, Some(&self.times))?;
                SpaceTimeField::from_rows(self.grid, self.times, rows).map_err(config_err)
            }
        }
    }

    fn potential_fn(&self) -> Option<fn(f64, f64) -> f64> {
        match self.scenario.potential {
            PotentialPreset::Zero => Some(|_, _| 0.0),
            PotentialPreset::Sin2Sin => Some(driving_potential),
            PotentialPreset::CustomTable { .. } => None,
        }
    }

    fn density_trajectory(&self) -> CliResult<(densinv_core::WaveTrajectory, DensityTrajectory)> {
        let psi0 = self.initial_state()?;
        let v = self.potential()?;
        let psi = propagate(&psi0, &v, &self.times, self.scenario.time.keep_every)?;
        let n = density(&psi)?;
        Ok((psi, n))
    }
}

pub fn run_propagate(scenario: Scenario, out: Option<&Path>) -> CliResult<String> {
    let cx = Context::new(scenario, out)?;
    let (psi, n) = cx.density_trajectory()?;
    let j = current(&psi)?;
    write_field(&cx.path("density.csv"), &cx.prov, n.field())?;
    write_field(&cx.path("current.csv"), &cx.prov, &j)?;
    let mut worst = 0.0f64;
    let rows: Vec<Vec<f64>> = (0..n.field().n_times())
        .map(|k| {
            let norm = cx.grid.quadrature(n.field().slice(k)).unwrap_or(f64::NAN);
            worst = worst.max((norm - 1.0).abs());
            vec![n.field().times().time(k), norm, norm - 1.0]
        })
        .collect();
    let header = ["t", "norm", "deviation"].map(String::from);
    write_table(&cx.path("norm_trace.csv"), &cx.prov, &header, rows)?;
    Ok(format!(
        "propagate: {} time rows -> {}; max norm deviation {worst:.3e}",
        n.field().n_times(),
        cx.out.display()
    ))
}

pub fn run_spectrum(scenario: Scenario, out: Option<&Path>) -> CliResult<String> {
    let cx = Context::new(scenario, out)?;
    let (_, n) = cx.density_trajectory()?;
    let spec = &cx.scenario.spectrum;
    let track = track_spectrum(&n, spec.n_eigs, spec.stride)?;

    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((0..spec.n_eigs).map(|i| format!("lambda{i}")))
        .collect();
    let rows = track.snapshots.iter().map(|s| {
        let mut r = vec![s.t];
        r.extend_from_slice(&s.eigenvalues);
        r
    });
    write_table(&cx.path("eigenvalues.csv"), &cx.prov, &header, rows)?;

    let argmin = track
        .snapshots
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.lambda1().map(|l| (i, l)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map_or(0, |(i, _)| i);
    let mut picks = vec![0, argmin, track.snapshots.len() - 1];
    picks.sort_unstable();
    picks.dedup();
    let step_of = |i: usize| i * spec.stride * cx.scenario.time.keep_every;
    let vec_header: Vec<String> = std::iter::once("x".to_string())
        .chain((0..spec.n_eigs).map(|i| format!("phi{i}")))
        .collect();
    for &i in &picks {
        let s = &track.snapshots[i];
        let rows = (0..cx.grid.n_points()).map(|j| {
            let mut r = vec![cx.grid.x(j)];
            r.extend(s.eigenvectors.iter().map(|v| v[j]));
            r
        });
        write_table(&cx.path(&format!("eigenvectors_t{}.csv", step_of(i))), &cx.prov, &vec_header, rows)?;
    }

    let header = ["t", "gap", "lambda1"].map(String::from);
    let rows = track.crossings.iter().map(|c| vec![c.t, c.gap, c.lambda1]);
    write_table(&cx.path("crossings.csv"), &cx.prov, &header, rows)?;

    let text = format!(
        "{}\nD = {}\nargmin_t = {}\n",
        cx.prov.comment(),
        fmt_f64(track.d_constant),
        fmt_f64(track.argmin_time)
    );
    write_atomic(&cx.path("d_constant.txt"), text.as_bytes())?;
    Ok(format!(
        "spectrum: {} snapshots, D = {:.6} at t = {:.6}, {} near-degeneracies -> {}",
        track.snapshots.len(),
        track.d_constant,
        track.argmin_time,
        track.crossings.len(),
        cx.out.display()
    ))
}

fn write_report(path: &Path, prov: &Provenance, report: &IterationReport) -> CliResult<()> {
    let header = ["k", "alpha_step", "sup_step", "err_ref_firsthalf", "err_ref_full", "contraction_ratio"].map(String::from);
    let nan = f64::NAN;
    let rows = report.records.iter().map(|r| {
        vec![
            r.k as f64,
            r.alpha_step,
            r.sup_step,
            r.err_ref_first_half.unwrap_or(nan),
            r.err_ref_full.unwrap_or(nan),
            r.contraction_ratio.unwrap_or(nan),
        ]
    });
    write_table(path, prov, &header, rows)
}

fn write_errors(path: &Path, prov: &Provenance, grid: &Grid1D, snaps: &[(usize, SpaceTimeField)]) -> CliResult<()> {
    let mut header = vec!["k".to_string()];
    header.extend(field_header(grid));
    let rows = snaps.iter().flat_map(|(k, e)| {
        (0..e.n_times()).map(move |m| {
            let mut r = vec![*k as f64, e.times().time(m)];
            r.extend_from_slice(e.slice(m));
            r
        })
    });
    write_table(path, prov, &header, rows)
}

pub fn run_invert(scenario: Scenario, out: Option<&Path>) -> CliResult<String> {
    let cx = Context::new(scenario, out)?;
    if cx.scenario.time.keep_every != 1 {
        return Err(config_err("invert works on every time step; set keep_every = 1"));
    }
    let inv = cx.scenario.inversion.clone();
    let psi0 = cx.initial_state()?;

    let (n_target, reference) = match &inv.target {
        Some(path) => {
            let rows = read_field(&cx.scenario.resolve(path), &cx.grid, Some(&cx.times))?;
            let field = SpaceTimeField::from_rows(cx.grid, cx.times, rows).map_err(config_err)?;
            let n = DensityTrajectory::new(field).map_err(config_err)?;
            (n, Some(cx.potential()?))
        }
        None if inv.refine == 1 => {
            let v = cx.potential()?;
            let n = density(&propagate(&psi0, &v, &cx.times, 1)?)?;
            (n, Some(v))
        }
        None => {
            let pot = cx
                .potential_fn()
                .ok_or_else(|| config_err("refine > 1 needs an analytic potential preset"))?;
            let make_psi0 = |g: &Grid1D| -> densinv_core::Result<InitialState> {
                match &cx.scenario.initial_state {
                    InitialPreset::BumpRing => make_initial_bump(g),
                    InitialPreset::PlaneWave { k } => make_plane_wave(g, *k),
                    InitialPreset::CustomTable { .. } => Err(Error::InvalidArgument(
                        "refine > 1 needs an analytic initial state preset".into(),
                    )),
                }
            };
            let t = self_generated_target(&cx.grid, &cx.times, inv.refine, make_psi0, pot).map_err(|e| match e {
                Error::InvalidArgument(_) | Error::WrongInterval { .. } => config_err(e),
                other => other.into(),
            })?;
            (t.n_target, Some(t.v_true))
        }
    };

    let order = Order::from_int(inv.p).map_err(config_err)?;
    let mut problem = InversionProblem::new(n_target, psi0)?
        .with_norm(NormConfig::new(order, inv.alpha).map_err(config_err)?)
        .with_max_iterations(inv.max_iterations)
        .with_tolerance(inv.tolerance)
        .map_err(config_err)?
        .with_mode_cutoff(inv.mode_cutoff);
    if inv.v0 == StartGuess::True {
        let v = reference.clone().ok_or_else(|| config_err("v0 = \"true\" needs a known potential"))?;
        problem = problem.with_initial_guess(v).map_err(config_err)?;
    }
    if let Some(r) = reference {
        problem = problem.with_reference(r)?;
    }

    let mut snaps: Vec<(usize, SpaceTimeField)> = Vec::new();
    let outcome = iterate_with(&problem, |k, v| {
        if let (true, Some(r)) = (ERROR_SNAPSHOTS.contains(&k), problem.reference()) {
            if let Ok(d) = v.sub(r) {
                snaps.push((k, d.map(f64::abs)));
            }
        }
    });
    let have_ref = problem.reference().is_some();
    match outcome {
        Ok((v, report)) => {
            write_field(&cx.path("v_recovered.csv"), &cx.prov, &v)?;
            write_report(&cx.path("iteration_report.csv"), &cx.prov, &report)?;
            if have_ref {
                write_errors(&cx.path("v_error.csv"), &cx.prov, &cx.grid, &snaps)?;
            }
            let last = report.last().map_or(f64::NAN, |r| r.alpha_step);
            Ok(format!(
                "invert: {} after {} iterations, last alpha step {last:.3e} -> {}",
                if report.converged { "converged" } else { "not converged" },
                report.iterations_run,
                cx.out.display()
            ))
        }
        Err(Error::Divergence { report }) => {
            write_report(&cx.path("iteration_report.csv"), &cx.prov, &report)?;
            if have_ref {
                write_errors(&cx.path("v_error.csv"), &cx.prov, &cx.grid, &snaps)?;
            }
            Err(CliError::Divergence(Error::Divergence { report }))
        }
        Err(e) => Err(e.into()),
    }
}

pub enum ClassifyInput {
    Direct { p: f64, a_p: f64 },
    Profile { path: PathBuf, boundary: f64, side: Boundary, window: usize },
}

/// Classify from explicit `(p, a_p)` or from a two-column `x, n` table.
pub fn run_classify(input: ClassifyInput) -> CliResult<EndpointClass> {
    match input {
        ClassifyInput::Direct { p, a_p } => classify(p, a_p).map_err(config_err),
        ClassifyInput::Profile { path, boundary, side, window } => {
            let t = read_table(&path)?;
            if t.rows.iter().any(|r| r.len() < 2) {
                return Err(config_err(format!("{}: need columns x, n", path.display())));
            }
            let xs: Vec<f64> = t.rows.iter().map(|r| r[0]).collect();
            let ns: Vec<f64> = t.rows.iter().map(|r| r[1]).collect();
            let fit = fit_profile(&xs, &ns, boundary, side, window).map_err(config_err)?;
            fit.classify().map_err(config_err)
        }
    }
}
