//! The four subcommands. Each writes its files under `cfg.out` and returns
//! an [`Outcome`] carrying the exit code and a short summary.

use std::path::PathBuf;

use ltlab_core::certificate::build_certificate;
use ltlab_core::covering::{besicovitch_select, candidate_balls, support};
use ltlab_core::fields::{density, Ball, Field, Grid};
use ltlab_core::optimize::{initial_ensemble, minimize_quotient};
use ltlab_core::spectral::{local_uncertainty_measure, neumann_gap, EigenMethod};
use ltlab_core::Error;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::format::{write_csv, write_ensemble, write_json, write_text};
use crate::table::certificate_table;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_VERDICT: u8 = 3;

#[derive(Debug)]
pub struct Outcome {
    pub exit: u8,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

fn exit_for(ok: bool) -> u8 {
    if ok {
        EXIT_OK
    } else {
        EXIT_VERDICT
    }
}

#[derive(Serialize)]
struct Tagged<'a, T> {
    config: serde_json::Value,
    #[serde(flatten)]
    body: &'a T,
}

/// Builds the certificate; writes `certificate.json` and `certificate.txt`.
pub fn verify(cfg: &RunConfig) -> Result<Outcome> {
    cfg.prepare()?;
    let e = cfg.ensemble()?;
    let cert = build_certificate(&e, &cfg.certificate())?;
    let json = cfg.out.join("certificate.json");
    let txt = cfg.out.join("certificate.txt");
    write_json(&json, &Tagged { config: cfg.snapshot(), body: &cert })?;
    write_text(&txt, &certificate_table(&cert))?;
    Ok(Outcome {
        exit: exit_for(cert.verdict),
        summary: format!(
            "mode={:?} verdict={} effective_constant={:.6} direct_quotient={:.6}",
            cert.mode, cert.verdict, cert.effective_constant, cert.direct_quotient
        ),
        files: vec![json, txt],
    })
}

#[derive(Serialize)]
struct CoverBall {
    center: Vec<f64>,
    cell: usize,
    radius: f64,
    half_steps: u64,
    mass: f64,
    volume: f64,
    cells: usize,
}

#[derive(Serialize)]
struct CoverReport {
    balls: Vec<CoverBall>,
    multiplicity: usize,
    covered: bool,
    support_cells: usize,
    candidates: usize,
    max_overlap: usize,
}

#[derive(Serialize)]
struct CoverRow {
    center: String,
    radius: f64,
    mass: f64,
    volume: f64,
    cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefineRow {
    pub level: usize,
    pub points: String,
    pub cells: usize,
    pub support_cells: usize,
    pub balls: usize,
    pub multiplicity: usize,
    pub covered: bool,
    pub ceiling: Option<usize>,
    pub within_ceiling: bool,
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(";")
}

fn cover_density(rho: &Field, target: f64) -> Result<CoverReport> {
    let grid = *rho.grid();
    let cands = candidate_balls(rho, target)?;
    let balls: Vec<Ball> = cands.iter().map(|c| c.ball.clone()).collect();
    let cov = besicovitch_select(&grid, &balls, &support(&rho.re(), &grid))?;
    let selected = cov
        .selected
        .iter()
        .map(|&i| {
            let b = &cands[i].ball;
            CoverBall {
                center: b.center_point(&grid),
                cell: b.center(),
                radius: b.radius(),
                half_steps: b.half_steps(),
                mass: cands[i].mass,
                volume: b.volume(&grid),
                cells: b.cell_count(&grid),
            }
        })
        .collect();
    Ok(CoverReport {
        balls: selected,
        multiplicity: cov.multiplicity,
        covered: cov.covered,
        support_cells: cov.support.len(),
        candidates: cands.len(),
        max_overlap: cov.max_overlap,
    })
}

/// Piecewise-constant refinement: every cell split `2^level` times per axis.
pub fn refine_density(rho: &Field, level: usize) -> Result<Field> {
    let grid = rho.grid();
    let dim = grid.dim();
    let factor = 1usize << level;
    let points: Vec<usize> = grid.points().iter().map(|&n| n * factor).collect();
    let extent: Vec<(f64, f64)> = (0..dim).map(|a| grid.extent(a)).collect();
    let fine = Grid::new(dim, &extent, &points)?;
    let coarse = rho.re();
    let values = (0..fine.cell_count())
        .map(|cell| {
            let c = fine.coords_of(cell);
            let parent: Vec<usize> = c[..dim].iter().map(|&x| x >> level).collect();
            coarse[grid.index_of(&parent).expect("parent cell exists")]
        })
        .collect();
    Ok(Field::real(fine, values)?)
}

fn default_ceiling(dim: usize) -> Option<usize> {
    match dim {
        1 => Some(2),
        2 => Some(19),
        _ => None,
    }
}

/// Multiplicity of the covering at each refinement level `0..=levels`.
pub fn refinement_sweep(rho: &Field, target: f64, levels: usize, ceiling: Option<usize>) -> Result<Vec<RefineRow>> {
    let ceiling = ceiling.or(default_ceiling(rho.grid().dim()));
    (0..=levels)
        .map(|level| {
            let fine = if level == 0 { rho.clone() } else { refine_density(rho, level)? };
            let rep = cover_density(&fine, target)?;
            let g = fine.grid();
            Ok(RefineRow {
                level,
                points: g.points().iter().map(|n| n.to_string()).collect::<Vec<_>>().join("x"),
                cells: g.cell_count(),
                support_cells: rep.support_cells,
                balls: rep.balls.len(),
                multiplicity: rep.multiplicity,
                covered: rep.covered,
                ceiling,
                within_ceiling: ceiling.is_none_or(|c| rep.multiplicity <= c),
            })
        })
        .collect()
}

/// Covers the density; writes `covering.json`, `covering.csv` and, with
/// refinement levels, `refinement.csv`.
pub fn cover(cfg: &RunConfig) -> Result<Outcome> {
    cfg.prepare()?;
    let e = cfg.ensemble()?;
    let rho = density(&e);
    let rep = cover_density(&rho, cfg.target_mass)?;
    let snapshot = cfg.snapshot();
    let json = cfg.out.join("covering.json");
    let csv = cfg.out.join("covering.csv");
    write_json(&json, &Tagged { config: snapshot.clone(), body: &rep })?;
    let rows: Vec<CoverRow> = rep
        .balls
        .iter()
        .map(|b| CoverRow { center: join(&b.center), radius: b.radius, mass: b.mass, volume: b.volume, cells: b.cells })
        .collect();
    write_csv(&csv, &snapshot, &rows)?;
    let mut files = vec![json, csv];
    let mut ok = rep.covered;
    let mut summary = format!(
        "balls={} multiplicity={} covered={}",
        rep.balls.len(),
        rep.multiplicity,
        rep.covered
    );
    if cfg.cover.refine_levels > 0 {
        let sweep = refinement_sweep(&rho, cfg.target_mass, cfg.cover.refine_levels, cfg.cover.ceiling)?;
        let path = cfg.out.join("refinement.csv");
        write_csv(&path, &snapshot, &sweep)?;
        files.push(path);
        ok &= sweep.iter().all(|r| r.covered && r.within_ceiling);
        let ms: Vec<String> = sweep.iter().map(|r| r.multiplicity.to_string()).collect();
        summary.push_str(&format!(" refinement_multiplicities={}", ms.join(",")));
    }
    Ok(Outcome { exit: exit_for(ok), summary, files })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapRow {
    pub ball_center: String,
    pub requested_radius: f64,
    pub radius: f64,
    pub cells: usize,
    pub volume: f64,
    pub gap: Option<f64>,
    pub gap_times_volume_pow: Option<f64>,
    pub fitted_constant: Option<f64>,
    pub method: Option<EigenMethod>,
    pub status: &'static str,
}

/// Neumann gaps of the configured balls (or a default radius sweep around
/// the box center); writes `gaps.csv`.
pub fn gap(cfg: &RunConfig) -> Result<Outcome> {
    cfg.prepare()?;
    let (grid, sqrt_rho) = if cfg.has_ensemble() {
        let e = cfg.ensemble()?;
        let rho = density(&e).re();
        let g = *e.grid();
        (g, Some(Field::real(g, rho.into_iter().map(f64::sqrt).collect())?))
    } else {
        (cfg.grid()?, None)
    };
    let dim = grid.dim();
    let mut specs: Vec<(Vec<f64>, f64)> = cfg.gap.balls.iter().map(|b| (b.center.clone(), b.radius)).collect();
    if let Some(s) = &cfg.gap.sweep {
        specs.extend(s.radii.iter().map(|&r| (s.center.clone(), r)));
    }
    if specs.is_empty() {
        let mid: Vec<f64> = (0..dim).map(|a| grid.extent(a)).map(|(lo, hi)| 0.5 * (lo + hi)).collect();
        let half = (0..dim).map(|a| grid.extent(a)).map(|(lo, hi)| 0.5 * (hi - lo)).fold(f64::INFINITY, f64::min);
        specs.extend([0.2, 0.4, 0.6, 0.8].iter().map(|f| (mid.clone(), f * half)));
    }
    let mut rows = Vec::with_capacity(specs.len());
    for (center, requested) in specs {
        if center.len() != dim {
            return Err(CliError::Config(format!("ball center has {} coordinates, grid has {dim}", center.len())));
        }
        let ball = Ball::around(&grid, &center, requested)?;
        let fitted = match &sqrt_rho {
            Some(f) => match local_uncertainty_measure(f, &ball) {
                Ok(u) => Some(u.fitted_constant),
                Err(Error::ZeroOnBall) => None,
                Err(e) => return Err(e.into()),
            },
            None => None,
        };
        let base = GapRow {
            ball_center: join(&ball.center_point(&grid)),
            requested_radius: requested,
            radius: ball.radius(),
            cells: ball.cell_count(&grid),
            volume: ball.volume(&grid),
            gap: None,
            gap_times_volume_pow: None,
            fitted_constant: fitted,
            method: None,
            status: "ok",
        };
        rows.push(match neumann_gap(&ball, &grid, &cfg.eigen) {
            Ok(r) => GapRow {
                gap: Some(r.gap),
                gap_times_volume_pow: Some(r.gap_times_volume_pow),
                method: Some(r.method),
                ..base
            },
            Err(Error::GapUndefined) => GapRow { status: "gap_undefined", ..base },
            Err(e) => return Err(e.into()),
        });
    }
    let path = cfg.out.join("gaps.csv");
    write_csv(&path, &cfg.snapshot(), &rows)?;
    let undefined = rows.iter().filter(|r| r.status != "ok").count();
    Ok(Outcome {
        exit: EXIT_OK,
        summary: format!("balls={} gap_undefined={undefined}", rows.len()),
        files: vec![path],
    })
}

#[derive(Serialize)]
struct OptimizeReport {
    converged: bool,
    steps_taken: usize,
    initial_quotient: f64,
    final_quotient: f64,
    certificate_verdict: bool,
    effective_constant: f64,
}

/// Minimizes the quotient from the input (or a seeded random frame); writes
/// `trace.csv`, `ensemble.json` and `optimize.json`.
pub fn optimize(cfg: &RunConfig) -> Result<Outcome> {
    cfg.prepare()?;
    let opt = cfg.optimizer();
    if !(opt.step_size.is_finite() && opt.step_size > 0.0) {
        return Err(CliError::Config(format!("step_size must be positive, got {}", opt.step_size)));
    }
    let init = if cfg.has_ensemble() { cfg.ensemble()? } else { initial_ensemble(&cfg.grid()?, &opt)? };
    let out = minimize_quotient(&init, &opt)?;
    let cert = build_certificate(&out.ensemble, &cfg.certificate())?;
    let snapshot = cfg.snapshot();
    let trace = cfg.out.join("trace.csv");
    let ens = cfg.out.join("ensemble.json");
    let summary_path = cfg.out.join("optimize.json");
    write_csv(&trace, &snapshot, &out.trace)?;
    write_ensemble(&ens, &out.ensemble, Some(snapshot.clone()))?;
    let first = out.trace.first().expect("trace has the initial row");
    let last = out.trace.last().expect("trace has the initial row");
    let report = OptimizeReport {
        converged: out.converged,
        steps_taken: last.step,
        initial_quotient: first.quotient,
        final_quotient: last.quotient,
        certificate_verdict: cert.verdict,
        effective_constant: cert.effective_constant,
    };
    write_json(&summary_path, &Tagged { config: snapshot, body: &report })?;
    Ok(Outcome {
        exit: exit_for(cert.verdict),
        summary: format!(
            "steps={} quotient {:.6} -> {:.6} converged={} certificate={}",
            last.step, first.quotient, last.quotient, out.converged, cert.verdict
        ),
        files: vec![trace, ens, summary_path],
    })
}
