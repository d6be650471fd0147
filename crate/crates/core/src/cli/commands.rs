//! Command implementations producing [`ResultTable`]s.

use crate::channels::{
    check_invariant, check_theta_sqdb, is_parity_preserving, s_adjoint, s_duality_residual,
    theta_kms_adjoint, theta_kms_duality_residual, Semigroup, BALANCE_TOLERANCE,
    INVARIANCE_TOLERANCE,
};
use crate::choi::{choi_state, first_factor_density};
use crate::circulant::{circulant_choi, closed_form_epr, generator_limit_epr};
use crate::epr::{epr_slope, fr_epr, relent_series, DEFAULT_LEVELS, DEFAULT_T0};
use crate::error::Result;
use crate::linalg::{eigh, flip_operator, trace, trace_norm};
use crate::random::{random_matrix, rng};
use crate::states::DensityMatrix;

use super::config::{Command, ExperimentConfig, Model, TimeGrid};
use super::table::{Cell, ResultTable};
use super::CliError;

/// Command-line overrides of the configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub command: Option<Command>,
    pub t0: Option<f64>,
    pub levels: Option<usize>,
    pub seed: Option<u64>,
}

/// A finished table and whether any reported check failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: ResultTable,
    pub failed: bool,
}

const DUALITY_TOLERANCE: f64 = 1e-10;
const CHOI_TRACE_TOLERANCE: f64 = 1e-10;
const CHOI_PSD_TOLERANCE: f64 = 1e-11;
const FLIP_TOLERANCE: f64 = 1e-10;
const SYMMETRIC_FORMULA_TOLERANCE: f64 = 1e-8;
const FAST_PATH_TOLERANCE: f64 = 1e-9;
const SLOPE_RELATIVE_TOLERANCE: f64 = 5e-3;
const SLOPE_ZERO_TOLERANCE: f64 = 1e-8;
const FR_TOLERANCE: f64 = 1e-6;
const DUALITY_SAMPLES: usize = 20;

/// The effective grid: command-line values override the configured grid.
fn resolve_grid(config: &ExperimentConfig, opts: &RunOptions) -> std::result::Result<TimeGrid, CliError> {
    let grid = match &config.t_grid {
        Some(TimeGrid::Geometric { t0, levels }) => TimeGrid::Geometric {
            t0: opts.t0.unwrap_or(*t0),
            levels: opts.levels.unwrap_or(*levels),
        },
        Some(explicit @ TimeGrid::Explicit { .. }) if opts.t0.is_none() && opts.levels.is_none() => {
            explicit.clone()
        }
        _ => TimeGrid::Geometric {
            t0: opts.t0.unwrap_or(DEFAULT_T0),
            levels: opts.levels.unwrap_or(DEFAULT_LEVELS),
        },
    };
    if let TimeGrid::Geometric { t0, levels } = grid {
        if !(t0.is_finite() && t0 > 0.0) || levels == 0 {
            return Err(CliError::Usage(format!(
                "grid needs t0 > 0 and levels >= 1 (got t0 = {t0}, levels = {levels})"
            )));
        }
    }
    Ok(grid)
}

fn geometric(grid: &TimeGrid) -> std::result::Result<(f64, usize), CliError> {
    match grid {
        TimeGrid::Geometric { t0, levels } => Ok((*t0, *levels)),
        TimeGrid::Explicit { .. } => Err(CliError::Usage(
            "epr needs a geometric grid {t0, levels}; set one in t_grid or pass --t0/--levels".into(),
        )),
    }
}

/// Runs the selected command on a validated configuration.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> std::result::Result<Outcome, CliError> {
    let command = opts.command.or(config.command).ok_or_else(|| {
        CliError::Usage("no command given on the command line or in the configuration".into())
    })?;
    let model = config.model().map_err(CliError::Config)?;
    let sg = model.semigroup();
    let rho = model.state(&sg)?;
    let grid = resolve_grid(config, opts)?;
    let times = grid.times();
    let mut table = ResultTable::new(command.name(), config);
    let mut failed = false;
    match command {
        Command::Epr => {
            let (t0, levels) = geometric(&grid)?;
            epr_table(&mut table, &model, &sg, &rho, t0, levels)?;
        }
        Command::Relent => relent_table(&mut table, &sg, &rho, &times)?,
        Command::Choi => choi_table(&mut table, &sg, &rho, &times)?,
        Command::CheckSqdb => sqdb_table(&mut table, &sg, &rho, &times)?,
        Command::Verify => {
            let slope_grid = geometric(&grid).unwrap_or((DEFAULT_T0, DEFAULT_LEVELS));
            let all_pass = verify_table(
                &mut table,
                &model,
                &sg,
                &rho,
                &times,
                slope_grid,
                opts.seed.unwrap_or(0),
            )?;
            failed = !all_pass;
        }
    }
    Ok(Outcome { table, failed })
}

fn nums(values: impl IntoIterator<Item = f64>) -> Vec<Cell> {
    values.into_iter().map(Cell::Num).collect()
}

fn repeat(value: f64, n: usize) -> Vec<Cell> {
    vec![Cell::Num(value); n]
}

fn epr_table(
    table: &mut ResultTable,
    model: &Model,
    sg: &Semigroup,
    rho: &DensityMatrix,
    t0: f64,
    levels: usize,
) -> Result<()> {
    let est = epr_slope(sg, rho, t0, levels)?;
    let n = est.t_grid.len();
    table.push_column("t", nums(est.t_grid.iter().copied()));
    table.push_column("S", nums(est.raw_s.iter().copied()));
    table.push_column(
        "S_over_t",
        nums(est.raw_s.iter().zip(&est.t_grid).map(|(s, t)| s / t)),
    );
    table.push_column("epr_slope", repeat(est.value, n));
    table.push_column("extrapolation_error", repeat(est.extrapolation_error, n));
    table.summary("epr_slope", est.value);
    table.summary("extrapolation_error", est.extrapolation_error);
    table.summary("method", est.method.name());
    if let Model::Circulant(spec) = model {
        let closed = closed_form_epr(spec).value;
        let limit = generator_limit_epr(spec)?.value;
        table.push_column("epr_closed", repeat(closed, n));
        table.push_column("epr_generator_limit", repeat(limit, n));
        table.summary("epr_closed", closed);
        table.summary("epr_generator_limit", limit);
        if closed.is_finite() && closed > 0.0 {
            table.summary("relative_error", (est.value - closed).abs() / closed);
        }
    }
    Ok(())
}

fn relent_table(table: &mut ResultTable, sg: &Semigroup, rho: &DensityMatrix, times: &[f64]) -> Result<()> {
    let series = relent_series(sg, rho, times)?;
    table.push_column("t", nums(times.iter().copied()));
    table.push_column("S", nums(series.iter().map(|r| r.value)));
    table.push_column(
        "S_over_t",
        nums(series.iter().zip(times).map(|(r, t)| if *t > 0.0 { r.value / t } else { f64::NAN })),
    );
    table.push_column("S_symmetric", nums(series.iter().map(|r| r.symmetric)));
    table.push_column("kernel_ok", series.iter().map(|r| Cell::Bool(r.kernel_ok)).collect());
    table.tolerance("symmetric_formula", SYMMETRIC_FORMULA_TOLERANCE);
    Ok(())
}

fn choi_table(table: &mut ResultTable, sg: &Semigroup, rho: &DensityMatrix, times: &[f64]) -> Result<()> {
    let (mut ts, mut ks, mut values) = (Vec::new(), Vec::new(), Vec::new());
    for &t in times {
        let j = choi_state(&sg.map(t)?, rho)?;
        let eig = eigh(j.matrix())?;
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            ts.push(Cell::Num(t));
            ks.push(Cell::Int(k as u64));
            values.push(Cell::Num(lambda));
        }
    }
    table.push_column("t", ts);
    table.push_column("k", ks);
    table.push_column("eigenvalue", values);
    Ok(())
}

fn sqdb_table(table: &mut ResultTable, sg: &Semigroup, rho: &DensityMatrix, times: &[f64]) -> Result<()> {
    let invariance = check_invariant(sg, rho, times)?;
    let report = check_theta_sqdb(sg, rho, times)?;
    table.push_column("t", nums(times.iter().copied()));
    table.push_column("residual", nums(report.residuals.iter().copied()));
    table.push_column(
        "holds",
        report.residuals.iter().map(|r| Cell::Bool(*r <= BALANCE_TOLERANCE)).collect(),
    );
    table.tolerance("balance", BALANCE_TOLERANCE);
    table.tolerance("invariance", INVARIANCE_TOLERANCE);
    table.summary("holds", report.holds);
    table.summary("max_residual", report.max_residual);
    table.summary("invariance_residual", invariance);
    Ok(())
}

struct Check {
    name: &'static str,
    residual: f64,
    tolerance: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.residual <= self.tolerance
    }
}

fn verify_table(
    table: &mut ResultTable,
    model: &Model,
    sg: &Semigroup,
    rho: &DensityMatrix,
    times: &[f64],
    (t0, levels): (f64, usize),
    seed: u64,
) -> Result<bool> {
    let d = sg.dim();
    let mut checks = vec![
        Check {
            name: "generator_trace_defect",
            residual: sg.trace_defect(),
            tolerance: 1e-10,
        },
        Check {
            name: "invariance",
            residual: check_invariant(sg, rho, times)?,
            tolerance: INVARIANCE_TOLERANCE,
        },
    ];
    rho.ensure_faithful()?;

    let mut g = rng(seed);
    let f = flip_operator(d);
    let (mut choi_tr, mut psd, mut flip_theta, mut flip_first) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut duality = [0.0f64; 3];
    let mut theta_duality = 0.0f64;
    for &t in times {
        let tt = sg.map(t)?;
        let j = choi_state(&tt, rho)?;
        choi_tr = choi_tr.max((j.trace() - trace(&tt.apply(rho.matrix())).re).abs());
        psd = psd.max(-eigh(j.matrix())?.min_eigenvalue());
        let reversed = theta_kms_adjoint(&tt, rho)?;
        let flipped = &f * j.matrix() * &f;
        flip_theta = flip_theta.max(trace_norm(&(choi_state(&reversed, rho)?.matrix() - &flipped)));
        flip_first = flip_first.max(trace_norm(&(first_factor_density(&tt, rho)? - &flipped)));
        let adjoints = [0.0, 0.25, 0.5]
            .iter()
            .map(|&s| s_adjoint(&tt, rho, s).map(|a| (s, a)))
            .collect::<Result<Vec<_>>>()?;
        for _ in 0..DUALITY_SAMPLES {
            let (x, y) = (random_matrix(d, &mut g), random_matrix(d, &mut g));
            for (slot, (s, adj)) in adjoints.iter().enumerate() {
                duality[slot] = duality[slot].max(s_duality_residual(&tt, adj, rho, *s, &x, &y)?);
            }
            theta_duality = theta_duality.max(theta_kms_duality_residual(&tt, &reversed, rho, &x, &y)?);
        }
    }
    let series = relent_series(sg, rho, times)?;
    let symmetric = series
        .iter()
        .filter(|r| r.kernel_ok)
        .map(|r| (r.value - r.symmetric).abs())
        .fold(0.0, f64::max);
    checks.extend([
        Check { name: "choi_trace", residual: choi_tr, tolerance: CHOI_TRACE_TOLERANCE },
        Check { name: "choi_positivity", residual: psd.max(0.0), tolerance: CHOI_PSD_TOLERANCE },
        Check { name: "flip_theta_adjoint", residual: flip_theta, tolerance: FLIP_TOLERANCE },
        Check { name: "flip_first_factor", residual: flip_first, tolerance: FLIP_TOLERANCE },
        Check { name: "duality_s0", residual: duality[0], tolerance: DUALITY_TOLERANCE },
        Check { name: "duality_s_quarter", residual: duality[1], tolerance: DUALITY_TOLERANCE },
        Check { name: "duality_s_half", residual: duality[2], tolerance: DUALITY_TOLERANCE },
        Check { name: "theta_kms_duality", residual: theta_duality, tolerance: DUALITY_TOLERANCE },
        Check { name: "symmetric_formula", residual: symmetric, tolerance: SYMMETRIC_FORMULA_TOLERANCE },
    ]);

    if let Model::Circulant(spec) = model {
        let mut fast = 0.0f64;
        for &t in times {
            let dense = choi_state(&sg.map(t)?, rho)?;
            fast = fast.max(trace_norm(&(dense.matrix() - circulant_choi(spec, t)?.matrix())));
        }
        checks.push(Check { name: "circulant_fast_path", residual: fast, tolerance: FAST_PATH_TOLERANCE });
        let parity = is_parity_preserving(sg, rho, times)?;
        checks.push(Check { name: "parity_preserving", residual: parity.max_residual, tolerance: BALANCE_TOLERANCE });
        let slope = epr_slope(sg, rho, t0, levels)?;
        let closed = closed_form_epr(spec).value;
        if closed.is_finite() {
            let (residual, tolerance) = if closed > 0.0 {
                ((slope.value - closed).abs() / closed, SLOPE_RELATIVE_TOLERANCE)
            } else {
                (slope.value.abs(), SLOPE_ZERO_TOLERANCE)
            };
            checks.push(Check { name: "epr_slope_vs_closed_form", residual, tolerance });
        }
        let fr = fr_epr(sg, rho, t0, levels)?;
        checks.push(Check {
            name: "fr_epr_vs_epr_slope",
            residual: if fr.value == slope.value { 0.0 } else { (fr.value - slope.value).abs() },
            tolerance: FR_TOLERANCE,
        });
    }

    let all_pass = checks.iter().all(Check::pass);
    table.push_column("check", checks.iter().map(|c| Cell::from(c.name)).collect());
    table.push_column("residual", nums(checks.iter().map(|c| c.residual)));
    table.push_column("tolerance", nums(checks.iter().map(|c| c.tolerance)));
    table.push_column("pass", checks.iter().map(|c| Cell::Bool(c.pass())).collect());
    table.summary("all_pass", all_pass);
    table.summary("seed", Cell::Int(seed));
    Ok(all_pass)
}
