//! The four subcommands: `response`, `qfi`, `figure`, `maximize`.

use std::f64::consts::PI;
use std::path::Path;

use strqfi::metrology::MetrologyError;
use strqfi::optimize::{maximize, scan};
use strqfi::response::{self, SCHEME_VERSION};
use strqfi::{Axis, Component, Polarization, QfiPoint, ResponseCache, ScanCell, ScanGrid, Var};

use crate::errors::{self, CliError, CliResult};
use crate::output::{self, fmt_f64};
use crate::sweep::{self, var_name};

const RESPONSE_COLUMNS: [&str; 7] = [
    "component",
    "r_tilde",
    "nu",
    "f",
    "df_dnu",
    "trunc_error",
    "quad_error",
];
const QFI_COLUMNS: [&str; 7] = [
    "pol", "r_tilde", "nu", "tau", "theta", "fisher", "crlb_single",
];

/// Default per-axis sample count for the two-axis figure grids.
const FIGURE_GRID_DEFAULT: usize = 61;
/// Default sample count for the single-axis distance profiles.
const FIGURE_PROFILE_DEFAULT: usize = 400;
/// Default refinement tolerance for `maximize`, in parameter units.
const MAXIMIZE_TOL_DEFAULT: f64 = 1e-6;

pub struct Ctx<'a> {
    pub cache: Option<&'a ResponseCache>,
    pub argv: &'a [String],
}

fn require<'a>(value: &'a Option<String>, flag: &str) -> CliResult<&'a str> {
    value
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("missing required flag --{flag}")))
}

fn parse_polarization(spec: &str) -> CliResult<Polarization> {
    if let Ok(component) = spec.parse::<Component>() {
        return Ok(Polarization::pure(component));
    }
    if spec.contains(',') {
        let parts: Vec<&str> = spec.split(',').collect();
        if parts.len() != 3 {
            return Err(CliError::Usage(format!(
                "polarization triple must have three weights, got {spec:?}"
            )));
        }
        let mut zeta = [0.0; 3];
        for (slot, token) in zeta.iter_mut().zip(&parts) {
            *slot = token.trim().parse::<f64>().map_err(|_| {
                CliError::Usage(format!("polarization weight is not a number: {token:?}"))
            })?;
        }
        return Polarization::new(zeta[0], zeta[1], zeta[2])
            .map_err(|e| errors::from_response(&e));
    }
    Err(CliError::Usage(format!(
        "unknown polarization {spec:?} (expected radial, tangential, parallel, or zr,za,zz)"
    )))
}

fn point_context(point: &QfiPoint) -> String {
    format!(
        "at r_tilde={}, nu={}, tau={}, theta={}",
        fmt_f64(point.r_tilde),
        fmt_f64(point.nu),
        fmt_f64(point.tau_tilde),
        fmt_f64(point.theta)
    )
}

/// Converts scan cells to CSV rows, failing on the first broken cell.
fn qfi_rows(cells: &[ScanCell]) -> CliResult<Vec<Vec<String>>> {
    cells
        .iter()
        .map(|cell| match &cell.outcome {
            Ok(res) => Ok(vec![
                cell.point.pol.to_string(),
                fmt_f64(cell.point.r_tilde),
                fmt_f64(cell.point.nu),
                fmt_f64(cell.point.tau_tilde),
                fmt_f64(cell.point.theta),
                fmt_f64(res.fisher),
                fmt_f64(res.crlb_single),
            ]),
            Err(e) => Err(cell_error(&cell.point, e)),
        })
        .collect()
}

fn cell_error(point: &QfiPoint, err: &MetrologyError) -> CliError {
    let base = errors::from_metrology(err);
    let msg = format!("{}: {}", point_context(point), base.message());
    match base {
        CliError::Usage(_) => CliError::Usage(msg),
        CliError::Domain(_) => CliError::Domain(msg),
        CliError::Convergence(_) => CliError::Convergence(msg),
        CliError::Io(_) => CliError::Io(msg),
    }
}

pub fn cmd_response(
    component: &Option<String>,
    r: &Option<String>,
    nu: &Option<String>,
    out: Option<&Path>,
    ctx: &Ctx,
) -> CliResult<()> {
    let component: Component = require(component, "component")?
        .parse()
        .map_err(CliError::Usage)?;
    let r_axis = sweep::parse_sweep(Var::RTilde, require(r, "r")?).map_err(CliError::Usage)?;
    let nu_axis = sweep::parse_sweep(Var::Nu, require(nu, "nu")?).map_err(CliError::Usage)?;

    let mut rows = Vec::with_capacity(r_axis.count() * nu_axis.count());
    for i in 0..r_axis.count() {
        let r_val = r_axis.value(i);
        for j in 0..nu_axis.count() {
            let nu_val = nu_axis.value(j);
            let res = response::response_eval(ctx.cache, component, r_val, nu_val, true)
                .map_err(|e| {
                    let base = errors::from_response(&e);
                    let msg = format!(
                        "at r_tilde={}, nu={}: {}",
                        fmt_f64(r_val),
                        fmt_f64(nu_val),
                        base.message()
                    );
                    match base {
                        CliError::Usage(_) => CliError::Usage(msg),
                        CliError::Domain(_) => CliError::Domain(msg),
                        CliError::Convergence(_) => CliError::Convergence(msg),
                        CliError::Io(_) => CliError::Io(msg),
                    }
                })?;
            rows.push(vec![
                component.to_string(),
                fmt_f64(r_val),
                fmt_f64(nu_val),
                fmt_f64(res.value),
                fmt_f64(res.dvalue_dnu.expect("derivative was requested")),
                fmt_f64(res.trunc_error),
                fmt_f64(res.quad_error),
            ]);
        }
    }
    let doc = output::csv_document(ctx.argv, &RESPONSE_COLUMNS, &rows);
    output::write_text(out, &doc)
}

pub fn cmd_qfi(
    pol: &Option<String>,
    r: &Option<String>,
    nu: &Option<String>,
    tau: &Option<String>,
    theta: &Option<String>,
    out: Option<&Path>,
    ctx: &Ctx,
) -> CliResult<()> {
    let pol = parse_polarization(require(pol, "pol")?)?;
    let axes = vec![
        sweep::parse_sweep(Var::RTilde, require(r, "r")?).map_err(CliError::Usage)?,
        sweep::parse_sweep(Var::Nu, require(nu, "nu")?).map_err(CliError::Usage)?,
        sweep::parse_sweep(Var::TauTilde, require(tau, "tau")?).map_err(CliError::Usage)?,
        sweep::parse_sweep(Var::Theta, require(theta, "theta")?).map_err(CliError::Usage)?,
    ];
    let grid = ScanGrid::new(
        pol,
        axes[0].lo(),
        axes[1].lo(),
        axes[2].lo(),
        axes[3].lo(),
        axes,
    )
    .map_err(errors::from_optimize)?;
    let cells = scan(&grid, ctx.cache).map_err(errors::from_optimize)?;
    let rows = qfi_rows(&cells)?;
    let doc = output::csv_document(ctx.argv, &QFI_COLUMNS, &rows);
    output::write_text(out, &doc)
}

/// A figure panel: one pure polarization and the rows of its CSV.
fn panel_polarizations() -> [(Component, Polarization); 3] {
    [
        (Component::Radial, Polarization::radial()),
        (Component::Tangential, Polarization::tangential()),
        (Component::Parallel, Polarization::parallel()),
    ]
}

fn axis(var: Var, lo: f64, hi: f64, count: usize, log: bool) -> CliResult<Axis> {
    Axis::new(var, lo, hi, count, log).map_err(errors::from_optimize)
}

fn axis_manifest(entries: &mut Vec<(String, String)>, axis: &Axis) {
    let name = var_name(axis.var());
    entries.push((format!("{name}_lo"), fmt_f64(axis.lo())));
    entries.push((format!("{name}_hi"), fmt_f64(axis.hi())));
    entries.push((format!("{name}_count"), axis.count().to_string()));
    entries.push((
        format!("{name}_spacing"),
        if axis.is_log() { "log" } else { "lin" }.to_string(),
    ));
}

pub fn cmd_figure(
    name: &str,
    out_dir: &Path,
    grid: &Option<String>,
    ctx: &Ctx,
) -> CliResult<()> {
    let grid_override = match grid {
        Some(token) => Some(token.parse::<usize>().ok().filter(|&n| n >= 1).ok_or_else(
            || CliError::Usage(format!("--grid must be a positive integer, got {token:?}")),
        )?),
        None => None,
    };
    if !matches!(name, "fig3" | "fig4" | "fig5" | "fig6") {
        return Err(CliError::Usage(format!(
            "unknown figure {name:?} (expected fig3, fig4, fig5, or fig6)"
        )));
    }

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", out_dir.display())))?;
    let local_cache;
    let cache = match ctx.cache {
        Some(c) => Some(c),
        None => {
            local_cache = ResponseCache::new();
            Some(&local_cache)
        }
    };

    let mut manifest: Vec<(String, String)> = vec![
        ("figure".to_string(), name.to_string()),
        ("tool_version".to_string(), output::TOOL_VERSION.to_string()),
        ("scheme_version".to_string(), SCHEME_VERSION.to_string()),
        ("command".to_string(), output::command_line(ctx.argv)),
    ];
    let files: Vec<String> = panel_polarizations()
        .iter()
        .map(|(c, _)| format!("{name}_{}.csv", c.tag()))
        .collect();
    manifest.push(("files".to_string(), files.join(",")));

    match name {
        "fig3" => {
            // QFI over (tau, theta) at fixed distance and deficit.
            let n = grid_override.unwrap_or(FIGURE_GRID_DEFAULT);
            let (r_tilde, nu) = (0.1, 1.5);
            manifest.push(("r_tilde".to_string(), fmt_f64(r_tilde)));
            manifest.push(("nu".to_string(), fmt_f64(nu)));
            let axes = vec![
                axis(Var::TauTilde, 0.0, 10.0, n, false)?,
                axis(Var::Theta, 0.0, PI, n, false)?,
            ];
            for a in &axes {
                axis_manifest(&mut manifest, a);
            }
            for ((component, pol), file) in panel_polarizations().iter().zip(&files) {
                let _ = component;
                let g = ScanGrid::new(*pol, r_tilde, nu, 0.0, 0.0, axes.clone())
                    .map_err(errors::from_optimize)?;
                let rows = qfi_rows(&scan(&g, cache).map_err(errors::from_optimize)?)?;
                let doc = output::csv_document(ctx.argv, &QFI_COLUMNS, &rows);
                output::write_text(Some(&out_dir.join(file)), &doc)?;
            }
        }
        "fig4" => {
            // QFI over (tau, r) at fixed deficit, excited state.
            let n = grid_override.unwrap_or(FIGURE_GRID_DEFAULT);
            let (nu, theta) = (1.5, 0.0);
            manifest.push(("nu".to_string(), fmt_f64(nu)));
            manifest.push(("theta".to_string(), fmt_f64(theta)));
            let axes = vec![
                axis(Var::TauTilde, 0.0, 10.0, n, false)?,
                axis(Var::RTilde, 0.01, 10.0, n, true)?,
            ];
            for a in &axes {
                axis_manifest(&mut manifest, a);
            }
            for ((_, pol), file) in panel_polarizations().iter().zip(&files) {
                let g = ScanGrid::new(*pol, 0.01, nu, 0.0, theta, axes.clone())
                    .map_err(errors::from_optimize)?;
                let rows = qfi_rows(&scan(&g, cache).map_err(errors::from_optimize)?)?;
                let doc = output::csv_document(ctx.argv, &QFI_COLUMNS, &rows);
                output::write_text(Some(&out_dir.join(file)), &doc)?;
            }
        }
        "fig5" => {
            // QFI distance profiles at fixed time, one curve per deficit.
            let n = grid_override.unwrap_or(FIGURE_PROFILE_DEFAULT);
            let (tau, theta) = (4.0, 0.0);
            let nus = [1.5, 1.8, 2.0];
            manifest.push(("tau_tilde".to_string(), fmt_f64(tau)));
            manifest.push(("theta".to_string(), fmt_f64(theta)));
            manifest.push((
                "nu_values".to_string(),
                nus.map(fmt_f64).join(","),
            ));
            let r_axis = axis(Var::RTilde, 0.01, 10.0, n, true)?;
            axis_manifest(&mut manifest, &r_axis);
            for ((_, pol), file) in panel_polarizations().iter().zip(&files) {
                let mut rows = Vec::with_capacity(nus.len() * n);
                for nu in nus {
                    let g = ScanGrid::new(*pol, 0.01, nu, tau, theta, vec![r_axis])
                        .map_err(errors::from_optimize)?;
                    rows.extend(qfi_rows(&scan(&g, cache).map_err(errors::from_optimize)?)?);
                }
                let doc = output::csv_document(ctx.argv, &QFI_COLUMNS, &rows);
                output::write_text(Some(&out_dir.join(file)), &doc)?;
            }
        }
        _ => {
            // fig6: QFI over (nu, tau) at fixed distance, excited state.
            let n = grid_override.unwrap_or(FIGURE_GRID_DEFAULT);
            let (r_tilde, theta) = (0.1, 0.0);
            manifest.push(("r_tilde".to_string(), fmt_f64(r_tilde)));
            manifest.push(("theta".to_string(), fmt_f64(theta)));
            let axes = vec![
                axis(Var::Nu, 1.0, 3.0, n, false)?,
                axis(Var::TauTilde, 0.0, 10.0, n, false)?,
            ];
            for a in &axes {
                axis_manifest(&mut manifest, a);
            }
            for ((_, pol), file) in panel_polarizations().iter().zip(&files) {
                let g = ScanGrid::new(*pol, r_tilde, 1.0, 0.0, theta, axes.clone())
                    .map_err(errors::from_optimize)?;
                let rows = qfi_rows(&scan(&g, cache).map_err(errors::from_optimize)?)?;
                let doc = output::csv_document(ctx.argv, &QFI_COLUMNS, &rows);
                output::write_text(Some(&out_dir.join(file)), &doc)?;
            }
        }
    }

    let manifest_doc = output::manifest_document(&manifest);
    output::write_text(Some(&out_dir.join(format!("{name}_manifest.txt"))), &manifest_doc)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_maximize(
    pol: &Option<String>,
    r: &Option<String>,
    nu: &Option<String>,
    tau: &Option<String>,
    theta: &Option<String>,
    axis_specs: &[String],
    tol: &Option<String>,
    out: Option<&Path>,
    ctx: &Ctx,
) -> CliResult<()> {
    let pol = parse_polarization(require(pol, "pol")?)?;
    if axis_specs.is_empty() {
        return Err(CliError::Usage("at least one --axis is required".to_string()));
    }
    if axis_specs.len() > 2 {
        return Err(CliError::Usage(format!(
            "at most two --axis specifications are supported, got {}",
            axis_specs.len()
        )));
    }
    let axes: Vec<Axis> = axis_specs
        .iter()
        .map(|s| sweep::parse_axis(s).map_err(CliError::Usage))
        .collect::<CliResult<_>>()?;

    let fixed = |var: Var, flag_value: &Option<String>, flag: &str| -> CliResult<f64> {
        let on_axis = axes.iter().find(|a| a.var() == var);
        match (on_axis, flag_value) {
            (Some(_), Some(_)) => Err(CliError::Usage(format!(
                "--{flag} conflicts with --axis {}",
                var_name(var)
            ))),
            (Some(a), None) => Ok(a.lo()),
            (None, Some(v)) => v.parse::<f64>().map_err(|_| {
                CliError::Usage(format!("--{flag}: not a number: {v:?}"))
            }),
            (None, None) => Err(CliError::Usage(format!(
                "--{flag} is required when {} has no axis",
                var_name(var)
            ))),
        }
    };
    let r_val = fixed(Var::RTilde, r, "r")?;
    let nu_val = fixed(Var::Nu, nu, "nu")?;
    let tau_val = fixed(Var::TauTilde, tau, "tau")?;
    let theta_val = fixed(Var::Theta, theta, "theta")?;

    let tol = match tol {
        Some(token) => token
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("--tol: not a number: {token:?}")))?,
        None => MAXIMIZE_TOL_DEFAULT,
    };

    let grid = ScanGrid::new(pol, r_val, nu_val, tau_val, theta_val, axes)
        .map_err(errors::from_optimize)?;
    let result = maximize(&grid, tol, ctx.cache).map_err(errors::from_optimize)?;
    let best = result.best;

    let mut report = format!("maximize: polarization {pol}\n");
    for a in grid.axes() {
        report.push_str(&format!(
            "  free:  {} in [{}, {}], {} samples, {}\n",
            var_name(a.var()),
            fmt_f64(a.lo()),
            fmt_f64(a.hi()),
            a.count(),
            if a.is_log() { "log" } else { "lin" },
        ));
    }
    let fixed_desc: Vec<String> = [
        (Var::RTilde, r_val),
        (Var::Nu, nu_val),
        (Var::TauTilde, tau_val),
        (Var::Theta, theta_val),
    ]
    .iter()
    .filter(|(var, _)| grid.axes().iter().all(|a| a.var() != *var))
    .map(|(var, val)| format!("{} = {}", var_name(*var), fmt_f64(*val)))
    .collect();
    if !fixed_desc.is_empty() {
        report.push_str(&format!("  fixed: {}\n", fixed_desc.join(", ")));
    }
    report.push_str(&format!(
        "  best:  r_tilde = {}, nu = {}, tau = {}, theta = {}\n",
        fmt_f64(best.point.r_tilde),
        fmt_f64(best.point.nu),
        fmt_f64(best.point.tau_tilde),
        fmt_f64(best.point.theta),
    ));
    report.push_str(&format!(
        "  fisher = {}, crlb_single = {}\n",
        fmt_f64(best.fisher),
        fmt_f64(best.crlb_single),
    ));
    report.push_str(&format!(
        "  converged: {} (final width {}, tol {}, {} refinement evaluations)\n",
        if result.converged { "yes" } else { "NO" },
        fmt_f64(result.tolerance_achieved),
        fmt_f64(tol),
        result.refinement_history.len(),
    ));
    print!("{report}");

    let record_entries: Vec<(String, String)> = vec![
        ("pol".to_string(), pol.to_string()),
        ("r_tilde".to_string(), fmt_f64(best.point.r_tilde)),
        ("nu".to_string(), fmt_f64(best.point.nu)),
        ("tau_tilde".to_string(), fmt_f64(best.point.tau_tilde)),
        ("theta".to_string(), fmt_f64(best.point.theta)),
        ("fisher".to_string(), fmt_f64(best.fisher)),
        ("crlb_single".to_string(), fmt_f64(best.crlb_single)),
        ("converged".to_string(), result.converged.to_string()),
        (
            "tolerance_achieved".to_string(),
            fmt_f64(result.tolerance_achieved),
        ),
        ("coarse_cells".to_string(), grid.total_cells().to_string()),
        (
            "refinement_evaluations".to_string(),
            result.refinement_history.len().to_string(),
        ),
        ("scheme_version".to_string(), SCHEME_VERSION.to_string()),
        ("tool_version".to_string(), output::TOOL_VERSION.to_string()),
    ];
    let record = output::manifest_document(&record_entries);
    match out {
        Some(path) => output::write_text(Some(path), &record)?,
        None => print!("\n{record}"),
    }

    if !result.converged {
        return Err(CliError::Convergence(format!(
            "maximize stopped at interval width {} above tol {}; best point emitted above",
            fmt_f64(result.tolerance_achieved),
            fmt_f64(tol)
        )));
    }
    Ok(())
}
