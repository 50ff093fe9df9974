//! CSV tables and SVG plots derived from a report.

use std::path::Path;

use hypolab_core::log_japanese_bracket;
use hypolab_core::superlog::{BestConstantCurve, ProbeReport};

use crate::experiments::{Check, ExperimentResult, Report};
use crate::output::{loglog_svg, to_json_pretty, write_text, Cell, Series, Table};

/// Tables and an optional plot for a report.
pub fn render(result: &ExperimentResult) -> (Vec<Table>, Option<String>) {
    match result {
        ExperimentResult::MpCheck(r) => {
            let mut t = Table::new(
                "mp_check",
                &["coefficient", "p", "mp_verdict", "s_last", "levels", "decisive_slope", "rate_verdict", "rate_limit", "agree"],
            );
            let mut curve = Table::new("s_curve", &["coefficient", "p", "delta", "s"]);
            for row in &r.rows {
                t.push(vec![
                    row.coefficient.clone().into(),
                    row.p.into(),
                    row.mp.verdict.to_string().into(),
                    row.mp.s_curve.last().map_or(f64::NAN, |s| s.s).into(),
                    row.mp.levels.into(),
                    row.mp.decisive_slope.unwrap_or(f64::NAN).into(),
                    row.rate.as_ref().map_or("-".to_string(), |x| x.verdict.to_string()).into(),
                    row.rate.as_ref().map_or(f64::NAN, |x| x.limit).into(),
                    row.agree.map_or("-".into(), Cell::from),
                ]);
                for pt in &row.mp.s_curve {
                    curve.push(vec![row.coefficient.clone().into(), row.p.into(), pt.delta.into(), pt.s.into()]);
                }
            }
            (vec![t, curve], None)
        }
        ExperimentResult::SuperlogProbe(r) => {
            let mut tables = vec![probe_table(&r.reports)];
            tables.push(best_constant_table(&r.curves));
            let plot = r.reports.first().map(|rep| probe_plot(&r.coefficient, rep, r.curves.first()));
            (tables, plot)
        }
        ExperimentResult::Table1(r) => {
            let mut t = Table::new("table1", &["operator", "p", "verdict", "expected_holds"]);
            for row in &r.rows {
                t.push(vec![row.operator.clone().into(), row.p.into(), row.verdict.to_string().into(), row.expected_holds.into()]);
            }
            let title = format!("exp(-|y|^(-{}))", r.alpha);
            (vec![t, probe_table(std::slice::from_ref(&r.probe))], Some(probe_plot(&title, &r.probe, None)))
        }
        ExperimentResult::ProfileElliptic(r) => {
            let mut summary = Table::new(
                "summary",
                &["lambda", "u_center", "lower_slack", "tol", "lower_ok", "upper_ok", "max_abs_v", "v_bound", "barrier_min_slack", "upwinded", "residual"],
            );
            let mut grid = Table::new("profiles", &["lambda", "x1", "x2", "u", "v"]);
            for run in &r.runs {
                let s = &run.solution;
                summary.push(vec![
                    s.lambda.into(),
                    s.u_center.into(),
                    s.lower_slack.into(),
                    s.tol.into(),
                    s.lower_ok.into(),
                    s.upper_ok.into(),
                    run.upper.max_abs_v.into(),
                    run.upper.bound.into(),
                    run.barrier_check.min_slack.into(),
                    s.upwinded.into(),
                    s.residual.into(),
                ]);
                push_grid(&mut grid, s.lambda, &s.x, s.dim, &s.u, &s.v);
            }
            (vec![summary, grid], None)
        }
        ExperimentResult::ProfileParabolic(r) => {
            let mut summary = Table::new(
                "summary",
                &["lambda", "alpha", "u_center", "tol", "lower_slack", "upper_slack", "lower_ok", "upper_ok", "under_resolved"],
            );
            let mut levels = Table::new("levels", &["lambda", "level", "t", "max_u"]);
            let mut slices = Table::new("slices", &["lambda", "t", "x1", "x2", "u", "v"]);
            for run in &r.runs {
                summary.push(vec![
                    run.lambda.into(),
                    run.alpha.into(),
                    run.u_center.into(),
                    run.tol.into(),
                    run.lower_slack.into(),
                    run.upper_slack.into(),
                    run.lower_ok.into(),
                    run.upper_ok.into(),
                    run.under_resolved.into(),
                ]);
                let steps = (run.grid.n_t - 1) as f64;
                for (m, mx) in run.level_max.iter().enumerate() {
                    let t = run.horizon * (2.0 * m as f64 - steps) / steps;
                    levels.push(vec![run.lambda.into(), m.into(), t.into(), (*mx).into()]);
                }
                for (k, (&t, u)) in run.t_saved.iter().zip(&run.u_saved).enumerate() {
                    let v = run.v_slice(k);
                    let m = run.x.len();
                    for (idx, (&ui, &vi)) in u.iter().zip(&v).enumerate() {
                        let (x1, x2) = if run.grid.dim == 2 { (run.x[idx % m], run.x[idx / m]) } else { (run.x[idx], 0.0) };
                        slices.push(vec![run.lambda.into(), t.into(), x1.into(), x2.into(), ui.into(), vi.into()]);
                    }
                }
            }
            (vec![summary, levels, slices], None)
        }
        ExperimentResult::LpSuite(r) => {
            let mut bands = Table::new("bands", &["j", "band_norm_sq"]);
            for (j, b) in r.band_norms_first.iter().enumerate() {
                bands.push(vec![j.into(), (*b).into()]);
            }
            (vec![checks_table(&r.checks), bands], None)
        }
        ExperimentResult::Synthesis(r) => {
            let mut rows = Table::new(
                "synthesis",
                &["j", "u_norm_sq", "trace_defect", "max_residual", "w_norm_sq", "c_r_sq", "estimate_rhs", "holds"],
            );
            for row in &r.rows {
                rows.push(vec![
                    row.j.into(),
                    row.u_norm_sq.into(),
                    row.trace_defect.into(),
                    row.max_residual.into(),
                    row.estimate.norm_sq.into(),
                    row.estimate.c_r_sq.into(),
                    row.estimate.rhs.into(),
                    row.estimate.holds.into(),
                ]);
            }
            let mut proj = Table::new(
                "projection",
                &["j", "lhs", "pj_norm_sq", "corrected_rhs", "literal_rhs", "slack", "holds", "literal_holds"],
            );
            for b in &r.projection {
                proj.push(vec![
                    b.j.into(),
                    b.lhs.into(),
                    b.pj_norm_sq.into(),
                    b.corrected_rhs.into(),
                    b.literal_rhs.into(),
                    b.slack.into(),
                    b.holds.into(),
                    b.literal_holds.into(),
                ]);
            }
            (vec![checks_table(&r.checks), rows, proj], None)
        }
        ExperimentResult::InterpVerify(r) => (vec![checks_table(&r.checks)], None),
    }
}

fn push_grid(t: &mut Table, lambda: f64, x: &[f64], dim: usize, u: &[f64], v: &[f64]) {
    let m = x.len();
    for (idx, (&ui, &vi)) in u.iter().zip(v).enumerate() {
        let (x1, x2) = if dim == 2 { (x[idx % m], x[idx / m]) } else { (x[idx], 0.0) };
        t.push(vec![lambda.into(), x1.into(), x2.into(), ui.into(), vi.into()]);
    }
}

fn checks_table(checks: &[Check]) -> Table {
    let mut t = Table::new("checks", &["name", "observed", "limit", "passed"]);
    for c in checks {
        t.push(vec![c.name.clone().into(), c.observed.into(), c.limit.into(), c.passed.into()]);
    }
    t
}

/// Columns `p, k, zeta, lambda_min, ratio`, one row per `(p, ζ)`.
pub fn probe_table(reports: &[ProbeReport]) -> Table {
    let mut t = Table::new("probe", &["p", "k", "zeta", "lambda_min", "ratio"]);
    for rep in reports {
        for i in 0..rep.zeta_grid.len() {
            t.push(vec![rep.p.into(), rep.k_values[i].into(), rep.zeta_grid[i].into(), rep.lambda_min[i].into(), rep.ratios[i].into()]);
        }
    }
    t
}

fn best_constant_table(curves: &[BestConstantCurve]) -> Table {
    let mut t = Table::new("best_constant", &["p", "eps_prime", "c_base", "c_extended", "diverging"]);
    for c in curves {
        for pt in &c.points {
            t.push(vec![c.p.into(), pt.eps_prime.into(), pt.c_base.into(), pt.c_extended.into(), pt.diverging.into()]);
        }
    }
    t
}

/// `Λ(ζ)` against `log⟨ζ⟩` on log-log axes, with the fitted slope; the
/// extended grid of a best-constant curve is overlaid when present.
pub fn probe_plot(title: &str, rep: &ProbeReport, curve: Option<&BestConstantCurve>) -> String {
    let pts = |z: &[f64], l: &[f64]| z.iter().zip(l).map(|(&z, &l)| (log_japanese_bracket(z), l)).collect::<Vec<_>>();
    let mut series = Vec::new();
    if let Some(c) = curve {
        series.push(Series {
            label: format!("extended grid k = {}..{}", c.extended_k.0, c.extended_k.1),
            points: pts(&c.zeta_extended, &c.lambda_extended),
            dashed: true,
        });
    }
    series.push(Series {
        label: format!("base grid k = {}..{}", rep.k_values.first().unwrap_or(&0), rep.k_values.last().unwrap_or(&0)),
        points: pts(&rep.zeta_grid, &rep.lambda_min),
        dashed: false,
    });
    let mut notes = vec![format!("fitted slope s = {:.3}", rep.fitted_exponent)];
    if let Some(b) = rep.balance_exponent {
        notes.push(format!("balance slope = {b:.3}"));
    }
    if let Some(c) = curve {
        if c.points.iter().any(|p| p.diverging) {
            notes.push("best constant grows on the extended grid".into());
        }
    }
    loglog_svg(&format!("ground state of H_zeta for a = {title}"), "log<zeta>", "Lambda(zeta)", &series, &notes)
}

/// Writes `report.json`, one CSV per table and `plot.svg` into `dir`.
pub fn write_report(report: &Report, dir: &Path) -> anyhow::Result<Vec<std::path::PathBuf>> {
    let mut written = Vec::new();
    let json = dir.join("report.json");
    write_text(&json, &to_json_pretty(report)?)?;
    written.push(json);
    written.extend(write_artifacts(&report.result, dir)?);
    Ok(written)
}

/// CSV and SVG only, from an existing report.
pub fn write_artifacts(result: &ExperimentResult, dir: &Path) -> anyhow::Result<Vec<std::path::PathBuf>> {
    let mut written = Vec::new();
    let (tables, plot) = render(result);
    for t in &tables {
        let path = dir.join(format!("{}.csv", t.name));
        write_text(&path, &t.to_csv()?)?;
        written.push(path);
    }
    if let Some(svg) = plot {
        let path = dir.join("plot.svg");
        write_text(&path, &svg)?;
        written.push(path);
    }
    Ok(written)
}
