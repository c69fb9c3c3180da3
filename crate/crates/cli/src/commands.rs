use std::io::Write as _;
use std::path::Path;

use stirap_core::design::{design_detuning, fit_detuning, solve_detuning_with, CancelledCoupling, DesignError};
use stirap_core::harness::export::{self, write_file};
use stirap_core::harness::{
    design_options, run_scenario, scan_grid, table2_report, trend_violations, ConfigError, ConfigMap, DetuningSource,
    Execution, HarnessError, Quantity, ScanSpec, ScenarioConfig, Summary, REFERENCE_TABLE2,
};
use stirap_core::model::ModelError;
use stirap_core::numerics::FitFamily;
use stirap_core::propagate::PropagateError;

use crate::{Common, Failure, Format};

/// Decoupling thresholds in 1/T: closed-form couplings and the coupling
/// cancelled by the designed detuning.
const ANALYTIC_COUPLING_MAX: f64 = 1e-10;
const NUMERIC_COUPLING_MAX: f64 = 1e-5;

const TABLE2_P3R_BAND: f64 = 0.005;
const TABLE2_P3_BAND: f64 = 0.08;

const FIT_RESIDUAL_MAX: f64 = 0.05;

fn config_failure(e: ConfigError) -> Failure {
    Failure::Config(e.to_string())
}

fn design_failure(e: DesignError) -> Failure {
    match e {
        DesignError::UnmatchedDelay { .. }
        | DesignError::AsymmetricWindow { .. }
        | DesignError::Model(ModelError::InvalidParameter { .. }) => Failure::Config(e.to_string()),
        _ => Failure::Numerical(e.to_string()),
    }
}

fn harness_failure(e: HarnessError) -> Failure {
    match e {
        HarnessError::Design(d) => design_failure(d),
        HarnessError::Propagate(
            p @ (PropagateError::EpsilonOutOfRange(_) | PropagateError::InvalidState(_) | PropagateError::InvalidRate { .. }),
        ) => Failure::Config(p.to_string()),
        HarnessError::Propagate(p) => Failure::Numerical(p.to_string()),
        other => Failure::Config(other.to_string()),
    }
}

/// Config file, then `--set` overrides, then the dedicated flags.
fn load_map(common: &Common, default_preset: Option<&str>) -> Result<ConfigMap, Failure> {
    let mut map = match &common.config {
        Some(p) => ConfigMap::load(p).map_err(config_failure)?,
        None => ConfigMap::default(),
    };
    for s in &common.set {
        map.set_override(s).map_err(config_failure)?;
    }
    if let Some(d) = &common.detuning {
        map.set("detuning.source", d);
    }
    if let Some(s) = common.sign {
        map.set("rates.sign", s.as_str());
    }
    if let Some(p) = default_preset {
        if map.get("preset").is_none() {
            map.set("preset", p);
        }
    }
    Ok(map)
}

fn scenario(map: &ConfigMap) -> Result<ScenarioConfig, Failure> {
    let cfg = ScenarioConfig::from_map(map).map_err(config_failure)?;
    cfg.validate().map_err(config_failure)?;
    Ok(cfg)
}

fn fit_family(map: &ConfigMap, cfg: &ScenarioConfig, allow_none: bool) -> Result<Option<FitFamily>, Failure> {
    match map.get("fit.family") {
        Some("fourier") => Ok(Some(FitFamily::Fourier)),
        Some("gaussian") => Ok(Some(FitFamily::GaussianSum)),
        Some("none") if allow_none => Ok(None),
        Some(other) => Err(Failure::Config(format!("invalid value `{other}` for `fit.family`: expected fourier or gaussian"))),
        None => Ok(Some(match cfg.detuning {
            DetuningSource::Fitted { family, .. } => family,
            _ => FitFamily::Fourier,
        })),
    }
}

/// Rejects `check.*`/`fit.*` keys a command does not read.
fn reject_keys(map: &ConfigMap, prefix: &str, allowed: &[&str]) -> Result<(), Failure> {
    match map.keys().find(|k| k.starts_with(prefix) && !allowed.contains(k)) {
        Some(k) => Err(Failure::Config(format!("unknown configuration key `{k}` for this command"))),
        None => Ok(()),
    }
}

/// `check.<quantity>.min` / `check.<quantity>.max` bounds.
/// Lower and upper bound for one summary quantity.
type Bound = (Quantity, Option<f64>, Option<f64>);

fn quantity_bounds(map: &ConfigMap) -> Result<Vec<Bound>, Failure> {
    let mut out: Vec<(Quantity, Option<f64>, Option<f64>)> = Vec::new();
    for key in map.keys().filter(|k| k.starts_with("check.")) {
        let rest = &key["check.".len()..];
        let (q, side) = rest
            .rsplit_once('.')
            .filter(|(_, s)| *s == "min" || *s == "max")
            .ok_or_else(|| Failure::Config(format!("check key `{key}` must be check.<quantity>.min or check.<quantity>.max")))?;
        let q: Quantity = q.parse().map_err(|e: String| Failure::Config(format!("`{key}`: {e}")))?;
        let v = map.f64(key).map_err(config_failure)?.expect("key present");
        let slot = match out.iter().position(|b| b.0 == q) {
            Some(i) => i,
            None => {
                out.push((q, None, None));
                out.len() - 1
            }
        };
        if side == "min" {
            out[slot].1 = Some(v);
        } else {
            out[slot].2 = Some(v);
        }
    }
    Ok(out)
}

fn bound_failures(label: &str, q: Quantity, v: Option<f64>, min: Option<f64>, max: Option<f64>) -> Option<String> {
    let Some(v) = v else {
        return Some(format!("{label}: {} undefined", q.name()));
    };
    if min.is_some_and(|m| v < m) || max.is_some_and(|m| v > m) {
        return Some(format!("{label}: {} = {v} outside [{}, {}]", q.name(), fmt_bound(min), fmt_bound(max)));
    }
    None
}

fn fmt_bound(b: Option<f64>) -> String {
    b.map_or("-".to_string(), |v| v.to_string())
}

fn write_stdout(text: &str) -> Result<(), Failure> {
    std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Config(format!("cannot write to stdout: {e}")))
}

/// Writes csv or json to `--out` (stdout when absent). For gnuplot scripts
/// the csv goes next to the script with a `.csv` extension.
fn emit(
    common: &Common,
    csv: impl FnOnce() -> String,
    json: impl FnOnce() -> Result<String, export::ExportError>,
    script: impl FnOnce(&str) -> String,
) -> Result<(), Failure> {
    let io = |e: export::ExportError| Failure::Config(e.to_string());
    let text = match common.format {
        Format::Csv => csv(),
        Format::Json => json().map_err(io)?,
        Format::GnuplotScript => {
            let out = common.out.as_deref().ok_or_else(|| Failure::Config("--format gnuplot-script needs --out".into()))?;
            let data = out.with_extension("csv");
            if data == out {
                return Err(Failure::Config("--out for a gnuplot script must not end in .csv".into()));
            }
            write_file(&data, &csv()).map_err(io)?;
            let script = script(&data.display().to_string());
            return write_file(out, &script).map_err(io);
        }
    };
    match &common.out {
        Some(p) => write_file(p, &text).map_err(io),
        None => write_stdout(&text),
    }
}

fn finish(common: &Common, fails: Vec<String>) -> Result<(), Failure> {
    if common.check && !fails.is_empty() {
        return Err(Failure::Check(fails));
    }
    if common.check {
        eprintln!("all checks passed");
    }
    Ok(())
}

pub fn design(common: &Common) -> Result<(), Failure> {
    let map = load_map(common, None)?;
    reject_keys(&map, "fit.", &["fit.family"])?;
    reject_keys(&map, "check.", &[])?;
    let cfg = scenario(&map)?;
    let family = fit_family(&map, &cfg, true)?;
    let report = design_detuning(&cfg.pulse, &cfg.window, &design_options(&cfg), family).map_err(design_failure)?;
    let sol = &report.solution;
    eprintln!("peak |Δ| = {:.6} at t = {:.6}, Δ(t_f) = {:.6}", sol.peak, sol.peak_time(), sol.terminal);
    if let Some(w) = &sol.boundary_warning {
        eprintln!("warning: {w}");
    }
    if let Some(f) = &report.fit {
        eprintln!(
            "{} fit: {:?} (relative residual {:.3e})",
            f.family.name(),
            f.fit.parameters,
            f.relative_residual(&sol.samples())
        );
    }
    let r = report.residuals;
    eprintln!(
        "max |Ω+0| = {:.3e}, |Ω-0| = {:.3e}, |Ω+-| = {:.3e}, |Ω-+| = {:.3e}",
        r.plus_zero, r.minus_zero, r.plus_minus, r.minus_plus
    );

    emit(
        common,
        || {
            let mut s = String::from(if report.fit.is_some() { "t,Delta,Delta_fit\n" } else { "t,Delta\n" });
            for (t, v) in sol.samples() {
                match &report.fit {
                    Some(f) => s.push_str(&format!("{t:.12e},{v:.12e},{:.12e}\n", f.fit.eval(t))),
                    None => s.push_str(&format!("{t:.12e},{v:.12e}\n")),
                }
            }
            s
        },
        || export::to_json(&report),
        |csv| {
            let fit = if report.fit.is_some() { ", '' using 1:3 with lines" } else { "" };
            format!(
                "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't/T'\nset ylabel 'Delta T'\nplot '{csv}' using 1:2 with lines{fit}\n"
            )
        },
    )?;

    let mut fails = Vec::new();
    for (name, v) in [("|Ω+0|", r.plus_zero), ("|Ω-0|", r.minus_zero)] {
        if v.is_nan() || v > ANALYTIC_COUPLING_MAX {
            fails.push(format!("max {name} = {v:.3e} exceeds {ANALYTIC_COUPLING_MAX:e}"));
        }
    }
    let (name, v) = match cfg.design_cancel {
        CancelledCoupling::PlusMinus => ("|Ω+-|", r.plus_minus),
        CancelledCoupling::MinusPlus => ("|Ω-+|", r.minus_plus),
    };
    if v.is_nan() || v > NUMERIC_COUPLING_MAX {
        fails.push(format!("max {name} = {v:.3e} exceeds {NUMERIC_COUPLING_MAX:e}"));
    }
    finish(common, fails)
}

pub fn propagate(common: &Common) -> Result<(), Failure> {
    let map = load_map(common, None)?;
    let bounds = quantity_bounds(&map)?;
    let cfg = scenario(&map)?;
    let run = run_scenario(&cfg).map_err(harness_failure)?;
    let s = &run.summary;
    print_summary(s);
    emit(
        common,
        || export::trajectory_csv(&run.trajectory),
        || export::to_json(s),
        |csv| export::trajectory_gnuplot(csv, &format!("{} detuning, epsilon = {}", cfg.detuning.label(), cfg.epsilon)),
    )?;
    let fails = bounds.iter().filter_map(|&(q, lo, hi)| bound_failures("summary", q, q.of_summary(s), lo, hi)).collect();
    finish(common, fails)
}

fn print_summary(s: &Summary) {
    eprintln!(
        "final P1 = {:.6}, P2 = {:.6}, P3 = {:.6}, norm = {:.6}; P3r = {:.6}; max P2 = {:.3e}; shutdown time = {}",
        s.final_p1,
        s.final_p2,
        s.final_p3,
        s.final_norm,
        s.final_p3r,
        s.max_p2,
        s.shutdown_time.map_or("none".to_string(), |t| format!("{t:.4}"))
    );
    for w in &s.warnings {
        eprintln!("warning: {w}");
    }
}

pub fn scan(common: &Common) -> Result<(), Failure> {
    let map = load_map(common, None)?;
    let bounds = quantity_bounds(&map)?;
    let cfg = scenario(&map)?;
    let spec = ScanSpec::from_map(&map).map_err(config_failure)?;
    if let Some((q, ..)) = bounds.iter().find(|b| !spec.quantities.contains(&b.0)) {
        return Err(Failure::Config(format!("check on {} which the scan does not compute", q.name())));
    }
    let grid = scan_grid(&cfg, &spec, Execution::from_env()).map_err(harness_failure)?;
    let failed = grid.failures().count();
    eprintln!("{} cells, {failed} failed", grid.cells.len());
    for c in grid.failures().take(5) {
        eprintln!("  cell ({}, {}) at ({}, {}): {}", c.i, c.j, c.x, c.y, c.error.as_deref().unwrap_or(""));
    }
    for &q in &grid.quantities {
        let col = grid.column(q);
        if let (Some(lo), Some(hi)) = (col.iter().copied().reduce(f64::min), col.iter().copied().reduce(f64::max)) {
            eprintln!("{}: [{lo:.6}, {hi:.6}]", q.name());
        }
    }
    emit(
        common,
        || export::grid_csv(&grid),
        || export::to_json(&grid),
        |csv| export::grid_gnuplot(csv, &grid, grid.quantities[0].name()),
    )?;
    let mut fails: Vec<String> = grid
        .failures()
        .map(|c| format!("cell ({}, {}) failed: {}", c.i, c.j, c.error.as_deref().unwrap_or("")))
        .collect();
    for c in grid.cells.iter().filter(|c| c.error.is_none()) {
        for &(q, lo, hi) in &bounds {
            let k = grid.quantities.iter().position(|&x| x == q).expect("checked above");
            if let Some(f) = bound_failures(&format!("cell ({}, {})", c.i, c.j), q, c.values[k], lo, hi) {
                fails.push(f);
            }
        }
    }
    finish(common, fails)
}

pub fn report_table2(common: &Common) -> Result<(), Failure> {
    let map = load_map(common, Some("baseline_transfer"))?;
    reject_keys(&map, "check.", &[])?;
    let cfg = scenario(&map)?;
    let entries = table2_report(&cfg, &REFERENCE_TABLE2, Execution::from_env()).map_err(harness_failure)?;
    emit(common, || export::table2_csv(&entries), || export::to_json(&entries), export::table2_gnuplot)?;

    let mut fails = Vec::new();
    for e in &entries {
        let r = &e.reference;
        let label = format!("row ({}, {}, {}, {})%", r.d_omega_pct, r.d_tau_pct, r.d_delta0_pct, r.d_omega_fit_pct);
        if e.p3r_error().is_nan() || e.p3r_error() > TABLE2_P3R_BAND {
            fails.push(format!("{label}: P3r = {:.4}, reference {:.4}", e.p3r, r.p3r));
        }
        if e.p3_error().is_nan() || e.p3_error() > TABLE2_P3_BAND {
            fails.push(format!("{label}: P3 = {:.4}, reference {:.4}", e.p3, r.p3));
        }
    }
    for (a, b) in trend_violations(&entries) {
        fails.push(format!(
            "P3 does not increase from row ({}, {}, {}, {})% to ({}, {}, {}, {})%",
            a.d_omega_pct, a.d_tau_pct, a.d_delta0_pct, a.d_omega_fit_pct, b.d_omega_pct, b.d_tau_pct, b.d_delta0_pct, b.d_omega_fit_pct
        ));
    }
    finish(common, fails)
}

/// Two numeric columns; an optional non-numeric header and `#` comments.
fn read_samples(path: &Path) -> Result<Vec<(f64, f64)>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    let mut first = true;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let parsed = match (cols.next(), cols.next()) {
            (Some(a), Some(b)) => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some(p) if p.0.is_finite() && p.1.is_finite() => out.push(p),
            None if first => {}
            _ => return Err(Failure::Config(format!("{}:{}: expected two numeric columns", path.display(), i + 1))),
        }
        first = false;
    }
    Ok(out)
}

pub fn fit(common: &Common) -> Result<(), Failure> {
    let map = load_map(common, None)?;
    reject_keys(&map, "fit.", &["fit.family", "fit.input"])?;
    reject_keys(&map, "check.", &["check.residual.max"])?;
    let cfg = scenario(&map)?;
    let family = fit_family(&map, &cfg, false)?.expect("a family is required");
    let samples = match map.get("fit.input") {
        Some(p) => read_samples(Path::new(p))?,
        None => solve_detuning_with(&cfg.pulse, &cfg.window, &design_options(&cfg)).map_err(design_failure)?.samples(),
    };
    let result = fit_detuning(&samples, family).map_err(design_failure)?;
    let rel = result.relative_residual(&samples);
    eprintln!("{} fit: {:?} (relative residual {rel:.3e}, {} iterations)", family.name(), result.fit.parameters, result.fit.iterations);
    emit(
        common,
        || {
            let mut s = String::from("t,data,fit\n");
            for &(t, v) in &samples {
                s.push_str(&format!("{t:.12e},{v:.12e},{:.12e}\n", result.fit.eval(t)));
            }
            s
        },
        || export::to_json(&result),
        |csv| format!("set datafile separator ','\nset key autotitle columnhead\nplot '{csv}' using 1:2 with points, '' using 1:3 with lines\n"),
    )?;
    let max = map.f64("check.residual.max").map_err(config_failure)?.unwrap_or(FIT_RESIDUAL_MAX);
    let fails = if rel <= max { Vec::new() } else { vec![format!("relative residual {rel:.3e} exceeds {max}")] };
    finish(common, fails)
}
