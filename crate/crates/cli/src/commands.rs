use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex;
use serde::Serialize;
use serde_json::{json, Value};

use flagcalc::grid::Grid;
use flagcalc::inversion::{
    invert_flag, lambda_derivative_check, uniform_invertibility_report, verify_inverse, InversionOptions,
};
use flagcalc::io::{write_field_binary, SampledSpectrumJson};
use flagcalc::schrodinger::LineGrid;
use flagcalc::spectrum::{catalog, catalog_formula, kernel, realize, ExprSpectrum, Spectrum, Verdict};
use flagcalc::symbolcalc::{fiber_symbol, flag_estimate_report, sym0_seminorms, EstimateGrid};
use flagcalc::transform::{lambda_filter, LambdaWindow, SampledField};

use crate::config::ExperimentConfig;
use crate::outcome::{Artifacts, CliError};
use crate::suites;

pub const EXPR_PREFIX: &str = "expr:";

/// Catalog name, or `expr:<formula>` for an inline multiplier.
pub fn resolve_kernel(cfg: &ExperimentConfig) -> Result<Arc<dyn Spectrum<f64>>, CliError> {
    let k = match cfg.kernel.strip_prefix(EXPR_PREFIX) {
        Some(src) => ExprSpectrum::parse("expr", src.trim(), cfg.n, false)?,
        None => kernel(&cfg.kernel, cfg.n, cfg.eps)?,
    };
    Ok(Arc::new(k))
}

fn kernel_source(cfg: &ExperimentConfig) -> String {
    match cfg.kernel.strip_prefix(EXPR_PREFIX) {
        Some(src) => src.trim().to_string(),
        None => catalog_formula(&cfg.kernel, cfg.n, cfg.eps).unwrap_or_default(),
    }
}

fn line(cfg: &ExperimentConfig) -> Result<LineGrid<f64>, CliError> {
    let l = cfg.line_spec();
    Ok(LineGrid::new(cfg.n, l.count, l.half)?)
}

fn to_json<S: Serialize>(v: &S) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

pub struct Outcome {
    pub artifacts: Artifacts,
    /// Printed to stdout after the files are written.
    pub lines: Vec<String>,
    /// Set when the command ran to completion but a check failed.
    pub failure: Option<CliError>,
}

pub fn identities(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let rep = suites::run(cfg)?;
    let mut art = Artifacts::default();
    art.json("identities.json", &rep)?;
    let lines = rep
        .identities
        .iter()
        .map(|i| {
            format!("{:<40} {:>10.3e}  tol {:>8.1e}  {}", i.name, i.max_error, i.tolerance, if i.pass { "ok" } else { "FAIL" })
        })
        .collect();
    let failure = (!rep.passed).then(|| CliError::Tolerance(format!("identities failed: {}", rep.failures().join(", "))));
    Ok(Outcome { artifacts: art, lines, failure })
}

pub fn estimates(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let k = resolve_kernel(cfg)?;
    let grid = EstimateGrid::<f64>::standard(cfg.n);
    let rep = flag_estimate_report(k.as_ref(), cfg.alpha_max, cfg.beta_max, &grid)?;
    let line = line(cfg)?;
    let symbols = cfg.lambdas().iter().map(|&l| fiber_symbol(k.as_ref(), l, &line)).collect::<Result<Vec<_>, _>>()?;
    let sym0 = sym0_seminorms(&symbols, cfg.alpha_max)?;

    let mut art = Artifacts::default();
    art.text("estimates.csv", rep.to_csv());
    art.text("estimates.json", rep.to_json()? + "\n");
    art.text("sym0.csv", sym0.to_csv());
    art.text("sym0.json", sym0.to_json()? + "\n");

    let mut lines = vec![format!("kernel {} ({})", cfg.kernel, kernel_source(cfg))];
    for r in rep.rows.iter().filter(|r| r.verdict == Verdict::Fail) {
        lines.push(format!("  row alpha={:?} beta={} sup={:.3e} at w={:?} lambda={:.3e}", r.alpha, r.beta, r.sup, r.argmax_w, r.argmax_lambda));
    }
    lines.push(format!("flag estimates: {:?}", rep.verdict()));
    lines.push(format!("fiber symbols in Sym0: {:?}", sym0.verdict()));
    let failure = (rep.verdict() == Verdict::Fail)
        .then(|| CliError::Tolerance(format!("kernel {} fails the flag estimates", cfg.kernel)));
    Ok(Outcome { artifacts: art, lines, failure })
}

/// A field whose central frequencies lie inside the λ band, for field-level checks.
fn banded_field(cfg: &ExperimentConfig) -> Result<SampledField<f64>, CliError> {
    let g = cfg.grid;
    let n = cfg.n;
    let grid = Grid::heisenberg(n, g.v_count, g.v_half, g.t_count, g.t_half)?;
    let f = SampledField::from_fn(grid, |h| {
        let r: f64 = h[..2 * n].iter().map(|x| (x - 0.2) * (x - 0.2)).sum();
        let q = 4.0 * PI * h[2 * n] * h[2 * n];
        Complex::new((1.0 - 2.0 * q) * (-q).exp() * (-PI * r).exp(), 0.0)
    });
    let [lo, hi] = cfg.lambda_band;
    let eps = lo.max(1.0 / hi).min(1.0);
    Ok(lambda_filter(&f, &LambdaWindow::new(eps)?)?)
}

#[derive(Serialize)]
struct InvertSummary {
    kernel: String,
    formula: String,
    lambdas: Vec<f64>,
    inversion: flagcalc::inversion::InversionSummary,
    operator_residual_left: f64,
    operator_residual_right: f64,
    field_residuals: Vec<f64>,
    inverse_estimates: Verdict,
    max_identity_error: f64,
    spreads: Vec<f64>,
    residual_tolerance: f64,
    passed: bool,
}

pub fn invert(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let k = resolve_kernel(cfg)?;
    let line = line(cfg)?;
    let lams = cfg.lambdas();
    let mut art = Artifacts::default();

    let uniform = uniform_invertibility_report(k.as_ref(), &lams, &line, cfg.sigma_floor)?;
    art.text("uniform.csv", uniform.to_csv());
    art.json("uniform.json", &uniform)?;
    if !uniform.invertible {
        let mut msg = format!(
            "kernel {} is not uniformly invertible: sigma_min {:.3e} below floor {:.3e}\n  {:>12} {:>12} {:>12}",
            cfg.kernel, uniform.min_sigma, cfg.sigma_floor, "lambda", "sigma_min", "radius"
        );
        for r in uniform.rows.iter().filter(|r| r.below_floor) {
            msg.push_str(&format!("\n  {:>12.4e} {:>12.4e} {:>12.3}", r.lambda, r.sigma_min, r.min_vector_radius));
        }
        art.write_all(&cfg.out)?;
        return Err(CliError::Numerical(msg));
    }

    let opts = InversionOptions { cond_limit: cfg.cond_limit, strict_symmetric: cfg.strict_symmetric, ..Default::default() };
    let res = invert_flag(k.clone(), &lams, &line, &opts)?;
    let l = res.spectrum();
    let est = flag_estimate_report(l.as_ref(), cfg.alpha_max, cfg.beta_max, &res.estimate_grid()?)?;
    let deriv = lambda_derivative_check(&res, cfg.m_max, cfg.alpha_max.min(2))?;
    let field = banded_field(cfg)?;
    let fgrid = field.grid().clone();
    let ver = verify_inverse(k.as_ref(), l.as_ref(), &lams, &line, &[field])?;

    let tol = cfg.tolerances.residual;
    let max_res = res.max_residual().max(ver.max_left).max(ver.max_right);
    let passed = max_res <= tol;
    let summary = InvertSummary {
        kernel: cfg.kernel.clone(),
        formula: kernel_source(cfg),
        lambdas: lams.clone(),
        inversion: res.summary(),
        operator_residual_left: ver.max_left,
        operator_residual_right: ver.max_right,
        field_residuals: ver.field_residuals.clone(),
        inverse_estimates: est.verdict(),
        max_identity_error: deriv.max_identity_error,
        spreads: (1..=cfg.m_max).map(|m| deriv.max_spread(m)).collect(),
        residual_tolerance: tol,
        passed,
    };
    art.json("summary.json", &summary)?;
    art.text("residuals.csv", res.residual_csv());
    art.text("inverse-estimates.csv", est.to_csv());
    art.text("inverse-estimates.json", est.to_json()? + "\n");
    art.json("lambda-derivatives.json", &deriv)?;
    art.json("verify.json", &ver)?;
    art.json("inverse.json", &SampledSpectrumJson::from_sampled(res.sampled().as_ref()))?;
    let lk = realize(l.as_ref(), &fgrid)?;
    let mut bin = Vec::new();
    write_field_binary(&mut bin, &lk)?;
    art.bytes("inverse-kernel.fksf", bin);

    let lines = vec![
        format!("kernel {} ({})", cfg.kernel, summary.formula),
        format!("fibers {}  min sigma {:.4e}  max |A^-1| {:.4e}", lams.len(), res.min_sigma(), res.uniform_bound()),
        format!("symbol residual {:.3e}  operator residuals {:.3e} / {:.3e}", res.max_residual(), ver.max_left, ver.max_right),
        format!("field residual {:.3e}", ver.field_residuals.first().copied().unwrap_or(f64::NAN)),
        format!("inverse flag estimates: {:?}", est.verdict()),
        format!("lambda-derivative identity {:.3e}  spreads {:?}", deriv.max_identity_error, summary.spreads),
    ];
    let failure = (!passed).then(|| CliError::Tolerance(format!("inversion residual {max_res:.3e} exceeds {tol:.1e}")));
    Ok(Outcome { artifacts: art, lines, failure })
}

const DIGESTED: [&str; 4] = ["identities.json", "estimates.json", "summary.json", "uniform.json"];

pub fn report(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let entries: Vec<Value> = catalog()
        .iter()
        .map(|e| {
            let mut v = to_json(e);
            v["formula"] = json!(catalog_formula(e.name, cfg.n, cfg.eps).unwrap_or_default());
            v
        })
        .collect();
    let mut art = Artifacts::default();
    art.json("catalog.json", &json!({ "n": cfg.n, "eps": cfg.eps, "kernels": entries }))?;

    let mut lines: Vec<String> = catalog()
        .iter()
        .map(|e| {
            format!(
                "{:<20} estimates {:<4}  invertible {:<5}  {}",
                e.name,
                format!("{:?}", e.expected_verdict).to_lowercase(),
                e.invertible,
                e.description
            )
        })
        .collect();
    let mut digest = serde_json::Map::new();
    for name in DIGESTED {
        if let Some(v) = read_json(&cfg.out.join(name)) {
            lines.push(format!("{name}: {}", headline(name, &v)));
            digest.insert(name.to_string(), v);
        }
    }
    if !digest.is_empty() {
        art.json("report.json", &Value::Object(digest))?;
    }
    Ok(Outcome { artifacts: art, lines, failure: None })
}

fn read_json(p: &Path) -> Option<Value> {
    serde_json::from_str(&std::fs::read_to_string(p).ok()?).ok()
}

fn headline(name: &str, v: &Value) -> String {
    match name {
        "identities.json" => {
            let all = v["identities"].as_array().map_or(0, |a| a.len());
            let ok = v["identities"].as_array().map_or(0, |a| a.iter().filter(|i| i["pass"] == json!(true)).count());
            format!("{ok}/{all} identities pass")
        }
        "estimates.json" => {
            let fails = v["rows"].as_array().map_or(0, |a| a.iter().filter(|r| r["verdict"] == json!("fail")).count());
            format!("{} ({fails} failing rows)", v["subject"].as_str().unwrap_or("?"))
        }
        "summary.json" => format!(
            "{} inverted, residual {}, passed {}",
            v["kernel"].as_str().unwrap_or("?"),
            v["inversion"]["max_residual"],
            v["passed"]
        ),
        _ => format!("min sigma {}, invertible {}", v["min_sigma"], v["invertible"]),
    }
}
