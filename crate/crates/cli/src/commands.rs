use std::fs;
use std::path::Path;

use evalexpr::{ContextWithMutableVariables, HashMapContext, Value as ExprValue};
use gds_core::capacity::{
    c1_lower_bound_gds, coherent_information, maximize_coherent_information,
    maximize_coherent_information_gds, p1_lower_bound_gds, q1_lower_bound_gds, Ensemble, OptimizerConfig,
};
use gds_core::cdc::{
    build_cdc, certified_cdc_bounds, fig1_csv, fig1_data, fig1_left_csv, fig1_right_csv,
    superadditivity_max_lambda, superadditivity_report, CdcParams,
};
use gds_core::channel::{transposed_choi, ChannelSpec, KrausChannel};
use gds_core::gds::{gds_is_degradable, validate_block_structure, GdsChannel, GdsSpec};
use gds_core::linalg::ComplexMatrix;
use gds_core::singleletter::{check_single_letter, MatchSearchConfig};
use gds_core::witness::{
    absolute_value_witness, check_transposition_witness, default_gds_transposition_witness,
    diamond_norm_oracle, OracleConfig,
};
use gds_core::Error;
use num_complex::Complex;
use serde_json::{json, Value};

use crate::output::{emit, object, to_csv, to_json};
use crate::{CliError, Format, RunConfig};

/// Largest `d_A d_B` for which the oracle builds a dense Choi matrix.
const MAX_ORACLE_CHOI_DIM: usize = 256;

enum Spec {
    Channel(ChannelSpec),
    Gds(GdsSpec),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse_spec(path: &Path) -> Result<Spec, CliError> {
    let text = read(path)?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: malformed JSON: {e}", path.display())))?;
    let parsed = if value.get("subchannels").is_some() {
        serde_json::from_value(value).map(Spec::Gds)
    } else {
        serde_json::from_value(value).map(Spec::Channel)
    };
    parsed.map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// Loads a GDS spec; a plain channel spec becomes a single-block channel.
fn load_gds(path: &Path, pad: bool) -> Result<GdsChannel<f64>, CliError> {
    let spec = match parse_spec(path)? {
        Spec::Gds(g) => g,
        Spec::Channel(c) => GdsSpec { subchannels: vec![c] },
    };
    Ok(spec.to_gds(pad)?)
}

fn finish(report: Value, run: &RunConfig, default: Format) -> Result<(), CliError> {
    let text = match run.format.unwrap_or(default) {
        Format::Json => to_json(report),
        Format::Csv => to_csv(&report),
    };
    emit(&text, run.out.as_deref())
}

fn optimizer(run: &RunConfig) -> OptimizerConfig<f64> {
    OptimizerConfig {
        restarts: run.restarts.max(1),
        tol: run.tol,
        seed: run.seed,
        ..OptimizerConfig::default()
    }
}

fn channel_summary(ch: &KrausChannel<f64>) -> Value {
    object([
        ("name", json!(ch.name())),
        ("dim_in", json!(ch.dim_in())),
        ("dim_out", json!(ch.dim_out())),
        ("kraus_count", json!(ch.kraus_count())),
        ("cptp_residual", json!(ch.tp_residual())),
    ])
}

fn failure(error: &CliError, extra: Option<(&str, Value)>) -> Value {
    let mut v = object([("valid", json!(false)), ("error", json!(error.to_string()))]);
    if let Some(h) = error.hint() {
        v["hint"] = json!(h);
    }
    if let Some((k, x)) = extra {
        v[k] = x;
    }
    v
}

/// Writes a failure report and passes the error on for the exit status.
fn report_failure(error: CliError, extra: Option<(&str, Value)>, run: &RunConfig) -> Result<(), CliError> {
    finish(failure(&error, extra), run, Format::Json)?;
    Err(error)
}

pub fn validate(path: &Path, run: &RunConfig) -> Result<(), CliError> {
    let spec = match parse_spec(path) {
        Ok(s) => s,
        Err(e) => return report_failure(e, None, run),
    };
    match spec {
        Spec::Channel(c) => match c.to_channel::<f64>() {
            Ok(ch) => {
                let mut v = object([("valid", json!(true)), ("kind", json!("channel"))]);
                if let (Value::Object(m), Value::Object(s)) = (&mut v, channel_summary(&ch)) {
                    m.extend(s);
                }
                finish(v, run, Format::Json)
            }
            Err(e) => {
                let extra = match e {
                    Error::NotTracePreserving { residual } => Some(("cptp_residual", json!(residual))),
                    _ => None,
                };
                report_failure(e.into(), extra, run)
            }
        },
        Spec::Gds(g) => {
            let mut blocks = Vec::new();
            for (i, s) in g.subchannels.iter().enumerate() {
                match s.to_channel::<f64>() {
                    Ok(ch) => blocks.push(channel_summary(&ch)),
                    Err(e) => {
                        let extra = match e {
                            Error::NotTracePreserving { residual } => json!({"block": i, "cptp_residual": residual}),
                            _ => json!({"block": i}),
                        };
                        return report_failure(e.into(), Some(("offending", extra)), run);
                    }
                }
            }
            let gds = match g.to_gds::<f64>(run.pad) {
                Ok(gds) => gds,
                Err(e) => return report_failure(e.into(), Some(("blocks", json!(blocks))), run),
            };
            let check = validate_block_structure(gds.assembled(), gds.in_blocks(), gds.out_blocks())?;
            let v = object([
                ("valid", json!(check.valid)),
                ("kind", json!("gds")),
                ("padded", json!(run.pad)),
                ("dim_in", json!(gds.dim_in())),
                ("dim_out", json!(gds.dim_out())),
                ("kraus_count", json!(gds.kraus_count())),
                ("cptp_residual", json!(gds.assembled().tp_residual())),
                ("block_structure", json!(check.valid)),
                ("blocks", json!(blocks)),
            ]);
            finish(v, run, Format::Json)?;
            if check.valid {
                Ok(())
            } else {
                Err(CliError::Parse("assembled channel is not block structured".into()))
            }
        }
    }
}

fn zero_state(d: usize) -> ComplexMatrix<f64> {
    ComplexMatrix::ket_bra(d, 0, d, 0)
}

fn basis_ensemble(d: usize) -> Ensemble<f64> {
    Ensemble::new(vec![1.0 / d as f64; d], (0..d).map(|i| ComplexMatrix::ket_bra(d, i, d, i)).collect())
        .expect("basis ensemble is valid")
}

pub fn bounds(path: &Path, run: &RunConfig) -> Result<(), CliError> {
    let g = load_gds(path, run.pad)?;
    let cfg = optimizer(run);
    let opt = maximize_coherent_information_gds(&g, &cfg)?;

    // Analytic lower bound from two candidate sets of block states: the
    // per-block optimizer states and |0> in every block.
    let mut block_optima = Vec::new();
    let mut zero_optima = Vec::new();
    for sub in g.subchannels() {
        let r = maximize_coherent_information(sub, &cfg)?;
        block_optima.push((r.argument.assemble(), r.value));
        let z = zero_state(sub.dim_in());
        let v = coherent_information(sub, &z)?;
        zero_optima.push((z, v));
    }
    let lower_opt = q1_lower_bound_gds(&g, &block_optima)?;
    let lower_zero = q1_lower_bound_gds(&g, &zero_optima)?;
    let q1_lower = lower_opt.value.max(lower_zero.value);

    let witness = default_gds_transposition_witness(&g)?;
    let cert = check_transposition_witness(g.assembled(), &witness)?;

    let points = |states: &[(ComplexMatrix<f64>, f64)]| -> Vec<Ensemble<f64>> {
        states.iter().map(|(s, _)| Ensemble::point(s.clone()).expect("optimizer states are valid")).collect()
    };
    let bases: Vec<_> = g.subchannels().iter().map(|s| basis_ensemble(s.dim_in())).collect();
    let mixed: Vec<_> = g
        .subchannels()
        .iter()
        .map(|s| {
            let d = s.dim_in();
            Ensemble::point(ComplexMatrix::identity(d).scale(1.0 / d as f64)).expect("maximally mixed state")
        })
        .collect();
    let mut p1_lower = f64::NEG_INFINITY;
    for ens in [points(&block_optima), points(&zero_optima), mixed, bases.clone()] {
        p1_lower = p1_lower.max(p1_lower_bound_gds(&g, &ens)?);
    }
    let c1_lower = c1_lower_bound_gds(&g, &bases)?;

    let degradable = gds_is_degradable(&g);
    let zero_candidates: Vec<Vec<Complex<f64>>> = g
        .subchannels()
        .iter()
        .map(|s| (0..s.dim_in()).map(|i| Complex::new(if i == 0 { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    let sl_cfg = MatchSearchConfig {
        restarts: run.restarts.max(1),
        seed: run.seed,
        ..MatchSearchConfig::default()
    };
    let single = check_single_letter(&g, Some(&zero_candidates), &sl_cfg)?;

    let q_upper = cert.value_bits;
    let report = object([
        ("blocks", json!(g.block_count())),
        ("dim_in", json!(g.dim_in())),
        ("dim_out", json!(g.dim_out())),
        ("kraus_count", json!(g.kraus_count())),
        ("q1_optimizer", json!(opt.value)),
        ("q1_optimizer_converged", json!(opt.converged)),
        ("q1_lower_analytic", json!(q1_lower)),
        ("q_upper_certificate", serde_json::to_value(&cert).expect("certificate serializes")),
        ("p1_lower", json!(p1_lower)),
        ("c1_lower", json!(c1_lower)),
        (
            "degradable",
            json!({"holds": degradable.holds, "residual": degradable.residual}),
        ),
        ("single_letter", serde_json::to_value(&single).expect("verdict serializes")),
        (
            "chain",
            json!({
                "q1_lower_le_q1_optimizer": q1_lower <= opt.value + 1e-6,
                "q1_optimizer_le_q_upper": cert.feasible && opt.value <= q_upper + 1e-9,
            }),
        ),
        ("seed", json!(run.seed)),
        ("restarts", json!(cfg.restarts)),
    ]);
    finish(report, run, Format::Json)?;
    if run.require_certificate && !cert.feasible {
        return Err(CliError::Infeasible);
    }
    Ok(())
}

/// Evaluates the rule at `n`; the result must be a positive integer.
fn eval_rule(rule: &str, n: usize) -> gds_core::Result<usize> {
    let mut ctx = HashMapContext::<evalexpr::DefaultNumericTypes>::new();
    ctx.set_value("n".into(), ExprValue::from_int(n as i64))
        .map_err(|e| Error::InvalidParameter(format!("p rule: {e}")))?;
    let v = evalexpr::eval_with_context(rule, &ctx)
        .map_err(|e| Error::InvalidParameter(format!("p rule {rule:?}: {e}")))?;
    let x = match v {
        ExprValue::Int(i) => i as f64,
        ExprValue::Float(f) => f,
        other => return Err(Error::InvalidParameter(format!("p rule {rule:?} gives {other}"))),
    };
    if x.fract() != 0.0 || x < 1.0 || x > u32::MAX as f64 {
        return Err(Error::InvalidParameter(format!("p rule {rule:?} gives p = {x} at n = {n}")));
    }
    Ok(x as usize)
}

pub fn fig1(rule: &str, n_min: usize, n_max: usize, out_dir: Option<&Path>, run: &RunConfig) -> Result<(), CliError> {
    if n_min > n_max {
        return Err(Error::InvalidParameter(format!("n range {n_min}..={n_max} is empty")).into());
    }
    let rows = fig1_data(|n| eval_rule(rule, n), n_min..=n_max)?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        emit(&fig1_left_csv(&rows), Some(&dir.join("fig1_left.csv")))?;
        emit(&fig1_right_csv(&rows), Some(&dir.join("fig1_right.csv")))?;
    }
    match run.format.unwrap_or(Format::Csv) {
        Format::Csv => emit(&fig1_csv(&rows), run.out.as_deref()),
        Format::Json => emit(
            &to_json(json!({"p_rule": rule, "rows": rows})),
            run.out.as_deref(),
        ),
    }
}

pub fn superadd(p: usize, n: usize, lambda: f64, run: &RunConfig) -> Result<(), CliError> {
    let params = CdcParams::new(p, n)?;
    let r = superadditivity_report(&params, lambda)?;
    let lambda_max = superadditivity_max_lambda(&params).ok();
    let mut v = serde_json::to_value(&r).expect("report serializes");
    v["mode"] = json!(if r.closed_form_only { "closed-form only" } else { "numeric" });
    v["lambda_max"] = json!(lambda_max);
    finish(v, run, Format::Json)?;
    if r.closed_form_only {
        return Err(CliError::Guarded);
    }
    Ok(())
}

pub fn cdc(p: usize, n: usize, alpha: Option<usize>, emit_spec: bool, run: &RunConfig) -> Result<(), CliError> {
    let params = CdcParams::with_alpha(p, n, alpha.unwrap_or(n))?;
    if emit_spec {
        let g = build_cdc::<f64>(&params)?;
        let mut text = g.to_spec().to_json();
        text.push('\n');
        return emit(&text, run.out.as_deref());
    }
    let c = certified_cdc_bounds::<f64>(&params)?;
    let b = c.bounds;
    let feasible = c.q_certificate.feasible && c.c_certificate.feasible;
    let mut v = serde_json::to_value(&c).expect("bounds serialize");
    v["chain"] = json!({
        "q1_lower": b.q1_lower,
        "q_upper": b.q_upper,
        "pc_exact": b.pc_exact,
        "holds": b.q1_lower <= b.q_upper && b.q_upper < b.pc_exact,
        "certified": feasible,
    });
    finish(v, run, Format::Json)?;
    if run.require_certificate && !feasible {
        return Err(CliError::Infeasible);
    }
    Ok(())
}

fn parse_candidates(path: &Path) -> Result<Vec<Vec<Complex<f64>>>, CliError> {
    let text = read(path)?;
    let raw: Vec<Vec<[f64; 2]>> =
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    Ok(raw
        .into_iter()
        .map(|v| v.into_iter().map(|[a, b]| Complex::new(a, b)).collect())
        .collect())
}

pub fn single_letter(path: &Path, candidates: Option<&Path>, run: &RunConfig) -> Result<(), CliError> {
    let g = load_gds(path, run.pad)?;
    let cands = candidates.map(parse_candidates).transpose()?;
    let cfg = MatchSearchConfig {
        restarts: run.restarts.max(1),
        seed: run.seed,
        ..MatchSearchConfig::default()
    };
    let v = check_single_letter(&g, cands.as_deref(), &cfg)?;
    finish(serde_json::to_value(&v).expect("verdict serializes"), run, Format::Json)
}

pub fn oracle(path: &Path, run: &RunConfig) -> Result<(), CliError> {
    let g = load_gds(path, run.pad)?;
    let ch = g.assembled();
    let (da, db) = (ch.dim_in(), ch.dim_out());
    if da * db > MAX_ORACLE_CHOI_DIM {
        return Err(Error::GuardExceeded(format!(
            "oracle needs a dense {0}x{0} Choi matrix, limit {MAX_ORACLE_CHOI_DIM}",
            da * db
        ))
        .into());
    }
    let witness = if g.block_count() == 1 {
        absolute_value_witness(ch)
    } else {
        default_gds_transposition_witness(&g)?
    };
    let cert = check_transposition_witness(ch, &witness)?;
    let cfg = OracleConfig {
        restarts: run.restarts.max(1),
        seed: run.seed,
        ..OracleConfig::default()
    };
    let lower = diamond_norm_oracle(&transposed_choi(ch), (da, db), &cfg)?;
    let report = object([
        ("oracle_lower", json!(lower)),
        ("witness_y", json!(witness.y)),
        ("witness_feasible", json!(cert.feasible)),
        ("sandwich_holds", json!(lower <= witness.y + 1e-7)),
        ("q_upper_bits", json!(cert.value_bits)),
        ("seed", json!(run.seed)),
        ("restarts", json!(cfg.restarts)),
    ]);
    finish(report, run, Format::Json)?;
    if run.require_certificate && !cert.feasible {
        return Err(CliError::Infeasible);
    }
    Ok(())
}
