use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;

use serde_json::{json, Map, Value};
use sinkhorn_core::a7::{a7_limit, groebner_residuals, groebner_residuals_k2, A7Solution};
use sinkhorn_core::closed_forms::shape_values;
use sinkhorn_core::exact::{
    a2_rational_limit, canonical_rational, cube_root_convergents_bounded, exact_scaling_trace_bounded, format_rational,
    to_f64, triangular_parameter, TerminationReport, CONVERGENT_MAX_DENOMINATOR_BITS, DEFAULT_MAX_DENOMINATOR_BITS,
};
use sinkhorn_core::{
    canonical_limit, classified_limit, mbn_limit, sinkhorn, target_sinkhorn, BigRational, Error, Label, MatrixLiteral,
    MbnParams, PositiveMatrix, Provenance, Result, ScalingOrder, SinkhornOptions, SinkhornResult,
};

use crate::output::{self, error_kind, error_value, exit_code, num, nums, render, Diagnostics, Envelope};
use crate::{Command, MatrixSource, OptionalMatrixSource, Order, RationalArgs};

enum Output {
    Json(Box<Envelope>),
    Text(String),
}

struct Outcome {
    output: Output,
    code: u8,
}

impl Outcome {
    fn ok(env: Envelope) -> Self {
        Self { output: Output::Json(Box::new(env)), code: 0 }
    }
}

pub fn run(command: Command, pretty: bool) -> ExitCode {
    let name = match &command {
        Command::Scale { .. } => "scale",
        Command::Limit { .. } => "limit",
        Command::Mbn { .. } => "mbn",
        Command::Sweep { .. } => "sweep",
        Command::Rational(_) => "rational",
        Command::Target { .. } => "target",
    };
    let outcome = match command {
        Command::Scale { source, tol, max_iters, order, trace } => scale(&source, tol, max_iters, order, trace),
        Command::Limit { source, tol } => limit(&source, tol),
        Command::Mbn { m, b, n, k, ell } => mbn(m, b, n, k, ell),
        Command::Sweep { label, k_min, k_max, points, out, tol } => {
            sweep(&label, k_min, k_max, points, out.as_deref(), tol)
        }
        Command::Rational(args) => rational(&args),
        Command::Target { source, row_sums, col_sums, tol, max_iters } => {
            target(&source, &row_sums, &col_sums, tol, max_iters)
        }
    };
    match outcome {
        Ok(Outcome { output, code }) => {
            match output {
                Output::Json(env) => emit(&format!("{}\n", render(&env.to_value(), pretty))),
                Output::Text(text) => emit(&text),
            }
            ExitCode::from(code)
        }
        Err(e) => {
            let message = e.to_string();
            eprintln!("error: {message}");
            emit(&format!("{}\n", render(&error_value(name, error_kind(&e), &message), pretty)));
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

fn load(source: &MatrixSource) -> Result<MatrixLiteral> {
    match (&source.matrix, &source.file) {
        (Some(text), _) => MatrixLiteral::parse_json(text),
        (None, Some(path)) => MatrixLiteral::load(path),
        (None, None) => Err(Error::Parse("give --matrix or --file".into())),
    }
}

fn load_optional(source: &OptionalMatrixSource) -> Result<MatrixLiteral> {
    load(&MatrixSource { matrix: source.matrix.clone(), file: source.file.clone() })
}

fn options(tol: f64, max_iters: usize, order: ScalingOrder, record_trace: bool) -> Result<SinkhornOptions> {
    let opts = SinkhornOptions { tol, max_iters, record_trace, order };
    opts.validate()?;
    Ok(opts)
}

fn order_name(order: ScalingOrder) -> &'static str {
    match order {
        ScalingOrder::RowFirst => "row_first",
        ScalingOrder::ColFirst => "col_first",
    }
}

fn obj(pairs: Vec<(&str, Value)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}

fn scaling_payload(res: &SinkhornResult) -> Vec<(&'static str, Value)> {
    let mut fields = vec![
        ("limit", output::matrix(&res.limit)),
        ("x", nums(res.x.values())),
        ("y", nums(res.y.values())),
        ("iterations", json!(res.iterations)),
        ("residual", num(res.residual)),
        ("converged", json!(res.converged)),
        ("gauge_renormalizations", json!(res.gauge_renormalizations)),
    ];
    if let Some(trace) = &res.trace {
        fields.push(("trace", Value::Array(trace.iter().map(|&(i, r)| json!([i, num(r)])).collect())));
    }
    fields
}

fn iterated_outcome(command: &'static str, inputs: Value, res: &SinkhornResult) -> Outcome {
    let mut warnings = Vec::new();
    if !res.converged {
        warnings.push(format!("not converged after {} passes", res.iterations));
    }
    let env = Envelope {
        command,
        inputs,
        result: obj(scaling_payload(res)),
        provenance: res.provenance.as_str(),
        diagnostics: Diagnostics { iterations: Some(res.iterations), residual: Some(res.residual), warnings },
    };
    Outcome { output: Output::Json(Box::new(env)), code: if res.converged { 0 } else { 2 } }
}

fn scale(source: &MatrixSource, tol: f64, max_iters: usize, order: Order, trace: bool) -> Result<Outcome> {
    let order = match order {
        Order::RowFirst => ScalingOrder::RowFirst,
        Order::ColFirst => ScalingOrder::ColFirst,
    };
    let opts = options(tol, max_iters, order, trace)?;
    let a = load(source)?.to_float()?;
    let res = sinkhorn(&a, &opts)?;
    let inputs = obj(vec![
        ("matrix", output::matrix(&a)),
        ("tol", num(tol)),
        ("max_iters", json!(max_iters)),
        ("order", json!(order_name(order))),
        ("trace", json!(trace)),
    ]);
    Ok(iterated_outcome("scale", inputs, &res))
}

fn a7_report(sol: &A7Solution) -> Result<Value> {
    let [h1, h2, h3] = groebner_residuals(sol.k, sol.x, sol.y, sol.z)?;
    let mut fields = vec![
        ("K", num(sol.k)),
        ("x", num(sol.x)),
        ("y", num(sol.y)),
        ("z", num(sol.z)),
        ("quadratic_residuals", nums(&sol.residuals)),
        ("descartes_count", json!(sol.positive_root_count)),
        ("groebner_residuals", nums(&[h1, h2, h3])),
    ];
    if sol.k == 2.0 {
        fields.push(("groebner_residuals_k2", nums(&groebner_residuals_k2(sol.x, sol.y, sol.z))));
    }
    Ok(obj(fields))
}

fn limit(source: &MatrixSource, tol: f64) -> Result<Outcome> {
    let a = load(source)?.to_float()?;
    let found = classified_limit(&a, tol)?;
    let res = &found.result;
    let class = match &found.class {
        Some(c) => obj(vec![
            ("label", json!(c.label.as_str())),
            ("K", num(c.k)),
            ("P", output::permutation(&c.p)),
            ("Q", output::permutation(&c.q)),
            ("lambda", num(c.lambda)),
        ]),
        None => Value::Null,
    };
    let mut fields = vec![("class", class)];
    fields.extend(scaling_payload(res));
    if let Some(sol) = &found.a7 {
        fields.push(("a7", a7_report(sol)?));
    }
    let mut warnings = Vec::new();
    if !res.converged {
        warnings.push(format!("residual {} above tolerance", output::format_float(res.residual)));
    }
    let env = Envelope {
        command: "limit",
        inputs: obj(vec![("matrix", output::matrix(&a)), ("tol", num(tol))]),
        result: obj(fields),
        provenance: res.provenance.as_str(),
        diagnostics: Diagnostics { iterations: Some(res.iterations), residual: Some(res.residual), warnings },
    };
    Ok(Outcome { output: Output::Json(Box::new(env)), code: if res.converged { 0 } else { 2 } })
}

fn mbn(m: f64, b: f64, n: f64, k: usize, ell: usize) -> Result<Outcome> {
    let params = MbnParams::new(m, b, n, k, ell)?;
    let lim = mbn_limit(&params);
    let s = lim.expand(k, ell)?;
    let residual = sinkhorn_core::matrix::stochastic_deviation(&s);
    let env = Envelope {
        command: "mbn",
        inputs: obj(vec![("M", num(m)), ("B", num(b)), ("N", num(n)), ("k", json!(k)), ("ell", json!(ell))]),
        result: obj(vec![
            ("L", num(params.ratio())),
            ("a", num(lim.a)),
            ("b", num(lim.b)),
            ("c", num(lim.c)),
            ("x", num(lim.x)),
            ("y", num(lim.y)),
            ("limit", output::matrix(&s)),
        ]),
        provenance: Provenance::ClosedForm.as_str(),
        diagnostics: Diagnostics { iterations: None, residual: Some(residual), warnings: Vec::new() },
    };
    Ok(Outcome::ok(env))
}

fn sweep_point(label: Label, k: f64, tol: f64) -> Result<(PositiveMatrix, Provenance)> {
    if k == 1.0 {
        // every class degenerates to the all-ones matrix
        let res = sinkhorn(&PositiveMatrix::filled(3, 3, 1.0)?, &SinkhornOptions::with_tol(tol))?;
        return Ok((res.limit, Provenance::Iterated));
    }
    if label == Label::A7 {
        let sol = a7_limit(k, tol)?;
        return Ok((sol.s, sol.provenance));
    }
    Ok((canonical_limit(label, k)?.s, Provenance::ClosedForm))
}

fn sweep(
    label: &str,
    k_min: f64,
    k_max: f64,
    points: usize,
    out: Option<&std::path::Path>,
    tol: f64,
) -> Result<Outcome> {
    let label: Label = label.parse()?;
    if !(k_min > 0.0 && k_max >= k_min && k_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("need 0 < k-min <= k-max, got {k_min} and {k_max}")));
    }
    if points == 0 {
        return Err(Error::InvalidParameter("points must be at least 1".into()));
    }
    let ks: Vec<f64> = if points == 1 {
        vec![k_min]
    } else {
        let ratio = k_max / k_min;
        (0..points)
            .map(|i| if i + 1 == points { k_max } else { k_min * ratio.powf(i as f64 / (points - 1) as f64) })
            .collect()
    };
    let letters = ["a", "b", "c", "d", "e", "f"];
    let width = shape_values(label, &PositiveMatrix::filled(3, 3, 1.0)?).len();
    let mut csv = format!("K,{},provenance\n", letters[..width].join(","));
    for &k in &ks {
        let (s, provenance) = sweep_point(label, k, tol)?;
        let values: Vec<String> = shape_values(label, &s).into_iter().map(output::format_float).collect();
        writeln!(csv, "{},{},{}", output::format_float(k), values.join(","), provenance.as_str()).unwrap();
    }
    let Some(path) = out else {
        return Ok(Outcome { output: Output::Text(csv), code: 0 });
    };
    std::fs::write(path, &csv).map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))?;
    let env = Envelope {
        command: "sweep",
        inputs: obj(vec![
            ("label", json!(label.as_str())),
            ("k_min", num(k_min)),
            ("k_max", num(k_max)),
            ("points", json!(points)),
            ("tol", num(tol)),
        ]),
        result: obj(vec![
            ("file", json!(path.display().to_string())),
            ("rows", json!(ks.len())),
            ("columns", json!(csv.lines().next().unwrap().split(',').collect::<Vec<_>>())),
        ]),
        provenance: if label == Label::A7 { Provenance::RootSolved.as_str() } else { Provenance::ClosedForm.as_str() },
        diagnostics: Diagnostics::default(),
    };
    Ok(Outcome::ok(env))
}

fn report_value(r: &TerminationReport) -> Value {
    obj(vec![
        ("steps_run", json!(r.steps_run)),
        ("terminated", json!(r.terminated)),
        ("terminating_step", r.terminating_step.map_or(Value::Null, |s| json!(s))),
        ("final_deviation", json!(format_rational(&r.final_deviation))),
        ("final_deviation_float", num(to_f64(&r.final_deviation))),
    ])
}

fn rational(args: &RationalArgs) -> Result<Outcome> {
    if args.steps == 0 {
        return Err(Error::InvalidParameter("steps must be at least 1".into()));
    }
    if let Some(probe) = &args.probe {
        return probe_a2(probe, args.k.expect("clap requires --K with --probe"), args.steps, args.max_bits);
    }
    if args.cube_root {
        return cube_root(args.steps, args.max_bits.unwrap_or(CONVERGENT_MAX_DENOMINATOR_BITS));
    }
    let a = load_optional(&args.source)?.to_rational()?;
    let max_bits = args.max_bits.unwrap_or(DEFAULT_MAX_DENOMINATOR_BITS);
    let (iterates, report) = exact_scaling_trace_bounded(&a, args.steps, max_bits)?;
    let env = Envelope {
        command: "rational",
        inputs: obj(vec![
            ("mode", json!("trace")),
            ("matrix", output::rational_matrix(&a)),
            ("steps", json!(args.steps)),
            ("max_bits", json!(max_bits)),
        ]),
        result: obj(vec![
            ("iterates", Value::Array(iterates.iter().map(output::rational_matrix).collect())),
            ("report", report_value(&report)),
        ]),
        provenance: Provenance::Exact.as_str(),
        diagnostics: Diagnostics { iterations: Some(report.steps_run), residual: None, warnings: Vec::new() },
    };
    Ok(Outcome::ok(env))
}

fn probe_a2(probe: &str, k: u64, steps: usize, max_bits: Option<u64>) -> Result<Outcome> {
    let label: Label = probe.parse()?;
    if label != Label::A2 {
        return Err(Error::InvalidParameter(format!("only the A2 probe is available, got {label}")));
    }
    if k < 2 {
        return Err(Error::InvalidParameter(format!("K must be an integer of at least 2, got {k}")));
    }
    let disc = 8 * u128::from(k) + 1;
    let r = triangular_parameter(k);
    let (limit, message) = match r {
        Some(r) => {
            let lim = a2_rational_limit(r)?;
            let q = |v| json!(format_rational(v));
            let limit = obj(vec![
                ("a", q(&lim.a)),
                ("b", q(&lim.b)),
                ("c", q(&lim.c)),
                ("x_sq", q(&lim.x_sq)),
                ("y_sq", q(&lim.y_sq)),
            ]);
            let message = format!("limit rational: 8K+1={disc}=(2r+1)^2 with r={r}");
            (limit, message)
        }
        None => {
            (Value::Null, format!("limit irrational: 8K+1={disc} not a perfect square; finite termination impossible"))
        }
    };
    let max_bits = max_bits.unwrap_or(DEFAULT_MAX_DENOMINATOR_BITS);
    let a2 = canonical_rational(Label::A2, &BigRational::from_integer(k.into()))?;
    let (_, report) = exact_scaling_trace_bounded(&a2, steps, max_bits)?;
    let env = Envelope {
        command: "rational",
        inputs: obj(vec![
            ("mode", json!("probe")),
            ("probe", json!(label.as_str())),
            ("K", json!(k)),
            ("steps", json!(steps)),
            ("max_bits", json!(max_bits)),
        ]),
        result: obj(vec![
            ("discriminant", json!(disc)),
            ("triangular", json!(r.is_some())),
            ("r", r.map_or(Value::Null, |r| json!(r))),
            ("limit", limit),
            ("message", json!(message)),
            ("termination", report_value(&report)),
        ]),
        provenance: Provenance::Exact.as_str(),
        diagnostics: Diagnostics { iterations: Some(report.steps_run), residual: None, warnings: Vec::new() },
    };
    Ok(Outcome::ok(env))
}

fn cube_root(steps: usize, max_bits: u64) -> Result<Outcome> {
    let conv = cube_root_convergents_bounded(steps, max_bits)?;
    let target = 2f64.cbrt() - 1.0;
    let terms: Vec<Value> = conv
        .terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let f = to_f64(t);
            obj(vec![
                ("step", json!(i + 1)),
                ("value", json!(format_rational(t))),
                ("float", num(f)),
                ("error", num((f - target).abs())),
            ])
        })
        .collect();
    let mut warnings = Vec::new();
    if let Some(bits) = conv.stopped_at_bits {
        warnings.push(format!(
            "stopped after step {}: denominators reached {bits} bits (bound {max_bits})",
            conv.terms.len()
        ));
    }
    let env = Envelope {
        command: "rational",
        inputs: obj(vec![("mode", json!("cube_root")), ("steps", json!(steps)), ("max_bits", json!(max_bits))]),
        result: obj(vec![
            ("target", num(target)),
            ("convergents", Value::Array(terms)),
            ("stopped_at_bits", conv.stopped_at_bits.map_or(Value::Null, |b| json!(b))),
        ]),
        provenance: Provenance::Exact.as_str(),
        diagnostics: Diagnostics { iterations: Some(conv.terms.len()), residual: None, warnings },
    };
    Ok(Outcome::ok(env))
}

fn target(source: &MatrixSource, r: &[f64], c: &[f64], tol: f64, max_iters: usize) -> Result<Outcome> {
    let opts = options(tol, max_iters, ScalingOrder::RowFirst, false)?;
    let a = load(source)?.to_float()?;
    let res = target_sinkhorn(&a, r, c, &opts)?;
    let inputs = obj(vec![
        ("matrix", output::matrix(&a)),
        ("row_sums", nums(r)),
        ("col_sums", nums(c)),
        ("tol", num(tol)),
        ("max_iters", json!(max_iters)),
    ]);
    Ok(iterated_outcome("target", inputs, &res))
}
