//! Command-line front end.
//!
//! Every run produces one [`ResultEnvelope`]. Exit codes: 0 all checks
//! passed, 1 a mathematical check failed, 2 bad input or a domain/pole
//! error, 3 inconclusive.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::identities::{verify_finite_sum_b, verify_finite_sum_a, verify_decomposition, verify_duplication, IdentityId, IdentityTolerances};
use crate::opcalc::{parse_rational, to_f64, verify_gauss_form, verify_k2_image, GaussForm, Rational, K2Form};
use crate::pde::{
    genericity_warnings, independence_check, indicial_roots, pde_residuals, sample_points, solution_spec,
    ConstantFunction, PartialProvider, SolutionFunction, SOLUTION_COUNT, SOLUTION_PATTERNS,
};
use crate::series::{
    appell_f4, gauss_2f1, k2_eval, k2_mixed_partial, lauricella_fc4, K2Params, MultiIndex4, Point4, SeriesValue,
    TruncationPolicy,
};

/// Cost guard on the truncation degree.
pub const MAX_DEGREE_CAP: u32 = 64;
pub const DEFAULT_PARAMS: &str = "1/3,1/5,1/7,3/10,9/20,3/5,3/4";
pub const DEFAULT_POINT: &str = "0.05,0.04,0.03,0.02";
pub const DEFAULT_LEMMA_PARAMS: &str = "1/2,2/3,5/4";
pub const DEFAULT_SEED: u64 = 20240917;
pub const DEFAULT_PDE_THRESHOLD: f64 = 1e-7;
/// Sample box for residual and rank checks.
pub const SAMPLE_BOX: (f64, f64) = (0.01, 0.05);

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "k2quad", version, about = "Evaluate and verify the quadruple hypergeometric function K2")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate K2 (or one of the auxiliary series) at a point.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = Function::K2)]
        function: Function,
        /// Mixed partial orders i,j,k,l (K2 only).
        #[arg(long)]
        orders: Option<String>,
    },
    /// Residuals of the sixteen Frobenius solutions in the PDE system.
    PdeCheck {
        #[command(flatten)]
        common: CommonArgs,
        /// Solution index 1..16 or "all".
        #[arg(long, default_value = "all")]
        solution: String,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        /// Replace every solution by this constant (fault injection).
        #[arg(long, allow_hyphen_values = true)]
        probe_constant: Option<f64>,
    },
    /// Singular-value rank test of the sixteen solutions.
    Independence {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Exact check of the operational images.
    Opcheck {
        #[command(flatten)]
        common: CommonArgs,
        /// lemma1-3.4, lemma1-3.5, thm-3.7, thm-3.8 or all.
        #[arg(long, default_value = "all")]
        form: String,
        #[arg(long, default_value_t = 4)]
        order: u32,
        /// alpha,beta,gamma for the Gauss image.
        #[arg(long, default_value = DEFAULT_LEMMA_PARAMS, allow_hyphen_values = true)]
        lemma_params: String,
    },
    /// Numerical check of the finite-sum, decomposition and duplication identities.
    Identity {
        #[command(flatten)]
        common: CommonArgs,
        /// 3.10, 3.11, 3.12, 3.13 or all.
        #[arg(long, default_value = "all")]
        id: String,
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 6)]
        outer_bound: u32,
        #[arg(long, default_value_t = 4)]
        total_bound: u32,
    },
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// a,b,c,e1,e2,e3,e4 as decimals or rationals like 1/3.
    #[arg(long, default_value = DEFAULT_PARAMS, allow_hyphen_values = true)]
    pub params: String,
    /// x,y,z,t
    #[arg(long, default_value = DEFAULT_POINT, allow_hyphen_values = true)]
    pub point: String,
    /// Truncation degree D (at most 64).
    #[arg(long)]
    pub max_degree: Option<u32>,
    /// Pass threshold (PDE residual or identity tolerance).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Include wall time in the envelope (breaks byte-for-byte reproducibility).
    #[arg(long)]
    pub timing: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Function {
    K2,
    Gauss,
    AppellF4,
    LauricellaFc4,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Table,
}

/// Parsed common configuration, echoed in every envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub params_text: String,
    pub params: [f64; 7],
    pub point: [f64; 4],
    pub policy: TruncationPolicy,
    pub tol: Option<f64>,
    pub seed: u64,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEnvelope {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub warnings: Vec<String>,
    pub status: String,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

pub struct RunOutput {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

struct Outcome {
    results: Value,
    warnings: Vec<String>,
    code: i32,
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Inconclusive(_) => EXIT_INCONCLUSIVE,
        _ => EXIT_INPUT,
    }
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::Pole(_) => "pole",
        Error::Domain(_) => "domain",
        Error::InvalidInput(_) => "invalid_input",
        Error::Inconclusive(_) => "inconclusive",
    }
}

fn status_label(code: i32) -> &'static str {
    match code {
        EXIT_PASS => "pass",
        EXIT_FAIL => "fail",
        EXIT_INCONCLUSIVE => "inconclusive",
        _ => "error",
    }
}

/// Decimal, integer, `p/q`, or anything `f64` parses (e.g. `1e-3`).
pub fn parse_real(s: &str) -> Result<f64> {
    let v = match parse_rational(s) {
        Ok(r) => to_f64(&r),
        Err(e) => s.trim().parse::<f64>().map_err(|_| e)?,
    };
    if !v.is_finite() {
        return Err(Error::InvalidInput(format!("{s:?} is not a finite number")));
    }
    Ok(v)
}

fn parse_list<const N: usize>(s: &str, what: &str) -> Result<[f64; N]> {
    let vals: Vec<f64> = s.split(',').map(parse_real).collect::<Result<_>>()?;
    vals.try_into()
        .map_err(|v: Vec<f64>| Error::InvalidInput(format!("{what} needs {N} comma-separated values, got {}", v.len())))
}

fn parse_rational_list<const N: usize>(s: &str, what: &str) -> Result<[Rational; N]> {
    let vals: Vec<Rational> = s.split(',').map(parse_rational).collect::<Result<_>>()?;
    vals.try_into()
        .map_err(|v: Vec<Rational>| Error::InvalidInput(format!("{what} needs {N} rationals, got {}", v.len())))
}

fn build_config(verb: &str, common: &CommonArgs, default_degree: u32) -> Result<RunConfig> {
    let params = parse_list::<7>(&common.params, "--params")?;
    let point = parse_list::<4>(&common.point, "--point")?;
    let d = common.max_degree.unwrap_or(default_degree);
    if d > MAX_DEGREE_CAP {
        return Err(Error::InvalidInput(format!("--max-degree {d} exceeds the cap {MAX_DEGREE_CAP}")));
    }
    if let Some(t) = common.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidInput("--tol must be a positive number".into()));
        }
    }
    Ok(RunConfig {
        command: verb.to_string(),
        params_text: common.params.clone(),
        params,
        point,
        policy: TruncationPolicy::with_degree(d),
        tol: common.tol,
        seed: common.seed,
        format: common.format,
    })
}

impl RunConfig {
    fn k2_params(&self) -> Result<K2Params> {
        K2Params::from_array(self.params)
    }

    fn point4(&self) -> Result<Point4> {
        let [x, y, z, t] = self.point;
        Point4::new(x, y, z, t)
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn series_warnings(label: &str, v: &SeriesValue) -> Vec<String> {
    let mut w = Vec::new();
    if v.outside_domain {
        w.push(format!("{label}: point lies outside the evaluation domain (L1 norm > 0.5)"));
    }
    if v.divergence_warning {
        w.push(format!("{label}: shell magnitudes are not decreasing; the series may diverge here"));
    }
    w
}

fn cmd_eval(cfg: &RunConfig, function: Function, orders: Option<&str>) -> Result<Outcome> {
    let p = cfg.k2_params()?;
    let pt = cfg.point4()?;
    let pol = &cfg.policy;
    let orders = orders
        .map(|s| {
            let o: Vec<u32> = s
                .split(',')
                .map(|v| v.trim().parse().map_err(|_| Error::InvalidInput(format!("bad order {v:?}"))))
                .collect::<Result<_>>()?;
            let o: [u32; 4] = o.try_into().map_err(|_| Error::InvalidInput("--orders needs four integers".into()))?;
            Ok::<_, Error>(MultiIndex4::from_array(o))
        })
        .transpose()?;
    if orders.is_some() && function != Function::K2 {
        return Err(Error::InvalidInput("--orders applies to K2 only".into()));
    }
    let value = match function {
        Function::K2 => match orders {
            Some(o) => k2_mixed_partial(&p, pt, o, pol)?,
            None => k2_eval(&p, pt, pol)?,
        },
        Function::Gauss => gauss_2f1(p.a, p.b, p.e[0], pt.x, pol)?,
        Function::AppellF4 => appell_f4(p.a, p.b, p.e[0], p.e[1], pt.x, pt.y, pol)?,
        Function::LauricellaFc4 => lauricella_fc4(p.a, p.b, p.e, pt, pol)?,
    };
    Ok(Outcome {
        results: json!({
            "function": function,
            "orders": orders.map(|o| o.to_array()),
            "value": to_value(&value),
            "policy": to_value(pol),
        }),
        warnings: series_warnings("eval", &value),
        code: EXIT_PASS,
    })
}

fn parse_solution_selection(s: &str) -> Result<Vec<usize>> {
    if s.trim() == "all" {
        return Ok((1..=SOLUTION_COUNT).collect());
    }
    let j: usize = s.trim().parse().map_err(|_| Error::InvalidInput(format!("bad solution index {s:?}")))?;
    if !(1..=SOLUTION_COUNT).contains(&j) {
        return Err(Error::InvalidInput(format!("solution index {j} outside 1..=16")));
    }
    Ok(vec![j])
}

fn cmd_pde_check(cfg: &RunConfig, selection: &str, samples: usize, probe: Option<f64>) -> Result<Outcome> {
    let p = cfg.k2_params()?;
    if samples == 0 {
        return Err(Error::InvalidInput("--samples must be at least 1".into()));
    }
    let threshold = cfg.tol.unwrap_or(DEFAULT_PDE_THRESHOLD);
    let points = sample_points(cfg.seed, samples, SAMPLE_BOX.0, SAMPLE_BOX.1);
    let roots = indicial_roots(&p);
    let mut rows = Vec::new();
    let mut all_pass = true;
    let mut worst = 0.0f64;
    for j in parse_solution_selection(selection)? {
        let spec = solution_spec(j, &p)?;
        let solution;
        let provider: &dyn PartialProvider = match probe {
            Some(v) => &ConstantFunction(v),
            None => {
                solution = SolutionFunction::new(j, &p, cfg.policy)?;
                &solution
            }
        };
        let mut max_res = [0.0f64; 4];
        for pt in &points {
            let r = pde_residuals(provider, &p, *pt)?;
            for (m, v) in max_res.iter_mut().zip(r) {
                if !v.is_finite() {
                    return Err(Error::Domain(format!("non-finite residual for solution {j} at {pt:?}")));
                }
                *m = m.max(v.abs());
            }
        }
        let row_worst = max_res.iter().copied().fold(0.0, f64::max);
        worst = worst.max(row_worst);
        let passed = row_worst <= threshold;
        all_pass &= passed;
        let degenerate = (0..4).any(|i| SOLUTION_PATTERNS[j - 1][i] && roots[i].degenerate);
        rows.push(json!({
            "solution": j,
            "exponents": spec.exponents.to_array(),
            "shifted_params": spec.shifted.to_array(),
            "max_abs_residual": max_res,
            "degenerate": degenerate,
            "passed": passed,
        }));
    }
    let mut warnings = genericity_warnings(&p);
    if probe.is_some() {
        warnings.push("probe mode: solutions replaced by a constant function".into());
    }
    Ok(Outcome {
        results: json!({
            "threshold": threshold,
            "policy": to_value(&cfg.policy),
            "points": points.iter().map(|q| q.coords()).collect::<Vec<_>>(),
            "solutions": rows,
            "worst": worst,
            "passed": all_pass,
        }),
        warnings,
        code: if all_pass { EXIT_PASS } else { EXIT_FAIL },
    })
}

fn cmd_independence(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.k2_params()?;
    let points = sample_points(cfg.seed, SOLUTION_COUNT, SAMPLE_BOX.0, SAMPLE_BOX.1);
    let diag = independence_check(&p, &points, &cfg.policy)?;
    let mut warnings = diag.warnings.clone();
    if !diag.full_rank {
        warnings.push(format!(
            "rank deficient: singular-value ratio {:e} is not above {:e}; some solutions coincide for these parameters",
            diag.ratio, diag.rank_tol
        ));
    }
    Ok(Outcome {
        results: json!({
            "policy": to_value(&cfg.policy),
            "points": points.iter().map(|q| q.coords()).collect::<Vec<_>>(),
            "diagnostic": to_value(&diag),
        }),
        warnings,
        code: if diag.full_rank { EXIT_PASS } else { EXIT_FAIL },
    })
}

fn cmd_opcheck(common: &CommonArgs, form: &str, order: u32, lemma_params: &str) -> Result<Outcome> {
    let forms: Vec<&str> = match form.trim() {
        "all" => vec!["lemma1-3.4", "lemma1-3.5", "thm-3.7", "thm-3.8"],
        f => vec![f],
    };
    let params = parse_rational_list::<7>(&common.params, "--params")?;
    let [alpha, beta, gamma] = parse_rational_list::<3>(lemma_params, "--lemma-params")?;
    let mut checks = Vec::new();
    let mut all = true;
    for f in forms {
        let v = match f {
            "lemma1-3.4" | "lemma1-3.5" => {
                let lf = if f == "lemma1-3.4" { GaussForm::ViaU } else { GaussForm::ViaX };
                let r = verify_gauss_form(lf, &alpha, &beta, &gamma, order)?;
                all &= r.matched;
                to_value(&r)
            }
            "thm-3.7" | "thm-3.8" => {
                let tf = if f == "thm-3.7" { K2Form::TwoFactor } else { K2Form::OneFactor };
                let r = verify_k2_image(&params, order, tf)?;
                all &= r.matched;
                to_value(&r)
            }
            other => return Err(Error::InvalidInput(format!("unknown form {other:?}"))),
        };
        checks.push(v);
    }
    Ok(Outcome {
        results: json!({
            "order": order,
            "params": params.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            "lemma_params": [alpha.to_string(), beta.to_string(), gamma.to_string()],
            "checks": checks,
            "matched": all,
        }),
        warnings: Vec::new(),
        code: if all { EXIT_PASS } else { EXIT_FAIL },
    })
}

struct IdentityBounds {
    n: u32,
    m: u32,
    outer_bound: u32,
    total_bound: u32,
}

fn cmd_identity(cfg: &RunConfig, which: &str, bounds: &IdentityBounds) -> Result<Outcome> {
    let ids = match which.trim() {
        "all" => vec![
            IdentityId::FiniteSumB,
            IdentityId::FiniteSumA,
            IdentityId::Decomposition,
            IdentityId::Duplication,
        ],
        s => vec![IdentityId::parse(s)?],
    };
    let [a, b, c, e1, e2, e3, e4] = cfg.params;
    let e = [e1, e2, e3, e4];
    let pt = cfg.point4()?;
    let pol = &cfg.policy;
    let mut tols = IdentityTolerances::default();
    if let Some(t) = cfg.tol {
        tols.truncated = t;
    }
    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    let (mut any_fail, mut any_inconclusive) = (false, false);
    for id in ids {
        let run = match id {
            IdentityId::FiniteSumB => verify_finite_sum_b(bounds.n, b, c, e, pt, pol, &tols),
            IdentityId::FiniteSumA => verify_finite_sum_a(bounds.n, bounds.m, a, e, pt, pol, &tols),
            IdentityId::Decomposition => verify_decomposition(a, b, e, pt, pol, bounds.outer_bound, &tols),
            IdentityId::Duplication => verify_duplication(a, b, c, e, pt, pol, bounds.total_bound, &tols),
        };
        match run {
            Ok(reports) => {
                let matched: Vec<&str> = reports.iter().filter(|r| r.is_match()).map(|r| r.variant.as_str()).collect();
                if matched.is_empty() {
                    any_fail = true;
                }
                entries.push(json!({
                    "id": id.label(),
                    "matching_variants": matched,
                    "reports": to_value(&reports),
                }));
            }
            Err(Error::Inconclusive(msg)) => {
                any_inconclusive = true;
                warnings.push(msg.clone());
                entries.push(json!({ "id": id.label(), "inconclusive": msg }));
            }
            Err(err) => return Err(err),
        }
    }
    let code = if any_fail {
        EXIT_FAIL
    } else if any_inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_PASS
    };
    Ok(Outcome {
        results: json!({
            "bounds": { "n": bounds.n, "m": bounds.m, "outer_bound": bounds.outer_bound, "total_bound": bounds.total_bound },
            "tolerances": to_value(&tols),
            "identities": entries,
        }),
        warnings,
        code,
    })
}

fn dispatch(cli: &Cli) -> (String, CommonArgs, Value, Result<Outcome>) {
    let (verb, common, default_degree) = match &cli.command {
        Command::Eval { common, .. } => ("eval", common, 30),
        Command::PdeCheck { common, .. } => ("pde-check", common, 24),
        Command::Independence { common } => ("independence", common, 24),
        Command::Opcheck { common, .. } => ("opcheck", common, 0),
        Command::Identity { common, .. } => ("identity", common, 16),
    };
    let cfg = build_config(verb, common, default_degree);
    let mut inputs = match &cfg {
        Ok(c) => to_value(c),
        Err(_) => json!({ "command": verb, "params_text": common.params, "point_text": common.point }),
    };
    let outcome = cfg.and_then(|cfg| match &cli.command {
        Command::Eval { function, orders, .. } => {
            inputs["function"] = to_value(function);
            cmd_eval(&cfg, *function, orders.as_deref())
        }
        Command::PdeCheck { solution, samples, probe_constant, .. } => {
            inputs["solution"] = json!(solution);
            inputs["samples"] = json!(samples);
            inputs["probe_constant"] = json!(probe_constant);
            cmd_pde_check(&cfg, solution, *samples, *probe_constant)
        }
        Command::Independence { .. } => cmd_independence(&cfg),
        Command::Opcheck { form, order, lemma_params, .. } => {
            inputs["form"] = json!(form);
            inputs["order"] = json!(order);
            inputs["lemma_params"] = json!(lemma_params);
            cmd_opcheck(common, form, *order, lemma_params)
        }
        Command::Identity { id, n, m, outer_bound, total_bound, .. } => {
            inputs["id"] = json!(id);
            let bounds = IdentityBounds { n: *n, m: *m, outer_bound: *outer_bound, total_bound: *total_bound };
            cmd_identity(&cfg, id, &bounds)
        }
    });
    (verb.to_string(), common.clone(), inputs, outcome)
}

/// Run the CLI on an argument vector (first element is the program name).
pub fn run<I, T>(args: I) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                RunOutput { stdout: String::new(), stderr: text, code: EXIT_INPUT }
            } else {
                RunOutput { stdout: text, stderr: String::new(), code: EXIT_PASS }
            };
        }
    };
    let start = Instant::now();
    let (command, common, inputs, outcome) = dispatch(&cli);
    let envelope = match outcome {
        Ok(o) => ResultEnvelope {
            command,
            inputs,
            results: o.results,
            warnings: o.warnings,
            status: status_label(o.code).into(),
            exit_code: o.code,
            error: None,
            wall_time_ms: None,
        },
        Err(err) => {
            let code = exit_code_for(&err);
            ResultEnvelope {
                command,
                inputs,
                results: Value::Null,
                warnings: Vec::new(),
                status: status_label(code).into(),
                exit_code: code,
                error: Some(ErrorInfo { kind: error_kind(&err).into(), message: err.to_string() }),
                wall_time_ms: None,
            }
        }
    };
    let envelope = ResultEnvelope {
        wall_time_ms: common.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        ..envelope
    };
    let stdout = match common.format {
        OutputFormat::Json => serde_json::to_string_pretty(&envelope).expect("envelope serializes") + "\n",
        OutputFormat::Table => render_table(&envelope),
    };
    RunOutput { stdout, stderr: String::new(), code: envelope.exit_code }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, out);
            }
        }
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            let joined: Vec<String> = items.iter().map(scalar_text).collect();
            out.push((prefix.to_string(), format!("[{}]", joined.join(", "))));
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), child, out);
            }
        }
        other => out.push((prefix.to_string(), scalar_text(other))),
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Human-readable two-column rendering of an envelope.
pub fn render_table(env: &ResultEnvelope) -> String {
    let mut rows = Vec::new();
    flatten("", &to_value(env), &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = String::new();
    for (k, v) in rows {
        let _ = writeln!(s, "{k:<width$}  {v}");
    }
    s
}
