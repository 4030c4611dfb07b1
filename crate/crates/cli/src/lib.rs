//! The `loewy` command line: single-family reports, parameter scans, oracle
//! verification, series fits and layer exports.
//!
//! [`run`] takes the argument vector and returns the exit code and both
//! output streams, so the binary is a thin wrapper and tests can call it
//! directly.

use std::ops::RangeInclusive;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use thiserror::Error;

use loewy::families::{split_spec, DEFAULT_BASIS_BUDGET};
use loewy::oracle::{
    compare_oracle_closed_form, derivations, duality_report, multiplicativity_failure,
    radical_filtration, vanishing_inclusion,
};
use loewy::profiles::{default_window, df_and_norm, fit_series, length_slope, ProfileError};
use loewy::rees::first_stabilizing_r;
use loewy::{ClosedForm, Divisor, FamilyError, FamilySpec, GradedProfile, OracleError, Rational};

pub const SCHEMA: u64 = 1;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_AMPLE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;
pub const EXIT_NOT_POLYNOMIAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "loewy",
    version,
    about = "Exact Loewy filtration invariants of polarised varieties"
)]
pub struct Cli {
    /// Largest explicit section basis any command may build.
    #[arg(long, global = true, default_value_t = DEFAULT_BASIS_BUDGET)]
    pub budget: u128,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DivisorArg {
    /// The family's configured divisor.
    Default,
    /// The declared fixed divisor of the family.
    Fixed,
    /// Proper transform of the line through the blown-up points.
    Line,
    /// The line plus all exceptional curves.
    LineTotal,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Donaldson-Futaki invariant and norm of one family.
    Df {
        /// Family spec, e.g. `hirzebruch:n=2,a=3,b=1`.
        spec: String,
        /// Also compare against the published closed forms.
        #[arg(long)]
        check_closed_form: bool,
        /// Fit window `lo..hi` (default `1..n+6`).
        #[arg(long)]
        window: Option<String>,
        /// Move every layer up by this many places before fitting.
        #[arg(long, default_value_t = 0)]
        weight_offset: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Invariants over a parameter grid such as `delpezzo8:a=2..6,b=1..5`.
    Scan {
        grid: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Worker threads; output order never depends on it.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Compare the closed forms with the brute-force oracle.
    OracleVerify {
        spec: String,
        #[arg(long, default_value_t = 3)]
        kmax: u64,
        /// Also compare vanishing-order subspaces with the Loewy filtration.
        #[arg(long)]
        vanishing: bool,
        #[arg(long, value_enum, default_value_t = DivisorArg::Default)]
        divisor: DivisorArg,
        /// Also search for the first stabilizing truncation degree.
        #[arg(long)]
        rees: bool,
        #[arg(long, default_value_t = 6)]
        rmax: u64,
    },
    /// Fitted Hilbert, weight and trace-squared polynomials.
    Fit {
        spec: String,
        #[arg(long)]
        window: Option<String>,
        #[arg(long, default_value_t = 0)]
        weight_offset: u64,
        /// Fit layers computed by the oracle instead of the closed form.
        #[arg(long)]
        oracle: bool,
    },
    /// The closed-form layer table `(k, i, dim)`.
    Export {
        spec: String,
        #[arg(long, default_value_t = 4)]
        kmax: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Family(FamilyError::NotAmple(_)) => EXIT_NOT_AMPLE,
            CliError::Oracle(OracleError::Family(FamilyError::NotAmple(_))) => EXIT_NOT_AMPLE,
            CliError::Profile(ProfileError::NotCertified) => EXIT_NOT_POLYNOMIAL,
            _ => EXIT_USAGE,
        }
    }
}

pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match execute(&cli) {
        Ok(outcome) => outcome,
        Err(e) => Outcome {
            code: e.code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Df {
            spec,
            check_closed_form,
            window,
            weight_offset,
            format,
        } => cmd_df(
            &parse_spec(spec)?,
            *check_closed_form,
            window.as_deref(),
            *weight_offset,
            *format,
        ),
        Command::Scan { grid, format, jobs } => cmd_scan(grid, *format, *jobs),
        Command::OracleVerify {
            spec,
            kmax,
            vanishing,
            divisor,
            rees,
            rmax,
        } => {
            let options = VerifyOptions {
                kmax: *kmax,
                vanishing: *vanishing,
                divisor: *divisor,
                rees: *rees,
                rmax: *rmax,
                budget: cli.budget,
            };
            cmd_oracle_verify(&parse_spec(spec)?, &options)
        }
        Command::Fit {
            spec,
            window,
            weight_offset,
            oracle,
        } => {
            let budget = oracle.then_some(cli.budget);
            cmd_fit(
                &parse_spec(spec)?,
                window.as_deref(),
                *weight_offset,
                budget,
            )
        }
        Command::Export { spec, kmax, format } => cmd_export(&parse_spec(spec)?, *kmax, *format),
    }
}

fn parse_spec(text: &str) -> Result<FamilySpec, CliError> {
    text.parse()
        .map_err(|e: FamilyError| CliError::Usage(e.to_string()))
}

fn parse_range(text: &str) -> Result<RangeInclusive<u64>, CliError> {
    let bad = || {
        CliError::Usage(format!(
            "expected `lo..hi` or a single integer, got `{text}`"
        ))
    };
    match text.split_once("..") {
        Some((lo, hi)) => {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            Ok(lo.trim().parse().map_err(|_| bad())?..=hi.trim().parse().map_err(|_| bad())?)
        }
        None => {
            let v = text.trim().parse().map_err(|_| bad())?;
            Ok(v..=v)
        }
    }
}

fn ok(stdout: String) -> Outcome {
    Outcome {
        code: 0,
        stdout,
        stderr: String::new(),
    }
}

fn pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

fn q(x: &Rational) -> Value {
    Value::String(x.to_string())
}

fn params_json(spec: &FamilySpec) -> Value {
    Value::Object(
        spec.params()
            .into_iter()
            .map(|(k, v)| (k.to_string(), json!(v)))
            .collect(),
    )
}

fn family_profile(spec: &FamilySpec, weight_offset: u64) -> Result<GradedProfile, CliError> {
    let profile = spec.profile()?;
    Ok(if weight_offset > 0 {
        profile.shift_weights(weight_offset)
    } else {
        profile
    })
}

fn fit_window(spec: &FamilySpec, window: Option<&str>) -> Result<RangeInclusive<u64>, CliError> {
    match window {
        Some(text) => parse_range(text),
        None => Ok(default_window(spec.dimension())),
    }
}

fn cmd_df(
    spec: &FamilySpec,
    check: bool,
    window: Option<&str>,
    weight_offset: u64,
    format: Format,
) -> Result<Outcome, CliError> {
    if !spec.validate_ample() {
        return Err(FamilyError::NotAmple(spec.to_string()).into());
    }
    let window = fit_window(spec, window)?;
    let profile = family_profile(spec, weight_offset)?;
    let fit = fit_series::<Rational>(&profile, window.clone())?;
    let slope = length_slope::<Rational>(&profile, window)?;
    let report = df_and_norm(&fit, slope)?;

    let mut code = 0;
    let mut out = Map::new();
    out.insert("schema".into(), json!(SCHEMA));
    out.insert("family".into(), json!(spec.kind.name()));
    out.insert("params".into(), params_json(spec));
    for (key, value) in [
        ("a0", &report.a0),
        ("a1", &report.a1),
        ("b0", &report.b0),
        ("b1", &report.b1),
        ("d0", &report.d0),
        ("df_num", &report.df_num),
        ("df", &report.df),
        ("norm", &report.norm),
        ("length_slope", &report.length_slope),
    ] {
        out.insert(key.into(), q(value));
    }
    out.insert("certified".into(), json!(report.certified));

    if check {
        match spec.closed_form_reference() {
            Ok(reference) => {
                let (value, all_match) = closed_form_json(&reference, &report);
                if !all_match {
                    code = EXIT_MISMATCH;
                }
                out.insert("closed_form".into(), value);
            }
            Err(FamilyError::NoClosedForm(_)) => {
                out.insert("closed_form".into(), Value::Null);
            }
            Err(e) => return Err(e.into()),
        }
    }

    let stdout = match format {
        Format::Json => pretty(&Value::Object(out)),
        Format::Csv => {
            let row = scan_row(spec);
            format!("{}\n{}\n", CSV_HEADER, row.join(","))
        }
    };
    let stderr = if code == EXIT_MISMATCH {
        "closed-form mismatch\n".to_string()
    } else {
        String::new()
    };
    Ok(Outcome {
        code,
        stdout,
        stderr,
    })
}

fn closed_form_json(reference: &ClosedForm, report: &loewy::RatDfReport) -> (Value, bool) {
    let mut all_match = true;
    let mut fields = Map::new();
    for (key, expected, computed) in [
        ("a0", &reference.a0, &report.a0),
        ("a1", &reference.a1, &report.a1),
        ("b0", &reference.b0, &report.b0),
        ("b1", &reference.b1, &report.b1),
        ("df_num", &reference.df_num, &report.df_num),
        ("norm", &reference.norm, &report.norm),
    ] {
        if let Some(expected) = expected {
            let matches = expected == computed;
            all_match &= matches;
            fields.insert(
                key.into(),
                json!({ "expected": q(expected), "computed": q(computed), "match": matches }),
            );
        }
    }
    if let Some(unverified) = &reference.norm_unverified {
        fields.insert("norm_unverified".into(), q(unverified));
    }
    fields.insert("match".into(), json!(all_match));
    (Value::Object(fields), all_match)
}

pub const CSV_HEADER: &str = "family,a,b,n,r,s,ample,df_num,df,norm,length_slope";

/// One CSV row; invariants are empty where they are undefined.
fn scan_row(spec: &FamilySpec) -> Vec<String> {
    let used = spec.kind.parameter_names();
    let param = |key: &str, value: u32| {
        if used.contains(&key) {
            value.to_string()
        } else {
            String::new()
        }
    };
    let mut row = vec![
        spec.kind.name().to_string(),
        param("a", spec.a),
        param("b", spec.b),
        param("n", spec.n),
        param("r", spec.r),
        param("s", spec.s),
        spec.validate_ample().to_string(),
    ];
    let mut invariants = vec![String::new(); 4];
    if let Ok(profile) = spec.profile() {
        let window = default_window(spec.dimension());
        if let Ok(fit) = fit_series::<Rational>(&profile, window.clone()) {
            if fit.polynomial_certified {
                invariants[0] = fit.df_num().to_string();
            }
            let slope = length_slope::<Rational>(&profile, window);
            if let (true, Ok(slope)) = (spec.validate_ample(), slope) {
                if let Ok(report) = df_and_norm(&fit, slope) {
                    invariants[1] = report.df.to_string();
                    invariants[2] = report.norm.to_string();
                    invariants[3] = report.length_slope.to_string();
                }
            }
        }
    }
    row.extend(invariants);
    row
}

/// Expands `kind:key=lo..hi,...` into specs in lexicographic parameter order.
fn expand_grid(text: &str) -> Result<Vec<FamilySpec>, CliError> {
    let (kind, pairs) = split_spec(text).map_err(|e| CliError::Usage(e.to_string()))?;
    let names = kind.parameter_names();
    let mut ranges = Vec::new();
    for &name in names {
        let value = pairs
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| {
                CliError::Usage(format!("grid for {} is missing `{name}`", kind.name()))
            })?;
        ranges.push(parse_range(value)?);
    }
    if let Some((key, _)) = pairs.iter().find(|(k, _)| !names.contains(&k.as_str())) {
        return Err(CliError::Usage(format!(
            "unknown parameter `{key}` for {}",
            kind.name()
        )));
    }
    let mut points: Vec<Vec<u64>> = vec![Vec::new()];
    for range in &ranges {
        points = points
            .into_iter()
            .flat_map(|prefix| {
                range.clone().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    points
        .into_iter()
        .map(|values| {
            let params: Vec<(&str, u32)> = names
                .iter()
                .zip(&values)
                .map(|(k, v)| u32::try_from(*v).map(|v| (*k, v)))
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Usage("parameter out of range".into()))?;
            FamilySpec::from_params(kind, &params).map_err(CliError::Usage)
        })
        .collect()
}

fn cmd_scan(grid: &str, format: Format, jobs: usize) -> Result<Outcome, CliError> {
    let specs = expand_grid(grid)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let rows: Vec<Vec<String>> = pool.install(|| specs.par_iter().map(scan_row).collect());
    let stdout = match format {
        Format::Csv => {
            let mut text = format!("{CSV_HEADER}\n");
            for row in &rows {
                text.push_str(&row.join(","));
                text.push('\n');
            }
            text
        }
        Format::Json => {
            let columns: Vec<&str> = CSV_HEADER.split(',').collect();
            let records: Vec<Value> = rows
                .iter()
                .map(|row| {
                    Value::Object(
                        columns
                            .iter()
                            .zip(row)
                            .map(|(c, v)| {
                                let value = if v.is_empty() {
                                    Value::Null
                                } else if *c == "ample" {
                                    json!(v == "true")
                                } else {
                                    json!(v)
                                };
                                (c.to_string(), value)
                            })
                            .collect(),
                    )
                })
                .collect();
            pretty(&json!({ "schema": SCHEMA, "rows": records }))
        }
    };
    Ok(ok(stdout))
}

struct VerifyOptions {
    kmax: u64,
    vanishing: bool,
    divisor: DivisorArg,
    rees: bool,
    rmax: u64,
    budget: u128,
}

fn resolve_divisor(spec: &FamilySpec, arg: DivisorArg) -> Divisor {
    match arg {
        DivisorArg::Default => spec.default_divisor(),
        DivisorArg::Fixed => Divisor::Declared,
        DivisorArg::Line => Divisor::LineProper,
        DivisorArg::LineTotal => Divisor::LineTotal,
    }
}

fn divisor_name(divisor: Divisor) -> &'static str {
    match divisor {
        Divisor::Declared => "fixed",
        Divisor::LineProper => "line",
        Divisor::LineTotal => "line-total",
    }
}

fn cmd_oracle_verify(spec: &FamilySpec, options: &VerifyOptions) -> Result<Outcome, CliError> {
    if !spec.validate_ample() {
        return Err(FamilyError::NotAmple(spec.to_string()).into());
    }
    let ks = 1..=options.kmax.max(1);
    let mut pass = true;
    let mut mismatches = Vec::new();

    let comparisons = compare_oracle_closed_form(spec, ks.clone(), options.budget)?;
    let mut layer_rows = Vec::new();
    for c in &comparisons {
        if !c.matches() {
            pass = false;
            mismatches.push(json!({
                "family": spec.kind.name(),
                "params": params_json(spec),
                "k": c.k,
                "expected_layers": c.expected_layers,
                "oracle_layers": c.oracle_layers,
            }));
        }
        layer_rows.push(json!({
            "k": c.k,
            "layers": c.oracle_layers,
            "loewy_length": c.oracle_length,
            "match": c.matches(),
        }));
    }

    let h1 = spec.hilbert(1);
    let mut duality_rows = Vec::new();
    let mut length_rows = Vec::new();
    for k in ks.clone() {
        let (_, ops) = derivations(spec, k, options.budget)?;
        let report = duality_report(&ops)?;
        pass &= report.holds();
        duality_rows.push(json!({ "k": k, "holds": report.holds() }));
        let length = radical_filtration(&ops)?.length() as u128;
        let within = length <= h1 * k as u128;
        pass &= within;
        length_rows
            .push(json!({ "k": k, "length": length, "bound": h1 * k as u128, "holds": within }));
    }

    let mut product_rows = Vec::new();
    for k1 in ks.clone() {
        for k2 in k1..=options.kmax {
            if k1 + k2 > options.kmax.max(2) {
                continue;
            }
            let failure = multiplicativity_failure(spec, k1, k2, options.budget)?;
            pass &= failure.is_none();
            product_rows.push(json!({
                "k1": k1,
                "k2": k2,
                "holds": failure.is_none(),
                "first_failure": failure.map(|(i, j)| json!([i, j])),
            }));
        }
    }

    let mut out = Map::new();
    out.insert("schema".into(), json!(SCHEMA));
    out.insert("family".into(), json!(spec.kind.name()));
    out.insert("params".into(), params_json(spec));
    out.insert("layers".into(), json!(layer_rows));
    out.insert("duality".into(), json!(duality_rows));
    out.insert("length_bound".into(), json!(length_rows));
    out.insert("multiplicativity".into(), json!(product_rows));

    if options.vanishing {
        let divisor = resolve_divisor(spec, options.divisor);
        let mut rows = Vec::new();
        let mut strict = Vec::new();
        for k in ks.clone() {
            for row in vanishing_inclusion(spec, divisor, k, options.budget)? {
                pass &= row.contained;
                if row.strict() {
                    strict.push(json!({ "k": row.k, "i": row.i }));
                }
                rows.push(json!({
                    "k": row.k,
                    "i": row.i,
                    "vanishing_dim": row.vanishing_dim,
                    "loewy_dim": row.loewy_dim,
                    "contained": row.contained,
                    "strict": row.strict(),
                }));
            }
        }
        out.insert(
            "vanishing".into(),
            json!({
                "divisor": divisor_name(divisor),
                "equality": strict.is_empty(),
                "strict_at": strict,
                "rows": rows,
            }),
        );
    }

    let mut code = 0;
    if options.rees {
        let top = (spec.dimension() as u64 + 6).min(12);
        let stabilizing = first_stabilizing_r(spec, options.rmax, 1..=top, options.budget)?;
        out.insert(
            "rees".into(),
            json!({ "rmax": options.rmax, "window": [1, top], "first_stabilizing_r": stabilizing }),
        );
        if stabilizing.is_none() {
            code = EXIT_NOT_POLYNOMIAL;
        }
    }
    if !pass {
        code = EXIT_MISMATCH;
    }
    out.insert("mismatches".into(), json!(mismatches));
    out.insert("pass".into(), json!(pass && code == 0));

    let stderr = match code {
        EXIT_MISMATCH => "oracle verification failed\n".to_string(),
        EXIT_NOT_POLYNOMIAL => "no truncation stabilized within rmax\n".to_string(),
        _ => String::new(),
    };
    Ok(Outcome {
        code,
        stdout: pretty(&Value::Object(out)),
        stderr,
    })
}

/// With `oracle_budget`, the layers on the window come from the radical
/// filtration of the section space rather than the closed form.
fn cmd_fit(
    spec: &FamilySpec,
    window: Option<&str>,
    weight_offset: u64,
    oracle_budget: Option<u128>,
) -> Result<Outcome, CliError> {
    let window = fit_window(spec, window)?;
    let profile = match oracle_budget {
        Some(budget) => {
            spec.profile()?;
            let mut table = std::collections::BTreeMap::new();
            for k in window.clone() {
                let (_, ops) = derivations(spec, k, budget)?;
                table.insert(
                    k,
                    radical_filtration(&ops)?
                        .layers()
                        .into_iter()
                        .map(|d| d as u128)
                        .collect(),
                );
            }
            let profile = GradedProfile::from_table(spec.dimension(), table);
            if weight_offset > 0 {
                profile.shift_weights(weight_offset)
            } else {
                profile
            }
        }
        None => family_profile(spec, weight_offset)?,
    };
    let fit = fit_series::<Rational>(&profile, window.clone())?;
    let out = json!({
        "schema": SCHEMA,
        "family": spec.kind.name(),
        "params": params_json(spec),
        "window": [window.start(), window.end()],
        "source": if oracle_budget.is_some() { "oracle" } else { "closed-form" },
        "h": fit.h.to_string(),
        "w": fit.w.to_string(),
        "d": fit.d.to_string(),
        "a0": q(&fit.a0),
        "a1": q(&fit.a1),
        "b0": q(&fit.b0),
        "b1": q(&fit.b1),
        "d0": q(&fit.d0),
        "degrees": [fit.h.degree(), fit.w.degree(), fit.d.degree()],
        "certified": fit.polynomial_certified,
        "first_inconsistency": fit.first_inconsistency.map(|(s, k)| json!({ "series": s.to_string(), "k": k })),
    });
    let code = if fit.polynomial_certified {
        0
    } else {
        EXIT_NOT_POLYNOMIAL
    };
    let stderr = if code == 0 {
        String::new()
    } else {
        "series not polynomial on the window\n".to_string()
    };
    Ok(Outcome {
        code,
        stdout: pretty(&out),
        stderr,
    })
}

fn cmd_export(spec: &FamilySpec, kmax: u64, format: Format) -> Result<Outcome, CliError> {
    let profile = spec.profile()?;
    let mut rows = Vec::new();
    for k in 1..=kmax {
        for (i, dim) in profile
            .layers(k)
            .unwrap_or_default()
            .into_iter()
            .enumerate()
        {
            rows.push((k, i, dim));
        }
    }
    let stdout = match format {
        Format::Csv => {
            let mut text = String::from("k,i,dim\n");
            for (k, i, dim) in rows {
                text.push_str(&format!("{k},{i},{dim}\n"));
            }
            text
        }
        Format::Json => {
            let table: Vec<Value> = rows
                .iter()
                .map(|(k, i, dim)| json!({ "k": k, "i": i, "dim": dim }))
                .collect();
            pretty(&json!({
                "schema": SCHEMA,
                "family": spec.kind.name(),
                "params": params_json(spec),
                "layers": table,
            }))
        }
    };
    Ok(ok(stdout))
}
