use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use jacobi_spectra::diagnostics::{
    self, liminf_estimate, s_sequence, DiagnosticsTrace, LiminfEstimate,
};
use jacobi_spectra::io::format_f64;
use jacobi_spectra::recurrence::{eigvec_values, propagate, write_trace_csv};
use jacobi_spectra::sequences::catalog::from_text;
use jacobi_spectra::spectra::{
    density_report_for, eigenvalues, gauss_measure_with, truncate, DensityReport,
};
use jacobi_spectra::transforms::{self, bd_route, bd_table, write_bd_csv};
use jacobi_spectra::{BirthDeathRates, CheckConfig, EigvecInit, SequencePair, WeightChoice};

use crate::args::{
    AnalyzeArgs, CheckArgs, Cli, Command, Format, SpectrumArgs, Theorem, TransformArgs,
    TransformKind,
};
use crate::output::Output;
use crate::UsageError;

/// Everything that determines a run's output; written to `run_config.json`.
#[derive(Debug, Default, Serialize)]
struct RunConfig {
    tool: &'static str,
    version: &'static str,
    library_version: &'static str,
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seq: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rates: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    lambdas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    init: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theorem: Option<Theorem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    check_config: Option<CheckConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    window: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    transform: Option<TransformKind>,
    format: Option<Format>,
}

impl RunConfig {
    fn new(command: &'static str, format: Format) -> Self {
        RunConfig {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            library_version: jacobi_spectra::VERSION,
            command,
            format: Some(format),
            ..Default::default()
        }
    }
}

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    let out = Output::new(cli.out.clone(), cli.format)?;
    match &cli.command {
        Command::Analyze(a) => analyze(a, &out),
        Command::Check(c) => check(c, &out),
        Command::Spectrum(s) => spectrum(s, &out),
        Command::Transform(t) => transform(t, &out),
    }
}

fn write_config(out: &Output, cfg: &RunConfig) -> anyhow::Result<()> {
    out.emit_json("run_config.json", false, cfg)
}

fn parse_init(text: &str) -> anyhow::Result<Option<EigvecInit>> {
    if text == "p" {
        return Ok(None);
    }
    let parts: Vec<&str> = text.split(',').collect();
    let values: Option<Vec<f64>> = parts.iter().map(|p| p.trim().parse().ok()).collect();
    match values.as_deref() {
        Some([u0, u1]) => Ok(Some(EigvecInit::new(*u0, *u1)?)),
        _ => Err(UsageError(format!("--init expects `p` or `u0,u1`, got `{text}`")).into()),
    }
}

fn load_rates(text: &str) -> anyhow::Result<BirthDeathRates> {
    if text.ends_with(".csv") || Path::new(text).is_file() {
        Ok(BirthDeathRates::from_csv(text)?)
    } else {
        Ok(BirthDeathRates::parse(text)?)
    }
}

fn require<'a>(value: &'a Option<String>, flag: &str, what: &str) -> anyhow::Result<&'a str> {
    value
        .as_deref()
        .ok_or_else(|| UsageError(format!("{what} needs --{flag}")).into())
}

#[derive(Serialize)]
struct AnalyzeSummary {
    index: usize,
    lambda: f64,
    weight: String,
    exclusions: usize,
    /// Over the second half of the trace.
    liminf: LiminfEstimate,
}

fn analyze(args: &AnalyzeArgs, out: &Output) -> anyhow::Result<()> {
    let seq = from_text(&args.seq)?;
    let alpha = WeightChoice::parse(&args.alpha)?.resolve(&seq)?;
    let init = parse_init(&args.init)?;
    let n = args.n as usize;
    if !out.to_dir() && args.lambdas.len() > 1 {
        return Err(UsageError("several --lambda values need --out".into()).into());
    }
    let mut cfg = RunConfig::new("analyze", out.format);
    cfg.seq = Some(args.seq.clone());
    cfg.lambdas = args.lambdas.clone();
    cfg.n = Some(args.n);
    cfg.alpha = Some(args.alpha.clone());
    cfg.init = Some(args.init.clone());
    write_config(out, &cfg)?;

    let results: Vec<(DiagnosticsTrace, Vec<jacobi_spectra::SignedLog>)> = args
        .lambdas
        .par_iter()
        .map(|&lambda| -> anyhow::Result<_> {
            let start = match init {
                Some(i) => i,
                None => EigvecInit::polynomial(&seq, lambda)?,
            };
            let trace = s_sequence(&seq, &alpha, lambda, start, n)?;
            let values = if out.to_dir() {
                eigvec_values(&propagate(&seq, lambda, start, n)?)
            } else {
                Vec::new()
            };
            Ok((trace, values))
        })
        .collect::<anyhow::Result<_>>()?;

    let mut summaries = Vec::new();
    for (i, (trace, values)) in results.iter().enumerate() {
        match out.format {
            Format::Csv => out.emit(&format!("diagnostics_{i}.csv"), true, |w| {
                Ok(trace.write_csv(w)?)
            })?,
            Format::Json => out.emit_json(&format!("diagnostics_{i}.json"), true, trace)?,
        }
        if out.to_dir() {
            let len = (n + 1).min(values.len());
            out.emit(&format!("eigvec_{i}.csv"), false, |w| {
                Ok(write_trace_csv(w, &values[..len])?)
            })?;
            summaries.push(AnalyzeSummary {
                index: i,
                lambda: trace.lambda,
                weight: trace.weight.clone(),
                exclusions: trace.exclusions,
                liminf: liminf_estimate(trace, (n / 2).max(1)..n + 1)?,
            });
        }
    }
    out.emit_json("summary.json", false, &summaries)
}

fn check(args: &CheckArgs, out: &Output) -> anyhow::Result<()> {
    let check_cfg: CheckConfig = match &args.config {
        Some(path) => serde_json::from_reader(std::fs::File::open(path)?)
            .map_err(|e| UsageError(format!("invalid --config {}: {e}", path.display())))?,
        None => CheckConfig::default(),
    };
    let n = args.n as usize;
    let mut cfg = RunConfig::new("check", out.format);
    cfg.theorem = Some(args.theorem);
    cfg.n = Some(args.n);
    cfg.check_config = Some(check_cfg.clone());

    let seq_for = |cfg: &mut RunConfig| -> anyhow::Result<SequencePair> {
        let text = require(&args.seq, "seq", "this theorem")?;
        cfg.seq = Some(text.to_string());
        Ok(from_text(text)?)
    };
    match args.theorem {
        Theorem::A => {
            let seq = seq_for(&mut cfg)?;
            let alpha = WeightChoice::parse(&args.alpha)?.resolve(&seq)?;
            cfg.alpha = Some(args.alpha.clone());
            write_config(out, &cfg)?;
            out.emit_json(
                "check.json",
                true,
                &diagnostics::check_theorem_a(&seq, &alpha, n, &check_cfg)?,
            )
        }
        Theorem::B => {
            let seq = seq_for(&mut cfg)?;
            write_config(out, &cfg)?;
            out.emit_json(
                "check.json",
                true,
                &diagnostics::check_corollary_b(&seq, n, &check_cfg)?,
            )
        }
        Theorem::C => {
            let seq = seq_for(&mut cfg)?;
            write_config(out, &cfg)?;
            out.emit_json(
                "check.json",
                true,
                &diagnostics::check_corollary_c(&seq, n, &check_cfg)?,
            )
        }
        Theorem::T42 => {
            let seq = seq_for(&mut cfg)?;
            write_config(out, &cfg)?;
            out.emit_json(
                "check.json",
                true,
                &diagnostics::check_theorem_42(&seq, n, &check_cfg)?,
            )
        }
        Theorem::T43 => {
            let seq = seq_for(&mut cfg)?;
            cfg.k = Some(args.k);
            write_config(out, &cfg)?;
            out.emit_json(
                "check.json",
                true,
                &diagnostics::check_theorem_43(&seq, args.k, n, &check_cfg)?,
            )
        }
        Theorem::T51 => {
            let text = require(&args.rates, "rates", "theorem 51")?;
            let rates = load_rates(text)?;
            cfg.rates = Some(text.to_string());
            write_config(out, &cfg)?;
            out.emit_json(
                "check.json",
                true,
                &transforms::bd_check_theorem_51(&rates, n, &check_cfg)?,
            )
        }
    }
}

#[derive(Serialize)]
struct SpectrumJson<'a> {
    n: usize,
    tolerance: f64,
    gershgorin: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none")]
    eigenvalues: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    density: Option<&'a DensityReport>,
}

fn spectrum(args: &SpectrumArgs, out: &Output) -> anyhow::Result<()> {
    let seq = from_text(&args.seq)?;
    let t = truncate(&seq, args.size as usize)?;
    let tol = args.tol.unwrap_or_else(|| {
        if args.weights {
            t.node_tolerance()
        } else {
            t.default_tolerance()
        }
    });
    let window = args.window;
    let mut cfg = RunConfig::new("spectrum", out.format);
    cfg.seq = Some(args.seq.clone());
    cfg.n = Some(args.size);
    cfg.tolerance = Some(tol);
    cfg.weights = Some(args.weights);
    cfg.window = window;
    cfg.bin = window.map(|_| args.bin);
    write_config(out, &cfg)?;

    let density = window
        .map(|w| density_report_for(&t, w, args.bin))
        .transpose()?;
    // on stdout a density request replaces the eigenvalue table
    let need_spectrum = out.to_dir() || density.is_none();
    let spec = if !need_spectrum {
        None
    } else if args.weights {
        Some(gauss_measure_with(&t, tol)?)
    } else {
        Some(eigenvalues(&t, tol)?)
    };

    match out.format {
        Format::Csv => {
            if let Some(s) = &spec {
                out.emit("spectrum.csv", density.is_none(), |w| Ok(s.write_csv(w)?))?;
            }
            if let Some(d) = &density {
                out.emit("density.csv", true, |w| Ok(d.write_csv(w)?))?;
            }
        }
        Format::Json => {
            let json = SpectrumJson {
                n: t.order(),
                tolerance: tol,
                gershgorin: t.gershgorin(),
                eigenvalues: spec.as_ref().map(|s| s.eigenvalues.as_slice()),
                weights: spec.as_ref().and_then(|s| s.weights.as_deref()),
                density: density.as_ref(),
            };
            out.emit_json("spectrum.json", true, &json)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CoefficientRow {
    n: usize,
    a: f64,
    b: f64,
}

fn coefficient_rows(seq: &SequencePair, len: usize) -> anyhow::Result<Vec<CoefficientRow>> {
    (0..len)
        .map(|n| {
            Ok(CoefficientRow {
                n,
                a: seq.a(n)?,
                b: seq.b(n)?,
            })
        })
        .collect()
}

fn write_coefficients(
    w: &mut dyn Write,
    header: [&str; 3],
    rows: &[CoefficientRow],
) -> anyhow::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        writeln!(w, "{},{},{}", r.n, format_f64(r.a), format_f64(r.b))?;
    }
    Ok(())
}

fn transform(args: &TransformArgs, out: &Output) -> anyhow::Result<()> {
    let len = args.n as usize;
    let mut cfg = RunConfig::new("transform", out.format);
    cfg.transform = Some(args.kind);
    cfg.n = Some(args.n);

    if args.kind == TransformKind::Bd {
        let text = require(&args.rates, "rates", "transform bd")?;
        let rates = load_rates(text)?;
        cfg.rates = Some(text.to_string());
        write_config(out, &cfg)?;
        let rows = bd_table(&rates, len)?;
        let route = bd_route(&rates)?;
        return match out.format {
            Format::Csv => {
                if !out.to_dir() {
                    eprintln!("note: {}", route.explanation);
                }
                out.emit("transform.csv", true, |w| Ok(write_bd_csv(w, &rows)?))
            }
            Format::Json => {
                #[derive(Serialize)]
                struct BdJson<'a> {
                    route: transforms::Parity,
                    explanation: &'a str,
                    rows: &'a [transforms::BdRow],
                }
                let json = BdJson {
                    route: route.parity,
                    explanation: route.explanation,
                    rows: &rows,
                };
                out.emit_json("transform.json", true, &json)
            }
        };
    }

    let text = require(&args.seq, "seq", "this transform")?;
    let seq = from_text(text)?;
    cfg.seq = Some(text.to_string());
    write_config(out, &cfg)?;
    let (derived, header) = match args.kind {
        TransformKind::Flip => (transforms::flip(&seq), ["n", "a", "b"]),
        TransformKind::Even => (transforms::square_even(&seq)?, ["n", "a_e", "b_e"]),
        TransformKind::Odd => (transforms::square_odd(&seq)?, ["n", "a_o", "b_o"]),
        TransformKind::Bd => unreachable!("handled above"),
    };
    let rows = coefficient_rows(&derived, len)?;
    match out.format {
        Format::Csv => out.emit("transform.csv", true, |w| {
            write_coefficients(w, header, &rows)
        }),
        Format::Json => out.emit_json("transform.json", true, &rows),
    }
}
