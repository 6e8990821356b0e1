//! Command-line frontend over the identity engine: derive exact identity
//! sets for digit patterns, verify them numerically, emit telescoped
//! infinite-product identities with exact constants, and run the bound
//! and witness checks.
//!
//! Exit codes are a stable contract: 0 on success, 1 when a numerical or
//! bound check fails, 2 on usage or validation errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use blockprod::{
    all_pass, check_block_bounds, check_s_growth, derive, emit_product, estimate_alpha, evaluate,
    evaluate_unchecked, pairing_witness, partial_product, partial_sums, run_selftest,
    sign_sum_growth, DigitString, Error, FunctionSpec, Growth, IdentitySet, PatternWord,
};

#[derive(Parser)]
#[command(
    name = "blockprod",
    version,
    about = "Exact identities and numerics for digit-pattern sign series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads for chunked evaluation; BLOCKPROD_THREADS is the
    /// fallback, otherwise rayon decides. Results are identical either way.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the payload to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Derive the exact identity set for a digit pattern.
    Derive(DeriveArgs),
    /// Evaluate the identity against a function and gate the residual.
    Verify(VerifyArgs),
    /// Emit the telescoped infinite product with its exact constant.
    ClosedForm(ClosedFormArgs),
    /// Check partial-sum growth, block-sum bounds, and the flip witness.
    Bounds(BoundsArgs),
    /// Run the randomized exact battery and the pinned regressions.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct WordArgs {
    /// Digit pattern, most significant digit first, e.g. 11 or 201.
    /// Digits ten and up are written comma-separated, e.g. 10,3.
    #[arg(long)]
    word: String,

    /// Radix the pattern digits and all indices are read in (>= 2).
    #[arg(long)]
    base: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Latex,
}

#[derive(Args)]
struct DeriveArgs {
    #[command(flatten)]
    word: WordArgs,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    word: WordArgs,

    /// Function the series is summed against: L (log2(n/(n+1))),
    /// power:p (n^-p), or table:path (JSON object of index -> integer).
    #[arg(long, default_value = "L")]
    function: String,

    /// Number of series terms.
    #[arg(long = "N", default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    n_max: u64,

    /// Residual tolerance; the effective gate is max(tol, 3 * error_estimate).
    #[arg(long, default_value_t = 5e-3)]
    tol: f64,

    /// Evaluate even when convergence is not guaranteed for this function.
    #[arg(long)]
    force: bool,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct ClosedFormArgs {
    #[command(flatten)]
    word: WordArgs,

    /// First product index, 0 or 1.
    #[arg(long, default_value_t = 1)]
    start: u8,

    /// Terms used for the numerical cross-check in text output.
    #[arg(long = "N", default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    n_max: u64,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    word: WordArgs,

    /// Partial-sum range to sweep.
    #[arg(long = "N", default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    n_max: u64,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct SelftestArgs {
    /// Seed for the randomized batteries; every run is reproducible.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(message) = configure_threads(cli.threads) {
        eprintln!("error: {message}");
        return ExitCode::from(2);
    }
    let out = cli.out.as_deref();
    let code = match cli.command {
        Command::Derive(args) => cmd_derive(&args, out),
        Command::Verify(args) => cmd_verify(&args, out),
        Command::ClosedForm(args) => cmd_closed_form(&args, out),
        Command::Bounds(args) => cmd_bounds(&args, out),
        Command::Selftest(args) => cmd_selftest(&args, out),
    };
    match code {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

/// Installs the global rayon pool when a thread count is requested via
/// flag or environment. Chunked evaluation merges in index order, so the
/// count changes speed, never results.
fn configure_threads(flag: Option<usize>) -> Result<(), String> {
    let requested = match flag {
        Some(n) => Some(n),
        None => match std::env::var("BLOCKPROD_THREADS") {
            Ok(raw) => Some(
                raw.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("BLOCKPROD_THREADS must be a thread count, got {raw:?}"))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = requested {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn emit(payload: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        None => println!("{payload}"),
        Some(path) => {
            fs::write(path, format!("{payload}\n"))
                .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn parse_word(args: &WordArgs) -> Result<PatternWord, String> {
    PatternWord::parse(&args.word, args.base).map_err(|e| e.to_string())
}

/// Parses `L`, `power:p`, or `table:path`; table files hold a JSON object
/// mapping decimal indices to integer values, e.g. `{"0": 1, "50": -3}`.
fn parse_function(spec: &str) -> Result<FunctionSpec, String> {
    if spec == "L" {
        return Ok(FunctionSpec::L);
    }
    if let Some(raw) = spec.strip_prefix("power:") {
        let p: f64 = raw
            .parse()
            .map_err(|_| format!("power exponent must be a number, got {raw:?}"))?;
        return FunctionSpec::power(p).map_err(|e| e.to_string());
    }
    if let Some(path) = spec.strip_prefix("table:") {
        let text =
            fs::read_to_string(path).map_err(|e| format!("cannot read table {path}: {e}"))?;
        let raw: BTreeMap<String, i64> = serde_json::from_str(&text)
            .map_err(|e| format!("table {path} is not an object of integers: {e}"))?;
        let mut table = BTreeMap::new();
        for (key, value) in raw {
            let index: u64 = key
                .parse()
                .map_err(|_| format!("table key {key:?} is not a nonnegative integer"))?;
            table.insert(index, value);
        }
        return Ok(FunctionSpec::Table(table));
    }
    Err(format!(
        "unknown function {spec:?}; expected L, power:p, or table:path"
    ))
}

/// Renders an identity set the way it reads on paper:
/// `-f(n)+f(2n)-f(2n+1)+2f(4n+1) = 0`.
fn identity_text(id: &IdentitySet) -> String {
    let base = id.word().base();
    let mut out = String::new();
    for (form, &coeff) in id.terms() {
        if coeff < 0 {
            out.push('-');
        } else if !out.is_empty() {
            out.push('+');
        }
        let magnitude = coeff.unsigned_abs();
        if magnitude != 1 {
            let _ = write!(out, "{magnitude}");
        }
        let _ = write!(out, "f({})", form.render(base));
    }
    match id.constant_f0() {
        0 => out.push_str(" = 0"),
        k => {
            let _ = write!(out, " = {k}f(0)");
        }
    }
    out
}

fn cmd_derive(args: &DeriveArgs, out: Option<&Path>) -> Result<u8, String> {
    let w = parse_word(&args.word)?;
    let id = derive(&w);
    let payload = match args.format {
        Format::Text => identity_text(&id),
        Format::Json => id.to_json(),
        Format::Latex => return Err("latex format is only available for closed-form".into()),
    };
    emit(&payload, out)?;
    Ok(0)
}

fn cmd_verify(args: &VerifyArgs, out: Option<&Path>) -> Result<u8, String> {
    let w = parse_word(&args.word)?;
    let f = parse_function(&args.function)?;
    let id = derive(&w);
    let result = if args.force {
        evaluate_unchecked(&id, &f, args.n_max)
    } else {
        evaluate(&id, &f, args.n_max)
    };
    let report = match result {
        Ok(report) => report,
        Err(e @ Error::NotAdmissible { .. }) => {
            return Err(format!("{e}; pass --force to evaluate anyway"))
        }
        Err(e) => return Err(e.to_string()),
    };

    let base = w.base();
    let target = id.constant_f0() as f64 * f.value(0);
    let residual = (report.value - target).abs();
    let gate = args.tol.max(3.0 * report.error_estimate);
    let pass = residual <= gate;

    let payload = match args.format {
        Format::Json => serde_json::to_string(&report).expect("report serializes"),
        Format::Text => {
            // Readers compare against the orientation with a positive
            // leading coefficient, so the n >= 1 partial is reported there.
            let orient = if id.identity_coeff() < 0 { -1.0 } else { 1.0 };
            let row0: f64 = id
                .terms()
                .iter()
                .map(|(form, &coeff)| coeff as f64 * f.value(form.apply(base, 0)))
                .sum();
            let partial = orient * (report.value - row0);
            let mut text = String::new();
            let _ = writeln!(text, "identity: {}", identity_text(&id));
            let _ = writeln!(text, "function: {}", args.function);
            let _ = writeln!(text, "N: {}", report.n);
            let _ = writeln!(text, "value: {:.9e}", report.value);
            let _ = writeln!(text, "error_estimate: {:.3e}", report.error_estimate);
            let _ = writeln!(text, "admissible: {}", report.admissible);
            let _ = writeln!(text, "partial for n >= 1, oriented: {partial:.9}");
            let _ = writeln!(
                text,
                "residual |value - ({})*f(0)|: {residual:.3e} (gate {gate:.3e})",
                id.constant_f0()
            );
            let _ = write!(text, "verdict: {}", if pass { "PASS" } else { "FAIL" });
            text
        }
        Format::Latex => return Err("latex format is only available for closed-form".into()),
    };
    emit(&payload, out)?;
    Ok(if pass { 0 } else { 1 })
}

fn cmd_closed_form(args: &ClosedFormArgs, out: Option<&Path>) -> Result<u8, String> {
    let w = parse_word(&args.word)?;
    let id = derive(&w);
    let product = emit_product(&id, args.start).map_err(|e| e.to_string())?;
    let payload = match args.format {
        Format::Latex => product.latex(),
        Format::Json => product.to_json(),
        Format::Text => {
            let partial = partial_product(&product, args.n_max).map_err(|e| e.to_string())?;
            let exact = product.rhs().value_f64();
            format!(
                "{}\npartial product at N={}: {:.9}\nexact value: {:.9}\n|diff|: {:.3e}",
                product.text(),
                args.n_max,
                partial,
                exact,
                (partial - exact).abs()
            )
        }
    };
    emit(&payload, out)?;
    Ok(0)
}

fn cmd_bounds(args: &BoundsArgs, out: Option<&Path>) -> Result<u8, String> {
    let w = parse_word(&args.word)?;
    let growth = sign_sum_growth(&w);
    let s_report = check_s_growth(&w, args.n_max);
    let max_abs_s = partial_sums(&w, args.n_max)
        .map(|s| s.unsigned_abs())
        .max()
        .expect("range is nonempty");
    let block_n = args.n_max.min(10_000);
    let block_report = check_block_bounds(&w, 3, block_n).map_err(|e| e.to_string())?;

    // The flip witness underpins the cancellation bounds; the all-zero
    // pattern has none because index 0 breaks every candidate pair.
    let witness = if w.is_zero_block() {
        None
    } else {
        let empty = DigitString::new(w.base(), Vec::new()).map_err(|e| e.to_string())?;
        Some(pairing_witness(&w, &empty).map_err(|e| e.to_string())?)
    };

    let alpha = match growth {
        Growth::Power(_) if args.n_max >= 1000 => {
            Some(estimate_alpha(&w, args.n_max).map_err(|e| e.to_string())?)
        }
        _ => None,
    };

    let pass = s_report.pass && block_report.pass;
    let payload = match args.format {
        Format::Json => {
            let value = serde_json::json!({
                "word": w.render(),
                "base": w.base(),
                "N": args.n_max,
                "growth": growth.describe(),
                "max_abs_s": max_abs_s,
                "s_growth": s_report,
                "block_bounds": block_report,
                "witness": witness.as_ref().map(|wit| wit.describe(&w)),
                "alpha_fit": alpha,
            });
            serde_json::to_string_pretty(&value).expect("report serializes")
        }
        Format::Text => {
            let mut text = String::new();
            let _ = writeln!(text, "word {} base {}", w.render(), w.base());
            let _ = writeln!(text, "growth class: {}", growth.describe());
            let _ = writeln!(text, "max |S(n)| for n <= {}: {}", args.n_max, max_abs_s);
            let _ = writeln!(
                text,
                "S-growth check: {} ({} violations over n <= {})",
                verdict(s_report.pass),
                s_report.total_violations,
                s_report.checked
            );
            for violation in &s_report.violations {
                let _ = writeln!(
                    text,
                    "  n={} |S|={} exceeds {:.3}",
                    violation.n, violation.observed, violation.bound
                );
            }
            let _ = writeln!(
                text,
                "block-sum check, levels 1..=3, n < {}: {} ({} violations)",
                block_n,
                verdict(block_report.pass),
                block_report.total_violations
            );
            match &witness {
                Some(wit) => {
                    let _ = writeln!(text, "flip witness: {}", wit.describe(&w));
                }
                None => {
                    let _ = writeln!(text, "flip witness: none (all-zero pattern)");
                }
            }
            if let Some(fit) = &alpha {
                let _ = writeln!(
                    text,
                    "alpha fit: {:.4} over {} points (ceiling {:.4}, residual {:.4})",
                    fit.fitted, fit.points, fit.theoretical, fit.residual
                );
            }
            let _ = write!(text, "verdict: {}", if pass { "PASS" } else { "FAIL" });
            text
        }
        Format::Latex => return Err("latex format is only available for closed-form".into()),
    };
    emit(&payload, out)?;
    Ok(if pass { 0 } else { 1 })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn cmd_selftest(args: &SelftestArgs, out: Option<&Path>) -> Result<u8, String> {
    let results = run_selftest(args.seed);
    let pass = all_pass(&results);
    let payload = match args.format {
        Format::Json => serde_json::to_string_pretty(&results).expect("results serialize"),
        Format::Text => {
            let mut text = String::new();
            let _ = writeln!(text, "seed: {}", args.seed);
            for result in &results {
                let _ = writeln!(
                    text,
                    "{}: {} - {}",
                    result.name,
                    verdict(result.pass),
                    result.detail
                );
            }
            let _ = write!(text, "verdict: {}", if pass { "PASS" } else { "FAIL" });
            text
        }
        Format::Latex => return Err("latex format is only available for closed-form".into()),
    };
    emit(&payload, out)?;
    Ok(if pass { 0 } else { 1 })
}
