//! Command-line front end: invert, verify, and analyze formal power
//! series maps read from a file or stdin.
//!
//! Exit codes are a stable contract for scripting:
//! 0 success, 1 parse error, 2 validation/usage error, 3 mathematical
//! check failure (a failed verification or a rejected candidate).

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fpsinv::error::Error;
use fpsinv::invert::{
    fixed_point_invert, invert_series, normalize_linear, validate_problem, verify_inverse,
};
use fpsinv::lang::{evaluate, parse_source};
use fpsinv::report::{parse_field_tag, AnalyzeOutcome, InvertOutcome, VerifyReport};
use fpsinv::symmetry::{extract_polynomial_inverse, q_decomposition_check};
use fpsinv::Result;

#[derive(Parser)]
#[command(
    name = "fpsinv",
    version,
    about = "Exact inversion of formal power series maps over Q or a prime field"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Invert a map F(X) = X + H(X) through a total degree
    Invert(InvertArgs),
    /// Check that two maps are mutually inverse
    Verify(VerifyArgs),
    /// Extract a polynomial inverse candidate and certify it
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Map definition file, or '-' for stdin
    input: String,

    /// Certify all terms of total degree <= this bound
    #[arg(long, short = 'd')]
    degree: u32,

    /// Coefficient field: 'q' or 'fp:<prime>'
    #[arg(long, default_value = "q")]
    field: String,

    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct InvertArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Print every iterate P_k and partial sum A_m
    #[arg(long)]
    trace: bool,

    /// Metric base C > 1: adds d(A_m, A_{m+1}) columns to the trace
    #[arg(long)]
    metric_base: Option<f64>,

    /// Cross-check the result against the fixed-point oracle
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Assumed degree D of the polynomial inverse
    #[arg(long)]
    poly_degree: u32,

    /// Also certify the iterate-decomposition identities for s = 1..=s_max
    #[arg(long)]
    smax: Option<u32>,

    /// Upper bound for the automatically raised working degree
    #[arg(long, default_value_t = 48)]
    work_cap: u32,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Invert(args) => cmd_invert(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Analyze(args) => cmd_analyze(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => 1,
        Error::InternalVerification(_) => 3,
        _ => 2,
    }
}

fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::InvalidParameter(format!("cannot read stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {path}: {e}")))
    }
}

fn cmd_invert(args: InvertArgs) -> Result<ExitCode> {
    let spec = parse_field_tag(&args.common.field)?;
    let text = read_input(&args.common.input)?;
    let source = parse_source(&text)?;
    let variables = source.variables.clone();
    let f = evaluate(&source, spec, args.common.degree)?;

    // F with a non-identity (but invertible) linear part is normalized
    // first: F = L∘Ftilde, so F^{-1} = Ftilde^{-1}∘L^{-1}.
    let (problem, normalization) = match validate_problem(&f, args.common.degree) {
        Ok(problem) => (problem, None),
        Err(Error::NotNormalForm { .. }) => {
            let (linear, tilde) = normalize_linear(&f)?;
            (validate_problem(&tilde, args.common.degree)?, Some(linear))
        }
        Err(e) => return Err(e),
    };

    let (inverse_tilde, trace) = invert_series(&problem)?;
    let inverse = match &normalization {
        None => inverse_tilde,
        Some(linear) => {
            let linear_inverse = linear.inverse()?.as_series_map(args.common.degree)?;
            let composed = inverse_tilde.compose(&linear_inverse)?;
            if !verify_inverse(&f, &composed)?.is_verified() {
                return Err(Error::InternalVerification(
                    "normalized inverse fails composition with the original map".into(),
                ));
            }
            composed
        }
    };

    if args.oracle {
        let oracle = fixed_point_invert(&problem)?;
        let check = match &normalization {
            None => oracle,
            Some(linear) => {
                oracle.compose(&linear.inverse()?.as_series_map(args.common.degree)?)?
            }
        };
        if check != inverse {
            return Err(Error::InternalVerification(
                "fixed-point oracle disagrees with the iteration".into(),
            ));
        }
    }

    if let Some(base) = args.metric_base {
        if base.is_nan() || base <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "metric base must exceed 1 (got {base})"
            )));
        }
    }

    let outcome = InvertOutcome {
        variables,
        spec,
        degree: args.common.degree,
        inverse,
        trace,
        normalization,
        show_trace: args.trace,
        metric_base: args.metric_base,
    };
    match args.common.format {
        Format::Text => print!("{}", outcome.to_text()?),
        Format::Json => println!("{}", outcome.to_json()?),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let spec = parse_field_tag(&args.common.field)?;
    let text = read_input(&args.common.input)?;
    let (f_text, g_text) = split_verify_sections(&text)?;
    let f_source = parse_source(&f_text)?;
    let g_source = parse_source(&g_text)?;
    if f_source.variables.len() != g_source.variables.len() {
        return Err(Error::ShapeMismatch(format!(
            "map F has {} variables but map G has {}",
            f_source.variables.len(),
            g_source.variables.len()
        )));
    }
    let f = evaluate(&f_source, spec, args.common.degree)?;
    let g = evaluate(&g_source, spec, args.common.degree)?;
    let outcome = verify_inverse(&f, &g)?;

    let report = VerifyReport {
        variables: f_source.variables,
        spec,
        degree: args.common.degree,
        outcome,
    };
    match args.common.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{}", report.to_json()),
    }
    Ok(if report.verified() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

/// Split a verify input into its `map F:` and `map G:` sections. A shared
/// `vars:` header before the first marker applies to both maps.
fn split_verify_sections(text: &str) -> Result<(String, String)> {
    enum Section {
        Preamble,
        F,
        G,
    }
    let mut state = Section::Preamble;
    let mut preamble = String::new();
    let mut f_text = String::new();
    let mut g_text = String::new();
    let mut seen_f = false;
    let mut seen_g = false;
    for (i, raw) in text.lines().enumerate() {
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        match stripped.trim() {
            "map F:" => {
                if seen_f {
                    return Err(Error::Parse {
                        line: i + 1,
                        column: 1,
                        message: "duplicate 'map F:' section".into(),
                    });
                }
                seen_f = true;
                state = Section::F;
            }
            "map G:" => {
                if seen_g {
                    return Err(Error::Parse {
                        line: i + 1,
                        column: 1,
                        message: "duplicate 'map G:' section".into(),
                    });
                }
                seen_g = true;
                state = Section::G;
            }
            _ => {
                let target = match state {
                    Section::Preamble => &mut preamble,
                    Section::F => &mut f_text,
                    Section::G => &mut g_text,
                };
                target.push_str(raw);
                target.push('\n');
            }
        }
    }
    if !seen_f || !seen_g {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "verify input needs both a 'map F:' and a 'map G:' section".into(),
        });
    }
    Ok((format!("{preamble}{f_text}"), format!("{preamble}{g_text}")))
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<ExitCode> {
    if args.poly_degree < 1 {
        return Err(Error::InvalidParameter(
            "--poly-degree must be at least 1".into(),
        ));
    }
    let spec = parse_field_tag(&args.common.field)?;
    let text = read_input(&args.common.input)?;
    let source = parse_source(&text)?;

    // raise the working precision so the requested iterate checks are
    // visible, within the cap
    let wanted = match args.smax {
        Some(smax) => args.poly_degree.saturating_mul(smax),
        None => 0,
    };
    let working_degree = args.common.degree.max(wanted.min(args.work_cap));

    let f = evaluate(&source, spec, working_degree)?;
    let problem = validate_problem(&f, working_degree)?;
    let report = extract_polynomial_inverse(&problem, args.poly_degree)?;

    let decomposition = match (report.verified, args.smax) {
        (true, Some(smax)) => {
            q_decomposition_check(problem.map(), &report.candidate, args.poly_degree, smax)?
        }
        _ => Vec::new(),
    };

    let outcome = AnalyzeOutcome {
        variables: source.variables,
        spec,
        degree: working_degree,
        report,
        decomposition,
    };
    match args.common.format {
        Format::Text => print!("{}", outcome.to_text()),
        Format::Json => println!("{}", outcome.to_json()),
    }
    Ok(if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}
