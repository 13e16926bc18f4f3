use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use arena_core::algorithms::ZooSpec;
use arena_core::engine::{play, verify_transcript, Presenter};
use arena_core::exactnum::BigInt;
use arena_core::model::Transcript;
use arena_core::presenters::{KtPresenter, SchemaPresenter, UnitPresenter};
use arena_core::schema::{self, KSchema};
use arena_core::search;

/// Exit status for unreadable input or an invalid schema.
const EXIT_INPUT: u8 = 2;
/// Exit status when `verify` finds overloaded colors.
const EXIT_VIOLATIONS: u8 = 1;

#[derive(Parser)]
#[command(name = "arena", version, about = "Presenter/Algorithm games for on-line interval coloring with bandwidth")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived table (j, x, chi, gamma, delta, scalable_cap) of a schema.
    Tables {
        /// Built-in name (s120, s120-scalable) or path to a schema JSON file.
        #[arg(long)]
        schema: String,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
    },
    /// Synthesize strategies and report their asymptotic ratios.
    Search {
        #[arg(long, conflicts_with_all = ["table3", "hcn_limit"])]
        k: Option<String>,
        /// All k values of the published ratio table.
        #[arg(long)]
        table3: bool,
        /// Every highly composite number up to this limit.
        #[arg(long)]
        hcn_limit: Option<String>,
        #[arg(long, value_enum, default_value_t = SearchFormat::Csv)]
        format: SearchFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Play one game and report the result.
    Play {
        /// schema:<s120|s120-scalable|single:<k>|path>, kt:<omega> or unit:<k>.
        #[arg(long)]
        presenter: String,
        /// first-fit, best-fit, worst-fit or random-fit:<seed>.
        #[arg(long)]
        algorithm: String,
        /// Round limit; defaults to the presenter's own bound.
        #[arg(long)]
        budget: Option<u64>,
        /// Write the full report, transcript included, to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Schema presenters only: stop after the separation phase.
        #[arg(long)]
        sep_only: bool,
    },
    /// Recheck every color's load in a transcript or report file.
    Verify { path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchFormat {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Tables { schema, format } => cmd_tables(&schema, format),
        Command::Search { k, table3, hcn_limit, format, out } => cmd_search(k, table3, hcn_limit, format, out),
        Command::Play { presenter, algorithm, budget, out, sep_only } => {
            cmd_play(&presenter, &algorithm, budget, out, sep_only)
        }
        Command::Verify { path } => cmd_verify(&path),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

type CmdResult = Result<u8, (u8, String)>;

fn input_error(msg: impl ToString) -> (u8, String) {
    (EXIT_INPUT, msg.to_string())
}

fn load_schema(name: &str) -> Result<KSchema, (u8, String)> {
    if let Some(s) = schema::builtin(name) {
        return Ok(s);
    }
    if let Some(k) = name.strip_prefix("single:") {
        let k: u64 = k.parse().map_err(|_| input_error(format!("invalid k in `{name}`")))?;
        return KSchema::single(k).map_err(input_error);
    }
    let text = fs::read_to_string(name).map_err(|e| input_error(format!("{name}: {e}")))?;
    KSchema::from_json_str(&text).map_err(|e| input_error(format!("{name}: {e}")))
}

fn parse_big(s: &str) -> Result<BigInt, (u8, String)> {
    s.trim().parse().map_err(|_| input_error(format!("invalid integer `{s}`")))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), (u8, String)> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| input_error(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_tables(name: &str, format: TableFormat) -> CmdResult {
    let s = load_schema(name)?;
    match format {
        TableFormat::Csv => print!("{}", schema::table_csv(&s)),
        TableFormat::Text => print!("{}", schema::table_text(&s)),
    }
    match schema::strategy_report(&s) {
        Ok(r) => eprintln!(
            "forced colors {}, absolute ratio {}, asymptotic ratio {}{}",
            r.forced_colors,
            r.absolute_ratio,
            r.asymptotic_ratio,
            if r.scalable { " (scalable)" } else { "" }
        ),
        Err(e) => eprintln!("{e}"),
    }
    Ok(0)
}

fn cmd_search(
    k: Option<String>,
    table3: bool,
    hcn_limit: Option<String>,
    format: SearchFormat,
    out: Option<PathBuf>,
) -> CmdResult {
    let ks = match (k, table3, hcn_limit) {
        (Some(k), false, None) => vec![parse_big(&k)?],
        (None, true, None) => search::table3_ks(),
        (None, false, Some(limit)) => search::highly_composite_upto(&parse_big(&limit)?),
        _ => return Err(input_error("give exactly one of --k, --table3, --hcn-limit")),
    };
    let rows = search::ratio_table(&ks);
    let text = match format {
        SearchFormat::Csv => search::table_csv(&rows, &ks),
        SearchFormat::Json => format!("{:#}\n", search::table_json(&rows, &ks)),
    };
    write_or_print(out.as_deref(), &text)?;
    if let Ok(best) = search::headline_of(&rows) {
        eprintln!("best asymptotic ratio {} = {}", best, arena_core::exactnum::truncate_decimal(&best, 7));
    }
    Ok(0)
}

fn build_presenter(spec: &str, sep_only: bool) -> Result<Box<dyn Presenter>, (u8, String)> {
    let (kind, arg) = spec.split_once(':').ok_or_else(|| input_error(format!("invalid presenter `{spec}`")))?;
    let p: Box<dyn Presenter> = match kind {
        "schema" => Box::new(SchemaPresenter::new(load_schema(arg)?, !sep_only).map_err(input_error)?),
        "kt" => {
            let omega = arg.parse().map_err(|_| input_error(format!("invalid omega `{arg}`")))?;
            Box::new(KtPresenter::unit_region(omega).map_err(input_error)?)
        }
        "unit" => {
            let k = arg.parse().map_err(|_| input_error(format!("invalid k `{arg}`")))?;
            Box::new(UnitPresenter::new(k).map_err(input_error)?)
        }
        _ => return Err(input_error(format!("unknown presenter kind `{kind}`"))),
    };
    if sep_only && kind != "schema" {
        return Err(input_error("--sep-only applies to schema presenters only"));
    }
    Ok(p)
}

fn cmd_play(spec: &str, algorithm: &str, budget: Option<u64>, out: Option<PathBuf>, sep_only: bool) -> CmdResult {
    let mut presenter = build_presenter(spec, sep_only)?;
    let zoo: ZooSpec = algorithm.parse().map_err(input_error)?;
    let mut alg = zoo.build();
    let budget = budget.unwrap_or_else(|| presenter.default_budget());
    match play(presenter.as_mut(), alg.as_mut(), budget) {
        Ok(report) => {
            println!("{:#}", report.summary_json());
            if let Some(path) = out {
                write_or_print(Some(&path), &serde_json::to_string(&report.to_json()).expect("json"))?;
            }
            Ok(if report.violations.is_empty() { 0 } else { EXIT_VIOLATIONS })
        }
        Err(failure) => {
            let code = failure.error.exit_code() as u8;
            if let Some(path) = out {
                let v = json!({ "error": failure.error.to_string(), "transcript": failure.transcript.to_json() });
                write_or_print(Some(&path), &serde_json::to_string(&v).expect("json"))?;
            }
            Err((code, failure.error.to_string()))
        }
    }
}

fn cmd_verify(path: &Path) -> CmdResult {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let t = if text.trim().is_empty() {
        Transcript::new()
    } else {
        let v: Value = serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        let inner = v.get("transcript").unwrap_or(&v);
        Transcript::from_json(inner).map_err(|e| input_error(format!("{}: {e}", path.display())))?
    };
    let violations = verify_transcript(&t);
    println!(
        "{:#}",
        json!({ "intervals": t.len(), "colors": t.color_count(), "violations": violations })
    );
    Ok(if violations.is_empty() { 0 } else { EXIT_VIOLATIONS })
}
