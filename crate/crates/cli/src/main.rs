use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use cascade_ie::pipeline::{run_corpus, run_document, Engine, OutputFormat, PipelineConfig};
use cascade_ie::scorer::{parse_templates, score, Normalization};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cascade-ie", version, about = "Cascaded finite-state information extraction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RuleArgs {
    /// Rule files, merged in order.
    #[arg(long = "rules", required = true)]
    rules: Vec<PathBuf>,
    /// Extra lexicon files layered over the built-in one.
    #[arg(long = "lexicon")]
    lexicons: Vec<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Compile rule files and report errors.
    Compile {
        #[command(flatten)]
        rules: RuleArgs,
        /// Print the expanded rule inventory.
        #[arg(long)]
        check: bool,
    },
    /// Extract templates from a text file or a directory of them.
    Extract {
        #[command(flatten)]
        rules: RuleArgs,
        input: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Output directory; required when the input is a directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep templates for documents without any pattern match.
        #[arg(long)]
        no_relevance_filter: bool,
    },
    /// Write the per-stage trace of one document as JSONL.
    Trace {
        #[command(flatten)]
        rules: RuleArgs,
        input: PathBuf,
        /// Output file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score response templates against gold templates.
    Score {
        /// Rule files supplying the template schema.
        #[arg(long = "rules", required = true)]
        rules: Vec<PathBuf>,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        response: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn engine(args: &RuleArgs, relevance_filter: bool, format: OutputFormat) -> Result<Engine> {
    let cfg = PipelineConfig {
        rules: args.rules.clone(),
        lexicons: args.lexicons.clone(),
        format,
        relevance_filter,
        ..PipelineConfig::default()
    };
    Ok(Engine::from_config(&cfg)?)
}

fn read(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "document".into(), |s| s.to_string_lossy().into_owned())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Compile { rules, check } => {
            let e = engine(&rules, true, OutputFormat::Json)?;
            println!(
                "ok: {} patterns ({} states), {} seeds, {} verb group rules, {} template types",
                e.patterns.rules.len(),
                e.patterns.states.len(),
                e.seeds.rules.len(),
                e.rules.verb_groups.len(),
                e.rules.templates.types.len()
            );
            if check {
                print!("{}", e.patterns.inventory());
                if !e.seeds.rules.is_empty() {
                    println!("-- seeds");
                    print!("{}", e.seeds.inventory());
                }
            }
        }
        Command::Extract { rules, input, format, out, no_relevance_filter } => {
            let fmt = match format {
                Format::Json => OutputFormat::Json,
                Format::Table => OutputFormat::Table,
            };
            let e = engine(&rules, !no_relevance_filter, fmt)?;
            if input.is_dir() {
                let Some(out) = out else { bail!("--out is required when the input is a directory") };
                let report = run_corpus(&input, &e, Some(&out))?;
                let summary = serde_json::to_string_pretty(&report)? + "\n";
                std::fs::write(out.join("summary.json"), &summary)?;
                print!("{summary}");
                return Ok(());
            }
            let result = run_document(&stem(&input), &read(&input)?, &e, false);
            let body = match fmt {
                OutputFormat::Json => serde_json::to_string_pretty(&result.templates_json())? + "\n",
                OutputFormat::Table => result.render_tables(&e),
            };
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    let ext = if matches!(fmt, OutputFormat::Json) { "json" } else { "txt" };
                    emit(Some(&dir.join(format!("{}.{ext}", result.id))), &body)?;
                }
                None => emit(None, &body)?,
            }
        }
        Command::Trace { rules, input, out } => {
            let e = engine(&rules, true, OutputFormat::Json)?;
            let result = run_document(&stem(&input), &read(&input)?, &e, true);
            emit(out.as_deref(), &result.trace_jsonl())?;
        }
        Command::Score { rules, gold, response, beta, format, out } => {
            let args = RuleArgs { rules, lexicons: Vec::new() };
            let e = engine(&args, true, OutputFormat::Json)?;
            let gold = parse_templates(&read(&gold)?)?;
            let response = parse_templates(&read(&response)?)?;
            let report = score(&gold, &response, &e.rules.templates, beta, &Normalization::default())?;
            let body = match format {
                Format::Json => serde_json::to_string_pretty(&report)? + "\n",
                Format::Table => format!("{report}\n"),
            };
            emit(out.as_deref(), &body)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
