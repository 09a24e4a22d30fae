//! `tsi-kit`: generate, perturb, split, interpret and evaluate traffic-sign
//! scene corpora.
//!
//! Exit codes: 0 success, 1 other failure, 2 usage or config error, 3 I/O
//! error, 4 mismatched inputs.

mod commands;
mod provenance;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tsi_core::metrics::TokenizerMode;

use commands::{EvalArgs, GenArgs, InterpretArgs, PerturbArgs, SplitArgs, DEFAULT_TEST_FRACTION};
use settings::{CliResult, GlobalFlags, Settings};

#[derive(Parser, Debug)]
#[command(
    name = "tsi-kit",
    version,
    about = "Traffic-sign interpretation toolkit"
)]
struct Cli {
    /// Seed for gen, split and perturb.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON config file; flags override its values.
    #[arg(long, global = true, env = "TSI_KIT_CONFIG")]
    config: Option<PathBuf>,
    /// Worker threads. Never changes output bytes.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Tokenizer for description metrics.
    #[arg(long, global = true, value_parser = parse_tokenizer)]
    tokenizer: Option<TokenizerMode>,
    /// IoU threshold for every sign kind.
    #[arg(long = "iou-thresh", global = true)]
    iou_thresh: Option<f64>,
    /// Add a timestamp to provenance blocks.
    #[arg(long, global = true)]
    stamp: bool,
    #[command(subcommand)]
    command: Command,
}

fn parse_tokenizer(s: &str) -> Result<TokenizerMode, String> {
    TokenizerMode::parse(s).ok_or_else(|| format!("unknown tokenizer `{s}` (auto, cjk, ws)"))
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic corpus with descriptions and layout oracles.
    Gen {
        /// Number of scenes.
        #[arg(long)]
        scenes: Option<usize>,
        #[command(flatten)]
        lang: LangArgs,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Split a corpus into train and test, stratified by panel class.
    Split {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TEST_FRACTION)]
        test_fraction: f64,
        #[arg(long, default_value_t = tsi_core::scene::DEFAULT_SPLIT_TOLERANCE)]
        tolerance: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Degrade annotations into predictions with seeded noise.
    Perturb {
        input: PathBuf,
        /// Preset (zero, light, heavy) or a JSON profile file.
        #[arg(long)]
        noise: Option<String>,
        #[command(flatten)]
        lang: LangArgs,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Describe every sign cluster of a corpus.
    Interpret {
        input: PathBuf,
        #[command(flatten)]
        lang: LangArgs,
        /// Descriptions, as JSON Lines.
        #[arg(short, long)]
        out: PathBuf,
        /// Per-cluster failures; defaults to `<out>.diagnostics.jsonl`.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Detection precision, recall and F-measure per sign kind.
    EvalDet(EvalCmd),
    /// Recognition accuracy per class and character class.
    EvalRec(EvalCmd),
    /// ROUGE, BLEU and Soft Accuracy of descriptions. The prediction file
    /// may hold descriptions or scenes to interpret.
    EvalInterp(InterpCmd),
    /// All three evaluations of one prediction file.
    Report {
        #[command(flatten)]
        eval: InterpCmd,
        /// Descriptions to score instead of interpreting the predictions.
        #[arg(long)]
        descriptions: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct LangArgs {
    /// Bundled grammar language (en, zh).
    #[arg(long)]
    language: Option<String>,
    /// Grammar file replacing the bundled one.
    #[arg(long)]
    grammar: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalCmd {
    gt: PathBuf,
    pred: PathBuf,
    /// Write the JSON report here.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Print JSON instead of tables.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct InterpCmd {
    #[command(flatten)]
    eval: EvalCmd,
    #[command(flatten)]
    lang: LangArgs,
    /// Slot-rule file for Soft Accuracy.
    #[arg(long)]
    slot_rules: Option<PathBuf>,
}

fn eval_args(
    e: EvalCmd,
    lang: Option<LangArgs>,
    slot_rules: Option<PathBuf>,
    descriptions: Option<PathBuf>,
) -> EvalArgs {
    let (language, grammar) = lang.map(|l| (l.language, l.grammar)).unwrap_or_default();
    EvalArgs {
        gt: e.gt,
        pred: e.pred,
        language,
        grammar,
        slot_rules,
        descriptions,
        out: e.out,
        json: e.json,
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let flags = GlobalFlags {
        seed: cli.seed,
        config: cli.config,
        workers: cli.workers,
        tokenizer: cli.tokenizer,
        iou_thresh: cli.iou_thresh,
        stamp: cli.stamp,
    };
    let s = Settings::resolve(&flags)?;
    match cli.command {
        Command::Gen { scenes, lang, out } => commands::gen(
            &s,
            &GenArgs {
                scenes,
                language: lang.language,
                grammar: lang.grammar,
                out,
            },
        ),
        Command::Split {
            input,
            test_fraction,
            tolerance,
            out,
        } => commands::split(
            &s,
            &SplitArgs {
                input,
                test_fraction,
                tolerance,
                out,
            },
        ),
        Command::Perturb {
            input,
            noise,
            lang,
            out,
        } => commands::perturb(
            &s,
            &PerturbArgs {
                input,
                noise,
                language: lang.language,
                grammar: lang.grammar,
                out,
            },
        ),
        Command::Interpret {
            input,
            lang,
            out,
            diagnostics,
        } => commands::interpret(
            &s,
            &InterpretArgs {
                input,
                language: lang.language,
                grammar: lang.grammar,
                out,
                diagnostics,
            },
        ),
        Command::EvalDet(e) => commands::eval_det(&s, &eval_args(e, None, None, None)),
        Command::EvalRec(e) => commands::eval_rec(&s, &eval_args(e, None, None, None)),
        Command::EvalInterp(i) => {
            commands::eval_interp(&s, &eval_args(i.eval, Some(i.lang), i.slot_rules, None))
        }
        Command::Report { eval, descriptions } => commands::report(
            &s,
            &eval_args(eval.eval, Some(eval.lang), eval.slot_rules, descriptions),
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tsi-kit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
