//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid data or arguments, 2 environment
//! failures (I/O, unreachable or incomplete similarity backend, usage).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::assessment::{o_score, rank_current_problems, AssessmentError, OScoreInput, DEFAULT_GATE_THRESHOLD};
use crate::corpus::{import_survey_csv, load_corpus, save_corpus, CorpusError};
use crate::model::{ProblemCorpus, Provenance};
use crate::report::{render, Detail, OutputFormat};
use crate::similarity::{BackendConfig, RemoteConfig, SimilarityError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_ENV: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sapphire-novelty", version, about = "Assess the novelty of design problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Strictly validate one or more corpus files.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Score current problems against past problems and rank them.
    Assess(RunArgs),
    /// Like `assess`, but print only the ranking.
    Rank(RunArgs),
    /// Originality score 1 - n/m of an idea with n similar ideas among m.
    Oscore {
        #[arg(allow_hyphen_values = true)]
        n: String,
        #[arg(allow_hyphen_values = true)]
        m: String,
    },
    /// Convert a survey CSV into a current-problem corpus file.
    ImportSurvey {
        csv: PathBuf,
        #[arg(long, default_value = "")]
        context: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Lexical,
    Wordvec,
    Remote,
    Fixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    past: PathBuf,
    #[arg(long)]
    current: PathBuf,
    #[arg(long, value_enum, default_value = "lexical")]
    backend: BackendArg,
    /// Word-vector file for the wordvec backend.
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Pinned similarity file for the fixture backend.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Embedding service URL for the remote backend.
    #[arg(long, env = "SAPPHIRE_EMBED_URL")]
    endpoint: Option<String>,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    /// Request timeout in seconds.
    #[arg(long, default_value_t = 30)]
    timeout: u64,
    #[arg(long, default_value_t = 3)]
    retries: u32,
    /// Comma-separated stopwords for the lexical backend.
    #[arg(long, value_delimiter = ',')]
    stopwords: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_GATE_THRESHOLD)]
    threshold: f64,
    #[arg(long, value_enum, default_value = "table")]
    format: FormatArg,
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Fully resolved settings for one assessment run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub past: PathBuf,
    pub current: PathBuf,
    pub backend: BackendConfig,
    pub threshold: f64,
    pub format: OutputFormat,
    pub strict: bool,
    pub out: Option<PathBuf>,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn data(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    fn env(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_ENV,
            message: message.into(),
        }
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        let code = if e.is_io() { EXIT_ENV } else { EXIT_DATA };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<SimilarityError> for Failure {
    fn from(e: SimilarityError) -> Self {
        Self::env(e.to_string())
    }
}

impl From<AssessmentError> for Failure {
    fn from(e: AssessmentError) -> Self {
        match e {
            AssessmentError::Similarity(e) => e.into(),
            other => Self::data(other.to_string()),
        }
    }
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, Failure> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Failure::data(format!("threshold {} outside [0, 1]", self.threshold)));
        }
        let backend = match self.backend {
            BackendArg::Lexical => BackendConfig::Lexical {
                stopwords: self.stopwords,
            },
            BackendArg::Wordvec => BackendConfig::WordVector {
                path: self
                    .vectors
                    .ok_or_else(|| Failure::env("--backend wordvec requires --vectors <path>"))?,
            },
            BackendArg::Fixture => BackendConfig::Fixture {
                path: self
                    .fixtures
                    .ok_or_else(|| Failure::env("--backend fixture requires --fixtures <path>"))?,
            },
            BackendArg::Remote => BackendConfig::RemoteEmbedding(RemoteConfig {
                endpoint: self
                    .endpoint
                    .ok_or_else(|| Failure::env("--backend remote requires --endpoint <url> or SAPPHIRE_EMBED_URL"))?,
                batch_size: self.batch_size,
                timeout: Duration::from_secs(self.timeout),
                retries: self.retries,
                ..RemoteConfig::default()
            }),
        };
        Ok(RunConfig {
            past: self.past,
            current: self.current,
            backend,
            threshold: self.threshold,
            format: match self.format {
                FormatArg::Table => OutputFormat::Table,
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
            },
            strict: self.strict,
            out: self.out,
        })
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Validate { paths } => return cmd_validate(&paths),
        Command::Assess(args) => args.into_config().and_then(|c| cmd_assess(&c, Detail::Full)),
        Command::Rank(args) => args.into_config().and_then(|c| cmd_assess(&c, Detail::Summary)),
        Command::Oscore { n, m } => cmd_oscore(&n, &m),
        Command::ImportSurvey {
            csv,
            context,
            out,
            strict,
        } => cmd_import(&csv, &context, &out, strict),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

/// Provenance of the first record, used as the role when validating a
/// file on its own.
fn infer_role(path: &Path) -> Provenance {
    let first = std::fs::read_to_string(path)
        .ok()
        .and_then(|text| text.lines().find(|l| !l.trim().is_empty()).map(str::to_owned));
    first
        .and_then(|line| serde_json::from_str::<serde_json::Value>(&line).ok())
        .and_then(|v| v.get("provenance").and_then(|p| p.as_str()).map(str::to_owned))
        .filter(|p| p == "current")
        .map_or(Provenance::Past, |_| Provenance::Current)
}

pub fn cmd_validate(paths: &[PathBuf]) -> i32 {
    let mut code = EXIT_OK;
    for path in paths {
        match load_corpus(path, infer_role(path), true) {
            Ok(loaded) => {
                println!("{}: ok ({} problems)", path.display(), loaded.corpus.len());
                for w in &loaded.warnings {
                    println!("  warning: {w}");
                }
            }
            Err(CorpusError::Invalid { issues, .. }) => {
                println!("{}: {} violation(s)", path.display(), issues.len());
                for issue in &issues {
                    println!("  {issue}");
                }
                code = code.max(EXIT_DATA);
            }
            Err(e) => {
                println!("{e}");
                code = code.max(if e.is_io() { EXIT_ENV } else { EXIT_DATA });
            }
        }
    }
    code
}

fn load_for_run(path: &Path, role: Provenance, strict: bool) -> Result<ProblemCorpus, Failure> {
    let loaded = load_corpus(path, role, strict)?;
    for w in &loaded.warnings {
        tracing::warn!("{}: {w}", path.display());
    }
    Ok(loaded.corpus)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::env(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::env(format!("stdout: {e}")))
        }
    }
}

/// Produces the rendered report for `config`, or an exit code and message.
pub fn assess_to_string(config: &RunConfig, detail: Detail) -> Result<String, (i32, String)> {
    assess_inner(config, detail).map_err(|f| (f.code, f.message))
}

fn assess_inner(config: &RunConfig, detail: Detail) -> Result<String, Failure> {
    let past = load_for_run(&config.past, Provenance::Past, config.strict)?;
    let current = load_for_run(&config.current, Provenance::Current, config.strict)?;
    let backend = config.backend.build()?;
    let report = rank_current_problems(&past, &current, &backend, config.threshold)?;
    Ok(render(&report, &past, &current, config.format, detail))
}

fn cmd_assess(config: &RunConfig, detail: Detail) -> Result<(), Failure> {
    let text = assess_inner(config, detail)?;
    write_output(config.out.as_deref(), &text)
}

fn cmd_oscore(n: &str, m: &str) -> Result<(), Failure> {
    let parse = |name: &str, v: &str| {
        v.trim()
            .parse::<u64>()
            .map_err(|_| Failure::data(format!("{name} must be a non-negative integer, got '{v}'")))
    };
    let input = OScoreInput::new(parse("n", n)?, parse("m", m)?).map_err(|e| Failure::data(e.to_string()))?;
    println!("{:.4}", o_score(input));
    Ok(())
}

fn cmd_import(csv: &Path, context: &str, out: &Path, strict: bool) -> Result<(), Failure> {
    let loaded = import_survey_csv(csv, context, strict)?;
    for w in &loaded.warnings {
        tracing::warn!("{}: {w}", csv.display());
    }
    save_corpus(&loaded.corpus, out)?;
    eprintln!("wrote {} problems to {}", loaded.corpus.len(), out.display());
    Ok(())
}
