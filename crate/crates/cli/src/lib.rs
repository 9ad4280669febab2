//! Command-line front end. `run` is the whole program; `main` only wires
//! it to the process streams.

use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use openpronoun::conll::{parse_conll, write_conll, ConllDocument};
use openpronoun::delex::{
    delex_document, delex_text, relexicalize, DelexMode, DelexReport, RelexOptions,
};
use openpronoun::miner::{counts_to_tsv, parse_stoplist, rank_frequency, Miner, MinerConfig};
use openpronoun::profile::{parse_profile, IndividualProfile};
use openpronoun::registry::{PronounCategory, PronounRegistry, SetId, Source};
use openpronoun::scorer::score_corpus;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "openpronoun",
    version,
    about = "Open-class pronoun tooling for coreference data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inspect and extend the pronoun-set inventory
    Registry(RegistryArgs),
    /// Replace pronouns with placeholder tokens
    Delex(DelexArgs),
    /// Fill placeholders with an individual's pronouns
    Relex(RelexArgs),
    /// Count candidate neopronoun reflexives in raw text
    Mine(MineArgs),
    /// Score a coreference response against a key
    Score(ScoreArgs),
}

#[derive(Debug, Args)]
struct SetsArg {
    /// Extra pronoun-set file loaded on top of the builtin inventory
    #[arg(long, value_name = "FILE")]
    sets: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RegistryArgs {
    #[command(subcommand)]
    action: RegistryAction,
}

#[derive(Debug, Subcommand)]
enum RegistryAction {
    /// Print every registered set as a pronoun-set file
    List {
        #[command(flatten)]
        sets: SetsArg,
    },
    /// Show which sets and cases a surface form belongs to
    Lookup {
        form: String,
        #[command(flatten)]
        sets: SetsArg,
    },
    /// Register stem/stem/stems/stems/stemself
    Derive {
        stem: String,
        #[arg(long, default_value = "nounself")]
        category: String,
        #[command(flatten)]
        sets: SetsArg,
        /// Write all non-builtin sets, including the new one, to this file
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Check a profile file against the registry
    ValidateProfile {
        #[arg(long, value_name = "FILE")]
        profile: PathBuf,
        #[command(flatten)]
        sets: SetsArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Conll,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Paper,
    Extended,
}

impl From<ModeArg> for DelexMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Paper => DelexMode::Paper,
            ModeArg::Extended => DelexMode::Extended,
        }
    }
}

#[derive(Debug, Args)]
struct DelexArgs {
    #[arg(long, value_enum, default_value = "paper")]
    mode: ModeArg,
    /// Input file; repeat for several splits
    #[arg(long = "in", value_name = "FILE", required = true)]
    inputs: Vec<PathBuf>,
    /// Output file, one per --in
    #[arg(long = "out", value_name = "FILE", required = true)]
    outputs: Vec<PathBuf>,
    /// Split label per --in (defaults to the input file stem)
    #[arg(long = "split", value_name = "NAME")]
    splits: Vec<String>,
    /// Write the per-split count table here
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "conll")]
    format: Format,
    #[command(flatten)]
    sets: SetsArg,
}

#[derive(Debug, Args)]
struct RelexArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long = "out", value_name = "FILE")]
    output: PathBuf,
    #[arg(long, value_name = "FILE")]
    profile: PathBuf,
    /// Speaker's set id (a/b/c/d/e) for the mirrored policy
    #[arg(long, value_name = "SET")]
    mirror_set: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[command(flatten)]
    sets: SetsArg,
}

#[derive(Debug, Args)]
struct MineArgs {
    /// Text file, one sentence or comment per line; repeatable
    #[arg(long = "in", value_name = "FILE", required = true)]
    inputs: Vec<PathBuf>,
    /// Replace the default stoplist
    #[arg(long, value_name = "FILE")]
    stoplist: Option<PathBuf>,
    /// Write token counts here (default: standard output)
    #[arg(long, value_name = "FILE")]
    counts: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    rank_csv: Option<PathBuf>,
    /// Drop himself, herself, itself and themself
    #[arg(long)]
    exclude_standard: bool,
    /// Keep first/second-person and plural reflexives
    #[arg(long)]
    keep_non_third_person: bool,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long, value_name = "FILE")]
    key: PathBuf,
    #[arg(long, value_name = "FILE")]
    response: PathBuf,
    /// Also write the scores as one CSV row
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Data(m) => f.write_str(m),
        }
    }
}

fn data<E: fmt::Display>(context: impl fmt::Display) -> impl FnOnce(E) -> Failure {
    move |e| Failure::Data(format!("{context}: {e}"))
}

type Outcome = Result<(), Failure>;

/// Runs one invocation. `argv[0]` is the program name.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Registry(a) => cmd_registry(a, stdout, stderr),
        Command::Delex(a) => cmd_delex(a, stderr),
        Command::Relex(a) => cmd_relex(a),
        Command::Mine(a) => cmd_mine(a, stdout, stderr),
        Command::Score(a) => cmd_score(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {f}");
            match f {
                Failure::Usage(_) => EXIT_USAGE,
                Failure::Data(_) => EXIT_DATA,
            }
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(data(path.display()))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(data(path.display()))
}

/// Writes via a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Outcome {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(data(path.display()))?;
    tmp.write_all(bytes).map_err(data(path.display()))?;
    tmp.persist(path)
        .map_err(|e| Failure::Data(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

fn load_registry(sets: &SetsArg) -> Result<PronounRegistry, Failure> {
    let mut reg = PronounRegistry::builtin();
    if let Some(path) = &sets.sets {
        let text = read_text(path)?;
        reg.load_tsv(&text).map_err(data(path.display()))?;
    }
    Ok(reg)
}

fn load_profile(path: &Path, reg: &mut PronounRegistry) -> Result<IndividualProfile, Failure> {
    let text = read_text(path)?;
    parse_profile(&text, reg).map_err(data(path.display()))
}

fn load_conll(path: &Path) -> Result<Vec<ConllDocument>, Failure> {
    parse_conll(&read_bytes(path)?).map_err(data(path.display()))
}

fn cmd_registry(args: RegistryArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let io_err = |e: io::Error| Failure::Data(e.to_string());
    match args.action {
        RegistryAction::List { sets } => {
            let reg = load_registry(&sets)?;
            stdout.write_all(reg.to_tsv().as_bytes()).map_err(io_err)
        }
        RegistryAction::Lookup { form, sets } => {
            let reg = load_registry(&sets)?;
            let hits = reg.lookup_form(&form);
            if hits.is_empty() {
                let _ = writeln!(stderr, "{form:?} is not a registered pronoun form");
            }
            for (set, case) in hits {
                writeln!(stdout, "{}\t{}", set.id, case).map_err(io_err)?;
            }
            Ok(())
        }
        RegistryAction::Derive {
            stem,
            category,
            sets,
            out,
        } => {
            let category: PronounCategory = category.parse().map_err(Failure::Usage)?;
            let mut reg = load_registry(&sets)?;
            let line = reg
                .derive_set_from_stem(&stem, category)
                .map_err(data(format!("stem {stem:?}")))?
                .to_tsv_line();
            writeln!(stdout, "{line}").map_err(io_err)?;
            if let Some(path) = out {
                let mut text = String::new();
                for set in reg.sets().iter().filter(|s| s.source != Source::Builtin) {
                    text.push_str(&set.to_tsv_line());
                    text.push('\n');
                }
                write_atomic(&path, text.as_bytes())?;
            }
            Ok(())
        }
        RegistryAction::ValidateProfile { profile, sets } => {
            let mut reg = load_registry(&sets)?;
            let p = load_profile(&profile, &mut reg)?;
            let violations = reg.validate_profile(&p);
            if violations.is_empty() {
                writeln!(stdout, "ok").map_err(io_err)
            } else {
                let msgs: Vec<String> = violations.iter().map(ToString::to_string).collect();
                Err(Failure::Data(format!(
                    "{}: {}",
                    profile.display(),
                    msgs.join("; ")
                )))
            }
        }
    }
}

fn cmd_delex(args: DelexArgs, stderr: &mut dyn Write) -> Outcome {
    if args.inputs.len() != args.outputs.len() {
        return Err(Failure::Usage(format!(
            "got {} --in but {} --out",
            args.inputs.len(),
            args.outputs.len()
        )));
    }
    if !args.splits.is_empty() && args.splits.len() != args.inputs.len() {
        return Err(Failure::Usage(format!(
            "got {} --split for {} --in",
            args.splits.len(),
            args.inputs.len()
        )));
    }
    let mode: DelexMode = args.mode.into();
    let reg = match args.format {
        Format::Text => Some(load_registry(&args.sets)?),
        Format::Conll => None,
    };

    // Everything is computed before anything is written.
    let mut report = DelexReport::new();
    let mut artifacts = Vec::new();
    for (i, (input, output)) in args.inputs.iter().zip(&args.outputs).enumerate() {
        let split = match args.splits.get(i) {
            Some(s) => s.clone(),
            None => input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| DelexReport::DEFAULT_SPLIT.to_owned()),
        };
        let mut part = DelexReport::new();
        let bytes = match &reg {
            None => {
                let docs = load_conll(input)?;
                let mut out_docs = Vec::with_capacity(docs.len());
                for doc in &docs {
                    let (d, r) = delex_document(doc, mode).map_err(data(input.display()))?;
                    out_docs.push(d);
                    part.merge(r);
                }
                write_conll(&out_docs).map_err(data(output.display()))?
            }
            Some(reg) => {
                let text = read_text(input)?;
                let (out, r) = delex_text(&text, reg.lexicon(), mode);
                part.merge(r);
                out.into_bytes()
            }
        };
        for w in &part.warnings {
            let _ = writeln!(stderr, "warning: {}: {w}", input.display());
        }
        report.merge(part.relabel(&split));
        artifacts.push((output.clone(), bytes));
    }
    for (path, bytes) in &artifacts {
        write_atomic(path, bytes)?;
    }
    if let Some(path) = &args.report {
        write_atomic(path, report.to_tsv().as_bytes())?;
    }
    Ok(())
}

fn cmd_relex(args: RelexArgs) -> Outcome {
    let mut reg = load_registry(&args.sets)?;
    let profile = load_profile(&args.profile, &mut reg)?;
    let options = RelexOptions {
        mirror_set: args.mirror_set.as_deref().map(SetId::from),
    };
    let relex = |text: &str| {
        relexicalize(text, &profile, &reg, &options).map_err(data(args.input.display()))
    };
    let bytes = match args.format {
        Format::Text => relex(&read_text(&args.input)?)?.into_bytes(),
        Format::Conll => {
            let mut docs = load_conll(&args.input)?;
            for doc in &mut docs {
                let joined: Vec<String> = doc.tokens().map(|t| t.form().to_owned()).collect();
                let filled = relex(&joined.join(" "))?;
                let forms: Vec<&str> = filled.split(' ').collect();
                if forms.len() != joined.len() {
                    return Err(Failure::Data(format!(
                        "document {}: relexicalized forms do not align with tokens",
                        doc.id
                    )));
                }
                for (tok, form) in doc.tokens_mut().zip(forms) {
                    tok.set_form(form);
                }
            }
            write_conll(&docs).map_err(data(args.output.display()))?
        }
    };
    write_atomic(&args.output, &bytes)
}

fn cmd_mine(args: MineArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let mut config = MinerConfig {
        filter_non_third_person: !args.keep_non_third_person,
        exclude_standard_reflexives: args.exclude_standard,
        ..MinerConfig::default()
    };
    if let Some(path) = &args.stoplist {
        config.stoplist = parse_stoplist(&read_text(path)?);
    }
    let mut miner = Miner::new(&config);
    let mut buf = Vec::new();
    for path in &args.inputs {
        let file = fs::File::open(path).map_err(data(path.display()))?;
        let mut reader = BufReader::new(file);
        loop {
            buf.clear();
            let n = reader
                .read_until(b'\n', &mut buf)
                .map_err(data(path.display()))?;
            if n == 0 {
                break;
            }
            while matches!(buf.last(), Some(b'\n' | b'\r')) {
                buf.pop();
            }
            miner.feed_bytes(&buf);
        }
    }
    if miner.malformed_lines() > 0 {
        let _ = writeln!(
            stderr,
            "warning: skipped {} lines that are not valid UTF-8",
            miner.malformed_lines()
        );
    }
    let counts = miner.finish();
    let tsv = counts_to_tsv(&counts);
    match &args.counts {
        Some(path) => write_atomic(path, tsv.as_bytes())?,
        None if args.rank_csv.is_none() => stdout
            .write_all(tsv.as_bytes())
            .map_err(|e| Failure::Data(e.to_string()))?,
        None => {}
    }
    if let Some(path) = &args.rank_csv {
        write_atomic(path, rank_frequency(&counts).to_csv().as_bytes())?;
    }
    Ok(())
}

fn cmd_score(args: ScoreArgs, stdout: &mut dyn Write) -> Outcome {
    let key = load_conll(&args.key)?;
    let response = load_conll(&args.response)?;
    let report = score_corpus(&key, &response).map_err(data("scoring"))?;
    stdout
        .write_all(report.to_text_table().as_bytes())
        .map_err(|e| Failure::Data(e.to_string()))?;
    if let Some(path) = &args.csv {
        write_atomic(path, report.to_csv().as_bytes())?;
    }
    Ok(())
}
