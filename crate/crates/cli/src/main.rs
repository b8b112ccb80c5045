use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use framebench_core::annotation::LayerKind;
use framebench_service::project::read_file;
use framebench_service::stages::{self, JobReport};
use framebench_service::{AnalysisLayer, Project, ProjectError};


/// Prints a line to stdout, exiting quietly once the reader has gone away.
macro_rules! out {
    ($($arg:tt)*) => {
        if writeln!(std::io::stdout(), $($arg)*).is_err() {
            std::process::exit(0);
        }
    };
}

#[derive(Parser)]
#[command(name = "framebench", version, about = "Arabic frame-semantic annotation toolkit")]
struct Cli {
    /// Project directory.
    #[arg(long, global = true, env = "FRAMEBENCH_PROJECT", default_value = ".")]
    project: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayerArg {
    Morph,
    Syntax,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Create a project with the bundled resources.
    Init {
        /// Also add the desk corpus and its decisions file.
        #[arg(long)]
        desk: bool,
    },
    /// Add or replace sub-corpora from a corpus document.
    Import { file: PathBuf },
    /// Write morphology and dependency tables under analysis/.
    Analyze {
        #[arg(long, value_enum, default_value = "all")]
        layer: LayerArg,
    },
    /// List sentences containing a lemma (Arabic or Buckwalter).
    Concord { lemma: String },
    /// Create annotation sets.
    Annotate {
        /// Lexical unit id, e.g. waDaEa.v.
        lu: Option<String>,
        /// Prefill sets for every concordance hit of the unit.
        #[arg(long)]
        auto: bool,
        /// Apply a decisions file.
        #[arg(long)]
        decisions: Option<PathBuf>,
    },
    /// Check every stored annotation set.
    Validate,
    /// Derive rules into rules/.
    Mine {
        lu: Option<String>,
        /// Mine every unit with stored sets.
        #[arg(long, conflicts_with = "lu")]
        all: bool,
    },
    /// Write validated sets to export/.
    Export {
        /// Comma-separated layers to keep; Target is always kept.
        #[arg(long, value_delimiter = ',')]
        layers: Option<Vec<String>>,
        #[arg(long)]
        lu: Option<String>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

fn print_report(report: &JobReport) -> ExitCode {
    print!("{report}");
    if report.violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn parse_layers(names: &[String]) -> Result<Vec<LayerKind>, ProjectError> {
    names.iter().map(|n| n.trim().parse().map_err(|_| ProjectError::Usage(format!("unknown layer {n:?}")))).collect()
}

fn run(root: &Path, command: Command) -> Result<ExitCode, ProjectError> {
    match command {
        Command::Init { desk } => {
            let p = Project::init(root, desk)?;
            out!("initialized {} ({} sentences)", root.display(), p.corpus.sentences().len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Import { file } => {
            let doc = read_file(&file)?;
            let mut p = Project::open(root)?;
            for rel in p.import_corpus_doc(&doc)? {
                out!("stored {rel}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze { layer } => {
            let layer = match layer {
                LayerArg::Morph => AnalysisLayer::Morph,
                LayerArg::Syntax => AnalysisLayer::Syntax,
                LayerArg::All => AnalysisLayer::All,
            };
            Ok(print_report(&stages::analyze(&Project::open(root)?, layer)?))
        }
        Command::Concord { lemma } => {
            let p = Project::open(root)?;
            for hit in stages::concord(&p, &lemma)? {
                let (_, s) = p.sentence(&hit.sentence_id)?;
                let tokens: Vec<String> = hit.hits.iter().map(|t| format!("t{t}")).collect();
                out!("{}\t{}\t{}", hit.sentence_id, tokens.join(","), s.text);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Annotate { lu, auto, decisions } => {
            let mut p = Project::open(root)?;
            let report = match (decisions, auto, lu) {
                (Some(path), false, lu) => stages::annotate_decisions(&mut p, lu.as_deref(), &path)?,
                (None, true, Some(lu)) => stages::annotate_auto(&mut p, &lu)?,
                (None, true, None) => return Err(ProjectError::Usage("--auto needs a lexical unit".into())),
                (Some(_), true, _) => return Err(ProjectError::Usage("--auto and --decisions are exclusive".into())),
                (None, false, _) => return Err(ProjectError::Usage("choose --auto or --decisions FILE".into())),
            };
            Ok(print_report(&report))
        }
        Command::Validate => Ok(print_report(&stages::validate_all(&Project::open(root)?))),
        Command::Mine { lu, all } => {
            let p = Project::open(root)?;
            if lu.is_none() && !all {
                return Err(ProjectError::Usage("give a lexical unit or --all".into()));
            }
            let (report, mined) = stages::mine(&p, lu.as_deref())?;
            for (lu, groups) in &mined {
                for g in groups {
                    let rules: Vec<String> = g.triples().iter().map(|(fe, pt, gf)| format!("{fe}:{pt}:{gf}")).collect();
                    out!("{lu}\t{}\t{}\t{}\tsupport={}\t{}", g.group_id, g.pattern, g.voice, g.support, rules.join(" "));
                }
            }
            Ok(print_report(&report))
        }
        Command::Export { layers, lu } => {
            let layers = layers.as_deref().map(parse_layers).transpose()?;
            let p = Project::open(root)?;
            Ok(print_report(&stages::export(&p, layers.as_deref(), lu.as_deref())?))
        }
        Command::Serve { port, host } => {
            let p = Project::open(root)?;
            let addr = SocketAddr::new(host, port);
            let rt = tokio::runtime::Runtime::new().map_err(|e| ProjectError::Io { path: addr.to_string(), message: e.to_string() })?;
            eprintln!("serving {} on http://{addr}", root.display());
            rt.block_on(framebench_service::serve(p, addr)).map_err(|e| ProjectError::Io { path: addr.to_string(), message: e.to_string() })?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.project, cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
