//! `tm`: check, simplify, render, simulate, narrate and measure coverage of
//! Thinging Machine models.
//!
//! Artifacts go to stdout (or `-o`), diagnostics to stderr. Exit codes are
//! those of [`Exit`].

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::{self, IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use tm_core::{
    check_document, document_coverage, infer_mode, narrate_chronology, parse, print_canonical,
    render, simplify_level1, Chronology, Diagnostic, Document, EventId, Format, Mode,
    RenderOptions, Severity, Trace, View,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    /// Parse, validation or semantic failure, or a rejected trace.
    Invalid = 1,
    Usage = 2,
    Io = 3,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Parser)]
#[command(name = "tm", version, about = "Thinging Machine model toolchain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a model, or every .tm file under a directory
    Check {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Strict)]
        mode: ModeArg,
    },
    /// Remove release/transfer/receive chains and print the result
    Simplify {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Emit DOT or SVG for a view
    Render {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ViewArg::Static)]
        view: ViewArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Dot)]
        format: FormatArg,
        /// Hide create and process labels
        #[arg(long)]
        implicit: bool,
        /// Comma-separated events to overlay in the dynamic view
        #[arg(long)]
        events: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide, step or enumerate chronology traces
    Simulate {
        file: PathBuf,
        #[command(flatten)]
        how: SimulateHow,
        #[arg(long, default_value_t = 2)]
        max_loop: usize,
        #[arg(long, default_value_t = 1000)]
        max_traces: usize,
    },
    /// Print the chronology as prose
    Narrate { file: PathBuf },
    /// Report how much of the model's source text is annotated
    Coverage { file: PathBuf },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct SimulateHow {
    /// Comma-separated trace to decide
    #[arg(long)]
    trace: Option<String>,
    /// List traces with loops unrolled up to --max-loop times
    #[arg(long)]
    enumerate: bool,
    /// Comma-separated prefix whose possible next events are listed
    #[arg(long)]
    next: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Strict,
    Simplified,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ViewArg {
    Static,
    Dynamic,
    Chronology,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Dot,
    Svg,
}

/// Runs `tm` with `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> Exit
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                Exit::Usage
            } else {
                let _ = out.write_all(text.as_bytes());
                Exit::Success
            };
        }
    };
    let mut ctx = Ctx {
        out,
        err,
        color: color_enabled(),
    };
    match ctx.dispatch(cli.command) {
        Ok(code) => code,
        Err(Failure(code)) => code,
    }
}

fn color_enabled() -> bool {
    match std::env::var("TM_COLOR").as_deref() {
        Ok("1") => true,
        Ok("0") => false,
        _ => io::stderr().is_terminal(),
    }
}

/// Early exit with a code; the message has already been written.
struct Failure(Exit);

type Step<T> = Result<T, Failure>;

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    color: bool,
}

impl Ctx<'_> {
    fn dispatch(&mut self, command: Command) -> Step<Exit> {
        match command {
            Command::Check { path, mode } => self.check(&path, mode),
            Command::Simplify { file, output } => {
                let doc = self.load_valid(&file)?;
                let (simple, _) = simplify_level1(&doc).map_err(|e| self.fail(&file, &e))?;
                self.emit(&print_canonical(&simple), output.as_deref())
            }
            Command::Render {
                file,
                view,
                format,
                implicit,
                events,
                output,
            } => {
                let doc = self.load_valid(&file)?;
                let opts = RenderOptions {
                    view: match view {
                        ViewArg::Static => View::Static,
                        ViewArg::Dynamic => View::Dynamic,
                        ViewArg::Chronology => View::Chronology,
                    },
                    format: match format {
                        FormatArg::Dot => Format::Dot,
                        FormatArg::Svg => Format::Svg,
                    },
                    implicit_notation: implicit,
                    event_filter: events.map(|s| {
                        Trace::parse(&s)
                            .0
                            .into_iter()
                            .collect::<BTreeSet<EventId>>()
                    }),
                };
                let text = render(&doc, &opts).map_err(|e| self.fail(&file, &e))?;
                self.emit(&text, output.as_deref())
            }
            Command::Simulate {
                file,
                how,
                max_loop,
                max_traces,
            } => {
                let doc = self.load_valid(&file)?;
                let chrono = Chronology::from_document(&doc).map_err(|e| self.fail(&file, &e))?;
                self.simulate(&file, &chrono, how, max_loop, max_traces)
            }
            Command::Narrate { file } => {
                let doc = self.load_valid(&file)?;
                let text = narrate_chronology(&doc).map_err(|e| self.fail(&file, &e))?;
                self.emit(&format!("{text}\n"), None)
            }
            Command::Coverage { file } => {
                let doc = self.load_valid(&file)?;
                let Some(rel) = doc.source() else {
                    return Err(self.fail(&file, &"document declares no source text"));
                };
                let base = file.parent().unwrap_or(Path::new("."));
                let source_path = base.join(rel);
                let text = self.read(&source_path)?;
                let report = document_coverage(&doc, &text);
                self.diagnostics(&file, &report.warnings);
                self.emit(&report.to_string(), None)
            }
        }
    }

    fn check(&mut self, path: &Path, mode: ModeArg) -> Step<Exit> {
        let mode = match mode {
            ModeArg::Strict => Mode::Strict,
            ModeArg::Simplified => Mode::Simplified,
        };
        if !path.is_dir() {
            let doc = self.load(path)?;
            let diags = check_document(&doc, mode);
            self.diagnostics(path, &diags);
            return Ok(if tm_core::diagnostic::has_errors(&diags) {
                Exit::Invalid
            } else {
                Exit::Success
            });
        }
        let mut files: Vec<PathBuf> = walkdir::WalkDir::new(path)
            .sort_by_file_name()
            .into_iter()
            .filter_map(Result::ok)
            .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "tm"))
            .map(|e| e.into_path())
            .collect();
        files.sort();
        let mut worst = Exit::Success;
        for f in files {
            let code = match self.load(&f) {
                Err(Failure(code)) => code,
                Ok(doc) => {
                    let diags = check_document(&doc, mode);
                    self.diagnostics(&f, &diags);
                    if tm_core::diagnostic::has_errors(&diags) {
                        Exit::Invalid
                    } else {
                        Exit::Success
                    }
                }
            };
            worst = worse(worst, code);
        }
        Ok(worst)
    }

    fn simulate(
        &mut self,
        file: &Path,
        chrono: &Chronology,
        how: SimulateHow,
        max_loop: usize,
        max_traces: usize,
    ) -> Step<Exit> {
        if let Some(text) = how.trace {
            let trace = Trace::parse(&text);
            let accepted = chrono.accepts(&trace).map_err(|e| self.fail(file, &e))?;
            if accepted {
                self.emit("ACCEPTED\n", None)
            } else {
                let k = chrono
                    .accepted_prefix_len(&trace)
                    .map_err(|e| self.fail(file, &e))?;
                self.emit(&format!("REJECTED after {k} events\n"), None)?;
                Ok(Exit::Invalid)
            }
        } else if let Some(text) = how.next {
            let prefix = Trace::parse(&text);
            let k = chrono
                .accepted_prefix_len(&prefix)
                .map_err(|e| self.fail(file, &e))?;
            if k < prefix.len() {
                self.emit(&format!("REJECTED after {k} events\n"), None)?;
                return Ok(Exit::Invalid);
            }
            let mut text = String::new();
            for e in chrono
                .next_events(&prefix)
                .map_err(|e| self.fail(file, &e))?
            {
                text.push_str(e.as_str());
                text.push('\n');
            }
            if chrono.accepts(&prefix).map_err(|e| self.fail(file, &e))? {
                text.push_str("END\n");
            }
            self.emit(&text, None)
        } else {
            let found = chrono
                .enumerate(max_loop, max_traces)
                .map_err(|e| self.usage(&e))?;
            let mut text = String::new();
            for t in &found.traces {
                text.push_str(&t.to_string());
                text.push('\n');
            }
            if found.truncated {
                self.note(&format!("stopped after {max_traces} traces"));
            }
            self.emit(&text, None)
        }
    }

    fn read(&mut self, path: &Path) -> Step<String> {
        fs::read_to_string(path).map_err(|e| {
            self.note(&format!("cannot read {}: {e}", path.display()));
            Failure(Exit::Io)
        })
    }

    fn load(&mut self, path: &Path) -> Step<Document> {
        let text = self.read(path)?;
        parse(&text).map_err(|diags| {
            self.diagnostics(path, &diags);
            Failure(Exit::Invalid)
        })
    }

    /// Loads a model and rejects it on validation errors. Models without
    /// release, transfer or receive are checked in simplified mode.
    fn load_valid(&mut self, path: &Path) -> Step<Document> {
        let doc = self.load(path)?;
        let diags = check_document(&doc, infer_mode(&doc));
        self.diagnostics(path, &diags);
        if tm_core::diagnostic::has_errors(&diags) {
            return Err(Failure(Exit::Invalid));
        }
        Ok(doc)
    }

    fn diagnostics(&mut self, path: &Path, diags: &[Diagnostic]) {
        let file = path.display().to_string();
        for d in diags {
            let line = d.render(&file);
            let _ = if self.color {
                let color = match d.severity {
                    Severity::Error => "\x1b[31m",
                    Severity::Warning => "\x1b[33m",
                };
                writeln!(self.err, "{color}{line}\x1b[0m")
            } else {
                writeln!(self.err, "{line}")
            };
        }
    }

    fn note(&mut self, message: &str) {
        let _ = writeln!(self.err, "tm: {message}");
    }

    fn fail(&mut self, path: &Path, e: &dyn std::fmt::Display) -> Failure {
        self.note(&format!("{}: {e}", path.display()));
        Failure(Exit::Invalid)
    }

    fn usage(&mut self, e: &dyn std::fmt::Display) -> Failure {
        self.note(&e.to_string());
        Failure(Exit::Usage)
    }

    fn emit(&mut self, text: &str, output: Option<&Path>) -> Step<Exit> {
        match output {
            Some(path) => fs::write(path, text).map_err(|e| {
                self.note(&format!("cannot write {}: {e}", path.display()));
                Failure(Exit::Io)
            })?,
            None => self.out.write_all(text.as_bytes()).map_err(|e| {
                self.note(&format!("cannot write output: {e}"));
                Failure(Exit::Io)
            })?,
        }
        Ok(Exit::Success)
    }
}

fn worse(a: Exit, b: Exit) -> Exit {
    let rank = |e: Exit| match e {
        Exit::Success => 0,
        Exit::Invalid => 1,
        Exit::Usage => 2,
        Exit::Io => 3,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}
