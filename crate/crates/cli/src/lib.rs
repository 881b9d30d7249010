//! The `cosmo` command. [`run`] is the whole program minus process
//! plumbing, so tests can drive it with argument vectors and fixed input.

mod dot;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use cosmo::algebra::{self, BindingSet};
use cosmo::eval::{check_link, eval_constructor_in, FunctionRegistry, KnowledgeGraph};
use cosmo::fol::{self, Style};
use cosmo::sparql::{self, CompileOptions, EndpointConfig};
use cosmo::validate::{self, ItemCatalog, Severity};
use cosmo::*;

pub use dot::export_dot;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Environment variable naming the default SPARQL endpoint.
pub const ENDPOINT_ENV: &str = "COSMO_ENDPOINT";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandOutcome {
    fn ok(stdout: String) -> Self {
        CommandOutcome { exit_code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn fail(exit_code: i32, stderr: impl Into<String>) -> Self {
        let mut stderr = stderr.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        CommandOutcome { exit_code, stdout: String::new(), stderr }
    }
}

#[derive(Parser, Debug)]
#[command(name = "cosmo", version, about = "Parse, check and run CoSMo constructors")]
struct Cli {
    /// Keyword table to use instead of the built-in one.
    #[arg(long, global = true, value_name = "CSV")]
    lexicon: Option<PathBuf>,
    /// Notation of the input; detected when absent.
    #[arg(long = "from", global = true, value_enum)]
    from_syntax: Option<Notation>,
    /// Keyword language of the input; detected when absent.
    #[arg(long = "from-lang", global = true, value_name = "TAG")]
    from_lang: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Notation {
    Long,
    Short,
}

impl From<Notation> for SyntaxKind {
    fn from(n: Notation) -> Self {
        match n {
            Notation::Long => SyntaxKind::Longform,
            Notation::Short => SyntaxKind::Shorthand,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the model as JSON.
    Parse { file: Option<PathBuf> },
    /// Validate the model.
    Check {
        file: Option<PathBuf>,
        /// Known items, one per line.
        #[arg(long, conflicts_with_all = ["open_world", "endpoint"])]
        catalog: Option<PathBuf>,
        /// Accept every item (the default).
        #[arg(long)]
        open_world: bool,
        /// Look items up at a SPARQL endpoint.
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long, default_value_t = 30_000)]
        timeout_ms: u64,
    },
    /// Re-render in a notation and language.
    Fmt {
        file: Option<PathBuf>,
        #[arg(long, value_enum)]
        to: Option<Notation>,
        #[arg(long, default_value = "en")]
        lang: String,
    },
    /// Re-render in another keyword language, keeping the notation.
    Translate {
        file: Option<PathBuf>,
        #[arg(long)]
        lang: String,
        /// Append item labels from `--graph` as comments.
        #[arg(long, requires = "graph")]
        resolve_labels: bool,
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Print the first-order theory.
    Fol {
        file: Option<PathBuf>,
        #[arg(long)]
        unicode: bool,
    },
    /// Evaluate constructors over a local graph.
    Eval {
        file: Option<PathBuf>,
        #[arg(long)]
        graph: PathBuf,
        /// Function manifest (`ZITEM ARITY BUILTIN` per line).
        #[arg(long)]
        functions: Option<PathBuf>,
        #[arg(long, default_value = cosmo::eval::DEFAULT_LANG)]
        lang: String,
        /// Only this constructor.
        #[arg(long)]
        constructor: Option<String>,
    },
    /// Compile constructors to SPARQL, optionally running them.
    Sparql {
        file: Option<PathBuf>,
        #[arg(long)]
        constructor: Option<String>,
        #[arg(long)]
        endpoint: Option<String>,
        /// Run the queries at `--endpoint` or the endpoint in the environment.
        #[arg(long)]
        execute: bool,
        #[arg(long, default_value_t = 60_000)]
        timeout_ms: u64,
        #[arg(long, default_value_t = 10_000)]
        max_rows: usize,
        #[arg(long, default_value = "en")]
        label_lang: String,
    },
    /// Drop the instantiations of an instance constructor.
    Generalize {
        file: Option<PathBuf>,
        #[arg(long)]
        constructor: Option<String>,
    },
    /// Pin types of a type constructor to instances.
    Instantiate {
        file: Option<PathBuf>,
        #[arg(long)]
        constructor: Option<String>,
        /// `TYPE=INSTANCE`, repeatable.
        #[arg(long = "bind", value_name = "T=I", required = true)]
        bindings: Vec<String>,
    },
    /// Concatenate the definitions of two constructors.
    Merge {
        a: String,
        b: String,
        file: Option<PathBuf>,
        #[arg(long)]
        name: String,
    },
    /// Graphviz rendering of the model.
    Dot { file: Option<PathBuf> },
}

/// Runs the command line, reading standard input only when a command
/// needs it and no file was given.
pub fn run<I, T>(argv: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with_stdin(argv, &mut std::io::stdin())
}

pub fn run_with_stdin<I, T>(argv: I, stdin: &mut dyn Read) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CommandOutcome::fail(EXIT_USAGE, text)
            } else {
                CommandOutcome::ok(text)
            };
        }
    };
    match dispatch(cli, stdin) {
        Ok(o) => o,
        Err(f) => CommandOutcome::fail(f.code, f.message),
    }
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn io(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_IO, message: message.into() }
}

fn findings(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_FINDINGS, message: message.into() }
}

struct Ctx<'a> {
    lex: Lexicon,
    from_syntax: Option<SyntaxKind>,
    from_lang: Option<String>,
    stdin: &'a mut dyn Read,
    stderr: String,
}

impl Ctx<'_> {
    fn read(&mut self, file: Option<&Path>) -> Result<String, Failure> {
        match file {
            Some(p) if p != Path::new("-") => {
                std::fs::read_to_string(p).map_err(|e| io(format!("{}: {e}", p.display())))
            }
            _ => {
                let mut s = String::new();
                self.stdin.read_to_string(&mut s).map_err(|e| io(format!("stdin: {e}")))?;
                Ok(s)
            }
        }
    }

    fn load(&mut self, file: Option<&Path>) -> Result<Parsed, Failure> {
        let text = self.read(file)?;
        let parsed = parse(&text, self.from_syntax, self.from_lang.as_deref(), &self.lex).map_err(|e| match e {
            ParseError::Lexicon(l) => usage(l.to_string()),
            e => findings(e.to_string()),
        })?;
        for w in &parsed.warnings {
            self.stderr.push_str(&format!("{w}\n"));
        }
        Ok(parsed)
    }

    fn render(&self, model: &Model, syntax: SyntaxKind, lang: &str) -> Result<String, Failure> {
        serialize(model, syntax, lang, &self.lex).map_err(|e| usage(e.to_string()))
    }

    fn done(self, stdout: String) -> CommandOutcome {
        CommandOutcome { exit_code: EXIT_OK, stdout, stderr: self.stderr }
    }
}

fn out_lang(p: &Parsed) -> &str {
    p.lang.as_deref().unwrap_or("en")
}

/// The constructor called `name`, or the only one satisfying `fits`.
fn pick<'m>(
    model: &'m Model,
    name: Option<&str>,
    fits: impl Fn(&Constructor) -> bool,
) -> Result<&'m Constructor, Failure> {
    if let Some(n) = name {
        return model
            .constructors()
            .find(|c| c.name.as_str() == n)
            .ok_or_else(|| usage(format!("no constructor named `{n}`")));
    }
    let cands: Vec<&Constructor> = model.constructors().filter(|c| fits(c)).collect();
    match cands[..] {
        [c] => Ok(c),
        [] => Err(usage("no suitable constructor in the input")),
        _ => {
            let names: Vec<&str> = cands.iter().map(|c| c.name.as_str()).collect();
            Err(usage(format!("several candidates ({}); choose one with --constructor", names.join(", "))))
        }
    }
}

fn endpoint_url(flag: Option<&str>) -> Result<Option<url::Url>, Failure> {
    let raw = match flag {
        Some(u) => Some(u.to_string()),
        None => std::env::var(ENDPOINT_ENV).ok().filter(|s| !s.is_empty()),
    };
    raw.map(|u| url::Url::parse(&u).map_err(|e| usage(format!("bad endpoint `{u}`: {e}")))).transpose()
}

fn dispatch(cli: Cli, stdin: &mut dyn Read) -> Result<CommandOutcome, Failure> {
    let lex = match &cli.lexicon {
        Some(p) => Lexicon::from_path(p).map_err(|e| io(format!("{}: {e}", p.display())))?,
        None => Lexicon::builtin(),
    };
    let mut cx = Ctx {
        lex,
        from_syntax: cli.from_syntax.map(Into::into),
        from_lang: cli.from_lang,
        stdin,
        stderr: String::new(),
    };

    match cli.command {
        Command::Parse { file } => {
            let p = cx.load(file.as_deref())?;
            let json = serde_json::to_string_pretty(&p.model).map_err(|e| io(e.to_string()))?;
            Ok(cx.done(json + "\n"))
        }

        Command::Check { file, catalog, open_world: _, endpoint, timeout_ms } => {
            let p = cx.load(file.as_deref())?;
            let catalog = if let Some(path) = catalog {
                ItemCatalog::from_path(&path).map_err(|e| io(format!("{}: {e}", path.display())))?
            } else if let Some(url) = endpoint.map(|e| endpoint_url(Some(&e))).transpose()?.flatten() {
                let mut cfg = EndpointConfig::new(url);
                cfg.timeout = Duration::from_millis(timeout_ms);
                sparql::catalog_from_endpoint(p.model.items(), &cfg).map_err(|e| io(e.to_string()))?
            } else {
                ItemCatalog::open_world()
            };
            let report = validate::validate(&p.model, &catalog);
            let mut out = String::new();
            for f in report.findings.iter().chain(&report.notes) {
                out.push_str(&format!("{f}\n"));
            }
            let code = if report.findings.iter().any(|f| f.severity == Severity::Error) {
                EXIT_FINDINGS
            } else {
                EXIT_OK
            };
            Ok(CommandOutcome { exit_code: code, stdout: out, stderr: cx.stderr })
        }

        Command::Fmt { file, to, lang } => {
            let p = cx.load(file.as_deref())?;
            let syntax = to.map_or(p.syntax, Into::into);
            let text = cx.render(&p.model, syntax, &lang)?;
            Ok(cx.done(text))
        }

        Command::Translate { file, lang, resolve_labels, graph } => {
            let p = cx.load(file.as_deref())?;
            let mut text = cx.render(&p.model, p.syntax, &lang)?;
            if resolve_labels {
                let path = graph.expect("clap enforces --graph");
                let g = KnowledgeGraph::from_path(&path).map_err(|e| io(format!("{}: {e}", path.display())))?;
                let mut seen = std::collections::BTreeSet::new();
                let mut notes = String::new();
                for i in p.model.items() {
                    if seen.insert(i) {
                        if let Some(l) = g.label(i, &lang) {
                            notes.push_str(&format!("// {i}: {l}\n"));
                        }
                    }
                }
                if !notes.is_empty() {
                    text.push('\n');
                    text.push_str(&notes);
                }
            }
            Ok(cx.done(text))
        }

        Command::Fol { file, unicode } => {
            let p = cx.load(file.as_deref())?;
            let style = if unicode { Style::Unicode } else { Style::Ascii };
            let text = fol::translate(&p.model).render(&p.model, style);
            Ok(cx.done(text))
        }

        Command::Eval { file, graph, functions, lang, constructor } => {
            let p = cx.load(file.as_deref())?;
            let g = KnowledgeGraph::from_path(&graph).map_err(|e| io(format!("{}: {e}", graph.display())))?;
            let fr = match functions {
                Some(path) => FunctionRegistry::from_path(&path).map_err(|e| io(format!("{}: {e}", path.display())))?,
                None => FunctionRegistry::with_defaults(),
            };
            let mut out = String::new();
            let chosen: Vec<&Constructor> = match &constructor {
                Some(n) => vec![pick(&p.model, Some(n), |_| true)?],
                None => p.model.constructors().collect(),
            };
            for c in chosen {
                out.push_str(&eval_constructor_in(c, &g, &fr, &lang).report());
            }
            if constructor.is_none() {
                for l in p.model.links() {
                    let verdict = match check_link(&p.model, l, &g, &fr) {
                        Ok(true) => "holds".to_string(),
                        Ok(false) => "fails".to_string(),
                        Err(e) => format!("unresolved ({e})"),
                    };
                    out.push_str(&format!("link {}({}, {}) {verdict}\n", l.kind.english(), l.from, l.to));
                }
            }
            Ok(cx.done(out))
        }

        Command::Sparql { file, constructor, endpoint, execute, timeout_ms, max_rows, label_lang } => {
            let p = cx.load(file.as_deref())?;
            let opts = CompileOptions { label_lang, ..CompileOptions::default() };
            let chosen: Vec<&Constructor> = match &constructor {
                Some(n) => vec![pick(&p.model, Some(n), |_| true)?],
                None => p.model.constructors().collect(),
            };
            let mut out = String::new();
            let url = if execute {
                let u = endpoint_url(endpoint.as_deref())?;
                Some(u.ok_or_else(|| usage(format!("--execute needs --endpoint or {ENDPOINT_ENV}")))?)
            } else {
                None
            };
            for (k, c) in chosen.into_iter().enumerate() {
                let q = sparql::compile(c, &opts);
                if k > 0 {
                    out.push('\n');
                }
                let Some(url) = &url else {
                    out.push_str(&q.text);
                    continue;
                };
                let mut cfg = EndpointConfig::new(url.clone());
                cfg.timeout = Duration::from_millis(timeout_ms);
                cfg.max_rows = max_rows;
                cfg.options = opts.clone();
                let res = sparql::execute(&q.text, &cfg).map_err(|e| io(e.to_string()))?;
                out.push_str(&format!("# {}\n", c.name));
                out.push_str(&res.vars.iter().map(|v| format!("?{v}")).collect::<Vec<_>>().join("\t"));
                out.push('\n');
                for row in &res.rows {
                    let cells: Vec<String> = res
                        .vars
                        .iter()
                        .map(|v| match row.get(v) {
                            Some(sparql::SparqlValue::Item(i)) => i.to_string(),
                            Some(sparql::SparqlValue::Iri(s)) => format!("<{s}>"),
                            Some(sparql::SparqlValue::Literal { value, .. }) => format!("{value:?}"),
                            None => String::new(),
                        })
                        .collect();
                    out.push_str(&cells.join("\t"));
                    out.push('\n');
                }
                if res.truncated {
                    cx.stderr.push_str(&format!("{}: results truncated at {max_rows} rows\n", c.name));
                }
            }
            Ok(cx.done(out))
        }

        Command::Generalize { file, constructor } => {
            let p = cx.load(file.as_deref())?;
            let c = pick(&p.model, constructor.as_deref(), |c| c.kind == ConstructorKind::Instance)?;
            let g = algebra::generalize(c).map_err(|e| findings(e.to_string()))?;
            let text = cx.render(&Model::new(vec![Declaration::Constructor(g)]), p.syntax, out_lang(&p))?;
            Ok(cx.done(text))
        }

        Command::Instantiate { file, constructor, bindings } => {
            let p = cx.load(file.as_deref())?;
            let mut pairs = Vec::new();
            for b in &bindings {
                let (t, i) = b.split_once('=').ok_or_else(|| usage(format!("binding `{b}` is not T=I")))?;
                let t: ItemId = t.trim().parse().map_err(|e| usage(format!("binding `{b}`: {e}")))?;
                let i: ItemId = i.trim().parse().map_err(|e| usage(format!("binding `{b}`: {e}")))?;
                pairs.push((t, i));
            }
            let set = BindingSet::new(pairs).map_err(|e| usage(e.to_string()))?;
            let c = pick(&p.model, constructor.as_deref(), |c| c.kind == ConstructorKind::Type)?;
            let inst = algebra::instantiate(c, &set).map_err(|e| findings(e.to_string()))?;
            let text = cx.render(&Model::new(vec![Declaration::Constructor(inst)]), p.syntax, out_lang(&p))?;
            Ok(cx.done(text))
        }

        Command::Merge { a, b, file, name } => {
            let p = cx.load(file.as_deref())?;
            let ca = pick(&p.model, Some(&a), |_| true)?;
            let cb = pick(&p.model, Some(&b), |_| true)?;
            let name = LocalVar::new(name.as_str()).map_err(|e| usage(format!("bad name `{name}`: {e}")))?;
            let m = algebra::merge(ca, cb, name);
            if !m.renames.is_empty() {
                cx.stderr.push_str(&format!("renamed in {b}: {}\n", m.provenance_note()));
            }
            let text = cx.render(&Model::new(vec![Declaration::Constructor(m.constructor)]), p.syntax, out_lang(&p))?;
            Ok(cx.done(text))
        }

        Command::Dot { file } => {
            let p = cx.load(file.as_deref())?;
            Ok(cx.done(export_dot(&p.model)))
        }
    }
}
