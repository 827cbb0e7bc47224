//! The `semiom` command line.
//!
//! Exit status is 0 when everything is fine, 1 when the tool ran and found
//! problems (validation errors, homomorphism counterexamples, a rejected
//! scripted move), and 2 for usage and I/O errors.

mod outline;

use std::ffi::OsString;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use semiom_core::algebra::{Bindings, NodeId, Value, Workspace};
use semiom_core::anchor::{check_homomorphism, CheckOptions, SlotKind};
use semiom_core::bundled;
use semiom_core::conversation::{
    transcript_to_records, Actor, ConversationError, Move, MoveKind, Session,
};
use semiom_core::manifest::render;
use semiom_core::pack::{parse_pack, LocalePack, PackError, Severity};

pub use outline::outline;

/// Directory searched for `<name>.json` when a pack argument is not a path.
pub const PACK_DIR_VAR: &str = "SEMIOM_PACK_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Human,
    Machine,
}

#[derive(Debug, Parser)]
#[command(name = "semiom", version, about = "Validate, check and drive semiotic locale packs")]
struct Cli {
    /// Output style: readable text, or one JSON report on stdout.
    #[arg(long, value_enum, global = true, default_value_t = Format::Human)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the static pack checks.
    Validate {
        /// Pack file, or a name looked up in $SEMIOM_PACK_DIR and then among bundled packs.
        pack: String,
    },
    /// Check that every action's program realizes its declared effects on
    /// all workspaces up to a size.
    Check {
        pack: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        max_nodes: u64,
        #[arg(long, default_value_t = 16)]
        binding_budget: usize,
    },
    /// Hold a conversation, interactively or from a script.
    Session {
        pack: String,
        /// JSON file with a list of moves, or `{"workspace": ..., "moves": [...]}`.
        #[arg(long)]
        script: Option<PathBuf>,
        /// Write the final render tree as JSON to this file.
        #[arg(long)]
        export_render: Option<PathBuf>,
        /// Manifest to render with; the pack's first by default.
        #[arg(long)]
        manifest: Option<String>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Findings(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Findings(_) => 1,
            Failure::Usage(_) | Failure::Io(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Io(_) => "io",
            Failure::Findings(_) => "findings",
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Findings(m) => f.write_str(m),
        }
    }
}

/// What a command produced: an exit code, a JSON report and the text shown
/// in human mode.
struct Outcome {
    code: u8,
    report: Json,
    text: String,
}

fn status(code: u8) -> &'static str {
    match code {
        0 => "ok",
        1 => "findings",
        _ => "error",
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let machine_requested = args.windows(2).any(|w| w[0] == "--format" && w[1] == "machine")
        || args.iter().any(|a| a == "--format=machine");
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{err}");
                return 0;
            }
            let failure = Failure::Usage(err.to_string());
            return finish(
                if machine_requested { Format::Machine } else { Format::Human },
                None,
                Err(failure),
                stdout,
                stderr,
            );
        }
    };
    let (name, result) = match cli.command {
        Command::Validate { pack } => ("validate", cmd_validate(&pack)),
        Command::Check { pack, max_nodes, binding_budget } => {
            ("check", cmd_check(&pack, max_nodes as usize, binding_budget))
        }
        Command::Session { pack, script, export_render, manifest } => (
            "session",
            cmd_session(&pack, script.as_deref(), export_render.as_deref(), manifest.as_deref(), cli.format, stdin, stdout),
        ),
    };
    finish(cli.format, Some(name), result, stdout, stderr)
}

fn finish(
    format: Format,
    command: Option<&str>,
    result: Result<Outcome, Failure>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> u8 {
    let code = match &result {
        Ok(o) => o.code,
        Err(f) => f.exit_code(),
    };
    match format {
        Format::Machine => {
            let mut report = json!({ "command": command, "exit_code": code, "status": status(code) });
            match result {
                Ok(o) => {
                    if let (Json::Object(into), Json::Object(from)) = (&mut report, o.report) {
                        into.extend(from);
                    }
                }
                Err(f) => report["error"] = json!({ "kind": f.kind(), "message": f.to_string() }),
            }
            let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
        }
        Format::Human => match result {
            Ok(o) => {
                let _ = write!(stdout, "{}", o.text);
            }
            Err(f) => {
                let _ = writeln!(stderr, "semiom: {f}");
            }
        },
    }
    code
}

/// Resolves a pack argument: an existing file, then `$SEMIOM_PACK_DIR/<arg>.json`,
/// then a bundled pack id.
pub fn locate_pack(arg: &str) -> Result<PackSource, String> {
    let path = Path::new(arg);
    if path.is_file() {
        return Ok(PackSource::File(path.to_owned()));
    }
    if let Some(dir) = std::env::var_os(PACK_DIR_VAR) {
        let candidate = Path::new(&dir).join(format!("{arg}.json"));
        if candidate.is_file() {
            return Ok(PackSource::File(candidate));
        }
    }
    if bundled::by_id(arg).is_some() {
        return Ok(PackSource::Bundled(arg.to_owned()));
    }
    Err(format!("no pack file or bundled pack named `{arg}`"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PackSource {
    File(PathBuf),
    Bundled(String),
}

enum Loaded {
    Pack(Arc<LocalePack>),
    Unparsable(PackError),
}

fn load(arg: &str) -> Result<Loaded, Failure> {
    match locate_pack(arg).map_err(Failure::Io)? {
        PackSource::Bundled(id) => Ok(Loaded::Pack(bundled::by_id(&id).expect("located"))),
        PackSource::File(path) => {
            let bytes = std::fs::read(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            Ok(match parse_pack(&bytes) {
                Ok(p) => Loaded::Pack(Arc::new(p)),
                Err(e) => Loaded::Unparsable(e),
            })
        }
    }
}

fn load_strict(arg: &str) -> Result<Arc<LocalePack>, Failure> {
    match load(arg)? {
        Loaded::Pack(p) => Ok(p),
        Loaded::Unparsable(e) => Err(Failure::Io(format!("{arg}: {e}"))),
    }
}

fn cmd_validate(arg: &str) -> Result<Outcome, Failure> {
    let pack = match load(arg)? {
        Loaded::Pack(p) => p,
        Loaded::Unparsable(e) => {
            return Ok(Outcome {
                code: 1,
                report: json!({ "pack": arg, "parse_error": e.to_string(), "findings": [] }),
                text: format!("{arg}: {e}\n"),
            })
        }
    };
    let report = pack.validate();
    let code = if report.has_errors() { 1 } else { 0 };
    let mut text = String::new();
    for f in &report.findings {
        let tag = match f.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        text.push_str(&format!("{tag}[{}] {}: {}\n", f.code, f.path, f.message));
    }
    let errors = report.errors().count();
    let warnings = report.warnings().count();
    text.push_str(&format!("{}: {errors} error(s), {warnings} warning(s)\n", pack.meta.id));
    Ok(Outcome {
        code,
        report: json!({ "pack": pack.meta.id, "findings": report.findings, "errors": errors, "warnings": warnings }),
        text,
    })
}

fn cmd_check(arg: &str, max_nodes: usize, budget: usize) -> Result<Outcome, Failure> {
    let pack = load_strict(arg)?;
    let mut options = CheckOptions::new(max_nodes);
    options.binding_budget = budget;
    let report = check_homomorphism(&pack.anchor, options).map_err(|e| Failure::Usage(e.to_string()))?;
    let code = if report.passed() { 0 } else { 1 };
    let mut text = format!(
        "{}: {} states, {} checks, {} counterexample(s)\n",
        pack.meta.id,
        report.states,
        report.checks,
        report.failures.len()
    );
    let failures: Vec<Json> = report
        .failures
        .iter()
        .map(|cx| {
            let binding: Vec<String> = cx.binding.iter().map(|(k, v)| format!("{k}={v}")).collect();
            text.push_str(&format!(
                "counterexample: action `{}` at {} with {{{}}}\n  violated: {}\n  state: {}\n",
                cx.action,
                cx.focus,
                binding.join(", "),
                cx.clause,
                cx.state
            ));
            json!({
                "action": cx.action,
                "focus": cx.focus,
                "binding": cx.binding,
                "clause": cx.clause,
                "state": serde_json::from_str::<Json>(&cx.state).unwrap_or(Json::String(cx.state.clone())),
            })
        })
        .collect();
    Ok(Outcome {
        code,
        report: json!({
            "pack": pack.meta.id,
            "max_nodes": max_nodes,
            "states": report.states,
            "checks": report.checks,
            "counterexamples": failures,
        }),
        text,
    })
}

/// A session script: either a bare list of moves or an object that may also
/// give the starting workspace.
fn read_script(path: &Path) -> Result<(Workspace, Vec<Move>), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let doc: Json = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let (ws, moves) = match doc {
        Json::Array(_) => (Workspace::new(), doc),
        Json::Object(mut map) => {
            let ws = match map.remove("workspace") {
                Some(w) => serde_json::from_value(w).map_err(|e| Failure::Usage(format!("workspace: {e}")))?,
                None => Workspace::new(),
            };
            let moves = map.remove("moves").unwrap_or(Json::Array(Vec::new()));
            if let Some(extra) = map.keys().next() {
                return Err(Failure::Usage(format!("{}: unknown field `{extra}`", path.display())));
            }
            (ws, moves)
        }
        _ => return Err(Failure::Usage(format!("{}: expected a list of moves", path.display()))),
    };
    let moves: Vec<Move> = serde_json::from_value(moves).map_err(|e| Failure::Usage(format!("moves: {e}")))?;
    Ok((ws, moves))
}

fn session_report(s: &Session) -> Json {
    json!({
        "pack": s.pack().meta.id,
        "phase": s.phase(),
        "transcript": transcript_to_records(s.transcript()),
        "workspace": serde_json::to_value(s.workspace()).expect("workspaces serialize"),
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_session(
    arg: &str,
    script: Option<&Path>,
    export: Option<&Path>,
    manifest: Option<&str>,
    format: Format,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
) -> Result<Outcome, Failure> {
    let pack = load_strict(arg)?;
    if let Some(id) = manifest {
        if pack.manifest(id).is_none() {
            return Err(Failure::Usage(format!("pack `{}` has no manifest `{id}`", pack.meta.id)));
        }
    }
    let (ws0, moves) = match script {
        Some(path) => {
            let (ws, moves) = read_script(path)?;
            (ws, Some(moves))
        }
        None => (Workspace::new(), None),
    };
    let session = match Session::new(pack.clone(), ws0) {
        Ok(s) => s,
        Err(ConversationError::InvalidPack(report)) => {
            let first = report.errors().next().map(ToString::to_string).unwrap_or_default();
            return Err(Failure::Findings(format!("pack `{}` does not validate: {first}", pack.meta.id)));
        }
        Err(e) => return Err(Failure::Findings(e.to_string())),
    };
    let draw = |s: &Session| -> Result<String, Failure> {
        let tree = render(s, &pack, manifest, None).map_err(|e| Failure::Findings(e.to_string()))?;
        Ok(outline(&tree))
    };

    let (session, mut text, error) = match moves {
        Some(moves) => run_script(session, moves, &draw)?,
        None => {
            let s = interactive(session, stdin, stdout, &draw, format)?;
            (s, String::new(), None)
        }
    };

    let tree = render(&session, &pack, manifest, None).map_err(|e| Failure::Findings(e.to_string()))?;
    if let Some(path) = export {
        let body = serde_json::to_string_pretty(&tree).expect("render trees serialize") + "\n";
        std::fs::write(path, body).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    text.push_str("final workspace:\n");
    text.push_str(&session.workspace().to_pretty_json());
    text.push('\n');
    let mut report = session_report(&session);
    let code = match error {
        Some(e) => {
            text.push_str(&format!("rejected: {e}\n"));
            report["rejected"] = json!(e);
            1
        }
        None => 0,
    };
    Ok(Outcome { code, report, text })
}

/// Plays a script. System moves in the script are compared with the
/// engine's own replies, so a recorded transcript replays verbatim.
fn run_script(
    mut session: Session,
    moves: Vec<Move>,
    draw: &dyn Fn(&Session) -> Result<String, Failure>,
) -> Result<(Session, String, Option<String>), Failure> {
    let mut text = String::new();
    let mut expected: std::collections::VecDeque<Move> = Default::default();
    for (i, mv) in moves.into_iter().enumerate() {
        if mv.actor == Actor::System {
            match expected.pop_front() {
                Some(reply) if reply == mv => continue,
                _ => return Ok((session, text, Some(format!("move {i}: system move does not match the engine's reply")))),
            }
        }
        // Scripts may leave the system's replies out.
        expected.clear();
        match session.submit_move(mv) {
            Ok((next, replies)) => {
                session = next;
                expected.extend(replies);
                text.push_str(&draw(&session)?);
            }
            Err(e) => return Ok((session, text, Some(format!("move {i}: {e}")))),
        }
    }
    Ok((session, text, None))
}

fn parse_binding(kind: SlotKind, raw: &str) -> Result<Value, String> {
    match kind {
        SlotKind::Name => Ok(Value::Name(raw.to_owned())),
        SlotKind::Bytes => Ok(Value::Bytes(raw.as_bytes().to_vec())),
        SlotKind::NodeRef => raw
            .trim_start_matches('#')
            .parse::<u64>()
            .map(|n| Value::Node(NodeId(n)))
            .map_err(|_| format!("`{raw}` is not a node id")),
    }
}

const HELP: &str = "commands: summon | need <action> [node] | detail <slot>=<value>... | close | moves | quit";

/// Line-oriented conversation on stdin.
fn interactive(
    mut session: Session,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    draw: &dyn Fn(&Session) -> Result<String, Failure>,
    format: Format,
) -> Result<Session, Failure> {
    let human = format == Format::Human;
    let say = |out: &mut dyn Write, s: &str| {
        if human {
            let _ = write!(out, "{s}");
            let _ = out.flush();
        }
    };
    say(stdout, &format!("{HELP}\n"));
    say(stdout, &draw(&session)?);
    let mut line = String::new();
    loop {
        say(stdout, "> ");
        line.clear();
        if stdin.read_line(&mut line).map_err(|e| Failure::Io(e.to_string()))? == 0 {
            break;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let mv = match words.as_slice() {
            [] => continue,
            ["quit" | "exit"] => break,
            ["help"] => {
                say(stdout, &format!("{HELP}\n"));
                continue;
            }
            ["moves"] => {
                let legal = serde_json::to_string_pretty(&session.legal_moves()).expect("templates serialize");
                say(stdout, &format!("{legal}\n"));
                continue;
            }
            ["summon"] => Move::summon(),
            ["close"] => Move::close(),
            ["need", action] => Move::state_need(action, None),
            ["need", action, node] => match node.trim_start_matches('#').parse::<u64>() {
                Ok(n) => Move::state_need(action, Some(NodeId(n))),
                Err(_) => {
                    say(stdout, &format!("`{node}` is not a node id\n"));
                    continue;
                }
            },
            ["detail", pairs @ ..] => {
                let action = session.pending_need().and_then(|p| session.pack().anchor.action(&p.action));
                let mut bindings = Bindings::new();
                let mut problem = None;
                for pair in pairs {
                    let Some((slot, raw)) = pair.split_once('=') else {
                        problem = Some(format!("expected <slot>=<value>, got `{pair}`"));
                        break;
                    };
                    let kind = action.and_then(|a| a.slot(slot)).map(|s| s.kind).unwrap_or(SlotKind::Name);
                    match parse_binding(kind, raw) {
                        Ok(v) => {
                            bindings.insert(slot.to_owned(), v);
                        }
                        Err(e) => {
                            problem = Some(e);
                            break;
                        }
                    }
                }
                if let Some(p) = problem {
                    say(stdout, &format!("{p}\n"));
                    continue;
                }
                Move::provide_detail(bindings)
            }
            _ => {
                say(stdout, &format!("{HELP}\n"));
                continue;
            }
        };
        match session.submit_move(mv) {
            Ok((next, replies)) => {
                session = next;
                if replies.iter().any(|r| matches!(r.kind, MoveKind::Resolve { .. })) {
                    say(stdout, &format!("{}\n", session.workspace().to_canonical_json()));
                }
                say(stdout, &draw(&session)?);
            }
            Err(e) => say(stdout, &format!("not accepted: {e}\n")),
        }
    }
    Ok(session)
}
