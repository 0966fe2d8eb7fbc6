//! The `nanet` command line.
//!
//! Exit codes: 0 safe (or an empty language), 1 unsafe (non-empty), 2 for
//! errors, exceeded caps and safe verdicts that only hold up to a bound.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::generators::{gen_3sat, CnfFormula};
use crate::lang::format::{parse_cfg, parse_fsa, plain_names, write_cfg, write_fsa};
use crate::lang::{bowtie, enumerate_k_index, k_index_nonempty, support_fsa};
use crate::machine::format::write_machine;
use crate::machine::Limits;
use crate::network::{NetworkInstance, Verdict};
use crate::oracle::{bounded_safety_oracle, explore_bounded, saturate_fsm, ExploreOptions};
use crate::verifier::{self, determinize, read_pair_gadget, verify_bounded, Route, VerifyOptions};

#[derive(Parser, Debug)]
#[command(name = "nanet", version, about = "Safety of leader/contributor networks over a shared register")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Decide safety for any number of contributors.
    Verify {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        #[command(flatten)]
        caps: Caps,
        #[command(flatten)]
        out: Out,
    },
    /// Decide safety when every process makes at most `k` register operations.
    Bounded {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        caps: Caps,
        #[command(flatten)]
        out: Out,
    },
    /// Run an explicit-state engine.
    Oracle {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long, value_enum, default_value_t = OracleMode::Explore)]
        mode: OracleMode,
        /// Contributors (explore) or operations per process (bounded).
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Register operations in total (explore).
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[command(flatten)]
        caps: Caps,
        #[command(flatten)]
        out: Out,
    },
    /// Build the network for a CNF formula.
    Gen3sat {
        /// DIMACS file.
        #[arg(long, conflicts_with = "random")]
        cnf: Option<PathBuf>,
        /// Variables of a random 3-CNF formula.
        #[arg(long, requires = "clauses")]
        random: Option<usize>,
        #[arg(long)]
        clauses: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write `leader.txt` and `contrib.txt` (and `formula.cnf`) here
        /// instead of printing.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Make both machines deterministic without changing the verdict.
    Determinize {
        #[command(flatten)]
        net: NetArgs,
        /// Apply only the leader read-pair gadget (does not preserve safety
        /// in general).
        #[arg(long)]
        gadget: bool,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Grammar and automaton operations.
    #[command(subcommand)]
    Lang(LangCmd),
}

#[derive(Subcommand, Debug)]
enum LangCmd {
    /// Is the grammar's language empty?
    CfgEmpty { grammar: PathBuf },
    /// Is the index-`k` language of the grammar empty?
    KindexEmpty {
        grammar: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// An automaton accepting a support of the grammar's language.
    Support {
        grammar: PathBuf,
        #[arg(long, default_value_t = crate::lang::support::DEFAULT_SUPPORT_CAP)]
        state_cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The product grammar of a grammar and an automaton.
    Bowtie {
        grammar: PathBuf,
        automaton: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Words of a grammar or automaton up to a length, one per line (`eps`
    /// for the empty word).
    Enumerate {
        file: PathBuf,
        #[arg(long)]
        max_len: usize,
        /// Only derivations of this index (grammars).
        #[arg(long)]
        k: Option<usize>,
    },
}

#[derive(Args, Debug)]
struct NetArgs {
    /// Leader machine file.
    #[arg(long)]
    leader: PathBuf,
    /// Contributor machine file.
    #[arg(long)]
    contrib: PathBuf,
}

#[derive(Args, Debug)]
struct Caps {
    /// States of any automaton or explicit product.
    #[arg(long, default_value_t = 2_000_000)]
    state_cap: usize,
    /// First-write sequences tried.
    #[arg(long, default_value_t = 200_000)]
    guess_cap: usize,
    /// States of a support automaton.
    #[arg(long, default_value_t = crate::lang::support::DEFAULT_SUPPORT_CAP)]
    support_cap: usize,
    /// Stack height when stepping pushdown machines.
    #[arg(long, default_value_t = 64)]
    stack_depth: usize,
    /// Internal steps (tape moves, silent moves) per register operation.
    #[arg(long, default_value_t = 10_000)]
    step_budget: usize,
    /// Threads for independent guesses.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct Out {
    /// Print a JSON record instead of the summary.
    #[arg(long)]
    report: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Auto,
    FsmFsm,
    PdmFsm,
    FsmPdm,
    PdmPdm,
    /// One grammar check per first-write sequence.
    PerTau,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum OracleMode {
    /// Breadth-first search with `k` contributors.
    Explore,
    /// Unbounded contributors, finite-state machines only.
    Saturate,
    /// At most `k` operations per process.
    Bounded,
}

impl Caps {
    fn limits(&self) -> Limits {
        Limits { stack_depth: self.stack_depth, internal_steps: self.step_budget }
    }

    fn verify(&self, route: Route) -> VerifyOptions {
        VerifyOptions {
            state_cap: self.state_cap,
            guess_cap: self.guess_cap,
            support_cap: self.support_cap,
            route,
            limits: self.limits(),
            jobs: self.jobs.max(1),
        }
    }

    fn explore(&self) -> ExploreOptions {
        ExploreOptions { limits: self.limits(), state_cap: self.state_cap }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

fn load(net: &NetArgs) -> Result<NetworkInstance> {
    NetworkInstance::from_sources(&read(&net.leader)?, &read(&net.contrib)?)
}

fn summary(net: &NetworkInstance, v: &Verdict, procedure: &str) -> String {
    let mut s = String::new();
    let status = match (v.is_unsafe(), v.complete) {
        (true, _) => "unsafe",
        (false, true) => "safe",
        (false, false) => "safe up to the configured bounds (incomplete)",
    };
    let _ = writeln!(s, "verdict: {status} ({procedure})");
    if let Some(w) = &v.witness {
        let tau: Vec<&str> = w.tau.iter().map(|g| net.name(*g)).collect();
        let _ = writeln!(s, "first writes: {}", tau.join(" "));
        match &w.trace {
            Some(t) => {
                let _ = writeln!(s, "trace:");
                for step in t {
                    let who = if step.process == 0 { "leader".to_string() } else { format!("c{}", step.process) };
                    let _ = writeln!(s, "{who} {}", step.action.op().show(&net.values));
                }
            }
            None => {
                let word: Vec<String> = w.word.iter().map(|a| a.show(&net.values)).collect();
                let _ = writeln!(s, "word: {}", word.join(" "));
            }
        }
    }
    if !net.pruned.is_empty() {
        let _ = writeln!(s, "unused values: {}", net.pruned.join(" "));
    }
    if !v.stats.is_empty() {
        let stats: Vec<String> = v.stats.iter().map(|(k, n)| format!("{k}={n}")).collect();
        let _ = writeln!(s, "stats: {}", stats.join(" "));
    }
    s
}

fn emit_verdict(o: &mut dyn Write, net: &NetworkInstance, v: &Verdict, procedure: &str, out: &Out) -> Result<i32> {
    let text = if out.report {
        let mut r = serde_json::to_string_pretty(&v.report(net, procedure)).expect("json");
        r.push('\n');
        r
    } else {
        summary(net, v, procedure)
    };
    put(o, &text)?;
    Ok(match (v.is_unsafe(), v.complete) {
        (true, _) => 1,
        (false, true) => 0,
        (false, false) => 2,
    })
}

fn put(o: &mut dyn Write, text: &str) -> Result<()> {
    o.write_all(text.as_bytes()).map_err(|e| Error::invalid(format!("output: {e}")))
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `o`. Diagnostics go to standard error.
pub fn run_with<I, T>(args: I, o: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd, o) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock())
}

fn dispatch(cmd: Cmd, o: &mut dyn Write) -> Result<i32> {
    match cmd {
        Cmd::Verify { net, mode, caps, out } => {
            let n = load(&net)?;
            let opts = caps.verify(if mode == Mode::PerTau { Route::PerTau } else { Route::Auto });
            let (v, name) = match mode {
                Mode::Auto => verifier::verify(&n, &opts)?,
                Mode::FsmFsm => (verifier::verify_fsm_fsm(&n, &opts)?, "verify_fsm_fsm"),
                Mode::PdmFsm | Mode::PerTau => (verifier::verify_pdm_fsm(&n, &opts)?, "verify_pdm_fsm"),
                Mode::FsmPdm => (verifier::verify_fsm_pdm(&n, &opts)?, "verify_fsm_pdm"),
                Mode::PdmPdm => (verifier::verify_pdm_pdm(&n, &opts)?, "verify_pdm_pdm"),
            };
            emit_verdict(o, &n, &v, name, &out)
        }
        Cmd::Bounded { net, k, caps, out } => {
            let n = load(&net)?;
            let v = verify_bounded(&n, k, &caps.verify(Route::Auto))?;
            emit_verdict(o, &n, &v, "verify_bounded", &out)
        }
        Cmd::Oracle { net, mode, k, depth, caps, out } => {
            let n = load(&net)?;
            let eo = caps.explore();
            let (v, name) = match mode {
                OracleMode::Explore => (explore_bounded(&n, k, depth, eo)?, "explore_bounded"),
                OracleMode::Saturate => (saturate_fsm(&n, eo)?, "saturate_fsm"),
                OracleMode::Bounded => (bounded_safety_oracle(&n, k, eo)?, "bounded_safety_oracle"),
            };
            emit_verdict(o, &n, &v, name, &out)
        }
        Cmd::Gen3sat { cnf, random, clauses, seed, out_dir } => {
            let f = match (cnf, random) {
                (Some(p), _) => CnfFormula::parse_dimacs(&read(&p)?)?,
                (None, Some(vars)) if vars > 0 => CnfFormula::random_3cnf(seed, vars, clauses.unwrap_or(0)),
                _ => return Err(Error::invalid("give --cnf FILE or --random VARS --clauses N")),
            };
            let n = gen_3sat(&f);
            let d = write_machine(&n.leader, &n.values);
            let c = write_machine(&n.contributor, &n.values);
            match out_dir {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(|e| Error::invalid(format!("{}: {e}", dir.display())))?;
                    write_file(&dir.join("leader.txt"), &d)?;
                    write_file(&dir.join("contrib.txt"), &c)?;
                    write_file(&dir.join("formula.cnf"), &f.to_dimacs())?;
                    put(o, &format!("wrote {} and {}\n", dir.join("leader.txt").display(), dir.join("contrib.txt").display()))?;
                }
                None => put(o, &format!("{d}\n{c}"))?,
            }
            Ok(0)
        }
        Cmd::Determinize { net, gadget, out_dir } => {
            let n = load(&net)?;
            let m = if gadget { read_pair_gadget(&n)? } else { determinize(&n)? };
            let d = write_machine(&m.leader, &m.values);
            let c = write_machine(&m.contributor, &m.values);
            match out_dir {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(|e| Error::invalid(format!("{}: {e}", dir.display())))?;
                    write_file(&dir.join("leader.txt"), &d)?;
                    write_file(&dir.join("contrib.txt"), &c)?;
                }
                None => put(o, &format!("{d}\n{c}"))?,
            }
            Ok(0)
        }
        Cmd::Lang(l) => lang(l, o),
    }
}

fn emptiness(o: &mut dyn Write, nonempty: bool) -> Result<i32> {
    put(o, if nonempty { "nonempty\n" } else { "empty\n" })?;
    Ok(i32::from(nonempty))
}

fn lang(cmd: LangCmd, o: &mut dyn Write) -> Result<i32> {
    match cmd {
        LangCmd::CfgEmpty { grammar } => {
            let g = parse_cfg(&read(&grammar)?)?;
            emptiness(o, !g.is_empty())
        }
        LangCmd::KindexEmpty { grammar, k } => {
            let g = parse_cfg(&read(&grammar)?)?;
            emptiness(o, k_index_nonempty(&g, k)?)
        }
        LangCmd::Support { grammar, state_cap, out } => {
            let g = parse_cfg(&read(&grammar)?)?;
            let a = support_fsa(&g.to_cnf(), state_cap)?;
            let text = write_fsa(&a);
            match out {
                Some(p) => write_file(&p, &text)?,
                None => put(o, &text)?,
            }
            Ok(0)
        }
        LangCmd::Bowtie { grammar, automaton, out } => {
            let g = parse_cfg(&read(&grammar)?)?;
            let a = parse_fsa(&read(&automaton)?)?;
            let text = write_cfg(&plain_names(&bowtie(&g.to_cnf(), &a)));
            match out {
                Some(p) => write_file(&p, &text)?,
                None => put(o, &text)?,
            }
            Ok(0)
        }
        LangCmd::Enumerate { file, max_len, k } => {
            let src = read(&file)?;
            let words = if src.trim_start().starts_with("fsa") {
                if k.is_some() {
                    return Err(Error::invalid("--k applies to grammars only"));
                }
                parse_fsa(&src)?.enumerate_words(max_len)
            } else {
                let g = parse_cfg(&src)?;
                match k {
                    Some(k) => enumerate_k_index(&g, k, max_len),
                    None => g.enumerate_words(max_len),
                }
            };
            let mut text = String::new();
            for w in &words {
                let _ = writeln!(text, "{}", if w.is_empty() { "eps".to_string() } else { w.join(" ") });
            }
            put(o, &text)?;
            Ok(0)
        }
    }
}
