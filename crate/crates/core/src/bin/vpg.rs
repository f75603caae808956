//! `vpg`: validate, translate, build, recognize, parse and bench.
//!
//! Exit codes: 0 accept or success, 1 reject or validation failure, 2 usage
//! or grammar errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use vpg::actions::ActionTable;
use vpg::bench::{self, Generator};
use vpg::dump::{self, read_bundle, write_bundle};
use vpg::extract::display_tree;
use vpg::grammar::{parse_tagged_cfg, parse_vpg, Mode, TermId};
use vpg::tokens::{html_optional_endtags, parse_tokens, resolve, TokenRecord};
use vpg::translate::{self, iter_cap_from_env};
use vpg::Compiled;

#[derive(Parser)]
#[command(name = "vpg", version, about = "Parser generator for visibly pushdown grammars")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Wm,
    General,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Wm => Mode::WellMatched,
            ModeArg::General => Mode::General,
        }
    }
}

#[derive(clap::Args)]
struct Input {
    /// Grammar (`.vpg`, tagged CFG) or a bundle from `vpg build`.
    grammar: PathBuf,
    /// Token file: one `NAME` or `NAME<TAB>lexeme` per line.
    tokens: PathBuf,
    /// Acceptance mode; defaults to the grammar's own.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Turn surplus `TagOpen` tokens into `TagPlain`.
    #[arg(long)]
    html_optional_endtags: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a grammar: syntax, then the translation validator or VPG well-formedness.
    Validate { grammar: PathBuf },
    /// Translate a tagged CFG to a VPG. Also writes `<out>.actions`.
    Translate {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Directory for every intermediate stage.
        #[arg(long)]
        dump_stages: Option<PathBuf>,
    },
    /// Build the automata and write them as a text bundle.
    Build {
        grammar: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Run the recognizer.
    Recognize {
        #[command(flatten)]
        input: Input,
        /// Print the final configuration.
        #[arg(long)]
        debug: bool,
    },
    /// Parse, prune and extract.
    Parse {
        #[command(flatten)]
        input: Input,
        /// Print the pruned forest.
        #[arg(long)]
        forest: bool,
        /// Print one parse tree (the default when no output is chosen).
        #[arg(long)]
        first_tree: bool,
        /// Print up to N parse trees.
        #[arg(long, value_name = "N")]
        all_trees: Option<usize>,
        /// Print the number of parse trees.
        #[arg(long)]
        count: bool,
        /// Print the first tree as a tree of the source grammar.
        #[arg(long)]
        cfg_tree: bool,
    },
    /// Time parser, pruner and extraction on generated inputs; prints CSV.
    Bench {
        grammar: PathBuf,
        #[arg(long = "gen", default_value = "json")]
        generator: Generator,
        /// Comma-separated token counts; `1e5` style is accepted.
        #[arg(long, default_value = "100000,200000,400000", value_delimiter = ',', value_parser = parse_size)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        /// Also write the CSV here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn parse_size(s: &str) -> Result<usize, String> {
    s.parse::<usize>()
        .ok()
        .or_else(|| s.parse::<f64>().ok().filter(|x| x.is_finite() && *x >= 0.0).map(|x| x as usize))
        .ok_or_else(|| format!("bad size `{s}`"))
}

/// Exit with a message and code 2.
struct Fatal(String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Fatal> {
    fs::read_to_string(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Fatal> {
    fs::write(path, text).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn is_vpg(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "vpg")
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".actions");
    PathBuf::from(s)
}

/// Compiles any supported grammar file. A `.vpg` picks up actions from a
/// `.vpg.actions` sidecar when one exists.
fn load(path: &Path, mode: Option<ModeArg>) -> Result<Compiled, Fatal> {
    let text = read(path)?;
    let c = if text.starts_with(dump::MAGIC) {
        read_bundle(&text)?
    } else if is_vpg(path) {
        let g = parse_vpg(&text)?;
        g.check_wellformed()?;
        match fs::read_to_string(sidecar(path)) {
            Ok(side) => {
                let actions = ActionTable::from_sidecar(&side)?;
                if actions.len() != g.rules().len() {
                    return Err(Fatal(format!("{}: wrong number of actions", sidecar(path).display())));
                }
                Compiled::new(g, actions)
            }
            Err(_) => Compiled::from_vpg(g),
        }
    } else {
        let t = translate::translate(&parse_tagged_cfg(&text)?, iter_cap_from_env())?;
        Compiled::new(t.vpg, t.actions)
    };
    Ok(match mode {
        Some(m) => c.with_mode(m.into()),
        None => c,
    })
}

fn load_tokens(c: &Compiled, input: &Input) -> Result<(Vec<TokenRecord>, Vec<TermId>), Fatal> {
    let mut records = parse_tokens(&read(&input.tokens)?)?;
    if input.html_optional_endtags {
        html_optional_endtags(&mut records)?;
    }
    let ids = resolve(&c.vpg, &records)?;
    Ok((records, ids))
}

fn validate(path: &Path) -> Result<ExitCode, Fatal> {
    let text = read(path)?;
    let result = if is_vpg(path) {
        parse_vpg(&text).and_then(|g| g.check_wellformed().map(|_| g.rules().len())).map_err(|e| e.to_string())
    } else {
        parse_tagged_cfg(&text)
            .map_err(translate::TranslateError::from)
            .and_then(|g| translate::check(&g))
            .map(|s| s.rules.len())
            .map_err(|e| e.to_string())
    };
    Ok(match result {
        Ok(n) => {
            println!("ok: {n} rules");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            ExitCode::from(1)
        }
    })
}

fn translate_cmd(input: &Path, output: Option<&Path>, stages: Option<&Path>) -> Result<ExitCode, Fatal> {
    let text = read(input)?;
    if is_vpg(input) {
        parse_vpg(&text)?.check_wellformed()?;
        match output {
            Some(o) => write(o, &text)?,
            None => print!("{text}"),
        }
        return Ok(ExitCode::SUCCESS);
    }
    let t = translate::translate(&parse_tagged_cfg(&text)?, iter_cap_from_env())?;
    let vpg_text = t.vpg.to_text();
    let actions = t.actions.to_sidecar();
    if let Some(dir) = stages {
        fs::create_dir_all(dir).map_err(|e| Fatal(format!("{}: {e}", dir.display())))?;
        for (name, body) in t.stage_texts() {
            write(&dir.join(name), &body)?;
        }
        write(&dir.join("actions.tsv"), &actions)?;
    }
    match output {
        Some(o) => {
            write(o, &vpg_text)?;
            write(&sidecar(o), &actions)?;
        }
        None => print!("{vpg_text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn recognize(input: &Input, debug: bool) -> Result<ExitCode, Fatal> {
    let c = load(&input.grammar, input.mode)?;
    let (records, ids) = load_tokens(&c, input)?;
    let g = &c.vpg;
    let run = c.recognizer.run(g, &ids);
    if debug {
        if let Ok(cfg) = &run {
            println!("state {}", c.recognizer.state(cfg.state).display(g.symbols()));
            println!("stack {}", c.recognizer.display_stack(g, &cfg.stack));
        }
    }
    let verdict = run.and_then(|_| c.recognize(&ids));
    Ok(match verdict {
        Ok(_) => {
            println!("accept");
            ExitCode::SUCCESS
        }
        Err(r) => {
            let at = records.get(r.position).map_or("end of input".to_string(), |t| format!("{}:{}", t.line, t.col));
            println!("reject at token {} ({at}): {:?}", r.position, r.reason);
            ExitCode::from(1)
        }
    })
}

struct ParseOutputs {
    forest: bool,
    first_tree: bool,
    all_trees: Option<usize>,
    count: bool,
    cfg_tree: bool,
}

fn parse_cmd(input: &Input, out: ParseOutputs) -> Result<ExitCode, Fatal> {
    let c = load(&input.grammar, input.mode)?;
    let (records, ids) = load_tokens(&c, input)?;
    let g = &c.vpg;
    let parsed = match c.parse(&ids) {
        Ok(p) => p,
        Err(e) => {
            println!("reject: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    let idx = c.index(&parsed.forest);
    let s = g.symbols();
    let nothing_chosen = !(out.forest || out.first_tree || out.all_trees.is_some() || out.count || out.cfg_tree);
    if out.forest {
        print!("{}", parsed.forest.display(s));
    }
    if out.count {
        println!("{}", idx.count());
    }
    if out.first_tree || nothing_chosen {
        if let Some(t) = idx.first_tree() {
            println!("{}", display_tree(s, &t));
        }
    }
    if let Some(n) = out.all_trees {
        for t in idx.trees(n) {
            println!("{}", display_tree(s, &t));
        }
    }
    if out.cfg_tree {
        if let Some(t) = idx.first_tree() {
            let lexemes: Vec<Option<String>> = records.iter().map(|r| r.lexeme.clone()).collect();
            println!("{}", c.cfg_tree(&t, &lexemes)?.to_sexpr());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn bench_cmd(
    grammar: &Path,
    gen: Generator,
    sizes: &[usize],
    seed: u64,
    reps: usize,
    output: Option<&Path>,
) -> Result<ExitCode, Fatal> {
    let c = load(grammar, None)?;
    let rows = bench::bench(&c, gen, sizes, seed, reps)?;
    let csv = bench::to_csv(&rows);
    print!("{csv}");
    for w in rows.windows(2) {
        let ratio = w[1].parse_and_prune().as_secs_f64() / w[0].parse_and_prune().as_secs_f64().max(1e-9);
        eprintln!("{} -> {} tokens: parser+pruner time x{ratio:.2}", w[0].tokens, w[1].tokens);
    }
    if let Some(o) = output {
        write(o, &csv)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, Fatal> {
    match cli.cmd {
        Cmd::Validate { grammar } => validate(&grammar),
        Cmd::Translate { input, output, dump_stages } => {
            translate_cmd(&input, output.as_deref(), dump_stages.as_deref())
        }
        Cmd::Build { grammar, output, mode } => {
            let text = write_bundle(&load(&grammar, mode)?);
            match output {
                Some(o) => write(&o, &text)?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Recognize { input, debug } => recognize(&input, debug),
        Cmd::Parse { input, forest, first_tree, all_trees, count, cfg_tree } => {
            parse_cmd(&input, ParseOutputs { forest, first_tree, all_trees, count, cfg_tree })
        }
        Cmd::Bench { grammar, generator, sizes, seed, reps, output } => {
            bench_cmd(&grammar, generator, &sizes, seed, reps, output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(Fatal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
