//! Command-line front end. Exit codes: 0 success, 1 domain rejection, 2 input error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::embedding::{parse_index_word, CommandOracle, Pipeline};
use crate::groups::diagram::{
    build_compressed, build_disk_diagram, build_semitrapezium, build_trapezium, verify_diagram, GridDiagram,
};
use crate::groups::weights::{Num, WeightFunctions};
use crate::groups::{emit_main_presentation, emit_presentation, Level, Presentation};
use crate::machines::m1::{build_m1, compressed_semi, default_letters, shift};
use crate::machines::main_machine::{build_main, MainMachine};
use crate::machines::plugins::{ChainRecognizer, FileRecognizer, Membership, RejectAll, Recognizer};
use crate::params::{check_constraint_order, instantiate, paper_constraints, ParamOverrides, Params, Profile};
use crate::smachine::{format_machine, parse_machine, AdmissibleWord, Machine, Step};
use crate::words::{free_reduce, Word};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Rejected(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Rejected(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
    Dot,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MachineKind {
    M1,
    Main,
    File,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    M,
    G,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StartArg {
    I,
    J,
    Ac,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Function {
    Chi,
    H,
    F,
    G,
    Dehn,
}

#[derive(Parser, Debug)]
#[command(name = "smforge", version, about = "Build and check noisy S-machines and their group presentations")]
pub struct Cli {
    /// Session config (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Parameter profile: `desk` or `paper`.
    #[arg(long, global = true)]
    pub profile: Option<String>,
    /// Machine file in the line format; implies `--kind file`.
    #[arg(long, global = true)]
    pub machine: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub kind: Option<MachineKind>,
    /// Input letters, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub letters: Option<Vec<String>>,
    /// Number of coordinates of the main machine (defaults to the profile's L).
    #[arg(long, global = true)]
    pub coordinates: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub word: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub history: Option<String>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    /// External word-problem command for the embedding.
    #[arg(long, global = true)]
    pub oracle: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the selected machine in the line format.
    BuildMachine,
    /// Apply a history to a configuration (or to a tape word with `--semi`).
    Run {
        #[arg(long)]
        semi: Option<usize>,
    },
    /// Shift a first-sector word of M1 to the empty tape.
    Shift,
    /// Decode a noise-letter word into noise words.
    Decode,
    /// Synthesize an accepting computation of the main machine.
    Accept {
        #[arg(long, value_enum, default_value = "i")]
        start: StartArg,
    },
    /// Print the relators of the selected machine's group.
    EmitPresentation {
        #[arg(long, value_enum, default_value = "m")]
        level: LevelArg,
    },
    /// Print the generator images of the embedding (and `ψ(w)` with `--word`).
    Embed,
    /// Evaluate the weight functions or the Dehn bound.
    DehnBound {
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value = "dehn")]
        function: Function,
    },
    /// Build (or re-verify with `--input`) a band diagram.
    Diagram {
        #[arg(long)]
        semi: Option<usize>,
        #[arg(long)]
        compressed: bool,
        #[arg(long)]
        disk: bool,
        #[arg(long, value_enum, default_value = "i")]
        start: StartArg,
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SessionConfig {
    profile: Option<String>,
    #[serde(default)]
    params: ParamOverrides,
    #[serde(default)]
    machine: MachineConfig,
    recognizer: Option<RecognizerConfig>,
    embedding: Option<toml::Value>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineConfig {
    kind: Option<MachineKind>,
    letters: Option<Vec<String>>,
    coordinates: Option<usize>,
    path: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RecognizerConfig {
    Chain { sets: Vec<Vec<String>> },
    RejectAll,
    File { machine: PathBuf, members: Option<Vec<Vec<String>>>, command: Option<String>, time_bound: Vec<u64> },
}

#[allow(clippy::large_enum_variant)]
enum Built {
    Plain(Machine),
    Main(Box<MainMachine>),
}

impl Built {
    fn machine(&self) -> &Machine {
        match self {
            Built::Plain(m) => m,
            Built::Main(mm) => &mm.machine,
        }
    }
}

struct Session {
    cli: Cli,
    cfg: SessionConfig,
    base: PathBuf,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

impl Session {
    fn new(cli: Cli) -> Result<Session, CliError> {
        let (cfg, base) = match &cli.config {
            Some(p) => {
                let cfg: SessionConfig =
                    toml::from_str(&read(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
                (cfg, p.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (SessionConfig::default(), PathBuf::new()),
        };
        Ok(Session { cli, cfg, base })
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn profile(&self) -> Result<Profile, CliError> {
        let name = self.cli.profile.as_deref().or(self.cfg.profile.as_deref()).unwrap_or("desk");
        name.parse().map_err(input)
    }

    fn params(&self) -> Result<Params, CliError> {
        instantiate(self.profile()?, &self.cfg.params).map_err(input)
    }

    fn letters(&self, default_n: usize) -> Vec<String> {
        self.cli
            .letters
            .clone()
            .or_else(|| self.cfg.machine.letters.clone())
            .unwrap_or_else(|| default_letters(default_n))
    }

    fn word(&self) -> Result<&str, CliError> {
        self.cli.word.as_deref().ok_or_else(|| CliError::Input("--word is required".into()))
    }

    fn kind(&self) -> MachineKind {
        if self.cli.machine.is_some() {
            return MachineKind::File;
        }
        self.cli.kind.or(self.cfg.machine.kind).unwrap_or(MachineKind::M1)
    }

    fn recognizer(&self, names: &[String]) -> Result<Arc<dyn Recognizer>, CliError> {
        let index = |set: &[String]| -> Result<Vec<usize>, CliError> {
            set.iter()
                .map(|n| names.iter().position(|m| m == n).ok_or_else(|| CliError::Input(format!("unknown input letter `{n}`"))))
                .collect()
        };
        Ok(match &self.cfg.recognizer {
            None => {
                let sets = if names.len() >= 2 { vec![vec![0], vec![0, 1]] } else { vec![vec![0], vec![0]] };
                Arc::new(ChainRecognizer::new(names, sets).map_err(input)?)
            }
            Some(RecognizerConfig::Chain { sets }) => {
                let sets = sets.iter().map(|s| index(s)).collect::<Result<_, _>>()?;
                Arc::new(ChainRecognizer::new(names, sets).map_err(input)?)
            }
            Some(RecognizerConfig::RejectAll) => Arc::new(RejectAll::new(names).map_err(input)?),
            Some(RecognizerConfig::File { machine, members, command, time_bound }) => {
                let m = parse_machine(&read(&self.resolve(machine))?).map_err(input)?;
                let membership = match (members, command) {
                    (Some(ms), None) => Membership::Table(ms.iter().map(|s| index(s)).collect::<Result<_, _>>()?),
                    (None, Some(c)) => Membership::Command(c.clone()),
                    _ => return Err(CliError::Input("file recognizer needs exactly one of `members` or `command`".into())),
                };
                Arc::new(FileRecognizer::new(m, names, membership, time_bound.clone()).map_err(input)?)
            }
        })
    }

    fn time_bound(&self) -> Result<Vec<u64>, CliError> {
        let names = self.letters(2);
        Ok(self.recognizer(&names)?.time_bound())
    }

    fn build(&self) -> Result<Built, CliError> {
        match self.kind() {
            MachineKind::File => {
                let path = match (&self.cli.machine, &self.cfg.machine.path) {
                    (Some(p), _) => p.clone(),
                    (None, Some(p)) => self.resolve(p),
                    (None, None) => return Err(CliError::Input("no machine file given".into())),
                };
                Ok(Built::Plain(parse_machine(&read(&path)?).map_err(input)?))
            }
            MachineKind::M1 => {
                let (m, _) = build_m1(&self.letters(1)).map_err(input)?;
                Ok(Built::Plain(m))
            }
            MachineKind::Main => {
                let names = self.letters(2);
                let l = match self.cli.coordinates.or(self.cfg.machine.coordinates) {
                    Some(l) => l,
                    None => self.params()?.l as usize,
                };
                let rec = self.recognizer(&names)?;
                Ok(Built::Main(Box::new(build_main(&names, rec, l).map_err(input)?)))
            }
        }
    }

    fn main_machine(&self) -> Result<Box<MainMachine>, CliError> {
        match self.build()? {
            Built::Main(m) => Ok(m),
            _ => Err(CliError::Input("this command needs `--kind main`".into())),
        }
    }

    fn presentation(&self, b: &Built, level: Level) -> Result<Presentation, CliError> {
        match b {
            Built::Main(mm) => emit_main_presentation(mm, level).map_err(input),
            _ => emit_presentation(b.machine(), level).map_err(input),
        }
    }

    fn history(&self, m: &Machine) -> Result<Vec<Step>, CliError> {
        match &self.cli.history {
            Some(h) => m.parse_history(h).map_err(input),
            None => Ok(Vec::new()),
        }
    }

    fn pipeline(&self) -> Result<Pipeline, CliError> {
        let table = self
            .cfg
            .embedding
            .clone()
            .ok_or_else(|| CliError::Input("config has no [embedding] table".into()))?;
        let mut table = match table {
            toml::Value::Table(t) => t,
            _ => return Err(CliError::Input("[embedding] must be a table".into())),
        };
        if let Some(cmd) = &self.cli.oracle {
            let gens: Vec<String> = table
                .get("generators")
                .and_then(|g| g.clone().try_into().ok())
                .ok_or_else(|| CliError::Input("[embedding] needs `generators`".into()))?;
            let c = table.get("C").and_then(|c| c.as_integer()).unwrap_or(4);
            let c = usize::try_from(c).map_err(input)?;
            return Pipeline::new(Arc::new(CommandOracle::new(gens, cmd)), c).map_err(input);
        }
        table.entry("C").or_insert(toml::Value::Integer(self.params().map(|p| p.c as i64).unwrap_or(4)));
        Pipeline::from_toml(&toml::to_string(&table).map_err(input)?).map_err(input)
    }
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn no_dot(f: Format) -> Result<(), CliError> {
    if f == Format::Dot {
        Err(CliError::Input("--format dot is only available for `diagram`".into()))
    } else {
        Ok(())
    }
}

fn steps_json(m: &Machine, h: &[Step]) -> Vec<String> {
    h.iter().map(|&s| m.format_step(s)).collect()
}

/// Runs one command and returns its standard output.
pub fn execute(cli: Cli) -> Result<String, CliError> {
    let fmt = cli.format;
    let s = Session::new(cli)?;
    match &s.cli.command {
        Command::BuildMachine => {
            no_dot(fmt)?;
            let b = s.build()?;
            let m = b.machine();
            let text = format_machine(m);
            Ok(match fmt {
                Format::Structured => to_json(&json!({
                    "parts": m.hw.parts.len(),
                    "sectors": m.hw.num_sectors(),
                    "cyclic": m.hw.cyclic,
                    "rules": m.rules.len(),
                    "letters": m.alphabet.len(),
                    "machine": text,
                })),
                _ => text,
            })
        }
        Command::Run { semi } => {
            no_dot(fmt)?;
            let b = s.build()?;
            let m = b.machine();
            let h = s.history(m)?;
            let (words, start, end): (Vec<String>, String, String) = match semi {
                Some(sec) => {
                    let w = m.alphabet.parse_word(s.word()?).map_err(input)?;
                    let run = m.semi_run(&w, &h, *sec).map_err(|e| CliError::Rejected(e.to_string()))?;
                    let words = run.words(m).map(|w| m.alphabet.format_word(&w)).collect();
                    (words, m.alphabet.format_word(&run.start), m.alphabet.format_word(&run.end))
                }
                None => {
                    let w = m.parse_admissible(s.word()?).map_err(input)?;
                    let run = m.run(&w, &h).map_err(|e| CliError::Rejected(e.to_string()))?;
                    let words = run.words(m).map(|w| m.format_admissible(&w)).collect();
                    (words, m.format_admissible(&run.start), m.format_admissible(&run.end))
                }
            };
            Ok(match fmt {
                Format::Structured => to_json(&json!({
                    "start": start,
                    "history": steps_json(m, &h),
                    "end": end,
                    "words": words,
                })),
                _ => {
                    let mut out = String::new();
                    for (i, w) in words.iter().enumerate() {
                        out.push_str(&format!("{i}: {w}\n"));
                    }
                    out
                }
            })
        }
        Command::Shift => {
            no_dot(fmt)?;
            let (m, sc) = build_m1(&s.letters(1)).map_err(input)?;
            let w = m.alphabet.parse_word(s.word()?).map_err(input)?;
            let res = shift(&sc, &w).ok_or_else(|| CliError::Rejected(format!("`{}` is not shiftable", s.word().unwrap_or_default())))?;
            let h = m.format_history(&res.history);
            Ok(match fmt {
                Format::Structured => to_json(&json!({
                    "word": m.alphabet.format_word(&w),
                    "history": h,
                    "t": res.history.len(),
                    "max_width": res.max_width,
                })),
                _ => format!("history: {h}\nt = {}\n", res.history.len()),
            })
        }
        Command::Decode => {
            no_dot(fmt)?;
            let names = s.letters(1);
            let (m, sc) = build_m1(&names).map_err(input)?;
            let w = m.alphabet.parse_word(s.word()?).map_err(input)?;
            let w = free_reduce(w.letters().iter().copied());
            if w.letters().iter().any(|l| !sc.b.contains(&l.sym)) {
                return Err(CliError::Input("noise words are over b1, b2 only".into()));
            }
            let seq = sc.decode_noise(&w).ok_or_else(|| CliError::Rejected("not a product of noise words".into()))?;
            if free_reduce(sc.noise_product(&seq).letters().iter().copied()) != w {
                return Err(CliError::Rejected("greedy decoding does not reproduce the word".into()));
            }
            let yname = |y: usize| if y < names.len() { names[y].clone() } else { format!("b{}", y - names.len() + 1) };
            let factors: Vec<String> = seq
                .iter()
                .map(|&(y, a, e)| format!("v({},{}){}", yname(y), names[a], if e < 0 { "^-1" } else { "" }))
                .collect();
            Ok(match fmt {
                Format::Structured => to_json(&json!({
                    "factors": seq.iter().map(|&(y, a, e)| json!({"y": yname(y), "a": names[a], "sign": e})).collect::<Vec<_>>(),
                })),
                _ => format!("{}\n", if factors.is_empty() { "1".to_string() } else { factors.join(" ") }),
            })
        }
        Command::Accept { start } => {
            no_dot(fmt)?;
            let mm = s.main_machine()?;
            let cfg = start_config(&mm, *start, s.cli.word.as_deref())?;
            let (comp, ell) = mm
                .accepting_run(&cfg)
                .map_err(|e| CliError::Rejected(e.to_string()))?
                .ok_or_else(|| CliError::Rejected("configuration is not accepted".into()))?;
            let m = &mm.machine;
            Ok(match fmt {
                Format::Structured => to_json(&json!({
                    "start": m.format_admissible(&comp.start),
                    "history": m.format_history(&comp.history),
                    "t": comp.len(),
                    "ell": ell,
                    "end": m.format_admissible(&comp.end),
                })),
                _ => format!("accepted\nt = {}\nell = {ell}\nhistory: {}\n", comp.len(), m.format_history(&comp.history)),
            })
        }
        Command::EmitPresentation { level } => {
            no_dot(fmt)?;
            let b = s.build()?;
            let level = if *level == LevelArg::G { Level::G } else { Level::M };
            let p = s.presentation(&b, level)?;
            Ok(match fmt {
                Format::Structured => to_json(&json!({
                    "relators": p.relators.iter().map(|r| json!({
                        "class": r.class.tag(),
                        "coordinate": r.coordinate,
                        "word": p.alphabet.format_word(&r.word),
                    })).collect::<Vec<_>>(),
                    "counts": p.counts(),
                    "total": p.relators.len(),
                })),
                _ => p.format() + &p.format_counts(),
            })
        }
        Command::Embed => {
            no_dot(fmt)?;
            let pl = s.pipeline()?;
            let letters = pl.letters().to_vec();
            let fmt_w = |w: &Word| crate::embedding::format_index_word(w, &letters);
            let images: Vec<(String, String)> = pl.generator_images().iter().map(|(g, w)| (g.clone(), fmt_w(w))).collect();
            let probe = match &s.cli.word {
                Some(text) => {
                    let w = parse_index_word(text, &pl.trick.x).map_err(input)?;
                    let image = pl.psi(&w);
                    Some((fmt_w(&image), pl.wp_rc(&image)))
                }
                None => None,
            };
            Ok(match fmt {
                Format::Structured => to_json(&json!({
                    "C": pl.expansion.c,
                    "images": images.iter().map(|(g, w)| json!({"generator": g, "image": w})).collect::<Vec<_>>(),
                    "psi": probe.as_ref().map(|(w, t)| json!({"image": w, "trivial": t})),
                })),
                _ => {
                    let mut out = String::new();
                    for (g, w) in &images {
                        out.push_str(&format!("{g} -> {w}\n"));
                    }
                    if let Some((w, t)) = probe {
                        out.push_str(&format!("psi = {w}\ntrivial = {t}\n"));
                    }
                    out
                }
            })
        }
        Command::DehnBound { n, function } => {
            no_dot(fmt)?;
            if s.profile()? == Profile::Paper {
                let cs = paper_constraints();
                check_constraint_order(&cs).map_err(CliError::Input)?;
                let lines: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
                return Ok(match fmt {
                    Format::Structured => to_json(&json!({
                        "profile": "paper",
                        "formula": WeightFunctions::formula(),
                        "constraints": lines,
                    })),
                    _ => format!("{}\n# constraints\n{}\n", WeightFunctions::formula(), lines.join("\n")),
                });
            }
            let p = s.params()?;
            let wf = p.weights(s.time_bound()?);
            let v: Num = match function {
                Function::Chi => wf.chi_u(*n),
                Function::H => wf.h_u(*n),
                Function::F => wf.f_u(*n),
                Function::G => wf.g_u(*n),
                Function::Dehn => wf.dehn_u(*n),
            };
            let shown = wf.show(&v);
            Ok(match fmt {
                Format::Structured => to_json(&json!({
                    "n": n,
                    "function": format!("{function:?}").to_lowercase(),
                    "value": shown,
                    "exact": v.exact().is_some(),
                    "params": p,
                    "time_bound": wf.tm,
                })),
                _ => format!("{shown}\n"),
            })
        }
        Command::Diagram { semi, compressed, disk, start, input: from } => {
            let b = s.build()?;
            let m = b.machine();
            let level = if *disk { Level::G } else { Level::M };
            let p = s.presentation(&b, level)?;
            let d = if let Some(path) = from {
                GridDiagram::from_json(&read(path)?, &p).map_err(input)?
            } else if *disk {
                let Built::Main(mm) = &b else {
                    return Err(CliError::Input("disk diagrams need `--kind main`".into()));
                };
                let cfg = start_config(mm, *start, s.cli.word.as_deref())?;
                build_disk_diagram(mm, &p, &cfg).map_err(|e| CliError::Rejected(e.to_string()))?
            } else {
                let h = s.history(m)?;
                match semi {
                    Some(sec) => {
                        let w = m.alphabet.parse_word(s.word()?).map_err(input)?;
                        if *compressed {
                            let sc = compressed_semi(m, *sec, &w, &h).map_err(|e| CliError::Rejected(e.to_string()))?;
                            build_compressed(m, &p, &sc).map_err(|e| CliError::Rejected(e.to_string()))?
                        } else {
                            let sc = m.semi_run(&w, &h, *sec).map_err(|e| CliError::Rejected(e.to_string()))?;
                            build_semitrapezium(m, &p, &sc).map_err(|e| CliError::Rejected(e.to_string()))?
                        }
                    }
                    None => {
                        let w = m.parse_admissible(s.word()?).map_err(input)?;
                        let comp = m.run(&w, &h).map_err(|e| CliError::Rejected(e.to_string()))?;
                        build_trapezium(m, &p, &comp).map_err(|e| CliError::Rejected(e.to_string()))?
                    }
                }
            };
            verify_diagram(&d, &p).map_err(|e| CliError::Rejected(format!("diagram does not verify: {e}")))?;
            Ok(match fmt {
                Format::Structured => d.to_json(&p) + "\n",
                Format::Dot => d.to_dot(&p),
                Format::Text => {
                    let sig = d.signature();
                    let weight = match s.params() {
                        Ok(params) => {
                            let wf = params.weights(s.time_bound()?);
                            wf.show(&d.weight(&wf))
                        }
                        Err(_) => "symbolic".into(),
                    };
                    format!(
                        "kind: {:?}\nheight: {}\narea: {}\nsignature: ({}, {}, {}, {})\nweight: {weight}\nbottom: {}\ntop: {}\nverified: ok\n",
                        d.kind,
                        d.bands.len(),
                        d.area(),
                        sig[0],
                        sig[1],
                        sig[2],
                        sig[3],
                        p.alphabet.format_word(&d.bottom),
                        p.alphabet.format_word(&d.top),
                    )
                }
            })
        }
    }
}

fn start_config(mm: &MainMachine, start: StartArg, word: Option<&str>) -> Result<AdmissibleWord, CliError> {
    if start == StartArg::Ac {
        return Ok(mm.w_ac());
    }
    let text = word.ok_or_else(|| CliError::Input("--word is required".into()))?;
    let w = mm.parse_input(text).map_err(input)?;
    Ok(if start == StartArg::I { mm.i_config(&w) } else { mm.j_config(&w) })
}

/// Parses `args`, runs the command, prints its output and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(e) => {
            eprintln!("smforge: {e}");
            e.code()
        }
    }
}
