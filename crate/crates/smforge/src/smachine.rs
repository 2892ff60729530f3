//! Generalized S-machines: hardware, rules, admissible words, rule
//! application, computations and semi-computations.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::words::{validate_basis, Alphabet, Basis, Kind, Letter, Sym, TapeSub, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MachineError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("tape count {tapes} does not match {parts} parts (cyclic = {cyclic})")]
    TapeCount { parts: usize, tapes: usize, cyclic: bool },
    #[error("symbol `{0}` is not placed in the part or sector its kind declares")]
    Misplaced(String),
    #[error("part {0} has no letters or its start/end letter is foreign")]
    BadPart(usize),
    #[error("input sector {0} does not exist")]
    BadInputSector(usize),
    #[error("rule `{rule}`: {msg}")]
    BadRule { rule: String, msg: String },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn bad_rule(rule: &str, msg: impl Into<String>) -> MachineError {
    MachineError::BadRule { rule: rule.to_string(), msg: msg.into() }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Part {
    pub name: String,
    pub letters: Vec<Sym>,
    pub start: Sym,
    pub end: Sym,
}

/// Parts `Q_0..Q_s` and tape alphabets `Y_1..Y_s` (plus `Y_{s+1}` when cyclic).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hardware {
    pub parts: Vec<Part>,
    pub tapes: Vec<Vec<Sym>>,
    pub cyclic: bool,
    pub input_sectors: Vec<usize>,
}

impl Hardware {
    /// Index `s` of the last part.
    pub fn s(&self) -> usize {
        self.parts.len() - 1
    }

    pub fn num_sectors(&self) -> usize {
        self.tapes.len()
    }

    /// Sector immediately left of part `i`.
    pub fn left_sector(&self, i: usize) -> Option<usize> {
        if i >= 1 {
            Some(i)
        } else if self.cyclic {
            Some(self.s() + 1)
        } else {
            None
        }
    }

    /// Sector immediately right of part `i`.
    pub fn right_sector(&self, i: usize) -> Option<usize> {
        if i < self.s() {
            Some(i + 1)
        } else if self.cyclic {
            Some(self.s() + 1)
        } else {
            None
        }
    }

    pub fn tape(&self, sector: usize) -> &[Sym] {
        &self.tapes[sector - 1]
    }
}

/// One part of a rule: `from -> u to v`, with `u` in the left sector and `v` in the right one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartRule {
    pub from: Sym,
    pub u: Word,
    pub to: Sym,
    pub v: Word,
}

/// Action of a rule on one sector.
#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum SectorRule {
    Locked,
    /// `f(x[j]) = z[f[j]]`.
    Map { x: Basis, z: Basis, f: Vec<usize> },
}

impl SectorRule {
    pub fn identity(letters: impl IntoIterator<Item = Sym>) -> Self {
        let b: Vec<Sym> = letters.into_iter().collect();
        if b.is_empty() {
            return SectorRule::Locked;
        }
        let n = b.len();
        SectorRule::Map { x: Basis::letters(b.clone()), z: Basis::letters(b), f: (0..n).collect() }
    }

    /// Map given as pairs `x -> f(x)`.
    pub fn from_pairs(pairs: Vec<(Word, Word)>) -> Self {
        if pairs.is_empty() {
            return SectorRule::Locked;
        }
        let n = pairs.len();
        let (x, z): (Vec<Word>, Vec<Word>) = pairs.into_iter().unzip();
        SectorRule::Map { x: Basis::new(x), z: Basis::new(z), f: (0..n).collect() }
    }

    pub fn is_locked(&self) -> bool {
        matches!(self, SectorRule::Locked)
    }

    pub fn inverse(&self) -> SectorRule {
        match self {
            SectorRule::Locked => SectorRule::Locked,
            SectorRule::Map { x, z, f } => {
                let mut g = vec![0; f.len()];
                for (j, &k) in f.iter().enumerate() {
                    g[k] = j;
                }
                SectorRule::Map { x: z.clone(), z: x.clone(), f: g }
            }
        }
    }

    /// Pairs `(x, f(x))` in domain order.
    pub fn pairs(&self) -> Vec<(Word, Word)> {
        match self {
            SectorRule::Locked => Vec::new(),
            SectorRule::Map { x, z, f } => x
                .words()
                .iter()
                .zip(f)
                .map(|(w, &k)| (w.clone(), z.words()[k].clone()))
                .collect(),
        }
    }

    /// `f̃(w)`, or `None` when `w` is not in the domain subgroup.
    pub fn image(&self, w: &Word) -> Option<Word> {
        match self {
            SectorRule::Locked => w.is_empty().then(Word::empty),
            SectorRule::Map { x, z, f } => {
                let e = x.express(w).ok()??;
                Some(e.terms.substitute(|s| z.words()[f[s.0 as usize]].clone()))
            }
        }
    }

    /// Term count of `w` in the domain basis.
    pub fn theta_length(&self, w: &Word) -> Option<usize> {
        match self {
            SectorRule::Locked => w.is_empty().then_some(0),
            SectorRule::Map { x, .. } => x.express(w).ok()?.map(|e| e.len()),
        }
    }

    pub fn domain(&self) -> &[Word] {
        match self {
            SectorRule::Locked => &[],
            SectorRule::Map { x, .. } => x.words(),
        }
    }

    pub fn codomain(&self) -> &[Word] {
        match self {
            SectorRule::Locked => &[],
            SectorRule::Map { z, .. } => z.words(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub parts: Vec<PartRule>,
    /// Indexed by sector minus one.
    pub sectors: Vec<SectorRule>,
}

impl Rule {
    pub fn sector(&self, i: usize) -> &SectorRule {
        &self.sectors[i - 1]
    }

    pub fn locks(&self, sector: usize) -> bool {
        self.sectors[sector - 1].is_locked()
    }
}

/// Inverse rule: domains and codomains swap, and part `q -> u q' v` becomes
/// `q' -> f̃⁻¹(u⁻¹) q f̃⁻¹(v⁻¹)`.
pub fn invert_rule(hw: &Hardware, rule: &Rule) -> Rule {
    let sectors: Vec<SectorRule> = rule.sectors.iter().map(|s| s.inverse()).collect();
    let map_back = |sector: Option<usize>, w: &Word| -> Word {
        match sector {
            Some(i) if !w.is_empty() => sectors[i - 1].image(&w.inverse()).unwrap_or_else(|| w.inverse()),
            _ => w.inverse(),
        }
    };
    let parts = rule
        .parts
        .iter()
        .enumerate()
        .map(|(i, p)| PartRule {
            from: p.to,
            u: map_back(hw.left_sector(i), &p.u),
            to: p.from,
            v: map_back(hw.right_sector(i), &p.v),
        })
        .collect();
    Rule { name: rule.name.clone(), parts, sectors }
}

/// Signed rule reference.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub rule: usize,
    pub inv: bool,
}

impl Step {
    pub fn pos(rule: usize) -> Self {
        Step { rule, inv: false }
    }
    pub fn neg(rule: usize) -> Self {
        Step { rule, inv: true }
    }
    pub fn inverse(self) -> Self {
        Step { rule: self.rule, inv: !self.inv }
    }
}

pub type History = Vec<Step>;

/// Freely reduces a history over signed rule ids.
pub fn reduce_history(h: &[Step]) -> History {
    let mut out: History = Vec::new();
    for &s in h {
        if out.last() == Some(&s.inverse()) {
            out.pop();
        } else {
            out.push(s);
        }
    }
    out
}

pub fn is_reduced_history(h: &[Step]) -> bool {
    h.windows(2).all(|p| p[0] != p[1].inverse())
}

pub fn invert_history(h: &[Step]) -> History {
    h.iter().rev().map(|s| s.inverse()).collect()
}

/// A frozen machine: alphabet, hardware and positive rules.
#[derive(Clone, Debug)]
pub struct Machine {
    pub alphabet: Alphabet,
    pub hw: Hardware,
    pub rules: Vec<Rule>,
    inverses: Vec<Rule>,
    by_name: HashMap<String, usize>,
}

impl PartialEq for Machine {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet && self.hw == other.hw && self.rules == other.rules
    }
}

impl Machine {
    pub fn new(alphabet: Alphabet, hw: Hardware, rules: Vec<Rule>) -> Result<Machine, MachineError> {
        validate_hardware(&alphabet, &hw)?;
        let mut by_name = HashMap::new();
        for (k, r) in rules.iter().enumerate() {
            validate_rule(&alphabet, &hw, r)?;
            if by_name.insert(r.name.clone(), k).is_some() {
                return Err(bad_rule(&r.name, "duplicate rule name"));
            }
        }
        let inverses = rules.iter().map(|r| invert_rule(&hw, r)).collect();
        Ok(Machine { alphabet, hw, rules, inverses, by_name })
    }

    pub fn rule(&self, step: Step) -> &Rule {
        if step.inv {
            &self.inverses[step.rule]
        } else {
            &self.rules[step.rule]
        }
    }

    pub fn rule_index(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn part_of(&self, s: Sym) -> Option<usize> {
        match self.alphabet.kind(s) {
            Kind::State { part } => Some(part),
            _ => None,
        }
    }

    pub fn sector_of(&self, s: Sym) -> Option<usize> {
        match self.alphabet.kind(s) {
            Kind::Tape { sector, .. } => Some(sector),
            _ => None,
        }
    }

    pub fn format_step(&self, s: Step) -> String {
        let n = &self.rules[s.rule].name;
        if s.inv {
            format!("{n}^-1")
        } else {
            n.clone()
        }
    }

    pub fn format_history(&self, h: &[Step]) -> String {
        if h.is_empty() {
            return "1".to_string();
        }
        h.iter().map(|&s| self.format_step(s)).collect::<Vec<_>>().join(" ")
    }

    pub fn parse_history(&self, text: &str) -> Result<History, MachineError> {
        let text = text.trim();
        if text.is_empty() || text == "1" {
            return Ok(Vec::new());
        }
        text.split_whitespace()
            .map(|tok| {
                let (name, inv) = match tok.strip_suffix("^-1") {
                    Some(n) => (n, true),
                    None => (tok, false),
                };
                self.rule_index(name)
                    .map(|rule| Step { rule, inv })
                    .ok_or_else(|| MachineError::Parse { line: 0, msg: format!("unknown rule `{name}`") })
            })
            .collect()
    }

    pub fn start_config(&self) -> AdmissibleWord {
        AdmissibleWord::standard(self.hw.parts.iter().map(|p| p.start).collect(), vec![Word::empty(); self.hw.s()])
    }

    /// Configuration with all end letters and empty tapes.
    pub fn accept_config(&self) -> AdmissibleWord {
        AdmissibleWord::standard(self.hw.parts.iter().map(|p| p.end).collect(), vec![Word::empty(); self.hw.s()])
    }

    /// Parses an admissible word written as a plain word over the machine alphabet.
    pub fn parse_admissible(&self, text: &str) -> Result<AdmissibleWord, ApplyError> {
        let w = self.alphabet.parse_word(text).map_err(|e| ApplyError::NotAdmissible(e.to_string()))?;
        AdmissibleWord::from_word(self, &w)
    }

    pub fn format_admissible(&self, w: &AdmissibleWord) -> String {
        self.alphabet.format_word(&w.to_word())
    }

    /// Sector of the tape factor between two state letters.
    pub fn window_sector(&self, left: Letter, right: Letter) -> Option<usize> {
        let i = self.part_of(left.sym)?;
        let j = self.part_of(right.sym)?;
        let s = self.hw.s();
        let cyc = self.hw.cyclic;
        match (left.inv, right.inv) {
            (false, false) => {
                if j == i + 1 {
                    Some(j)
                } else if cyc && i == s && j == 0 {
                    Some(s + 1)
                } else {
                    None
                }
            }
            (true, true) => {
                if i == j + 1 {
                    Some(i)
                } else if cyc && j == s && i == 0 {
                    Some(s + 1)
                } else {
                    None
                }
            }
            (false, true) => (i == j).then(|| self.hw.right_sector(i)).flatten(),
            (true, false) => (i == j).then(|| self.hw.left_sector(i)).flatten(),
        }
    }

    /// Base shape matches and every tape factor lies in its sector's domain subgroup.
    pub fn is_admissible(&self, w: &AdmissibleWord, step: Step) -> bool {
        let Ok(sectors) = self.check_admissible(w, step) else { return false };
        let rule = self.rule(step);
        sectors.iter().zip(&w.tapes).all(|(&sec, t)| rule.sector(sec).theta_length(t).is_some())
    }

    fn check_admissible(&self, w: &AdmissibleWord, step: Step) -> Result<Vec<usize>, ApplyError> {
        let rule = self.rule(step);
        for (k, q) in w.states.iter().enumerate() {
            let part = self.part_of(q.sym).ok_or(ApplyError::NotAdmissible("non-state letter in base".into()))?;
            if rule.parts[part].from != q.sym {
                return Err(ApplyError::StateMismatch {
                    position: k,
                    expected: self.alphabet.name(rule.parts[part].from).to_string(),
                    found: self.alphabet.name(q.sym).to_string(),
                });
            }
        }
        let mut sectors = Vec::with_capacity(w.tapes.len());
        for k in 0..w.tapes.len() {
            let sec = self
                .window_sector(w.states[k], w.states[k + 1])
                .ok_or_else(|| ApplyError::NotAdmissible(format!("bad base at factor {k}")))?;
            sectors.push(sec);
        }
        Ok(sectors)
    }

    /// `W·θ`.
    pub fn apply(&self, w: &AdmissibleWord, step: Step) -> Result<AdmissibleWord, ApplyError> {
        let sectors = self.check_admissible(w, step)?;
        let rule = self.rule(step);
        let mut out = Word::empty();
        for (k, q) in w.states.iter().enumerate() {
            let part = self.part_of(q.sym).unwrap_or(0);
            let pr = &rule.parts[part];
            if q.inv {
                out.append(&pr.v.inverse());
                out.push(Letter::neg(pr.to));
                out.append(&pr.u.inverse());
            } else {
                out.append(&pr.u);
                out.push(Letter::pos(pr.to));
                out.append(&pr.v);
            }
            if k < w.tapes.len() {
                let sec = sectors[k];
                let img = rule.sector(sec).image(&w.tapes[k]).ok_or(ApplyError::SectorNonMember { factor: k, sector: sec })?;
                out.append(&img);
            }
        }
        let res = self.split(&out)?;
        if res.states.len() != w.states.len() {
            return Err(ApplyError::TapeCrossing("state letters cancelled".into()));
        }
        Ok(res)
    }

    /// Splits a word at state letters, trimming tape letters outside the first and last ones.
    fn split(&self, w: &Word) -> Result<AdmissibleWord, ApplyError> {
        let mut states = Vec::new();
        let mut tapes = Vec::new();
        let mut cur = Word::empty();
        for &l in w.letters() {
            if self.part_of(l.sym).is_some() {
                if !states.is_empty() {
                    tapes.push(std::mem::take(&mut cur));
                } else {
                    cur = Word::empty();
                }
                states.push(l);
            } else {
                cur.push(l);
            }
        }
        let aw = AdmissibleWord { states, tapes };
        for k in 0..aw.tapes.len() {
            let sec = self
                .window_sector(aw.states[k], aw.states[k + 1])
                .ok_or_else(|| ApplyError::NotAdmissible(format!("bad base at factor {k}")))?;
            if aw.tapes[k].letters().iter().any(|l| self.sector_of(l.sym) != Some(sec)) {
                return Err(ApplyError::TapeCrossing(format!("factor {k} leaves sector {sec}")));
            }
        }
        Ok(aw)
    }

    /// `l_θ(W) = (k+1) + Σ l_θ(w_i)`.
    pub fn theta_length(&self, w: &AdmissibleWord, step: Step) -> Result<usize, ApplyError> {
        let sectors = self.check_admissible(w, step)?;
        let rule = self.rule(step);
        let mut n = w.states.len();
        for (k, &sec) in sectors.iter().enumerate() {
            n += rule.sector(sec).theta_length(&w.tapes[k]).ok_or(ApplyError::SectorNonMember { factor: k, sector: sec })?;
        }
        Ok(n)
    }

    /// `w·θ` for a single sector word.
    pub fn semi_apply(&self, w: &Word, step: Step, sector: usize) -> Result<Word, ApplyError> {
        self.rule(step).sector(sector).image(w).ok_or(ApplyError::SectorNonMember { factor: 0, sector })
    }

    pub fn semi_theta_length(&self, w: &Word, step: Step, sector: usize) -> Result<usize, ApplyError> {
        self.rule(step).sector(sector).theta_length(w).ok_or(ApplyError::SectorNonMember { factor: 0, sector })
    }

    pub fn run(&self, w: &AdmissibleWord, history: &[Step]) -> Result<Computation, RunError> {
        let end = self.run_final(w, history)?;
        Ok(Computation { start: w.clone(), history: history.to_vec(), end })
    }

    /// Replays a history and returns only the last word.
    pub fn run_final(&self, w: &AdmissibleWord, history: &[Step]) -> Result<AdmissibleWord, RunError> {
        let mut cur = w.clone();
        for (k, &s) in history.iter().enumerate() {
            cur = self.apply(&cur, s).map_err(|source| RunError { step: k, source })?;
        }
        Ok(cur)
    }

    pub fn semi_run(&self, w: &Word, history: &[Step], sector: usize) -> Result<SemiComputation, RunError> {
        let mut cur = w.clone();
        for (k, &s) in history.iter().enumerate() {
            cur = self.semi_apply(&cur, s, sector).map_err(|source| RunError { step: k, source })?;
        }
        Ok(SemiComputation { sector, start: w.clone(), history: history.to_vec(), end: cur })
    }
}

fn validate_hardware(al: &Alphabet, hw: &Hardware) -> Result<(), MachineError> {
    if hw.parts.is_empty() {
        return Err(MachineError::BadPart(0));
    }
    let expected = hw.parts.len() - 1 + usize::from(hw.cyclic);
    if hw.tapes.len() != expected {
        return Err(MachineError::TapeCount { parts: hw.parts.len(), tapes: hw.tapes.len(), cyclic: hw.cyclic });
    }
    let mut seen = vec![false; al.len()];
    for (i, p) in hw.parts.iter().enumerate() {
        if p.letters.is_empty() || !p.letters.contains(&p.start) || !p.letters.contains(&p.end) {
            return Err(MachineError::BadPart(i));
        }
        for &s in &p.letters {
            if al.kind(s) != (Kind::State { part: i }) || std::mem::replace(&mut seen[s.0 as usize], true) {
                return Err(MachineError::Misplaced(al.name(s).to_string()));
            }
        }
    }
    for (k, t) in hw.tapes.iter().enumerate() {
        for &s in t {
            let ok = matches!(al.kind(s), Kind::Tape { sector, .. } if sector == k + 1);
            if !ok || std::mem::replace(&mut seen[s.0 as usize], true) {
                return Err(MachineError::Misplaced(al.name(s).to_string()));
            }
        }
    }
    if let Some(s) = al.symbols().find(|s| !seen[s.0 as usize]) {
        return Err(MachineError::Misplaced(al.name(s).to_string()));
    }
    for &i in &hw.input_sectors {
        if i == 0 || i > hw.tapes.len() {
            return Err(MachineError::BadInputSector(i));
        }
    }
    Ok(())
}

fn word_in_sector(al: &Alphabet, w: &Word, sector: usize) -> bool {
    w.letters().iter().all(|l| matches!(al.kind(l.sym), Kind::Tape { sector: s, .. } if s == sector))
}

fn validate_rule(al: &Alphabet, hw: &Hardware, r: &Rule) -> Result<(), MachineError> {
    if r.parts.len() != hw.parts.len() {
        return Err(bad_rule(&r.name, "wrong number of parts"));
    }
    if r.sectors.len() != hw.tapes.len() {
        return Err(bad_rule(&r.name, "wrong number of sectors"));
    }
    for (i, sr) in r.sectors.iter().enumerate() {
        if let SectorRule::Map { x, z, f } = sr {
            let sec = i + 1;
            if x.len() != z.len() || f.len() != x.len() || x.is_empty() {
                return Err(bad_rule(&r.name, format!("sector {sec}: domain and codomain sizes differ")));
            }
            let mut hit = vec![false; f.len()];
            for &k in f {
                if k >= hit.len() || std::mem::replace(&mut hit[k], true) {
                    return Err(bad_rule(&r.name, format!("sector {sec}: f is not a bijection")));
                }
            }
            for w in x.words().iter().chain(z.words()) {
                if w.is_empty() || !word_in_sector(al, w, sec) {
                    return Err(bad_rule(&r.name, format!("sector {sec}: basis word outside the sector")));
                }
            }
            if !validate_basis(x.words()) || !validate_basis(z.words()) {
                return Err(bad_rule(&r.name, format!("sector {sec}: basis is not free")));
            }
        }
    }
    for (i, p) in r.parts.iter().enumerate() {
        let part = &hw.parts[i];
        if !part.letters.contains(&p.from) || !part.letters.contains(&p.to) {
            return Err(bad_rule(&r.name, format!("part {i}: state letters outside the part")));
        }
        for (w, sec) in [(&p.u, hw.left_sector(i)), (&p.v, hw.right_sector(i))] {
            if w.is_empty() {
                continue;
            }
            let ok = match sec {
                None => false,
                Some(sec) => match r.sector(sec) {
                    SectorRule::Locked => false,
                    SectorRule::Map { z, .. } => z.contains(w),
                },
            };
            if !ok {
                return Err(bad_rule(&r.name, format!("part {i}: inserted word is outside the sector codomain")));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApplyError {
    #[error("state letter at position {position} is `{found}`, rule expects `{expected}`")]
    StateMismatch { position: usize, expected: String, found: String },
    #[error("tape factor {factor} is not in the rule's domain for sector {sector}")]
    SectorNonMember { factor: usize, sector: usize },
    #[error("tape remnant crosses its sector: {0}")]
    TapeCrossing(String),
    #[error("not an admissible word: {0}")]
    NotAdmissible(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("step {step} is inadmissible: {source}")]
pub struct RunError {
    pub step: usize,
    pub source: ApplyError,
}

/// An admissible word `q_0^{ε_0} w_1 q_1^{ε_1} … w_k q_k^{ε_k}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AdmissibleWord {
    pub states: Vec<Letter>,
    pub tapes: Vec<Word>,
}

impl AdmissibleWord {
    pub fn standard(states: Vec<Sym>, tapes: Vec<Word>) -> Self {
        AdmissibleWord { states: states.into_iter().map(Letter::pos).collect(), tapes }
    }

    pub fn from_word(m: &Machine, w: &Word) -> Result<AdmissibleWord, ApplyError> {
        let l = w.letters();
        if l.is_empty() || m.part_of(l[0].sym).is_none() || m.part_of(l[l.len() - 1].sym).is_none() {
            return Err(ApplyError::NotAdmissible("must begin and end with state letters".into()));
        }
        let aw = m.split(w)?;
        if aw.to_word() != *w {
            return Err(ApplyError::NotAdmissible("word is not reduced".into()));
        }
        Ok(aw)
    }

    pub fn to_word(&self) -> Word {
        let mut out = Word::empty();
        for (k, q) in self.states.iter().enumerate() {
            out.push(*q);
            if k < self.tapes.len() {
                out.append(&self.tapes[k]);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.states.len() + self.tapes.iter().map(|t| t.len()).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Total tape length `|W|_a`.
    pub fn a_len(&self) -> usize {
        self.tapes.iter().map(|t| t.len()).sum()
    }
}

/// A computation stored by endpoints and history; intermediate words are replayed on demand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Computation {
    pub start: AdmissibleWord,
    pub history: History,
    pub end: AdmissibleWord,
}

impl Computation {
    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        is_reduced_history(&self.history)
    }

    pub fn words<'a>(&'a self, m: &'a Machine) -> impl Iterator<Item = AdmissibleWord> + 'a {
        let mut cur = Some(self.start.clone());
        let mut k = 0;
        std::iter::from_fn(move || {
            let w = cur.take()?;
            if k < self.history.len() {
                cur = m.apply(&w, self.history[k]).ok();
                k += 1;
            }
            Some(w)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemiComputation {
    pub sector: usize,
    pub start: Word,
    pub history: History,
    pub end: Word,
}

impl SemiComputation {
    pub fn words<'a>(&'a self, m: &'a Machine) -> impl Iterator<Item = Word> + 'a {
        let mut cur = Some(self.start.clone());
        let mut k = 0;
        std::iter::from_fn(move || {
            let w = cur.take()?;
            if k < self.history.len() {
                cur = m.semi_apply(&w, self.history[k], self.sector).ok();
                k += 1;
            }
            Some(w)
        })
    }
}

/// Form of a positive rule in one sector, in the noisy-machine classification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NoisyForm {
    Locked,
    /// Identity on a set of letters.
    Identity,
    /// A letter bijection shared by every rule of this form in the sector.
    Bijection,
    /// Identity on the auxiliary letters and `m -> v(θ,m)·m` on the marked ones.
    Noise { marked: Vec<(Sym, Word)> },
}

#[derive(Clone, Debug, Default)]
pub struct NoisyReport {
    /// `(rule, sector, form)` for every positive rule and sector.
    pub forms: Vec<(usize, usize, NoisyForm)>,
    /// Per sector, the collected noise words `S_i`.
    pub noise_sets: Vec<(usize, Vec<Word>)>,
    pub violations: Vec<String>,
}

impl NoisyReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn single_letter(w: &Word) -> Option<Sym> {
    (w.len() == 1 && w.is_positive()).then(|| w.letters()[0].sym)
}

/// Classifies every positive rule in every sector and checks that each noise set is a free basis.
pub fn validate_noisy(m: &Machine) -> NoisyReport {
    let mut rep = NoisyReport::default();
    for sec in 1..=m.hw.num_sectors() {
        let mut bijection: Option<Vec<(Sym, Sym)>> = None;
        let mut noise: Vec<Word> = Vec::new();
        let mut aux_set: Option<Vec<Sym>> = None;
        let mut marked_set: Option<Vec<Sym>> = None;
        for (ri, r) in m.rules.iter().enumerate() {
            let sr = r.sector(sec);
            let pairs = sr.pairs();
            let form = if sr.is_locked() {
                NoisyForm::Locked
            } else if pairs.iter().all(|(x, z)| single_letter(x).is_some() && x == z) {
                NoisyForm::Identity
            } else if pairs.iter().all(|(x, z)| single_letter(x).is_some() && single_letter(z).is_some()) {
                let mut map: Vec<(Sym, Sym)> = pairs
                    .iter()
                    .filter_map(|(x, z)| Some((single_letter(x)?, single_letter(z)?)))
                    .collect();
                map.sort();
                match &bijection {
                    Some(b) if *b != map => rep.violations.push(format!(
                        "rule `{}` sector {sec}: letter bijection differs from the sector's fixed bijection",
                        r.name
                    )),
                    Some(_) => {}
                    None => bijection = Some(map),
                }
                NoisyForm::Bijection
            } else {
                let mut marked = Vec::new();
                let mut aux = Vec::new();
                let mut ok = true;
                for (x, z) in &pairs {
                    let Some(xs) = single_letter(x) else {
                        ok = false;
                        break;
                    };
                    if x == z {
                        aux.push(xs);
                    } else if z.last() == Some(Letter::pos(xs)) {
                        marked.push((xs, z.slice(0, z.len() - 1)));
                    } else {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    rep.violations.push(format!("rule `{}` sector {sec}: map fits none of the three forms", r.name));
                    rep.forms.push((ri, sec, NoisyForm::Locked));
                    continue;
                }
                aux.sort();
                let mut ms: Vec<Sym> = marked.iter().map(|(s, _)| *s).collect();
                ms.sort();
                for (v, _) in marked.iter().map(|(s, v)| (v, s)) {
                    if v.letters().iter().any(|l| !aux.contains(&l.sym)) {
                        rep.violations.push(format!("rule `{}` sector {sec}: noise word leaves the auxiliary letters", r.name));
                    }
                }
                if aux_set.get_or_insert_with(|| aux.clone()) != &aux || marked_set.get_or_insert_with(|| ms.clone()) != &ms {
                    rep.violations.push(format!("rule `{}` sector {sec}: marked/auxiliary split differs between rules", r.name));
                }
                noise.extend(marked.iter().map(|(_, v)| v.clone()));
                NoisyForm::Noise { marked }
            };
            rep.forms.push((ri, sec, form));
        }
        if !noise.is_empty() {
            // S_i is a set: copies of a rule contribute the same noise word once
            noise.sort_by(|a, b| a.letters().cmp(b.letters()));
            noise.dedup();
            if !validate_basis(&noise) {
                rep.violations.push(format!("sector {sec}: noise words do not form a free basis"));
            }
            rep.noise_sets.push((sec, noise));
        }
    }
    rep
}

// ---------------------------------------------------------------------------
// Text format

fn tape_marker(sub: TapeSub) -> &'static str {
    match sub {
        TapeSub::ALetter => "@A",
        TapeSub::BLetter => "@b",
        TapeSub::Ordinary => "",
    }
}

/// Serializes a machine in the line format read by [`parse_machine`].
pub fn format_machine(m: &Machine) -> String {
    let al = &m.alphabet;
    let mut out = String::new();
    if m.hw.cyclic {
        out.push_str("CYCLIC\n");
    }
    if !m.hw.input_sectors.is_empty() {
        let v: Vec<String> = m.hw.input_sectors.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "INPUT {}", v.join(" "));
    }
    for (i, p) in m.hw.parts.iter().enumerate() {
        let names: Vec<&str> = p.letters.iter().map(|&s| al.name(s)).collect();
        let _ = writeln!(
            out,
            "PART {i}: {} [name={},start={},end={}]",
            names.join(" "),
            p.name,
            al.name(p.start),
            al.name(p.end)
        );
    }
    for (k, t) in m.hw.tapes.iter().enumerate() {
        let names: Vec<String> = t
            .iter()
            .map(|&s| match al.kind(s) {
                Kind::Tape { sub, .. } => format!("{}{}", al.name(s), tape_marker(sub)),
                _ => al.name(s).to_string(),
            })
            .collect();
        let _ = writeln!(out, "TAPE {}: {}", k + 1, names.join(" ")).map(|_| ());
        if names.is_empty() {
            out.pop();
            out.push('\n');
        }
    }
    let set = |ws: &[Word]| -> String {
        let v: Vec<String> = ws.iter().map(|w| al.format_word(w)).collect();
        format!("{{{}}}", v.join(", "))
    };
    for r in &m.rules {
        for (i, p) in r.parts.iter().enumerate() {
            let mut rhs = Vec::new();
            if !p.u.is_empty() {
                rhs.push(al.format_word(&p.u));
            }
            rhs.push(al.name(p.to).to_string());
            if !p.v.is_empty() {
                rhs.push(al.format_word(&p.v));
            }
            let _ = write!(out, "RULE {}: {i}: {} -> {}", r.name, al.name(p.from), rhs.join(" "));
            if let Some(sec) = m.hw.right_sector(i) {
                if let SectorRule::Map { x, z, f } = r.sector(sec) {
                    let fs: Vec<String> = f.iter().map(|k| k.to_string()).collect();
                    let _ = write!(out, " | X={} Z={} f=[{}]", set(x.words()), set(z.words()), fs.join(","));
                }
            }
            out.push('\n');
        }
        for sec in 1..=m.hw.num_sectors() {
            if r.locks(sec) {
                let _ = writeln!(out, "LOCK {} {sec}", r.name);
            }
        }
    }
    out
}

struct RuleDraft {
    name: String,
    parts: Vec<Option<PartRule>>,
    sectors: Vec<Option<SectorRule>>,
}

/// Parses the line format produced by [`format_machine`].
pub fn parse_machine(text: &str) -> Result<Machine, MachineError> {
    let perr = |line: usize, msg: &str| MachineError::Parse { line, msg: msg.to_string() };
    let mut cyclic = false;
    let mut inputs = Vec::new();
    let mut part_lines: Vec<(usize, usize, String)> = Vec::new();
    let mut tape_lines: Vec<(usize, usize, String)> = Vec::new();
    let mut rule_lines: Vec<(usize, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let ln = n + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "CYCLIC" {
            cyclic = true;
        } else if let Some(rest) = line.strip_prefix("INPUT ") {
            for t in rest.split_whitespace() {
                inputs.push(t.parse::<usize>().map_err(|_| perr(ln, "bad input sector"))?);
            }
        } else if let Some(rest) = line.strip_prefix("PART ") {
            let (idx, body) = rest.split_once(':').ok_or_else(|| perr(ln, "expected `PART i: ...`"))?;
            let idx = idx.trim().parse::<usize>().map_err(|_| perr(ln, "bad part index"))?;
            part_lines.push((ln, idx, body.trim().to_string()));
        } else if let Some(rest) = line.strip_prefix("TAPE ") {
            let (idx, body) = match rest.split_once(':') {
                Some((i, b)) => (i, b),
                None => (rest, ""),
            };
            let idx = idx.trim().parse::<usize>().map_err(|_| perr(ln, "bad tape index"))?;
            tape_lines.push((ln, idx, body.trim().to_string()));
        } else if line.starts_with("RULE ") || line.starts_with("LOCK ") {
            rule_lines.push((ln, line.to_string()));
        } else {
            return Err(perr(ln, "unrecognized line"));
        }
    }
    let mut al = Alphabet::new();
    let mut parts: Vec<Option<Part>> = vec![None; part_lines.len()];
    for (ln, idx, body) in &part_lines {
        let (ln, idx) = (*ln, *idx);
        if idx >= parts.len() || parts[idx].is_some() {
            return Err(perr(ln, "part indices must be 0..n without repeats"));
        }
        let (names, meta) = match body.split_once('[') {
            Some((a, b)) => (a, b.trim_end_matches(']')),
            None => (body.as_str(), ""),
        };
        let mut letters = Vec::new();
        for nm in names.split_whitespace() {
            letters.push(al.add(nm, Kind::State { part: idx })?);
        }
        let mut name = format!("Q{idx}");
        let mut start = letters.first().copied();
        let mut end = letters.last().copied();
        for kv in meta.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| perr(ln, "bad part attribute"))?;
            match k.trim() {
                "name" => name = v.trim().to_string(),
                "start" => start = Some(al.get(v.trim()).ok_or_else(|| perr(ln, "unknown start letter"))?),
                "end" => end = Some(al.get(v.trim()).ok_or_else(|| perr(ln, "unknown end letter"))?),
                _ => return Err(perr(ln, "unknown part attribute")),
            }
        }
        let (Some(start), Some(end)) = (start, end) else {
            return Err(perr(ln, "empty part"));
        };
        parts[idx] = Some(Part { name, letters, start, end });
    }
    let parts: Vec<Part> = parts.into_iter().collect::<Option<_>>().ok_or_else(|| perr(0, "missing part"))?;
    let mut tapes: Vec<Option<Vec<Sym>>> = vec![None; tape_lines.len()];
    for (ln, idx, body) in &tape_lines {
        let (ln, idx) = (*ln, *idx);
        if idx == 0 || idx > tapes.len() || tapes[idx - 1].is_some() {
            return Err(perr(ln, "tape indices must be 1..n without repeats"));
        }
        let mut t = Vec::new();
        for tok in body.split_whitespace() {
            let (nm, sub) = if let Some(n) = tok.strip_suffix("@A") {
                (n, TapeSub::ALetter)
            } else if let Some(n) = tok.strip_suffix("@b") {
                (n, TapeSub::BLetter)
            } else {
                (tok, TapeSub::Ordinary)
            };
            t.push(al.add(nm, Kind::Tape { sector: idx, sub })?);
        }
        tapes[idx - 1] = Some(t);
    }
    let tapes: Vec<Vec<Sym>> = tapes.into_iter().collect::<Option<_>>().ok_or_else(|| perr(0, "missing tape"))?;
    if parts.is_empty() {
        return Err(perr(0, "no parts"));
    }
    let hw = Hardware { parts, tapes, cyclic, input_sectors: inputs };
    if hw.tapes.len() != hw.parts.len() - 1 + usize::from(cyclic) {
        return Err(MachineError::TapeCount { parts: hw.parts.len(), tapes: hw.tapes.len(), cyclic });
    }

    let mut drafts: Vec<RuleDraft> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let nparts = hw.parts.len();
    let nsec = hw.tapes.len();
    let mut draft = |name: &str, drafts: &mut Vec<RuleDraft>| -> usize {
        *index.entry(name.to_string()).or_insert_with(|| {
            drafts.push(RuleDraft { name: name.to_string(), parts: vec![None; nparts], sectors: vec![None; nsec] });
            drafts.len() - 1
        })
    };
    for (ln, line) in &rule_lines {
        let ln = *ln;
        if let Some(rest) = line.strip_prefix("LOCK ") {
            let mut it = rest.split_whitespace();
            let (Some(name), Some(sec), None) = (it.next(), it.next(), it.next()) else {
                return Err(perr(ln, "expected `LOCK name i`"));
            };
            let sec = sec.parse::<usize>().map_err(|_| perr(ln, "bad sector"))?;
            if sec == 0 || sec > nsec {
                return Err(perr(ln, "sector out of range"));
            }
            let d = draft(name, &mut drafts);
            if drafts[d].sectors[sec - 1].replace(SectorRule::Locked).is_some() {
                return Err(perr(ln, "sector given twice"));
            }
            continue;
        }
        let rest = &line["RULE ".len()..];
        let (name, rest) = rest.split_once(':').ok_or_else(|| perr(ln, "expected `RULE name: i: ...`"))?;
        let (idx, rest) = rest.split_once(':').ok_or_else(|| perr(ln, "expected part index"))?;
        let idx = idx.trim().parse::<usize>().map_err(|_| perr(ln, "bad part index"))?;
        if idx >= nparts {
            return Err(perr(ln, "part index out of range"));
        }
        let (subst, sector) = match rest.split_once('|') {
            Some((a, b)) => (a, Some(b)),
            None => (rest, None),
        };
        let (lhs, rhs) = subst.split_once("->").ok_or_else(|| perr(ln, "expected `q -> u q' v`"))?;
        let from = al.get(lhs.trim()).ok_or_else(|| perr(ln, "unknown state letter"))?;
        let toks: Vec<&str> = rhs.split_whitespace().collect();
        let qpos: Vec<usize> = toks
            .iter()
            .enumerate()
            .filter(|(_, t)| al.get(t).map(|s| matches!(al.kind(s), Kind::State { .. })).unwrap_or(false))
            .map(|(k, _)| k)
            .collect();
        if qpos.len() != 1 {
            return Err(perr(ln, "right side needs exactly one state letter"));
        }
        let to = al.get(toks[qpos[0]]).unwrap_or(from);
        let u = al.parse_word(&toks[..qpos[0]].join(" "))?;
        let v = al.parse_word(&toks[qpos[0] + 1..].join(" "))?;
        let d = draft(name.trim(), &mut drafts);
        if drafts[d].parts[idx].replace(PartRule { from, u, to, v }).is_some() {
            return Err(perr(ln, "part given twice"));
        }
        if let Some(sec_text) = sector {
            let sec = hw.right_sector(idx).ok_or_else(|| perr(ln, "no sector right of this part"))?;
            let sr = parse_sector(&al, sec_text).map_err(|m| perr(ln, &m))?;
            if drafts[d].sectors[sec - 1].replace(sr).is_some() {
                return Err(perr(ln, "sector given twice"));
            }
        }
    }
    let mut rules = Vec::new();
    for d in drafts {
        let parts = d
            .parts
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| bad_rule(&d.name, "missing part"))?;
        let sectors = d
            .sectors
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| bad_rule(&d.name, "sector neither mapped nor locked"))?;
        rules.push(Rule { name: d.name, parts, sectors });
    }
    Machine::new(al, hw, rules)
}

fn parse_sector(al: &Alphabet, text: &str) -> Result<SectorRule, String> {
    let grab = |key: &str, open: char, close: char| -> Result<String, String> {
        let start = text.find(key).ok_or_else(|| format!("missing {key}"))? + key.len();
        let rest = &text[start..];
        let rest = rest.strip_prefix(open).ok_or_else(|| format!("{key} must be followed by {open}"))?;
        let end = rest.find(close).ok_or_else(|| format!("unterminated {key}"))?;
        Ok(rest[..end].to_string())
    };
    let words = |s: String| -> Result<Vec<Word>, String> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| al.parse_word(t).map_err(|e| e.to_string()))
            .collect()
    };
    let x = words(grab("X=", '{', '}')?)?;
    let z = words(grab("Z=", '{', '}')?)?;
    let f = grab("f=", '[', ']')?
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| "bad f entry".to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SectorRule::Map { x: Basis::new(x), z: Basis::new(z), f })
}
