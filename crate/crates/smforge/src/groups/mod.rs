//! Group presentations of machines: `(θ,q)`-, `(θ,a)`-, hub and disk relators, the a-relator
//! set `Ω`, weights and band diagrams.

pub mod diagram;
pub mod weights;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::Pipeline;
use crate::machines::main_machine::MainMachine;
use crate::smachine::{validate_noisy, AdmissibleWord, Machine};
use crate::words::{cyclic_reduce, free_reduce, Alphabet, Kind, Letter, Sym, TapeSub, Word, WordError};

#[derive(Debug, Error)]
pub enum GroupsError {
    #[error("machine is not a valid noisy S-machine: {0}")]
    NotNoisy(String),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("diagram: {0}")]
    Diagram(String),
    #[error("parse: {0}")]
    Parse(String),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelatorClass {
    /// `(θ,q)`-relator whose state letter is not a `t`-letter.
    ThetaQ,
    /// `(θ,q)`-relator of a `t`-part.
    ThetaT,
    ThetaA,
    ThetaB,
    ThetaOrdinary,
    Hub,
    Disk,
    ARelation,
}

impl RelatorClass {
    pub fn tag(self) -> &'static str {
        match self {
            RelatorClass::ThetaQ => "theta-q",
            RelatorClass::ThetaT => "theta-t",
            RelatorClass::ThetaA => "theta-A",
            RelatorClass::ThetaB => "theta-b",
            RelatorClass::ThetaOrdinary => "theta-a",
            RelatorClass::Hub => "hub",
            RelatorClass::Disk => "disk",
            RelatorClass::ARelation => "a-rel",
        }
    }

    pub fn from_tag(t: &str) -> Option<RelatorClass> {
        use RelatorClass::*;
        [ThetaQ, ThetaT, ThetaA, ThetaB, ThetaOrdinary, Hub, Disk, ARelation].into_iter().find(|c| c.tag() == t)
    }

    pub fn is_theta_q(self) -> bool {
        matches!(self, RelatorClass::ThetaQ | RelatorClass::ThetaT)
    }

    pub fn is_theta_a(self) -> bool {
        matches!(self, RelatorClass::ThetaA | RelatorClass::ThetaB | RelatorClass::ThetaOrdinary)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relator {
    pub class: RelatorClass,
    pub word: Word,
    pub coordinate: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Level {
    /// Relations of `M(S)`.
    M,
    /// `M(S)` plus the hub.
    G,
}

/// Relators over the machine alphabet extended by the letters `θ_i`.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub alphabet: Alphabet,
    /// `theta[rule][i]` is `θ_i` for `0 ≤ i ≤ s`.
    pub theta: Vec<Vec<Sym>>,
    pub rule_names: Vec<String>,
    pub relators: Vec<Relator>,
}

fn is_t_part(name: &str) -> bool {
    name == "T" || name.starts_with("T(")
}

/// Canonical representative of a cyclic word up to rotation and inversion.
pub fn cyclic_key(w: &Word) -> Word {
    let mut best: Option<Word> = None;
    for v in [w.clone(), w.inverse()] {
        for k in 0..v.len().max(1) {
            let r = v.rotate(k);
            if best.as_ref().is_none_or(|b| r.letters() < b.letters()) {
                best = Some(r);
            }
        }
    }
    best.unwrap_or_default()
}

impl Presentation {
    pub fn theta_letter(&self, rule: usize, i: usize) -> Sym {
        let row = &self.theta[rule];
        row[i % row.len()]
    }

    pub fn counts(&self) -> BTreeMap<&'static str, usize> {
        let mut out = BTreeMap::new();
        for r in &self.relators {
            *out.entry(r.class.tag()).or_insert(0) += 1;
        }
        out
    }

    pub fn count_where(&self, pred: impl Fn(RelatorClass) -> bool) -> usize {
        self.relators.iter().filter(|r| pred(r.class)).count()
    }

    /// Lookup table for relators up to cyclic permutation and inversion.
    pub fn index(&self) -> HashMap<Word, RelatorClass> {
        self.relators.iter().map(|r| (cyclic_key(&r.word), r.class)).collect()
    }

    /// One relator per line, `tag: word`, followed by a count summary.
    pub fn format(&self) -> String {
        let mut out = String::new();
        for r in &self.relators {
            match r.coordinate {
                Some(c) => writeln!(out, "{}@{}: {}", r.class.tag(), c, self.alphabet.format_word(&r.word)),
                None => writeln!(out, "{}: {}", r.class.tag(), self.alphabet.format_word(&r.word)),
            }
            .expect("write to string");
        }
        out
    }

    pub fn format_counts(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.counts() {
            writeln!(out, "# {k} {v}").expect("write to string");
        }
        writeln!(out, "# total {}", self.relators.len()).expect("write to string");
        out
    }

    /// Parses the output of [`Presentation::format`] against this presentation's alphabet.
    pub fn parse_relators(&self, text: &str) -> Result<Vec<Relator>, GroupsError> {
        let mut out = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, word) = line.split_once(':').ok_or_else(|| GroupsError::Parse(format!("line {}: missing `:`", n + 1)))?;
            let (tag, coordinate) = match head.split_once('@') {
                Some((t, c)) => (t, Some(c.parse().map_err(|_| GroupsError::Parse(format!("line {}: bad coordinate", n + 1)))?)),
                None => (head, None),
            };
            let class = RelatorClass::from_tag(tag).ok_or_else(|| GroupsError::Parse(format!("line {}: unknown tag `{tag}`", n + 1)))?;
            out.push(Relator { class, word: self.alphabet.parse_word(word)?, coordinate });
        }
        Ok(out)
    }
}

/// Presentation of `M(S)`, or of `G(S)` with the hub added.
pub fn emit_presentation(m: &Machine, level: Level) -> Result<Presentation, GroupsError> {
    let rep = validate_noisy(m);
    if !rep.is_valid() {
        return Err(GroupsError::NotNoisy(rep.violations.join("; ")));
    }
    let s = m.hw.s();
    let mut al = m.alphabet.clone();
    let mut theta = Vec::new();
    for (k, r) in m.rules.iter().enumerate() {
        let row = (0..=s).map(|i| al.add(&format!("{}/{i}", r.name), Kind::Theta { rule: k, pos: i })).collect::<Result<Vec<_>, _>>()?;
        theta.push(row);
    }
    let mut relators = Vec::new();
    for (k, r) in m.rules.iter().enumerate() {
        let th = |i: usize| theta[k][i % (s + 1)];
        for (i, p) in r.parts.iter().enumerate() {
            // q_i θ_{i+1} = θ_i u_i q_i' v_{i+1}
            let mut w = vec![Letter::pos(p.from), Letter::pos(th(i + 1))];
            w.extend(p.v.inverse().letters().iter().copied());
            w.push(Letter::neg(p.to));
            w.extend(p.u.inverse().letters().iter().copied());
            w.push(Letter::neg(th(i)));
            let class = if is_t_part(&m.hw.parts[i].name) { RelatorClass::ThetaT } else { RelatorClass::ThetaQ };
            relators.push(Relator { class, word: Word::from_letters(w), coordinate: None });
        }
        for sec in 1..=m.hw.num_sectors() {
            let t = th(sec);
            for (x, fx) in r.sector(sec).pairs() {
                // x θ_i = θ_i f(x)
                let mut w = x.clone();
                w.push(Letter::pos(t));
                w.append(&fx.inverse());
                w.push(Letter::neg(t));
                let class = match (x.len(), x.letters().first().map(|l| m.alphabet.kind(l.sym))) {
                    (1, Some(Kind::Tape { sub: TapeSub::ALetter, .. })) => RelatorClass::ThetaA,
                    (1, Some(Kind::Tape { sub: TapeSub::BLetter, .. })) => RelatorClass::ThetaB,
                    _ => RelatorClass::ThetaOrdinary,
                };
                relators.push(Relator { class, word: w, coordinate: None });
            }
        }
    }
    if level == Level::G {
        relators.push(Relator { class: RelatorClass::Hub, word: m.accept_config().to_word(), coordinate: None });
    }
    Ok(Presentation { alphabet: al, theta, rule_names: m.rules.iter().map(|r| r.name.clone()).collect(), relators })
}

/// Presentation of the main machine with the coordinate of each relator filled in.
pub fn emit_main_presentation(main: &MainMachine, level: Level) -> Result<Presentation, GroupsError> {
    let mut p = emit_presentation(&main.machine, level)?;
    let m = &main.machine;
    let per = main.coord_parts;
    for r in &mut p.relators {
        let first = r.word.letters()[0].sym;
        r.coordinate = match r.class {
            c if c.is_theta_q() => m.part_of(first).map(|i| i / per + 1),
            c if c.is_theta_a() => m.sector_of(first).map(|j| (j - 1) / per + 1),
            _ => None,
        };
    }
    Ok(p)
}

/// `W = 1` as a relator when `W` is accepted by a computation with at most one machine phase.
pub fn disk_relator(w: &AdmissibleWord, main: &MainMachine) -> Option<Relator> {
    let (_, ell) = main.accepting_run(w).ok()??;
    if ell > 1 {
        return None;
    }
    let class = if *w == main.w_ac() { RelatorClass::Hub } else { RelatorClass::Disk };
    Some(Relator { class, word: w.to_word(), coordinate: None })
}

/// `‖W(2)‖`: length of the second coordinate (the first when there is only one).
pub fn second_norm(main: &MainMachine, w: &AdmissibleWord) -> usize {
    main.component(w, if main.l >= 2 { 2 } else { 1 }).len()
}

/// Membership in `Ω`: some cyclic permutation of the cyclically reduced core is carried by a
/// special-sector semi-computation into `Λ`.
pub fn omega_member(w: &Word, main: &MainMachine, pipeline: &Pipeline) -> bool {
    let m = &main.machine;
    if w.letters().iter().any(|l| m.sector_of(l.sym) != Some(main.special)) {
        return false;
    }
    let core = cyclic_reduce(&free_reduce(w.letters().iter().copied())).0;
    if core.is_empty() {
        return false;
    }
    let oracle = |z: &Word| pipeline.lambda_oracle(z);
    (0..core.len()).any(|k| main.lambda_accept(&core.rotate(k), &oracle).is_some())
}

/// All members of `Ω` over the given special-sector letters up to length `max_len`.
pub fn enumerate_omega(letters: &[Sym], max_len: usize, main: &MainMachine, pipeline: &Pipeline) -> Vec<Word> {
    let mut out = Vec::new();
    let mut frontier = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &s in letters {
                for l in [Letter::pos(s), Letter::neg(s)] {
                    if w.last() == Some(l.inverse()) {
                        continue;
                    }
                    let mut v = w.clone();
                    v.push(l);
                    if v.is_cyclically_reduced() && omega_member(&v, main, pipeline) {
                        out.push(v.clone());
                    }
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machines::m1::{build_m1, default_letters};

    #[test]
    fn m1_counts() {
        for n in [1usize, 2] {
            let (m, _) = build_m1(&default_letters(n)).unwrap();
            let p = emit_presentation(&m, Level::M).unwrap();
            let rules = n + 2;
            assert_eq!(p.count_where(RelatorClass::is_theta_q), rules * 3);
            // per rule: n marked letters, two b letters, n letters of the second sector
            assert_eq!(p.count_where(RelatorClass::is_theta_a), rules * (2 * n + 2));
            assert_eq!(p.count_where(|c| c == RelatorClass::Hub), 0);
            let g = emit_presentation(&m, Level::G).unwrap();
            assert_eq!(g.count_where(|c| c == RelatorClass::Hub), 1);
        }
        let (m, _) = build_m1(&default_letters(1)).unwrap();
        let p = emit_presentation(&m, Level::M).unwrap();
        assert_eq!(p.relators.len(), 9 + 12);
    }

    #[test]
    fn relator_text_round_trip() {
        let (m, _) = build_m1(&default_letters(2)).unwrap();
        let p = emit_presentation(&m, Level::G).unwrap();
        let back = p.parse_relators(&p.format()).unwrap();
        assert_eq!(back, p.relators);
    }

    #[test]
    fn cyclic_key_is_rotation_invariant() {
        let w = Word::from_letters([Letter::pos(Sym(0)), Letter::pos(Sym(1)), Letter::neg(Sym(2))]);
        for k in 0..3 {
            assert_eq!(cyclic_key(&w.rotate(k)), cyclic_key(&w));
            assert_eq!(cyclic_key(&w.rotate(k).inverse()), cyclic_key(&w));
        }
    }
}
