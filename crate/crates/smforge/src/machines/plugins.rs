//! Recognizing machines that plug into the main construction.
//!
//! A recognizer is a non-cyclic machine with at least three parts whose first sector has no
//! letters and whose second sector is exactly the input alphabet. A word `w` is accepted when
//! some computation leads from the start configuration with `w` in sector 2 to the accept
//! configuration.

use std::collections::{HashMap, HashSet, VecDeque};
use std::process::Command;

use crate::smachine::{AdmissibleWord, History, Machine, PartRule, Rule, SectorRule, Step};
use crate::words::{Kind, Letter, Sym, TapeSub, Word};

use super::builders::{fixed, Builder};
use super::MachinesError;

/// A recognizer of a language of positive words over the input alphabet. Words are passed as
/// sequences of input-letter indices.
pub trait Recognizer: Send + Sync {
    fn name(&self) -> &str;
    fn machine(&self) -> &Machine;
    /// Sector-2 letters of [`Recognizer::machine`], indexed like the input alphabet.
    fn input_letters(&self) -> &[Sym];
    fn member(&self, w: &[usize]) -> bool;
    /// History of an accepting computation of `w`, if `w` is accepted.
    fn accept_run(&self, w: &[usize]) -> Option<History>;
    /// Coefficients `c_0, c_1, …` of the polynomial time bound `TM(n) = Σ c_i nⁱ`.
    fn time_bound(&self) -> Vec<u64>;
    /// Whether `member` and `accept_run` may be called from several threads at once.
    fn thread_safe(&self) -> bool {
        true
    }
}

pub fn eval_time_bound(coeffs: &[u64], n: u64) -> u128 {
    coeffs.iter().rev().fold(0u128, |acc, &c| acc.saturating_mul(n as u128).saturating_add(c as u128))
}

/// Start configuration of a recognizer with `w` in its input sector.
pub fn input_config(r: &dyn Recognizer, w: &[usize]) -> AdmissibleWord {
    let m = r.machine();
    let mut cfg = m.start_config();
    cfg.tapes[1] = Word::from_syms(w.iter().map(|&i| r.input_letters()[i]));
    cfg
}

/// Checks the hardware contract and that `input_letters` match `names`.
pub fn validate_recognizer(r: &dyn Recognizer, names: &[String]) -> Result<(), MachinesError> {
    let m = r.machine();
    let err = |s: &str| Err(MachinesError::Plugin(format!("{}: {s}", r.name())));
    if m.hw.cyclic || m.hw.parts.len() < 3 {
        return err("needs a non-cyclic base with at least three parts");
    }
    if !m.hw.tapes[0].is_empty() {
        return err("sector 1 must have no letters");
    }
    let inputs = r.input_letters();
    if inputs.len() != names.len() {
        return err("input alphabet size differs");
    }
    for (s, n) in inputs.iter().zip(names) {
        if m.alphabet.name(*s) != n {
            return err(&format!("input letter `{}` should be `{n}`", m.alphabet.name(*s)));
        }
    }
    let mut tape: Vec<Sym> = m.hw.tapes[1].clone();
    let mut want: Vec<Sym> = inputs.to_vec();
    tape.sort();
    want.sort();
    if tape != want {
        return err("sector 2 must hold exactly the input letters");
    }
    if m.hw.input_sectors != [2] {
        return err("the input sector must be sector 2");
    }
    Ok(())
}

/// Replays `accept_run(w)` and checks it ends in the accept configuration.
pub fn check_accept_run(r: &dyn Recognizer, w: &[usize]) -> bool {
    match r.accept_run(w) {
        None => false,
        Some(h) => {
            let m = r.machine();
            m.run_final(&input_config(r, w), &h).is_ok_and(|end| end == m.accept_config())
        }
    }
}

fn recognizer_frame(names: &[String], middle: &[String]) -> Result<(Builder, Vec<Sym>, Vec<Sym>), MachinesError> {
    let mut b = Builder::new(3, 2);
    let p0 = [b.state(0, "p0s")?, b.state(0, "p0a")?];
    let mut p1 = Vec::new();
    for n in middle {
        p1.push(b.state(1, n)?);
    }
    let p1a = b.state(1, "p1a")?;
    let p2 = [b.state(2, "p2s")?, b.state(2, "p2a")?];
    let mut inputs = Vec::new();
    for n in names {
        inputs.push(b.tape(2, n, Kind::Tape { sector: 2, sub: TapeSub::Ordinary })?);
    }
    for (j, (s, e)) in [(p0[0], p0[1]), (p1[0], p1a), (p2[0], p2[1])].into_iter().enumerate() {
        b.parts[j].name = format!("P{j}");
        b.parts[j].start = s;
        b.parts[j].end = e;
    }
    Ok((b, inputs, vec![p0[0], p0[1], p1a, p2[0], p2[1]]))
}

/// Accepts the words `x_1 … x_k` with `x_j ∈ S_j` by erasing one letter per step.
#[derive(Clone, Debug)]
pub struct ChainRecognizer {
    machine: Machine,
    inputs: Vec<Sym>,
    sets: Vec<Vec<usize>>,
    erase: HashMap<(usize, usize), usize>,
    fin: usize,
}

impl ChainRecognizer {
    pub fn new(names: &[String], sets: Vec<Vec<usize>>) -> Result<Self, MachinesError> {
        if sets.is_empty() || sets.iter().any(|s| s.is_empty() || s.iter().any(|&i| i >= names.len())) {
            return Err(MachinesError::Plugin("chain sets must be nonempty subsets of the alphabet".into()));
        }
        let k = sets.len();
        let middle: Vec<String> = (0..=k).map(|j| if j == 0 { "p1s".into() } else { format!("m{j}") }).collect();
        let (b, inputs, fixed_letters) = recognizer_frame(names, &middle)?;
        let [p0s, p0a, p1a, p2s, p2a] = fixed_letters[..] else { unreachable!() };
        let m = &b.parts[1].letters[..=k].to_vec();
        let mut rules = Vec::new();
        let mut erase = HashMap::new();
        for (j, set) in sets.iter().enumerate() {
            for &x in set {
                erase.insert((j, x), rules.len());
                rules.push(Rule {
                    name: format!("e{}_{}", j + 1, names[x]),
                    parts: vec![
                        fixed(p0s),
                        PartRule { from: m[j], u: Word::empty(), to: m[j + 1], v: Word::letter(Letter::neg(inputs[x])) },
                        fixed(p2s),
                    ],
                    sectors: vec![SectorRule::Locked, SectorRule::identity(inputs.iter().copied())],
                });
            }
        }
        let fin = rules.len();
        rules.push(Rule {
            name: "fin".into(),
            parts: vec![
                PartRule { from: p0s, u: Word::empty(), to: p0a, v: Word::empty() },
                PartRule { from: m[k], u: Word::empty(), to: p1a, v: Word::empty() },
                PartRule { from: p2s, u: Word::empty(), to: p2a, v: Word::empty() },
            ],
            sectors: vec![SectorRule::Locked, SectorRule::Locked],
        });
        let machine = b.finish(false, vec![2], rules)?;
        Ok(ChainRecognizer { machine, inputs, sets, erase, fin })
    }
}

impl Recognizer for ChainRecognizer {
    fn name(&self) -> &str {
        "chain"
    }

    fn machine(&self) -> &Machine {
        &self.machine
    }

    fn input_letters(&self) -> &[Sym] {
        &self.inputs
    }

    fn member(&self, w: &[usize]) -> bool {
        w.len() == self.sets.len() && w.iter().zip(&self.sets).all(|(x, s)| s.contains(x))
    }

    fn accept_run(&self, w: &[usize]) -> Option<History> {
        if !self.member(w) {
            return None;
        }
        let mut h: History = w.iter().enumerate().map(|(j, &x)| Step::pos(self.erase[&(j, x)])).collect();
        h.push(Step::pos(self.fin));
        Some(h)
    }

    fn time_bound(&self) -> Vec<u64> {
        vec![1, 1]
    }
}

/// Accepts nothing: its only rule loops at the start letters.
#[derive(Clone, Debug)]
pub struct RejectAll {
    machine: Machine,
    inputs: Vec<Sym>,
}

impl RejectAll {
    pub fn new(names: &[String]) -> Result<Self, MachinesError> {
        let (b, inputs, fixed_letters) = recognizer_frame(names, &["p1s".to_string()])?;
        let p1s = b.parts[1].letters[0];
        let rules = vec![Rule {
            name: "loop".into(),
            parts: vec![fixed(fixed_letters[0]), fixed(p1s), fixed(fixed_letters[3])],
            sectors: vec![SectorRule::Locked, SectorRule::identity(inputs.iter().copied())],
        }];
        let machine = b.finish(false, vec![2], rules)?;
        Ok(RejectAll { machine, inputs })
    }
}

impl Recognizer for RejectAll {
    fn name(&self) -> &str {
        "reject-all"
    }

    fn machine(&self) -> &Machine {
        &self.machine
    }

    fn input_letters(&self) -> &[Sym] {
        &self.inputs
    }

    fn member(&self, _w: &[usize]) -> bool {
        false
    }

    fn accept_run(&self, _w: &[usize]) -> Option<History> {
        None
    }

    fn time_bound(&self) -> Vec<u64> {
        vec![1]
    }
}

/// How a machine-file recognizer decides membership.
#[derive(Clone, Debug)]
pub enum Membership {
    /// Accepted words, each as a list of input-letter indices.
    Table(HashSet<Vec<usize>>),
    /// Shell command; the word is passed as one space-separated argument and exit code 0 means
    /// membership.
    Command(String),
}

/// A recognizer read from the machine text format. Accepting computations are found by
/// breadth-first search over configurations, bounded by the declared time bound.
#[derive(Clone, Debug)]
pub struct FileRecognizer {
    machine: Machine,
    inputs: Vec<Sym>,
    names: Vec<String>,
    membership: Membership,
    tm: Vec<u64>,
    node_limit: usize,
}

impl FileRecognizer {
    pub fn new(
        machine: Machine,
        names: &[String],
        membership: Membership,
        tm: Vec<u64>,
    ) -> Result<Self, MachinesError> {
        let mut inputs = Vec::new();
        for n in names {
            inputs.push(
                machine
                    .alphabet
                    .get(n)
                    .ok_or_else(|| MachinesError::Plugin(format!("input letter `{n}` missing from the machine")))?,
            );
        }
        let r = FileRecognizer { machine, inputs, names: names.to_vec(), membership, tm, node_limit: 1_000_000 };
        validate_recognizer(&r, names)?;
        Ok(r)
    }

    pub fn with_node_limit(mut self, n: usize) -> Self {
        self.node_limit = n;
        self
    }

    fn search(&self, w: &[usize]) -> Option<History> {
        let m = &self.machine;
        let start = input_config(self, w);
        let goal = m.accept_config();
        let depth = eval_time_bound(&self.tm, w.len() as u64);
        let mut parent: HashMap<AdmissibleWord, Option<(AdmissibleWord, Step)>> = HashMap::new();
        let mut queue = VecDeque::new();
        parent.insert(start.clone(), None);
        queue.push_back((start, 0u128));
        while let Some((cur, d)) = queue.pop_front() {
            if cur == goal {
                let mut h = Vec::new();
                let mut at = cur;
                while let Some(Some((prev, st))) = parent.get(&at).cloned() {
                    h.push(st);
                    at = prev;
                }
                h.reverse();
                return Some(h);
            }
            if d >= depth || parent.len() > self.node_limit {
                continue;
            }
            for r in 0..m.rules.len() {
                for st in [Step::pos(r), Step::neg(r)] {
                    if let Ok(next) = m.apply(&cur, st) {
                        if !parent.contains_key(&next) {
                            parent.insert(next.clone(), Some((cur.clone(), st)));
                            queue.push_back((next, d + 1));
                        }
                    }
                }
            }
        }
        None
    }
}

impl Recognizer for FileRecognizer {
    fn name(&self) -> &str {
        "machine-file"
    }

    fn machine(&self) -> &Machine {
        &self.machine
    }

    fn input_letters(&self) -> &[Sym] {
        &self.inputs
    }

    fn member(&self, w: &[usize]) -> bool {
        match &self.membership {
            Membership::Table(t) => t.contains(w),
            Membership::Command(cmd) => {
                let word: Vec<&str> = w.iter().map(|&i| self.names[i].as_str()).collect();
                Command::new("sh")
                    .arg("-c")
                    .arg(format!("{cmd} \"$1\""))
                    .arg("sh")
                    .arg(word.join(" "))
                    .status()
                    .is_ok_and(|s| s.success())
            }
        }
    }

    fn accept_run(&self, w: &[usize]) -> Option<History> {
        if !self.member(w) {
            return None;
        }
        self.search(w)
    }

    fn time_bound(&self) -> Vec<u64> {
        self.tm.clone()
    }

    fn thread_safe(&self) -> bool {
        matches!(self.membership, Membership::Table(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machines::m1::default_letters;

    #[test]
    fn chain_accepts_its_language() {
        let names = default_letters(2);
        let r = ChainRecognizer::new(&names, vec![vec![0], vec![0, 1]]).unwrap();
        validate_recognizer(&r, &names).unwrap();
        assert!(r.member(&[0, 0]) && r.member(&[0, 1]));
        assert!(!r.member(&[1, 0]) && !r.member(&[]) && !r.member(&[0]));
        assert!(check_accept_run(&r, &[0, 1]));
        assert!(check_accept_run(&r, &[0, 0]));
        assert!(!check_accept_run(&r, &[1, 1]));
        // a wrong history does not reach the accept configuration
        let m = r.machine();
        let bad = m.parse_history("e1_a e2_a fin").unwrap();
        assert!(m.run_final(&input_config(&r, &[0, 1]), &bad).is_err());
    }

    #[test]
    fn reject_all_rejects() {
        let names = default_letters(1);
        let r = RejectAll::new(&names).unwrap();
        validate_recognizer(&r, &names).unwrap();
        assert!(!r.member(&[]) && !r.member(&[0]));
        assert_ne!(r.machine().start_config(), r.machine().accept_config());
    }

    #[test]
    fn file_recognizer_searches() {
        let names = default_letters(2);
        let chain = ChainRecognizer::new(&names, vec![vec![1]]).unwrap();
        let text = crate::smachine::format_machine(chain.machine());
        let m = crate::smachine::parse_machine(&text).unwrap();
        let table = Membership::Table([vec![1]].into_iter().collect());
        let r = FileRecognizer::new(m, &names, table, vec![2, 1]).unwrap();
        assert!(check_accept_run(&r, &[1]));
        assert!(!check_accept_run(&r, &[0]));
        let cmd = FileRecognizer::new(chain.machine().clone(), &names, Membership::Command("test c =".into()), vec![2, 1])
            .unwrap();
        assert!(cmd.member(&[1]));
        assert!(!cmd.member(&[0]));
        assert!(!cmd.thread_safe());
    }
}
