//! The main machine: two working copies of the parallel machine behind transition rules.
//!
//! Input words are passed as "index words": a [`Word`] whose symbol `Sym(i)` stands for the
//! `i`-th input letter.

use std::collections::HashMap;
use std::sync::Arc;

use crate::smachine::{
    AdmissibleWord, Computation, History, Machine, PartRule, Rule, SectorRule, SemiComputation, Step,
};
use crate::words::{free_reduce, Basis, Letter, Sym, Word};

use super::builders::{
    compose, coord_name, cyclify, map_part, map_sector, mirror_name, parallelize, reflect, Builder, SigmaSpec,
};
use super::m1::{build_m1, compress, shift, NoiseScheme, Role};
use super::plugins::{eval_time_bound, validate_recognizer, Recognizer};
use super::MachinesError;

/// An input sector of the main machine (one per coordinate plus its mirror).
#[derive(Clone, Debug)]
pub struct InputSector {
    pub sector: usize,
    pub coord: usize,
    pub mirror: bool,
    pub a: Vec<Sym>,
    pub a1: Vec<Sym>,
}

pub struct MainMachine {
    pub machine: Machine,
    pub names: Vec<String>,
    pub l: usize,
    /// Parts per coordinate.
    pub coord_parts: usize,
    pub m1: Machine,
    pub scheme: NoiseScheme,
    pub inputs: Vec<InputSector>,
    /// Input sector of coordinate 1 (locked by the second machine).
    pub special: usize,
    /// Working rules of the first and second machine.
    pub working: [Vec<usize>; 2],
    pub theta_s: [usize; 2],
    pub theta_a: [usize; 2],
    m1_lift: [Vec<usize>; 2],
    by_name: [HashMap<String, usize>; 2],
    plugin: Arc<dyn Recognizer>,
}

impl std::fmt::Debug for MainMachine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MainMachine")
            .field("names", &self.names)
            .field("l", &self.l)
            .field("parts", &self.machine.hw.parts.len())
            .field("rules", &self.machine.rules.len())
            .field("plugin", &self.plugin.name())
            .finish()
    }
}

fn copy_name(n: &str, k: usize) -> String {
    match n.find('(') {
        Some(i) => format!("{}#{k}{}", &n[..i], &n[i..]),
        None => format!("{n}#{k}"),
    }
}

fn marked_name(part: &str, mark: &str) -> String {
    match part.find('(') {
        Some(i) => format!("{}_{mark}{}", &part[..i], &part[i..]),
        None => format!("{part}_{mark}"),
    }
}

/// Assembles the main machine over the input letters `names` with `l` coordinates.
pub fn build_main(names: &[String], plugin: Arc<dyn Recognizer>, l: usize) -> Result<MainMachine, MachinesError> {
    if l == 0 {
        return Err(MachinesError::Compose("need at least one coordinate".into()));
    }
    let (m1, scheme) = build_m1(names)?;
    validate_recognizer(plugin.as_ref(), names)?;
    let identify: Vec<(Sym, Sym)> =
        plugin.input_letters().iter().zip(&scheme.a2).map(|(&p, &a)| (p, a)).collect();
    let m3 = compose(&m1, plugin.machine(), &identify, &SigmaSpec { name: "σ".into(), open: vec![2] })?;
    let m5 = cyclify(&reflect(&m3)?)?;
    let copies = [parallelize(&m5, l, false)?, parallelize(&m5, l, true)?];
    let p = m5.hw.parts.len();
    let total = p * l;

    let mut bl = Builder::new(total, total);
    let map1 = bl.import(&copies[0], &|n, st| if st { copy_name(n, 1) } else { n.to_string() }, &|j| j, &|s| s, &HashMap::new())?;
    let shared: HashMap<Sym, Sym> = copies[1]
        .alphabet
        .symbols()
        .filter(|&s| copies[1].part_of(s).is_none())
        .map(|s| (s, map1[copies[0].alphabet.get(copies[1].alphabet.name(s)).expect("same tapes").0 as usize]))
        .collect();
    let map2 = bl.import(&copies[1], &|n, _| copy_name(n, 2), &|j| j, &|s| s, &shared)?;
    let maps = [map1, map2];
    let mut starts = Vec::new();
    let mut ends = Vec::new();
    for j in 0..total {
        let pname = copies[0].hw.parts[j].name.clone();
        let s = bl.state(j, &marked_name(&pname, "s"))?;
        let e = bl.state(j, &marked_name(&pname, "a"))?;
        bl.parts[j].name = pname;
        bl.parts[j].start = s;
        bl.parts[j].end = e;
        starts.push(s);
        ends.push(e);
    }

    let m5_inputs = m5.hw.input_sectors.clone();
    let mut inputs = Vec::new();
    for i in 1..=l {
        for (k, &sec) in m5_inputs.iter().enumerate() {
            let mirror = k == 1;
            let nm = |base: &str| {
                let b = if mirror { mirror_name(base) } else { base.to_string() };
                coord_name(&b, i)
            };
            let look = |n: String| bl.al.get(&n).ok_or_else(|| MachinesError::Alphabet(format!("missing letter `{n}`")));
            let a = names.iter().map(|n| look(nm(n))).collect::<Result<Vec<_>, _>>()?;
            let a1 = names.iter().map(|n| look(nm(&format!("{n}_1")))).collect::<Result<Vec<_>, _>>()?;
            inputs.push(InputSector { sector: (i - 1) * p + sec, coord: i, mirror, a, a1 });
        }
    }
    let special = inputs[0].sector;

    let mut rules = Vec::new();
    let mut working = [Vec::new(), Vec::new()];
    let mut theta_s = [0; 2];
    let mut theta_a = [0; 2];
    for k in 0..2 {
        let m6 = &copies[k];
        let map = &maps[k];
        theta_s[k] = rules.len();
        let parts = (0..total)
            .map(|j| PartRule { from: starts[j], u: Word::empty(), to: map[m6.hw.parts[j].start.0 as usize], v: Word::empty() })
            .collect();
        let mut sectors = vec![SectorRule::Locked; total];
        for inp in &inputs {
            if k == 1 && inp.sector == special {
                continue;
            }
            let n = inp.a.len();
            sectors[inp.sector - 1] = SectorRule::Map {
                x: Basis::letters(inp.a.iter().copied()),
                z: Basis::letters(inp.a1.iter().copied()),
                f: (0..n).collect(),
            };
        }
        rules.push(Rule { name: format!("θ(s).{}", k + 1), parts, sectors });
        for r in &m6.rules {
            working[k].push(rules.len());
            rules.push(Rule {
                name: format!("{}.{}", r.name, k + 1),
                parts: r.parts.iter().map(|pr| map_part(pr, map)).collect(),
                sectors: r.sectors.iter().map(|s| map_sector(s, map)).collect(),
            });
        }
        theta_a[k] = rules.len();
        let parts = (0..total)
            .map(|j| PartRule { from: map[m6.hw.parts[j].end.0 as usize], u: Word::empty(), to: ends[j], v: Word::empty() })
            .collect();
        rules.push(Rule { name: format!("θ(a).{}", k + 1), parts, sectors: vec![SectorRule::Locked; total] });
    }
    let input_sectors = inputs.iter().map(|i| i.sector).collect();
    let machine = bl.finish(true, input_sectors, rules)?;
    let mut by_name = [HashMap::new(), HashMap::new()];
    for k in 0..2 {
        for &r in &working[k] {
            let n = &machine.rules[r].name;
            by_name[k].insert(n[..n.len() - 2].to_string(), r);
        }
    }
    let m1_lift = [0, 1].map(|k| m1.rules.iter().map(|r| by_name[k][&r.name]).collect());
    Ok(MainMachine {
        machine,
        names: names.to_vec(),
        l,
        coord_parts: p,
        m1,
        scheme,
        inputs,
        special,
        working,
        theta_s,
        theta_a,
        m1_lift,
        by_name,
        plugin,
    })
}

/// Which start configuration a configuration is.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StartKind {
    /// `I(w)`: every input sector holds a copy of `w`.
    I(Word),
    /// `J(w)`: as `I(w)` with the special sector empty.
    J(Word),
}

impl MainMachine {
    pub fn plugin(&self) -> &dyn Recognizer {
        self.plugin.as_ref()
    }

    /// Parses an index word from input letter names.
    pub fn parse_input(&self, text: &str) -> Result<Word, MachinesError> {
        let w = self.m1.alphabet.parse_word(text)?;
        let mut out = Vec::new();
        for l in w.letters() {
            match self.scheme.role(l.sym) {
                Some(Role::A(i)) => out.push(Letter { sym: Sym(i as u32), inv: l.inv }),
                _ => return Err(MachinesError::Alphabet(format!("`{}` is not an input letter", self.m1.alphabet.name(l.sym)))),
            }
        }
        Ok(Word::from_letters(out))
    }

    pub fn format_input(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".into();
        }
        w.letters()
            .iter()
            .map(|l| {
                let n = &self.names[l.sym.0 as usize];
                if l.inv {
                    format!("{n}^-1")
                } else {
                    n.clone()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Index word as a word over the input letters of M1.
    pub fn to_m1(&self, w: &Word) -> Word {
        w.substitute(|s| Word::sym(self.scheme.a[s.0 as usize]))
    }

    fn write(&self, w: &Word, inp: &InputSector) -> Word {
        let x = w.substitute(|s| Word::sym(inp.a[s.0 as usize]));
        if inp.mirror {
            x.inverse()
        } else {
            x
        }
    }

    fn read(&self, t: &Word, inp: &InputSector) -> Option<Word> {
        let t = if inp.mirror { t.inverse() } else { t.clone() };
        let mut out = Vec::new();
        for l in t.letters() {
            let i = inp.a.iter().position(|&s| s == l.sym)?;
            out.push(Letter { sym: Sym(i as u32), inv: l.inv });
        }
        Some(Word::from_letters(out))
    }

    pub fn i_config(&self, w: &Word) -> AdmissibleWord {
        let mut cfg = self.machine.start_config();
        for inp in &self.inputs {
            cfg.tapes[inp.sector - 1] = self.write(&free_reduce(w.letters().iter().copied()), inp);
        }
        cfg
    }

    pub fn j_config(&self, w: &Word) -> AdmissibleWord {
        let mut cfg = self.i_config(w);
        cfg.tapes[self.special - 1] = Word::empty();
        cfg
    }

    pub fn w_ac(&self) -> AdmissibleWord {
        self.machine.accept_config()
    }

    /// Recognizes `I(w)` and `J(w)`.
    pub fn classify(&self, cfg: &AdmissibleWord) -> Option<StartKind> {
        let start = self.machine.start_config();
        if cfg.states != start.states || cfg.tapes.len() != start.tapes.len() {
            return None;
        }
        let reference = self.inputs.iter().find(|i| i.sector != self.special).unwrap_or(&self.inputs[0]);
        let w = self.read(&cfg.tapes[reference.sector - 1], reference)?;
        let j = self.j_config(&w);
        if *cfg == self.i_config(&w) {
            Some(StartKind::I(w))
        } else if *cfg == j {
            Some(StartKind::J(w))
        } else {
            None
        }
    }

    /// Coordinate `i` (1-based) of a configuration with the standard base.
    pub fn component(&self, cfg: &AdmissibleWord, i: usize) -> AdmissibleWord {
        let p = self.coord_parts;
        let lo = (i - 1) * p;
        let hi = (lo + p).min(cfg.states.len());
        let thi = (lo + p - 1).min(cfg.tapes.len());
        AdmissibleWord { states: cfg.states[lo..hi].to_vec(), tapes: cfg.tapes[lo..thi].to_vec() }
    }

    fn lift_m1(&self, k: usize, h: &[Step]) -> History {
        h.iter().map(|s| Step { rule: self.m1_lift[k][s.rule], inv: s.inv }).collect()
    }

    fn lift_plugin(&self, k: usize, h: &[Step]) -> Result<History, MachinesError> {
        let pm = self.plugin.machine();
        h.iter()
            .map(|s| {
                let n = &pm.rules[s.rule].name;
                self.by_name[k]
                    .get(n)
                    .map(|&r| Step { rule: r, inv: s.inv })
                    .ok_or_else(|| MachinesError::Plugin(format!("rule `{n}` not found")))
            })
            .collect()
    }

    /// `c0·TM(c0 n)³ + n·c0ⁿ + c0·n + 2c0`, saturating.
    pub fn time_space_bound(&self, c0: u64, n: u64) -> u128 {
        let tm = eval_time_bound(&self.plugin.time_bound(), c0.saturating_mul(n));
        let cube = tm.saturating_mul(tm).saturating_mul(tm);
        let mut pow: u128 = 1;
        for _ in 0..n {
            pow = pow.saturating_mul(c0 as u128);
        }
        (c0 as u128)
            .saturating_mul(cube)
            .saturating_add((n as u128).saturating_mul(pow))
            .saturating_add((c0 as u128) * (n as u128))
            .saturating_add(2 * c0 as u128)
    }

    /// Synthesizes and replays an accepting computation of `I(w)`, `J(w)` or `W_ac`. Returns the
    /// computation and the number of maximal one-machine pieces it consists of.
    pub fn accepting_run(&self, cfg: &AdmissibleWord) -> Result<Option<(Computation, usize)>, MachinesError> {
        let ac = self.w_ac();
        if *cfg == ac {
            return Ok(Some((Computation { start: ac.clone(), history: Vec::new(), end: ac }, 0)));
        }
        let (k, w) = match self.classify(cfg) {
            Some(StartKind::I(w)) => (0, w),
            Some(StartKind::J(w)) => (1, w),
            None => return Ok(None),
        };
        let Some(idx) = positive_indices(&w) else { return Ok(None) };
        if w.is_empty() || !self.plugin.member(&idx) {
            return Ok(None);
        }
        let shifted = shift(&self.scheme, &self.scheme.phi1(&self.to_m1(&w)))
            .ok_or_else(|| MachinesError::Replay("positive input has no shift".into()))?;
        let prun = self
            .plugin
            .accept_run(&idx)
            .ok_or_else(|| MachinesError::Plugin("member without an accepting run".into()))?;
        let mut h = vec![Step::pos(self.theta_s[k])];
        h.extend(self.lift_m1(k, &shifted.history));
        h.push(Step::pos(self.by_name[k]["σ"]));
        h.extend(self.lift_plugin(k, &prun)?);
        h.push(Step::pos(self.theta_a[k]));
        let end = self
            .machine
            .run_final(cfg, &h)
            .map_err(|e| MachinesError::Replay(format!("accepting run fails: {e}")))?;
        if end != ac {
            return Err(MachinesError::Replay("accepting run ends elsewhere".into()));
        }
        Ok(Some((Computation { start: cfg.clone(), history: h, end }, 1)))
    }

    /// Rule of the first machine lifted from an `M1` step.
    pub fn first_machine_step(&self, s: Step) -> Step {
        Step { rule: self.m1_lift[0][s.rule], inv: s.inv }
    }

    /// Special-sector word as a word of M1 (letters share names).
    pub fn special_to_m1(&self, w: &Word) -> Option<Word> {
        let al = &self.machine.alphabet;
        let mut out = Vec::new();
        for l in w.letters() {
            out.push(Letter { sym: self.m1.alphabet.get(al.name(l.sym))?, inv: l.inv });
        }
        Some(Word::from_letters(out))
    }

    pub fn m1_to_special(&self, w: &Word) -> Option<Word> {
        let al = &self.machine.alphabet;
        let mut out = Vec::new();
        for l in w.letters() {
            let s = al.get(self.m1.alphabet.name(l.sym))?;
            if self.machine.sector_of(s) != Some(self.special) {
                return None;
            }
            out.push(Letter { sym: s, inv: l.inv });
        }
        Some(Word::from_letters(out))
    }

    /// The unique semi-computation in the special sector taking `w` (a special-sector word) into
    /// the set `Λ` decided by `oracle` on index words.
    pub fn lambda_accept(&self, w: &Word, oracle: &dyn Fn(&Word) -> bool) -> Option<SemiComputation> {
        let sc = &self.scheme;
        let v = self.special_to_m1(w)?;
        if free_reduce(v.letters().iter().copied()) != v {
            return None;
        }
        let as_index = |x: &Word| -> Option<Word> {
            let mut out = Vec::new();
            for l in x.letters() {
                match sc.role(l.sym)? {
                    Role::A(i) => out.push(Letter { sym: Sym(i as u32), inv: l.inv }),
                    _ => return None,
                }
            }
            Some(Word::from_letters(out))
        };
        if let Some(z) = as_index(&v) {
            return (!z.is_empty() && oracle(&z)).then(|| SemiComputation {
                sector: self.special,
                start: w.clone(),
                history: Vec::new(),
                end: w.clone(),
            });
        }
        let raw = sc.delta_raw(&v)?;
        let z = Word::from_letters(raw.iter().copied());
        if free_reduce(raw.iter().copied()) != z || z.is_empty() {
            return None;
        }
        let zi = as_index(&z)?;
        if !oracle(&zi) {
            return None;
        }
        let inv_h = recover_history(sc, &v)?;
        let mut h: History = inv_h.iter().rev().map(|s| self.first_machine_step(s.inverse())).collect();
        h.push(Step::neg(self.theta_s[0]));
        let run = self.machine.semi_run(w, &h, self.special).ok()?;
        let target = self.m1_to_special(&zi.substitute(|s| Word::sym(sc.a[s.0 as usize])))?;
        (run.end == target).then_some(run)
    }

    /// Compressed semi-computation in the special sector.
    pub fn compressed_semi(&self, w0: &Word, h: &[Step]) -> Result<SemiComputation, MachinesError> {
        Ok(super::m1::compressed_semi(&self.machine, self.special, w0, h)?)
    }

    /// Compression of a special-sector word.
    pub fn compress(&self, w: &Word) -> Word {
        compress(&self.machine.alphabet, w)
    }
}

/// Input letter indices of a positive index word.
pub fn positive_indices(w: &Word) -> Option<Vec<usize>> {
    w.letters().iter().map(|l| (!l.inv).then_some(l.sym.0 as usize)).collect()
}

/// Recovers the `M1` history `H⁻¹` leading from `φ1(δ(w))` to `w` by decoding one informative
/// noise block.
fn recover_history(sc: &NoiseScheme, w: &Word) -> Option<History> {
    let mut blocks: Vec<Vec<Letter>> = vec![Vec::new()];
    let mut xs: Vec<(usize, bool)> = Vec::new();
    for &l in w.letters() {
        match sc.role(l.sym)? {
            Role::A1(i) => {
                xs.push((i, l.inv));
                blocks.push(Vec::new());
            }
            Role::B(_) => blocks.last_mut().expect("nonempty").push(l),
            _ => return None,
        }
    }
    let k = xs.len();
    let to_steps = |seq: &[(usize, usize, i8)]| -> History {
        seq.iter().map(|&(y, _, s)| Step { rule: y, inv: s < 0 }).collect()
    };
    if k == 0 {
        return None;
    }
    if !xs[0].1 {
        let seq = sc.decode_noise_for(&Word::from_letters(blocks[0].clone()), xs[0].0)?;
        return Some(to_steps(&seq));
    }
    if xs[k - 1].1 {
        let seq = sc.decode_noise_for(&Word::from_letters(blocks[k].clone()), xs[k - 1].0)?;
        let mut h: History = to_steps(&seq).into_iter().map(Step::inverse).collect();
        h.reverse();
        return Some(h);
    }
    let j = (0..k - 1).find(|&j| xs[j].1 && !xs[j + 1].1)?;
    let seq = sc.decode_noise(&Word::from_letters(blocks[j + 1].clone()))?;
    let a = xs[j + 1].0;
    let cut = seq.iter().position(|&(_, aa, _)| aa == a).unwrap_or(seq.len());
    Some(to_steps(&seq[cut..]))
}
