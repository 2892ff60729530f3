//! The noisy shifting machine `M1`: noise words, projections, shifts.

use std::collections::VecDeque;

use crate::smachine::{
    AdmissibleWord, Hardware, History, Machine, MachineError, Part, PartRule, Rule, SectorRule, Step,
};
use crate::words::{Alphabet, Kind, Letter, Sym, TapeSub, Word};

use super::MachinesError;

/// Default names for the input alphabet: `a`, `c`, `d`, … (`b` is reserved for the noise letters).
pub fn default_letters(n: usize) -> Vec<String> {
    let mut out = Vec::new();
    let mut c = b'a';
    while out.len() < n {
        if c > b'z' {
            out.push(format!("x{}", out.len()));
            continue;
        }
        if c != b'b' {
            out.push((c as char).to_string());
        }
        c += 1;
    }
    out
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Role {
    A(usize),
    A1(usize),
    A2(usize),
    B(usize),
}

/// Letters `A`, their copies `A1`, `A2`, the noise letters `b1, b2` and the noise words `v(y, a)`.
#[derive(Clone, Debug)]
pub struct NoiseScheme {
    pub a: Vec<Sym>,
    pub a1: Vec<Sym>,
    pub a2: Vec<Sym>,
    pub b: [Sym; 2],
    pub d: usize,
    /// `noise[y][a]` with `y` ranging over `A` then `b1, b2`.
    noise: Vec<Vec<Word>>,
    roles: Vec<Option<Role>>,
}

impl NoiseScheme {
    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Index of `y` in `A ⊔ B` for the noise letter `b_j` (0-based j).
    pub fn b_index(&self, j: usize) -> usize {
        self.a.len() + j
    }

    /// `η(y, a)` in `1..=D/4`.
    pub fn eta(&self, y: usize, a: usize) -> usize {
        y * self.a.len() + a + 1
    }

    pub fn noise_word(&self, y: usize, a: usize) -> &Word {
        &self.noise[y][a]
    }

    /// All noise words in `η` order.
    pub fn noise_basis(&self) -> Vec<Word> {
        let mut out = Vec::new();
        for row in &self.noise {
            out.extend(row.iter().cloned());
        }
        out
    }

    pub fn role(&self, s: Sym) -> Option<Role> {
        self.roles.get(s.0 as usize).copied().flatten()
    }

    /// `φ1`, `φ2` on a word over `A`.
    pub fn phi1(&self, w: &Word) -> Word {
        self.relabel(w, |r| match r {
            Role::A(i) => Some(self.a1[i]),
            _ => None,
        })
    }

    pub fn phi2(&self, w: &Word) -> Word {
        self.relabel(w, |r| match r {
            Role::A(i) => Some(self.a2[i]),
            _ => None,
        })
    }

    fn relabel(&self, w: &Word, f: impl Fn(Role) -> Option<Sym>) -> Word {
        Word::from_letters(w.letters().iter().map(|l| Letter {
            sym: self.role(l.sym).and_then(&f).unwrap_or(l.sym),
            inv: l.inv,
        }))
    }

    /// `δ(w)`: delete noise letters and read `A1` letters back in `A`.
    pub fn delta(&self, w: &Word) -> Result<Word, MachinesError> {
        let mut out = Vec::new();
        for l in w.letters() {
            match self.role(l.sym) {
                Some(Role::A1(i)) => out.push(Letter { sym: self.a[i], inv: l.inv }),
                Some(Role::B(_)) => {}
                _ => return Err(MachinesError::Alphabet("δ is defined on words over A1 and the noise letters".into())),
            }
        }
        Ok(crate::words::free_reduce(out))
    }

    /// `δ` without the final reduction; `δ(w)` is "reduced" when this already is.
    pub fn delta_raw(&self, w: &Word) -> Option<Vec<Letter>> {
        let mut out = Vec::new();
        for l in w.letters() {
            match self.role(l.sym)? {
                Role::A1(i) => out.push(Letter { sym: self.a[i], inv: l.inv }),
                Role::B(_) => {}
                _ => return None,
            }
        }
        Some(out)
    }

    /// `ε(W) = δ(w1)·φ2⁻¹(w2)` for a configuration `q0 w1 q1 w2 q2`.
    pub fn epsilon(&self, w: &AdmissibleWord) -> Result<Word, MachinesError> {
        if w.tapes.len() != 2 {
            return Err(MachinesError::Alphabet("ε needs a full M1 configuration".into()));
        }
        let left = self.delta(&w.tapes[0])?;
        let mut right = Vec::new();
        for l in w.tapes[1].letters() {
            match self.role(l.sym) {
                Some(Role::A2(i)) => right.push(Letter { sym: self.a[i], inv: l.inv }),
                _ => return Err(MachinesError::Alphabet("second sector must be over A2".into())),
            }
        }
        Ok(left.mul(&Word::from_letters(right)))
    }

    /// Greedy decoding of a noise-letter word as a reduced product of noise words.
    pub fn decode_noise(&self, u: &Word) -> Option<Vec<(usize, usize, i8)>> {
        self.decode_with(u, |_, _| true)
    }

    /// Decoding restricted to noise words `v(·, a)` for a fixed `a`.
    pub fn decode_noise_for(&self, u: &Word, a: usize) -> Option<Vec<(usize, usize, i8)>> {
        self.decode_with(u, |_, aa| aa == a)
    }

    fn decode_with(&self, u: &Word, allow: impl Fn(usize, usize) -> bool) -> Option<Vec<(usize, usize, i8)>> {
        let mut rest = u.clone();
        let mut out = Vec::new();
        while !rest.is_empty() {
            let (best, lcp) = self.best_match(rest.letters(), &allow)?;
            if 2 * lcp <= self.d {
                return None;
            }
            let (y, a, sign) = best;
            let w = self.signed_noise(y, a, sign);
            rest = w.inverse().mul(&rest);
            out.push(best);
        }
        Some(out)
    }

    fn signed_noise(&self, y: usize, a: usize, sign: i8) -> Word {
        if sign > 0 {
            self.noise[y][a].clone()
        } else {
            self.noise[y][a].inverse()
        }
    }

    fn best_match(
        &self,
        rest: &[Letter],
        allow: &impl Fn(usize, usize) -> bool,
    ) -> Option<((usize, usize, i8), usize)> {
        let mut best: Option<((usize, usize, i8), usize)> = None;
        for y in 0..self.noise.len() {
            for a in 0..self.a.len() {
                if !allow(y, a) {
                    continue;
                }
                for sign in [1i8, -1] {
                    let w = self.signed_noise(y, a, sign);
                    let lcp = w.letters().iter().zip(rest).take_while(|(p, q)| p == q).count();
                    if best.is_none_or(|(_, l)| lcp > l) {
                        best = Some(((y, a, sign), lcp));
                    }
                }
            }
        }
        best
    }

    /// Product of a signed noise sequence.
    pub fn noise_product(&self, seq: &[(usize, usize, i8)]) -> Word {
        let mut out = Word::empty();
        for &(y, a, s) in seq {
            out.append(&self.signed_noise(y, a, s));
        }
        out
    }
}

/// Builds `M1` over the given input letter names.
pub fn build_m1(names: &[String]) -> Result<(Machine, NoiseScheme), MachinesError> {
    if names.is_empty() {
        return Err(MachinesError::EmptyAlphabet);
    }
    let n = names.len();
    let mut al = Alphabet::new();
    let q: Vec<Sym> = (0..3)
        .map(|i| al.add(&format!("q{i}"), Kind::State { part: i }))
        .collect::<Result<_, _>>()?;
    let tape = |sub| Kind::Tape { sector: 1, sub };
    let mut a = Vec::new();
    let mut a1 = Vec::new();
    for nm in names {
        a.push(al.add(nm, tape(TapeSub::ALetter))?);
    }
    for nm in names {
        a1.push(al.add(&format!("{nm}_1"), tape(TapeSub::ALetter))?);
    }
    let b = [al.add("b1", tape(TapeSub::BLetter))?, al.add("b2", tape(TapeSub::BLetter))?];
    let mut a2 = Vec::new();
    for nm in names {
        a2.push(al.add(&format!("{nm}_2"), Kind::Tape { sector: 2, sub: TapeSub::Ordinary })?);
    }
    let d = 4 * n * (n + 2);
    let mut noise = Vec::new();
    for y in 0..n + 2 {
        let mut row = Vec::new();
        for ai in 0..n {
            let k = y * n + ai + 1;
            let mut w = Word::empty();
            w.append(&Word::sym(b[0]).pow(k as i64));
            w.append(&Word::from_syms([b[1], b[0]]).pow(((d - 2 * k) / 2) as i64));
            w.append(&Word::sym(b[1]).pow(k as i64));
            row.push(w);
        }
        noise.push(row);
    }
    let mut roles = vec![None; al.len()];
    for i in 0..n {
        roles[a[i].0 as usize] = Some(Role::A(i));
        roles[a1[i].0 as usize] = Some(Role::A1(i));
        roles[a2[i].0 as usize] = Some(Role::A2(i));
    }
    roles[b[0].0 as usize] = Some(Role::B(0));
    roles[b[1].0 as usize] = Some(Role::B(1));
    let scheme = NoiseScheme { a: a.clone(), a1: a1.clone(), a2: a2.clone(), b, d, noise, roles };

    let hw = Hardware {
        parts: (0..3)
            .map(|i| Part { name: format!("Q{i}"), letters: vec![q[i]], start: q[i], end: q[i] })
            .collect(),
        tapes: vec![a.iter().chain(&a1).chain(&b).copied().collect(), a2.clone()],
        cyclic: false,
        input_sectors: vec![1],
    };
    let mut rules = Vec::new();
    for y in 0..n + 2 {
        let (name, u, v) = if y < n {
            (format!("θ_{}", names[y]), Word::letter(Letter::neg(a1[y])), Word::sym(a2[y]))
        } else {
            let j = y - n;
            (format!("θ_b{}", j + 1), Word::letter(Letter::neg(b[j])), Word::empty())
        };
        let mut pairs: Vec<(Word, Word)> = (0..n)
            .map(|ai| (Word::sym(a1[ai]), scheme.noise[y][ai].mul(&Word::sym(a1[ai]))))
            .collect();
        pairs.extend(b.iter().map(|&s| (Word::sym(s), Word::sym(s))));
        rules.push(Rule {
            name,
            parts: vec![
                PartRule { from: q[0], u: Word::empty(), to: q[0], v: Word::empty() },
                PartRule { from: q[1], u, to: q[1], v },
                PartRule { from: q[2], u: Word::empty(), to: q[2], v: Word::empty() },
            ],
            sectors: vec![SectorRule::from_pairs(pairs), SectorRule::identity(a2.iter().copied())],
        });
    }
    let m = Machine::new(al, hw, rules).map_err(MachinesError::Machine)?;
    Ok((m, scheme))
}

/// Rule index of `θ_y` (`y` in `A ⊔ B` order).
pub fn rule_of(y: usize) -> usize {
    y
}

/// Block form `u_0 x_1 u_1 … x_k u_k` of a first-sector word, updated in place by rule
/// applications in time linear in `k·D` rather than in the word length.
#[derive(Clone, Debug)]
pub struct BlockTape {
    blocks: Vec<VecDeque<Letter>>,
    xs: Vec<Letter>,
}

impl BlockTape {
    pub fn from_word(s: &NoiseScheme, w: &Word) -> Option<BlockTape> {
        let mut t = BlockTape { blocks: vec![VecDeque::new()], xs: Vec::new() };
        for &l in w.letters() {
            match s.role(l.sym)? {
                Role::A1(_) | Role::B(_) => t.append_letter(s, l),
                _ => return None,
            }
        }
        Some(t)
    }

    pub fn to_word(&self) -> Word {
        let mut out = Vec::new();
        for (j, b) in self.blocks.iter().enumerate() {
            if j > 0 {
                out.push(self.xs[j - 1]);
            }
            out.extend(b.iter().copied());
        }
        Word::from_letters(out)
    }

    pub fn len(&self) -> usize {
        self.xs.len() + self.blocks.iter().map(|b| b.len()).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn a_count(&self) -> usize {
        self.xs.len()
    }

    fn append_letter(&mut self, s: &NoiseScheme, l: Letter) {
        let last = self.blocks.last_mut().expect("at least one block");
        match s.role(l.sym) {
            Some(Role::B(_)) => {
                if last.back() == Some(&l.inverse()) {
                    last.pop_back();
                } else {
                    last.push_back(l);
                }
            }
            _ => {
                if last.is_empty() && self.xs.last() == Some(&l.inverse()) {
                    self.xs.pop();
                    self.blocks.pop();
                } else {
                    self.xs.push(l);
                    self.blocks.push(VecDeque::new());
                }
            }
        }
    }

    fn right_mul(block: &mut VecDeque<Letter>, w: &Word) {
        for &l in w.letters() {
            if block.back() == Some(&l.inverse()) {
                block.pop_back();
            } else {
                block.push_back(l);
            }
        }
    }

    fn left_mul(block: &mut VecDeque<Letter>, w: &Word) {
        for &l in w.letters().iter().rev() {
            if block.front() == Some(&l.inverse()) {
                block.pop_front();
            } else {
                block.push_front(l);
            }
        }
    }

    /// Applies `θ_y^{±1}` of `M1` to the first sector.
    pub fn step(&mut self, s: &NoiseScheme, y: usize, inv: bool) {
        for j in 0..self.xs.len() {
            let x = self.xs[j];
            let Some(Role::A1(ai)) = s.role(x.sym) else { continue };
            let v = s.noise_word(y, ai);
            let n = if inv { v.inverse() } else { v.clone() };
            if x.inv {
                Self::left_mul(&mut self.blocks[j + 1], &n.inverse());
            } else {
                Self::right_mul(&mut self.blocks[j], &n);
            }
        }
        let n = s.n();
        if y >= n {
            let l = Letter { sym: s.b[y - n], inv: !inv };
            self.append_letter(s, l);
        } else if !inv {
            self.append_letter(s, Letter::neg(s.a1[y]));
        } else {
            let tail = s.noise_word(y, y).inverse();
            for &l in tail.letters() {
                self.append_letter(s, l);
            }
            self.append_letter(s, Letter::pos(s.a1[y]));
        }
    }

    fn last_block(&self) -> &VecDeque<Letter> {
        self.blocks.last().expect("at least one block")
    }
}

/// `‖w‖ + ‖w‖(2D+1)^‖w‖`, saturating.
pub fn shift_time_bound(d: usize, n: usize) -> u128 {
    let base = (2 * d + 1) as u128;
    let mut p: u128 = 1;
    for _ in 0..n {
        p = p.saturating_mul(base);
    }
    (n as u128).saturating_add((n as u128).saturating_mul(p))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftResult {
    pub history: History,
    /// Largest first-sector length met along the shift.
    pub max_width: usize,
}

/// The unique shift of `w` (a computation from `q0 w q1` to `q0 q1`), if `w` is shiftable.
pub fn shift(s: &NoiseScheme, w: &Word) -> Option<ShiftResult> {
    let mut tape = BlockTape::from_word(s, w)?;
    let bound = shift_time_bound(s.d, w.len());
    let mut h: History = Vec::new();
    let mut max_width = tape.len();
    let n = s.n();
    let mut apply = |tape: &mut BlockTape, h: &mut History, y: usize, inv: bool| -> bool {
        tape.step(s, y, inv);
        h.push(Step { rule: rule_of(y), inv });
        max_width = max_width.max(tape.len());
        (h.len() as u128) <= bound
    };
    loop {
        // Spell the trailing noise block backwards when it can be erased letter by letter.
        let last_x = tape.xs.last().copied();
        if last_x.is_none_or(|x| !x.inv) {
            while let Some(&l) = tape.last_block().back() {
                let Some(Role::B(j)) = s.role(l.sym) else { return None };
                if !apply(&mut tape, &mut h, n + j, l.inv) {
                    return None;
                }
            }
            let Some(x) = last_x else { break };
            let Some(Role::A1(ai)) = s.role(x.sym) else { return None };
            let before = tape.a_count();
            if !apply(&mut tape, &mut h, ai, false) || tape.a_count() + 1 != before {
                return None;
            }
        } else {
            let x = last_x.expect("checked above");
            let Some(Role::A1(ai)) = s.role(x.sym) else { return None };
            while !tape.last_block().is_empty() {
                let block: Vec<Letter> = tape.last_block().iter().copied().collect();
                let mut best: Option<(usize, bool, usize)> = None;
                for j in 0..2 {
                    for inv in [false, true] {
                        let v = s.noise_word(n + j, ai);
                        let v = if inv { v.inverse() } else { v.clone() };
                        let lcp = v.letters().iter().zip(&block).take_while(|(p, q)| p == q).count();
                        if best.is_none_or(|(_, _, l)| lcp > l) {
                            best = Some((n + j, inv, lcp));
                        }
                    }
                }
                let (y, inv, lcp) = best.expect("two noise letters");
                if 2 * lcp <= s.d {
                    return None;
                }
                let len = block.len();
                if !apply(&mut tape, &mut h, y, inv) || tape.last_block().len() >= len {
                    return None;
                }
            }
            let before = tape.a_count();
            if !apply(&mut tape, &mut h, ai, true) || tape.a_count() + 1 != before {
                return None;
            }
        }
    }
    if !tape.is_empty() || !replay_to_empty(s, w, &h) {
        return None;
    }
    Some(ShiftResult { history: h, max_width })
}

/// Replays an `M1` history on the first sector from scratch and checks that it empties `w`.
pub fn replay_to_empty(s: &NoiseScheme, w: &Word, h: &[Step]) -> bool {
    let Some(mut t) = BlockTape::from_word(s, w) else { return false };
    for st in h {
        t.step(s, st.rule, st.inv);
    }
    t.is_empty()
}

/// The shift as a full computation of `M1` on base `Q0 Q1`, replayed through the generic rule engine.
pub fn shift_computation(m: &Machine, s: &NoiseScheme, w: &Word) -> Option<crate::smachine::Computation> {
    let res = shift(s, w)?;
    let start = AdmissibleWord::standard(vec![m.hw.parts[0].start, m.hw.parts[1].start], vec![w.clone()]);
    m.run(&start, &res.history).ok()
}

/// First-sector words between the `A`-letters (`u_1, …, u_{k-1}`) of a word over `A1 ⊔ B`.
pub fn inner_blocks(s: &NoiseScheme, w: &Word) -> Vec<Word> {
    let mut out = Vec::new();
    let mut cur: Option<Vec<Letter>> = None;
    for &l in w.letters() {
        match s.role(l.sym) {
            Some(Role::B(_)) => {
                if let Some(c) = cur.as_mut() {
                    c.push(l);
                }
            }
            _ => {
                if let Some(c) = cur.take() {
                    out.push(Word::from_letters(c));
                }
                cur = Some(Vec::new());
            }
        }
    }
    out
}

/// Maximal subword from the first to the last `A`-letter.
pub fn compress(al: &Alphabet, w: &Word) -> Word {
    let is_a = |l: &Letter| matches!(al.kind(l.sym), Kind::Tape { sub: TapeSub::ALetter, .. });
    let l = w.letters();
    match (l.iter().position(is_a), l.iter().rposition(is_a)) {
        (Some(i), Some(j)) => w.slice(i, j + 1),
        _ => Word::empty(),
    }
}

pub fn is_compressed(al: &Alphabet, w: &Word) -> bool {
    !w.is_empty() && compress(al, w) == *w
}

/// A compressed semi-computation: each step applies the rule in `sector` and keeps the compression.
pub fn compressed_semi(
    m: &Machine,
    sector: usize,
    w0: &Word,
    history: &[Step],
) -> Result<crate::smachine::SemiComputation, MachineError> {
    if !is_compressed(&m.alphabet, w0) {
        return Err(MachineError::Parse { line: 0, msg: "starting word is not compressed".into() });
    }
    let mut cur = w0.clone();
    for (k, &st) in history.iter().enumerate() {
        let next = m
            .semi_apply(&cur, st, sector)
            .map_err(|e| MachineError::Parse { line: k, msg: e.to_string() })?;
        cur = compress(&m.alphabet, &next);
    }
    Ok(crate::smachine::SemiComputation { sector, start: w0.clone(), history: history.to_vec(), end: cur })
}
