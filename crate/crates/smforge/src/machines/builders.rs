//! Machine combinators: composition with a transition rule, reflection, cyclification and
//! parallel copies.

use std::collections::HashMap;

use crate::smachine::{Hardware, Machine, Part, PartRule, Rule, SectorRule};
use crate::words::{Alphabet, Basis, Kind, Letter, Sym, Word};

use super::MachinesError;

pub(crate) fn map_word(w: &Word, map: &[Sym]) -> Word {
    Word::from_letters(w.letters().iter().map(|l| Letter { sym: map[l.sym.0 as usize], inv: l.inv }))
}

pub(crate) fn map_sector(sr: &SectorRule, map: &[Sym]) -> SectorRule {
    match sr {
        SectorRule::Locked => SectorRule::Locked,
        SectorRule::Map { x, z, f } => SectorRule::Map {
            x: Basis::new(x.words().iter().map(|w| map_word(w, map)).collect()),
            z: Basis::new(z.words().iter().map(|w| map_word(w, map)).collect()),
            f: f.clone(),
        },
    }
}

pub(crate) fn map_part(p: &PartRule, map: &[Sym]) -> PartRule {
    PartRule {
        from: map[p.from.0 as usize],
        u: map_word(&p.u, map),
        to: map[p.to.0 as usize],
        v: map_word(&p.v, map),
    }
}

pub(crate) fn fixed(q: Sym) -> PartRule {
    PartRule { from: q, u: Word::empty(), to: q, v: Word::empty() }
}

/// Incrementally assembled hardware.
pub(crate) struct Builder {
    pub al: Alphabet,
    pub parts: Vec<Part>,
    pub tapes: Vec<Vec<Sym>>,
}

impl Builder {
    pub fn new(num_parts: usize, num_sectors: usize) -> Builder {
        let placeholder = Sym(u32::MAX);
        Builder {
            al: Alphabet::new(),
            parts: (0..num_parts)
                .map(|i| Part { name: format!("P{i}"), letters: Vec::new(), start: placeholder, end: placeholder })
                .collect(),
            tapes: vec![Vec::new(); num_sectors],
        }
    }

    pub fn state(&mut self, part: usize, name: &str) -> Result<Sym, MachinesError> {
        let s = self.al.add(name, Kind::State { part })?;
        self.parts[part].letters.push(s);
        Ok(s)
    }

    pub fn tape(&mut self, sector: usize, name: &str, kind: Kind) -> Result<Sym, MachinesError> {
        let sub = match kind {
            Kind::Tape { sub, .. } => sub,
            _ => crate::words::TapeSub::Ordinary,
        };
        let s = self.al.add(name, Kind::Tape { sector, sub })?;
        self.tapes[sector - 1].push(s);
        Ok(s)
    }

    /// Copies the letters of `m`, relocating parts and sectors; returns the symbol map. `rename` gets
    /// each name and whether it is a state letter.
    pub fn import(
        &mut self,
        m: &Machine,
        rename: &dyn Fn(&str, bool) -> String,
        part_of: &dyn Fn(usize) -> usize,
        sector_of: &dyn Fn(usize) -> usize,
        preset: &HashMap<Sym, Sym>,
    ) -> Result<Vec<Sym>, MachinesError> {
        let mut map = Vec::with_capacity(m.alphabet.len());
        for s in m.alphabet.symbols() {
            if let Some(&t) = preset.get(&s) {
                map.push(t);
                continue;
            }
            let kind = m.alphabet.kind(s);
            let name = rename(m.alphabet.name(s), matches!(kind, Kind::State { .. }));
            let t = match kind {
                Kind::State { part } => self.state(part_of(part), &name)?,
                k @ Kind::Tape { sector, .. } => self.tape(sector_of(sector), &name, k)?,
                _ => return Err(MachinesError::Alphabet(format!("`{name}` is not a machine letter"))),
            };
            map.push(t);
        }
        Ok(map)
    }

    pub fn finish(
        self,
        cyclic: bool,
        input_sectors: Vec<usize>,
        rules: Vec<Rule>,
    ) -> Result<Machine, MachinesError> {
        let hw = Hardware { parts: self.parts, tapes: self.tapes, cyclic, input_sectors };
        Ok(Machine::new(self.al, hw, rules)?)
    }
}

/// Transition rule joining two machines: every part moves from the first machine's end letter to
/// the second machine's start letter; only the listed sectors stay open (identity on their tape).
#[derive(Clone, Debug)]
pub struct SigmaSpec {
    pub name: String,
    pub open: Vec<usize>,
}

/// Runs `a`, then `sigma`, then `b`. Letters of `b` listed in `identify` are merged into the given
/// letters of `a`; `a` is padded with single-letter parts named `q{j}` when `b` has more parts.
pub fn compose(
    a: &Machine,
    b: &Machine,
    identify: &[(Sym, Sym)],
    sigma: &SigmaSpec,
) -> Result<Machine, MachinesError> {
    if a.hw.cyclic || b.hw.cyclic {
        return Err(MachinesError::Compose("only non-cyclic machines compose".into()));
    }
    let pa = a.hw.parts.len();
    let pb = b.hw.parts.len();
    if pa > pb {
        return Err(MachinesError::Compose(format!("{pa} parts do not fit into {pb}")));
    }
    let ns = pb - 1;
    let mut bl = Builder::new(pb, ns);
    let amap = bl.import(a, &|n, _| n.to_string(), &|p| p, &|s| s, &HashMap::new())?;
    let mut pads = Vec::new();
    for j in pa..pb {
        pads.push(bl.state(j, &format!("q{j}"))?);
    }
    let preset: HashMap<Sym, Sym> = identify.iter().map(|&(sb, sa)| (sb, amap[sa.0 as usize])).collect();
    let bmap = bl.import(b, &|n, _| n.to_string(), &|p| p, &|s| s, &preset)?;
    let a_start = |j: usize| if j < pa { amap[a.hw.parts[j].start.0 as usize] } else { pads[j - pa] };
    let a_end = |j: usize| if j < pa { amap[a.hw.parts[j].end.0 as usize] } else { pads[j - pa] };
    for j in 0..pb {
        let pt = &mut bl.parts[j];
        pt.name = if j < pa { a.hw.parts[j].name.clone() } else { format!("Q{j}") };
        pt.start = a_start(j);
        pt.end = bmap[b.hw.parts[j].end.0 as usize];
    }
    let mut rules = Vec::new();
    for r in &a.rules {
        let mut parts: Vec<PartRule> = r.parts.iter().map(|p| map_part(p, &amap)).collect();
        parts.extend(pads.iter().map(|&q| fixed(q)));
        let mut sectors: Vec<SectorRule> = r.sectors.iter().map(|s| map_sector(s, &amap)).collect();
        sectors.resize(ns, SectorRule::Locked);
        rules.push(Rule { name: r.name.clone(), parts, sectors });
    }
    let parts = (0..pb)
        .map(|j| PartRule {
            from: a_end(j),
            u: Word::empty(),
            to: bmap[b.hw.parts[j].start.0 as usize],
            v: Word::empty(),
        })
        .collect();
    let sectors = (1..=ns)
        .map(|k| {
            if sigma.open.contains(&k) {
                SectorRule::identity(bl.tapes[k - 1].iter().copied())
            } else {
                SectorRule::Locked
            }
        })
        .collect();
    rules.push(Rule { name: sigma.name.clone(), parts, sectors });
    for r in &b.rules {
        rules.push(Rule {
            name: r.name.clone(),
            parts: r.parts.iter().map(|p| map_part(p, &bmap)).collect(),
            sectors: r.sectors.iter().map(|s| map_sector(s, &bmap)).collect(),
        });
    }
    let input = a.hw.input_sectors.clone();
    bl.finish(false, input, rules)
}

/// Name of the mirror copy of a letter.
pub fn mirror_name(n: &str) -> String {
    format!("{n}'")
}

/// Mirror index of sector `i` in a reflected machine with `n + 1` original parts.
pub fn mirror_sector(n: usize, i: usize) -> usize {
    2 * n + 2 - i
}

/// Doubles the base `Q0…QN` to `Q0…QN RN⁻¹…R0⁻¹`, where part `R_j` is stored as a positive part
/// whose letter stands for `r_j⁻¹`.
pub fn reflect(m: &Machine) -> Result<Machine, MachinesError> {
    if m.hw.cyclic {
        return Err(MachinesError::Compose("reflection needs a non-cyclic machine".into()));
    }
    let p = m.hw.parts.len();
    let n = p - 1;
    let mut bl = Builder::new(2 * p, 2 * p - 1);
    let map = bl.import(m, &|s, _| s.to_string(), &|j| j, &|s| s, &HashMap::new())?;
    let mir = bl.import(m, &|s, _| mirror_name(s), &|j| 2 * n + 1 - j, &|s| mirror_sector(n, s), &HashMap::new())?;
    for j in 0..p {
        let src = &m.hw.parts[j];
        bl.parts[j].name = src.name.clone();
        bl.parts[j].start = map[src.start.0 as usize];
        bl.parts[j].end = map[src.end.0 as usize];
        let k = 2 * n + 1 - j;
        bl.parts[k].name = format!("R{}", j);
        bl.parts[k].start = mir[src.start.0 as usize];
        bl.parts[k].end = mir[src.end.0 as usize];
    }
    let rules = m
        .rules
        .iter()
        .map(|r| {
            let mut parts: Vec<PartRule> = r.parts.iter().map(|pr| map_part(pr, &map)).collect();
            for j in (0..p).rev() {
                let pr = &r.parts[j];
                parts.push(PartRule {
                    from: mir[pr.from.0 as usize],
                    u: map_word(&pr.v, &mir).inverse(),
                    to: mir[pr.to.0 as usize],
                    v: map_word(&pr.u, &mir).inverse(),
                });
            }
            let mut sectors: Vec<SectorRule> = r.sectors.iter().map(|s| map_sector(s, &map)).collect();
            sectors.push(SectorRule::Locked);
            for i in (1..=n).rev() {
                sectors.push(map_sector(&r.sectors[i - 1], &mir));
            }
            Rule { name: r.name.clone(), parts, sectors }
        })
        .collect();
    let mut input = m.hw.input_sectors.clone();
    input.extend(m.hw.input_sectors.iter().map(|&i| mirror_sector(n, i)));
    bl.finish(false, input, rules)
}

/// Prepends a part `{t}` and closes the base into a cycle; both sectors next to `t` stay empty.
pub fn cyclify(m: &Machine) -> Result<Machine, MachinesError> {
    if m.hw.cyclic {
        return Err(MachinesError::Compose("machine is already cyclic".into()));
    }
    let p = m.hw.parts.len();
    let mut bl = Builder::new(p + 1, p + 1);
    let t = bl.state(0, "t")?;
    bl.parts[0] = Part { name: "T".into(), letters: vec![t], start: t, end: t };
    let map = bl.import(m, &|s, _| s.to_string(), &|j| j + 1, &|s| s + 1, &HashMap::new())?;
    for j in 0..p {
        let src = &m.hw.parts[j];
        let dst = &mut bl.parts[j + 1];
        dst.name = src.name.clone();
        dst.start = map[src.start.0 as usize];
        dst.end = map[src.end.0 as usize];
    }
    let rules = m
        .rules
        .iter()
        .map(|r| {
            let mut parts = vec![fixed(t)];
            parts.extend(r.parts.iter().map(|pr| map_part(pr, &map)));
            let mut sectors = vec![SectorRule::Locked];
            sectors.extend(r.sectors.iter().map(|s| map_sector(s, &map)));
            sectors.push(SectorRule::Locked);
            Rule { name: r.name.clone(), parts, sectors }
        })
        .collect();
    let input = m.hw.input_sectors.iter().map(|&i| i + 1).collect();
    bl.finish(true, input, rules)
}

/// Name of a letter in coordinate `i` (1-based); coordinate 1 keeps the original name.
pub fn coord_name(n: &str, i: usize) -> String {
    if i == 1 {
        n.to_string()
    } else {
        format!("{n}({i})")
    }
}

/// `L` coordinate copies of a cyclic machine run in parallel. With `lock_first` every rule also
/// locks the first input sector of coordinate 1 (its insertions there are dropped).
pub fn parallelize(m: &Machine, l: usize, lock_first: bool) -> Result<Machine, MachinesError> {
    if !m.hw.cyclic {
        return Err(MachinesError::Compose("parallel copies need a cyclic machine".into()));
    }
    if l == 0 {
        return Err(MachinesError::Compose("need at least one coordinate".into()));
    }
    let p = m.hw.parts.len();
    let mut bl = Builder::new(l * p, l * p);
    let mut maps = Vec::new();
    for i in 1..=l {
        let off = (i - 1) * p;
        let map = bl.import(m, &|s, _| coord_name(s, i), &|j| j + off, &|s| s + off, &HashMap::new())?;
        for j in 0..p {
            let src = &m.hw.parts[j];
            let dst = &mut bl.parts[off + j];
            dst.name = coord_name(&src.name, i);
            dst.start = map[src.start.0 as usize];
            dst.end = map[src.end.0 as usize];
        }
        maps.push(map);
    }
    let special = m.hw.input_sectors.first().copied();
    let rules = m
        .rules
        .iter()
        .map(|r| {
            let mut parts = Vec::new();
            let mut sectors = Vec::new();
            for (i, map) in maps.iter().enumerate() {
                let mut ps: Vec<PartRule> = r.parts.iter().map(|pr| map_part(pr, map)).collect();
                let mut ss: Vec<SectorRule> = r.sectors.iter().map(|s| map_sector(s, map)).collect();
                if lock_first && i == 0 {
                    if let Some(k) = special {
                        ss[k - 1] = SectorRule::Locked;
                        ps[k - 1].v = Word::empty();
                        ps[k % p].u = Word::empty();
                    }
                }
                parts.extend(ps);
                sectors.extend(ss);
            }
            Rule { name: r.name.clone(), parts, sectors }
        })
        .collect();
    let input = (0..l).flat_map(|i| m.hw.input_sectors.iter().map(move |&s| s + i * p)).collect();
    bl.finish(true, input, rules)
}
