//! Band-structured van Kampen diagrams built from (semi-)computations.
//!
//! A diagram is a stack of θ-bands. Each cell is stored with its four sides; its contour is
//! `bottom · right · top⁻¹ · left⁻¹`. Cancellations between consecutive bands (0-cells) are
//! implicit: the reduced top of a band must equal the reduced bottom of the next one.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::weights::{Num, WeightFunctions};
use super::{cyclic_key, second_norm, Presentation, RelatorClass};
use crate::machines::m1::compress;
use crate::machines::main_machine::MainMachine;
use crate::smachine::{AdmissibleWord, Computation, Machine, SemiComputation, Step};
use crate::words::{free_reduce, Letter, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("band {band}, cell {cell}: contour is not a relator of class {class}")]
    NotRelator { band: usize, cell: usize, class: String },
    #[error("band {band}, cell {cell}: side does not match its neighbour")]
    SideMismatch { band: usize, cell: usize },
    #[error("band {band}: {msg}")]
    Band { band: usize, msg: String },
    #[error("contour: {0}")]
    Contour(String),
    #[error("hub: {0}")]
    Hub(String),
    #[error("build: {0}")]
    Build(String),
    #[error("format: {0}")]
    Format(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub class: RelatorClass,
    pub bottom: Word,
    pub top: Word,
    pub left: Word,
    pub right: Word,
}

impl Cell {
    pub fn boundary(&self) -> Word {
        let mut w = self.bottom.clone();
        w.append(&self.right);
        w.append(&self.top.inverse());
        w.append(&self.left.inverse());
        w
    }

    fn flipped(&self) -> Cell {
        Cell {
            class: self.class,
            bottom: self.top.clone(),
            top: self.bottom.clone(),
            left: self.left.inverse(),
            right: self.right.inverse(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Band {
    pub step: Step,
    pub cells: Vec<Cell>,
    /// Letters dropped from the left and right of the band's top (compressed diagrams).
    pub trim_left: Word,
    pub trim_right: Word,
}

impl Band {
    pub fn bottom(&self) -> Word {
        let mut w = Word::empty();
        for c in &self.cells {
            w.append(&c.bottom);
        }
        w
    }

    pub fn top(&self) -> Word {
        let mut w = Word::empty();
        for c in &self.cells {
            w.append(&c.top);
        }
        w
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagramKind {
    Trapezium,
    SemiTrapezium,
    CompressedSemiTrapezium,
    Disk,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridDiagram {
    pub kind: DiagramKind,
    /// Bottom to top.
    pub bands: Vec<Band>,
    pub bottom: Word,
    pub top: Word,
    pub left: Word,
    pub right: Word,
    /// Disk diagrams: the sides are glued and the top is closed by this hub cell (contour in
    /// `bottom`).
    pub hub: Option<Cell>,
    pub glued: bool,
    /// `‖W(2)‖` of the hub configuration, for its weight.
    pub hub_norm: Option<usize>,
}

fn reduced(w: &Word) -> Word {
    free_reduce(w.letters().iter().copied())
}

fn theta_word(p: &Presentation, step: Step, i: usize) -> Word {
    Word::letter(Letter::pos(p.theta_letter(step.rule, i)))
}

/// Cells of the positive band of rule `step.rule` on `w` (which must be in the rule's domain).
fn positive_band(m: &Machine, p: &Presentation, w: &AdmissibleWord, rule: usize) -> Result<Vec<Cell>, DiagramError> {
    let step = Step::pos(rule);
    let r = m.rule(step);
    let mut cells = Vec::new();
    for (k, q) in w.states.iter().enumerate() {
        if q.inv {
            return Err(DiagramError::Build("state letters must be positive".into()));
        }
        let i = m.part_of(q.sym).ok_or_else(|| DiagramError::Build("not a state letter".into()))?;
        let pr = &r.parts[i];
        if pr.from != q.sym {
            return Err(DiagramError::Build(format!("rule `{}` does not apply at part {i}", r.name)));
        }
        let mut top = pr.u.clone();
        top.push(Letter::pos(pr.to));
        top.append(&pr.v);
        let class = if super::is_t_part(&m.hw.parts[i].name) { RelatorClass::ThetaT } else { RelatorClass::ThetaQ };
        cells.push(Cell {
            class,
            bottom: Word::letter(*q),
            top,
            left: theta_word(p, step, i),
            right: theta_word(p, step, i + 1),
        });
        if k < w.tapes.len() {
            let sec = m
                .window_sector(w.states[k], w.states[k + 1])
                .ok_or_else(|| DiagramError::Build(format!("bad base at factor {k}")))?;
            cells.extend(sector_cells(m, p, &w.tapes[k], rule, sec)?);
        }
    }
    Ok(cells)
}

/// `(θ,a)`-cells of the positive rule `rule` on a tape word of sector `sec`.
fn sector_cells(m: &Machine, p: &Presentation, w: &Word, rule: usize, sec: usize) -> Result<Vec<Cell>, DiagramError> {
    let sr = m.rules[rule].sector(sec);
    let pairs = sr.pairs();
    let th = theta_word(p, Step::pos(rule), sec);
    let expr = match sr {
        crate::smachine::SectorRule::Locked if w.is_empty() => return Ok(Vec::new()),
        crate::smachine::SectorRule::Locked => return Err(DiagramError::Build(format!("sector {sec} is locked"))),
        crate::smachine::SectorRule::Map { x, .. } => x
            .express(w)
            .ok()
            .flatten()
            .ok_or_else(|| DiagramError::Build(format!("tape word not in the domain of sector {sec}")))?,
    };
    let mut cells = Vec::new();
    for l in expr.terms.letters() {
        let (x, fx) = &pairs[l.sym.0 as usize];
        let (bottom, top) = if l.inv { (x.inverse(), fx.inverse()) } else { (x.clone(), fx.clone()) };
        let class = match x.letters().first().map(|a| m.alphabet.kind(a.sym)) {
            Some(crate::words::Kind::Tape { sub: crate::words::TapeSub::ALetter, .. }) if x.len() == 1 => RelatorClass::ThetaA,
            Some(crate::words::Kind::Tape { sub: crate::words::TapeSub::BLetter, .. }) if x.len() == 1 => RelatorClass::ThetaB,
            _ => RelatorClass::ThetaOrdinary,
        };
        cells.push(Cell { class, bottom, top, left: th.clone(), right: th.clone() });
    }
    Ok(cells)
}

fn band_for(m: &Machine, p: &Presentation, w: &AdmissibleWord, step: Step) -> Result<(Band, AdmissibleWord), DiagramError> {
    let next = m.apply(w, step).map_err(|e| DiagramError::Build(e.to_string()))?;
    let cells = if step.inv {
        positive_band(m, p, &next, step.rule)?.iter().map(Cell::flipped).collect()
    } else {
        positive_band(m, p, w, step.rule)?
    };
    Ok((Band { step, cells, trim_left: Word::empty(), trim_right: Word::empty() }, next))
}

fn semi_band(m: &Machine, p: &Presentation, w: &Word, step: Step, sec: usize) -> Result<(Band, Word), DiagramError> {
    let next = m.semi_apply(w, step, sec).map_err(|e| DiagramError::Build(e.to_string()))?;
    let cells = if step.inv {
        sector_cells(m, p, &next, step.rule, sec)?.iter().map(Cell::flipped).collect()
    } else {
        sector_cells(m, p, w, step.rule, sec)?
    };
    Ok((Band { step, cells, trim_left: Word::empty(), trim_right: Word::empty() }, next))
}

fn sides(p: &Presentation, bands: &[Band], sec: Option<usize>) -> (Word, Word) {
    let mut left = Word::empty();
    let mut right = Word::empty();
    for b in bands {
        match (b.cells.first(), b.cells.last()) {
            (Some(f), Some(l)) => {
                left.append(&f.left);
                right.append(&l.right);
            }
            _ => {
                // a band without cells still carries its θ-edge
                let i = sec.unwrap_or(0);
                let t = theta_word(p, Step::pos(b.step.rule), i);
                let t = if b.step.inv { t.inverse() } else { t };
                left.append(&t);
                right.append(&t);
            }
        }
        left.append(&b.trim_left);
        right.append(&b.trim_right.inverse());
    }
    (left, right)
}

pub fn build_trapezium(m: &Machine, p: &Presentation, comp: &Computation) -> Result<GridDiagram, DiagramError> {
    if !comp.is_reduced() {
        return Err(DiagramError::Build("history is not reduced".into()));
    }
    let mut bands = Vec::new();
    let mut cur = comp.start.clone();
    for &s in &comp.history {
        let (b, next) = band_for(m, p, &cur, s)?;
        bands.push(b);
        cur = next;
    }
    let (left, right) = sides(p, &bands, None);
    Ok(GridDiagram {
        kind: DiagramKind::Trapezium,
        bands,
        bottom: comp.start.to_word(),
        top: cur.to_word(),
        left,
        right,
        hub: None,
        glued: false,
        hub_norm: None,
    })
}

pub fn build_semitrapezium(m: &Machine, p: &Presentation, semi: &SemiComputation) -> Result<GridDiagram, DiagramError> {
    if !crate::smachine::is_reduced_history(&semi.history) {
        return Err(DiagramError::Build("history is not reduced".into()));
    }
    let mut bands = Vec::new();
    let mut cur = semi.start.clone();
    for &s in &semi.history {
        let (b, next) = semi_band(m, p, &cur, s, semi.sector)?;
        bands.push(b);
        cur = next;
    }
    let (left, right) = sides(p, &bands, Some(semi.sector));
    Ok(GridDiagram {
        kind: DiagramKind::SemiTrapezium,
        bands,
        bottom: semi.start.clone(),
        top: cur,
        left,
        right,
        hub: None,
        glued: false,
        hub_norm: None,
    })
}

/// Semi-trapezium of a compressed semi-computation: after each band the letters outside the
/// first and last `A`-letters are cut off and moved to the sides.
pub fn build_compressed(m: &Machine, p: &Presentation, semi: &SemiComputation) -> Result<GridDiagram, DiagramError> {
    if !crate::smachine::is_reduced_history(&semi.history) {
        return Err(DiagramError::Build("history is not reduced".into()));
    }
    let mut bands = Vec::new();
    let mut cur = semi.start.clone();
    for &s in &semi.history {
        let (mut b, next) = semi_band(m, p, &cur, s, semi.sector)?;
        let c = compress(&m.alphabet, &next);
        let start = (0..=next.len().saturating_sub(c.len()))
            .find(|&i| next.slice(i, i + c.len()) == c)
            .ok_or_else(|| DiagramError::Build("compression is not a subword".into()))?;
        b.trim_left = next.slice(0, start);
        b.trim_right = next.slice(start + c.len(), next.len());
        bands.push(b);
        cur = c;
    }
    let (left, right) = sides(p, &bands, Some(semi.sector));
    Ok(GridDiagram {
        kind: DiagramKind::CompressedSemiTrapezium,
        bands,
        bottom: semi.start.clone(),
        top: cur,
        left,
        right,
        hub: None,
        glued: false,
        hub_norm: None,
    })
}

/// Trapezium of an accepting run of `w` with its sides glued and its top closed by the hub.
pub fn build_disk_diagram(main: &MainMachine, p: &Presentation, w: &AdmissibleWord) -> Result<GridDiagram, DiagramError> {
    let (comp, ell) = main
        .accepting_run(w)
        .map_err(|e| DiagramError::Build(e.to_string()))?
        .ok_or_else(|| DiagramError::Build("configuration is not accepted".into()))?;
    if ell > 1 {
        return Err(DiagramError::Build("accepting run uses more than one machine phase".into()));
    }
    let mut d = build_trapezium(&main.machine, p, &comp)?;
    let ac = main.w_ac();
    d.kind = DiagramKind::Disk;
    d.glued = true;
    d.hub = Some(Cell {
        class: RelatorClass::Hub,
        bottom: ac.to_word(),
        top: Word::empty(),
        left: Word::empty(),
        right: Word::empty(),
    });
    d.hub_norm = Some(second_norm(main, &ac));
    Ok(d)
}

impl GridDiagram {
    /// Number of cells, the hub included.
    pub fn area(&self) -> usize {
        self.bands.iter().map(|b| b.cells.len()).sum::<usize>() + usize::from(self.hub.is_some())
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.bands.iter().flat_map(|b| &b.cells).chain(self.hub.as_ref())
    }

    /// `(#disks, #(θ,t)-cells, #a-cells, #(θ,A)-cells)`.
    pub fn signature(&self) -> [usize; 4] {
        let mut s = [0; 4];
        for c in self.cells() {
            match c.class {
                RelatorClass::Hub | RelatorClass::Disk => s[0] += 1,
                RelatorClass::ThetaT => s[1] += 1,
                RelatorClass::ARelation => s[2] += 1,
                RelatorClass::ThetaA => s[3] += 1,
                _ => {}
            }
        }
        s
    }

    /// Sum of cell weights: 1 per θ-cell, `f(‖W(2)‖)` per disk, `g(‖∂Π‖)` per a-cell.
    pub fn weight(&self, wf: &WeightFunctions) -> Num {
        let a = &wf.arith;
        let mut total = Num::zero();
        for c in self.cells() {
            let w = match c.class {
                RelatorClass::Hub | RelatorClass::Disk => wf.f_u(self.hub_norm.unwrap_or(0) as u64),
                RelatorClass::ARelation => wf.g_u(c.boundary().len() as u64),
                _ => Num::from(1),
            };
            total = a.add(&total, &w);
        }
        total
    }

    /// The contour label.
    pub fn contour(&self) -> Word {
        if self.glued {
            return self.bottom.clone();
        }
        let mut w = self.bottom.clone();
        w.append(&self.right);
        w.append(&self.top.inverse());
        w.append(&self.left.inverse());
        w
    }
}

/// Checks every cell against the presentation, the band gluing and the declared contour.
pub fn verify_diagram(d: &GridDiagram, p: &Presentation) -> Result<(), DiagramError> {
    let index: HashMap<Word, RelatorClass> = p.index();
    let check_cell = |band: usize, cell: usize, c: &Cell| -> Result<(), DiagramError> {
        match index.get(&cyclic_key(&c.boundary())) {
            Some(&cl) if cl == c.class => Ok(()),
            _ => Err(DiagramError::NotRelator { band, cell, class: c.class.tag().into() }),
        }
    };
    let mut below = reduced(&d.bottom);
    for (bi, b) in d.bands.iter().enumerate() {
        for (ci, c) in b.cells.iter().enumerate() {
            check_cell(bi, ci, c)?;
            if ci > 0 && b.cells[ci - 1].right != c.left {
                return Err(DiagramError::SideMismatch { band: bi, cell: ci });
            }
        }
        if reduced(&b.bottom()) != below {
            return Err(DiagramError::Band { band: bi, msg: "bottom does not match the word below".into() });
        }
        let top = reduced(&b.top());
        let next = match d.bands.get(bi + 1) {
            Some(nb) => reduced(&nb.bottom()),
            None => reduced(&d.top),
        };
        let mut expect = b.trim_left.clone();
        expect.append(&next);
        expect.append(&b.trim_right);
        if reduced(&expect) != top {
            return Err(DiagramError::Band { band: bi, msg: "top does not match the word above".into() });
        }
        below = next;
    }
    if d.bands.is_empty() && reduced(&d.bottom) != reduced(&d.top) {
        return Err(DiagramError::Contour("empty diagram with different bottom and top".into()));
    }
    // sector of the θ-edges; bands without cells (empty tape) carry no cell to read it from
    let theta_pos = |w: &Word| {
        w.letters().first().and_then(|l| match p.alphabet.kind(l.sym) {
            crate::words::Kind::Theta { pos, .. } => Some(pos),
            _ => None,
        })
    };
    let sec = d
        .bands
        .iter()
        .find_map(|b| b.cells.first())
        .and_then(|c| theta_pos(&c.left))
        .or_else(|| theta_pos(&d.left));
    let (left, right) = sides(p, &d.bands, sec);
    if left != d.left || right != d.right {
        return Err(DiagramError::Contour("side labels differ from the bands".into()));
    }
    if d.glued {
        if d.left != d.right {
            return Err(DiagramError::Contour("glued sides carry different labels".into()));
        }
        let hub = d.hub.as_ref().ok_or_else(|| DiagramError::Hub("glued diagram without hub".into()))?;
        match index.get(&cyclic_key(&hub.boundary())) {
            Some(RelatorClass::Hub) => {}
            _ => return Err(DiagramError::Hub("hub cell is not the hub relator".into())),
        }
        if hub.boundary() != d.top {
            return Err(DiagramError::Hub("hub does not close the top".into()));
        }
    } else if d.hub.is_some() {
        return Err(DiagramError::Hub("hub in an unglued diagram".into()));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct CellDoc {
    class: String,
    bottom: String,
    top: String,
    left: String,
    right: String,
}

#[derive(Serialize, Deserialize)]
struct BandDoc {
    rule: String,
    inverse: bool,
    trim_left: String,
    trim_right: String,
    cells: Vec<CellDoc>,
}

#[derive(Serialize, Deserialize)]
struct DiagramDoc {
    kind: DiagramKind,
    area: usize,
    signature: [usize; 4],
    bottom: String,
    top: String,
    left: String,
    right: String,
    glued: bool,
    hub_norm: Option<usize>,
    hub: Option<CellDoc>,
    bands: Vec<BandDoc>,
}

impl GridDiagram {
    pub fn to_json(&self, p: &Presentation) -> String {
        let f = |w: &Word| p.alphabet.format_word(w);
        let cell = |c: &Cell| CellDoc {
            class: c.class.tag().into(),
            bottom: f(&c.bottom),
            top: f(&c.top),
            left: f(&c.left),
            right: f(&c.right),
        };
        let doc = DiagramDoc {
            kind: self.kind,
            area: self.area(),
            signature: self.signature(),
            bottom: f(&self.bottom),
            top: f(&self.top),
            left: f(&self.left),
            right: f(&self.right),
            glued: self.glued,
            hub_norm: self.hub_norm,
            hub: self.hub.as_ref().map(cell),
            bands: self
                .bands
                .iter()
                .map(|b| BandDoc {
                    rule: p.rule_names[b.step.rule].clone(),
                    inverse: b.step.inv,
                    trim_left: f(&b.trim_left),
                    trim_right: f(&b.trim_right),
                    cells: b.cells.iter().map(cell).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("diagram serializes")
    }

    pub fn from_json(text: &str, p: &Presentation) -> Result<GridDiagram, DiagramError> {
        let doc: DiagramDoc = serde_json::from_str(text).map_err(|e| DiagramError::Format(e.to_string()))?;
        let w = |s: &str| p.alphabet.parse_word(s).map_err(|e| DiagramError::Format(e.to_string()));
        let cell = |c: &CellDoc| -> Result<Cell, DiagramError> {
            Ok(Cell {
                class: RelatorClass::from_tag(&c.class).ok_or_else(|| DiagramError::Format(format!("unknown class `{}`", c.class)))?,
                bottom: w(&c.bottom)?,
                top: w(&c.top)?,
                left: w(&c.left)?,
                right: w(&c.right)?,
            })
        };
        let mut bands = Vec::new();
        for b in &doc.bands {
            let rule = p
                .rule_names
                .iter()
                .position(|n| *n == b.rule)
                .ok_or_else(|| DiagramError::Format(format!("unknown rule `{}`", b.rule)))?;
            bands.push(Band {
                step: Step { rule, inv: b.inverse },
                cells: b.cells.iter().map(cell).collect::<Result<_, _>>()?,
                trim_left: w(&b.trim_left)?,
                trim_right: w(&b.trim_right)?,
            });
        }
        Ok(GridDiagram {
            kind: doc.kind,
            bands,
            bottom: w(&doc.bottom)?,
            top: w(&doc.top)?,
            left: w(&doc.left)?,
            right: w(&doc.right)?,
            hub: doc.hub.as_ref().map(cell).transpose()?,
            glued: doc.glued,
            hub_norm: doc.hub_norm,
        })
    }

    /// Graphviz rendering: one record node per band, cells as fields.
    pub fn to_dot(&self, p: &Presentation) -> String {
        let esc = |s: String| s.replace('\\', "\\\\").replace('"', "\\\"").replace('|', "\\|").replace('{', "\\{").replace('}', "\\}").replace('<', "\\<").replace('>', "\\>");
        let mut out = String::from("digraph diagram {\n  rankdir=BT;\n  node [shape=record, fontsize=10];\n");
        for (bi, b) in self.bands.iter().enumerate() {
            let fields: Vec<String> = b
                .cells
                .iter()
                .map(|c| esc(format!("{}: {}", c.class.tag(), p.alphabet.format_word(&c.bottom))))
                .collect();
            let name = p.alphabet.format_word(&Word::letter(Letter { sym: p.theta_letter(b.step.rule, 0), inv: b.step.inv }));
            writeln!(out, "  band{bi} [label=\"{} | {}\"];", esc(name), fields.join(" | ")).expect("write");
            if bi > 0 {
                writeln!(out, "  band{} -> band{bi};", bi - 1).expect("write");
            }
        }
        if let Some(h) = &self.hub {
            writeln!(out, "  hub [shape=circle, label=\"{}\"];", esc(format!("hub: {}", p.alphabet.format_word(&h.bottom)))).expect("write");
            if !self.bands.is_empty() {
                writeln!(out, "  band{} -> hub;", self.bands.len() - 1).expect("write");
            }
        }
        out.push_str("}\n");
        out
    }
}
