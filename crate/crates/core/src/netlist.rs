//! Staged netlists of placed elements and their JSON document form.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::elements::{Direction, Element, Kind};
use crate::error::{Error, Result};
use crate::modespace::{Mode, Pol};

/// Netlist document format version.
pub const FORMAT_VERSION: &str = "1.0.0";

/// An element instance with a physical id and a traversal direction.
///
/// Two placements sharing an id are the same physical element traversed
/// twice, as in the polarization fold-back schemes.
#[derive(Clone, Debug, PartialEq)]
pub struct Placed {
    pub id: u32,
    pub element: Element,
    pub direction: Direction,
}

impl Placed {
    pub fn describe(&self) -> String {
        let dir = match self.direction {
            Direction::Forward => "",
            Direction::Backward => ", backward",
        };
        format!("element #{} ({}{dir})", self.id, self.element)
    }

    pub fn reversed(&self) -> Placed {
        Placed {
            direction: self.direction.reversed(),
            ..self.clone()
        }
    }
}

/// Elements acting in parallel on disjoint paths.
#[derive(Clone, Debug, PartialEq)]
pub struct Stage {
    pub block: String,
    pub elements: Vec<Placed>,
}

impl Stage {
    pub fn new(block: impl Into<String>, elements: Vec<Placed>) -> Stage {
        Stage {
            block: block.into(),
            elements,
        }
    }

    /// Map from path to the index of the element touching it.
    pub fn port_lookup(&self) -> HashMap<u32, usize> {
        let mut map = HashMap::new();
        for (i, p) in self.elements.iter().enumerate() {
            for port in p.element.ports() {
                map.insert(port, i);
            }
        }
        map
    }

    pub fn paths(&self) -> BTreeSet<u32> {
        self.elements
            .iter()
            .flat_map(|p| p.element.ports())
            .collect()
    }

    fn check(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for p in &self.elements {
            p.element.validate()?;
            for port in p.element.ports() {
                if !seen.insert(port) {
                    return Err(Error::Netlist(format!(
                        "path {port} is touched twice in one stage of block {}",
                        self.block
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Allocates physical element ids.
#[derive(Clone, Debug, Default)]
pub struct IdGen {
    next: u32,
}

impl IdGen {
    pub fn new() -> Self {
        IdGen::default()
    }

    pub fn place(&mut self, element: Element) -> Placed {
        let id = self.next;
        self.next += 1;
        Placed {
            id,
            element,
            direction: Direction::Forward,
        }
    }
}

/// Ordered list of stages.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Netlist {
    stages: Vec<Stage>,
}

impl Netlist {
    pub fn new() -> Self {
        Netlist::default()
    }

    pub fn from_stages(stages: Vec<Stage>) -> Result<Netlist> {
        let mut n = Netlist::new();
        for s in stages {
            n.push_stage(s)?;
        }
        Ok(n)
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn push_stage(&mut self, stage: Stage) -> Result<()> {
        stage.check()?;
        if !stage.elements.is_empty() {
            self.stages.push(stage);
        }
        Ok(())
    }

    /// Single-element stage.
    pub fn push(&mut self, block: &str, placed: Placed) -> Result<()> {
        self.push_stage(Stage::new(block, vec![placed]))
    }

    pub fn append(&mut self, other: Netlist) {
        self.stages.extend(other.stages);
    }

    /// Runs `self` and `other` side by side, stage by stage. Their paths must
    /// be disjoint.
    pub fn parallel(self, other: Netlist) -> Result<Netlist> {
        let n = self.stages.len().max(other.stages.len());
        let mut a = self.stages.into_iter();
        let mut b = other.stages.into_iter();
        let mut out = Netlist::new();
        for _ in 0..n {
            let stage = match (a.next(), b.next()) {
                (Some(mut x), Some(y)) => {
                    x.elements.extend(y.elements);
                    x
                }
                (Some(x), None) | (None, Some(x)) => x,
                (None, None) => unreachable!(),
            };
            out.push_stage(stage)?;
        }
        Ok(out)
    }

    /// The inverse circuit: stages in reverse order, every direction flipped,
    /// physical ids kept.
    pub fn reversed(&self) -> Netlist {
        Netlist {
            stages: self
                .stages
                .iter()
                .rev()
                .map(|s| Stage {
                    block: s.block.clone(),
                    elements: s.elements.iter().map(Placed::reversed).collect(),
                })
                .collect(),
        }
    }

    /// Relabels every stage's block name.
    pub fn labeled(mut self, block: &str) -> Netlist {
        for s in &mut self.stages {
            s.block = block.to_string();
        }
        self
    }

    pub fn placements(&self) -> impl Iterator<Item = &Placed> {
        self.stages.iter().flat_map(|s| s.elements.iter())
    }

    /// One placement per physical id.
    pub fn physical(&self) -> BTreeMap<u32, &Element> {
        let mut map = BTreeMap::new();
        for p in self.placements() {
            map.entry(p.id).or_insert(&p.element);
        }
        map
    }

    /// Checks stage disjointness, element invariants and id consistency.
    pub fn well_formed(&self) -> Result<()> {
        let mut by_id: HashMap<u32, &Element> = HashMap::new();
        for s in &self.stages {
            s.check()?;
            for p in &s.elements {
                if let Some(prev) = by_id.insert(p.id, &p.element) {
                    if prev != &p.element {
                        return Err(Error::Netlist(format!(
                            "id {} names two different elements",
                            p.id
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Element counts per kind over distinct physical ids.
    pub fn counts(&self) -> BTreeMap<Kind, u64> {
        let mut map = BTreeMap::new();
        for e in self.physical().values() {
            *map.entry(e.kind()).or_insert(0) += 1;
        }
        map
    }

    /// Beam splitters over distinct ids, with behavioral blocks contributing
    /// the count of their implementation.
    pub fn beam_splitter_count(&self) -> u64 {
        self.physical()
            .values()
            .map(|e| e.beam_splitter_count())
            .sum()
    }

    pub fn pbs_count(&self) -> u64 {
        self.counts().get(&Kind::Pbs).copied().unwrap_or(0)
    }

    /// Largest path index plus one.
    pub fn path_count(&self) -> u32 {
        self.placements()
            .flat_map(|p| p.element.ports())
            .map(|p| p + 1)
            .max()
            .unwrap_or(0)
    }

    /// Number of stages.
    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    /// Stages that contain at least one beam splitter or behavioral block.
    pub fn splitter_depth(&self) -> usize {
        self.stages
            .iter()
            .filter(|s| s.elements.iter().any(|p| p.element.beam_splitter_count() > 0))
            .count()
    }

    /// Merges runs of stages that hold only path permutations and drops the
    /// ones that compose to the identity.
    pub fn peephole(&self) -> Netlist {
        let mut out: Vec<Stage> = Vec::new();
        for s in &self.stages {
            let perm = permutation_only(s);
            if let (Some(map), Some(prev)) = (perm.as_ref(), out.last_mut()) {
                if let Some(prev_map) = permutation_only(prev) {
                    let mut composed: BTreeMap<u32, u32> = BTreeMap::new();
                    let keys: BTreeSet<u32> = prev_map.keys().chain(map.keys()).copied().collect();
                    for k in keys {
                        let mid = prev_map.get(&k).copied().unwrap_or(k);
                        let end = map.get(&mid).copied().unwrap_or(mid);
                        if end != k {
                            composed.insert(k, end);
                        }
                    }
                    let id = prev.elements[0].id;
                    if composed.is_empty() {
                        out.pop();
                    } else {
                        *prev = Stage::new(
                            prev.block.clone(),
                            vec![Placed {
                                id,
                                element: Element::PathPermutation {
                                    from: composed.keys().copied().collect(),
                                    to: composed.values().copied().collect(),
                                },
                                direction: Direction::Forward,
                            }],
                        );
                    }
                    continue;
                }
            }
            out.push(s.clone());
        }
        Netlist { stages: out }
    }
}

fn permutation_only(s: &Stage) -> Option<BTreeMap<u32, u32>> {
    let mut map = BTreeMap::new();
    for p in &s.elements {
        match &p.element {
            Element::PathPermutation { from, to } => {
                let (src, dst) = match p.direction {
                    Direction::Forward => (from, to),
                    Direction::Backward => (to, from),
                };
                for (a, b) in src.iter().zip(dst) {
                    map.insert(*a, *b);
                }
            }
            _ => return None,
        }
    }
    Some(map)
}

/// Serialized mode declaration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeDoc {
    pub oam: i64,
    pub path: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pol: Option<Pol>,
}

impl From<Mode> for ModeDoc {
    fn from(m: Mode) -> Self {
        ModeDoc {
            oam: m.oam,
            path: m.path,
            pol: m.pol,
        }
    }
}

impl From<&ModeDoc> for Mode {
    fn from(m: &ModeDoc) -> Self {
        Mode {
            oam: m.oam,
            path: m.path,
            pol: m.pol,
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementDoc {
    pub id: u32,
    pub kind: String,
    pub params: BTreeMap<String, f64>,
    pub in_ports: Vec<u32>,
    pub out_ports: Vec<u32>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub behavioral: bool,
    pub direction: Direction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageDoc {
    pub block: String,
    pub elements: Vec<ElementDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub counts: BTreeMap<String, u64>,
    pub inputs: Vec<ModeDoc>,
    pub outputs: Vec<ModeDoc>,
}

/// Netlist file contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetlistDocument {
    pub version: String,
    pub dim: u64,
    pub variant: String,
    #[serde(rename = "d_A")]
    pub d_a: u64,
    #[serde(rename = "d_B")]
    pub d_b: u64,
    pub stages: Vec<StageDoc>,
    pub metadata: Metadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stamp: Option<String>,
}

impl ElementDoc {
    pub fn from_placed(p: &Placed) -> ElementDoc {
        let kind = p.element.kind();
        ElementDoc {
            id: p.id,
            kind: kind.tag().to_string(),
            params: p
                .element
                .params()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            in_ports: p.element.in_ports(),
            out_ports: p.element.out_ports(),
            behavioral: kind.is_behavioral(),
            direction: p.direction,
        }
    }

    pub fn to_placed(&self) -> Result<Placed> {
        let kind = Kind::from_tag(&self.kind)
            .ok_or_else(|| Error::Netlist(format!("unknown element kind {:?}", self.kind)))?;
        if self.behavioral != kind.is_behavioral() {
            return Err(Error::Netlist(format!(
                "element {} has the wrong behavioral flag",
                self.id
            )));
        }
        let param = |name: &str| {
            self.params.get(name).copied().ok_or_else(|| {
                Error::Netlist(format!("element {} is missing parameter {name}", self.id))
            })
        };
        let element = Element::from_parts(kind, param, &self.in_ports, &self.out_ports)?;
        let expected: BTreeSet<&str> = element.params().iter().map(|(k, _)| *k).collect();
        if let Some(extra) = self.params.keys().find(|k| !expected.contains(k.as_str())) {
            return Err(Error::Netlist(format!(
                "element {} has unexpected parameter {extra}",
                self.id
            )));
        }
        Ok(Placed {
            id: self.id,
            element,
            direction: self.direction,
        })
    }
}

impl NetlistDocument {
    pub fn stages_from(netlist: &Netlist) -> Vec<StageDoc> {
        netlist
            .stages()
            .iter()
            .map(|s| StageDoc {
                block: s.block.clone(),
                elements: s.elements.iter().map(ElementDoc::from_placed).collect(),
            })
            .collect()
    }

    pub fn netlist(&self) -> Result<Netlist> {
        let mut n = Netlist::new();
        for s in &self.stages {
            let elements = s
                .elements
                .iter()
                .map(ElementDoc::to_placed)
                .collect::<Result<Vec<_>>>()?;
            n.push_stage(Stage::new(s.block.clone(), elements))?;
        }
        n.well_formed()?;
        Ok(n)
    }

    pub fn inputs(&self) -> Vec<Mode> {
        self.metadata.inputs.iter().map(Mode::from).collect()
    }

    pub fn outputs(&self) -> Vec<Mode> {
        self.metadata.outputs.iter().map(Mode::from).collect()
    }

    /// Canonical text: pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<NetlistDocument> {
        let doc: NetlistDocument = serde_json::from_str(text)?;
        if doc.version.split('.').next() != FORMAT_VERSION.split('.').next() {
            return Err(Error::Netlist(format!(
                "unsupported format version {}",
                doc.version
            )));
        }
        if doc.metadata.inputs.is_empty() {
            return Err(Error::Netlist("document declares no input modes".into()));
        }
        Ok(doc)
    }
}
