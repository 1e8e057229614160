//! String diagrams in free compact closed normal form.
//!
//! A diagram is an anchored port graph:
//!
//! ```text
//!   in0   in1        ordered input ports (domain word)
//!    |     |
//!   [f]    |         generator occurrences (the only nodes)
//!    |     |
//!   out0  out1       ordered output ports (codomain word)
//! ```
//!
//! plus a perfect matching of all ports by labeled wires and a multiset of
//! free loops. Identities, symmetries, units and counits contribute wires
//! only, so equality in the free category is isomorphism of these graphs
//! (boundary kept pointwise) with equal loop multisets.
//!
//! Every wire end has a polarity derived from (port side, factor dual flag);
//! each wire carries exactly one head and one tail. Closed components whose
//! nodes all have total arity 2 are folded into cyclic loop labels; other
//! closed components stay in the graph and are canonicalized separately.

mod canon;
mod dot;
mod rewrite;

pub use canon::{canonical_key, term_key, CanonicalKey};
pub use dot::render_dot;
pub use rewrite::{apply_equation, enumerate_matches, Equation, Match};

use crate::signature::{Factor, ObjectExpr};
use crate::term::{Term, TypedTerm};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Errors from diagram-level operations.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DiagramError {
    #[error("type mismatch: `{left_dom} -> {left_cod}` vs `{right_dom} -> {right_cod}`")]
    TypeMismatch {
        left_dom: ObjectExpr,
        left_cod: ObjectExpr,
        right_dom: ObjectExpr,
        right_cod: ObjectExpr,
    },
    #[error("no such match: {0}")]
    NoSuchMatch(String),
}

/// A generator occurrence. `dom`/`cod` are the effective words after any
/// dagger flip; `dagger` marks the flip on the occurrence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagNode {
    pub gen: String,
    pub dagger: bool,
    pub dom: ObjectExpr,
    pub cod: ObjectExpr,
}

impl DiagNode {
    pub fn arity(&self) -> usize {
        self.dom.len() + self.cod.len()
    }
}

/// One endpoint of a wire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PortRef {
    /// Diagram input (domain position).
    In(usize),
    /// Diagram output (codomain position).
    Out(usize),
    /// Domain port `j` of node `n`.
    NodeIn(usize, usize),
    /// Codomain port `j` of node `n`.
    NodeOut(usize, usize),
}

impl PortRef {
    fn shift_node(self, by: usize) -> PortRef {
        match self {
            PortRef::NodeIn(n, j) => PortRef::NodeIn(n + by, j),
            PortRef::NodeOut(n, j) => PortRef::NodeOut(n + by, j),
            other => other,
        }
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, PortRef::In(_) | PortRef::Out(_))
    }

    pub fn node_index(self) -> Option<usize> {
        match self {
            PortRef::NodeIn(n, _) | PortRef::NodeOut(n, _) => Some(n),
            _ => None,
        }
    }
}

/// An undirected wire between two ports; `base` is the base-object label.
/// Ends are stored in sorted order so wire equality is end-order free.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wire {
    pub a: PortRef,
    pub b: PortRef,
    pub base: String,
}

impl Wire {
    pub fn new(x: PortRef, y: PortRef, base: String) -> Wire {
        if x <= y {
            Wire { a: x, b: y, base }
        } else {
            Wire { a: y, b: x, base }
        }
    }

    pub fn other_end(&self, p: PortRef) -> PortRef {
        if self.a == p {
            self.b
        } else {
            debug_assert_eq!(self.b, p);
            self.a
        }
    }

    pub fn touches(&self, p: PortRef) -> bool {
        self.a == p || self.b == p
    }
}

/// Port key inside a cycle pass: (is domain port, index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PortKey {
    pub input: bool,
    pub index: usize,
}

impl PortKey {
    fn flipped(self) -> PortKey {
        PortKey { input: !self.input, index: self.index }
    }
}

/// One node pass inside a closed cycle: traversal enters at `enter` and
/// leaves at `exit` (the node's only other port).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CyclePass {
    pub gen: String,
    pub dagger: bool,
    pub enter: PortKey,
    pub exit: PortKey,
}

/// Label of a closed loop: either a free (node-less) circle tagged with its
/// base object, or a cyclic word of node passes stored in the
/// lexicographically minimal rotation over both traversal orientations.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LoopLabel {
    Free(String),
    Cycle(Vec<CyclePass>),
}

impl LoopLabel {
    /// Canonical form of a cycle: minimum over all rotations of the forward
    /// word and all rotations of the reversed word with flipped passes.
    pub fn cycle(passes: Vec<CyclePass>) -> LoopLabel {
        assert!(!passes.is_empty());
        let mut best: Option<Vec<CyclePass>> = None;
        let mut consider = |candidate: Vec<CyclePass>| {
            if best.as_ref().map_or(true, |b| candidate < *b) {
                best = Some(candidate);
            }
        };
        let n = passes.len();
        for r in 0..n {
            let rotated: Vec<CyclePass> =
                (0..n).map(|i| passes[(r + i) % n].clone()).collect();
            consider(rotated);
        }
        let reversed: Vec<CyclePass> = passes
            .iter()
            .rev()
            .map(|p| CyclePass {
                gen: p.gen.clone(),
                dagger: p.dagger,
                enter: p.exit,
                exit: p.enter,
            })
            .collect();
        for r in 0..n {
            let rotated: Vec<CyclePass> =
                (0..n).map(|i| reversed[(r + i) % n].clone()).collect();
            consider(rotated);
        }
        LoopLabel::Cycle(best.unwrap())
    }
}

impl fmt::Display for LoopLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoopLabel::Free(base) => write!(f, "loop {base}"),
            LoopLabel::Cycle(passes) => {
                write!(f, "loop [")?;
                for (i, p) in passes.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}{}", p.gen, if p.dagger { "+" } else { "" })?;
                }
                write!(f, "]")
            }
        }
    }
}

/// A string diagram in normal form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagram {
    pub dom: ObjectExpr,
    pub cod: ObjectExpr,
    pub nodes: Vec<DiagNode>,
    pub wires: Vec<Wire>,
    pub loops: BTreeMap<LoopLabel, usize>,
}

/// Wire end during assembly: either a resolved port or a junction to fuse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum End {
    P(PortRef),
    J(usize),
}

/// Fuses junctions pairwise. Every junction id must occur in exactly two
/// wire ends; a wire whose both ends land on the same junction (after
/// merging) closes into a free loop.
fn resolve_junctions(
    mut wires: Vec<(End, End, String)>,
    junction_count: usize,
) -> (Vec<Wire>, Vec<String>) {
    let mut free_loops = Vec::new();
    for j in 0..junction_count {
        let incident: Vec<usize> = wires
            .iter()
            .enumerate()
            .filter(|(_, w)| w.0 == End::J(j) || w.1 == End::J(j))
            .map(|(i, _)| i)
            .collect();
        match incident.as_slice() {
            [single] => {
                // Both ends are this junction: the wire closes up.
                let w = wires.swap_remove(*single);
                debug_assert!(w.0 == End::J(j) && w.1 == End::J(j));
                free_loops.push(w.2);
            }
            [first, second] => {
                let (hi, lo) = if first > second { (*first, *second) } else { (*second, *first) };
                let w1 = wires.swap_remove(hi);
                let w2 = wires.swap_remove(lo);
                let e1 = if w1.0 == End::J(j) { w1.1 } else { w1.0 };
                let e2 = if w2.0 == End::J(j) { w2.1 } else { w2.0 };
                debug_assert_eq!(w1.2, w2.2, "junction joins wires with different labels");
                wires.push((e1, e2, w1.2));
            }
            other => panic!("junction {j} has {} incident ends", other.len()),
        }
    }
    let resolved = wires
        .into_iter()
        .map(|(x, y, base)| match (x, y) {
            (End::P(a), End::P(b)) => Wire::new(a, b, base),
            _ => panic!("unresolved junction end"),
        })
        .collect();
    (resolved, free_loops)
}

impl Diagram {
    pub fn empty() -> Diagram {
        Diagram {
            dom: ObjectExpr::unit(),
            cod: ObjectExpr::unit(),
            nodes: Vec::new(),
            wires: Vec::new(),
            loops: BTreeMap::new(),
        }
    }

    pub fn identity(word: &ObjectExpr) -> Diagram {
        let wires = word
            .factors
            .iter()
            .enumerate()
            .map(|(k, f)| Wire::new(PortRef::In(k), PortRef::Out(k), f.base.clone()))
            .collect();
        Diagram {
            dom: word.clone(),
            cod: word.clone(),
            nodes: Vec::new(),
            wires,
            loops: BTreeMap::new(),
        }
    }

    pub fn symmetry(a: &ObjectExpr, b: &ObjectExpr) -> Diagram {
        let mut wires = Vec::new();
        for (k, f) in a.factors.iter().enumerate() {
            wires.push(Wire::new(PortRef::In(k), PortRef::Out(b.len() + k), f.base.clone()));
        }
        for (k, f) in b.factors.iter().enumerate() {
            wires.push(Wire::new(PortRef::In(a.len() + k), PortRef::Out(k), f.base.clone()));
        }
        Diagram {
            dom: a.tensor(b),
            cod: b.tensor(a),
            nodes: Vec::new(),
            wires,
            loops: BTreeMap::new(),
        }
    }

    /// Unit on a word: factor `i` of the dual block pairs with factor `i`
    /// of the word block.
    pub fn unit(word: &ObjectExpr) -> Diagram {
        let n = word.len();
        let wires = word
            .factors
            .iter()
            .enumerate()
            .map(|(k, f)| Wire::new(PortRef::Out(k), PortRef::Out(n + k), f.base.clone()))
            .collect();
        Diagram {
            dom: ObjectExpr::unit(),
            cod: word.dual().tensor(word),
            nodes: Vec::new(),
            wires,
            loops: BTreeMap::new(),
        }
    }

    pub fn counit(word: &ObjectExpr) -> Diagram {
        let n = word.len();
        let wires = word
            .factors
            .iter()
            .enumerate()
            .map(|(k, f)| Wire::new(PortRef::In(k), PortRef::In(n + k), f.base.clone()))
            .collect();
        Diagram {
            dom: word.tensor(&word.dual()),
            cod: ObjectExpr::unit(),
            nodes: Vec::new(),
            wires,
            loops: BTreeMap::new(),
        }
    }

    pub fn generator(gen: &str, dom: &ObjectExpr, cod: &ObjectExpr, dagger: bool) -> Diagram {
        let (eff_dom, eff_cod) = if dagger { (cod, dom) } else { (dom, cod) };
        let node = DiagNode {
            gen: gen.to_string(),
            dagger,
            dom: eff_dom.clone(),
            cod: eff_cod.clone(),
        };
        let mut wires = Vec::new();
        for (k, f) in eff_dom.factors.iter().enumerate() {
            wires.push(Wire::new(PortRef::In(k), PortRef::NodeIn(0, k), f.base.clone()));
        }
        for (k, f) in eff_cod.factors.iter().enumerate() {
            wires.push(Wire::new(PortRef::NodeOut(0, k), PortRef::Out(k), f.base.clone()));
        }
        Diagram {
            dom: eff_dom.clone(),
            cod: eff_cod.clone(),
            nodes: vec![node],
            wires,
            loops: BTreeMap::new(),
        }
    }

    /// Horizontal composition (tensor): `self` on the left.
    pub fn tensor(&self, right: &Diagram) -> Diagram {
        let node_shift = self.nodes.len();
        let in_shift = self.dom.len();
        let out_shift = self.cod.len();
        let mut nodes = self.nodes.clone();
        nodes.extend(right.nodes.iter().cloned());
        let mut wires = self.wires.clone();
        for w in &right.wires {
            let map = |p: PortRef| match p {
                PortRef::In(k) => PortRef::In(k + in_shift),
                PortRef::Out(k) => PortRef::Out(k + out_shift),
                other => other.shift_node(node_shift),
            };
            wires.push(Wire::new(map(w.a), map(w.b), w.base.clone()));
        }
        let mut loops = self.loops.clone();
        for (label, count) in &right.loops {
            *loops.entry(label.clone()).or_insert(0) += count;
        }
        Diagram {
            dom: self.dom.tensor(&right.dom),
            cod: self.cod.tensor(&right.cod),
            nodes,
            wires,
            loops,
        }
    }

    /// Vertical composition in diagrammatic order: `self` first, then
    /// `second`. Requires `self.cod == second.dom`.
    pub fn then(&self, second: &Diagram) -> Diagram {
        assert_eq!(self.cod, second.dom, "diagram composition type mismatch");
        let node_shift = self.nodes.len();
        let junctions = self.cod.len();
        let mut assembly: Vec<(End, End, String)> = Vec::new();
        for w in &self.wires {
            let map = |p: PortRef| match p {
                PortRef::Out(k) => End::J(k),
                other => End::P(other),
            };
            assembly.push((map(w.a), map(w.b), w.base.clone()));
        }
        for w in &second.wires {
            let map = |p: PortRef| match p {
                PortRef::In(k) => End::J(k),
                PortRef::Out(k) => End::P(PortRef::Out(k)),
                other => End::P(other.shift_node(node_shift)),
            };
            assembly.push((map(w.a), map(w.b), w.base.clone()));
        }
        let (wires, free_loops) = resolve_junctions(assembly, junctions);
        let mut nodes = self.nodes.clone();
        nodes.extend(second.nodes.iter().cloned());
        let mut loops = self.loops.clone();
        for (label, count) in &second.loops {
            *loops.entry(label.clone()).or_insert(0) += count;
        }
        for base in free_loops {
            *loops.entry(LoopLabel::Free(base)).or_insert(0) += 1;
        }
        let mut out = Diagram {
            dom: self.dom.clone(),
            cod: second.cod.clone(),
            nodes,
            wires,
            loops,
        };
        out.normalize_closed();
        out
    }

    /// Vertical flip: inputs become outputs, nodes toggle their dagger mark.
    pub fn flipped(&self) -> Diagram {
        let nodes: Vec<DiagNode> = self
            .nodes
            .iter()
            .map(|n| DiagNode {
                gen: n.gen.clone(),
                dagger: !n.dagger,
                dom: n.cod.clone(),
                cod: n.dom.clone(),
            })
            .collect();
        let map = |p: PortRef| match p {
            PortRef::In(k) => PortRef::Out(k),
            PortRef::Out(k) => PortRef::In(k),
            PortRef::NodeIn(n, j) => PortRef::NodeOut(n, j),
            PortRef::NodeOut(n, j) => PortRef::NodeIn(n, j),
        };
        let wires = self
            .wires
            .iter()
            .map(|w| Wire::new(map(w.a), map(w.b), w.base.clone()))
            .collect();
        let mut loops: BTreeMap<LoopLabel, usize> = BTreeMap::new();
        for (label, count) in &self.loops {
            let flipped = match label {
                LoopLabel::Free(base) => LoopLabel::Free(base.clone()),
                LoopLabel::Cycle(passes) => LoopLabel::cycle(
                    passes
                        .iter()
                        .map(|p| CyclePass {
                            gen: p.gen.clone(),
                            dagger: !p.dagger,
                            enter: p.enter.flipped(),
                            exit: p.exit.flipped(),
                        })
                        .collect(),
                ),
            };
            *loops.entry(flipped).or_insert(0) += count;
        }
        Diagram { dom: self.cod.clone(), cod: self.dom.clone(), nodes, wires, loops }
    }

    /// Looks up the unique wire at a port. Panics if the matching invariant
    /// is broken.
    pub fn wire_at(&self, p: PortRef) -> &Wire {
        self.wires
            .iter()
            .find(|w| w.touches(p))
            .unwrap_or_else(|| panic!("port {p:?} is not wired"))
    }

    /// The factor behind a port.
    pub fn port_factor(&self, p: PortRef) -> &Factor {
        match p {
            PortRef::In(k) => &self.dom.factors[k],
            PortRef::Out(k) => &self.cod.factors[k],
            PortRef::NodeIn(n, j) => &self.nodes[n].dom.factors[j],
            PortRef::NodeOut(n, j) => &self.nodes[n].cod.factors[j],
        }
    }

    /// A wire end is a tail when the base-object arrow leaves it.
    pub fn end_is_tail(&self, p: PortRef) -> bool {
        let dual = self.port_factor(p).dual;
        match p {
            PortRef::In(_) => !dual,
            PortRef::Out(_) => dual,
            PortRef::NodeIn(_, _) => dual,
            PortRef::NodeOut(_, _) => !dual,
        }
    }

    /// Folds closed all-arity-2 components into cycle loop labels.
    pub(crate) fn normalize_closed(&mut self) {
        if self.nodes.is_empty() {
            return;
        }
        // Component labeling over nodes; boundary-touching wires anchor them.
        let n = self.nodes.len();
        let mut comp: Vec<usize> = (0..n).collect();
        fn find(comp: &mut Vec<usize>, mut x: usize) -> usize {
            while comp[x] != x {
                comp[x] = comp[comp[x]];
                x = comp[x];
            }
            x
        }
        let mut anchored = vec![false; n];
        for w in &self.wires {
            match (w.a.node_index(), w.b.node_index()) {
                (Some(x), Some(y)) => {
                    let (rx, ry) = (find(&mut comp, x), find(&mut comp, y));
                    if rx != ry {
                        comp[rx] = ry;
                    }
                }
                (Some(x), None) => anchored[x] = true,
                (None, Some(y)) => anchored[y] = true,
                (None, None) => {}
            }
        }
        let mut root_anchored = vec![false; n];
        for x in 0..n {
            if anchored[x] {
                let r = find(&mut comp, x);
                root_anchored[r] = true;
            }
        }
        let mut closed_deg2 = vec![false; n];
        let mut comp_ok: BTreeMap<usize, bool> = BTreeMap::new();
        for x in 0..n {
            let r = find(&mut comp, x);
            let entry = comp_ok.entry(r).or_insert(true);
            if root_anchored[r] || self.nodes[x].arity() != 2 {
                *entry = false;
            }
        }
        for x in 0..n {
            let r = find(&mut comp, x);
            closed_deg2[x] = comp_ok[&r];
        }
        if !closed_deg2.iter().any(|&b| b) {
            return;
        }

        // Trace each such component as a single cycle.
        let mut visited = vec![false; n];
        let mut new_labels: Vec<LoopLabel> = Vec::new();
        for start in 0..n {
            if !closed_deg2[start] || visited[start] {
                continue;
            }
            let ports_of = |node: usize| -> Vec<PortKey> {
                let d = &self.nodes[node];
                (0..d.dom.len())
                    .map(|j| PortKey { input: true, index: j })
                    .chain((0..d.cod.len()).map(|j| PortKey { input: false, index: j }))
                    .collect()
            };
            let as_ref = |node: usize, key: PortKey| -> PortRef {
                if key.input {
                    PortRef::NodeIn(node, key.index)
                } else {
                    PortRef::NodeOut(node, key.index)
                }
            };
            let mut passes = Vec::new();
            let mut node = start;
            let mut entry = ports_of(start)[0];
            loop {
                visited[node] = true;
                let ports = ports_of(node);
                let exit = if ports[0] == entry { ports[1] } else { ports[0] };
                passes.push(CyclePass {
                    gen: self.nodes[node].gen.clone(),
                    dagger: self.nodes[node].dagger,
                    enter: entry,
                    exit,
                });
                let wire = self.wire_at(as_ref(node, exit));
                let next_port = wire.other_end(as_ref(node, exit));
                let (next_node, next_key) = match next_port {
                    PortRef::NodeIn(m, j) => (m, PortKey { input: true, index: j }),
                    PortRef::NodeOut(m, j) => (m, PortKey { input: false, index: j }),
                    other => panic!("closed component reaches boundary port {other:?}"),
                };
                if next_node == start && next_key == ports_of(start)[0] {
                    break;
                }
                node = next_node;
                entry = next_key;
            }
            new_labels.push(LoopLabel::cycle(passes));
        }

        // Drop the folded nodes and their wires; reindex the survivors.
        let mut remap = vec![usize::MAX; n];
        let mut kept_nodes = Vec::new();
        for (i, nd) in self.nodes.iter().enumerate() {
            if !closed_deg2[i] {
                remap[i] = kept_nodes.len();
                kept_nodes.push(nd.clone());
            }
        }
        let mut kept_wires = Vec::new();
        for w in &self.wires {
            let dropped = |p: PortRef| p.node_index().map_or(false, |i| closed_deg2[i]);
            if dropped(w.a) || dropped(w.b) {
                debug_assert!(dropped(w.a) && dropped(w.b));
                continue;
            }
            let map = |p: PortRef| match p {
                PortRef::NodeIn(i, j) => PortRef::NodeIn(remap[i], j),
                PortRef::NodeOut(i, j) => PortRef::NodeOut(remap[i], j),
                other => other,
            };
            kept_wires.push(Wire::new(map(w.a), map(w.b), w.base.clone()));
        }
        self.nodes = kept_nodes;
        self.wires = kept_wires;
        for label in new_labels {
            *self.loops.entry(label).or_insert(0) += 1;
        }
    }

    /// Total number of loops.
    pub fn loop_count(&self) -> usize {
        self.loops.values().sum()
    }

    /// Checks the port perfect-matching and orientation invariants.
    /// Used by tests and debug assertions.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen: BTreeMap<PortRef, usize> = BTreeMap::new();
        for w in &self.wires {
            if w.a == w.b {
                return Err(format!("degenerate wire at {:?}", w.a));
            }
            *seen.entry(w.a).or_insert(0) += 1;
            *seen.entry(w.b).or_insert(0) += 1;
        }
        let mut expect = Vec::new();
        for k in 0..self.dom.len() {
            expect.push(PortRef::In(k));
        }
        for k in 0..self.cod.len() {
            expect.push(PortRef::Out(k));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            for j in 0..node.dom.len() {
                expect.push(PortRef::NodeIn(i, j));
            }
            for j in 0..node.cod.len() {
                expect.push(PortRef::NodeOut(i, j));
            }
        }
        if seen.len() != expect.len() {
            return Err(format!("{} wired ports, expected {}", seen.len(), expect.len()));
        }
        for p in expect {
            match seen.get(&p) {
                Some(1) => {}
                Some(k) => return Err(format!("port {p:?} wired {k} times")),
                None => return Err(format!("port {p:?} not wired")),
            }
        }
        for w in &self.wires {
            if self.port_factor(w.a).base != w.base || self.port_factor(w.b).base != w.base {
                return Err(format!("wire label mismatch on {:?}", w));
            }
            if self.end_is_tail(w.a) == self.end_is_tail(w.b) {
                return Err(format!("wire {:?} lacks a head/tail pair", w));
            }
        }
        Ok(())
    }
}

/// Translates a typed term into its diagram normal form.
pub fn to_diagram(t: &TypedTerm) -> Diagram {
    let sig = t.signature();
    let d = translate(t.term(), sig);
    debug_assert_eq!(&d.dom, t.dom());
    debug_assert_eq!(&d.cod, t.cod());
    debug_assert_eq!(d.check_invariants(), Ok(()));
    d
}

fn translate(term: &Term, sig: &crate::signature::Signature) -> Diagram {
    match term {
        Term::Gen(name) => {
            let g = sig.generator(name).expect("typechecked term has known generators");
            Diagram::generator(&g.name, &g.dom, &g.cod, false)
        }
        Term::Id(w) => Diagram::identity(w),
        Term::Compose(after, before) => {
            translate(before, sig).then(&translate(after, sig))
        }
        Term::Tensor(left, right) => translate(left, sig).tensor(&translate(right, sig)),
        Term::Sym(a, b) => Diagram::symmetry(a, b),
        Term::Unit(w) => Diagram::unit(w),
        Term::Counit(w) => Diagram::counit(w),
        Term::Dagger(inner) => translate(inner, sig).flipped(),
    }
}

/// Decides equality in the free compact closed category over the common
/// signature by comparing canonical keys. The sides must be parallel.
pub fn equal_diagrams(a: &TypedTerm, b: &TypedTerm) -> Result<bool, DiagramError> {
    if a.dom() != b.dom() || a.cod() != b.cod() {
        return Err(DiagramError::TypeMismatch {
            left_dom: a.dom().clone(),
            left_cod: a.cod().clone(),
            right_dom: b.dom().clone(),
            right_cod: b.cod().clone(),
        });
    }
    Ok(canonical_key(&to_diagram(a)) == canonical_key(&to_diagram(b)))
}
