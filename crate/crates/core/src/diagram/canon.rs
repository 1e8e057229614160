//! Canonical keys for diagram normal forms.
//!
//! Two diagrams get the same key iff they are isomorphic as anchored port
//! graphs (boundary fixed pointwise) with equal loop multisets. Anchored
//! nodes are renamed by a deterministic traversal seeded from the boundary;
//! closed residual components have no anchor, so their serialization is
//! minimized over all start nodes.

use super::{Diagram, PortRef};
use std::collections::VecDeque;
use std::fmt::Write;

/// Opaque equality key; ASCII bytes, stable across runs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey(String);

impl CanonicalKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }
}

impl std::fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Boundary-seeded BFS over nodes. Returns discovery order and the rank of
/// each discovered node. `seed` lists extra start nodes (used for closed
/// components); boundary-adjacent nodes are discovered first in port order.
pub(super) fn bfs_order(
    d: &Diagram,
    seeds: &[usize],
    from_boundary: bool,
) -> (Vec<usize>, Vec<Option<usize>>) {
    let mut rank: Vec<Option<usize>> = vec![None; d.nodes.len()];
    let mut order: Vec<usize> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    let discover = |n: usize,
                        rank: &mut Vec<Option<usize>>,
                        order: &mut Vec<usize>,
                        queue: &mut VecDeque<usize>| {
        if rank[n].is_none() {
            rank[n] = Some(order.len());
            order.push(n);
            queue.push_back(n);
        }
    };
    if from_boundary {
        for p in boundary_ports(d) {
            if let Some(n) = d.wire_at(p).other_end(p).node_index() {
                discover(n, &mut rank, &mut order, &mut queue);
            }
        }
    }
    for &s in seeds {
        discover(s, &mut rank, &mut order, &mut queue);
    }
    while let Some(n) = queue.pop_front() {
        for p in node_ports(d, n) {
            if let Some(m) = d.wire_at(p).other_end(p).node_index() {
                discover(m, &mut rank, &mut order, &mut queue);
            }
        }
    }
    (order, rank)
}

fn boundary_ports(d: &Diagram) -> impl Iterator<Item = PortRef> + '_ {
    (0..d.dom.len())
        .map(PortRef::In)
        .chain((0..d.cod.len()).map(PortRef::Out))
}

fn node_ports(d: &Diagram, n: usize) -> impl Iterator<Item = PortRef> + '_ {
    let node = &d.nodes[n];
    (0..node.dom.len())
        .map(move |j| PortRef::NodeIn(n, j))
        .chain((0..node.cod.len()).map(move |j| PortRef::NodeOut(n, j)))
}

fn port_name(p: PortRef, rank: &[Option<usize>]) -> String {
    match p {
        PortRef::In(k) => format!("i{k}"),
        PortRef::Out(k) => format!("o{k}"),
        PortRef::NodeIn(n, j) => format!("n{}.i{j}", rank[n].expect("partner node discovered")),
        PortRef::NodeOut(n, j) => format!("n{}.o{j}", rank[n].expect("partner node discovered")),
    }
}

/// Serializes the nodes of `order` plus all wires among them and (for the
/// anchored part) the boundary adjacency.
fn serialize_part(d: &Diagram, order: &[usize], rank: &[Option<usize>], with_boundary: bool) -> String {
    let mut s = String::new();
    if with_boundary {
        s.push_str("bnd[");
        for (i, p) in boundary_ports(d).enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let q = d.wire_at(p).other_end(p);
            let _ = write!(s, "{}", port_name(q, rank));
        }
        s.push(']');
    }
    s.push_str("nodes[");
    for (i, &n) in order.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let node = &d.nodes[n];
        let _ = write!(
            s,
            "{:?}{}({:?};{:?}){{",
            node.gen,
            if node.dagger { "+" } else { "" },
            node.dom.to_string(),
            node.cod.to_string()
        );
        for (j, p) in node_ports(d, n).enumerate() {
            if j > 0 {
                s.push(' ');
            }
            let q = d.wire_at(p).other_end(p);
            let _ = write!(s, "{}", port_name(q, rank));
        }
        s.push('}');
    }
    s.push(']');
    s
}

/// Computes the canonical key of a diagram.
pub fn canonical_key(d: &Diagram) -> CanonicalKey {
    let mut s = String::new();
    let _ = write!(s, "dom={:?};cod={:?};", d.dom.to_string(), d.cod.to_string());

    // Anchored part: deterministic traversal from the boundary.
    let (order, rank) = bfs_order(d, &[], true);
    s.push_str(&serialize_part(d, &order, &rank, true));

    // Residual closed components: minimize the serialization per component.
    let mut remaining: Vec<usize> =
        (0..d.nodes.len()).filter(|&n| rank[n].is_none()).collect();
    let mut component_keys: Vec<String> = Vec::new();
    while let Some(&first) = remaining.first() {
        let (comp_order, comp_rank) = bfs_order(d, &[first], false);
        let members: Vec<usize> = comp_order
            .iter()
            .copied()
            .filter(|&n| rank[n].is_none())
            .collect();
        debug_assert!(comp_order.len() == members.len());
        let mut best: Option<String> = None;
        for &start in &members {
            let (o, r) = bfs_order(d, &[start], false);
            let candidate = serialize_part(d, &o, &r, false);
            if best.as_ref().map_or(true, |b| candidate < *b) {
                best = Some(candidate);
            }
        }
        component_keys.push(best.unwrap());
        remaining.retain(|n| !members.contains(n));
        let _ = comp_rank;
    }
    component_keys.sort();
    s.push_str(";closed[");
    for (i, k) in component_keys.iter().enumerate() {
        if i > 0 {
            s.push('|');
        }
        s.push_str(k);
    }
    s.push(']');

    // Loop multiset, sorted by label.
    s.push_str(";loops[");
    let mut first = true;
    for (label, count) in &d.loops {
        if !first {
            s.push(' ');
        }
        first = false;
        let _ = write!(s, "{count}x{label:?}");
    }
    s.push(']');
    CanonicalKey(s)
}

/// Convenience: key of a typed term's diagram.
pub fn term_key(t: &crate::term::TypedTerm) -> CanonicalKey {
    canonical_key(&super::to_diagram(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::to_diagram;
    use crate::signature::{ObjectExpr, Signature};
    use crate::term::{typecheck, Term};
    use std::sync::Arc;

    fn sig_ab() -> Arc<Signature> {
        let mut s = Signature::new(true);
        s.add_base_object("A").unwrap();
        s.add_base_object("B").unwrap();
        s.add_generator("f", ObjectExpr::base("A"), ObjectExpr::base("B")).unwrap();
        s.add_generator("g", ObjectExpr::base("B"), ObjectExpr::base("A")).unwrap();
        Arc::new(s)
    }

    #[test]
    fn key_is_stable_across_clones() {
        let sig = sig_ab();
        let t = typecheck(
            &Term::compose(Term::gen("g"), Term::gen("f")),
            &sig,
        )
        .unwrap();
        let k1 = canonical_key(&to_diagram(&t));
        let k2 = canonical_key(&to_diagram(&t));
        assert_eq!(k1, k2);
    }

    #[test]
    fn interchange_law_keys_agree() {
        let sig = sig_ab();
        let a = ObjectExpr::base("A");
        let b = ObjectExpr::base("B");
        // Both sliding orders of g (x) f : B (x) A -> A (x) B.
        let lhs = Term::compose(
            Term::tensor(Term::gen("g"), Term::Id(b.clone())),
            Term::tensor(Term::Id(b.clone()), Term::gen("f")),
        );
        let rhs = Term::compose(
            Term::tensor(Term::Id(a.clone()), Term::gen("f")),
            Term::tensor(Term::gen("g"), Term::Id(a.clone())),
        );
        let lt = typecheck(&lhs, &sig).unwrap();
        let rt = typecheck(&rhs, &sig).unwrap();
        assert_eq!(term_key(&lt), term_key(&rt));
        let plain = typecheck(&Term::tensor(Term::gen("g"), Term::gen("f")), &sig).unwrap();
        assert_eq!(term_key(&lt), term_key(&plain));
    }

    #[test]
    fn distinct_composites_get_distinct_keys() {
        let sig = sig_ab();
        let gf = typecheck(&Term::compose(Term::gen("g"), Term::gen("f")), &sig).unwrap();
        let ida = typecheck(&Term::Id(ObjectExpr::base("A")), &sig).unwrap();
        assert_ne!(term_key(&gf), term_key(&ida));
    }
}
