//! Graphviz rendering of diagram normal forms.

use super::{canon, Diagram, PortRef};
use std::fmt::Write;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders a diagram as a `dot` digraph. Inputs sit on the top rank as
/// `in<k>`, outputs on the bottom rank as `out<k>`, generator occurrences
/// are boxes named `n<k>` in deterministic traversal order, and closed
/// loops appear as free-standing ellipses. Edges carry their base-object
/// label; the output is byte-stable for a given diagram.
pub fn render_dot(d: &Diagram) -> String {
    // Name nodes by boundary-seeded traversal; nodes in closed components
    // keep their construction order after that.
    let (order, rank) = canon::bfs_order(d, &[], true);
    let mut names: Vec<Option<usize>> = rank;
    let mut next = order.len();
    for n in 0..d.nodes.len() {
        if names[n].is_none() {
            names[n] = Some(next);
            next += 1;
        }
    }
    let name_of = |p: PortRef| -> String {
        match p {
            PortRef::In(k) => format!("in{k}"),
            PortRef::Out(k) => format!("out{k}"),
            PortRef::NodeIn(n, _) | PortRef::NodeOut(n, _) => {
                format!("n{}", names[n].unwrap())
            }
        }
    };

    let mut s = String::new();
    s.push_str("digraph diagram {\n  rankdir=TB;\n");
    if !d.dom.is_empty() {
        s.push_str("  { rank=source;");
        for k in 0..d.dom.len() {
            let _ = write!(s, " in{k};");
        }
        s.push_str(" }\n");
    }
    if !d.cod.is_empty() {
        s.push_str("  { rank=sink;");
        for k in 0..d.cod.len() {
            let _ = write!(s, " out{k};");
        }
        s.push_str(" }\n");
    }
    for (k, f) in d.dom.factors.iter().enumerate() {
        let _ = writeln!(s, "  in{k} [shape=point, xlabel={}];", quote(&f.to_string()));
    }
    for (k, f) in d.cod.factors.iter().enumerate() {
        let _ = writeln!(s, "  out{k} [shape=point, xlabel={}];", quote(&f.to_string()));
    }
    // Node declarations in name order.
    let mut by_name: Vec<(usize, usize)> =
        (0..d.nodes.len()).map(|n| (names[n].unwrap(), n)).collect();
    by_name.sort();
    for (name, n) in &by_name {
        let node = &d.nodes[*n];
        let label = if node.dagger { format!("{}+", node.gen) } else { node.gen.clone() };
        let _ = writeln!(s, "  n{name} [shape=box, label={}];", quote(&label));
    }
    // Edges: prefer to draw downward (from inputs toward outputs).
    let mut edges: Vec<String> = Vec::new();
    for w in &d.wires {
        let downward = |p: PortRef, q: PortRef| -> bool {
            match (p, q) {
                (PortRef::In(_), _) => true,
                (_, PortRef::In(_)) => false,
                (_, PortRef::Out(_)) => true,
                (PortRef::Out(_), _) => false,
                (PortRef::NodeOut(_, _), PortRef::NodeIn(_, _)) => true,
                (PortRef::NodeIn(_, _), PortRef::NodeOut(_, _)) => false,
                _ => p <= q,
            }
        };
        let (x, y) = if downward(w.a, w.b) { (w.a, w.b) } else { (w.b, w.a) };
        edges.push(format!(
            "  {} -> {} [label={}];",
            name_of(x),
            name_of(y),
            quote(&w.base)
        ));
    }
    edges.sort();
    for e in edges {
        s.push_str(&e);
        s.push('\n');
    }
    // Loops as free-standing marks.
    let mut k = 0;
    for (label, count) in &d.loops {
        for _ in 0..*count {
            let _ = writeln!(s, "  loop{k} [shape=ellipse, label={}];", quote(&label.to_string()));
            k += 1;
        }
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::to_diagram;
    use crate::signature::{ObjectExpr, Signature};
    use crate::term::{typecheck, Term};
    use std::sync::Arc;

    #[test]
    fn renders_generator_with_ranked_boundary() {
        let mut s = Signature::new(true);
        s.add_base_object("A").unwrap();
        s.add_generator("f", ObjectExpr::base("A"), ObjectExpr::base("A")).unwrap();
        let sig = Arc::new(s);
        let f = typecheck(&Term::gen("f"), &sig).unwrap();
        let dot = render_dot(&to_diagram(&f));
        assert!(dot.contains("rankdir=TB"));
        assert!(dot.contains("{ rank=source; in0; }"));
        assert!(dot.contains("{ rank=sink; out0; }"));
        assert!(dot.contains("n0 [shape=box, label=\"f\"];"));
        assert!(dot.contains("in0 -> n0 [label=\"A\"];"));
        assert!(dot.contains("n0 -> out0 [label=\"A\"];"));
        // Byte-stable.
        assert_eq!(dot, render_dot(&to_diagram(&f)));
    }
}
