//! Subdiagram matching and rewriting on normal forms.
//!
//! Matching is taut: sliding along wires is free, so a pattern wire between
//! two pattern nodes must map onto an actual host wire, a pattern wire from
//! a node to the pattern boundary claims the corresponding end of the host
//! wire at the mapped port, and a boundary-to-boundary pattern wire (a
//! strand) occupies a whole host wire, with its two attachment points forced
//! by orientation: the strand's tail boundary port lands on the host wire's
//! tail end. At most one strand per host wire; a strand may share a host
//! wire with end claims. Pattern loops must be present in the host multiset.
//!
//! Rewriting removes the matched material, leaving one junction per pattern
//! boundary position, and glues in the replacement side. Junction fusion
//! and closed-component folding restore the normal form, so the result is
//! again a diagram over the same boundary.

use super::{resolve_junctions, to_diagram, Diagram, DiagramError, End, PortRef};
use crate::term::TypedTerm;
use std::collections::{BTreeMap, BTreeSet};

/// A named equation between parallel terms, oriented left to right.
#[derive(Clone, Debug)]
pub struct Equation {
    pub name: String,
    pub lhs: TypedTerm,
    pub rhs: TypedTerm,
}

impl Equation {
    /// Builds an equation; the two sides must be parallel (same dom, cod).
    pub fn new(
        name: impl Into<String>,
        lhs: TypedTerm,
        rhs: TypedTerm,
    ) -> Result<Equation, DiagramError> {
        if lhs.dom() != rhs.dom() || lhs.cod() != rhs.cod() {
            return Err(DiagramError::TypeMismatch {
                left_dom: lhs.dom().clone(),
                left_cod: lhs.cod().clone(),
                right_dom: rhs.dom().clone(),
                right_cod: rhs.cod().clone(),
            });
        }
        Ok(Equation { name: name.into(), lhs, rhs })
    }

    /// The same equation oriented right to left.
    pub fn reversed(&self) -> Equation {
        Equation {
            name: format!("{}^rev", self.name),
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
        }
    }

    pub fn lhs_diagram(&self) -> Diagram {
        to_diagram(&self.lhs)
    }

    pub fn rhs_diagram(&self) -> Diagram {
        to_diagram(&self.rhs)
    }
}

/// A match site: where each pattern node lands, and which host wire each
/// pattern strand (boundary-to-boundary wire, in pattern wire order)
/// occupies. All remaining data, including attachment orientations, is
/// forced and recomputed on application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Match {
    pub node_map: Vec<usize>,
    pub strand_images: Vec<usize>,
}

/// Pattern wire classification.
struct PatternShape {
    /// (pattern wire idx, both node-port ends).
    node_node: Vec<(usize, PortRef, PortRef)>,
    /// (pattern wire idx, boundary end, node end).
    node_boundary: Vec<(usize, PortRef, PortRef)>,
    /// Pattern wire idx of each strand, in wire order.
    strands: Vec<usize>,
}

fn classify(pattern: &Diagram) -> PatternShape {
    let mut shape = PatternShape {
        node_node: Vec::new(),
        node_boundary: Vec::new(),
        strands: Vec::new(),
    };
    for (i, w) in pattern.wires.iter().enumerate() {
        match (w.a.is_boundary(), w.b.is_boundary()) {
            (false, false) => shape.node_node.push((i, w.a, w.b)),
            (true, false) => shape.node_boundary.push((i, w.a, w.b)),
            (false, true) => shape.node_boundary.push((i, w.b, w.a)),
            (true, true) => shape.strands.push(i),
        }
    }
    shape
}

/// Junction id of a pattern boundary port: inputs first, then outputs.
fn junction_of(pattern: &Diagram, p: PortRef) -> usize {
    match p {
        PortRef::In(k) => k,
        PortRef::Out(k) => pattern.dom.len() + k,
        _ => unreachable!("junctions index boundary ports only"),
    }
}

fn map_port(node_map: &[usize], p: PortRef) -> PortRef {
    match p {
        PortRef::NodeIn(n, j) => PortRef::NodeIn(node_map[n], j),
        PortRef::NodeOut(n, j) => PortRef::NodeOut(node_map[n], j),
        boundary => boundary,
    }
}

/// Everything needed to cut the host along a validated match.
struct ResolvedMatch {
    /// Host wires consumed whole by node-node pattern wires.
    consumed: BTreeSet<usize>,
    /// Host port -> junction id, from node-boundary claims.
    end_claims: BTreeMap<PortRef, usize>,
    /// Host wire idx -> (tail junction, head junction) from its strand.
    strand_cuts: BTreeMap<usize, (usize, usize)>,
}

/// Validates a match against a host and pattern, resolving the cut data.
fn resolve_match(
    host: &Diagram,
    pattern: &Diagram,
    m: &Match,
) -> Result<ResolvedMatch, DiagramError> {
    let fail = |reason: String| Err(DiagramError::NoSuchMatch(reason));

    if m.node_map.len() != pattern.nodes.len() {
        return fail(format!(
            "site maps {} nodes, pattern has {}",
            m.node_map.len(),
            pattern.nodes.len()
        ));
    }
    let mut seen_nodes = BTreeSet::new();
    for (pn, &hn) in m.node_map.iter().enumerate() {
        if hn >= host.nodes.len() {
            return fail(format!("node image {hn} out of range"));
        }
        if !seen_nodes.insert(hn) {
            return fail(format!("node image {hn} used twice"));
        }
        let p = &pattern.nodes[pn];
        let h = &host.nodes[hn];
        if p.gen != h.gen || p.dagger != h.dagger || p.dom != h.dom || p.cod != h.cod {
            return fail(format!("pattern node {pn} does not match host node {hn}"));
        }
    }

    for (label, &count) in &pattern.loops {
        if host.loops.get(label).copied().unwrap_or(0) < count {
            return fail(format!("host lacks {count} of {label}"));
        }
    }

    let shape = classify(pattern);
    let mut consumed = BTreeSet::new();
    for &(_, pa, pb) in &shape.node_node {
        let ha = map_port(&m.node_map, pa);
        let hb = map_port(&m.node_map, pb);
        let idx = host.wires.iter().position(|w| w.touches(ha) && w.touches(hb));
        match idx {
            Some(i) => {
                consumed.insert(i);
            }
            None => return fail(format!("no host wire between {ha:?} and {hb:?}")),
        }
    }
    let mut end_claims: BTreeMap<PortRef, usize> = BTreeMap::new();
    for &(_, bp, np) in &shape.node_boundary {
        let hp = map_port(&m.node_map, np);
        let i = host
            .wires
            .iter()
            .position(|w| w.touches(hp))
            .ok_or_else(|| DiagramError::NoSuchMatch(format!("unwired host port {hp:?}")))?;
        if consumed.contains(&i) {
            return fail(format!("host wire {i} both consumed and end-claimed"));
        }
        if end_claims.insert(hp, junction_of(pattern, bp)).is_some() {
            return fail(format!("host port {hp:?} claimed twice"));
        }
    }

    if m.strand_images.len() != shape.strands.len() {
        return fail(format!(
            "site maps {} strands, pattern has {}",
            m.strand_images.len(),
            shape.strands.len()
        ));
    }
    let mut strand_cuts: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (k, &wi) in shape.strands.iter().enumerate() {
        let hi = m.strand_images[k];
        if hi >= host.wires.len() {
            return fail(format!("strand image {hi} out of range"));
        }
        if consumed.contains(&hi) {
            return fail(format!("strand mapped to consumed wire {hi}"));
        }
        let pw = &pattern.wires[wi];
        let hw = &host.wires[hi];
        if pw.base != hw.base {
            return fail(format!(
                "strand label {} does not match wire label {}",
                pw.base, hw.base
            ));
        }
        let (tail_port, head_port) = if pattern.end_is_tail(pw.a) {
            (pw.a, pw.b)
        } else {
            (pw.b, pw.a)
        };
        let cut = (junction_of(pattern, tail_port), junction_of(pattern, head_port));
        if strand_cuts.insert(hi, cut).is_some() {
            return fail(format!("two strands mapped to host wire {hi}"));
        }
    }

    Ok(ResolvedMatch { consumed, end_claims, strand_cuts })
}

/// Enumerates all match sites of `pattern` in `host`, in lexicographic
/// order of (node map, strand images).
pub fn enumerate_matches(host: &Diagram, pattern: &Diagram) -> Vec<Match> {
    for (label, &count) in &pattern.loops {
        if host.loops.get(label).copied().unwrap_or(0) < count {
            return Vec::new();
        }
    }
    let shape = classify(pattern);
    let mut out = Vec::new();
    let mut node_map: Vec<usize> = Vec::new();
    let mut used: BTreeSet<usize> = BTreeSet::new();
    assign_nodes(host, pattern, &shape, &mut node_map, &mut used, &mut out);
    out
}

fn assign_nodes(
    host: &Diagram,
    pattern: &Diagram,
    shape: &PatternShape,
    node_map: &mut Vec<usize>,
    used: &mut BTreeSet<usize>,
    out: &mut Vec<Match>,
) {
    let pn = node_map.len();
    if pn == pattern.nodes.len() {
        complete_strands(host, pattern, shape, node_map, out);
        return;
    }
    let p = &pattern.nodes[pn];
    for hn in 0..host.nodes.len() {
        if used.contains(&hn) {
            continue;
        }
        let h = &host.nodes[hn];
        if p.gen != h.gen || p.dagger != h.dagger || p.dom != h.dom || p.cod != h.cod {
            continue;
        }
        node_map.push(hn);
        used.insert(hn);
        assign_nodes(host, pattern, shape, node_map, used, out);
        used.remove(&hn);
        node_map.pop();
    }
}

fn complete_strands(
    host: &Diagram,
    pattern: &Diagram,
    shape: &PatternShape,
    node_map: &[usize],
    out: &mut Vec<Match>,
) {
    // Check the wire constraints forced by the node map.
    let mut consumed = BTreeSet::new();
    for &(_, pa, pb) in &shape.node_node {
        let ha = map_port(node_map, pa);
        let hb = map_port(node_map, pb);
        match host.wires.iter().position(|w| w.touches(ha) && w.touches(hb)) {
            Some(i) => {
                consumed.insert(i);
            }
            None => return,
        }
    }
    let mut claimed_ports: BTreeSet<PortRef> = BTreeSet::new();
    for &(_, _, np) in &shape.node_boundary {
        let hp = map_port(node_map, np);
        let i = match host.wires.iter().position(|w| w.touches(hp)) {
            Some(i) => i,
            None => return,
        };
        if consumed.contains(&i) || !claimed_ports.insert(hp) {
            return;
        }
    }

    // Backtrack over strand images, ascending.
    fn rec(
        host: &Diagram,
        pattern: &Diagram,
        strands: &[usize],
        consumed: &BTreeSet<usize>,
        node_map: &[usize],
        images: &mut Vec<usize>,
        taken: &mut BTreeSet<usize>,
        out: &mut Vec<Match>,
    ) {
        let k = images.len();
        if k == strands.len() {
            out.push(Match { node_map: node_map.to_vec(), strand_images: images.clone() });
            return;
        }
        let label = &pattern.wires[strands[k]].base;
        for hi in 0..host.wires.len() {
            if consumed.contains(&hi) || taken.contains(&hi) || &host.wires[hi].base != label {
                continue;
            }
            images.push(hi);
            taken.insert(hi);
            rec(host, pattern, strands, consumed, node_map, images, taken, out);
            taken.remove(&hi);
            images.pop();
        }
    }
    let mut images = Vec::new();
    let mut taken = BTreeSet::new();
    rec(host, pattern, &shape.strands, &consumed, node_map, &mut images, &mut taken, out);
}

/// Rewrites `host` at `site` with `eq`, left side out, right side in.
/// Fails with `NoSuchMatch` when the site does not identify a valid
/// occurrence of the left side, and `TypeMismatch` when the equation's
/// sides are not parallel.
pub fn apply_equation(host: &Diagram, eq: &Equation, site: &Match) -> Result<Diagram, DiagramError> {
    if eq.lhs.dom() != eq.rhs.dom() || eq.lhs.cod() != eq.rhs.cod() {
        return Err(DiagramError::TypeMismatch {
            left_dom: eq.lhs.dom().clone(),
            left_cod: eq.lhs.cod().clone(),
            right_dom: eq.rhs.dom().clone(),
            right_cod: eq.rhs.cod().clone(),
        });
    }
    let lp = eq.lhs_diagram();
    let rp = eq.rhs_diagram();
    let resolved = resolve_match(host, &lp, site)?;
    let junction_count = lp.dom.len() + lp.cod.len();

    // Kept host nodes, in order, then replacement nodes.
    let matched: BTreeSet<usize> = site.node_map.iter().copied().collect();
    let mut node_remap = vec![usize::MAX; host.nodes.len()];
    let mut nodes = Vec::new();
    for (i, n) in host.nodes.iter().enumerate() {
        if !matched.contains(&i) {
            node_remap[i] = nodes.len();
            nodes.push(n.clone());
        }
    }
    let rhs_shift = nodes.len();
    nodes.extend(rp.nodes.iter().cloned());

    let remap_host = |p: PortRef| match p {
        PortRef::NodeIn(n, j) => PortRef::NodeIn(node_remap[n], j),
        PortRef::NodeOut(n, j) => PortRef::NodeOut(node_remap[n], j),
        boundary => boundary,
    };
    let mut assembly: Vec<(End, End, String)> = Vec::new();
    for (i, w) in host.wires.iter().enumerate() {
        if resolved.consumed.contains(&i) {
            continue;
        }
        let (tail_p, head_p) = if host.end_is_tail(w.a) { (w.a, w.b) } else { (w.b, w.a) };
        let start = match resolved.end_claims.get(&tail_p) {
            Some(&j) => End::J(j),
            None => End::P(remap_host(tail_p)),
        };
        let finish = match resolved.end_claims.get(&head_p) {
            Some(&j) => End::J(j),
            None => End::P(remap_host(head_p)),
        };
        match resolved.strand_cuts.get(&i) {
            Some(&(tail_j, head_j)) => {
                assembly.push((start, End::J(tail_j), w.base.clone()));
                assembly.push((End::J(head_j), finish, w.base.clone()));
            }
            None => assembly.push((start, finish, w.base.clone())),
        }
    }
    for w in &rp.wires {
        let map = |p: PortRef| match p {
            PortRef::In(_) | PortRef::Out(_) => End::J(junction_of(&rp, p)),
            PortRef::NodeIn(n, j) => End::P(PortRef::NodeIn(n + rhs_shift, j)),
            PortRef::NodeOut(n, j) => End::P(PortRef::NodeOut(n + rhs_shift, j)),
        };
        assembly.push((map(w.a), map(w.b), w.base.clone()));
    }

    let (wires, free_loops) = resolve_junctions(assembly, junction_count);
    let mut loops = host.loops.clone();
    for (label, count) in &lp.loops {
        let entry = loops.get_mut(label).expect("validated loop inclusion");
        *entry -= count;
        if *entry == 0 {
            loops.remove(label);
        }
    }
    for (label, count) in &rp.loops {
        *loops.entry(label.clone()).or_insert(0) += count;
    }
    for base in free_loops {
        *loops.entry(super::LoopLabel::Free(base)).or_insert(0) += 1;
    }

    let mut result = Diagram {
        dom: host.dom.clone(),
        cod: host.cod.clone(),
        nodes,
        wires,
        loops,
    };
    result.normalize_closed();
    debug_assert_eq!(result.check_invariants(), Ok(()));
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::canonical_key;
    use crate::signature::{ObjectExpr, Signature};
    use crate::term::{typecheck, Term};
    use std::sync::Arc;

    fn sig() -> Arc<Signature> {
        let mut s = Signature::new(true);
        s.add_base_object("A").unwrap();
        s.add_generator("f", ObjectExpr::base("A"), ObjectExpr::base("A")).unwrap();
        s.add_generator("u", ObjectExpr::unit(), ObjectExpr::base("A")).unwrap();
        Arc::new(s)
    }

    #[test]
    fn identity_equation_rewrites_to_same_key() {
        let sig = sig();
        let f = typecheck(&Term::gen("f"), &sig).unwrap();
        let eq = Equation::new("refl", f.clone(), f.clone()).unwrap();
        let host = to_diagram(&f);
        let sites = enumerate_matches(&host, &eq.lhs_diagram());
        assert_eq!(sites.len(), 1);
        let rewritten = apply_equation(&host, &eq, &sites[0]).unwrap();
        assert_eq!(canonical_key(&rewritten), canonical_key(&host));
    }

    #[test]
    fn unfold_generator_inside_composite() {
        let sig = sig();
        // Equation f = f o f applied at the single f in (f o f) yields f o f o f.
        let f = typecheck(&Term::gen("f"), &sig).unwrap();
        let ff = typecheck(&Term::compose(Term::gen("f"), Term::gen("f")), &sig).unwrap();
        let eq = Equation::new("unfold", f.clone(), ff.clone()).unwrap();
        let host = to_diagram(&f);
        let sites = enumerate_matches(&host, &eq.lhs_diagram());
        assert_eq!(sites.len(), 1);
        let once = apply_equation(&host, &eq, &sites[0]).unwrap();
        assert_eq!(canonical_key(&once), canonical_key(&to_diagram(&ff)));
        // Two sites now; both applications give f o f o f.
        let sites = enumerate_matches(&once, &eq.lhs_diagram());
        assert_eq!(sites.len(), 2);
        let fff = typecheck(
            &Term::compose(Term::gen("f"), Term::compose(Term::gen("f"), Term::gen("f"))),
            &sig,
        )
        .unwrap();
        for site in &sites {
            let next = apply_equation(&once, &eq, site).unwrap();
            assert_eq!(canonical_key(&next), canonical_key(&to_diagram(&fff)));
        }
    }

    #[test]
    fn stale_site_is_rejected() {
        let sig = sig();
        let f = typecheck(&Term::gen("f"), &sig).unwrap();
        let u = typecheck(&Term::gen("u"), &sig).unwrap();
        let eq = Equation::new("refl", f.clone(), f.clone()).unwrap();
        let host = to_diagram(&u);
        let bogus = Match { node_map: vec![0], strand_images: vec![] };
        let err = apply_equation(&host, &eq, &bogus).unwrap_err();
        assert!(matches!(err, DiagramError::NoSuchMatch(_)));
    }

    #[test]
    fn strand_rewrite_can_close_a_loop() {
        let sig = sig();
        let a = ObjectExpr::base("A");
        // sym(A, A) = id(A x A), applied to the two wires of a lone f,
        // routing its output back into its input.
        let sym = typecheck(&Term::Sym(a.clone(), a.clone()), &sig).unwrap();
        let idaa = typecheck(&Term::Id(a.tensor(&a)), &sig).unwrap();
        let eq = Equation::new("sym-collapse", sym, idaa).unwrap();
        let host = to_diagram(&typecheck(&Term::gen("f"), &sig).unwrap());
        let sites = enumerate_matches(&host, &eq.lhs_diagram());
        // Two strands over two host wires: two assignments.
        assert_eq!(sites.len(), 2);
        let rewritten = apply_equation(&host, &eq, &sites[0]).unwrap();
        assert_eq!(rewritten.nodes.len(), 0);
        assert_eq!(rewritten.wires.len(), 1);
        assert_eq!(rewritten.loop_count(), 1);
        let cycle = rewritten.loops.keys().next().unwrap();
        match cycle {
            crate::diagram::LoopLabel::Cycle(passes) => {
                assert_eq!(passes.len(), 1);
                assert_eq!(passes[0].gen, "f");
                assert!(!passes[0].dagger);
            }
            other => panic!("expected a cycle loop, got {other:?}"),
        }
    }
}
