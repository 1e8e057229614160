//! Morphism terms over a signature, the typechecker, and the derived
//! constructions (names, conames, duals, traces, permutation layers).
//!
//! Composition is written mathematically: `Compose(after, before)` denotes
//! `after o before`. Subterm positions are paths of child indices from the
//! root (`Compose`: 0 = after, 1 = before; `Tensor`: 0 = left, 1 = right;
//! `Dagger`: 0).

use crate::signature::{ObjectExpr, Permutation, Signature};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Syntax of morphism terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    /// A generator by name.
    Gen(String),
    /// Identity on a word.
    Id(ObjectExpr),
    /// `Compose(after, before)` is `after o before`.
    Compose(Box<Term>, Box<Term>),
    Tensor(Box<Term>, Box<Term>),
    /// Symmetry `sym(a, b) : a x b -> b x a`.
    Sym(ObjectExpr, ObjectExpr),
    /// Unit `eta(a) : I -> dual(a) x a`.
    Unit(ObjectExpr),
    /// Counit `eps(a) : a x dual(a) -> I`.
    Counit(ObjectExpr),
    Dagger(Box<Term>),
}

impl Term {
    pub fn compose(after: Term, before: Term) -> Term {
        Term::Compose(Box::new(after), Box::new(before))
    }

    pub fn tensor(left: Term, right: Term) -> Term {
        Term::Tensor(Box::new(left), Box::new(right))
    }

    pub fn dagger(inner: Term) -> Term {
        Term::Dagger(Box::new(inner))
    }

    pub fn gen(name: impl Into<String>) -> Term {
        Term::Gen(name.into())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, false)
    }
}

impl Term {
    /// `t ; u` reads diagrammatically (t then u), so `Compose(a, b)` prints
    /// as `b ; a`. Chains of either operator print flat; that loses the
    /// association, which is harmless because objects are flat words and
    /// both operators are strictly associative up to diagram equality.
    /// `tight` marks tensor slots, the one context where a composition
    /// needs parentheses.
    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, tight: bool) -> fmt::Result {
        match self {
            Term::Compose(after, before) => {
                if tight {
                    write!(f, "(")?;
                }
                before.fmt_at(f, false)?;
                write!(f, " ; ")?;
                after.fmt_at(f, false)?;
                if tight {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Term::Tensor(l, r) => {
                l.fmt_at(f, true)?;
                write!(f, " * ")?;
                r.fmt_at(f, true)
            }
            Term::Gen(name) => write!(f, "{name}"),
            Term::Id(w) => write!(f, "id[{w}]"),
            Term::Sym(a, b) => write!(f, "sym[{a}, {b}]"),
            Term::Unit(w) => write!(f, "eta[{w}]"),
            Term::Counit(w) => write!(f, "eps[{w}]"),
            Term::Dagger(t) => {
                write!(f, "dagger(")?;
                t.fmt_at(f, false)?;
                write!(f, ")")
            }
        }
    }
}

/// Path of child indices locating a subterm.
pub type TermPath = Vec<usize>;

/// Typechecking errors. Every variant reports the path of the offending
/// subterm from the root.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("unknown name `{name}` at {path:?}")]
    UnknownName { name: String, path: TermPath },
    #[error("composition mismatch at {path:?}: after expects `{after_dom}` but before produces `{before_cod}`")]
    CompositionMismatch { after_dom: ObjectExpr, before_cod: ObjectExpr, path: TermPath },
    #[error("dagger used over a signature without dagger structure at {path:?}")]
    DaggerUnavailable { path: TermPath },
    #[error("trace shape mismatch: cannot close `{traced}` on `{dom} -> {cod}`")]
    TraceShapeMismatch { dom: ObjectExpr, cod: ObjectExpr, traced: ObjectExpr },
    #[error("not a permutation: {reason}")]
    NotAPermutation { reason: String },
}

/// A term together with its checked domain and codomain, carrying the
/// signature it was checked against. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedTerm {
    term: Term,
    dom: ObjectExpr,
    cod: ObjectExpr,
    sig: Arc<Signature>,
}

impl TypedTerm {
    pub fn term(&self) -> &Term {
        &self.term
    }

    pub fn dom(&self) -> &ObjectExpr {
        &self.dom
    }

    pub fn cod(&self) -> &ObjectExpr {
        &self.cod
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn into_term(self) -> Term {
        self.term
    }
}

impl fmt::Display for TypedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {} -> {}", self.term, self.dom, self.cod)
    }
}

/// Checks a term against a signature, computing its type.
pub fn typecheck(term: &Term, sig: &Arc<Signature>) -> Result<TypedTerm, TypeError> {
    let mut path = Vec::new();
    let (dom, cod) = infer(term, sig, &mut path)?;
    Ok(TypedTerm { term: term.clone(), dom, cod, sig: Arc::clone(sig) })
}

fn check_word(word: &ObjectExpr, sig: &Signature, path: &[usize]) -> Result<(), TypeError> {
    for factor in &word.factors {
        if !sig.has_base(&factor.base) {
            return Err(TypeError::UnknownName { name: factor.base.clone(), path: path.to_vec() });
        }
    }
    Ok(())
}

fn infer(
    term: &Term,
    sig: &Signature,
    path: &mut TermPath,
) -> Result<(ObjectExpr, ObjectExpr), TypeError> {
    match term {
        Term::Gen(name) => match sig.generator(name) {
            Some(g) => Ok((g.dom.clone(), g.cod.clone())),
            None => Err(TypeError::UnknownName { name: name.clone(), path: path.clone() }),
        },
        Term::Id(w) => {
            check_word(w, sig, path)?;
            Ok((w.clone(), w.clone()))
        }
        Term::Compose(after, before) => {
            path.push(0);
            let (after_dom, after_cod) = infer(after, sig, path)?;
            path.pop();
            path.push(1);
            let (before_dom, before_cod) = infer(before, sig, path)?;
            path.pop();
            if after_dom != before_cod {
                return Err(TypeError::CompositionMismatch {
                    after_dom,
                    before_cod,
                    path: path.clone(),
                });
            }
            Ok((before_dom, after_cod))
        }
        Term::Tensor(left, right) => {
            path.push(0);
            let (ld, lc) = infer(left, sig, path)?;
            path.pop();
            path.push(1);
            let (rd, rc) = infer(right, sig, path)?;
            path.pop();
            Ok((ld.tensor(&rd), lc.tensor(&rc)))
        }
        Term::Sym(a, b) => {
            check_word(a, sig, path)?;
            check_word(b, sig, path)?;
            Ok((a.tensor(b), b.tensor(a)))
        }
        Term::Unit(a) => {
            check_word(a, sig, path)?;
            Ok((ObjectExpr::unit(), a.dual().tensor(a)))
        }
        Term::Counit(a) => {
            check_word(a, sig, path)?;
            Ok((a.tensor(&a.dual()), ObjectExpr::unit()))
        }
        Term::Dagger(inner) => {
            if !sig.dagger_closed {
                return Err(TypeError::DaggerUnavailable { path: path.clone() });
            }
            path.push(0);
            let (d, c) = infer(inner, sig, path)?;
            path.pop();
            Ok((c, d))
        }
    }
}

/// Name of a morphism: `(1_{dual(A)} x f) o eta(A) : I -> dual(A) x B`.
pub fn name_of(f: &TypedTerm) -> TypedTerm {
    let a = f.dom().clone();
    let term = Term::compose(
        Term::tensor(Term::Id(a.dual()), f.term().clone()),
        Term::Unit(a.clone()),
    );
    TypedTerm {
        term,
        dom: ObjectExpr::unit(),
        cod: a.dual().tensor(f.cod()),
        sig: Arc::clone(f.signature()),
    }
}

/// Coname of a morphism: `eps(B) o (f x 1_{dual(B)}) : A x dual(B) -> I`.
pub fn coname_of(f: &TypedTerm) -> TypedTerm {
    let b = f.cod().clone();
    let term = Term::compose(
        Term::Counit(b.clone()),
        Term::tensor(f.term().clone(), Term::Id(b.dual())),
    );
    TypedTerm {
        term,
        dom: f.dom().tensor(&b.dual()),
        cod: ObjectExpr::unit(),
        sig: Arc::clone(f.signature()),
    }
}

/// Dual of a morphism `f : A -> B`, typed `dual(B) -> dual(A)`:
/// `(1 x eps(B)) o (1 x f x 1) o (eta(A) x 1)`.
pub fn dual_of(f: &TypedTerm) -> TypedTerm {
    let a = f.dom().clone();
    let b = f.cod().clone();
    let astar = a.dual();
    let bstar = b.dual();
    let stage1 = Term::tensor(Term::Unit(a.clone()), Term::Id(bstar.clone()));
    let stage2 = Term::tensor(
        Term::tensor(Term::Id(astar.clone()), f.term().clone()),
        Term::Id(bstar.clone()),
    );
    let stage3 = Term::tensor(Term::Id(astar.clone()), Term::Counit(b.clone()));
    TypedTerm {
        term: Term::compose(stage3, Term::compose(stage2, stage1)),
        dom: bstar,
        cod: astar,
        sig: Arc::clone(f.signature()),
    }
}

/// Partial trace closing the trailing word `u`: for `f : A x U -> B x U`
/// produces `(1_B x eps(U)) o (f x 1) o (1_A x sym(dual(U), U)) o (1_A x eta(U))`.
/// With `A = B = I` this is the canonical total trace.
pub fn trace_term(f: &TypedTerm, u: &ObjectExpr) -> Result<TypedTerm, TypeError> {
    if !f.dom().ends_with(u) || !f.cod().ends_with(u) {
        return Err(TypeError::TraceShapeMismatch {
            dom: f.dom().clone(),
            cod: f.cod().clone(),
            traced: u.clone(),
        });
    }
    let a = f.dom().strip_suffix(u);
    let b = f.cod().strip_suffix(u);
    let ustar = u.dual();
    let open = Term::tensor(Term::Id(a.clone()), Term::Unit(u.clone()));
    let swap = Term::tensor(Term::Id(a.clone()), Term::Sym(ustar.clone(), u.clone()));
    let body = Term::tensor(f.term().clone(), Term::Id(ustar.clone()));
    let close = Term::tensor(Term::Id(b.clone()), Term::Counit(u.clone()));
    Ok(TypedTerm {
        term: Term::compose(close, Term::compose(body, Term::compose(swap, open))),
        dom: a,
        cod: b,
        sig: Arc::clone(f.signature()),
    })
}

/// Realizes a permutation of tensor factors as a composite of adjacent
/// symmetries. `factors[i]` travels to position `p.apply(i)`. The identity
/// permutation yields `Id` on the full word.
pub fn perm_term(
    p: &Permutation,
    factors: &[ObjectExpr],
    sig: &Arc<Signature>,
) -> Result<TypedTerm, TypeError> {
    if p.len() != factors.len() {
        return Err(TypeError::NotAPermutation {
            reason: format!("{} images for {} factors", p.len(), factors.len()),
        });
    }
    for word in factors {
        check_word(word, sig, &[])?;
    }
    let full_word = |arrangement: &[usize]| -> ObjectExpr {
        let mut w = ObjectExpr::unit();
        for &k in arrangement {
            w = w.tensor(&factors[k]);
        }
        w
    };
    // arrangement[j] = which original factor currently sits at position j.
    let mut arrangement: Vec<usize> = (0..factors.len()).collect();
    let dom = full_word(&arrangement);
    let mut layers: Vec<Term> = Vec::new();
    let mut sorted = false;
    while !sorted {
        sorted = true;
        for j in 0..arrangement.len().saturating_sub(1) {
            if p.apply(arrangement[j]) > p.apply(arrangement[j + 1]) {
                let left = factors[arrangement[j]].clone();
                let right = factors[arrangement[j + 1]].clone();
                let mut layer = Term::Sym(left, right);
                if j > 0 {
                    let prefix = full_word(&arrangement[..j]);
                    layer = Term::tensor(Term::Id(prefix), layer);
                }
                if j + 2 < arrangement.len() {
                    let suffix = full_word(&arrangement[j + 2..]);
                    layer = Term::tensor(layer, Term::Id(suffix));
                }
                layers.push(layer);
                arrangement.swap(j, j + 1);
                sorted = false;
            }
        }
    }
    let term = match layers.split_first() {
        None => Term::Id(dom.clone()),
        Some((first, rest)) => rest
            .iter()
            .fold(first.clone(), |acc, layer| Term::compose(layer.clone(), acc)),
    };
    let cod = full_word(&arrangement);
    typecheck(&term, sig).map(|checked| {
        debug_assert_eq!(checked.dom(), &dom);
        debug_assert_eq!(checked.cod(), &cod);
        checked
    })
}

/// Convenience: a permutation given in one-line images over `factors`,
/// rejected with `NotAPermutation` when the images are not a bijection.
pub fn perm_term_from_images(
    images: &[usize],
    factors: &[ObjectExpr],
    sig: &Arc<Signature>,
) -> Result<TypedTerm, TypeError> {
    let p = Permutation::from_one_based(images).ok_or_else(|| TypeError::NotAPermutation {
        reason: format!("images {images:?} are not a bijection"),
    })?;
    perm_term(&p, factors, sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::Factor;

    fn sig_ab() -> Arc<Signature> {
        let mut sig = Signature::new(true);
        sig.add_base_object("A").unwrap();
        sig.add_base_object("B").unwrap();
        sig.add_generator("f", ObjectExpr::base("A"), ObjectExpr::base("B")).unwrap();
        sig.add_generator("g", ObjectExpr::base("B"), ObjectExpr::base("A")).unwrap();
        Arc::new(sig)
    }

    #[test]
    fn unit_and_counit_types() {
        let sig = sig_ab();
        let a = ObjectExpr::base("A");
        let eta = typecheck(&Term::Unit(a.clone()), &sig).unwrap();
        assert_eq!(eta.dom(), &ObjectExpr::unit());
        assert_eq!(eta.cod(), &a.dual().tensor(&a));
        let eps = typecheck(&Term::Counit(a.clone()), &sig).unwrap();
        assert_eq!(eps.dom(), &a.tensor(&a.dual()));
        assert_eq!(eps.cod(), &ObjectExpr::unit());
    }

    #[test]
    fn composite_unit_type_uses_order_preserving_dual() {
        let sig = sig_ab();
        let ab = ObjectExpr::base("A").tensor(&ObjectExpr::base("B"));
        let eta = typecheck(&Term::Unit(ab.clone()), &sig).unwrap();
        let expected = ObjectExpr::from_factors(vec![
            Factor::dual("A"),
            Factor::dual("B"),
            Factor::plain("A"),
            Factor::plain("B"),
        ]);
        assert_eq!(eta.cod(), &expected);
    }

    #[test]
    fn composition_mismatch_cites_both_words_and_the_path() {
        let sig = sig_ab();
        let a = ObjectExpr::base("A");
        // eps(A) o eta(A): cod(eta) = dual(A) x A, dom(eps) = A x dual(A).
        let term = Term::compose(Term::Counit(a.clone()), Term::Unit(a.clone()));
        let err = typecheck(&term, &sig).unwrap_err();
        assert_eq!(
            err,
            TypeError::CompositionMismatch {
                after_dom: a.tensor(&a.dual()),
                before_cod: a.dual().tensor(&a),
                path: vec![],
            }
        );
        // Same clash one level down inside a tensor.
        let nested = Term::tensor(Term::Id(a.clone()), term);
        let err = typecheck(&nested, &sig).unwrap_err();
        match err {
            TypeError::CompositionMismatch { path, .. } => assert_eq!(path, vec![1]),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_generator_reports_path() {
        let sig = sig_ab();
        let term = Term::compose(Term::gen("h"), Term::gen("f"));
        let err = typecheck(&term, &sig).unwrap_err();
        assert_eq!(err, TypeError::UnknownName { name: "h".into(), path: vec![0] });
    }

    #[test]
    fn dagger_swaps_types_and_requires_closure() {
        let sig = sig_ab();
        let f = typecheck(&Term::dagger(Term::gen("f")), &sig).unwrap();
        assert_eq!(f.dom(), &ObjectExpr::base("B"));
        assert_eq!(f.cod(), &ObjectExpr::base("A"));

        let mut plain = Signature::new(false);
        plain.add_base_object("A").unwrap();
        plain.add_generator("f", ObjectExpr::base("A"), ObjectExpr::base("A")).unwrap();
        let plain = Arc::new(plain);
        let err = typecheck(&Term::dagger(Term::gen("f")), &plain).unwrap_err();
        assert_eq!(err, TypeError::DaggerUnavailable { path: vec![] });
    }

    #[test]
    fn name_and_coname_types() {
        let sig = sig_ab();
        let f = typecheck(&Term::gen("f"), &sig).unwrap();
        let named = name_of(&f);
        assert_eq!(named.dom(), &ObjectExpr::unit());
        assert_eq!(named.cod(), &ObjectExpr::dual_base("A").tensor(&ObjectExpr::base("B")));
        let conamed = coname_of(&f);
        assert_eq!(conamed.dom(), &ObjectExpr::base("A").tensor(&ObjectExpr::dual_base("B")));
        assert_eq!(conamed.cod(), &ObjectExpr::unit());
        // Units and counits are the (co)names of identities.
        let id_a = typecheck(&Term::Id(ObjectExpr::base("A")), &sig).unwrap();
        assert_eq!(name_of(&id_a).cod(), typecheck(&Term::Unit(ObjectExpr::base("A")), &sig).unwrap().cod());
        assert_eq!(coname_of(&id_a).dom(), typecheck(&Term::Counit(ObjectExpr::base("A")), &sig).unwrap().dom());
    }

    #[test]
    fn dual_of_types() {
        let sig = sig_ab();
        let f = typecheck(&Term::gen("f"), &sig).unwrap();
        let fd = dual_of(&f);
        assert_eq!(fd.dom(), &ObjectExpr::dual_base("B"));
        assert_eq!(fd.cod(), &ObjectExpr::dual_base("A"));
        // Typecheck the desugared composite independently.
        let rechecked = typecheck(fd.term(), &sig).unwrap();
        assert_eq!(rechecked.dom(), fd.dom());
        assert_eq!(rechecked.cod(), fd.cod());
    }

    #[test]
    fn trace_requires_matching_trailing_word() {
        let sig = sig_ab();
        let f = typecheck(&Term::gen("f"), &sig).unwrap();
        let a = ObjectExpr::base("A");
        let err = trace_term(&f, &a).unwrap_err();
        assert!(matches!(err, TypeError::TraceShapeMismatch { .. }));

        let id_a = typecheck(&Term::Id(a.clone()), &sig).unwrap();
        let tr = trace_term(&id_a, &a).unwrap();
        assert_eq!(tr.dom(), &ObjectExpr::unit());
        assert_eq!(tr.cod(), &ObjectExpr::unit());
        let rechecked = typecheck(tr.term(), &sig).unwrap();
        assert_eq!(rechecked.dom(), &ObjectExpr::unit());
        assert_eq!(rechecked.cod(), &ObjectExpr::unit());
    }

    #[test]
    fn perm_term_identity_and_single_swap() {
        let sig = sig_ab();
        let a = ObjectExpr::base("A");
        let b = ObjectExpr::base("B");
        let id = perm_term_from_images(&[1, 2], &[a.clone(), b.clone()], &sig).unwrap();
        assert_eq!(id.term(), &Term::Id(a.tensor(&b)));
        let swap = perm_term_from_images(&[2, 1], &[a.clone(), b.clone()], &sig).unwrap();
        assert_eq!(swap.dom(), &a.tensor(&b));
        assert_eq!(swap.cod(), &b.tensor(&a));
    }

    #[test]
    fn perm_term_rejects_non_bijections() {
        let sig = sig_ab();
        let a = ObjectExpr::base("A");
        let err = perm_term_from_images(&[1, 1], &[a.clone(), a.clone()], &sig).unwrap_err();
        assert!(matches!(err, TypeError::NotAPermutation { .. }));
        let err = perm_term_from_images(&[1], &[a.clone(), a.clone()], &sig).unwrap_err();
        assert!(matches!(err, TypeError::NotAPermutation { .. }));
    }

    #[test]
    fn display_uses_diagrammatic_order_with_minimal_parens() {
        let a = ObjectExpr::base("A");
        let f = Term::gen("f");
        let g = Term::gen("g");
        // g o f reads "f then g".
        assert_eq!(Term::compose(g.clone(), f.clone()).to_string(), "f ; g");
        // Left-nested compose chains print flat; right-nested ones get parens.
        let chain = Term::compose(Term::compose(g.clone(), f.clone()), f.clone());
        assert_eq!(chain.to_string(), "f ; f ; g");
        let nested = Term::compose(g.clone(), Term::compose(g.clone(), f.clone()));
        assert_eq!(nested.to_string(), "f ; g ; g");
        // Tensor binds tighter than composition.
        let mixed = Term::compose(Term::tensor(f.clone(), g.clone()), Term::Id(a.clone()));
        assert_eq!(mixed.to_string(), "id[A] ; f * g");
        let inner = Term::tensor(Term::compose(g.clone(), f.clone()), f.clone());
        assert_eq!(inner.to_string(), "(f ; g) * f");
        assert_eq!(
            Term::dagger(Term::Unit(a.clone())).to_string(),
            "dagger(eta[A])"
        );
        assert_eq!(
            Term::Sym(a.clone(), a.dual()).to_string(),
            "sym[A, dual(A)]"
        );
    }
}
