//! Seeded random generation of words, terms, and equality preserving term
//! pairs. Everything here is deterministic in the seed, so fuzz failures
//! replay exactly.

use crate::signature::{Factor, ObjectExpr, Signature};
use crate::term::{coname_of, dual_of, name_of, trace_term, typecheck, Term, TypedTerm};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform word over the signature's base objects, each factor flipped to
/// its dual with probability one half.
pub fn random_word(
    rng: &mut ChaCha8Rng,
    sig: &Arc<Signature>,
    min_len: usize,
    max_len: usize,
) -> ObjectExpr {
    let bases = sig.base_objects();
    assert!(!bases.is_empty(), "random_word needs at least one base object");
    let len = rng.gen_range(min_len..=max_len);
    let factors = (0..len)
        .map(|_| {
            let base = bases.choose(rng).unwrap().clone();
            if rng.gen_bool(0.5) {
                Factor::dual(base)
            } else {
                Factor::plain(base)
            }
        })
        .collect();
    ObjectExpr::from_factors(factors)
}

/// Boundary width cap for generated terms. Evaluation cost grows with the
/// product of fiber dimensions along a cut, so fuzz terms stay narrow.
const MAX_BOUNDARY: usize = 6;

fn push_checked(pool: &mut Vec<TypedTerm>, sig: &Arc<Signature>, term: Term) {
    if let Ok(tt) = typecheck(&term, sig) {
        if tt.dom().len() <= MAX_BOUNDARY && tt.cod().len() <= MAX_BOUNDARY {
            pool.push(tt);
        }
    }
}

fn seed_pool(rng: &mut ChaCha8Rng, sig: &Arc<Signature>) -> Vec<TypedTerm> {
    let mut pool = Vec::new();
    for g in sig.generators() {
        push_checked(&mut pool, sig, Term::Gen(g.name.clone()));
    }
    for _ in 0..3 {
        let w = random_word(rng, sig, 1, 2);
        push_checked(&mut pool, sig, Term::Id(w.clone()));
        push_checked(&mut pool, sig, Term::Unit(w.clone()));
        push_checked(&mut pool, sig, Term::Counit(w.clone()));
        let v = random_word(rng, sig, 1, 2);
        push_checked(&mut pool, sig, Term::Sym(w, v));
    }
    pool
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &'a [TypedTerm]) -> &'a TypedTerm {
    pool.choose(rng).expect("pool is never empty")
}

/// Random well typed term, assembled by repeatedly combining a pool that
/// starts from the generators and structural primitives.
pub fn random_term(rng: &mut ChaCha8Rng, sig: &Arc<Signature>, effort: usize) -> TypedTerm {
    let mut pool = seed_pool(rng, sig);
    assert!(!pool.is_empty(), "signature admits no seed terms");
    for _ in 0..effort {
        match rng.gen_range(0u8..5) {
            0 | 1 => {
                let a = pick(rng, &pool).term().clone();
                let b = pick(rng, &pool).term().clone();
                push_checked(&mut pool, sig, Term::tensor(a, b));
            }
            2 | 3 => {
                // Random scan for a composable pair; misses are cheap.
                let mut found = None;
                for _ in 0..16 {
                    let after = pick(rng, &pool);
                    let before = pick(rng, &pool);
                    if after.dom() == before.cod() {
                        found = Some((after.term().clone(), before.term().clone()));
                        break;
                    }
                }
                if let Some((after, before)) = found {
                    push_checked(&mut pool, sig, Term::compose(after, before));
                }
            }
            _ => {
                if sig.dagger_closed {
                    let a = pick(rng, &pool).term().clone();
                    push_checked(&mut pool, sig, Term::dagger(a));
                }
            }
        }
    }
    let lo = pool.len() / 2;
    pool[rng.gen_range(lo..pool.len())].clone()
}

/// Random endomorphism of `w` built from structure (identity, a zig-zag,
/// a double symmetry) or a matching generator when one exists.
fn random_endo(rng: &mut ChaCha8Rng, sig: &Arc<Signature>, w: &ObjectExpr) -> TypedTerm {
    let mut options: Vec<Term> = vec![Term::Id(w.clone()), zig_zag(w)];
    if w.len() >= 2 {
        let split = rng.gen_range(1..w.len());
        let a = ObjectExpr::from_factors(w.factors[..split].to_vec());
        let b = ObjectExpr::from_factors(w.factors[split..].to_vec());
        options.push(Term::compose(
            Term::Sym(b.clone(), a.clone()),
            Term::Sym(a, b),
        ));
    }
    for g in sig.generators() {
        if g.dom == *w && g.cod == *w {
            options.push(Term::Gen(g.name.clone()));
        }
    }
    let term = options.choose(rng).unwrap().clone();
    typecheck(&term, sig).expect("endo options are well typed")
}

/// `(eps(w) x 1) o (1 x eta(w)) : w -> w`, the first triangle identity.
fn zig_zag(w: &ObjectExpr) -> Term {
    Term::compose(
        Term::tensor(Term::Counit(w.clone()), Term::Id(w.clone())),
        Term::tensor(Term::Id(w.clone()), Term::Unit(w.clone())),
    )
}

/// Ordered generator pairs `(after, before)` with `after.dom == before.cod`.
fn composable_generators(sig: &Signature) -> Vec<(String, String)> {
    let gens: Vec<_> = sig.generators().collect();
    let mut out = Vec::new();
    for after in &gens {
        for before in &gens {
            if after.dom == before.cod {
                out.push((after.name.clone(), before.name.clone()));
            }
        }
    }
    out
}

/// A pair of parallel terms equal by one of the axiom schemas of the
/// graphical language: zig-zags, double symmetry, symmetry naturality,
/// interchange, identity absorption, sliding around units, trace
/// cyclicity, and (for dagger closed signatures) dagger compatibility.
/// Optionally the pair is wrapped in a common context, which preserves
/// equality by congruence.
pub fn congruent_pair(
    rng: &mut ChaCha8Rng,
    sig: &Arc<Signature>,
    effort: usize,
) -> (TypedTerm, TypedTerm) {
    loop {
        if let Some(pair) = try_schema(rng, sig, effort) {
            return pair;
        }
    }
}

fn try_schema(
    rng: &mut ChaCha8Rng,
    sig: &Arc<Signature>,
    effort: usize,
) -> Option<(TypedTerm, TypedTerm)> {
    let dagger = sig.dagger_closed;
    let (lhs, rhs) = match rng.gen_range(0u8..12) {
        0 => {
            let w = random_word(rng, sig, 1, 2);
            (zig_zag(&w), Term::Id(w))
        }
        1 => {
            // Second triangle identity, on the dual side.
            let w = random_word(rng, sig, 1, 2);
            let ws = w.dual();
            let lhs = Term::compose(
                Term::tensor(Term::Id(ws.clone()), Term::Counit(w.clone())),
                Term::tensor(Term::Unit(w), Term::Id(ws.clone())),
            );
            (lhs, Term::Id(ws))
        }
        2 => {
            let a = random_word(rng, sig, 1, 2);
            let b = random_word(rng, sig, 1, 2);
            let lhs = Term::compose(Term::Sym(b.clone(), a.clone()), Term::Sym(a.clone(), b.clone()));
            (lhs, Term::Id(a.tensor(&b)))
        }
        3 => {
            let f = random_term(rng, sig, effort);
            let g = random_term(rng, sig, effort);
            if f.dom().len() + g.dom().len() > MAX_BOUNDARY
                || f.cod().len() + g.cod().len() > MAX_BOUNDARY
            {
                return None;
            }
            let lhs = Term::compose(
                Term::Sym(f.cod().clone(), g.cod().clone()),
                Term::tensor(f.term().clone(), g.term().clone()),
            );
            let rhs = Term::compose(
                Term::tensor(g.term().clone(), f.term().clone()),
                Term::Sym(f.dom().clone(), g.dom().clone()),
            );
            (lhs, rhs)
        }
        4 => {
            let b1 = random_term(rng, sig, effort);
            let b2 = random_term(rng, sig, effort);
            let a1 = random_endo(rng, sig, b1.cod());
            let a2 = random_endo(rng, sig, b2.cod());
            if b1.dom().len() + b2.dom().len() > MAX_BOUNDARY
                || b1.cod().len() + b2.cod().len() > MAX_BOUNDARY
            {
                return None;
            }
            let lhs = Term::tensor(
                Term::compose(a1.term().clone(), b1.term().clone()),
                Term::compose(a2.term().clone(), b2.term().clone()),
            );
            let rhs = Term::compose(
                Term::tensor(a1.term().clone(), a2.term().clone()),
                Term::tensor(b1.term().clone(), b2.term().clone()),
            );
            (lhs, rhs)
        }
        5 => {
            let t = random_term(rng, sig, effort);
            let lhs = Term::compose(
                Term::Id(t.cod().clone()),
                Term::compose(t.term().clone(), Term::Id(t.dom().clone())),
            );
            (lhs, t.term().clone())
        }
        6 => {
            // Slide a generator around eta: name_of(f) two ways.
            let gens: Vec<_> = sig.generators().collect();
            let g = gens.choose(rng)?;
            let f = typecheck(&Term::Gen(g.name.clone()), sig).ok()?;
            let rhs = Term::compose(
                Term::tensor(dual_of(&f).into_term(), Term::Id(f.cod().clone())),
                Term::Unit(f.cod().clone()),
            );
            (name_of(&f).into_term(), rhs)
        }
        7 => {
            // Slide a generator around eps: coname_of(f) two ways.
            let gens: Vec<_> = sig.generators().collect();
            let g = gens.choose(rng)?;
            let f = typecheck(&Term::Gen(g.name.clone()), sig).ok()?;
            let rhs = Term::compose(
                Term::Counit(f.dom().clone()),
                Term::tensor(Term::Id(f.dom().clone()), dual_of(&f).into_term()),
            );
            (coname_of(&f).into_term(), rhs)
        }
        8 => {
            // Trace cyclicity over composable generator pairs.
            let pairs = composable_generators(sig);
            let (a, b) = pairs.choose(rng)?.clone();
            let fg = typecheck(&Term::compose(Term::Gen(a.clone()), Term::Gen(b.clone())), sig).ok()?;
            let gf = typecheck(&Term::compose(Term::Gen(b), Term::Gen(a)), sig).ok()?;
            if fg.dom() != fg.cod() || gf.dom() != gf.cod() {
                return None;
            }
            let lhs = trace_term(&fg, &fg.dom().clone()).ok()?;
            let rhs = trace_term(&gf, &gf.dom().clone()).ok()?;
            (lhs.into_term(), rhs.into_term())
        }
        9 if dagger => {
            let w = random_word(rng, sig, 1, 2);
            let rhs = Term::compose(
                Term::dagger(Term::Unit(w.clone())),
                Term::Sym(w.clone(), w.dual()),
            );
            (Term::Counit(w), rhs)
        }
        10 if dagger => {
            let b = random_term(rng, sig, effort);
            let a = random_endo(rng, sig, b.cod());
            let lhs = Term::dagger(Term::compose(a.term().clone(), b.term().clone()));
            let rhs = Term::compose(
                Term::dagger(b.term().clone()),
                Term::dagger(a.term().clone()),
            );
            (lhs, rhs)
        }
        11 if dagger => {
            let t = random_term(rng, sig, effort);
            (Term::dagger(Term::dagger(t.term().clone())), t.term().clone())
        }
        _ => return None,
    };
    let (lhs, rhs) = wrap_in_context(rng, sig, lhs, rhs);
    let lhs = typecheck(&lhs, sig).expect("schema lhs is well typed");
    let rhs = typecheck(&rhs, sig).expect("schema rhs is well typed");
    debug_assert_eq!(lhs.dom(), rhs.dom());
    debug_assert_eq!(lhs.cod(), rhs.cod());
    Some((lhs, rhs))
}

fn wrap_in_context(
    rng: &mut ChaCha8Rng,
    sig: &Arc<Signature>,
    lhs: Term,
    rhs: Term,
) -> (Term, Term) {
    if !rng.gen_bool(0.4) {
        return (lhs, rhs);
    }
    let w = random_word(rng, sig, 1, 1);
    if rng.gen_bool(0.5) {
        (
            Term::tensor(lhs, Term::Id(w.clone())),
            Term::tensor(rhs, Term::Id(w)),
        )
    } else {
        (
            Term::tensor(Term::Id(w.clone()), lhs),
            Term::tensor(Term::Id(w), rhs),
        )
    }
}

/// Random scalar term `I -> I` assembled from names and conames of
/// generators. Needs either a two-way composable generator pair or, for
/// dagger closed signatures, any generator at all; otherwise `None`.
pub fn random_scalar_term(rng: &mut ChaCha8Rng, sig: &Arc<Signature>) -> Option<TypedTerm> {
    let gens: Vec<_> = sig.generators().collect();
    let two_way: Vec<(String, String)> = {
        let mut v = Vec::new();
        for f in &gens {
            for g in &gens {
                if f.dom == g.cod && f.cod == g.dom {
                    v.push((f.name.clone(), g.name.clone()));
                }
            }
        }
        v
    };
    let mut flavors: Vec<u8> = Vec::new();
    if !two_way.is_empty() {
        flavors.push(0);
    }
    if sig.dagger_closed && !gens.is_empty() {
        flavors.extend([1, 2]);
    }
    let term = match *flavors.choose(rng)? {
        0 => {
            // coname(f) o sym o name(g) with f : A -> B, g : B -> A.
            let (f, g) = two_way.choose(rng).unwrap().clone();
            let f = typecheck(&Term::Gen(f), sig).ok()?;
            let g = typecheck(&Term::Gen(g), sig).ok()?;
            let swap = Term::Sym(f.cod().dual(), f.dom().clone());
            Term::compose(
                coname_of(&f).into_term(),
                Term::compose(swap, name_of(&g).into_term()),
            )
        }
        1 => {
            let f = typecheck(&Term::Gen(gens.choose(rng).unwrap().name.clone()), sig).ok()?;
            let g = typecheck(&Term::Gen(gens.choose(rng).unwrap().name.clone()), sig).ok()?;
            if f.dom() != g.dom() || f.cod() != g.cod() {
                return None;
            }
            Term::compose(
                Term::dagger(name_of(&f).into_term()),
                name_of(&g).into_term(),
            )
        }
        _ => {
            let f = typecheck(&Term::Gen(gens.choose(rng).unwrap().name.clone()), sig).ok()?;
            let g = typecheck(&Term::Gen(gens.choose(rng).unwrap().name.clone()), sig).ok()?;
            if f.dom() != g.dom() || f.cod() != g.cod() {
                return None;
            }
            Term::compose(
                coname_of(&f).into_term(),
                Term::dagger(coname_of(&g).into_term()),
            )
        }
    };
    let tt = typecheck(&term, sig).expect("scalar flavors are well typed");
    debug_assert!(tt.dom().is_unit() && tt.cod().is_unit());
    Some(tt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::equal_diagrams;

    fn dagger_sig() -> Arc<Signature> {
        let mut sig = Signature::new(true);
        sig.add_base_object("A").unwrap();
        sig.add_base_object("B").unwrap();
        sig.add_generator("f", ObjectExpr::base("A"), ObjectExpr::base("B")).unwrap();
        sig.add_generator("g", ObjectExpr::base("B"), ObjectExpr::base("A")).unwrap();
        sig.add_generator(
            "h",
            ObjectExpr::base("A").tensor(&ObjectExpr::base("B")),
            ObjectExpr::base("A").tensor(&ObjectExpr::base("B")),
        )
        .unwrap();
        Arc::new(sig)
    }

    fn plain_sig() -> Arc<Signature> {
        let mut sig = Signature::new(false);
        sig.add_base_object("X").unwrap();
        sig.add_generator("u", ObjectExpr::base("X"), ObjectExpr::base("X")).unwrap();
        Arc::new(sig)
    }

    #[test]
    fn congruent_pairs_are_diagram_equal() {
        let sig = dagger_sig();
        let mut rng = rng_from_seed(7);
        for _ in 0..120 {
            let (l, r) = congruent_pair(&mut rng, &sig, 6);
            assert_eq!(l.dom(), r.dom());
            assert_eq!(l.cod(), r.cod());
            assert!(
                equal_diagrams(&l, &r).unwrap(),
                "schema pair not equal:\n  {l}\n  {r}"
            );
        }
    }

    #[test]
    fn congruent_pairs_work_without_dagger() {
        let sig = plain_sig();
        let mut rng = rng_from_seed(11);
        for _ in 0..60 {
            let (l, r) = congruent_pair(&mut rng, &sig, 5);
            assert!(equal_diagrams(&l, &r).unwrap());
        }
    }

    #[test]
    fn scalar_terms_are_closed() {
        let sig = dagger_sig();
        let mut rng = rng_from_seed(3);
        for _ in 0..40 {
            let s = random_scalar_term(&mut rng, &sig);
            if let Some(s) = s {
                assert!(s.dom().is_unit());
                assert!(s.cod().is_unit());
            }
        }
        // The two way pair (f, g) exists, so flavor 0 must fire sometimes.
        let mut rng = rng_from_seed(3);
        assert!((0..40).any(|_| random_scalar_term(&mut rng, &sig).is_some()));
    }

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let sig = dagger_sig();
        let mut a = rng_from_seed(42);
        let mut b = rng_from_seed(42);
        for _ in 0..10 {
            let ta = random_term(&mut a, &sig, 8);
            let tb = random_term(&mut b, &sig, 8);
            assert_eq!(format!("{ta}"), format!("{tb}"));
        }
    }

    #[test]
    fn words_respect_length_bounds() {
        let sig = dagger_sig();
        let mut rng = rng_from_seed(1);
        for _ in 0..50 {
            let w = random_word(&mut rng, &sig, 1, 3);
            assert!((1..=3).contains(&w.len()));
        }
    }
}
