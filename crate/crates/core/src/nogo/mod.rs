//! Impossibility checks: what a uniform copying or discarding structure
//! would force, verified two ways. In matrix models the axioms and their
//! consequences are checked numerically; over a free signature the
//! collapse arguments are carried out as recorded, replayable diagram
//! rewrites.

pub mod lattices;

pub use lattices::{lattices_of_size, lattices_up_to};

use crate::diagram::{
    apply_equation, canonical_key, enumerate_matches, term_key, to_diagram, CanonicalKey,
    Diagram, DiagramError, Equation, Match,
};
use crate::matrix::{perm_matrix, Matrix};
use crate::model::{with_model, EvalError, FamilyKind, Model, ModelKind, ModelT, NaturalFamily};
use crate::random::rng_from_seed;
use crate::report::CheckReport;
use crate::scalar::{rat, RatAlg, ScalarAlgebra};
use crate::signature::{ObjectExpr, Permutation, Signature};
use crate::term::{coname_of, trace_term, typecheck, Term, TypeError, TypedTerm};
use rand::prelude::*;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NogoError {
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("family `{family}` has kind {found:?}, expected {expected:?}")]
    KindMismatch { family: String, expected: FamilyKind, found: FamilyKind },
    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// One recorded rewrite: enough data to run `apply_equation` again and
/// compare canonical keys.
#[derive(Clone, Debug)]
pub struct RewriteData {
    pub equation: Equation,
    pub site: Match,
    pub before: Diagram,
    pub after: Diagram,
    pub before_key: CanonicalKey,
    pub after_key: CanonicalKey,
}

impl RewriteData {
    pub(crate) fn record(
        equation: Equation,
        site: Match,
        before: Diagram,
        after: Diagram,
    ) -> RewriteData {
        let before_key = canonical_key(&before);
        let after_key = canonical_key(&after);
        RewriteData { equation, site, before, after, before_key, after_key }
    }
}

#[derive(Clone, Debug)]
pub struct DerivationStep {
    pub label: String,
    pub note: String,
    pub rewrite: Option<RewriteData>,
    /// When set, the step's before diagram must be the previous rewrite's
    /// after diagram; replay checks the chain.
    pub chained: bool,
}

impl DerivationStep {
    pub(crate) fn note(label: impl Into<String>, note: impl Into<String>) -> DerivationStep {
        DerivationStep { label: label.into(), note: note.into(), rewrite: None, chained: false }
    }

    pub(crate) fn rewrite(label: impl Into<String>, rw: RewriteData, chained: bool) -> DerivationStep {
        DerivationStep { label: label.into(), note: String::new(), rewrite: Some(rw), chained }
    }
}

/// A derivation: annotated steps, some of them recorded rewrites, plus the
/// conclusions checked along the way. `replay` re-runs every rewrite from
/// its recorded inputs and re-compares the keys.
#[derive(Clone, Debug)]
pub struct DerivationReport {
    pub title: String,
    pub steps: Vec<DerivationStep>,
    pub conclusions: CheckReport,
}

/// Short stable fingerprint of a canonical key, for display; the full key
/// is a serialized port graph and far too long to print.
pub fn key_digest(key: &CanonicalKey) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in key.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

impl DerivationReport {
    pub fn passed(&self) -> bool {
        self.conclusions.passed()
    }

    pub fn replay(&self) -> Result<CheckReport, NogoError> {
        let mut report = CheckReport::new(format!("replay of {}", self.title));
        let mut prev_after: Option<CanonicalKey> = None;
        for (i, step) in self.steps.iter().enumerate() {
            let Some(rw) = &step.rewrite else { continue };
            if step.chained {
                let ok = prev_after.as_ref() == Some(&rw.before_key);
                report.push(
                    format!("step {i} continues from the previous diagram"),
                    ok,
                    (!ok).then(|| "before key differs from the previous after key".to_string()),
                );
            }
            let stored_ok = canonical_key(&rw.before) == rw.before_key;
            let redone = apply_equation(&rw.before, &rw.equation, &rw.site)?;
            let replay_ok = canonical_key(&redone) == rw.after_key;
            report.push(
                format!("step {i} ({}) replays to the recorded key", step.label),
                stored_ok && replay_ok,
                (!(stored_ok && replay_ok)).then(|| {
                    format!(
                        "recorded {} -> {}, replay gives {}",
                        key_digest(&rw.before_key),
                        key_digest(&rw.after_key),
                        key_digest(&canonical_key(&redone))
                    )
                }),
            );
            prev_after = Some(rw.after_key.clone());
        }
        Ok(report)
    }

    pub fn render_text(&self) -> String {
        let mut s = format!("== {} ==\n", self.title);
        for (i, step) in self.steps.iter().enumerate() {
            s.push_str(&format!("{:>3}. {}\n", i + 1, step.label));
            for line in step.note.lines() {
                s.push_str(&format!("     | {line}\n"));
            }
            if let Some(rw) = &step.rewrite {
                s.push_str(&format!(
                    "     rewrite with `{}`: {} -> {}\n",
                    rw.equation.name,
                    key_digest(&rw.before_key),
                    key_digest(&rw.after_key)
                ));
            }
        }
        s.push_str(&self.conclusions.render_text());
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "title": self.title,
            "steps": self.steps.iter().map(|step| json!({
                "label": step.label,
                "note": step.note,
                "chained": step.chained,
                "rewrite": step.rewrite.as_ref().map(|rw| json!({
                    "equation": rw.equation.name,
                    "before_key": key_digest(&rw.before_key),
                    "after_key": key_digest(&rw.after_key),
                })),
            })).collect::<Vec<_>>(),
            "conclusions": self.conclusions.to_json(),
        })
    }
}

fn require_family<'m, A: ScalarAlgebra>(
    m: &'m ModelT<A>,
    name: &str,
    expected: FamilyKind,
) -> Result<&'m NaturalFamily<A>, NogoError> {
    let fam = m
        .family(name)
        .ok_or_else(|| NogoError::UnknownFamily(name.to_string()))?;
    if fam.kind != expected {
        return Err(NogoError::KindMismatch {
            family: name.to_string(),
            expected,
            found: fam.kind,
        });
    }
    Ok(fam)
}

fn component<A: ScalarAlgebra>(
    m: &ModelT<A>,
    name: &str,
    w: &ObjectExpr,
) -> Result<Matrix<A>, NogoError> {
    m.family_component(name, w).ok_or_else(|| {
        NogoError::PreconditionUnmet(format!("family `{name}` has no component at {w}"))
    })
}

fn two_sided<A: ScalarAlgebra>(alg: &A, lhs: &Matrix<A>, rhs: &Matrix<A>) -> Option<String> {
    Some(format!(
        "left route =\n{}\nright route =\n{}",
        lhs.render(alg),
        rhs.render(alg)
    ))
}

fn scalar_samples<A: ScalarAlgebra>(alg: &A, counts_up_to: usize) -> Vec<A::Elem> {
    alg.enumerate()
        .unwrap_or_else(|| (0..=counts_up_to).map(|k| alg.from_count(k)).collect())
}

/// Checks that a diagonal family is a uniform copying structure: a
/// component at every base object, the trivial unit component, pair
/// components given by the interleaving of the factors, componentwise
/// coassociativity and cocommutativity, and naturality on the signature's
/// generators plus any caller supplied sample morphisms.
pub fn check_cloning_axioms<A: ScalarAlgebra>(
    m: &ModelT<A>,
    family: &str,
    samples: &[TypedTerm],
) -> Result<CheckReport, NogoError> {
    require_family(m, family, FamilyKind::Diagonal)?;
    let alg = m.alg().clone();
    let sig = m.signature().clone();
    let mut report = CheckReport::new(format!("copying axioms for `{family}`"));
    let bases: Vec<String> = sig.base_objects().to_vec();

    for b in &bases {
        let name = format!("component at {b} present");
        match m.family_component(family, &ObjectExpr::base(b)) {
            Some(c) => {
                let d = m.dim(b).unwrap_or(0);
                if c.rows() == d * d && c.cols() == d {
                    report.pass(name);
                } else {
                    report.fail(name, format!("shape {}x{}", c.rows(), c.cols()));
                }
            }
            None => report.fail(name, "missing"),
        }
    }
    if !report.passed() {
        return Ok(report);
    }

    let unit_c = component(m, family, &ObjectExpr::unit())?;
    let unit_ok = unit_c.equal(&Matrix::identity(1, &alg), &alg);
    report.push(
        "unit component is trivial",
        unit_ok,
        (!unit_ok).then(|| unit_c.render(&alg)),
    );

    let interleave = Permutation::from_one_based(&[1, 3, 2, 4]).unwrap();
    for x in &bases {
        for y in &bases {
            let (wx, wy) = (ObjectExpr::base(x), ObjectExpr::base(y));
            let (dx, dy) = (m.dim(x).unwrap(), m.dim(y).unwrap());
            let cx = component(m, family, &wx)?;
            let cy = component(m, family, &wy)?;
            let route = perm_matrix(&interleave, &[dx, dx, dy, dy], &alg)
                .mul(&cx.kron(&cy, &alg), &alg);
            let direct = component(m, family, &wx.tensor(&wy))?;
            let ok = route.equal(&direct, &alg);
            report.push(
                format!("pair component at {x} * {y} interleaves"),
                ok,
                (!ok).then(|| two_sided(&alg, &route, &direct)).flatten(),
            );
        }
    }

    for b in &bases {
        let w = ObjectExpr::base(b);
        let d = m.dim(b).unwrap();
        let delta = component(m, family, &w)?;
        let id = Matrix::identity(d, &alg);
        let left = delta.kron(&id, &alg).mul(&delta, &alg);
        let right = id.kron(&delta, &alg).mul(&delta, &alg);
        let ok = left.equal(&right, &alg);
        report.push(
            format!("coassociativity at {b}"),
            ok,
            (!ok).then(|| two_sided(&alg, &left, &right)).flatten(),
        );
        let swapped = m.sym_matrix(&w, &w)?.mul(&delta, &alg);
        let ok = swapped.equal(&delta, &alg);
        report.push(
            format!("cocommutativity at {b}"),
            ok,
            (!ok).then(|| two_sided(&alg, &swapped, &delta)).flatten(),
        );
    }

    let mut targets: Vec<(String, TypedTerm)> = Vec::new();
    for g in sig.generators() {
        targets.push((
            format!("generator {}", g.name),
            typecheck(&Term::Gen(g.name.clone()), &sig)?,
        ));
    }
    for (i, s) in samples.iter().enumerate() {
        targets.push((format!("sample {i}"), s.clone()));
    }
    for (label, tt) in &targets {
        let mf = m.eval(tt)?;
        let cd = component(m, family, tt.dom())?;
        let cc = component(m, family, tt.cod())?;
        let lhs = cc.mul(&mf, &alg);
        let rhs = mf.kron(&mf, &alg).mul(&cd, &alg);
        let ok = lhs.equal(&rhs, &alg);
        report.push(
            format!("naturality at {label}"),
            ok,
            (!ok).then(|| two_sided(&alg, &lhs, &rhs)).flatten(),
        );
    }
    Ok(report)
}

/// The unit component of a diagonal family is forced to be the canonical
/// isomorphism `I -> I (x) I`, which in strict form is the 1x1 identity.
pub fn delta_unit_lemma_check<A: ScalarAlgebra>(
    m: &ModelT<A>,
    family: &str,
) -> Result<CheckReport, NogoError> {
    require_family(m, family, FamilyKind::Diagonal)?;
    let alg = m.alg().clone();
    let mut report = CheckReport::new(format!("unit component of `{family}`"));
    let unit_c = component(m, family, &ObjectExpr::unit())?;
    let ok = unit_c.equal(&Matrix::identity(1, &alg), &alg);
    report.push(
        "unit component equals the unit isomorphism",
        ok,
        (!ok).then(|| unit_c.render(&alg)),
    );
    Ok(report)
}

/// The two-cap exchange: `eta x eta` equals the same caps with the first
/// and third output factors exchanged. A uniform copying structure forces
/// this (`verify_cap_swap_proof` checks the faces); rewriting with it
/// collapses the symmetry (`derive_collapse`).
pub fn cap_swap_equation(a: &ObjectExpr, sig: &Arc<Signature>) -> Result<Equation, NogoError> {
    let caps = Term::tensor(Term::Unit(a.clone()), Term::Unit(a.clone()));
    let factors = [a.dual(), a.clone(), a.dual(), a.clone()];
    let perm = crate::term::perm_term_from_images(&[3, 2, 1, 4], &factors, sig)?;
    let lhs = typecheck(&caps, sig)?;
    let rhs = typecheck(&Term::compose(perm.into_term(), caps), sig)?;
    Ok(Equation::new("cap-swap", lhs, rhs)?)
}

/// Machine checks the faces behind the cap exchange for a state
/// `u : I -> A (x) B`, with `split` factors in the `A` half: the trivial
/// unit component, the naturality square at `u`, the interleaving of the
/// pair component, cocommutativity inserted on the left half, and the
/// exchange identity on `u (x) u` that the faces compose to.
pub fn verify_cap_swap_proof<A: ScalarAlgebra>(
    m: &ModelT<A>,
    family: &str,
    u: &TypedTerm,
    split: usize,
) -> Result<CheckReport, NogoError> {
    require_family(m, family, FamilyKind::Diagonal)?;
    if !u.dom().is_unit() {
        return Err(NogoError::PreconditionUnmet(format!(
            "`u` must be a state, it has domain {}",
            u.dom()
        )));
    }
    if split > u.cod().len() {
        return Err(NogoError::PreconditionUnmet(format!(
            "split {split} exceeds the {} factors of {}",
            u.cod().len(),
            u.cod()
        )));
    }
    let alg = m.alg().clone();
    let a_word = ObjectExpr::from_factors(u.cod().factors[..split].to_vec());
    let b_word = ObjectExpr::from_factors(u.cod().factors[split..].to_vec());
    let da = m.dim_word(&a_word)?;
    let db = m.dim_word(&b_word)?;
    let mu = m.eval(u)?;
    let mut report = CheckReport::new("cap exchange faces");

    let unit_c = component(m, family, &ObjectExpr::unit())?;
    let ok = unit_c.equal(&Matrix::identity(1, &alg), &alg);
    report.push("unit component is trivial", ok, (!ok).then(|| unit_c.render(&alg)));

    let cab = component(m, family, u.cod())?;
    let lhs = cab.mul(&mu, &alg);
    let rhs = mu.kron(&mu, &alg).mul(&unit_c, &alg);
    let ok = lhs.equal(&rhs, &alg);
    report.push(
        "naturality square at the state",
        ok,
        (!ok).then(|| two_sided(&alg, &lhs, &rhs)).flatten(),
    );

    let ca = component(m, family, &a_word)?;
    let cb = component(m, family, &b_word)?;
    let inter = perm_matrix(
        &Permutation::from_one_based(&[1, 3, 2, 4]).unwrap(),
        &[da, da, db, db],
        &alg,
    );
    let route = inter.mul(&ca.kron(&cb, &alg), &alg);
    let ok = route.equal(&cab, &alg);
    report.push(
        "pair component interleaves",
        ok,
        (!ok).then(|| two_sided(&alg, &route, &cab)).flatten(),
    );

    let halves = ca.kron(&cb, &alg);
    let inserted = m
        .sym_matrix(&a_word, &a_word)?
        .kron(&Matrix::identity(db * db, &alg), &alg)
        .mul(&halves, &alg);
    let ok = inserted.equal(&halves, &alg);
    report.push(
        "cocommutativity on the left half",
        ok,
        (!ok).then(|| two_sided(&alg, &inserted, &halves)).flatten(),
    );

    let uu = mu.kron(&mu, &alg);
    let swap = perm_matrix(
        &Permutation::from_one_based(&[3, 2, 1, 4]).unwrap(),
        &[da, db, da, db],
        &alg,
    );
    let swapped = swap.mul(&uu, &alg);
    let ok = swapped.equal(&uu, &alg);
    report.push(
        "doubled state is exchange invariant",
        ok,
        (!ok).then(|| two_sided(&alg, &swapped, &uu)).flatten(),
    );
    Ok(report)
}

/// `(eps x eps x 1) . perm . (1 x x)`: closes a four-leg cap state
/// `x : I -> a* a a* a` against two inputs, pairing input `k` with the
/// `k`-th starred leg.
fn close_caps(
    x: &TypedTerm,
    a: &ObjectExpr,
    sig: &Arc<Signature>,
) -> Result<TypedTerm, NogoError> {
    let aa = a.tensor(a);
    let stage1 = Term::tensor(Term::Id(aa.clone()), x.term().clone());
    let factors = [
        a.clone(),
        a.clone(),
        a.dual(),
        a.clone(),
        a.dual(),
        a.clone(),
    ];
    let perm = crate::term::perm_term_from_images(&[1, 3, 2, 5, 4, 6], &factors, sig)?;
    let stage3 = Term::tensor(
        Term::tensor(Term::Counit(a.clone()), Term::Counit(a.clone())),
        Term::Id(aa),
    );
    Ok(typecheck(
        &Term::compose(stage3, Term::compose(perm.into_term(), stage1)),
        sig,
    )?)
}

/// The copying collapse, carried out over a free signature with one base
/// object and one endomorphism generator `f`. Assuming the two-cap
/// exchange (which a uniform copying structure forces), a first recorded
/// rewrite collapses the symmetry to the identity, and a second collapses
/// `f` to its trace times the identity. A final note separates symmetry
/// from identity in a two dimensional matrix model, so no uniform copying
/// structure exists there.
pub fn derive_collapse(base: &str) -> Result<DerivationReport, NogoError> {
    let mut sig = Signature::new(false);
    sig.add_base_object(base)
        .map_err(|e| NogoError::PreconditionUnmet(e.to_string()))?;
    sig.add_generator("f", ObjectExpr::base(base), ObjectExpr::base(base))
        .map_err(|e| NogoError::PreconditionUnmet(e.to_string()))?;
    let sig = Arc::new(sig);
    let a = ObjectExpr::base(base);
    let aa = a.tensor(&a);
    let id_aa = typecheck(&Term::Id(aa.clone()), &sig)?;
    let sym_aa = typecheck(&Term::Sym(a.clone(), a.clone()), &sig)?;

    let mut steps = Vec::new();
    let mut conclusions = CheckReport::new("collapse conclusions");

    let caps_eq = cap_swap_equation(&a, &sig)?;
    let caps_distinct =
        canonical_key(&caps_eq.lhs_diagram()) != canonical_key(&caps_eq.rhs_diagram());
    conclusions.push(
        "assumed equation relates distinct diagrams",
        caps_distinct,
        (!caps_distinct).then(|| "both sides share a canonical key".to_string()),
    );
    steps.push(DerivationStep::note(
        "assume the two-cap exchange",
        "a uniform copying structure forces `cap-swap`: doubling the cap state and \
         exchanging the first and third output factors leaves it fixed",
    ));

    let closed_plain = close_caps(&caps_eq.lhs, &a, &sig)?;
    let host = to_diagram(&closed_plain);
    let closes_ok = canonical_key(&host) == term_key(&id_aa);
    conclusions.push(
        "closing context straightens the plain caps to the identity",
        closes_ok,
        (!closes_ok).then(|| key_digest(&canonical_key(&host))),
    );
    let site = enumerate_matches(&host, &caps_eq.lhs_diagram())
        .into_iter()
        .next()
        .ok_or_else(|| {
            NogoError::PreconditionUnmet("no cap match inside the closing context".to_string())
        })?;
    let after = apply_equation(&host, &caps_eq, &site)?;
    let sym_reached = canonical_key(&after) == term_key(&sym_aa);
    conclusions.push(
        "exchanging the caps inside the context yields the symmetry",
        sym_reached,
        (!sym_reached).then(|| key_digest(&canonical_key(&after))),
    );
    steps.push(DerivationStep::rewrite(
        "exchange the caps inside the closing context",
        RewriteData::record(caps_eq.clone(), site, host, after),
        false,
    ));

    let sigma_eq = Equation::new("symmetry-collapse", sym_aa, id_aa)?;
    steps.push(DerivationStep::note(
        "conclude the symmetry collapses",
        "the context output is the identity on one side and the symmetry on the \
         other, so the symmetry equals the identity",
    ));

    let f_t = typecheck(&Term::Gen("f".to_string()), &sig)?;
    let twist = typecheck(
        &Term::compose(
            Term::Sym(a.clone(), a.clone()),
            Term::tensor(Term::Id(a.clone()), Term::Gen("f".to_string())),
        ),
        &sig,
    )?;
    let looped = trace_term(&twist, &a)?;
    let host2 = to_diagram(&looped);
    let twist_ok = canonical_key(&host2) == term_key(&f_t);
    conclusions.push(
        "the traced twist straightens to the generator",
        twist_ok,
        (!twist_ok).then(|| key_digest(&canonical_key(&host2))),
    );
    let site2 = enumerate_matches(&host2, &sigma_eq.lhs_diagram())
        .into_iter()
        .next()
        .ok_or_else(|| {
            NogoError::PreconditionUnmet("no symmetry match in the traced twist".to_string())
        })?;
    let after2 = apply_equation(&host2, &sigma_eq, &site2)?;
    let scaled = typecheck(
        &Term::tensor(trace_term(&f_t, &a)?.into_term(), Term::Id(a.clone())),
        &sig,
    )?;
    let scaled_ok = canonical_key(&after2) == term_key(&scaled);
    conclusions.push(
        "collapsing the symmetry turns the generator into its trace times the identity",
        scaled_ok,
        (!scaled_ok).then(|| key_digest(&canonical_key(&after2))),
    );
    steps.push(DerivationStep::rewrite(
        "collapse the symmetry under the trace",
        RewriteData::record(sigma_eq, site2, host2, after2),
        false,
    ));

    // Modus tollens: a two dimensional model keeps symmetry and identity
    // apart, so it cannot carry a uniform copying structure.
    let dims = BTreeMap::from([(base.to_string(), 2usize)]);
    let gens = BTreeMap::from([(
        "f".to_string(),
        Matrix::from_entries(2, 2, [1, 2, 3, 4].map(rat).to_vec()).unwrap(),
    )]);
    let model = ModelT::new(ModelKind::FdVec, RatAlg, sig.clone(), dims, gens)
        .map_err(|e| NogoError::PreconditionUnmet(e.to_string()))?;
    let sym_m = m_eval(&model, &Term::Sym(a.clone(), a.clone()), &sig)?;
    let id_m = Matrix::identity(4, &RatAlg);
    let separated = !sym_m.equal(&id_m, &RatAlg);
    conclusions.push(
        "a two dimensional model separates symmetry from identity",
        separated,
        separated.then(|| "so that model admits no uniform copying structure".to_string()),
    );
    steps.push(DerivationStep::note(
        "read the collapse contrapositively",
        "any model where the symmetry differs from the identity, such as pairs of \
         two dimensional spaces, admits no uniform copying structure",
    ));

    Ok(DerivationReport {
        title: "copying collapse derivation".to_string(),
        steps,
        conclusions,
    })
}

fn m_eval<A: ScalarAlgebra>(
    m: &ModelT<A>,
    t: &Term,
    sig: &Arc<Signature>,
) -> Result<Matrix<A>, NogoError> {
    Ok(m.eval(&typecheck(t, sig)?)?)
}

/// In a model whose diagonal family satisfies the copying axioms, every
/// endomorphism equals its trace times the identity, and tracing retracts
/// the scalar multiples of the identity onto the scalars.
pub fn cloning_collapse_check<A: ScalarAlgebra>(
    m: &ModelT<A>,
    family: &str,
    f: &TypedTerm,
) -> Result<CheckReport, NogoError> {
    let axioms = check_cloning_axioms(m, family, &[])?;
    if !axioms.passed() {
        let failing: Vec<String> = axioms.failures().map(|i| i.condition.clone()).collect();
        return Err(NogoError::PreconditionUnmet(format!(
            "copying axioms do not hold for `{family}`: {}",
            failing.join(", ")
        )));
    }
    if f.dom() != f.cod() {
        return Err(NogoError::PreconditionUnmet(format!(
            "`f` must be an endomorphism, it is {} -> {}",
            f.dom(),
            f.cod()
        )));
    }
    let alg = m.alg().clone();
    let mf = m.eval(f)?;
    let d = m.dim_word(f.dom())?;
    let id = Matrix::identity(d, &alg);
    let tr = mf.trace(&alg);
    let scaled = id.scale(&tr, &alg);
    let ok = mf.equal(&scaled, &alg);
    let mut report = CheckReport::new(format!("collapse under `{family}`"));
    report.push(
        "endomorphism equals its trace times the identity",
        ok,
        (!ok).then(|| two_sided(&alg, &mf, &scaled)).flatten(),
    );
    let mut retract_ok = true;
    let mut witness = None;
    for s in scalar_samples(&alg, 4) {
        let traced = id.scale(&s, &alg).trace(&alg);
        if !alg.equal(&traced, &s) {
            retract_ok = false;
            witness = Some(format!(
                "s = {}, trace of s times the identity = {}",
                alg.format(&s),
                alg.format(&traced)
            ));
            break;
        }
    }
    report.push(
        "tracing retracts scalar multiples of the identity",
        retract_ok,
        witness,
    );
    Ok(report)
}

/// Outcome of the scalar idempotence check. A non idempotent scalar is a
/// certificate that the model admits no uniform copying structure.
pub struct IdempotenceOutcome<A: ScalarAlgebra> {
    pub report: CheckReport,
    pub witness: Option<A::Elem>,
}

/// Uniform copying forces every scalar to be idempotent: naturality of
/// the family at a scalar squares it against the trivial unit component.
/// Scalars are enumerated when the carrier is finite, else sampled from
/// counting scalars.
pub fn idempotent_scalars_check<A: ScalarAlgebra>(
    m: &ModelT<A>,
    family: &str,
) -> Result<IdempotenceOutcome<A>, NogoError> {
    require_family(m, family, FamilyKind::Diagonal)?;
    let alg = m.alg().clone();
    let unit_c = component(m, family, &ObjectExpr::unit())?;
    let mut report = CheckReport::new("scalar idempotence");
    let unit_ok = unit_c.equal(&Matrix::identity(1, &alg), &alg);
    report.push(
        "unit component is trivial",
        unit_ok,
        (!unit_ok).then(|| unit_c.render(&alg)),
    );
    let mut witness: Option<A::Elem> = None;
    for s in scalar_samples(&alg, 4) {
        let sm = Matrix::from_entries(1, 1, vec![s.clone()]).unwrap();
        let direct = unit_c.mul(&sm, &alg);
        let doubled = sm.kron(&sm, &alg).mul(&unit_c, &alg);
        let ok = direct.equal(&doubled, &alg);
        report.push(
            format!("naturality at scalar {}", alg.format(&s)),
            ok,
            (!ok).then(|| {
                format!(
                    "{} squares to {}",
                    alg.format(&s),
                    alg.format(doubled.scalar_value())
                )
            }),
        );
        if !ok && witness.is_none() {
            witness = Some(s);
        }
    }
    if let Some(w) = &witness {
        report.push(
            "non idempotent scalar certifies no uniform copying",
            true,
            Some(format!(
                "scalar {} is not idempotent, so these scalars admit no uniform copying structure",
                alg.format(w)
            )),
        );
    }
    Ok(IdempotenceOutcome { report, witness })
}

/// Diagonal plus projection families make every tensor a product exactly
/// when the projection triangles, the pairing square, and naturality of
/// all three families hold. Triangles and squares run over the base
/// objects; naturality runs over the generators, pairing each generator
/// with identities on both sides.
pub fn product_structure_check<A: ScalarAlgebra>(
    m: &ModelT<A>,
    delta: &str,
    p: &str,
    q: &str,
) -> Result<CheckReport, NogoError> {
    require_family(m, delta, FamilyKind::Diagonal)?;
    require_family(m, p, FamilyKind::ProjLeft)?;
    require_family(m, q, FamilyKind::ProjRight)?;
    let alg = m.alg().clone();
    let sig = m.signature().clone();
    let mut report = CheckReport::new("product structure");
    let bases: Vec<String> = sig.base_objects().to_vec();

    let proj = |name: &str, a: &ObjectExpr, b: &ObjectExpr| -> Result<Matrix<A>, NogoError> {
        m.projection(name, a, b).ok_or_else(|| {
            NogoError::PreconditionUnmet(format!(
                "projection `{name}` unavailable at ({a}, {b})"
            ))
        })
    };

    for x in &bases {
        let w = ObjectExpr::base(x);
        let id = Matrix::identity(m.dim(x).unwrap(), &alg);
        let dc = component(m, delta, &w)?;
        let left = proj(p, &w, &w)?.mul(&dc, &alg);
        let ok = left.equal(&id, &alg);
        report.push(
            format!("left projection triangle at {x}"),
            ok,
            (!ok).then(|| two_sided(&alg, &left, &id)).flatten(),
        );
        let right = proj(q, &w, &w)?.mul(&dc, &alg);
        let ok = right.equal(&id, &alg);
        report.push(
            format!("right projection triangle at {x}"),
            ok,
            (!ok).then(|| two_sided(&alg, &right, &id)).flatten(),
        );
    }

    for x in &bases {
        for y in &bases {
            let (wx, wy) = (ObjectExpr::base(x), ObjectExpr::base(y));
            let wxy = wx.tensor(&wy);
            let paired = proj(p, &wx, &wy)?
                .kron(&proj(q, &wx, &wy)?, &alg)
                .mul(&component(m, delta, &wxy)?, &alg);
            let id = Matrix::identity(m.dim_word(&wxy)?, &alg);
            let ok = paired.equal(&id, &alg);
            report.push(
                format!("pairing square at {x} * {y}"),
                ok,
                (!ok).then(|| two_sided(&alg, &paired, &id)).flatten(),
            );
        }
    }

    for g in sig.generators() {
        let tt = typecheck(&Term::Gen(g.name.clone()), &sig)?;
        let mf = m.eval(&tt)?;
        let cd = component(m, delta, &g.dom)?;
        let cc = component(m, delta, &g.cod)?;
        let lhs = cc.mul(&mf, &alg);
        let rhs = mf.kron(&mf, &alg).mul(&cd, &alg);
        let ok = lhs.equal(&rhs, &alg);
        report.push(
            format!("diagonal natural at {}", g.name),
            ok,
            (!ok).then(|| two_sided(&alg, &lhs, &rhs)).flatten(),
        );
    }

    // Projection naturality over (generator, identity) pairs in both
    // slots: p_{X', Y} . (f x 1) = f . p_{X, Y} and its mirror images.
    for g in sig.generators() {
        let tt = typecheck(&Term::Gen(g.name.clone()), &sig)?;
        let mf = m.eval(&tt)?;
        for b in &bases {
            let wb = ObjectExpr::base(b);
            let idb = Matrix::identity(m.dim(b).unwrap(), &alg);
            let cases: [(&str, bool, &str); 4] =
                [(p, true, "left"), (p, false, "left"), (q, true, "right"), (q, false, "right")];
            for (fam_name, gen_first, side) in cases {
                let (label, lhs, rhs) = if gen_first {
                    let before = proj(fam_name, &g.dom, &wb)?;
                    let after = proj(fam_name, &g.cod, &wb)?;
                    let moved = after.mul(&mf.kron(&idb, &alg), &alg);
                    let kept = if side == "left" { mf.mul(&before, &alg) } else { idb.mul(&before, &alg) };
                    (format!("{side} projection natural at ({}, id[{b}])", g.name), moved, kept)
                } else {
                    let before = proj(fam_name, &wb, &g.dom)?;
                    let after = proj(fam_name, &wb, &g.cod)?;
                    let moved = after.mul(&idb.kron(&mf, &alg), &alg);
                    let kept = if side == "left" { idb.mul(&before, &alg) } else { mf.mul(&before, &alg) };
                    (format!("{side} projection natural at (id[{b}], {})", g.name), moved, kept)
                };
                let ok = lhs.equal(&rhs, &alg);
                report.push(
                    label,
                    ok,
                    (!ok).then(|| two_sided(&alg, &lhs, &rhs)).flatten(),
                );
            }
        }
    }
    Ok(report)
}

/// A morphism breaking the naturality square of a family.
#[derive(Clone, Debug)]
pub struct NaturalityWitness<A: ScalarAlgebra> {
    pub description: String,
    pub dom: ObjectExpr,
    pub cod: ObjectExpr,
    pub morphism: Matrix<A>,
    /// Component at the codomain composed with the morphism.
    pub lhs: Matrix<A>,
    /// Transformed morphism composed with the component at the domain.
    pub rhs: Matrix<A>,
}

impl<A: ScalarAlgebra> NaturalityWitness<A> {
    pub fn render(&self, alg: &A) -> String {
        format!(
            "{} : {} -> {}\nmorphism =\n{}\ncomponent . morphism =\n{}\ntransformed . component =\n{}",
            self.description,
            self.dom,
            self.cod,
            self.morphism.render(alg),
            self.lhs.render(alg),
            self.rhs.render(alg)
        )
    }
}

/// Budgeted search for a naturality counterexample. Candidates go in a
/// fixed order: generators, composable generator pairs, deterministic
/// states (zero, basis vectors, all ones), then seeded random states; the
/// budget counts candidates tested. `None` means no counterexample within
/// the budget, which proves nothing.
pub fn find_naturality_counterexample<A: ScalarAlgebra>(
    m: &ModelT<A>,
    family: &str,
    budget: usize,
    seed: u64,
) -> Result<Option<NaturalityWitness<A>>, NogoError> {
    let fam = m
        .family(family)
        .ok_or_else(|| NogoError::UnknownFamily(family.to_string()))?;
    let kind = fam.kind;
    let alg = m.alg().clone();
    let sig = m.signature().clone();

    let test = |description: String,
                dom: ObjectExpr,
                cod: ObjectExpr,
                mat: Matrix<A>|
     -> Result<Option<NaturalityWitness<A>>, NogoError> {
        let cd = component(m, family, &dom)?;
        let cc = component(m, family, &cod)?;
        let (lhs, rhs) = match kind {
            FamilyKind::Diagonal => (
                cc.mul(&mat, &alg),
                mat.kron(&mat, &alg).mul(&cd, &alg),
            ),
            // Row families are constant in the morphism direction.
            _ => (cc.mul(&mat, &alg), cd),
        };
        if lhs.equal(&rhs, &alg) {
            Ok(None)
        } else {
            Ok(Some(NaturalityWitness { description, dom, cod, morphism: mat, lhs, rhs }))
        }
    };

    let mut tested = 0usize;
    macro_rules! try_candidate {
        ($desc:expr, $dom:expr, $cod:expr, $mat:expr) => {
            if tested >= budget {
                return Ok(None);
            }
            tested += 1;
            if let Some(w) = test($desc, $dom, $cod, $mat)? {
                return Ok(Some(w));
            }
        };
    }

    let gens: Vec<_> = sig.generators().cloned().collect();
    for g in &gens {
        let mat = m.generator_matrix(&g.name).ok_or_else(|| {
            NogoError::PreconditionUnmet(format!("generator `{}` has no matrix", g.name))
        })?;
        try_candidate!(
            format!("generator {}", g.name),
            g.dom.clone(),
            g.cod.clone(),
            mat.clone()
        );
    }
    for after in &gens {
        for before in &gens {
            if after.dom == before.cod {
                let ma = m.generator_matrix(&after.name).unwrap();
                let mb = m.generator_matrix(&before.name).unwrap();
                try_candidate!(
                    format!("composite {} . {}", after.name, before.name),
                    before.dom.clone(),
                    after.cod.clone(),
                    ma.mul(mb, &alg)
                );
            }
        }
    }
    let bases: Vec<String> = sig.base_objects().to_vec();
    for b in &bases {
        let w = ObjectExpr::base(b);
        let d = m.dim(b).unwrap();
        try_candidate!(
            format!("zero state of {b}"),
            ObjectExpr::unit(),
            w.clone(),
            Matrix::zeros(d, 1, &alg)
        );
        for i in 0..d {
            let mut e = Matrix::zeros(d, 1, &alg);
            e.set(i, 0, alg.one());
            try_candidate!(format!("basis state {i} of {b}"), ObjectExpr::unit(), w.clone(), e);
        }
        try_candidate!(
            format!("all ones state of {b}"),
            ObjectExpr::unit(),
            w.clone(),
            Matrix::filled(d, 1, alg.one())
        );
    }
    let mut rng = rng_from_seed(seed);
    let carrier = alg.enumerate();
    while tested < budget {
        let b = &bases[rng.gen_range(0..bases.len())];
        let d = m.dim(b).unwrap();
        let entries: Vec<A::Elem> = (0..d)
            .map(|_| match &carrier {
                Some(v) => v[rng.gen_range(0..v.len())].clone(),
                None => alg.from_count(rng.gen_range(0..3)),
            })
            .collect();
        let desc = format!(
            "random state [{}] of {b}",
            entries.iter().map(|e| alg.format(e)).collect::<Vec<_>>().join(", ")
        );
        let mat = Matrix::from_entries(d, 1, entries).unwrap();
        try_candidate!(desc, ObjectExpr::unit(), ObjectExpr::base(b), mat);
    }
    Ok(None)
}

/// `(x tensor 1_B) . (1_A tensor eta(B)) : A -> B`: recovers a morphism
/// from a point of `A (x) dual(B)` by bending the starred leg back up.
fn recovery_context(
    x: &TypedTerm,
    a: &ObjectExpr,
    b: &ObjectExpr,
    sig: &Arc<Signature>,
) -> Result<TypedTerm, NogoError> {
    Ok(typecheck(
        &Term::compose(
            Term::tensor(x.term().clone(), Term::Id(b.clone())),
            Term::tensor(Term::Id(a.clone()), Term::Unit(b.clone())),
        ),
        sig,
    )?)
}

/// The discarding collapse over a caller supplied signature: if a uniform
/// discarding structure existed, the coname of every morphism would equal
/// the discard point of its domain pair. For the first two parallel
/// generators, rewriting the first coname into the second through the
/// discard point, and replaying the same chain inside the recovery
/// context, derives that the two generators are equal.
pub fn deleting_collapse_derivation(
    sig: &Arc<Signature>,
) -> Result<DerivationReport, NogoError> {
    let gens: Vec<_> = sig.generators().cloned().collect();
    let mut pair = None;
    'outer: for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            if gens[i].dom == gens[j].dom && gens[i].cod == gens[j].cod {
                pair = Some((gens[i].clone(), gens[j].clone()));
                break 'outer;
            }
        }
    }
    let (gf, gg) = pair.ok_or_else(|| {
        NogoError::PreconditionUnmet(
            "signature has no two parallel generators to compare".to_string(),
        )
    })?;
    let (a, b) = (gf.dom.clone(), gf.cod.clone());

    let mut ext = (**sig).clone();
    let mut discard = "discard".to_string();
    while ext.generator(&discard).is_some() {
        discard.push('_');
    }
    ext.add_generator(&discard, a.tensor(&b.dual()), ObjectExpr::unit())
        .map_err(|e| NogoError::PreconditionUnmet(e.to_string()))?;
    let ext = Arc::new(ext);

    let f_t = typecheck(&Term::Gen(gf.name.clone()), &ext)?;
    let g_t = typecheck(&Term::Gen(gg.name.clone()), &ext)?;
    let d_t = typecheck(&Term::Gen(discard.clone()), &ext)?;
    let coname_f = coname_of(&f_t);
    let coname_g = coname_of(&g_t);
    let eq_f = Equation::new(format!("coname-{}-is-discard", gf.name), coname_f.clone(), d_t.clone())?;
    let eq_g = Equation::new(format!("coname-{}-is-discard", gg.name), coname_g.clone(), d_t.clone())?;

    let mut steps = Vec::new();
    let mut conclusions = CheckReport::new("discarding conclusions");

    let distinct = term_key(&coname_f) != term_key(&coname_g);
    conclusions.push(
        "the two conames are distinct diagrams",
        distinct,
        (!distinct).then(|| "conames already share a canonical key".to_string()),
    );
    steps.push(DerivationStep::note(
        "assume a uniform discarding structure",
        format!(
            "naturality of discarding at any morphism makes its coname the discard \
             point `{discard}` of the domain pair; record that for `{}` and `{}`",
            gf.name, gg.name
        ),
    ));

    let bare_chain = |start: &TypedTerm| -> Result<(RewriteData, RewriteData), NogoError> {
        let host = to_diagram(start);
        let site = enumerate_matches(&host, &eq_f.lhs_diagram())
            .into_iter()
            .next()
            .ok_or_else(|| {
                NogoError::PreconditionUnmet("first coname does not occur".to_string())
            })?;
        let mid = apply_equation(&host, &eq_f, &site)?;
        let rev = eq_g.reversed();
        let site2 = enumerate_matches(&mid, &rev.lhs_diagram())
            .into_iter()
            .next()
            .ok_or_else(|| {
                NogoError::PreconditionUnmet("discard point does not occur".to_string())
            })?;
        let end = apply_equation(&mid, &rev, &site2)?;
        Ok((
            RewriteData::record(eq_f.clone(), site, host, mid.clone()),
            RewriteData::record(rev, site2, mid, end),
        ))
    };

    let (rw1, rw2) = bare_chain(&coname_f)?;
    let to_discard = rw1.after_key == term_key(&d_t);
    conclusions.push(
        "the first coname rewrites to the discard point",
        to_discard,
        (!to_discard).then(|| key_digest(&rw1.after_key)),
    );
    let to_second = rw2.after_key == term_key(&coname_g);
    conclusions.push(
        "the discard point rewrites back to the second coname",
        to_second,
        (!to_second).then(|| key_digest(&rw2.after_key)),
    );
    steps.push(DerivationStep::rewrite("discard the first coname", rw1, false));
    steps.push(DerivationStep::rewrite("resolve the discard as the second coname", rw2, true));

    let recovered_f = recovery_context(&coname_f, &a, &b, &ext)?;
    let restores = canonical_key(&to_diagram(&recovered_f)) == term_key(&f_t);
    conclusions.push(
        "the recovery context restores the generator from its coname",
        restores,
        (!restores).then(|| key_digest(&canonical_key(&to_diagram(&recovered_f)))),
    );
    steps.push(DerivationStep::note(
        "recover the morphisms from their conames",
        "bending the starred leg back up turns a coname into its morphism; run the \
         same two rewrites inside that context",
    ));

    let (ctx1, ctx2) = bare_chain(&recovered_f)?;
    let starts_at_f = ctx1.before_key == term_key(&f_t);
    conclusions.push(
        "the context chain starts at the first generator",
        starts_at_f,
        (!starts_at_f).then(|| key_digest(&ctx1.before_key)),
    );
    let ends_at_g = ctx2.after_key == term_key(&g_t);
    conclusions.push(
        "the context chain ends at the second generator",
        ends_at_g,
        (!ends_at_g).then(|| key_digest(&ctx2.after_key)),
    );
    let honest = term_key(&f_t) != term_key(&g_t);
    conclusions.push(
        "so two distinct generators are forced equal",
        honest && starts_at_f && ends_at_g,
        Some(format!(
            "`{}` and `{}` are distinct diagrams, yet the chain carries one to the other",
            gf.name, gg.name
        )),
    );
    steps.push(DerivationStep::rewrite("discard the coname inside the context", ctx1, false));
    steps.push(DerivationStep::rewrite("resolve it as the second generator", ctx2, true));

    Ok(DerivationReport {
        title: "discarding collapse derivation".to_string(),
        steps,
        conclusions,
    })
}

/// Conclusions and replay of `deleting_collapse_derivation` as one report.
pub fn deleting_collapse_check(sig: &Arc<Signature>) -> Result<CheckReport, NogoError> {
    let derivation = deleting_collapse_derivation(sig)?;
    let mut report = CheckReport::new("discarding collapse");
    report.absorb(derivation.conclusions.clone());
    report.absorb(derivation.replay()?);
    Ok(report)
}

// Dispatch wrappers over the model enum, for the command line driver.

pub fn model_cloning_axioms(m: &Model, family: &str) -> Result<CheckReport, NogoError> {
    with_model!(m, inner => check_cloning_axioms(inner, family, &[]))
}

pub fn model_delta_unit(m: &Model, family: &str) -> Result<CheckReport, NogoError> {
    with_model!(m, inner => delta_unit_lemma_check(inner, family))
}

pub fn model_idempotent_scalars(m: &Model, family: &str) -> Result<CheckReport, NogoError> {
    with_model!(m, inner => idempotent_scalars_check(inner, family).map(|o| o.report))
}

pub fn model_product_structure(
    m: &Model,
    delta: &str,
    p: &str,
    q: &str,
) -> Result<CheckReport, NogoError> {
    with_model!(m, inner => product_structure_check(inner, delta, p, q))
}

pub fn model_cap_swap(m: &Model, family: &str, base: &str) -> Result<CheckReport, NogoError> {
    with_model!(m, inner => {
        let sig = inner.signature().clone();
        let u = typecheck(&Term::Unit(ObjectExpr::base(base)), &sig)?;
        verify_cap_swap_proof(inner, family, &u, 1)
    })
}

/// Naturality search presented as a single check: passing means no
/// counterexample within the budget (which proves nothing), failing
/// carries the rendered witness.
pub fn model_naturality_search(
    m: &Model,
    family: &str,
    budget: usize,
    seed: u64,
) -> Result<CheckReport, NogoError> {
    let mut report = CheckReport::new(format!("naturality search for `{family}`"));
    with_model!(m, inner => {
        match find_naturality_counterexample(inner, family, budget, seed)? {
            None => report.push(
                format!("no naturality counterexample among {budget} candidates"),
                true,
                Some("a bounded search, not a proof".to_string()),
            ),
            Some(w) => report.push(
                "family is natural",
                false,
                Some(w.render(inner.alg())),
            ),
        }
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin::{finset_model, qubit_model, rel_model, semilattice_model};
    use crate::scalar::MeetAlg;

    #[test]
    fn semilattice_models_satisfy_the_copying_axioms() {
        for alg in lattices_up_to(5) {
            let m = semilattice_model(alg);
            let report = check_cloning_axioms(&m, "copy", &[]).unwrap();
            assert!(report.passed(), "{}", report.render_text());
        }
    }

    #[test]
    fn qubit_copy_fails_only_naturality() {
        let m = qubit_model();
        let report = check_cloning_axioms(&m, "copy", &[]).unwrap();
        assert!(!report.passed());
        for item in report.failures() {
            assert_eq!(item.condition, "naturality at generator Z");
        }
    }

    #[test]
    fn naturality_search_finds_the_phase_flip() {
        let m = qubit_model();
        let w = find_naturality_counterexample(&m, "copy", 10, 7).unwrap().unwrap();
        assert_eq!(w.description, "generator Z");
        // A nonzero discard row falls to a generator; the zero row only
        // to a state, since the unit component forces the value one.
        let mut m2 = m.clone();
        let row = |entries: [i64; 2]| NaturalFamily {
            kind: FamilyKind::Deleting,
            components: BTreeMap::from([(
                "Q".to_string(),
                Matrix::from_entries(1, 2, entries.map(rat).to_vec()).unwrap(),
            )]),
        };
        m2.add_family("erase", row([1, 1])).unwrap();
        m2.add_family("erase0", row([0, 0])).unwrap();
        let w2 = find_naturality_counterexample(&m2, "erase", 100, 7).unwrap().unwrap();
        assert_eq!(w2.description, "generator Z");
        let w3 = find_naturality_counterexample(&m2, "erase0", 100, 7).unwrap().unwrap();
        assert_eq!(w3.description, "zero state of Q");
    }

    #[test]
    fn cap_swap_equation_sides_evaluate_to_the_frozen_vectors() {
        let m = qubit_model();
        let sig = m.signature().clone();
        let eq = cap_swap_equation(&ObjectExpr::base("Q"), &sig).unwrap();
        let lhs = m.eval(&eq.lhs).unwrap();
        let rhs = m.eval(&eq.rhs).unwrap();
        assert_eq!((lhs.rows(), lhs.cols()), (16, 1));
        let ones = |mat: &Matrix<RatAlg>| -> Vec<usize> {
            (0..16).filter(|&r| *mat.get(r, 0) == rat(1)).collect()
        };
        assert_eq!(ones(&lhs), vec![0, 3, 12, 15]);
        assert_eq!(ones(&rhs), vec![0, 6, 9, 15]);
    }

    #[test]
    fn cap_swap_proof_passes_on_semilattices_and_fails_on_the_qubit() {
        let sl = semilattice_model(MeetAlg::two_chain());
        let sig = sl.signature().clone();
        let u = typecheck(&Term::Unit(ObjectExpr::base("L")), &sig).unwrap();
        let report = verify_cap_swap_proof(&sl, "copy", &u, 1).unwrap();
        assert!(report.passed(), "{}", report.render_text());

        let m = qubit_model();
        let sig = m.signature().clone();
        let u = typecheck(&Term::Unit(ObjectExpr::base("Q")), &sig).unwrap();
        let report = verify_cap_swap_proof(&m, "copy", &u, 1).unwrap();
        assert!(!report.passed());
        // Soundness: the conclusion face only fails because a premise does.
        let failed: Vec<&str> =
            report.failures().map(|i| i.condition.as_str()).collect();
        assert!(failed.contains(&"doubled state is exchange invariant"));
        assert!(failed.contains(&"naturality square at the state"));
    }

    #[test]
    fn collapse_derivation_conclusions_hold_and_replay() {
        let report = derive_collapse("A").unwrap();
        assert!(report.passed(), "{}", report.render_text());
        let replay = report.replay().unwrap();
        assert!(replay.passed(), "{}", replay.render_text());
        assert_eq!(report.steps.iter().filter(|s| s.rewrite.is_some()).count(), 2);
    }

    #[test]
    fn collapse_replay_detects_tampering() {
        let mut report = derive_collapse("A").unwrap();
        for step in &mut report.steps {
            if let Some(rw) = &mut step.rewrite {
                rw.after_key = rw.before_key.clone();
            }
        }
        assert!(!report.replay().unwrap().passed());
    }

    #[test]
    fn semilattice_collapse_holds_exhaustively_small() {
        for alg in lattices_up_to(4) {
            if alg.size() == 1 {
                continue;
            }
            let m = semilattice_model(alg);
            let sig = m.signature().clone();
            let f = typecheck(&Term::Gen("m".to_string()), &sig).unwrap();
            let report = cloning_collapse_check(&m, "copy", &f).unwrap();
            assert!(report.passed(), "{}", report.render_text());
        }
    }

    #[test]
    fn collapse_check_requires_the_axioms() {
        let m = qubit_model();
        let sig = m.signature().clone();
        let f = typecheck(&Term::Gen("Z".to_string()), &sig).unwrap();
        let err = cloning_collapse_check(&m, "copy", &f).unwrap_err();
        match err {
            NogoError::PreconditionUnmet(msg) => assert!(msg.contains("naturality")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn idempotence_passes_on_finite_carriers_and_fails_at_two() {
        let sl = semilattice_model(MeetAlg::two_chain());
        let out = idempotent_scalars_check(&sl, "copy").unwrap();
        assert!(out.report.passed());
        assert!(out.witness.is_none());

        let rel = rel_model(2);
        let out = idempotent_scalars_check(&rel, "copy").unwrap();
        assert!(out.report.passed());

        let m = qubit_model();
        let out = idempotent_scalars_check(&m, "copy").unwrap();
        assert_eq!(out.witness, Some(rat(2)));
        assert!(!out.report.passed());
        let text = out.report.render_text();
        assert!(text.contains("2 squares to 4"), "{text}");
        assert!(text.contains("no uniform copying"), "{text}");
    }

    #[test]
    fn product_structure_holds_for_functions_and_fails_for_relations() {
        let fs = finset_model();
        let report = product_structure_check(&fs, "copy", "take", "keep").unwrap();
        assert!(report.passed(), "{}", report.render_text());

        let rel = rel_model(2);
        let report = product_structure_check(&rel, "copy", "take", "keep").unwrap();
        assert!(!report.passed());
        let bad: Vec<String> = report.failures().map(|i| i.condition.clone()).collect();
        assert!(
            bad.iter().all(|c| c.contains("projection natural")),
            "unexpected failures: {bad:?}"
        );
        let witness = report.failures().next().unwrap().witness.as_ref().unwrap();
        assert!(witness.contains("route"), "{witness}");
    }

    #[test]
    fn deleting_collapse_equates_two_parallel_generators() {
        let mut sig = Signature::new(false);
        sig.add_base_object("A").unwrap();
        sig.add_base_object("B").unwrap();
        sig.add_generator("f", ObjectExpr::base("A"), ObjectExpr::base("B")).unwrap();
        sig.add_generator("g", ObjectExpr::base("A"), ObjectExpr::base("B")).unwrap();
        let sig = Arc::new(sig);
        let derivation = deleting_collapse_derivation(&sig).unwrap();
        assert!(derivation.passed(), "{}", derivation.render_text());
        assert!(derivation.replay().unwrap().passed());
        let report = deleting_collapse_check(&sig).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn deleting_collapse_needs_a_parallel_pair() {
        let mut sig = Signature::new(false);
        sig.add_base_object("A").unwrap();
        sig.add_generator("f", ObjectExpr::base("A"), ObjectExpr::base("A").tensor(&ObjectExpr::base("A"))).unwrap();
        let sig = Arc::new(sig);
        match deleting_collapse_derivation(&sig) {
            Err(NogoError::PreconditionUnmet(_)) => {}
            other => panic!("expected a precondition error, got {other:?}"),
        }
    }

    #[test]
    fn derivation_report_renders_and_serializes() {
        let report = derive_collapse("A").unwrap();
        let text = report.render_text();
        assert!(text.contains("rewrite with `cap-swap`"));
        let j = report.to_json();
        assert_eq!(j["conclusions"]["passed"], true);
        assert!(j["steps"].as_array().unwrap().len() >= 4);
    }
}
