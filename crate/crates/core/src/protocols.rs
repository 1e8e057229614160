//! Entanglement constructions: Bell states and costates, the
//! compositionality lemma behind map-state duality, and branchwise
//! verification of the teleportation protocol, both numerically and as a
//! replayable diagram derivation.

use crate::diagram::{
    apply_equation, canonical_key, enumerate_matches, term_key, to_diagram, DiagramError,
    Equation,
};
use crate::matrix::{try_inverse_orthogonal, Matrix};
use crate::model::{with_model, EvalError, Model, ModelT, TeleportBranch};
use crate::nogo::{DerivationReport, DerivationStep, RewriteData};
use crate::report::CheckReport;
use crate::scalar::{BoolAlg, CFloatAlg, CRatAlg, MeetAlg, RatAlg, ScalarAlgebra};
use crate::signature::{ObjectExpr, Signature};
use crate::term::{coname_of, name_of, typecheck, Term, TypeError, TypedTerm};
use serde_json::{json, Value};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("branch `{0}` is not invertible")]
    NotInvertible(String),
    #[error("model defines no teleport branches")]
    NoBranches,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// How to invert a square matrix over the algebra: Gauss-Jordan where
/// subtraction and division exist, the transpose criterion for booleans
/// and semilattices, where invertible means permutation.
pub trait InverseOracle: ScalarAlgebra + Sized {
    fn invert_matrix(&self, m: &Matrix<Self>) -> Option<Matrix<Self>>;
}

impl InverseOracle for BoolAlg {
    fn invert_matrix(&self, m: &Matrix<Self>) -> Option<Matrix<Self>> {
        try_inverse_orthogonal(m, self)
    }
}

impl InverseOracle for MeetAlg {
    fn invert_matrix(&self, m: &Matrix<Self>) -> Option<Matrix<Self>> {
        try_inverse_orthogonal(m, self)
    }
}

impl InverseOracle for RatAlg {
    fn invert_matrix(&self, m: &Matrix<Self>) -> Option<Matrix<Self>> {
        m.try_inverse(self)
    }
}

impl InverseOracle for CRatAlg {
    fn invert_matrix(&self, m: &Matrix<Self>) -> Option<Matrix<Self>> {
        m.try_inverse(self)
    }
}

impl InverseOracle for CFloatAlg {
    fn invert_matrix(&self, m: &Matrix<Self>) -> Option<Matrix<Self>> {
        m.try_inverse(self)
    }
}

/// Verdicts plus the evaluated composites and any global scalar factors,
/// kept separately: normalization is never folded into a pass or fail.
pub struct ProtocolReport<A: ScalarAlgebra> {
    pub checks: CheckReport,
    pub composites: Vec<(String, Matrix<A>)>,
    pub scalars: Vec<(String, A::Elem)>,
}

impl<A: ScalarAlgebra> ProtocolReport<A> {
    pub fn passed(&self) -> bool {
        self.checks.passed()
    }

    pub fn render_text(&self, alg: &A) -> String {
        let mut s = self.checks.render_text();
        for (label, m) in &self.composites {
            s.push_str(&format!("composite {label} =\n{}\n", m.render(alg)));
        }
        for (label, v) in &self.scalars {
            s.push_str(&format!("scalar factor {label} = {}\n", alg.format(v)));
        }
        s
    }

    pub fn to_json(&self, alg: &A) -> Value {
        let matrix_json = |m: &Matrix<A>| -> Value {
            Value::Array(
                (0..m.rows())
                    .map(|r| {
                        Value::Array(
                            (0..m.cols()).map(|c| json!(alg.format(m.get(r, c)))).collect(),
                        )
                    })
                    .collect(),
            )
        };
        json!({
            "checks": self.checks.to_json(),
            "composites": self.composites.iter()
                .map(|(l, m)| json!({"label": l, "matrix": matrix_json(m)}))
                .collect::<Vec<_>>(),
            "scalars": self.scalars.iter()
                .map(|(l, v)| json!({"label": l, "value": alg.format(v)}))
                .collect::<Vec<_>>(),
        })
    }
}

/// The Bell state and costate over a word: the transpose and co-transpose
/// of the identity, which in the strict setting are exactly the unit and
/// counit.
pub fn bell_pair_terms(
    a: &ObjectExpr,
    sig: &Arc<Signature>,
) -> Result<(TypedTerm, TypedTerm), TypeError> {
    let state = typecheck(&Term::Unit(a.clone()), sig)?;
    let costate = typecheck(&Term::Counit(a.clone()), sig)?;
    Ok((state, costate))
}

/// The bent composite `(coname(f) (x) 1) . (1 (x) name(g))` as a term, for
/// symbolic comparison against the direct composite `f ; g`.
pub fn bent_composite_term(
    f: &TypedTerm,
    g: &TypedTerm,
) -> Result<TypedTerm, TypeError> {
    let sig = f.signature().clone();
    let t = Term::compose(
        Term::tensor(coname_of(f).into_term(), Term::Id(g.cod().clone())),
        Term::tensor(Term::Id(f.dom().clone()), name_of(g).into_term()),
    );
    typecheck(&t, &sig)
}

/// Checks the compositionality lemma numerically: feeding `f`'s coname and
/// `g`'s name through a shared middle wire computes `g . f`, even though
/// `g`'s box sits before `f`'s in the reading order.
pub fn compositionality_lemma_check<A: ScalarAlgebra>(
    m: &ModelT<A>,
    f: &Matrix<A>,
    g: &Matrix<A>,
    a: &ObjectExpr,
    b: &ObjectExpr,
    c: &ObjectExpr,
) -> Result<ProtocolReport<A>, ProtocolError> {
    let alg = m.alg().clone();
    let (da, db, dc) = (m.dim_word(a)?, m.dim_word(b)?, m.dim_word(c)?);
    if f.rows() != db || f.cols() != da {
        return Err(ProtocolError::ShapeMismatch(format!(
            "f is {}x{}, expected {db}x{da} for {a} -> {b}",
            f.rows(),
            f.cols()
        )));
    }
    if g.rows() != dc || g.cols() != db {
        return Err(ProtocolError::ShapeMismatch(format!(
            "g is {}x{}, expected {dc}x{db} for {b} -> {c}",
            g.rows(),
            g.cols()
        )));
    }
    let eta = m.unit_matrix(b)?;
    let eps = m.counit_matrix(b)?;
    let id_b = Matrix::identity(db, &alg);
    // name(g) : I -> B* (x) C and coname(f) : A (x) B* -> I.
    let name_g = id_b.kron(g, &alg).mul(&eta, &alg);
    let coname_f = eps.mul(&f.kron(&id_b, &alg), &alg);
    let bent = coname_f
        .kron(&Matrix::identity(dc, &alg), &alg)
        .mul(&Matrix::identity(da, &alg).kron(&name_g, &alg), &alg);
    let direct = g.mul(f, &alg);
    let ok = bent.equal(&direct, &alg);
    let mut checks = CheckReport::new("compositionality lemma");
    checks.push(
        "bent composite equals the direct composite",
        ok,
        (!ok).then(|| {
            format!(
                "bent =\n{}\ndirect =\n{}",
                bent.render(&alg),
                direct.render(&alg)
            )
        }),
    );
    Ok(ProtocolReport {
        checks,
        composites: vec![("bent".to_string(), bent), ("direct".to_string(), direct)],
        scalars: Vec::new(),
    })
}

/// Branchwise teleportation: the input is tensored with a shared Bell
/// state, the measurement outcome enters as the coname of the branch map,
/// and the receiver applies the correction. Each branch must compose to
/// the identity on the teleported object; any global scalar factor is
/// recorded separately instead of being compared to one.
pub fn teleport_verify<A: InverseOracle>(
    m: &ModelT<A>,
    base: &str,
    branches: &[TeleportBranch<A>],
) -> Result<ProtocolReport<A>, ProtocolError> {
    let alg = m.alg().clone();
    let w = ObjectExpr::base(base);
    let d = m
        .dim(base)
        .ok_or_else(|| ProtocolError::ShapeMismatch(format!("unknown object {base}")))?;
    let eta = m.unit_matrix(&w)?;
    let eps = m.counit_matrix(&w)?;
    let id = Matrix::identity(d, &alg);
    let mut checks = CheckReport::new(format!("teleportation over {base}"));
    let mut composites = Vec::new();
    let mut scalars = Vec::new();
    for br in branches {
        for (name, mat) in [("branch", &br.branch), ("correction", &br.correction)] {
            if mat.rows() != d || mat.cols() != d {
                return Err(ProtocolError::ShapeMismatch(format!(
                    "{name} `{}` is {}x{}, expected {d}x{d}",
                    br.label,
                    mat.rows(),
                    mat.cols()
                )));
            }
        }
        if alg.invert_matrix(&br.branch).is_none() {
            return Err(ProtocolError::NotInvertible(br.label.clone()));
        }
        let coname = eps.mul(&br.branch.kron(&id, &alg), &alg);
        let before_correction = coname
            .kron(&id, &alg)
            .mul(&id.kron(&eta, &alg), &alg);
        let composite = br.correction.mul(&before_correction, &alg);
        let s = composite.get(0, 0).clone();
        let scalar_multiple = composite.equal(&id.scale(&s, &alg), &alg);
        if scalar_multiple {
            scalars.push((br.label.clone(), s.clone()));
        }
        let ok = composite.equal(&id, &alg);
        checks.push(
            format!("branch {} composes to the identity", br.label),
            ok,
            (!ok).then(|| {
                if scalar_multiple {
                    format!("composite is {} times the identity", alg.format(&s))
                } else {
                    format!(
                        "residual composite =\n{}\nbefore the correction =\n{}",
                        composite.render(&alg),
                        before_correction.render(&alg)
                    )
                }
            }),
        );
        composites.push((br.label.clone(), composite));
    }
    Ok(ProtocolReport { checks, composites, scalars })
}

/// Runs the model's stored teleport branches. The teleported object is
/// the one named in the spec, else the signature's sole base object.
/// Scalar ledger entries other than one are appended as passing items so
/// the witness trail keeps them visible.
pub fn model_teleport_verify(m: &Model) -> Result<CheckReport, ProtocolError> {
    with_model!(m, inner => {
        let spec = inner.teleport().ok_or(ProtocolError::NoBranches)?;
        let base = match &spec.object {
            Some(name) => name.clone(),
            None => {
                let bases = inner.signature().base_objects();
                if bases.len() == 1 {
                    bases[0].clone()
                } else {
                    return Err(ProtocolError::ShapeMismatch(
                        "teleport object unspecified and the signature has several bases"
                            .to_string(),
                    ));
                }
            }
        };
        let rep = teleport_verify(inner, &base, &spec.branches)?;
        let alg = inner.alg().clone();
        let mut checks = rep.checks;
        for (label, s) in &rep.scalars {
            if !alg.equal(s, &alg.one()) {
                checks.push(
                    format!("branch {label} carries a global scalar"),
                    true,
                    Some(alg.format(s)),
                );
            }
        }
        Ok(checks)
    })
}

/// The picture proof of teleportation over a free signature: a generic
/// branch map `b` with a formal inverse, both inverse equations on record.
/// The bend is absorbed by the diagram normal form, so the teleport
/// composite already normalizes to correction after branch; one recorded
/// rewrite with the left inverse equation reaches the identity.
pub fn teleport_derivation() -> Result<DerivationReport, ProtocolError> {
    let mut sig = Signature::new(false);
    sig.add_base_object("Q")
        .map_err(|e| ProtocolError::ShapeMismatch(e.to_string()))?;
    let q = ObjectExpr::base("Q");
    sig.add_generator("b", q.clone(), q.clone())
        .map_err(|e| ProtocolError::ShapeMismatch(e.to_string()))?;
    sig.add_generator("b_inv", q.clone(), q.clone())
        .map_err(|e| ProtocolError::ShapeMismatch(e.to_string()))?;
    let sig = Arc::new(sig);
    let b = typecheck(&Term::Gen("b".to_string()), &sig)?;
    let id_q = typecheck(&Term::Id(q.clone()), &sig)?;
    let corrected = typecheck(
        &Term::compose(Term::Gen("b_inv".to_string()), Term::Gen("b".to_string())),
        &sig,
    )?;
    let inv_left = Equation::new("inverse-left", corrected.clone(), id_q.clone())?;
    let inv_right = Equation::new(
        "inverse-right",
        typecheck(
            &Term::compose(Term::Gen("b".to_string()), Term::Gen("b_inv".to_string())),
            &sig,
        )?,
        id_q.clone(),
    )?;

    let teleport = typecheck(
        &Term::compose(
            Term::Gen("b_inv".to_string()),
            Term::compose(
                Term::tensor(coname_of(&b).into_term(), Term::Id(q.clone())),
                Term::tensor(Term::Id(q.clone()), Term::Unit(q.clone())),
            ),
        ),
        &sig,
    )?;

    let mut steps = Vec::new();
    let mut conclusions = CheckReport::new("teleportation conclusions");
    steps.push(DerivationStep::note(
        "set up the protocol",
        "input wire tensored with a Bell state, the branch map measured as a \
         coname, then the formal inverse as the correction; both inverse \
         equations are on record",
    ));

    let host = to_diagram(&teleport);
    let bent_ok = canonical_key(&host) == term_key(&corrected);
    conclusions.push(
        "the bend is absorbed: the composite normalizes to correction after branch",
        bent_ok,
        (!bent_ok).then(|| "normal form differs from b ; b_inv".to_string()),
    );
    let site = enumerate_matches(&host, &inv_left.lhs_diagram())
        .into_iter()
        .next()
        .ok_or_else(|| {
            ProtocolError::ShapeMismatch("no inverse pair in the teleport diagram".to_string())
        })?;
    let after = apply_equation(&host, &inv_left, &site)?;
    let identity_ok = canonical_key(&after) == term_key(&id_q);
    conclusions.push(
        "cancelling the inverse pair leaves the identity wire",
        identity_ok,
        (!identity_ok).then(|| "rewrite did not reach the identity".to_string()),
    );
    steps.push(DerivationStep::rewrite(
        "cancel the correction against the branch",
        RewriteData::record(inv_left, site, host, after),
        false,
    ));
    steps.push(DerivationStep::note(
        "read off the protocol",
        format!(
            "the output wire is the input wire: teleportation moves the state \
             across the shared pair (the right inverse `{}` was not needed)",
            inv_right.name
        ),
    ));

    Ok(DerivationReport {
        title: "teleportation derivation".to_string(),
        steps,
        conclusions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin::{qubit_model, rel_model, teleport_model};
    use crate::model::ModelKind;
    use crate::random::rng_from_seed;
    use crate::scalar::{crat, rat};
    use crate::signature::Signature;
    use rand::Rng;
    use std::collections::BTreeMap;

    #[test]
    fn bell_state_is_the_unnormalized_pair_vector() {
        let m = qubit_model();
        let sig = m.signature().clone();
        let q = ObjectExpr::base("Q");
        let (state, costate) = bell_pair_terms(&q, &sig).unwrap();
        let v = m.eval(&state).unwrap();
        assert_eq!((v.rows(), v.cols()), (4, 1));
        let expected: Vec<_> = [1, 0, 0, 1].map(rat).to_vec();
        assert_eq!(v.entries(), &expected[..]);

        // Costate against the bent state: the dimension as a scalar.
        let closed = typecheck(
            &Term::compose(
                costate.term().clone(),
                Term::compose(Term::Sym(q.dual(), q.clone()), state.term().clone()),
            ),
            &sig,
        )
        .unwrap();
        let s = m.eval(&closed).unwrap();
        assert_eq!(*s.scalar_value(), rat(2));

        // In relations the state is the pairing {(x, x)}.
        let rel = rel_model(2);
        let sig = rel.signature().clone();
        let (state, _) = bell_pair_terms(&ObjectExpr::base("X"), &sig).unwrap();
        let v = rel.eval(&state).unwrap();
        assert_eq!(v.entries(), &[true, false, false, true]);
    }

    #[test]
    fn compositionality_identity_case_is_the_identity() {
        let m = qubit_model();
        let q = ObjectExpr::base("Q");
        let id = Matrix::identity(2, &RatAlg);
        let rep = compositionality_lemma_check(&m, &id, &id, &q, &q, &q).unwrap();
        assert!(rep.passed());
        assert!(rep.composites[0].1.equal(&id, &RatAlg));
    }

    #[test]
    fn compositionality_matches_the_matrix_product_on_random_rationals() {
        let m = qubit_model();
        let q = ObjectExpr::base("Q");
        let mut rng = rng_from_seed(41);
        for _ in 0..25 {
            let entries = |rng: &mut rand_chacha::ChaCha8Rng| {
                Matrix::from_entries(
                    2,
                    2,
                    (0..4).map(|_| rat(rng.gen_range(-5..=5))).collect(),
                )
                .unwrap()
            };
            let f = entries(&mut rng);
            let g = entries(&mut rng);
            let rep = compositionality_lemma_check(&m, &f, &g, &q, &q, &q).unwrap();
            assert!(rep.passed(), "{}", rep.render_text(&RatAlg));
            let oracle = g.mul(&f, &RatAlg);
            assert!(rep.composites[0].1.equal(&oracle, &RatAlg));
        }
    }

    #[test]
    fn compositionality_holds_for_random_relations() {
        let m = rel_model(3);
        let x = ObjectExpr::base("X");
        let mut rng = rng_from_seed(42);
        for _ in 0..25 {
            let rand_rel = |rng: &mut rand_chacha::ChaCha8Rng| {
                Matrix::from_entries(3, 3, (0..9).map(|_| rng.gen_bool(0.4)).collect())
                    .unwrap()
            };
            let f = rand_rel(&mut rng);
            let g = rand_rel(&mut rng);
            let rep = compositionality_lemma_check(&m, &f, &g, &x, &x, &x).unwrap();
            assert!(rep.passed(), "{}", rep.render_text(&BoolAlg));
        }
    }

    #[test]
    fn compositionality_shape_mismatch_is_an_error() {
        let m = qubit_model();
        let q = ObjectExpr::base("Q");
        let bad = Matrix::from_entries(1, 2, vec![rat(1), rat(0)]).unwrap();
        let id = Matrix::identity(2, &RatAlg);
        match compositionality_lemma_check(&m, &bad, &id, &q, &q, &q) {
            Err(ProtocolError::ShapeMismatch(_)) => {}
            other => panic!("expected a shape error, got {:?}", other.map(|r| r.passed())),
        }
    }

    #[test]
    fn bent_composite_term_is_diagram_equal_to_the_direct_one() {
        let mut sig = Signature::new(false);
        sig.add_base_object("A").unwrap();
        sig.add_base_object("B").unwrap();
        sig.add_base_object("C").unwrap();
        sig.add_generator("f", ObjectExpr::base("A"), ObjectExpr::base("B")).unwrap();
        sig.add_generator("g", ObjectExpr::base("B"), ObjectExpr::base("C")).unwrap();
        let sig = Arc::new(sig);
        let f = typecheck(&Term::Gen("f".to_string()), &sig).unwrap();
        let g = typecheck(&Term::Gen("g".to_string()), &sig).unwrap();
        let bent = bent_composite_term(&f, &g).unwrap();
        let direct = typecheck(
            &Term::compose(Term::Gen("g".to_string()), Term::Gen("f".to_string())),
            &sig,
        )
        .unwrap();
        assert!(crate::diagram::equal_diagrams(&bent, &direct).unwrap());
    }

    #[test]
    fn four_bell_branches_teleport_exactly() {
        let m = teleport_model();
        let spec = m.teleport().unwrap().clone();
        let rep = teleport_verify(&m, "Q", &spec.branches).unwrap();
        assert!(rep.passed(), "{}", rep.render_text(&CRatAlg));
        assert_eq!(rep.composites.len(), 4);
        let id = Matrix::identity(2, &CRatAlg);
        for (_, c) in &rep.composites {
            assert!(c.equal(&id, &CRatAlg));
        }
        let labels: Vec<&str> = rep.scalars.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(labels, ["I", "X", "Z", "XZ"]);
        assert!(rep.scalars.iter().all(|(_, s)| *s == crat(1, 0)));
    }

    #[test]
    fn wrong_correction_fails_with_the_residual_witness() {
        let m = teleport_model();
        let z = Matrix::from_entries(2, 2, vec![crat(1, 0), crat(0, 0), crat(0, 0), crat(-1, 0)])
            .unwrap();
        let branches = vec![TeleportBranch {
            label: "Z-mis".to_string(),
            branch: z,
            correction: Matrix::identity(2, &CRatAlg),
        }];
        let rep = teleport_verify(&m, "Q", &branches).unwrap();
        assert!(!rep.passed());
        let witness = rep.checks.failures().next().unwrap().witness.as_ref().unwrap();
        assert!(witness.contains("before the correction"), "{witness}");
    }

    #[test]
    fn passes_exactly_when_correction_inverts_the_branch() {
        let m = teleport_model();
        let mut rng = rng_from_seed(43);
        let mut seen_pass = 0;
        let mut tried = 0;
        while seen_pass < 12 {
            tried += 1;
            assert!(tried < 500, "random invertible branches too rare");
            let b = Matrix::from_entries(
                2,
                2,
                (0..4).map(|_| crat(rng.gen_range(-3..=3), rng.gen_range(-3..=3))).collect(),
            )
            .unwrap();
            let Some(binv) = b.try_inverse(&CRatAlg) else { continue };
            seen_pass += 1;
            let good = vec![TeleportBranch {
                label: "r".to_string(),
                branch: b.clone(),
                correction: binv.clone(),
            }];
            assert!(teleport_verify(&m, "Q", &good).unwrap().passed());
            // Any correction with correction . branch != 1 must fail.
            let bad_corr = binv.scale(&crat(2, 0), &CRatAlg);
            let bad = vec![TeleportBranch {
                label: "r2".to_string(),
                branch: b,
                correction: bad_corr,
            }];
            let rep = teleport_verify(&m, "Q", &bad).unwrap();
            assert!(!rep.passed());
            // The doubled correction still leaves a scalar multiple.
            assert_eq!(rep.scalars.len(), 1);
            assert_eq!(rep.scalars[0].1, crat(2, 0));
        }
    }

    #[test]
    fn singular_branch_is_rejected() {
        let m = teleport_model();
        let branches = vec![TeleportBranch {
            label: "proj".to_string(),
            branch: Matrix::from_entries(
                2,
                2,
                vec![crat(1, 0), crat(0, 0), crat(0, 0), crat(0, 0)],
            )
            .unwrap(),
            correction: Matrix::identity(2, &CRatAlg),
        }];
        match teleport_verify(&m, "Q", &branches) {
            Err(ProtocolError::NotInvertible(label)) => assert_eq!(label, "proj"),
            other => panic!("expected NotInvertible, got {:?}", other.map(|r| r.passed())),
        }
    }

    #[test]
    fn relational_teleportation_uses_the_transpose_inverse() {
        let rel = rel_model(2);
        let swap =
            Matrix::<BoolAlg>::from_entries(2, 2, vec![false, true, true, false]).unwrap();
        let branches = vec![TeleportBranch {
            label: "swap".to_string(),
            branch: swap.clone(),
            correction: swap.clone(),
        }];
        assert!(teleport_verify(&rel, "X", &branches).unwrap().passed());

        // A non-permutation relation is not invertible.
        let total = Matrix::<BoolAlg>::filled(2, 2, true);
        let bad = vec![TeleportBranch {
            label: "total".to_string(),
            branch: total,
            correction: swap,
        }];
        match teleport_verify(&rel, "X", &bad) {
            Err(ProtocolError::NotInvertible(_)) => {}
            other => panic!("expected NotInvertible, got {:?}", other.map(|r| r.passed())),
        }
    }

    #[test]
    fn teleport_derivation_reaches_the_identity_and_replays() {
        let report = teleport_derivation().unwrap();
        assert!(report.passed(), "{}", report.render_text());
        let rewrites = report.steps.iter().filter(|s| s.rewrite.is_some()).count();
        assert!(rewrites <= 3, "used {rewrites} rewrites");
        assert!(report.replay().unwrap().passed());
    }

    #[test]
    fn doctored_units_surface_as_a_scalar_ledger_entry() {
        // Scaling the unit leaves a global factor that the ledger reports
        // while the verdict honestly fails.
        let mut sig = Signature::new(true);
        sig.add_base_object("Q").unwrap();
        let sig = Arc::new(sig);
        let dims = BTreeMap::from([("Q".to_string(), 2usize)]);
        let mut m =
            ModelT::new(ModelKind::FdVec, RatAlg, sig, dims, BTreeMap::new()).unwrap();
        assert!(m.scale_unit("Q", &rat(3)));
        let branches = vec![TeleportBranch {
            label: "I".to_string(),
            branch: Matrix::identity(2, &RatAlg),
            correction: Matrix::identity(2, &RatAlg),
        }];
        let rep = teleport_verify(&m, "Q", &branches).unwrap();
        assert!(!rep.passed());
        assert_eq!(rep.scalars, vec![("I".to_string(), rat(3))]);
        let witness = rep.checks.failures().next().unwrap().witness.as_ref().unwrap();
        assert!(witness.contains("3 times the identity"), "{witness}");
    }
}
