//! Ready made models: relations over a finite carrier, finite functions,
//! the rational qubit, and the one object semilattice model. The suites,
//! demos, and fuzz targets all run against these.

use super::{FamilyKind, ModelKind, ModelT, NaturalFamily, TeleportBranch, TeleportSpec};
use crate::matrix::Matrix;
use crate::scalar::{crat, rat, BoolAlg, CRatAlg, MeetAlg, RatAlg, ScalarAlgebra};
use crate::signature::{ObjectExpr, Signature};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Basis copy `e_k -> e_k (x) e_k` as a `d^2 x d` matrix.
fn basis_copy<A: ScalarAlgebra>(d: usize, alg: &A) -> Matrix<A> {
    let mut m = Matrix::zeros(d * d, d, alg);
    for k in 0..d {
        m.set(k * d + k, k, alg.one());
    }
    m
}

fn bool_matrix(rows: usize, cols: usize, bits: &[u8]) -> Matrix<BoolAlg> {
    Matrix::from_entries(rows, cols, bits.iter().map(|&b| b != 0).collect()).unwrap()
}

/// Relations over a carrier `X` of the given size. The generator
/// `r : X -> X` relates `i` to `i + 1`; it is single valued but not total,
/// which is exactly what breaks discard naturality here. Ships the basis
/// copy family `copy` and the discard projections `take` / `keep`.
pub fn rel_model(n: usize) -> ModelT<BoolAlg> {
    assert!(n >= 1);
    let mut sig = Signature::new(true);
    sig.add_base_object("X").unwrap();
    sig.add_generator("r", ObjectExpr::base("X"), ObjectExpr::base("X")).unwrap();
    let mut shift = Matrix::zeros(n, n, &BoolAlg);
    for i in 0..n.saturating_sub(1) {
        shift.set(i + 1, i, true);
    }
    let mut model = ModelT::new(
        ModelKind::Rel,
        BoolAlg,
        Arc::new(sig),
        BTreeMap::from([("X".to_string(), n)]),
        BTreeMap::from([("r".to_string(), shift)]),
    )
    .unwrap();
    let one_base = |m: Matrix<BoolAlg>| BTreeMap::from([("X".to_string(), m)]);
    model
        .add_family(
            "copy",
            NaturalFamily {
                kind: FamilyKind::Diagonal,
                components: one_base(basis_copy(n, &BoolAlg)),
            },
        )
        .unwrap();
    let ones = Matrix::filled(1, n, true);
    model
        .add_family(
            "take",
            NaturalFamily { kind: FamilyKind::ProjLeft, components: one_base(ones.clone()) },
        )
        .unwrap();
    model
        .add_family(
            "keep",
            NaturalFamily { kind: FamilyKind::ProjRight, components: one_base(ones) },
        )
        .unwrap();
    model
}

/// Finite functions: carriers `A` (two elements) and `B` (three), one
/// function each way, plus the basis copy and discard families, which
/// form genuine product structure in this model.
pub fn finset_model() -> ModelT<BoolAlg> {
    let mut sig = Signature::new(false);
    sig.add_base_object("A").unwrap();
    sig.add_base_object("B").unwrap();
    sig.add_generator("j", ObjectExpr::base("A"), ObjectExpr::base("B")).unwrap();
    sig.add_generator("k", ObjectExpr::base("B"), ObjectExpr::base("A")).unwrap();
    // j : a0 -> b1, a1 -> b2; k : b0, b1 -> a0, b2 -> a1.
    let j = bool_matrix(3, 2, &[0, 0, 1, 0, 0, 1]);
    let k = bool_matrix(2, 3, &[1, 1, 0, 0, 0, 1]);
    let mut model = ModelT::new(
        ModelKind::Finset,
        BoolAlg,
        Arc::new(sig),
        BTreeMap::from([("A".to_string(), 2), ("B".to_string(), 3)]),
        BTreeMap::from([("j".to_string(), j), ("k".to_string(), k)]),
    )
    .unwrap();
    let both = |ma: Matrix<BoolAlg>, mb: Matrix<BoolAlg>| {
        BTreeMap::from([("A".to_string(), ma), ("B".to_string(), mb)])
    };
    model
        .add_family(
            "copy",
            NaturalFamily {
                kind: FamilyKind::Diagonal,
                components: both(basis_copy(2, &BoolAlg), basis_copy(3, &BoolAlg)),
            },
        )
        .unwrap();
    model
        .add_family(
            "take",
            NaturalFamily {
                kind: FamilyKind::ProjLeft,
                components: both(Matrix::filled(1, 2, true), Matrix::filled(1, 3, true)),
            },
        )
        .unwrap();
    model
        .add_family(
            "keep",
            NaturalFamily {
                kind: FamilyKind::ProjRight,
                components: both(Matrix::filled(1, 2, true), Matrix::filled(1, 3, true)),
            },
        )
        .unwrap();
    model
}

/// The rational qubit: one base object `Q` of dimension two with the bit
/// flip and phase flip generators and the basis copy family `copy`.
pub fn qubit_model() -> ModelT<RatAlg> {
    let mut sig = Signature::new(true);
    sig.add_base_object("Q").unwrap();
    sig.add_generator("X", ObjectExpr::base("Q"), ObjectExpr::base("Q")).unwrap();
    sig.add_generator("Z", ObjectExpr::base("Q"), ObjectExpr::base("Q")).unwrap();
    let x = Matrix::from_entries(2, 2, [0, 1, 1, 0].map(rat).to_vec()).unwrap();
    let z = Matrix::from_entries(2, 2, [1, 0, 0, -1].map(rat).to_vec()).unwrap();
    let mut model = ModelT::new(
        ModelKind::FdVec,
        RatAlg,
        Arc::new(sig),
        BTreeMap::from([("Q".to_string(), 2)]),
        BTreeMap::from([("X".to_string(), x), ("Z".to_string(), z)]),
    )
    .unwrap();
    model
        .add_family(
            "copy",
            NaturalFamily {
                kind: FamilyKind::Diagonal,
                components: BTreeMap::from([("Q".to_string(), basis_copy(2, &RatAlg))]),
            },
        )
        .unwrap();
    model
}

/// The qubit over exact complex rationals, set up for teleportation: the
/// four Bell branches `I`, `X`, `Z`, `XZ` with their exact inverses as
/// corrections. `XZ` and `ZX` differ by a sign, so getting the inverse
/// right matters.
pub fn teleport_model() -> ModelT<CRatAlg> {
    let mut sig = Signature::new(true);
    sig.add_base_object("Q").unwrap();
    let m2 = |e: [i64; 4]| Matrix::from_entries(2, 2, e.map(|v| crat(v, 0)).to_vec()).unwrap();
    let mut model = ModelT::new(
        ModelKind::FdVec,
        CRatAlg,
        Arc::new(sig),
        BTreeMap::from([("Q".to_string(), 2)]),
        BTreeMap::new(),
    )
    .unwrap();
    let branch = |label: &str, b: Matrix<CRatAlg>, c: Matrix<CRatAlg>| TeleportBranch {
        label: label.to_string(),
        branch: b,
        correction: c,
    };
    model
        .set_teleport(TeleportSpec {
            object: Some("Q".to_string()),
            branches: vec![
                branch("I", m2([1, 0, 0, 1]), m2([1, 0, 0, 1])),
                branch("X", m2([0, 1, 1, 0]), m2([0, 1, 1, 0])),
                branch("Z", m2([1, 0, 0, -1]), m2([1, 0, 0, -1])),
                branch("XZ", m2([0, -1, 1, 0]), m2([0, 1, -1, 0])),
            ],
        })
        .unwrap();
    model
}

/// The one object model over a meet semilattice: a single base `L` of
/// dimension one, scalars the lattice elements, a generator `m` carrying
/// the bottom element when the lattice is nontrivial, and the canonical
/// diagonal family `copy`. Every such model satisfies the cloning axioms,
/// because meet is idempotent.
pub fn semilattice_model(alg: MeetAlg) -> ModelT<MeetAlg> {
    let mut sig = Signature::new(true);
    sig.add_base_object("L").unwrap();
    let bottom = (0..alg.size()).fold(alg.top(), |acc, x| alg.meet_of(acc, x));
    let mut gens = BTreeMap::new();
    if alg.size() > 1 {
        sig.add_generator("m", ObjectExpr::base("L"), ObjectExpr::base("L")).unwrap();
        gens.insert(
            "m".to_string(),
            Matrix::from_entries(1, 1, vec![bottom]).unwrap(),
        );
    }
    let copy = Matrix::from_entries(1, 1, vec![alg.one()]).unwrap();
    let mut model = ModelT::new(
        ModelKind::Semilattice,
        alg,
        Arc::new(sig),
        BTreeMap::from([("L".to_string(), 1)]),
        gens,
    )
    .unwrap();
    model
        .add_family(
            "copy",
            NaturalFamily {
                kind: FamilyKind::Diagonal,
                components: BTreeMap::from([("L".to_string(), copy)]),
            },
        )
        .unwrap();
    model
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{typecheck, Term};

    #[test]
    fn rel_generator_is_partial() {
        let m = rel_model(3);
        let r = m.generator_matrix("r").unwrap();
        // Last column empty: 2 has no successor.
        assert!((0..3).all(|i| !r.get(i, 2)));
        assert!(*r.get(1, 0));
    }

    #[test]
    fn finset_columns_are_functions() {
        // ModelT::new already validates single one columns; just make sure
        // construction succeeds and a composite evaluates.
        let m = finset_model();
        let t = typecheck(
            &Term::compose(Term::Gen("k".into()), Term::Gen("j".into())),
            m.signature(),
        )
        .unwrap();
        let kj = m.eval(&t).unwrap();
        // k(j(a0)) = k(b1) = a0, k(j(a1)) = k(b2) = a1: the identity.
        assert!(kj.equal(&Matrix::identity(2, &BoolAlg), &BoolAlg));
    }

    #[test]
    fn qubit_copy_duplicates_basis_states() {
        let m = qubit_model();
        let c = m.family_component("copy", &ObjectExpr::base("Q")).unwrap();
        assert_eq!((c.rows(), c.cols()), (4, 2));
        assert_eq!(c.get(0, 0), &rat(1));
        assert_eq!(c.get(3, 1), &rat(1));
        assert_eq!(c.get(1, 0), &rat(0));
    }

    #[test]
    fn semilattice_generator_is_bottom() {
        let alg = MeetAlg::two_chain();
        let m = semilattice_model(alg.clone());
        let t = typecheck(&Term::Gen("m".into()), m.signature()).unwrap();
        let v = m.eval(&t).unwrap();
        // The two chain is 0 < 1 with top = 1, so bottom is index 0.
        assert_eq!(alg.top(), 1);
        assert_eq!(*v.get(0, 0), 0);
        assert_eq!(m.dim("L"), Some(1));
    }
}
