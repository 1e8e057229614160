//! Models: interpretations of a signature by dimensions and matrices over a
//! scalar algebra. Terms evaluate functorially (composition to matrix
//! product, tensor to Kronecker product, units and counits to the stored
//! cup/cap vectors); diagrams evaluate by tensor contraction with closed
//! loops reported separately as scalar factors.
//!
//! The four kinds fix the flavour of model: `rel` (boolean matrices =
//! relations), `finset` (boolean matrices with exactly one 1 per column =
//! functions), `fdvec` (matrices over a field-like algebra), `semilattice`
//! (every object one-dimensional, scalars a finite meet semilattice).

pub mod builtin;
pub mod json;

use crate::diagram::{CyclePass, Diagram, LoopLabel, PortRef};
use crate::matrix::{decode, encode, perm_matrix, Matrix};
use crate::report::CheckReport;
use crate::scalar::{
    BoolAlg, CFloatAlg, CRatAlg, MeetAlg, NotASemilattice, RatAlg, ScalarAlgebra,
};
use crate::signature::{Factor, ObjectExpr, Permutation, Signature};
use crate::term::{Term, TypedTerm};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Rel,
    FdVec,
    Finset,
    Semilattice,
}

impl ModelKind {
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Rel => "rel",
            ModelKind::FdVec => "fdvec",
            ModelKind::Finset => "finset",
            ModelKind::Semilattice => "semilattice",
        }
    }

    pub fn parse(s: &str) -> Option<ModelKind> {
        match s {
            "rel" => Some(ModelKind::Rel),
            "fdvec" => Some(ModelKind::FdVec),
            "finset" => Some(ModelKind::Finset),
            "semilattice" => Some(ModelKind::Semilattice),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("base object {0} has no dimension entry")]
    MissingObject(String),
    #[error("dimension given for {0}, which is not a base object of the signature")]
    UnknownObject(String),
    #[error("dimension of {0} must be positive")]
    ZeroDim(String),
    #[error("semilattice models are one-dimensional, but {object} has dimension {dim}")]
    SemilatticeDims { object: String, dim: usize },
    #[error("matrix given for {0}, which is not a generator of the signature")]
    UnknownGenerator(String),
    #[error("matrix for {gen} is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    DimensionMismatch {
        gen: String,
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("finset matrix for {gen} does not have exactly one 1 in column {col}")]
    FinsetColumn { gen: String, col: usize },
    #[error("meet table invalid: {0}")]
    NotASemilattice(#[from] NotASemilattice),
    #[error("bad object word {word:?}: {reason}")]
    BadWord { word: String, reason: String },
    #[error("family {family} component at {word} is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    FamilyShape {
        family: String,
        word: String,
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("teleport branch {index}: {reason}")]
    TeleportShape { index: usize, reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("generator {0} is not bound in the model")]
    UnboundGenerator(String),
    #[error("object {0} has no dimension in the model")]
    UnknownObject(String),
    #[error("dagger evaluation needs an involution, which this model kind lacks")]
    ConjUnavailable,
}

/// How a stored family of matrices is read by the structural checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// Components Delta_A : A -> A (x) A.
    Diagonal,
    /// Components d_A : A -> I.
    Deleting,
    /// Rows c_B : B -> I, read as projections p_{A,B} = 1_A (x) c_B.
    ProjLeft,
    /// Rows c_A : A -> I, read as projections q_{A,B} = c_A (x) 1_B.
    ProjRight,
}

impl FamilyKind {
    pub fn label(self) -> &'static str {
        match self {
            FamilyKind::Diagonal => "diagonal",
            FamilyKind::Deleting => "deleting",
            FamilyKind::ProjLeft => "proj-left",
            FamilyKind::ProjRight => "proj-right",
        }
    }

    pub fn parse(s: &str) -> Option<FamilyKind> {
        match s {
            "diagonal" => Some(FamilyKind::Diagonal),
            "deleting" => Some(FamilyKind::Deleting),
            "proj-left" => Some(FamilyKind::ProjLeft),
            "proj-right" => Some(FamilyKind::ProjRight),
            _ => None,
        }
    }
}

/// A named family of components indexed by object words (keys use the word
/// display form, e.g. "A", "A * dual(B)", "I"). Components not stored are
/// derived canonically from single-factor ones where possible.
#[derive(Clone, Debug)]
pub struct NaturalFamily<A: ScalarAlgebra> {
    pub kind: FamilyKind,
    pub components: BTreeMap<String, Matrix<A>>,
}

#[derive(Clone, Debug)]
pub struct TeleportBranch<A: ScalarAlgebra> {
    pub label: String,
    pub branch: Matrix<A>,
    pub correction: Matrix<A>,
}

#[derive(Clone, Debug)]
pub struct TeleportSpec<A: ScalarAlgebra> {
    /// Base object teleported; defaults to the signature's sole base.
    pub object: Option<String>,
    pub branches: Vec<TeleportBranch<A>>,
}

/// Parse an object word in display form against a signature.
pub fn parse_word(s: &str, sig: &Signature) -> Result<ObjectExpr, ModelError> {
    let bad = |reason: &str| ModelError::BadWord { word: s.to_string(), reason: reason.into() };
    let t = s.trim();
    if t == "I" {
        return Ok(ObjectExpr::unit());
    }
    let mut factors = Vec::new();
    for tok in t.split('*').map(str::trim) {
        if tok.is_empty() {
            return Err(bad("empty factor"));
        }
        if tok == "I" {
            return Err(bad("the unit I cannot appear inside a tensor word"));
        }
        if let Some(inner) = tok.strip_prefix("dual(").and_then(|r| r.strip_suffix(')')) {
            let name = inner.trim();
            if !sig.has_base(name) {
                return Err(bad("unknown base object"));
            }
            factors.push(Factor::dual(name));
        } else {
            if !sig.has_base(tok) {
                return Err(bad("unknown base object"));
            }
            factors.push(Factor::plain(tok));
        }
    }
    Ok(ObjectExpr::from_factors(factors))
}

/// Diagram evaluation result: the contracted matrix of the open part plus
/// the value of each closed loop, kept separate so degenerate scalar factors
/// stay visible. `total` folds the loops back in.
#[derive(Clone, Debug)]
pub struct EvalReport<A: ScalarAlgebra> {
    pub matrix: Matrix<A>,
    pub loops: Vec<(String, A::Elem)>,
}

impl<A: ScalarAlgebra> EvalReport<A> {
    pub fn total(&self, alg: &A) -> Matrix<A> {
        let mut m = self.matrix.clone();
        for (_, v) in &self.loops {
            m = m.scale(v, alg);
        }
        m
    }

    pub fn render(&self, alg: &A) -> String {
        let mut s = self.matrix.render(alg);
        for (label, v) in &self.loops {
            s.push_str(&format!("loop {} = {}\n", label, alg.format(v)));
        }
        if !self.loops.is_empty() {
            s.push_str("total:\n");
            s.push_str(&self.total(alg).render(alg));
        }
        s
    }
}

/// Entrywise action of a 1x1 scalar matrix on a matrix.
pub fn scalar_action<A: ScalarAlgebra>(alg: &A, s: &Matrix<A>, f: &Matrix<A>) -> Matrix<A> {
    f.scale(s.scalar_value(), alg)
}

/// Samples the scalar action laws over the model's first base object:
/// unit action, multiplicativity, and compatibility with composition and
/// tensoring; plus the loop law that tracing the identity gives the
/// dimension as a counting scalar. Entries are drawn from the carrier
/// when finite, else from small counting scalars.
pub fn scalar_laws_check(m: &Model, trials: usize, seed: u64) -> CheckReport {
    with_model!(m, inner => scalar_laws_check_t(inner, trials, seed))
}

fn scalar_laws_check_t<A: ScalarAlgebra>(
    m: &ModelT<A>,
    trials: usize,
    seed: u64,
) -> CheckReport {
    use rand::Rng;
    let alg = m.alg().clone();
    let mut report = CheckReport::new("scalar action laws");
    let Some(base) = m.signature().base_objects().first().cloned() else {
        report.fail("signature declares a base object", "none declared");
        return report;
    };
    let d = m.dim(&base).unwrap_or(1).max(1);
    let mut rng = crate::random::rng_from_seed(seed);
    let carrier = alg.enumerate();
    let elem = |rng: &mut rand_chacha::ChaCha8Rng| match &carrier {
        Some(v) => v[rng.gen_range(0..v.len())].clone(),
        None => alg.from_count(rng.gen_range(0..4)),
    };
    let names = [
        "the unit scalar acts as the identity",
        "nested actions multiply the scalars",
        "the action slides past composition",
        "the action slides past tensoring",
    ];
    let mut failures: [Option<String>; 4] = [None, None, None, None];
    let one = Matrix::from_entries(1, 1, vec![alg.one()]).unwrap();
    for _ in 0..trials {
        let mat = |rng: &mut rand_chacha::ChaCha8Rng| {
            Matrix::from_entries(d, d, (0..d * d).map(|_| elem(rng)).collect()).unwrap()
        };
        let f = mat(&mut rng);
        let g = mat(&mut rng);
        let s = Matrix::from_entries(1, 1, vec![elem(&mut rng)]).unwrap();
        let t = Matrix::from_entries(1, 1, vec![elem(&mut rng)]).unwrap();
        let checks = [
            scalar_action(&alg, &one, &f).equal(&f, &alg),
            scalar_action(&alg, &s, &scalar_action(&alg, &t, &f))
                .equal(&scalar_action(&alg, &s.mul(&t, &alg), &f), &alg),
            scalar_action(&alg, &s, &g)
                .mul(&f, &alg)
                .equal(&scalar_action(&alg, &s, &g.mul(&f, &alg)), &alg),
            scalar_action(&alg, &s, &f)
                .kron(&g, &alg)
                .equal(&scalar_action(&alg, &s, &f.kron(&g, &alg)), &alg),
        ];
        for (i, ok) in checks.iter().enumerate() {
            if !ok && failures[i].is_none() {
                failures[i] = Some(format!(
                    "s = {}, t = {}, f =\n{}",
                    alg.format(s.scalar_value()),
                    alg.format(t.scalar_value()),
                    f.render(&alg)
                ));
            }
        }
    }
    for (name, failure) in names.into_iter().zip(failures) {
        let ok = failure.is_none();
        report.push(format!("{name} ({trials} samples)"), ok, failure);
    }
    for b in m.signature().base_objects() {
        let dim = m.dim(b).unwrap_or(0);
        let traced = Matrix::identity(dim, &alg).trace(&alg);
        let expected = alg.from_count(dim);
        let ok = alg.equal(&traced, &expected);
        report.push(
            format!("tracing the identity on {b} counts its dimension"),
            ok,
            (!ok).then(|| {
                format!("trace = {}, count = {}", alg.format(&traced), alg.format(&expected))
            }),
        );
    }
    report
}

/// A model over a fixed scalar algebra: dimensions for base objects,
/// matrices for generators, and cup/cap vectors per base object.
#[derive(Clone, Debug)]
pub struct ModelT<A: ScalarAlgebra> {
    kind: ModelKind,
    alg: A,
    sig: Arc<Signature>,
    dims: BTreeMap<String, usize>,
    gens: BTreeMap<String, Matrix<A>>,
    /// eta_X : I -> X* (x) X as a flat vector, entry (k, m) at k*dim + m.
    units: BTreeMap<String, Vec<A::Elem>>,
    /// eps_X : X (x) X* -> I as a flat vector, entry (k, m) at k*dim + m.
    counits: BTreeMap<String, Vec<A::Elem>>,
    involution: bool,
    families: BTreeMap<String, NaturalFamily<A>>,
    teleport: Option<TeleportSpec<A>>,
}

impl<A: ScalarAlgebra> ModelT<A> {
    pub fn new(
        kind: ModelKind,
        alg: A,
        sig: Arc<Signature>,
        dims: BTreeMap<String, usize>,
        gens: BTreeMap<String, Matrix<A>>,
    ) -> Result<Self, ModelError> {
        for name in sig.base_objects() {
            match dims.get(name) {
                None => return Err(ModelError::MissingObject(name.clone())),
                Some(0) => return Err(ModelError::ZeroDim(name.clone())),
                Some(&d) => {
                    if kind == ModelKind::Semilattice && d != 1 {
                        return Err(ModelError::SemilatticeDims { object: name.clone(), dim: d });
                    }
                }
            }
        }
        for name in dims.keys() {
            if !sig.has_base(name) {
                return Err(ModelError::UnknownObject(name.clone()));
            }
        }
        let word_dim = |w: &ObjectExpr| -> usize {
            w.factors.iter().map(|f| dims[&f.base]).product()
        };
        for (name, m) in &gens {
            let g = sig
                .generator(name)
                .ok_or_else(|| ModelError::UnknownGenerator(name.clone()))?;
            let (er, ec) = (word_dim(&g.cod), word_dim(&g.dom));
            if m.rows() != er || m.cols() != ec {
                return Err(ModelError::DimensionMismatch {
                    gen: name.clone(),
                    expected_rows: er,
                    expected_cols: ec,
                    rows: m.rows(),
                    cols: m.cols(),
                });
            }
            if kind == ModelKind::Finset {
                for col in 0..m.cols() {
                    let mut ones = 0;
                    for row in 0..m.rows() {
                        let v = m.get(row, col);
                        if alg.equal(v, &alg.one()) {
                            ones += 1;
                        } else if !alg.is_zero(v) {
                            ones += 2;
                        }
                    }
                    if ones != 1 {
                        return Err(ModelError::FinsetColumn { gen: name.clone(), col });
                    }
                }
            }
        }
        let mut units = BTreeMap::new();
        let mut counits = BTreeMap::new();
        for name in sig.base_objects() {
            let d = dims[name];
            let mut v = Vec::with_capacity(d * d);
            for k in 0..d {
                for m in 0..d {
                    v.push(if k == m { alg.one() } else { alg.zero() });
                }
            }
            units.insert(name.clone(), v.clone());
            counits.insert(name.clone(), v);
        }
        let involution = kind != ModelKind::Finset;
        Ok(ModelT {
            kind,
            alg,
            sig,
            dims,
            gens,
            units,
            counits,
            involution,
            families: BTreeMap::new(),
            teleport: None,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn alg(&self) -> &A {
        &self.alg
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn has_involution(&self) -> bool {
        self.involution
    }

    pub fn dim(&self, base: &str) -> Option<usize> {
        self.dims.get(base).copied()
    }

    pub fn dims(&self) -> &BTreeMap<String, usize> {
        &self.dims
    }

    pub fn generator_matrix(&self, name: &str) -> Option<&Matrix<A>> {
        self.gens.get(name)
    }

    pub fn bind_generator(&mut self, name: &str, m: Matrix<A>) -> Result<(), ModelError> {
        let g = self
            .sig
            .generator(name)
            .ok_or_else(|| ModelError::UnknownGenerator(name.to_string()))?;
        let er = self.dim_word(&g.cod).expect("validated bases");
        let ec = self.dim_word(&g.dom).expect("validated bases");
        if m.rows() != er || m.cols() != ec {
            return Err(ModelError::DimensionMismatch {
                gen: name.to_string(),
                expected_rows: er,
                expected_cols: ec,
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        self.gens.insert(name.to_string(), m);
        Ok(())
    }

    pub fn dim_word(&self, w: &ObjectExpr) -> Result<usize, EvalError> {
        let mut total = 1usize;
        for f in &w.factors {
            total *= self
                .dims
                .get(&f.base)
                .ok_or_else(|| EvalError::UnknownObject(f.base.clone()))?;
        }
        Ok(total)
    }

    fn factor_dims(&self, w: &ObjectExpr) -> Result<Vec<usize>, EvalError> {
        w.factors
            .iter()
            .map(|f| {
                self.dims
                    .get(&f.base)
                    .copied()
                    .ok_or_else(|| EvalError::UnknownObject(f.base.clone()))
            })
            .collect()
    }

    /// Multiply the stored eta vector of one base by a scalar, leaving eps
    /// alone. Deliberately breaks the unit/counit pairing; used to exercise
    /// failure paths of the structural checks.
    pub fn scale_unit(&mut self, base: &str, s: &A::Elem) -> bool {
        match self.units.get_mut(base) {
            Some(u) => {
                for v in u.iter_mut() {
                    *v = self.alg.mul(s, v);
                }
                true
            }
            None => false,
        }
    }

    pub fn add_family(&mut self, name: &str, fam: NaturalFamily<A>) -> Result<(), ModelError> {
        for (key, m) in &fam.components {
            let w = parse_word(key, &self.sig)?;
            let d = self.dim_word(&w).expect("validated bases");
            let (er, ec) = match fam.kind {
                FamilyKind::Diagonal => (d * d, d),
                FamilyKind::Deleting | FamilyKind::ProjLeft | FamilyKind::ProjRight => (1, d),
            };
            if m.rows() != er || m.cols() != ec {
                return Err(ModelError::FamilyShape {
                    family: name.to_string(),
                    word: key.clone(),
                    expected_rows: er,
                    expected_cols: ec,
                    rows: m.rows(),
                    cols: m.cols(),
                });
            }
        }
        self.families.insert(name.to_string(), fam);
        Ok(())
    }

    pub fn family(&self, name: &str) -> Option<&NaturalFamily<A>> {
        self.families.get(name)
    }

    pub fn family_names(&self) -> Vec<String> {
        self.families.keys().cloned().collect()
    }

    /// The component of a family at a word: the stored matrix if present,
    /// else the canonical derived one (interleaved tensor for diagonals,
    /// plain tensor for rows). Empty words derive to the 1x1 identity.
    /// `None` when some factor has no stored single-factor component.
    pub fn family_component(&self, name: &str, w: &ObjectExpr) -> Option<Matrix<A>> {
        let fam = self.families.get(name)?;
        if let Some(m) = fam.components.get(&w.to_string()) {
            return Some(m.clone());
        }
        let parts: Option<Vec<(&Matrix<A>, usize)>> = w
            .factors
            .iter()
            .map(|f| {
                let key = ObjectExpr::from_factors(vec![f.clone()]).to_string();
                // Dual factors fall back to the base component: carriers
                // here are self dual with the same underlying index set.
                let m = fam
                    .components
                    .get(&key)
                    .or_else(|| fam.components.get(&f.base))?;
                Some((m, *self.dims.get(&f.base)?))
            })
            .collect();
        let parts = parts?;
        let fdims: Vec<usize> = parts.iter().map(|(_, d)| *d).collect();
        let total: usize = fdims.iter().product();
        match fam.kind {
            FamilyKind::Diagonal => {
                // Delta_w [(i, j), k] = prod_t Delta_t [(i_t, j_t), k_t]:
                // the interleaving (1 (x) sigma (x) 1) . (Delta (x) Delta).
                let row_dims: Vec<usize> =
                    fdims.iter().chain(fdims.iter()).copied().collect();
                let mut out = Matrix::zeros(total * total, total, &self.alg);
                let n = fdims.len();
                for r in 0..total * total {
                    let rd = decode(r, &row_dims);
                    for c in 0..total {
                        let cd = decode(c, &fdims);
                        let mut acc = self.alg.one();
                        for t in 0..n {
                            let (m, d) = parts[t];
                            acc = self.alg.mul(&acc, m.get(rd[t] * d + rd[n + t], cd[t]));
                        }
                        out.set(r, c, acc);
                    }
                }
                Some(out)
            }
            FamilyKind::Deleting | FamilyKind::ProjLeft | FamilyKind::ProjRight => {
                let mut out = Matrix::zeros(1, total, &self.alg);
                for c in 0..total {
                    let cd = decode(c, &fdims);
                    let mut acc = self.alg.one();
                    for (t, (m, _)) in parts.iter().enumerate() {
                        acc = self.alg.mul(&acc, m.get(0, cd[t]));
                    }
                    out.set(0, c, acc);
                }
                Some(out)
            }
        }
    }

    /// The projection p_{A,B} : A (x) B -> A (for a proj-left family) or
    /// q_{A,B} : A (x) B -> B (proj-right), built from the discard row on
    /// the other side.
    pub fn projection(&self, name: &str, a: &ObjectExpr, b: &ObjectExpr) -> Option<Matrix<A>> {
        let fam = self.families.get(name)?;
        let (kept, dropped) = match fam.kind {
            FamilyKind::ProjLeft => (a, b),
            FamilyKind::ProjRight => (b, a),
            _ => return None,
        };
        let row = self.family_component(name, dropped)?;
        let id = Matrix::identity(self.dim_word(kept).ok()?, &self.alg);
        Some(match fam.kind {
            FamilyKind::ProjLeft => id.kron(&row, &self.alg),
            _ => row.kron(&id, &self.alg),
        })
    }

    pub fn set_teleport(&mut self, spec: TeleportSpec<A>) -> Result<(), ModelError> {
        let dim = match &spec.object {
            Some(name) => self
                .dims
                .get(name)
                .copied()
                .ok_or_else(|| ModelError::UnknownObject(name.clone()))?,
            None => match spec.branches.first() {
                Some(b) => b.branch.rows(),
                None => 0,
            },
        };
        for (i, b) in spec.branches.iter().enumerate() {
            for m in [&b.branch, &b.correction] {
                if m.rows() != dim || m.cols() != dim {
                    return Err(ModelError::TeleportShape {
                        index: i,
                        reason: format!("matrix is {}x{}, expected {}x{}", m.rows(), m.cols(), dim, dim),
                    });
                }
            }
        }
        self.teleport = Some(spec);
        Ok(())
    }

    pub fn teleport(&self) -> Option<&TeleportSpec<A>> {
        self.teleport.as_ref()
    }

    pub fn eval(&self, t: &TypedTerm) -> Result<Matrix<A>, EvalError> {
        self.eval_term(t.term())
    }

    fn eval_term(&self, t: &Term) -> Result<Matrix<A>, EvalError> {
        match t {
            Term::Gen(name) => self
                .gens
                .get(name)
                .cloned()
                .ok_or_else(|| EvalError::UnboundGenerator(name.clone())),
            Term::Id(w) => Ok(Matrix::identity(self.dim_word(w)?, &self.alg)),
            Term::Compose(after, before) => {
                let b = self.eval_term(before)?;
                Ok(self.eval_term(after)?.mul(&b, &self.alg))
            }
            Term::Tensor(l, r) => {
                let rm = self.eval_term(r)?;
                Ok(self.eval_term(l)?.kron(&rm, &self.alg))
            }
            Term::Sym(a, b) => self.sym_matrix(a, b),
            Term::Unit(w) => self.unit_matrix(w),
            Term::Counit(w) => self.counit_matrix(w),
            Term::Dagger(inner) => {
                if !self.involution {
                    return Err(EvalError::ConjUnavailable);
                }
                Ok(self.eval_term(inner)?.conj_transpose(&self.alg))
            }
        }
    }

    /// sigma_{a,b} : a (x) b -> b (x) a as a permutation matrix.
    pub fn sym_matrix(&self, a: &ObjectExpr, b: &ObjectExpr) -> Result<Matrix<A>, EvalError> {
        let (m, n) = (a.len(), b.len());
        let mut images = vec![0usize; m + n];
        for (i, img) in images.iter_mut().enumerate().take(m) {
            *img = n + i;
        }
        for j in 0..n {
            images[m + j] = j;
        }
        let p = Permutation::from_images(images).expect("block swap is a bijection");
        let mut dims = self.factor_dims(a)?;
        dims.extend(self.factor_dims(b)?);
        Ok(perm_matrix(&p, &dims, &self.alg))
    }

    /// eta_w : I -> w* (x) w. Componentwise over factors; a dual factor uses
    /// the transposed base vector (the canonical structure on duals,
    /// sigma . eta).
    pub fn unit_matrix(&self, w: &ObjectExpr) -> Result<Matrix<A>, EvalError> {
        let fdims = self.factor_dims(w)?;
        let total: usize = fdims.iter().product();
        let n = w.len();
        let row_dims: Vec<usize> = fdims.iter().chain(fdims.iter()).copied().collect();
        let mut out = Matrix::zeros(total * total, 1, &self.alg);
        for r in 0..total * total {
            let rd = decode(r, &row_dims);
            let mut acc = self.alg.one();
            for t in 0..n {
                let f = &w.factors[t];
                let d = fdims[t];
                let u = &self.units[&f.base];
                let (j, i) = (rd[t], rd[n + t]);
                let idx = if f.dual { i * d + j } else { j * d + i };
                acc = self.alg.mul(&acc, &u[idx]);
            }
            out.set(r, 0, acc);
        }
        Ok(out)
    }

    /// eps_w : w (x) w* -> I.
    pub fn counit_matrix(&self, w: &ObjectExpr) -> Result<Matrix<A>, EvalError> {
        let fdims = self.factor_dims(w)?;
        let total: usize = fdims.iter().product();
        let n = w.len();
        let col_dims: Vec<usize> = fdims.iter().chain(fdims.iter()).copied().collect();
        let mut out = Matrix::zeros(1, total * total, &self.alg);
        for c in 0..total * total {
            let cd = decode(c, &col_dims);
            let mut acc = self.alg.one();
            for t in 0..n {
                let f = &w.factors[t];
                let d = fdims[t];
                let cv = &self.counits[&f.base];
                let (i, j) = (cd[t], cd[n + t]);
                let idx = if f.dual { j * d + i } else { i * d + j };
                acc = self.alg.mul(&acc, &cv[idx]);
            }
            out.set(0, c, acc);
        }
        Ok(out)
    }

    fn effective_node_matrix(
        &self,
        gen: &str,
        dagger: bool,
    ) -> Result<Matrix<A>, EvalError> {
        let m = self
            .gens
            .get(gen)
            .ok_or_else(|| EvalError::UnboundGenerator(gen.to_string()))?;
        if dagger {
            if !self.involution {
                return Err(EvalError::ConjUnavailable);
            }
            Ok(m.conj_transpose(&self.alg))
        } else {
            Ok(m.clone())
        }
    }

    /// The scalar value of one closed loop.
    pub fn loop_value(&self, label: &LoopLabel) -> Result<A::Elem, EvalError> {
        match label {
            LoopLabel::Free(base) => {
                let d = self
                    .dims
                    .get(base)
                    .copied()
                    .ok_or_else(|| EvalError::UnknownObject(base.clone()))?;
                Ok(self.alg.from_count(d))
            }
            LoopLabel::Cycle(passes) => {
                let mut prod: Option<Matrix<A>> = None;
                for pass in passes {
                    let n = self.pass_matrix(pass)?;
                    prod = Some(match prod {
                        None => n,
                        Some(p) => n.mul(&p, &self.alg),
                    });
                }
                Ok(prod.expect("cycles have at least one pass").trace(&self.alg))
            }
        }
    }

    /// One traversal of an arity-2 node inside a cycle, reshaped into a
    /// matrix from the entered port's index to the exited port's index.
    fn pass_matrix(&self, pass: &CyclePass) -> Result<Matrix<A>, EvalError> {
        let g = self
            .sig
            .generator(&pass.gen)
            .ok_or_else(|| EvalError::UnboundGenerator(pass.gen.clone()))?;
        let eff = self.effective_node_matrix(&pass.gen, pass.dagger)?;
        let (dom_w, cod_w) = if pass.dagger { (&g.cod, &g.dom) } else { (&g.dom, &g.cod) };
        match (pass.enter.input, pass.exit.input) {
            (true, false) => Ok(eff),
            (false, true) => Ok(eff.transpose()),
            (true, true) => {
                let fd = self.factor_dims(dom_w)?;
                let (d0, d1) = (fd[0], fd[1]);
                let (rows, cols) =
                    if pass.enter.index == 0 { (d1, d0) } else { (d0, d1) };
                let mut out = Matrix::zeros(rows, cols, &self.alg);
                for a in 0..d0 {
                    for b in 0..d1 {
                        let v = eff.get(0, a * d1 + b).clone();
                        if pass.enter.index == 0 {
                            out.set(b, a, v);
                        } else {
                            out.set(a, b, v);
                        }
                    }
                }
                Ok(out)
            }
            (false, false) => {
                let fd = self.factor_dims(cod_w)?;
                let (d0, d1) = (fd[0], fd[1]);
                let (rows, cols) =
                    if pass.enter.index == 0 { (d1, d0) } else { (d0, d1) };
                let mut out = Matrix::zeros(rows, cols, &self.alg);
                for a in 0..d0 {
                    for b in 0..d1 {
                        let v = eff.get(a * d1 + b, 0).clone();
                        if pass.enter.index == 0 {
                            out.set(b, a, v);
                        } else {
                            out.set(a, b, v);
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Evaluate a diagram by tensor contraction. Each wire is one summation
    /// index, except same-side boundary wires (caps and cups), whose two
    /// ends index the stored eps/eta vectors. Closed loops are valued
    /// separately in the report.
    pub fn eval_diagram(&self, d: &Diagram) -> Result<EvalReport<A>, EvalError> {
        struct Table<E> {
            entries: Vec<E>,
            vars: Vec<usize>,
        }
        let mut var_dims: Vec<usize> = Vec::new();
        let mut port_var: BTreeMap<PortRef, usize> = BTreeMap::new();
        let mut tables: Vec<Table<A::Elem>> = Vec::new();

        for wire in &d.wires {
            let dim = self
                .dims
                .get(&wire.base)
                .copied()
                .ok_or_else(|| EvalError::UnknownObject(wire.base.clone()))?;
            let same_side = matches!(
                (wire.a, wire.b),
                (PortRef::In(_), PortRef::In(_)) | (PortRef::Out(_), PortRef::Out(_))
            );
            if same_side {
                let va = var_dims.len();
                var_dims.push(dim);
                let vb = var_dims.len();
                var_dims.push(dim);
                port_var.insert(wire.a, va);
                port_var.insert(wire.b, vb);
                let a_dual = d.port_factor(wire.a).dual;
                let is_cap = matches!(wire.a, PortRef::In(_));
                let stored = if is_cap { &self.counits[&wire.base] } else { &self.units[&wire.base] };
                // Stored index (k, m): k ranges over the plain side for eps,
                // over the dual side for eta.
                let a_major = if is_cap { !a_dual } else { a_dual };
                let mut entries = Vec::with_capacity(dim * dim);
                for x in 0..dim {
                    for y in 0..dim {
                        let idx = if a_major { x * dim + y } else { y * dim + x };
                        entries.push(stored[idx].clone());
                    }
                }
                tables.push(Table { entries, vars: vec![va, vb] });
            } else {
                let v = var_dims.len();
                var_dims.push(dim);
                port_var.insert(wire.a, v);
                port_var.insert(wire.b, v);
            }
        }

        for (idx, node) in d.nodes.iter().enumerate() {
            let mat = self.effective_node_matrix(&node.gen, node.dagger)?;
            let mut vars = Vec::with_capacity(node.arity());
            for j in 0..node.cod.len() {
                vars.push(port_var[&PortRef::NodeOut(idx, j)]);
            }
            for j in 0..node.dom.len() {
                vars.push(port_var[&PortRef::NodeIn(idx, j)]);
            }
            debug_assert_eq!(
                mat.rows() * mat.cols(),
                vars.iter().map(|&v| var_dims[v]).product::<usize>()
            );
            tables.push(Table { entries: mat.entries().to_vec(), vars });
        }

        let row_vars: Vec<usize> =
            (0..d.cod.len()).map(|k| port_var[&PortRef::Out(k)]).collect();
        let col_vars: Vec<usize> =
            (0..d.dom.len()).map(|k| port_var[&PortRef::In(k)]).collect();
        let row_dims: Vec<usize> = row_vars.iter().map(|&v| var_dims[v]).collect();
        let col_dims: Vec<usize> = col_vars.iter().map(|&v| var_dims[v]).collect();
        let mut boundary = vec![false; var_dims.len()];
        for &v in row_vars.iter().chain(col_vars.iter()) {
            boundary[v] = true;
        }
        let internal: Vec<usize> =
            (0..var_dims.len()).filter(|&v| !boundary[v]).collect();
        let int_dims: Vec<usize> = internal.iter().map(|&v| var_dims[v]).collect();
        let int_total: usize = int_dims.iter().product();
        let table_dims: Vec<Vec<usize>> = tables
            .iter()
            .map(|t| t.vars.iter().map(|&v| var_dims[v]).collect())
            .collect();

        let rows_total: usize = row_dims.iter().product();
        let cols_total: usize = col_dims.iter().product();
        let mut out = Matrix::zeros(rows_total, cols_total, &self.alg);
        let mut assign = vec![usize::MAX; var_dims.len()];
        for r in 0..rows_total {
            let rd = decode(r, &row_dims);
            for c in 0..cols_total {
                let cd = decode(c, &col_dims);
                assign.iter_mut().for_each(|v| *v = usize::MAX);
                let mut consistent = true;
                for (&v, &val) in row_vars.iter().zip(rd.iter()).chain(col_vars.iter().zip(cd.iter())) {
                    if assign[v] != usize::MAX && assign[v] != val {
                        consistent = false;
                        break;
                    }
                    assign[v] = val;
                }
                if !consistent {
                    continue;
                }
                let mut acc = self.alg.zero();
                for a_idx in 0..int_total {
                    let digs = decode(a_idx, &int_dims);
                    for (&v, &val) in internal.iter().zip(digs.iter()) {
                        assign[v] = val;
                    }
                    let mut prod = self.alg.one();
                    for (t, tdims) in tables.iter().zip(table_dims.iter()) {
                        let tdigits: Vec<usize> =
                            t.vars.iter().map(|&v| assign[v]).collect();
                        prod = self.alg.mul(&prod, &t.entries[encode(&tdigits, tdims)]);
                    }
                    acc = self.alg.add(&acc, &prod);
                }
                out.set(r, c, acc);
            }
        }

        let mut loops = Vec::new();
        for (label, count) in &d.loops {
            let v = self.loop_value(label)?;
            for _ in 0..*count {
                loops.push((label.to_string(), v.clone()));
            }
        }
        Ok(EvalReport { matrix: out, loops })
    }

    /// The dagger compact conditions: every symmetry componentwise unitary,
    /// and the counit definable from the unit as eps = eta-dagger . sigma.
    pub fn dagger_compact_check(&self) -> Result<CheckReport, EvalError> {
        if !self.involution {
            return Err(EvalError::ConjUnavailable);
        }
        let mut rep = CheckReport::new(format!("dagger compactness ({})", self.kind));
        let bases: Vec<String> = self.sig.base_objects().to_vec();
        for x in &bases {
            for y in &bases {
                let wx = ObjectExpr::base(x.clone());
                let wy = ObjectExpr::base(y.clone());
                let s = self.sym_matrix(&wx, &wy)?;
                let sd = s.conj_transpose(&self.alg);
                let id = Matrix::identity(s.rows(), &self.alg);
                let ok = s.mul(&sd, &self.alg).equal(&id, &self.alg)
                    && sd.mul(&s, &self.alg).equal(&id, &self.alg);
                rep.push(
                    format!("sigma[{},{}] unitary", x, y),
                    ok,
                    (!ok).then(|| format!("sigma =\n{}", s.render(&self.alg))),
                );
            }
        }
        for x in &bases {
            let w = ObjectExpr::base(x.clone());
            let eps = self.counit_matrix(&w)?;
            let eta = self.unit_matrix(&w)?;
            let sigma = self.sym_matrix(&w, &w.dual())?;
            let rhs = eta.conj_transpose(&self.alg).mul(&sigma, &self.alg);
            let ok = eps.equal(&rhs, &self.alg);
            rep.push(
                format!("counit from unit at {}", x),
                ok,
                (!ok).then(|| {
                    format!(
                        "object {}: eps =\n{}but eta-dagger . sigma =\n{}",
                        x,
                        eps.render(&self.alg),
                        rhs.render(&self.alg)
                    )
                }),
            );
        }
        Ok(rep)
    }
}

/// A model with its scalar algebra erased, for loading from files and
/// driving from the command line.
#[derive(Clone, Debug)]
pub enum Model {
    Bool(ModelT<BoolAlg>),
    Meet(ModelT<MeetAlg>),
    Rat(ModelT<RatAlg>),
    CRat(ModelT<CRatAlg>),
    CFloat(ModelT<CFloatAlg>),
}

macro_rules! with_model {
    ($m:expr, $inner:ident => $body:expr) => {
        match $m {
            $crate::model::Model::Bool($inner) => $body,
            $crate::model::Model::Meet($inner) => $body,
            $crate::model::Model::Rat($inner) => $body,
            $crate::model::Model::CRat($inner) => $body,
            $crate::model::Model::CFloat($inner) => $body,
        }
    };
}
pub(crate) use with_model;

impl Model {
    pub fn kind(&self) -> ModelKind {
        with_model!(self, m => m.kind())
    }

    pub fn scalars_label(&self) -> &'static str {
        match self {
            Model::Bool(_) => "bool",
            Model::Meet(_) => "semilattice",
            Model::Rat(_) => "rational",
            Model::CRat(_) => "complex-rational",
            Model::CFloat(_) => "complex-float",
        }
    }

    pub fn signature(&self) -> &Arc<Signature> {
        with_model!(self, m => m.signature())
    }

    pub fn has_involution(&self) -> bool {
        with_model!(self, m => m.has_involution())
    }

    pub fn family_names(&self) -> Vec<String> {
        with_model!(self, m => m.family_names())
    }

    pub fn family_kind(&self, name: &str) -> Option<FamilyKind> {
        with_model!(self, m => m.family(name).map(|f| f.kind))
    }

    pub fn has_teleport(&self) -> bool {
        with_model!(self, m => m.teleport().is_some())
    }

    pub fn eval_render(&self, t: &TypedTerm) -> Result<String, EvalError> {
        with_model!(self, m => Ok(m.eval(t)?.render(m.alg())))
    }

    pub fn eval_equal_terms(&self, t: &TypedTerm, u: &TypedTerm) -> Result<bool, EvalError> {
        with_model!(self, m => {
            let a = m.eval(t)?;
            let b = m.eval(u)?;
            Ok(a.equal(&b, m.alg()))
        })
    }

    pub fn eval_is_identity(&self, t: &TypedTerm) -> Result<bool, EvalError> {
        with_model!(self, m => {
            let a = m.eval(t)?;
            let d = m.dim_word(t.dom())?;
            Ok(a.equal(&Matrix::identity(d, m.alg()), m.alg()))
        })
    }

    /// Diagram-route evaluation agreement with the term route, loops folded.
    pub fn eval_routes_agree(&self, t: &TypedTerm) -> Result<bool, EvalError> {
        with_model!(self, m => {
            let direct = m.eval(t)?;
            let report = m.eval_diagram(&crate::diagram::to_diagram(t))?;
            Ok(direct.equal(&report.total(m.alg()), m.alg()))
        })
    }

    pub fn dagger_compact_check(&self) -> Result<CheckReport, EvalError> {
        with_model!(self, m => m.dagger_compact_check())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use crate::term::{coname_of, trace_term, typecheck};

    fn sig_one_base(dim_gens: &[(&str, &str, &str)]) -> Arc<Signature> {
        let mut sig = Signature::new(true);
        sig.add_base_object("X").unwrap();
        for (name, dom, cod) in dim_gens {
            let parse = |w: &str| {
                ObjectExpr::from_factors(w.chars().map(|_| Factor::plain("X")).collect())
            };
            sig.add_generator(*name, parse(dom), parse(cod)).unwrap();
        }
        Arc::new(sig)
    }

    fn rel_model(dim: usize, gens: &[(&str, &str, &str, Vec<bool>)]) -> ModelT<BoolAlg> {
        let sig = sig_one_base(
            &gens.iter().map(|(n, d, c, _)| (*n, *d, *c)).collect::<Vec<_>>(),
        );
        let mut mats = BTreeMap::new();
        for (name, dom, cod, entries) in gens {
            let rows = dim.pow(cod.len() as u32);
            let cols = dim.pow(dom.len() as u32);
            mats.insert(
                name.to_string(),
                Matrix::from_entries(rows, cols, entries.clone()).unwrap(),
            );
        }
        let dims = BTreeMap::from([("X".to_string(), dim)]);
        ModelT::new(ModelKind::Rel, BoolAlg, sig, dims, mats).unwrap()
    }

    fn fdvec_model(dim: usize) -> ModelT<RatAlg> {
        let sig = sig_one_base(&[]);
        let dims = BTreeMap::from([("X".to_string(), dim)]);
        ModelT::new(ModelKind::FdVec, RatAlg, sig, dims, BTreeMap::new()).unwrap()
    }

    #[test]
    fn unit_vectors_by_kind() {
        // Two-element carrier: eta is the pair diagonal (1,0,0,1).
        let rel = rel_model(2, &[]);
        let x = ObjectExpr::base("X");
        let eta = rel.unit_matrix(&x).unwrap();
        assert_eq!(eta.rows(), 4);
        assert_eq!(eta.cols(), 1);
        assert_eq!(eta.entries(), &[true, false, false, true]);

        // Dimension three: nine entries, ones on the diagonal positions.
        let fdv = fdvec_model(3);
        let eta = fdv.unit_matrix(&x).unwrap();
        let ones: Vec<usize> = (0..9).filter(|&i| eta.entries()[i] == rat(1)).collect();
        assert_eq!(ones, vec![0, 4, 8]);
    }

    #[test]
    fn coname_realizes_the_relation() {
        // R = {(0,0), (1,0), (1,1)} as a matrix M[y][x] = xRy.
        let rel = rel_model(2, &[("R", "X", "X", vec![true, true, false, true])]);
        let r = typecheck(&Term::gen("R"), rel.signature()).unwrap();
        let m = rel.eval(&coname_of(&r)).unwrap();
        assert_eq!(m.rows(), 1);
        assert_eq!(m.cols(), 4);
        // Column (x, y) = x*2 + y holds xRy.
        assert_eq!(m.entries(), &[true, false, true, true]);
    }

    #[test]
    fn yanking_evaluates_to_identity() {
        let fdv = fdvec_model(3);
        let x = ObjectExpr::base("X");
        // (eps (x) 1) . (1 (x) eta) : X -> X.
        let t = typecheck(
            &Term::compose(
                Term::tensor(Term::Counit(x.clone()), Term::Id(x.clone())),
                Term::tensor(Term::Id(x.clone()), Term::Unit(x.clone())),
            ),
            fdv.signature(),
        )
        .unwrap();
        let m = fdv.eval(&t).unwrap();
        assert!(m.equal(&Matrix::identity(3, fdv.alg()), fdv.alg()));

        // The dual-side yanking (1 (x) eps) . (eta (x) 1) : X* -> X*.
        let xd = x.dual();
        let t2 = typecheck(
            &Term::compose(
                Term::tensor(Term::Id(xd.clone()), Term::Counit(x.clone())),
                Term::tensor(Term::Unit(x.clone()), Term::Id(xd.clone())),
            ),
            fdv.signature(),
        )
        .unwrap();
        let m2 = fdv.eval(&t2).unwrap();
        assert!(m2.equal(&Matrix::identity(3, fdv.alg()), fdv.alg()));
    }

    #[test]
    fn trace_of_identity_is_dimension() {
        let fdv = fdvec_model(4);
        let x = ObjectExpr::base("X");
        let id = typecheck(&Term::Id(x.clone()), fdv.signature()).unwrap();
        let t = trace_term(&id, &x).unwrap();
        let m = fdv.eval(&t).unwrap();
        assert_eq!(m.scalar_value(), &rat(4));

        // Diagram route: the trace closes to a free loop.
        let rep = fdv.eval_diagram(&crate::diagram::to_diagram(&t)).unwrap();
        assert_eq!(rep.loops.len(), 1);
        assert_eq!(rep.total(fdv.alg()).scalar_value(), &rat(4));
    }

    #[test]
    fn term_and_diagram_routes_agree_on_traces() {
        let sig = sig_one_base(&[("f", "X", "X"), ("g", "X", "X")]);
        let dims = BTreeMap::from([("X".to_string(), 2)]);
        let f = Matrix::from_entries(2, 2, vec![rat(1), rat(2), rat(3), rat(4)]).unwrap();
        let g = Matrix::from_entries(2, 2, vec![rat(0), rat(1), rat(5), rat(7)]).unwrap();
        let gens = BTreeMap::from([("f".to_string(), f), ("g".to_string(), g)]);
        let m = ModelT::new(ModelKind::FdVec, RatAlg, sig, dims, gens).unwrap();
        let x = ObjectExpr::base("X");

        let f_t = typecheck(&Term::gen("f"), m.signature()).unwrap();
        let tr_f = trace_term(&f_t, &x).unwrap();
        assert_eq!(m.eval(&tr_f).unwrap().scalar_value(), &rat(5));
        let rep = m.eval_diagram(&crate::diagram::to_diagram(&tr_f)).unwrap();
        assert_eq!(rep.loops.len(), 1);
        assert_eq!(rep.total(m.alg()).scalar_value(), &rat(5));

        // Cyclicity through both routes: tr(g.f) = tr(f.g).
        let gf_t = typecheck(
            &Term::compose(Term::gen("g"), Term::gen("f")),
            m.signature(),
        )
        .unwrap();
        let fg_t = typecheck(
            &Term::compose(Term::gen("f"), Term::gen("g")),
            m.signature(),
        )
        .unwrap();
        let gf = trace_term(&gf_t, &x).unwrap();
        let fg = trace_term(&fg_t, &x).unwrap();
        let a = m.eval(&gf).unwrap();
        let b = m.eval(&fg).unwrap();
        assert!(a.equal(&b, m.alg()));
        let ra = m.eval_diagram(&crate::diagram::to_diagram(&gf)).unwrap();
        assert!(ra.total(m.alg()).equal(&a, m.alg()));
    }

    #[test]
    fn dagger_compact_check_passes_and_doctoring_fails() {
        let rel = rel_model(3, &[]);
        assert!(rel.dagger_compact_check().unwrap().passed());

        let mut fdv = fdvec_model(2);
        assert!(fdv.dagger_compact_check().unwrap().passed());
        assert!(fdv.scale_unit("X", &rat(2)));
        let rep = fdv.dagger_compact_check().unwrap();
        assert!(!rep.passed());
        let failure = rep.failures().next().unwrap();
        assert!(failure.condition.contains("X"));
        assert!(failure.witness.as_deref().unwrap().contains("object X"));
    }

    #[test]
    fn construction_validation() {
        let sig = sig_one_base(&[("f", "X", "X")]);
        let dims = BTreeMap::from([("X".to_string(), 2)]);
        // Wrong shape.
        let bad = BTreeMap::from([(
            "f".to_string(),
            Matrix::<BoolAlg>::from_entries(1, 2, vec![true, false]).unwrap(),
        )]);
        assert!(matches!(
            ModelT::new(ModelKind::Rel, BoolAlg, Arc::clone(&sig), dims.clone(), bad),
            Err(ModelError::DimensionMismatch { .. })
        ));
        // Finset requires exactly one 1 per column.
        let twocol = BTreeMap::from([(
            "f".to_string(),
            Matrix::<BoolAlg>::from_entries(2, 2, vec![true, false, true, false]).unwrap(),
        )]);
        assert!(matches!(
            ModelT::new(ModelKind::Finset, BoolAlg, Arc::clone(&sig), dims.clone(), twocol),
            Err(ModelError::FinsetColumn { col: 0, .. })
        ));
        // Semilattice models are one-dimensional.
        let wide = BTreeMap::from([("X".to_string(), 2)]);
        assert!(matches!(
            ModelT::new(
                ModelKind::Semilattice,
                MeetAlg::two_chain(),
                Arc::clone(&sig),
                wide,
                BTreeMap::new(),
            ),
            Err(ModelError::SemilatticeDims { dim: 2, .. })
        ));
        // Every base object needs a dimension.
        assert!(matches!(
            ModelT::new(ModelKind::Rel, BoolAlg, sig, BTreeMap::new(), BTreeMap::new()),
            Err(ModelError::MissingObject(_))
        ));
    }

    #[test]
    fn scalar_action_laws() {
        let alg = RatAlg;
        let f = Matrix::from_entries(2, 2, vec![rat(1), rat(2), rat(3), rat(4)]).unwrap();
        let one = Matrix::from_entries(1, 1, vec![rat(1)]).unwrap();
        let s = Matrix::from_entries(1, 1, vec![rat(3)]).unwrap();
        let t = Matrix::from_entries(1, 1, vec![rat(5)]).unwrap();
        assert!(scalar_action(&alg, &one, &f).equal(&f, &alg));
        let st = s.mul(&t, &alg);
        let nested = scalar_action(&alg, &s, &scalar_action(&alg, &t, &f));
        assert!(nested.equal(&scalar_action(&alg, &st, &f), &alg));
        // In the strict setting the action is the Kronecker product with a
        // 1x1 factor on the left.
        assert!(s.kron(&f, &alg).equal(&scalar_action(&alg, &s, &f), &alg));
        // Boolean zero action empties the relation.
        let bl = BoolAlg;
        let r = Matrix::<BoolAlg>::from_entries(2, 2, vec![true, true, false, true]).unwrap();
        let zero = Matrix::from_entries(1, 1, vec![false]).unwrap();
        assert!(scalar_action(&bl, &zero, &r).equal(&Matrix::zeros(2, 2, &bl), &bl));
    }

    #[test]
    fn family_components_derive_by_interleaving() {
        let mut m = rel_model(2, &[]);
        let x = ObjectExpr::base("X");
        // Pairing diagonal on a two-element carrier.
        let delta = Matrix::<BoolAlg>::from_entries(
            4,
            2,
            vec![true, false, false, false, false, false, false, true],
        )
        .unwrap();
        m.add_family(
            "delta",
            NaturalFamily {
                kind: FamilyKind::Diagonal,
                components: BTreeMap::from([("X".to_string(), delta.clone())]),
            },
        )
        .unwrap();
        let xx = x.tensor(&x);
        let derived = m.family_component("delta", &xx).unwrap();
        // Oracle: (1 (x) sigma (x) 1) . (Delta (x) Delta).
        let sigma = m.sym_matrix(&x, &x).unwrap();
        let id2 = Matrix::identity(2, m.alg());
        let reorder = id2.kron(&sigma.kron(&id2, m.alg()), m.alg());
        let expected = reorder.mul(&delta.kron(&delta, m.alg()), m.alg());
        assert!(derived.equal(&expected, m.alg()));
        // The empty word derives to the 1x1 identity.
        let at_unit = m.family_component("delta", &ObjectExpr::unit()).unwrap();
        assert_eq!(at_unit.rows(), 1);
        assert!(*at_unit.scalar_value());

        // Rows tensor: a discard family.
        m.add_family(
            "drop",
            NaturalFamily {
                kind: FamilyKind::Deleting,
                components: BTreeMap::from([(
                    "X".to_string(),
                    Matrix::from_entries(1, 2, vec![true, true]).unwrap(),
                )]),
            },
        )
        .unwrap();
        let row = m.family_component("drop", &xx).unwrap();
        assert_eq!(row.entries(), &[true, true, true, true]);
        // Projection p_{X,X} = 1 (x) row.
        m.add_family(
            "p",
            NaturalFamily {
                kind: FamilyKind::ProjLeft,
                components: BTreeMap::from([(
                    "X".to_string(),
                    Matrix::from_entries(1, 2, vec![true, true]).unwrap(),
                )]),
            },
        )
        .unwrap();
        let p = m.projection("p", &x, &x).unwrap();
        let id = Matrix::identity(2, m.alg());
        let row1 = Matrix::<BoolAlg>::from_entries(1, 2, vec![true, true]).unwrap();
        assert!(p.equal(&id.kron(&row1, m.alg()), m.alg()));
    }

    #[test]
    fn word_keys_parse_and_reject() {
        let mut sig = Signature::new(true);
        sig.add_base_object("A").unwrap();
        sig.add_base_object("B").unwrap();
        let w = parse_word("A * dual(B)", &sig).unwrap();
        assert_eq!(w.to_string(), "A * dual(B)");
        assert!(parse_word("I", &sig).unwrap().is_unit());
        assert!(parse_word("I * A", &sig).is_err());
        assert!(parse_word("Q", &sig).is_err());
    }

    #[test]
    fn sym_eval_is_a_block_swap() {
        let m = fdvec_model(2);
        let x = ObjectExpr::base("X");
        let xx = x.tensor(&x);
        let s = m.sym_matrix(&xx, &x).unwrap();
        // Column (i, j, k) moves to row (k, i, j).
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let col = (i * 2 + j) * 2 + k;
                    let row = (k * 2 + i) * 2 + j;
                    assert_eq!(s.get(row, col), &rat(1));
                }
            }
        }
    }
}
