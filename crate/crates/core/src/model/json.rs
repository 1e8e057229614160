//! Model files: JSON with `kind`, `scalars`, `objects` (name to dimension),
//! `generators` (name to row-major matrix), `meet_table` for semilattice
//! scalars, optional `families` and `protocols.teleport`.
//!
//! Matrices are arrays of rows; a flat array is also accepted where the
//! shape is known from the signature. Rational entries are integers or
//! "p/q" strings; complex entries are [re, im] pairs; semilattice entries
//! are element names from the meet table.

use super::{
    parse_word, FamilyKind, Model, ModelError, ModelKind, ModelT, NaturalFamily, TeleportBranch,
    TeleportSpec,
};
use crate::matrix::Matrix;
use crate::scalar::{BoolAlg, CFloatAlg, CRatAlg, MeetAlg, RatAlg, ScalarAlgebra};
use crate::signature::Signature;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::Complex;
use serde_json::Value;
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum ModelJsonError {
    #[error("invalid JSON: {0}")]
    Parse(String),
    #[error("missing or malformed field {0}")]
    Field(String),
    #[error("unknown model kind {0:?}")]
    UnknownKind(String),
    #[error("unknown scalars {0:?}")]
    UnknownScalars(String),
    #[error("kind {kind} cannot use scalars {scalars}")]
    KindScalarMismatch { kind: String, scalars: String },
    #[error("bad entry in {context}: {detail}")]
    Entry { context: String, detail: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot read {path}: {detail}")]
    Io { path: String, detail: String },
}

fn entry_err(context: &str, detail: impl Into<String>) -> ModelJsonError {
    ModelJsonError::Entry { context: context.to_string(), detail: detail.into() }
}

pub fn model_from_json_file(
    path: impl AsRef<Path>,
    sig: &Arc<Signature>,
) -> Result<Model, ModelJsonError> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path).map_err(|e| ModelJsonError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    model_from_json_str(&src, sig)
}

pub fn model_from_json_str(src: &str, sig: &Arc<Signature>) -> Result<Model, ModelJsonError> {
    model_from_json_str_tol(src, sig, None)
}

/// Reads a model whose file also declares its signature, so it can stand
/// alone: base objects are the keys of `objects`, and an optional
/// `signature` section adds `dagger` (default: every kind except finset)
/// and `generators` (name to `{"dom": word, "cod": word}`).
pub fn model_from_json_file_auto(
    path: impl AsRef<Path>,
    tol: Option<f64>,
) -> Result<(Model, Arc<Signature>), ModelJsonError> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path).map_err(|e| ModelJsonError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    model_from_json_str_auto(&src, tol)
}

pub fn model_from_json_str_auto(
    src: &str,
    tol: Option<f64>,
) -> Result<(Model, Arc<Signature>), ModelJsonError> {
    let v: Value =
        serde_json::from_str(src).map_err(|e| ModelJsonError::Parse(e.to_string()))?;
    let obj = v.as_object().ok_or_else(|| ModelJsonError::Field("top-level object".into()))?;
    let kind_s = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| ModelJsonError::Field("kind".into()))?;
    let kind = ModelKind::parse(kind_s)
        .ok_or_else(|| ModelJsonError::UnknownKind(kind_s.to_string()))?;
    let sig_v = obj.get("signature").and_then(Value::as_object);
    let dagger = sig_v
        .and_then(|s| s.get("dagger"))
        .and_then(Value::as_bool)
        .unwrap_or(kind != ModelKind::Finset);
    let mut sig = Signature::new(dagger);
    let objects = obj
        .get("objects")
        .and_then(Value::as_object)
        .ok_or_else(|| ModelJsonError::Field("objects".into()))?;
    for name in objects.keys() {
        sig.add_base_object(name)
            .map_err(|e| entry_err("objects", e.to_string()))?;
    }
    if let Some(gens) = sig_v.and_then(|s| s.get("generators")) {
        let gmap = gens
            .as_object()
            .ok_or_else(|| ModelJsonError::Field("signature.generators".into()))?;
        for (name, gv) in gmap {
            let ctx = format!("signature.generators.{}", name);
            let gobj = gv
                .as_object()
                .ok_or_else(|| ModelJsonError::Field(ctx.clone()))?;
            let word = |key: &str| -> Result<_, ModelJsonError> {
                let s = gobj
                    .get(key)
                    .and_then(Value::as_str)
                    .ok_or_else(|| ModelJsonError::Field(format!("{}.{}", ctx, key)))?;
                Ok(parse_word(s, &sig)?)
            };
            let (dom, cod) = (word("dom")?, word("cod")?);
            sig.add_generator(name, dom, cod)
                .map_err(|e| entry_err(&ctx, e.to_string()))?;
        }
    }
    let sig = Arc::new(sig);
    let model = model_from_json_str_tol(src, &sig, tol)?;
    Ok((model, sig))
}

/// As `model_from_json_str`, with an optional override for the float
/// comparison tolerance.
pub fn model_from_json_str_tol(
    src: &str,
    sig: &Arc<Signature>,
    tol: Option<f64>,
) -> Result<Model, ModelJsonError> {
    let v: Value =
        serde_json::from_str(src).map_err(|e| ModelJsonError::Parse(e.to_string()))?;
    let obj = v.as_object().ok_or_else(|| ModelJsonError::Field("top-level object".into()))?;
    let kind_s = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| ModelJsonError::Field("kind".into()))?;
    let kind = ModelKind::parse(kind_s)
        .ok_or_else(|| ModelJsonError::UnknownKind(kind_s.to_string()))?;
    let default_scalars = match kind {
        ModelKind::Rel | ModelKind::Finset => "bool",
        ModelKind::FdVec => "rational",
        ModelKind::Semilattice => "semilattice",
    };
    let scalars = match obj.get("scalars") {
        None => default_scalars,
        Some(Value::String(s)) => s.as_str(),
        Some(_) => return Err(ModelJsonError::Field("scalars".into())),
    };
    let allowed = match kind {
        ModelKind::Rel | ModelKind::Finset => scalars == "bool",
        ModelKind::Semilattice => scalars == "semilattice",
        ModelKind::FdVec => {
            matches!(scalars, "rational" | "complex-rational" | "complex-float")
        }
    };
    if !allowed {
        return Err(ModelJsonError::KindScalarMismatch {
            kind: kind_s.to_string(),
            scalars: scalars.to_string(),
        });
    }
    match scalars {
        "bool" => build(kind, BoolAlg, sig, obj, &parse_bool).map(Model::Bool),
        "rational" => build(kind, RatAlg, sig, obj, &parse_rational).map(Model::Rat),
        "complex-rational" => {
            build(kind, CRatAlg, sig, obj, &parse_crational).map(Model::CRat)
        }
        "complex-float" => {
            let t = tol
                .or_else(|| obj.get("tolerance").and_then(Value::as_f64))
                .unwrap_or(1e-9);
            build(kind, CFloatAlg::new(t), sig, obj, &parse_cfloat).map(Model::CFloat)
        }
        "semilattice" => {
            let alg = parse_meet_table(obj)?;
            let named = alg.clone();
            let parse = move |v: &Value| parse_meet_elem(&named, v);
            build(kind, alg, sig, obj, &parse).map(Model::Meet)
        }
        other => Err(ModelJsonError::UnknownScalars(other.to_string())),
    }
}

fn build<A: ScalarAlgebra>(
    kind: ModelKind,
    alg: A,
    sig: &Arc<Signature>,
    obj: &serde_json::Map<String, Value>,
    parse: &dyn Fn(&Value) -> Result<A::Elem, String>,
) -> Result<ModelT<A>, ModelJsonError> {
    let mut dims = BTreeMap::new();
    let objects = obj
        .get("objects")
        .and_then(Value::as_object)
        .ok_or_else(|| ModelJsonError::Field("objects".into()))?;
    for (name, dv) in objects {
        let d = dv
            .as_u64()
            .ok_or_else(|| entry_err("objects", format!("dimension of {} must be a nonnegative integer", name)))?;
        dims.insert(name.clone(), d as usize);
    }
    let word_dim = |w: &crate::signature::ObjectExpr| -> Option<usize> {
        w.factors.iter().map(|f| dims.get(&f.base).copied()).product()
    };
    let mut gens = BTreeMap::new();
    if let Some(gv) = obj.get("generators") {
        let gmap = gv
            .as_object()
            .ok_or_else(|| ModelJsonError::Field("generators".into()))?;
        for (name, mv) in gmap {
            let expected = sig
                .generator(name)
                .and_then(|g| Some((word_dim(&g.cod)?, word_dim(&g.dom)?)));
            let ctx = format!("generators.{}", name);
            gens.insert(name.clone(), parse_matrix(&ctx, mv, expected, parse)?);
        }
    }
    let mut model = ModelT::new(kind, alg, Arc::clone(sig), dims, gens)?;

    if let Some(fv) = obj.get("families") {
        let fmap = fv
            .as_object()
            .ok_or_else(|| ModelJsonError::Field("families".into()))?;
        for (name, fval) in fmap {
            let fobj = fval
                .as_object()
                .ok_or_else(|| ModelJsonError::Field(format!("families.{}", name)))?;
            let kind_s = fobj
                .get("kind")
                .and_then(Value::as_str)
                .ok_or_else(|| ModelJsonError::Field(format!("families.{}.kind", name)))?;
            let fkind = FamilyKind::parse(kind_s)
                .ok_or_else(|| entry_err(&format!("families.{}", name), format!("unknown family kind {:?}", kind_s)))?;
            let comps = fobj
                .get("components")
                .and_then(Value::as_object)
                .ok_or_else(|| ModelJsonError::Field(format!("families.{}.components", name)))?;
            let mut components = BTreeMap::new();
            for (word_key, mv) in comps {
                let w = parse_word(word_key, sig)?;
                let d = model.dim_word(&w).expect("bases validated");
                let expected = match fkind {
                    FamilyKind::Diagonal => (d * d, d),
                    _ => (1, d),
                };
                let ctx = format!("families.{}.components.{}", name, word_key);
                // Store under the canonical display form of the word.
                components.insert(
                    w.to_string(),
                    parse_matrix(&ctx, mv, Some(expected), parse)?,
                );
            }
            model.add_family(name, NaturalFamily { kind: fkind, components })?;
        }
    }

    if let Some(pv) = obj.get("protocols") {
        let pmap = pv
            .as_object()
            .ok_or_else(|| ModelJsonError::Field("protocols".into()))?;
        if let Some(tv) = pmap.get("teleport") {
            let (object, branch_list) = match tv {
                Value::Array(arr) => (None, arr.as_slice()),
                Value::Object(tobj) => {
                    let object = tobj
                        .get("object")
                        .and_then(Value::as_str)
                        .map(str::to_string);
                    let arr = tobj
                        .get("branches")
                        .and_then(Value::as_array)
                        .ok_or_else(|| ModelJsonError::Field("protocols.teleport.branches".into()))?;
                    (object, arr.as_slice())
                }
                _ => return Err(ModelJsonError::Field("protocols.teleport".into())),
            };
            let expected = object
                .as_deref()
                .and_then(|name| model.dim(name))
                .map(|d| (d, d));
            let mut branches = Vec::new();
            for (i, bv) in branch_list.iter().enumerate() {
                let bobj = bv
                    .as_object()
                    .ok_or_else(|| ModelJsonError::Field(format!("protocols.teleport[{}]", i)))?;
                let label = bobj
                    .get("label")
                    .and_then(Value::as_str)
                    .map(str::to_string)
                    .unwrap_or_else(|| i.to_string());
                let branch = parse_matrix(
                    &format!("protocols.teleport[{}].branch", i),
                    bobj.get("branch")
                        .ok_or_else(|| ModelJsonError::Field(format!("protocols.teleport[{}].branch", i)))?,
                    expected,
                    parse,
                )?;
                let correction = parse_matrix(
                    &format!("protocols.teleport[{}].correction", i),
                    bobj.get("correction")
                        .ok_or_else(|| ModelJsonError::Field(format!("protocols.teleport[{}].correction", i)))?,
                    expected,
                    parse,
                )?;
                branches.push(TeleportBranch { label, branch, correction });
            }
            model.set_teleport(TeleportSpec { object, branches })?;
        }
    }
    Ok(model)
}

fn parse_matrix<A: ScalarAlgebra>(
    context: &str,
    v: &Value,
    expected: Option<(usize, usize)>,
    parse: &dyn Fn(&Value) -> Result<A::Elem, String>,
) -> Result<Matrix<A>, ModelJsonError> {
    let arr = v
        .as_array()
        .ok_or_else(|| entry_err(context, "matrix must be an array"))?;
    let nested = arr.first().map_or(false, Value::is_array);
    if nested {
        let rows = arr.len();
        let cols = arr[0].as_array().unwrap().len();
        let mut entries = Vec::with_capacity(rows * cols);
        for row in arr {
            let row = row
                .as_array()
                .filter(|r| r.len() == cols)
                .ok_or_else(|| entry_err(context, "ragged rows"))?;
            for cell in row {
                entries.push(parse(cell).map_err(|e| entry_err(context, e))?);
            }
        }
        if let Some((er, ec)) = expected {
            if rows != er || cols != ec {
                return Err(entry_err(
                    context,
                    format!("matrix is {}x{}, expected {}x{}", rows, cols, er, ec),
                ));
            }
        }
        Ok(Matrix::from_entries(rows, cols, entries).expect("shape checked"))
    } else {
        let (rows, cols) = expected
            .ok_or_else(|| entry_err(context, "flat matrix needs a shape known from the signature"))?;
        if arr.len() != rows * cols {
            return Err(entry_err(
                context,
                format!("flat matrix has {} entries, expected {}", arr.len(), rows * cols),
            ));
        }
        let mut entries = Vec::with_capacity(arr.len());
        for cell in arr {
            entries.push(parse(cell).map_err(|e| entry_err(context, e))?);
        }
        Ok(Matrix::from_entries(rows, cols, entries).expect("shape checked"))
    }
}

fn parse_bool(v: &Value) -> Result<bool, String> {
    match v {
        Value::Bool(b) => Ok(*b),
        Value::Number(n) => match n.as_i64() {
            Some(0) => Ok(false),
            Some(1) => Ok(true),
            _ => Err(format!("{} is not a boolean entry", n)),
        },
        other => Err(format!("{} is not a boolean entry", other)),
    }
}

fn parse_rational(v: &Value) -> Result<BigRational, String> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(|i| BigRational::from_integer(BigInt::from(i)))
            .ok_or_else(|| format!("{} is not an exact rational; use \"p/q\"", n)),
        Value::String(s) => {
            let s = s.trim();
            let (p, q) = match s.split_once('/') {
                Some((p, q)) => (p.trim(), q.trim()),
                None => (s, "1"),
            };
            let p = BigInt::from_str(p).map_err(|_| format!("bad numerator in {:?}", s))?;
            let q = BigInt::from_str(q).map_err(|_| format!("bad denominator in {:?}", s))?;
            if q == BigInt::from(0) {
                return Err(format!("zero denominator in {:?}", s));
            }
            Ok(BigRational::new(p, q))
        }
        other => Err(format!("{} is not a rational entry", other)),
    }
}

fn parse_crational(v: &Value) -> Result<Complex<BigRational>, String> {
    match v {
        Value::Array(parts) if parts.len() == 2 => Ok(Complex::new(
            parse_rational(&parts[0])?,
            parse_rational(&parts[1])?,
        )),
        other => parse_rational(other).map(|re| {
            Complex::new(re, BigRational::from_integer(BigInt::from(0)))
        }),
    }
}

fn parse_cfloat(v: &Value) -> Result<Complex<f64>, String> {
    match v {
        Value::Array(parts) if parts.len() == 2 => {
            let re = parts[0].as_f64().ok_or_else(|| format!("{} is not a float", parts[0]))?;
            let im = parts[1].as_f64().ok_or_else(|| format!("{} is not a float", parts[1]))?;
            Ok(Complex::new(re, im))
        }
        Value::Number(n) => {
            Ok(Complex::new(n.as_f64().ok_or_else(|| format!("{} is not a float", n))?, 0.0))
        }
        other => Err(format!("{} is not a complex float entry", other)),
    }
}

fn parse_meet_table(
    obj: &serde_json::Map<String, Value>,
) -> Result<MeetAlg, ModelJsonError> {
    let t = obj
        .get("meet_table")
        .and_then(Value::as_object)
        .ok_or_else(|| ModelJsonError::Field("meet_table".into()))?;
    let elements: Vec<String> = t
        .get("elements")
        .and_then(Value::as_array)
        .ok_or_else(|| ModelJsonError::Field("meet_table.elements".into()))?
        .iter()
        .map(|e| {
            e.as_str()
                .map(str::to_string)
                .ok_or_else(|| ModelJsonError::Field("meet_table.elements".into()))
        })
        .collect::<Result<_, _>>()?;
    let index_of = |name: &str| elements.iter().position(|e| e == name);
    let rows = t
        .get("meet")
        .and_then(Value::as_array)
        .ok_or_else(|| ModelJsonError::Field("meet_table.meet".into()))?;
    let mut meet = Vec::with_capacity(rows.len());
    for row in rows {
        let row = row
            .as_array()
            .ok_or_else(|| ModelJsonError::Field("meet_table.meet".into()))?;
        let mut out = Vec::with_capacity(row.len());
        for cell in row {
            let idx = match cell {
                Value::String(s) => index_of(s)
                    .ok_or_else(|| entry_err("meet_table.meet", format!("unknown element {:?}", s)))?,
                Value::Number(n) => n
                    .as_u64()
                    .map(|i| i as usize)
                    .ok_or_else(|| entry_err("meet_table.meet", format!("bad index {}", n)))?,
                other => {
                    return Err(entry_err("meet_table.meet", format!("bad cell {}", other)))
                }
            };
            out.push(idx);
        }
        meet.push(out);
    }
    MeetAlg::new(elements, meet).map_err(|e| ModelError::NotASemilattice(e).into())
}

fn parse_meet_elem(alg: &MeetAlg, v: &Value) -> Result<usize, String> {
    match v {
        Value::String(s) => alg
            .index_of(s)
            .ok_or_else(|| format!("unknown semilattice element {:?}", s)),
        Value::Number(n) => {
            let i = n.as_u64().ok_or_else(|| format!("bad element index {}", n))? as usize;
            if i < alg.size() {
                Ok(i)
            } else {
                Err(format!("element index {} out of range", i))
            }
        }
        other => Err(format!("{} is not a semilattice element", other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::ObjectExpr;

    fn two_base_sig() -> Arc<Signature> {
        let mut sig = Signature::new(true);
        sig.add_base_object("X").unwrap();
        sig.add_generator("f", ObjectExpr::base("X"), ObjectExpr::base("X")).unwrap();
        Arc::new(sig)
    }

    #[test]
    fn rel_model_round_trip() {
        let sig = two_base_sig();
        let src = r#"{
            "kind": "rel",
            "scalars": "bool",
            "objects": {"X": 2},
            "generators": {"f": [[1, 0], [1, 1]]}
        }"#;
        let m = model_from_json_str(src, &sig).unwrap();
        assert_eq!(m.kind(), ModelKind::Rel);
        match &m {
            Model::Bool(inner) => {
                let f = inner.generator_matrix("f").unwrap();
                assert_eq!(f.entries(), &[true, false, true, true]);
            }
            _ => panic!("expected a boolean model"),
        }
    }

    #[test]
    fn fdvec_rational_entries_and_flat_matrices() {
        let sig = two_base_sig();
        let src = r#"{
            "kind": "fdvec",
            "objects": {"X": 2},
            "generators": {"f": [1, "1/2", 0, "-2/3"]}
        }"#;
        let m = model_from_json_str(src, &sig).unwrap();
        match &m {
            Model::Rat(inner) => {
                let f = inner.generator_matrix("f").unwrap();
                assert_eq!(f.get(0, 1), &crate::scalar::ratio(1, 2));
                assert_eq!(f.get(1, 1), &crate::scalar::ratio(-2, 3));
            }
            _ => panic!("expected a rational model"),
        }
    }

    #[test]
    fn semilattice_model_with_meet_table() {
        let mut sig = Signature::new(true);
        sig.add_base_object("S").unwrap();
        sig.add_generator("a", ObjectExpr::unit(), ObjectExpr::unit()).unwrap();
        let sig = Arc::new(sig);
        let src = r#"{
            "kind": "semilattice",
            "objects": {"S": 1},
            "meet_table": {
                "elements": ["bot", "mid", "top"],
                "meet": [["bot", "bot", "bot"],
                         ["bot", "mid", "mid"],
                         ["bot", "mid", "top"]]
            },
            "generators": {"a": [["mid"]]}
        }"#;
        let m = model_from_json_str(src, &sig).unwrap();
        match &m {
            Model::Meet(inner) => {
                assert_eq!(inner.alg().size(), 3);
                assert_eq!(inner.alg().top(), 2);
                assert_eq!(inner.generator_matrix("a").unwrap().scalar_value(), &1);
            }
            _ => panic!("expected a semilattice model"),
        }
    }

    #[test]
    fn families_and_teleport_parse() {
        let mut sig = Signature::new(true);
        sig.add_base_object("Q").unwrap();
        let sig = Arc::new(sig);
        let src = r#"{
            "kind": "fdvec",
            "scalars": "complex-rational",
            "objects": {"Q": 2},
            "families": {
                "delta": {"kind": "diagonal",
                          "components": {"Q": [[1,0],[0,0],[0,0],[0,1]]}}
            },
            "protocols": {
                "teleport": {
                    "object": "Q",
                    "branches": [
                        {"label": "I", "branch": [[1,0],[0,1]],
                         "correction": [[1,0],[0,1]]}
                    ]
                }
            }
        }"#;
        let m = model_from_json_str(src, &sig).unwrap();
        assert_eq!(m.family_names(), vec!["delta".to_string()]);
        match &m {
            Model::CRat(inner) => {
                let tp = inner.teleport().unwrap();
                assert_eq!(tp.object.as_deref(), Some("Q"));
                assert_eq!(tp.branches.len(), 1);
                assert_eq!(tp.branches[0].label, "I");
            }
            _ => panic!("expected a complex rational model"),
        }
    }

    #[test]
    fn rejections() {
        let sig = two_base_sig();
        // Kind and scalars must agree.
        let src = r#"{"kind": "rel", "scalars": "rational", "objects": {"X": 2}}"#;
        assert!(matches!(
            model_from_json_str(src, &sig),
            Err(ModelJsonError::KindScalarMismatch { .. })
        ));
        // Floats are not rationals.
        let src = r#"{"kind": "fdvec", "objects": {"X": 1}, "generators": {"f": [[0.5]]}}"#;
        assert!(matches!(
            model_from_json_str(src, &sig),
            Err(ModelJsonError::Entry { .. })
        ));
        // Shape mismatches surface with the generator named.
        let src = r#"{"kind": "rel", "objects": {"X": 2}, "generators": {"f": [[1, 0]]}}"#;
        assert!(matches!(
            model_from_json_str(src, &sig),
            Err(ModelJsonError::Entry { .. })
        ));
    }
}
