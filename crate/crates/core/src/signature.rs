//! Signatures: generating objects, tensor words, and typed generators.
//!
//! Objects live in strict monoidal normal form: an [`ObjectExpr`] is a flat
//! word of factors, each a base object with a polarity flag. The empty word
//! is the tensor unit `I`. Duals act factorwise and preserve order, so
//! `dual(A x B) = dual(A) x dual(B)` and `dual` is an involution on words.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// One factor of a tensor word: a base object, possibly dualized.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub base: String,
    pub dual: bool,
}

impl Factor {
    pub fn plain(base: impl Into<String>) -> Self {
        Factor { base: base.into(), dual: false }
    }

    pub fn dual(base: impl Into<String>) -> Self {
        Factor { base: base.into(), dual: true }
    }

    pub fn flipped(&self) -> Self {
        Factor { base: self.base.clone(), dual: !self.dual }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dual {
            write!(f, "dual({})", self.base)
        } else {
            write!(f, "{}", self.base)
        }
    }
}

/// A tensor word of factors; the empty word is the unit object `I`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct ObjectExpr {
    pub factors: Vec<Factor>,
}

impl ObjectExpr {
    /// The tensor unit `I` (empty word).
    pub fn unit() -> Self {
        ObjectExpr { factors: Vec::new() }
    }

    /// Single plain base object.
    pub fn base(name: impl Into<String>) -> Self {
        ObjectExpr { factors: vec![Factor::plain(name)] }
    }

    /// Single dualized base object.
    pub fn dual_base(name: impl Into<String>) -> Self {
        ObjectExpr { factors: vec![Factor::dual(name)] }
    }

    pub fn from_factors(factors: Vec<Factor>) -> Self {
        ObjectExpr { factors }
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Word concatenation (strict tensor on objects).
    pub fn tensor(&self, other: &ObjectExpr) -> ObjectExpr {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        ObjectExpr { factors }
    }

    /// Factorwise polarity flip, order preserved. Involutive.
    pub fn dual(&self) -> ObjectExpr {
        ObjectExpr { factors: self.factors.iter().map(Factor::flipped).collect() }
    }

    /// True when `suffix` is a trailing segment of this word.
    pub fn ends_with(&self, suffix: &ObjectExpr) -> bool {
        self.len() >= suffix.len() && self.factors[self.len() - suffix.len()..] == suffix.factors[..]
    }

    /// Drops a trailing segment; caller must have checked `ends_with`.
    pub fn strip_suffix(&self, suffix: &ObjectExpr) -> ObjectExpr {
        debug_assert!(self.ends_with(suffix));
        ObjectExpr { factors: self.factors[..self.len() - suffix.len()].to_vec() }
    }
}

impl fmt::Display for ObjectExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "I");
        }
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " * ")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

/// Pointwise polarity flip on a word; exposed as a free function to mirror
/// the object-level operation name.
pub fn dual_object(a: &ObjectExpr) -> ObjectExpr {
    a.dual()
}

/// A typed generating morphism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub dom: ObjectExpr,
    pub cod: ObjectExpr,
}

/// A user signature: named base objects plus typed generators.
///
/// `dagger_closed` records whether dagger syntax is admitted over this
/// signature; when false, `Term::Dagger` fails typechecking.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    base_objects: Vec<String>,
    generators: BTreeMap<String, Generator>,
    pub dagger_closed: bool,
}

/// Errors raised while assembling a signature.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("unknown base object `{0}`")]
    UnknownBase(String),
    #[error("`I` is reserved for the tensor unit")]
    ReservedUnitName,
}

impl Signature {
    pub fn new(dagger_closed: bool) -> Self {
        Signature { base_objects: Vec::new(), generators: BTreeMap::new(), dagger_closed }
    }

    pub fn add_base_object(&mut self, name: impl Into<String>) -> Result<(), SignatureError> {
        let name = name.into();
        if name == "I" {
            return Err(SignatureError::ReservedUnitName);
        }
        if self.base_objects.iter().any(|b| *b == name) || self.generators.contains_key(&name) {
            return Err(SignatureError::DuplicateName(name));
        }
        self.base_objects.push(name);
        Ok(())
    }

    pub fn add_generator(
        &mut self,
        name: impl Into<String>,
        dom: ObjectExpr,
        cod: ObjectExpr,
    ) -> Result<(), SignatureError> {
        let name = name.into();
        if name == "I" {
            return Err(SignatureError::ReservedUnitName);
        }
        if self.generators.contains_key(&name) || self.base_objects.iter().any(|b| *b == name) {
            return Err(SignatureError::DuplicateName(name));
        }
        self.check_word(&dom)?;
        self.check_word(&cod)?;
        self.generators.insert(name.clone(), Generator { name, dom, cod });
        Ok(())
    }

    pub fn check_word(&self, word: &ObjectExpr) -> Result<(), SignatureError> {
        for factor in &word.factors {
            if !self.has_base(&factor.base) {
                return Err(SignatureError::UnknownBase(factor.base.clone()));
            }
        }
        Ok(())
    }

    pub fn has_base(&self, name: &str) -> bool {
        self.base_objects.iter().any(|b| b == name)
    }

    /// Base objects in declaration order.
    pub fn base_objects(&self) -> &[String] {
        &self.base_objects
    }

    pub fn generator(&self, name: &str) -> Option<&Generator> {
        self.generators.get(name)
    }

    /// Generators in name order.
    pub fn generators(&self) -> impl Iterator<Item = &Generator> {
        self.generators.values()
    }
}

/// A finite permutation in one-line image form: `images[i]` is where
/// position `i` goes (0-based). Composition is right-to-left:
/// `(p.compose(&q))(i) = p(q(i))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// Builds from 0-based images; `None` if not a bijection.
    pub fn from_images(images: Vec<usize>) -> Option<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &img in &images {
            if img >= n || seen[img] {
                return None;
            }
            seen[img] = true;
        }
        Some(Permutation { images })
    }

    /// Builds from the 1-based one-line notation used in written sources,
    /// e.g. `(3 2 1 4)` as `&[3, 2, 1, 4]`.
    pub fn from_one_based(images: &[usize]) -> Option<Self> {
        if images.iter().any(|&i| i == 0) {
            return None;
        }
        Self::from_images(images.iter().map(|&i| i - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.images.len()];
        for (i, &img) in self.images.iter().enumerate() {
            images[img] = i;
        }
        Permutation { images }
    }

    /// Right-to-left composition: the result sends `i` to `self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.len(), other.len(), "permutation sizes differ");
        Permutation { images: other.images.iter().map(|&i| self.images[i]).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &img)| i == img)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, img) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", img + 1)?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(spec: &[(&str, bool)]) -> ObjectExpr {
        ObjectExpr::from_factors(
            spec.iter().map(|(b, d)| Factor { base: b.to_string(), dual: *d }).collect(),
        )
    }

    #[test]
    fn dual_flips_polarity_pointwise_and_preserves_order() {
        let w = word(&[("A", false), ("B", true), ("A", false)]);
        let d = w.dual();
        assert_eq!(d, word(&[("A", true), ("B", false), ("A", true)]));
        assert_eq!(d.dual(), w);
    }

    #[test]
    fn unit_is_self_dual_and_neutral() {
        let i = ObjectExpr::unit();
        assert_eq!(i.dual(), i);
        let a = ObjectExpr::base("A");
        assert_eq!(i.tensor(&a), a);
        assert_eq!(a.tensor(&i), a);
    }

    #[test]
    fn display_round_trip_forms() {
        assert_eq!(ObjectExpr::unit().to_string(), "I");
        let w = word(&[("A", false), ("B", true)]);
        assert_eq!(w.to_string(), "A * dual(B)");
    }

    #[test]
    fn permutation_rejects_non_bijections() {
        assert!(Permutation::from_images(vec![0, 0]).is_none());
        assert!(Permutation::from_images(vec![1, 2, 0]).is_some());
        assert!(Permutation::from_one_based(&[2, 1, 3, 3]).is_none());
    }

    #[test]
    fn composition_matches_the_worked_identity() {
        // (1 3 2 4) o (2 1 3 4) = (3 2 1 4) o (1 3 2 4); both equal (3 1 2 4).
        let p = Permutation::from_one_based(&[1, 3, 2, 4]).unwrap();
        let q = Permutation::from_one_based(&[2, 1, 3, 4]).unwrap();
        let r = Permutation::from_one_based(&[3, 2, 1, 4]).unwrap();
        let lhs = p.compose(&q);
        let rhs = r.compose(&p);
        assert_eq!(lhs, rhs);
        assert_eq!(lhs, Permutation::from_one_based(&[3, 1, 2, 4]).unwrap());
    }

    #[test]
    fn inverse_composes_to_identity() {
        let p = Permutation::from_one_based(&[3, 1, 2, 4]).unwrap();
        assert!(p.compose(&p.inverse()).is_identity());
        assert!(p.inverse().compose(&p).is_identity());
    }

    #[test]
    fn signature_name_hygiene() {
        let mut sig = Signature::new(true);
        sig.add_base_object("A").unwrap();
        assert_eq!(sig.add_base_object("A"), Err(SignatureError::DuplicateName("A".into())));
        assert_eq!(sig.add_base_object("I"), Err(SignatureError::ReservedUnitName));
        sig.add_generator("f", ObjectExpr::base("A"), ObjectExpr::base("A")).unwrap();
        assert_eq!(
            sig.add_generator("f", ObjectExpr::base("A"), ObjectExpr::base("A")),
            Err(SignatureError::DuplicateName("f".into()))
        );
        let bad = sig.add_generator("g", ObjectExpr::base("B"), ObjectExpr::base("A"));
        assert_eq!(bad, Err(SignatureError::UnknownBase("B".into())));
    }
}
