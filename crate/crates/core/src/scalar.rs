//! Commutative scalar algebras: the semiring interface every evaluator is
//! generic over, plus the five built-in instances (booleans, rationals,
//! complex rationals, complex floats with tolerance, and finite meet
//! semilattices).
//!
//! Laws assumed of every instance: `add` and `mul` commutative and
//! associative with units `zero` and `one`, `mul` distributing over `add`,
//! and `conj` an involutive `mul`-automorphism fixing `zero` and `one`.
//! Annihilation (`zero * x = zero`) is deliberately not assumed: the
//! semilattice instance has `zero = one = top`. Evaluators therefore skip
//! vanishing terms instead of multiplying by `zero`.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::complex::Complex;
use num::{One, Zero};
use std::fmt;

/// A commutative semiring with an involution, element equality, and
/// printing. Operations take `&self` so instances can carry tables.
pub trait ScalarAlgebra: Clone + fmt::Debug {
    type Elem: Clone + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn equal(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    fn conj(&self, a: &Self::Elem) -> Self::Elem;
    fn format(&self, a: &Self::Elem) -> String;

    fn is_zero(&self, a: &Self::Elem) -> bool {
        self.equal(a, &self.zero())
    }

    /// All elements, when the carrier is finite (used for exhaustive scalar
    /// checks); `None` for infinite carriers.
    fn enumerate(&self) -> Option<Vec<Self::Elem>> {
        None
    }

    /// A natural number as a scalar (n-fold sum of `one`); the value of a
    /// free loop on an object of dimension n.
    fn from_count(&self, n: usize) -> Self::Elem {
        let mut acc = self.zero();
        for _ in 0..n {
            acc = self.add(&acc, &self.one());
        }
        acc
    }
}

/// Additive inverses and division, for the field-like algebras; enables
/// Gaussian elimination.
pub trait RingAlgebra: ScalarAlgebra {
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
}

/// Booleans: or / and.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoolAlg;

impl ScalarAlgebra for BoolAlg {
    type Elem = bool;

    fn zero(&self) -> bool {
        false
    }

    fn one(&self) -> bool {
        true
    }

    fn add(&self, a: &bool, b: &bool) -> bool {
        *a || *b
    }

    fn mul(&self, a: &bool, b: &bool) -> bool {
        *a && *b
    }

    fn equal(&self, a: &bool, b: &bool) -> bool {
        a == b
    }

    fn conj(&self, a: &bool) -> bool {
        *a
    }

    fn format(&self, a: &bool) -> String {
        if *a { "1".into() } else { "0".into() }
    }

    fn enumerate(&self) -> Option<Vec<bool>> {
        Some(vec![false, true])
    }
}

/// Arbitrary-precision rationals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RatAlg;

impl ScalarAlgebra for RatAlg {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn one(&self) -> BigRational {
        BigRational::one()
    }

    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }

    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn equal(&self, a: &BigRational, b: &BigRational) -> bool {
        a == b
    }

    fn conj(&self, a: &BigRational) -> BigRational {
        a.clone()
    }

    fn format(&self, a: &BigRational) -> String {
        if a.is_integer() {
            a.numer().to_string()
        } else {
            a.to_string()
        }
    }
}

impl RingAlgebra for RatAlg {
    fn neg(&self, a: &BigRational) -> BigRational {
        -a.clone()
    }

    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
}

/// Complex numbers with exact rational parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CRatAlg;

impl ScalarAlgebra for CRatAlg {
    type Elem = Complex<BigRational>;

    fn zero(&self) -> Self::Elem {
        Complex::new(BigRational::zero(), BigRational::zero())
    }

    fn one(&self) -> Self::Elem {
        Complex::new(BigRational::one(), BigRational::zero())
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        Complex::new(&a.re + &b.re, &a.im + &b.im)
    }

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        Complex::new(&a.re * &b.re - &a.im * &b.im, &a.re * &b.im + &a.im * &b.re)
    }

    fn equal(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        a.re == b.re && a.im == b.im
    }

    fn conj(&self, a: &Self::Elem) -> Self::Elem {
        Complex::new(a.re.clone(), -a.im.clone())
    }

    fn format(&self, a: &Self::Elem) -> String {
        let rat = RatAlg;
        if a.im.is_zero() {
            rat.format(&a.re)
        } else {
            format!("{}+{}i", rat.format(&a.re), rat.format(&a.im))
        }
    }
}

impl RingAlgebra for CRatAlg {
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        Complex::new(-a.re.clone(), -a.im.clone())
    }

    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem> {
        let norm = &a.re * &a.re + &a.im * &a.im;
        if norm.is_zero() {
            return None;
        }
        Some(Complex::new(&a.re / &norm, -a.im.clone() / norm))
    }
}

/// Complex floats with a relative comparison tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CFloatAlg {
    pub tol: f64,
}

impl CFloatAlg {
    pub fn new(tol: f64) -> Self {
        assert!(tol >= 0.0, "tolerance must be nonnegative");
        CFloatAlg { tol }
    }
}

impl Default for CFloatAlg {
    fn default() -> Self {
        CFloatAlg { tol: 1e-9 }
    }
}

impl ScalarAlgebra for CFloatAlg {
    type Elem = Complex<f64>;

    fn zero(&self) -> Self::Elem {
        Complex::new(0.0, 0.0)
    }

    fn one(&self) -> Self::Elem {
        Complex::new(1.0, 0.0)
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a + b
    }

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a * b
    }

    /// Relative comparison: |a-b| <= tol * max(1, |a|, |b|).
    fn equal(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        let scale = 1f64.max(a.norm()).max(b.norm());
        (a - b).norm() <= self.tol * scale
    }

    fn conj(&self, a: &Self::Elem) -> Self::Elem {
        a.conj()
    }

    fn format(&self, a: &Self::Elem) -> String {
        if a.im == 0.0 {
            format!("{}", a.re)
        } else {
            format!("{}+{}i", a.re, a.im)
        }
    }
}

impl RingAlgebra for CFloatAlg {
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        -a
    }

    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem> {
        if a.norm() == 0.0 {
            None
        } else {
            Some(a.inv())
        }
    }
}

/// Validation failures for meet tables.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum NotASemilattice {
    #[error("meet table is not square over {0} elements")]
    BadShape(usize),
    #[error("meet table entry out of range at ({0}, {1})")]
    OutOfRange(usize, usize),
    #[error("meet not commutative at ({0}, {1})")]
    NotCommutative(usize, usize),
    #[error("meet not associative at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("meet not idempotent at {0}")]
    NotIdempotent(usize),
    #[error("no unit (top) element")]
    NoUnit,
}

/// A finite meet semilattice with a top element. Elements are indices into
/// `elements`; `add = mul = meet`, and `zero = one = top`, which satisfies
/// every law above except annihilation (not assumed).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeetAlg {
    elements: Vec<String>,
    meet: Vec<Vec<usize>>,
    top: usize,
}

impl MeetAlg {
    pub fn new(elements: Vec<String>, meet: Vec<Vec<usize>>) -> Result<Self, NotASemilattice> {
        let n = elements.len();
        if meet.len() != n || meet.iter().any(|row| row.len() != n) {
            return Err(NotASemilattice::BadShape(n));
        }
        for (i, row) in meet.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v >= n {
                    return Err(NotASemilattice::OutOfRange(i, j));
                }
            }
        }
        for i in 0..n {
            if meet[i][i] != i {
                return Err(NotASemilattice::NotIdempotent(i));
            }
            for j in 0..n {
                if meet[i][j] != meet[j][i] {
                    return Err(NotASemilattice::NotCommutative(i, j));
                }
                for k in 0..n {
                    if meet[meet[i][j]][k] != meet[i][meet[j][k]] {
                        return Err(NotASemilattice::NotAssociative(i, j, k));
                    }
                }
            }
        }
        let top = (0..n)
            .find(|&t| (0..n).all(|x| meet[t][x] == x))
            .ok_or(NotASemilattice::NoUnit)?;
        Ok(MeetAlg { elements, meet, top })
    }

    /// The two-point chain 0 < 1 with meet = min.
    pub fn two_chain() -> Self {
        MeetAlg::new(
            vec!["0".into(), "1".into()],
            vec![vec![0, 0], vec![0, 1]],
        )
        .expect("chain is a semilattice")
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn element_names(&self) -> &[String] {
        &self.elements
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == name)
    }

    pub fn meet_of(&self, a: usize, b: usize) -> usize {
        self.meet[a][b]
    }
}

impl ScalarAlgebra for MeetAlg {
    type Elem = usize;

    fn zero(&self) -> usize {
        self.top
    }

    fn one(&self) -> usize {
        self.top
    }

    fn add(&self, a: &usize, b: &usize) -> usize {
        self.meet[*a][*b]
    }

    fn mul(&self, a: &usize, b: &usize) -> usize {
        self.meet[*a][*b]
    }

    fn equal(&self, a: &usize, b: &usize) -> bool {
        a == b
    }

    fn conj(&self, a: &usize) -> usize {
        *a
    }

    fn format(&self, a: &usize) -> String {
        self.elements[*a].clone()
    }

    fn enumerate(&self) -> Option<Vec<usize>> {
        Some((0..self.elements.len()).collect())
    }
}

/// Rational from an integer, for test and builder ergonomics.
pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Rational p/q.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Complex rational from integer parts.
pub fn crat(re: i64, im: i64) -> Complex<BigRational> {
    Complex::new(rat(re), rat(im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meet_algebra_laws_and_unit() {
        let alg = MeetAlg::two_chain();
        assert_eq!(alg.top(), 1);
        assert_eq!(alg.one(), 1);
        assert_eq!(alg.mul(&0, &1), 0);
        assert_eq!(alg.mul(&1, &1), 1);
        assert_eq!(alg.enumerate(), Some(vec![0, 1]));
        // from_count: 0 -> top (empty sum = zero = top), n>0 -> meet of tops = top.
        assert_eq!(alg.from_count(3), alg.top());
    }

    #[test]
    fn meet_validation_rejects_bad_tables() {
        // Not idempotent.
        let bad = MeetAlg::new(vec!["a".into()], vec![vec![0]]);
        assert!(bad.is_ok());
        let bad = MeetAlg::new(
            vec!["a".into(), "b".into()],
            vec![vec![1, 0], vec![0, 1]],
        );
        assert_eq!(bad.unwrap_err(), NotASemilattice::NotIdempotent(0));
        // Not commutative.
        let bad = MeetAlg::new(
            vec!["a".into(), "b".into()],
            vec![vec![0, 0], vec![1, 1]],
        );
        assert_eq!(bad.unwrap_err(), NotASemilattice::NotCommutative(0, 1));
        // No unit: two-element antichain with a bottom is not expressible on
        // two points; drop to the empty check via a 3-point vee with no top.
        let bad = MeetAlg::new(
            vec!["x".into(), "y".into(), "bot".into()],
            vec![vec![0, 2, 2], vec![2, 1, 2], vec![2, 2, 2]],
        );
        assert_eq!(bad.unwrap_err(), NotASemilattice::NoUnit);
    }

    #[test]
    fn cfloat_relative_tolerance() {
        let alg = CFloatAlg::default();
        let a = Complex::new(1.0, 0.0);
        let b = Complex::new(1.0 + 1e-12, 0.0);
        assert!(alg.equal(&a, &b));
        let c = Complex::new(1.0 + 1e-6, 0.0);
        assert!(!alg.equal(&a, &c));
        // Relative: large magnitudes widen the window.
        let big = Complex::new(1e12, 0.0);
        let big2 = Complex::new(1e12 + 1.0, 0.0);
        assert!(alg.equal(&big, &big2));
    }

    #[test]
    fn crat_multiplication_and_conj() {
        let alg = CRatAlg;
        let i = crat(0, 1);
        let m1 = alg.mul(&i, &i);
        assert!(alg.equal(&m1, &crat(-1, 0)));
        assert!(alg.equal(&alg.conj(&i), &crat(0, -1)));
        assert!(alg.equal(&alg.mul(&alg.conj(&i), &i), &crat(1, 0)));
    }

    #[test]
    fn from_count_matches_dimension_semantics() {
        assert_eq!(RatAlg.from_count(4), rat(4));
        assert!(BoolAlg.from_count(2));
        assert!(!BoolAlg.from_count(0));
    }
}
