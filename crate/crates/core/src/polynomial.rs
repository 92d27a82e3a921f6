//! Sparse bivariate polynomials in `(p, q)` and the monomial bases used to
//! build Gram-matrix certificates.
//!
//! Monomials are ordered graded-lexicographically: first by total degree,
//! then by decreasing `p` exponent. For degree one this gives
//! `1, p, q`; for degree two `p², pq, q²`. Every program index derived from a
//! basis follows this order, so compiled programs are reproducible.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Point;

/// Exponent pair `(i, j)` standing for `pⁱ qʲ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub p: u32,
    pub q: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { p: 0, q: 0 };

    pub const fn new(p: u32, q: u32) -> Self {
        Self { p, q }
    }

    pub fn degree(self) -> u32 {
        self.p + self.q
    }

    pub fn eval(self, x: Point) -> f64 {
        x.p.powi(self.p as i32) * x.q.powi(self.q as i32)
    }
}

impl Mul for Monomial {
    type Output = Monomial;

    fn mul(self, rhs: Monomial) -> Monomial {
        Monomial::new(self.p + rhs.p, self.q + rhs.q)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.p.cmp(&self.p))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.p, self.q) {
            (0, 0) => write!(f, "1"),
            (i, 0) => write!(f, "p^{i}"),
            (0, j) => write!(f, "q^{j}"),
            (i, j) => write!(f, "p^{i} q^{j}"),
        }
    }
}

/// Bivariate polynomial stored as a sparse exponent → coefficient map.
///
/// The map never holds an exact zero coefficient, so two polynomials are
/// equal iff their term maps are equal.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly2 {
    terms: BTreeMap<Monomial, f64>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms([(Monomial::ONE, c)])
    }

    /// The coordinate polynomial `p`.
    pub fn p() -> Self {
        Self::from_terms([(Monomial::new(1, 0), 1.0)])
    }

    /// The coordinate polynomial `q`.
    pub fn q() -> Self {
        Self::from_terms([(Monomial::new(0, 1), 1.0)])
    }

    pub fn monomial(m: Monomial, coeff: f64) -> Self {
        Self::from_terms([(m, coeff)])
    }

    /// `a·p + b·q + c`
    pub fn linear(a: f64, b: f64, c: f64) -> Self {
        Self::from_terms([
            (Monomial::ONE, c),
            (Monomial::new(1, 0), a),
            (Monomial::new(0, 1), b),
        ])
    }

    /// Builds a polynomial from `(monomial, coefficient)` pairs, merging
    /// repeated monomials and dropping zeros.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, f64)>,
    {
        let mut out = Self::zero();
        for (m, c) in terms {
            out.add_term(m, c);
        }
        out
    }

    fn add_term(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        let slot = self.terms.entry(m).or_insert(0.0);
        *slot += c;
        if *slot == 0.0 {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree −1.
    pub fn degree(&self) -> i32 {
        self.terms
            .keys()
            .map(|m| m.degree() as i32)
            .max()
            .unwrap_or(-1)
    }

    pub fn coeff(&self, m: Monomial) -> f64 {
        self.terms.get(&m).copied().unwrap_or(0.0)
    }

    /// Terms in graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (Monomial, f64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, c| acc.max(c.abs()))
    }

    pub fn eval(&self, x: Point) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.eval(x)).sum()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::from_terms(self.terms().map(|(m, c)| (m, c * k)))
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(1.0), |acc, _| &acc * self)
    }

    /// Returns `g(s·x + cp, s·y + cq)`, i.e. this polynomial pulled back
    /// through an axis-aligned scaling about a centre.
    pub fn pull_back(&self, s: f64, center: Point) -> Self {
        let lp = Poly2::linear(s, 0.0, center.p);
        let lq = Poly2::linear(0.0, s, center.q);
        let mut out = Poly2::zero();
        for (m, c) in self.terms() {
            out = &out + &(&lp.pow(m.p) * &lq.pow(m.q)).scale(c);
        }
        out
    }
}

impl Add for &Poly2 {
    type Output = Poly2;

    fn add(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (m, c) in rhs.terms() {
            out.add_term(m, c);
        }
        out
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;

    fn sub(self, rhs: &Poly2) -> Poly2 {
        self + &(-rhs)
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;

    fn neg(self) -> Poly2 {
        self.scale(-1.0)
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;

    fn mul(self, rhs: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for (ma, ca) in self.terms() {
            for (mb, cb) in rhs.terms() {
                out.add_term(ma * mb, ca * cb);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for Poly2 {
            type Output = Poly2;
            fn $f(self, rhs: Poly2) -> Poly2 {
                (&self).$f(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}·{m}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    terms: Vec<(u32, u32, f64)>,
}

impl Serialize for Poly2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyRepr {
            terms: self.terms().map(|(m, c)| (m.p, m.q, c)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(d)?;
        if let Some(&(_, _, c)) = repr.terms.iter().find(|t| !t.2.is_finite()) {
            return Err(D::Error::custom(format!("non-finite coefficient {c}")));
        }
        Ok(Poly2::from_terms(
            repr.terms
                .into_iter()
                .map(|(i, j, c)| (Monomial::new(i, j), c)),
        ))
    }
}

/// All monomials of total degree at most `max_degree`, in graded-lex order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialBasis {
    entries: Vec<Monomial>,
    max_degree: u32,
}

impl MonomialBasis {
    pub fn new(max_degree: u32) -> Self {
        let entries = (0..=max_degree)
            .flat_map(|d| (0..=d).rev().map(move |i| Monomial::new(i, d - i)))
            .collect();
        Self {
            entries,
            max_degree,
        }
    }

    pub fn entries(&self) -> &[Monomial] {
        &self.entries
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(d+1)(d+2)/2`
    pub fn size_for(max_degree: u32) -> usize {
        let d = max_degree as usize;
        (d + 1) * (d + 2) / 2
    }

    pub fn eval(&self, x: Point) -> Vec<f64> {
        self.entries.iter().map(|m| m.eval(x)).collect()
    }

    /// For every monomial reachable as a product of two basis entries, the
    /// upper-triangle positions `(row, col)` with `row <= col` whose Gram
    /// entries contribute to its coefficient. A diagonal hit contributes
    /// `Ξ[r][r]`, an off-diagonal hit `2·Ξ[r][c]`.
    pub fn gram_expand(&self) -> BTreeMap<Monomial, Vec<(usize, usize)>> {
        let mut out: BTreeMap<Monomial, Vec<(usize, usize)>> = BTreeMap::new();
        for (r, &mr) in self.entries.iter().enumerate() {
            for (c, &mc) in self.entries.iter().enumerate().skip(r) {
                out.entry(mr * mc).or_default().push((r, c));
            }
        }
        out
    }

    /// Polynomial `z(x)ᵀ Ξ z(x)` for a symmetric matrix given row-major.
    pub fn gram_polynomial(&self, gram: &[f64]) -> Poly2 {
        let n = self.len();
        assert_eq!(gram.len(), n * n, "gram matrix must be {n}×{n}");
        let mut out = Poly2::zero();
        for (m, hits) in self.gram_expand() {
            let c: f64 = hits
                .iter()
                .map(|&(r, col)| {
                    if r == col {
                        gram[r * n + col]
                    } else {
                        2.0 * gram[r * n + col]
                    }
                })
                .sum();
            out.add_term(m, c);
        }
        out
    }
}

/// Graded-lex basis of all monomials with `i + j <= max_degree`.
pub fn basis(max_degree: u32) -> MonomialBasis {
    MonomialBasis::new(max_degree)
}
