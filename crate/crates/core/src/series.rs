//! Sparse truncated multivariate formal power series.
//!
//! A [`TruncatedSeries`] stores the terms of an element of K[[X_1,...,X_n]]
//! up to a total-degree bound `max_degree`; everything above the bound is
//! the implicit O(X)^{max_degree+1} remainder. Terms live in a `BTreeMap`
//! keyed by [`Monomial`] in graded order (total degree, then lexicographic
//! on the exponent vector), which fixes the iteration and output order.
//!
//! Invariants of the canonical form:
//! - no stored coefficient is zero,
//! - every stored exponent vector has length `nvars` and total degree
//!   at most `max_degree`,
//! - all coefficients share the series' field.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};

/// Exponent vector of a monomial X_1^{e_1} ... X_n^{e_n}.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    /// The constant monomial (all exponents zero).
    pub fn unit(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    /// The single variable X_index.
    pub fn variable(index: usize, nvars: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    fn product(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    /// Graded order: ascending total degree, ties broken lexicographically
    /// on the exponent vector.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Order of vanishing: the smallest total degree carrying a nonzero
/// coefficient, or infinity for the zero series.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl Order {
    pub fn finite(self) -> Option<u32> {
        match self {
            Order::Finite(d) => Some(d),
            Order::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Order::Infinite)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(d) => write!(f, "{d}"),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

/// A formal power series truncated at a total-degree bound.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruncatedSeries {
    nvars: usize,
    max_degree: u32,
    spec: FieldSpec,
    terms: BTreeMap<Monomial, FieldElement>,
}

impl TruncatedSeries {
    pub fn zero(nvars: usize, max_degree: u32, spec: FieldSpec) -> Self {
        assert!(nvars >= 1, "series need at least one variable");
        TruncatedSeries {
            nvars,
            max_degree,
            spec,
            terms: BTreeMap::new(),
        }
    }

    /// The constant series with the given value.
    pub fn constant(value: FieldElement, nvars: usize, max_degree: u32) -> Self {
        let spec = value.spec();
        let mut s = Self::zero(nvars, max_degree, spec);
        if !value.is_zero() {
            s.terms.insert(Monomial::unit(nvars), value);
        }
        s
    }

    /// The series X_index. Degenerates to zero when `max_degree` is 0.
    pub fn variable(index: usize, nvars: usize, max_degree: u32, spec: FieldSpec) -> Result<Self> {
        if index >= nvars {
            return Err(Error::InvalidParameter(format!(
                "variable index {index} out of range for {nvars} variables"
            )));
        }
        let mut s = Self::zero(nvars, max_degree, spec);
        if max_degree >= 1 {
            s.terms.insert(Monomial::variable(index, nvars), spec.one());
        }
        Ok(s)
    }

    /// Build a series from explicit terms. Duplicate exponent vectors are
    /// summed; zero coefficients are dropped. Terms above `max_degree` or
    /// with a foreign field are rejected.
    pub fn from_terms<I>(nvars: usize, max_degree: u32, spec: FieldSpec, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, FieldElement)>,
    {
        let mut s = Self::zero(nvars, max_degree, spec);
        for (exps, coeff) in terms {
            if exps.len() != nvars {
                return Err(Error::ShapeMismatch(format!(
                    "exponent vector {exps:?} does not have {nvars} entries"
                )));
            }
            let m = Monomial::new(exps);
            if m.degree() > max_degree {
                return Err(Error::InvalidParameter(format!(
                    "term of degree {} exceeds max_degree {}",
                    m.degree(),
                    max_degree
                )));
            }
            if coeff.spec() != spec {
                return Err(Error::FieldMismatch {
                    left: spec.to_string(),
                    right: coeff.spec().to_string(),
                });
            }
            insert_add(&mut s.terms, m, coeff);
        }
        debug_assert!(s.is_canonical());
        Ok(s)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in graded order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &FieldElement)> {
        self.terms.iter()
    }

    /// Coefficient of the given exponent vector (zero when absent).
    pub fn coefficient(&self, exponents: &[u32]) -> FieldElement {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .cloned()
            .unwrap_or_else(|| self.spec.zero())
    }

    /// Check the sparse canonical form. Used by the debug validator and
    /// exposed for property tests.
    pub fn is_canonical(&self) -> bool {
        self.terms.iter().all(|(m, c)| {
            m.nvars() == self.nvars
                && m.degree() <= self.max_degree
                && !c.is_zero()
                && c.spec() == self.spec
        })
    }

    /// Smallest total degree with a nonzero coefficient.
    pub fn order(&self) -> Order {
        // graded key order: the first key has minimal degree
        self.terms
            .keys()
            .next()
            .map(|m| Order::Finite(m.degree()))
            .unwrap_or(Order::Infinite)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.require_same_shape(other)?;
        let w = self.max_degree.min(other.max_degree);
        let mut terms = BTreeMap::new();
        for source in [&self.terms, &other.terms] {
            // keys ascend by degree, so each map cuts off independently
            for (m, c) in source.iter().take_while(|(m, _)| m.degree() <= w) {
                insert_add(&mut terms, m.clone(), c.clone());
            }
        }
        Ok(self.rebuild(w, terms))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect();
        self.rebuild(self.max_degree, terms)
    }

    /// Multiply every coefficient by a scalar from the same field.
    pub fn scale(&self, scalar: &FieldElement) -> Result<Self> {
        if scalar.spec() != self.spec {
            return Err(Error::FieldMismatch {
                left: self.spec.to_string(),
                right: scalar.spec().to_string(),
            });
        }
        if scalar.is_zero() {
            return Ok(Self::zero(self.nvars, self.max_degree, self.spec));
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), c * scalar))
            .collect();
        Ok(self.rebuild(self.max_degree, terms))
    }

    /// Exact product with everything above the shared precision discarded.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.require_same_shape(other)?;
        let w = self.max_degree.min(other.max_degree);
        let mut terms = BTreeMap::new();
        for (ma, ca) in &self.terms {
            let da = ma.degree();
            if da > w {
                break;
            }
            for (mb, cb) in &other.terms {
                // keys ascend by degree, so the rest of the row is out of range
                if da + mb.degree() > w {
                    break;
                }
                insert_add(&mut terms, ma.product(mb), ca * cb);
            }
        }
        Ok(self.rebuild(w, terms))
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::constant(self.spec.one(), self.nvars, self.max_degree);
        for _ in 0..exp {
            acc = acc.mul(self).expect("shape preserved");
        }
        acc
    }

    /// Substitute `args[i]` for variable i. Every argument must share a
    /// variable count and field and have zero constant term; the result
    /// precision is the minimum across operands.
    pub fn compose(&self, args: &[TruncatedSeries]) -> Result<TruncatedSeries> {
        if args.len() != self.nvars {
            return Err(Error::ShapeMismatch(format!(
                "series in {} variables composed with {} arguments",
                self.nvars,
                args.len()
            )));
        }
        let out_nvars = args[0].nvars;
        let mut w = self.max_degree;
        for (i, g) in args.iter().enumerate() {
            if g.nvars != out_nvars {
                return Err(Error::ShapeMismatch(
                    "composition arguments disagree on variable count".into(),
                ));
            }
            if g.spec != self.spec {
                return Err(Error::FieldMismatch {
                    left: self.spec.to_string(),
                    right: g.spec.to_string(),
                });
            }
            if !g.coefficient(&vec![0; out_nvars]).is_zero() {
                return Err(Error::CompositionDomain { index: i });
            }
            w = w.min(g.max_degree);
        }

        // memoized powers, one ladder per argument, all truncated at w
        let one = TruncatedSeries::constant(self.spec.one(), out_nvars, w);
        let mut powers: Vec<Vec<TruncatedSeries>> = vec![vec![one.clone()]; args.len()];
        let power = |powers: &mut Vec<Vec<TruncatedSeries>>, i: usize, k: u32| {
            while powers[i].len() <= k as usize {
                let next = powers[i]
                    .last()
                    .unwrap()
                    .mul(&args[i])
                    .expect("shape preserved");
                powers[i].push(next);
            }
            powers[i][k as usize].clone()
        };

        let mut acc = TruncatedSeries::zero(out_nvars, w, self.spec);
        'terms: for (m, c) in &self.terms {
            if m.degree() > w {
                break;
            }
            let mut prod = TruncatedSeries::constant(c.clone(), out_nvars, w);
            for (i, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if e > w {
                    // ord(args[i]^e) >= e > w: the whole term vanishes
                    continue 'terms;
                }
                prod = prod
                    .mul(&power(&mut powers, i, e))
                    .expect("shape preserved");
                if prod.is_zero() {
                    continue 'terms;
                }
            }
            acc = acc.add(&prod).expect("shape preserved");
        }
        Ok(acc)
    }

    /// Drop all terms of total degree above `degree`; precision becomes
    /// min(max_degree, degree).
    pub fn truncated(&self, degree: u32) -> Self {
        let w = self.max_degree.min(degree);
        let terms = self
            .terms
            .iter()
            .take_while(|(m, _)| m.degree() <= w)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        self.rebuild(w, terms)
    }

    /// Terms of total degree <= `degree` at the original precision: the
    /// low-degree polynomial part embedded back into the series ring.
    pub fn polynomial_part(&self, degree: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .take_while(|(m, _)| m.degree() <= degree)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        self.rebuild(self.max_degree, terms)
    }

    /// Exactly the degree-d terms, at the original precision.
    pub fn homogeneous_part(&self, degree: u32) -> Result<Self> {
        if degree > self.max_degree {
            return Err(Error::OutOfPrecision {
                requested: degree,
                available: self.max_degree,
            });
        }
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.degree() == degree)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        Ok(self.rebuild(self.max_degree, terms))
    }

    /// I-adic distance base^{-ord(self - other)}; zero for equal series
    /// (up to the shared precision). The base must exceed 1.
    pub fn distance(&self, other: &Self, base: f64) -> Result<f64> {
        if base.is_nan() || base <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "metric base must exceed 1 (got {base})"
            )));
        }
        let diff = self.sub(other)?;
        Ok(match diff.order() {
            Order::Infinite => 0.0,
            Order::Finite(d) => base.powi(-(d as i32)),
        })
    }

    /// Apply the Q -> F_p reduction homomorphism to every coefficient.
    pub fn reduce_to_prime_field(&self, target: FieldSpec) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let r = c.reduce_to_prime_field(target)?;
            if !r.is_zero() {
                terms.insert(m.clone(), r);
            }
        }
        Ok(TruncatedSeries {
            nvars: self.nvars,
            max_degree: self.max_degree,
            spec: target,
            terms,
        })
    }

    fn require_same_shape(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::ShapeMismatch(format!(
                "variable counts differ: {} vs {}",
                self.nvars, other.nvars
            )));
        }
        if self.spec != other.spec {
            return Err(Error::FieldMismatch {
                left: self.spec.to_string(),
                right: other.spec.to_string(),
            });
        }
        Ok(())
    }

    fn rebuild(&self, max_degree: u32, terms: BTreeMap<Monomial, FieldElement>) -> Self {
        let s = TruncatedSeries {
            nvars: self.nvars,
            max_degree,
            spec: self.spec,
            terms,
        };
        debug_assert!(s.is_canonical());
        s
    }
}

fn insert_add(map: &mut BTreeMap<Monomial, FieldElement>, m: Monomial, c: FieldElement) {
    if c.is_zero() {
        return;
    }
    match map.entry(m) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let sum = o.get() + &c;
            if sum.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
}

/// An n-tuple of series over shared variables, field, and precision:
/// a (truncated) formal map K^n -> K^n.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SeriesMap {
    components: Vec<TruncatedSeries>,
}

impl SeriesMap {
    /// Components must be square (count = variable count) and agree on
    /// precision and field.
    pub fn new(components: Vec<TruncatedSeries>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::ShapeMismatch(
                "a map needs at least one component".into(),
            ));
        }
        for c in &components {
            if c.nvars() != n {
                return Err(Error::ShapeMismatch(format!(
                    "{n} components but a component has {} variables",
                    c.nvars()
                )));
            }
            if c.max_degree() != components[0].max_degree() {
                return Err(Error::ShapeMismatch(
                    "components disagree on max_degree".into(),
                ));
            }
            if c.spec() != components[0].spec() {
                return Err(Error::FieldMismatch {
                    left: components[0].spec().to_string(),
                    right: c.spec().to_string(),
                });
            }
        }
        Ok(SeriesMap { components })
    }

    /// The identity map (X_1, ..., X_n).
    pub fn identity(nvars: usize, max_degree: u32, spec: FieldSpec) -> Self {
        let components = (0..nvars)
            .map(|i| TruncatedSeries::variable(i, nvars, max_degree, spec).expect("index in range"))
            .collect();
        SeriesMap { components }
    }

    pub fn nvars(&self) -> usize {
        self.components.len()
    }

    pub fn max_degree(&self) -> u32 {
        self.components[0].max_degree()
    }

    pub fn spec(&self) -> FieldSpec {
        self.components[0].spec()
    }

    pub fn components(&self) -> &[TruncatedSeries] {
        &self.components
    }

    pub fn component(&self, index: usize) -> &TruncatedSeries {
        &self.components[index]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.nvars(), self.max_degree(), self.spec())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, TruncatedSeries::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, TruncatedSeries::sub)
    }

    pub fn neg(&self) -> Self {
        SeriesMap {
            components: self.components.iter().map(TruncatedSeries::neg).collect(),
        }
    }

    /// Componentwise composition self o other.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.nvars() != other.nvars() {
            return Err(Error::ShapeMismatch(format!(
                "maps disagree on variable count: {} vs {}",
                self.nvars(),
                other.nvars()
            )));
        }
        let components = self
            .components
            .iter()
            .map(|f| f.compose(other.components()))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesMap { components })
    }

    /// Iterated composition self^k (k = 0 gives the identity).
    pub fn power(&self, k: u32) -> Result<Self> {
        let mut acc = Self::identity(self.nvars(), self.max_degree(), self.spec());
        for _ in 0..k {
            acc = acc.compose(self)?;
        }
        Ok(acc)
    }

    pub fn truncated(&self, degree: u32) -> Self {
        SeriesMap {
            components: self
                .components
                .iter()
                .map(|c| c.truncated(degree))
                .collect(),
        }
    }

    /// Componentwise low-degree part (precision unchanged).
    pub fn polynomial_part(&self, degree: u32) -> Self {
        SeriesMap {
            components: self
                .components
                .iter()
                .map(|c| c.polynomial_part(degree))
                .collect(),
        }
    }

    /// Componentwise scalar multiple.
    pub fn scale(&self, scalar: &FieldElement) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|c| c.scale(scalar))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesMap { components })
    }

    /// Per-component orders of vanishing.
    pub fn orders(&self) -> Vec<Order> {
        self.components.iter().map(TruncatedSeries::order).collect()
    }

    /// Distance induced by the componentwise minimum order.
    pub fn distance(&self, other: &Self, base: f64) -> Result<f64> {
        let mut best = 0.0f64;
        for (a, b) in self.components.iter().zip(other.components()) {
            best = best.max(a.distance(b, base)?);
        }
        Ok(best)
    }

    pub fn reduce_to_prime_field(&self, target: FieldSpec) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|c| c.reduce_to_prime_field(target))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesMap { components })
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&TruncatedSeries, &TruncatedSeries) -> Result<TruncatedSeries>,
    ) -> Result<Self> {
        if self.nvars() != other.nvars() {
            return Err(Error::ShapeMismatch(format!(
                "maps disagree on variable count: {} vs {}",
                self.nvars(),
                other.nvars()
            )));
        }
        let components = self
            .components
            .iter()
            .zip(other.components())
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesMap { components })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    /// Univariate series from (degree, coefficient) pairs.
    fn uni(max_degree: u32, terms: &[(u32, &str)]) -> TruncatedSeries {
        TruncatedSeries::from_terms(
            1,
            max_degree,
            q(),
            terms
                .iter()
                .map(|&(d, c)| (vec![d], q().parse_element(c).unwrap())),
        )
        .unwrap()
    }

    fn biv(max_degree: u32, terms: &[((u32, u32), &str)]) -> TruncatedSeries {
        TruncatedSeries::from_terms(
            2,
            max_degree,
            q(),
            terms
                .iter()
                .map(|&((a, b), c)| (vec![a, b], q().parse_element(c).unwrap())),
        )
        .unwrap()
    }

    /// The degree-6 reversion of Y + Y^2 (alternating Catalan numbers).
    fn catalan() -> TruncatedSeries {
        uni(
            6,
            &[
                (1, "1"),
                (2, "-1"),
                (3, "2"),
                (4, "-5"),
                (5, "14"),
                (6, "-42"),
            ],
        )
    }

    fn p1() -> TruncatedSeries {
        uni(6, &[(2, "-1"), (3, "2"), (4, "-5"), (5, "14"), (6, "-42")])
    }

    fn p2() -> TruncatedSeries {
        uni(6, &[(3, "2"), (4, "-11"), (5, "52"), (6, "-238")])
    }

    #[test]
    fn monomial_order_is_graded_then_lex() {
        let mut ms = [
            Monomial::new(vec![2, 0]),
            Monomial::new(vec![0, 1]),
            Monomial::new(vec![1, 1]),
            Monomial::new(vec![0, 2]),
            Monomial::new(vec![1, 0]),
            Monomial::new(vec![0, 0]),
        ];
        ms.sort();
        let got: Vec<&[u32]> = ms.iter().map(|m| m.exponents()).collect();
        assert_eq!(
            got,
            vec![&[0u32, 0][..], &[0, 1], &[1, 0], &[0, 2], &[1, 1], &[2, 0]]
        );
    }

    #[test]
    fn add_matches_first_partial_sum() {
        // P_0 - P_1 for the quadratic example
        let expect = uni(
            6,
            &[
                (1, "1"),
                (2, "1"),
                (3, "-2"),
                (4, "5"),
                (5, "-14"),
                (6, "42"),
            ],
        );
        let p0 = TruncatedSeries::variable(0, 1, 6, q()).unwrap();
        assert_eq!(p0.sub(&p1()).unwrap(), expect);
    }

    #[test]
    fn add_identity_and_cancellation() {
        let a = biv(4, &[((1, 0), "1"), ((0, 1), "1")]);
        let b = biv(4, &[((1, 0), "1"), ((0, 1), "-1")]);
        let zero = TruncatedSeries::zero(2, 4, q());
        assert_eq!(a.add(&zero).unwrap(), a);
        assert_eq!(a.add(&b).unwrap(), biv(4, &[((1, 0), "2")]));
    }

    #[test]
    fn mul_square_of_quadratic() {
        let g = uni(6, &[(1, "1"), (2, "1")]);
        assert_eq!(g.mul(&g).unwrap(), uni(6, &[(2, "1"), (3, "2"), (4, "1")]));
    }

    #[test]
    fn mul_identities() {
        let f = catalan();
        let one = TruncatedSeries::constant(q().one(), 1, 6);
        let zero = TruncatedSeries::zero(1, 6, q());
        assert_eq!(f.mul(&one).unwrap(), f);
        assert_eq!(f.mul(&zero).unwrap(), zero);
    }

    #[test]
    fn add_with_mixed_precision() {
        // the high-precision operand's tail must not mask the other's terms
        let wide = uni(8, &[(1, "1"), (7, "3")]);
        let narrow = uni(4, &[(2, "5")]);
        let sum = wide.add(&narrow).unwrap();
        assert_eq!(sum, uni(4, &[(1, "1"), (2, "5")]));
        assert_eq!(narrow.add(&wide).unwrap(), sum);
    }

    #[test]
    fn mul_truncates_to_min_precision() {
        let a = uni(6, &[(3, "1")]);
        let b = uni(4, &[(2, "1"), (3, "1")]);
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod.max_degree(), 4);
        assert!(prod.is_zero()); // lowest product degree is 5
    }

    #[test]
    fn compose_mutually_inverse_pair() {
        let g = uni(6, &[(1, "1"), (2, "1")]);
        let x = TruncatedSeries::variable(0, 1, 6, q()).unwrap();
        assert_eq!(g.compose(&[catalan()]).unwrap(), x);
        assert_eq!(catalan().compose(&[g]).unwrap(), x);
    }

    #[test]
    fn compose_with_identity() {
        let f = biv(5, &[((2, 1), "1/2"), ((0, 3), "-7")]);
        let id = SeriesMap::identity(2, 5, q());
        assert_eq!(f.compose(id.components()).unwrap(), f);
    }

    #[test]
    fn compose_rejects_constant_terms() {
        let f = uni(4, &[(1, "1")]);
        let g = uni(4, &[(0, "1"), (1, "1")]);
        assert!(matches!(
            f.compose(&[g]),
            Err(Error::CompositionDomain { index: 0 })
        ));
    }

    #[test]
    fn compose_univariate_into_two_variables() {
        // f(Z) = Z^2 substituted with Z = X + Y
        let f = uni(4, &[(2, "1")]);
        let arg = biv(4, &[((1, 0), "1"), ((0, 1), "1")]);
        assert_eq!(
            f.compose(&[arg]).unwrap(),
            biv(4, &[((2, 0), "1"), ((1, 1), "2"), ((0, 2), "1")])
        );
    }

    #[test]
    fn map_compose_quadratic_twice() {
        let g = SeriesMap::new(vec![uni(6, &[(1, "1"), (2, "1")])]).unwrap();
        let gg = g.compose(&g).unwrap();
        assert_eq!(
            gg.component(0),
            &uni(6, &[(1, "1"), (2, "2"), (3, "2"), (4, "1")])
        );
        let id = SeriesMap::identity(1, 6, q());
        assert_eq!(id.compose(&id).unwrap(), id);
    }

    #[test]
    fn order_examples() {
        let q3 = uni(8, &[(8, "1"), (7, "4"), (6, "8"), (5, "10"), (4, "6")]);
        assert_eq!(q3.order(), Order::Finite(4));
        assert_eq!(p2().order(), Order::Finite(3));
        assert_eq!(TruncatedSeries::zero(2, 5, q()).order(), Order::Infinite);
        assert!(Order::Finite(100) < Order::Infinite);
    }

    #[test]
    fn truncate_examples() {
        let sum = TruncatedSeries::variable(0, 1, 6, q())
            .unwrap()
            .sub(&p1())
            .unwrap();
        assert_eq!(sum.truncated(2), uni(2, &[(1, "1"), (2, "1")]));
        assert_eq!(catalan().truncated(6), catalan());
        let cubed = uni(5, &[(3, "1")]);
        assert!(cubed.truncated(2).is_zero());
        assert_eq!(cubed.truncated(2).max_degree(), 2);
    }

    #[test]
    fn homogeneous_part_examples() {
        assert_eq!(p2().homogeneous_part(3).unwrap(), uni(6, &[(3, "2")]));
        let g = uni(6, &[(1, "1"), (2, "1")]);
        assert!(g.homogeneous_part(0).unwrap().is_zero());
        assert!(matches!(
            g.homogeneous_part(7),
            Err(Error::OutOfPrecision { .. })
        ));
        // partition: the homogeneous parts sum back to the series
        let f = catalan();
        let mut acc = TruncatedSeries::zero(1, 6, q());
        for d in 0..=6 {
            acc = acc.add(&f.homogeneous_part(d).unwrap()).unwrap();
        }
        assert_eq!(acc, f);
    }

    #[test]
    fn distance_examples() {
        let x = TruncatedSeries::variable(0, 1, 6, q()).unwrap();
        let x_plus_cube = uni(6, &[(1, "1"), (3, "1")]);
        assert_eq!(x.distance(&x_plus_cube, 2.0).unwrap(), 0.125);
        assert_eq!(x.distance(&x, 2.0).unwrap(), 0.0);
        assert!(matches!(
            x.distance(&x_plus_cube, 1.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn ultrametric_spot_check() {
        let a = uni(6, &[(1, "1")]);
        let b = uni(6, &[(1, "1"), (4, "2")]);
        let c = uni(6, &[(2, "3")]);
        let dab = a.distance(&b, 2.0).unwrap();
        let dbc = b.distance(&c, 2.0).unwrap();
        let dac = a.distance(&c, 2.0).unwrap();
        assert!(dac <= dab.max(dbc));
    }

    #[test]
    fn identity_map_shape() {
        let id = SeriesMap::identity(2, 5, q());
        assert_eq!(id.nvars(), 2);
        assert_eq!(
            id.component(0),
            &TruncatedSeries::variable(0, 2, 5, q()).unwrap()
        );
        assert_eq!(
            id.component(1),
            &TruncatedSeries::variable(1, 2, 5, q()).unwrap()
        );
        assert!(id.orders().iter().all(|&o| o == Order::Finite(1)));
        assert!(id.is_identity());
    }

    #[test]
    fn shape_mismatches_are_rejected() {
        let a = uni(4, &[(1, "1")]);
        let b = biv(4, &[((1, 0), "1")]);
        assert!(matches!(a.add(&b), Err(Error::ShapeMismatch(_))));
        let f5 = FieldSpec::prime_field(5).unwrap();
        let c = TruncatedSeries::variable(0, 1, 4, f5).unwrap();
        assert!(matches!(a.mul(&c), Err(Error::FieldMismatch { .. })));
        assert!(SeriesMap::new(vec![a.clone(), a.clone()]).is_err());
    }

    #[test]
    fn reduce_mod_five() {
        let f5 = FieldSpec::prime_field(5).unwrap();
        let reduced = catalan().reduce_to_prime_field(f5).unwrap();
        let expect = TruncatedSeries::from_terms(
            1,
            6,
            f5,
            [(1u32, 1i64), (2, 4), (3, 2), (5, 4), (6, 3)]
                .iter()
                .map(|&(d, v)| (vec![d], f5.integer(v))),
        )
        .unwrap();
        assert_eq!(reduced, expect);
    }

    #[test]
    fn from_terms_validation() {
        assert!(TruncatedSeries::from_terms(1, 3, q(), [(vec![4u32], q().one())]).is_err());
        assert!(TruncatedSeries::from_terms(2, 3, q(), [(vec![1u32], q().one())]).is_err());
        // duplicates collapse, zeros vanish
        let s = TruncatedSeries::from_terms(
            1,
            3,
            q(),
            [
                (vec![2u32], q().one()),
                (vec![2u32], q().integer(-1)),
                (vec![1u32], q().integer(3)),
            ],
        )
        .unwrap();
        assert_eq!(s, uni(3, &[(1, "3")]));
        assert!(s.is_canonical());
    }
}
