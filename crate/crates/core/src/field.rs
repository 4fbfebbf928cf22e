//! Exact coefficient arithmetic over Q and prime fields F_p.
//!
//! Every coefficient in the crate is a [`FieldElement`]: either an
//! arbitrary-precision reduced fraction or a canonical residue mod p.
//! Elements are immutable and kept in canonical form, so equality is
//! structural. Mixed-field operations are rejected.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Which coefficient field computations run in.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct FieldSpec(Kind);

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Kind {
    Rationals,
    Prime(u64),
}

impl FieldSpec {
    /// The field Q of rational numbers.
    pub fn rationals() -> Self {
        FieldSpec(Kind::Rationals)
    }

    /// The prime field F_p. The modulus is primality-checked
    /// (deterministic Miller-Rabin) and must lie below 2^63 so that
    /// residue sums never overflow u64.
    pub fn prime_field(p: u64) -> Result<Self> {
        if p >= 1 << 63 {
            return Err(Error::InvalidParameter(format!(
                "modulus {p} exceeds the supported range (must be < 2^63)"
            )));
        }
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(FieldSpec(Kind::Prime(p)))
    }

    pub fn is_rationals(&self) -> bool {
        matches!(self.0, Kind::Rationals)
    }

    /// The modulus, for prime fields.
    pub fn modulus(&self) -> Option<u64> {
        match self.0 {
            Kind::Rationals => None,
            Kind::Prime(p) => Some(p),
        }
    }

    /// 0 for Q, p for F_p.
    pub fn characteristic(&self) -> u64 {
        self.modulus().unwrap_or(0)
    }

    pub fn zero(&self) -> FieldElement {
        match self.0 {
            Kind::Rationals => FieldElement(Repr::Rational(BigRational::zero())),
            Kind::Prime(p) => FieldElement(Repr::Prime {
                value: 0,
                modulus: p,
            }),
        }
    }

    pub fn one(&self) -> FieldElement {
        match self.0 {
            Kind::Rationals => FieldElement(Repr::Rational(BigRational::one())),
            Kind::Prime(p) => FieldElement(Repr::Prime {
                value: 1 % p,
                modulus: p,
            }),
        }
    }

    /// Canonical embedding of an integer.
    pub fn integer(&self, n: i64) -> FieldElement {
        self.bigint(&BigInt::from(n))
    }

    /// Canonical embedding of an arbitrary-precision integer.
    pub fn bigint(&self, n: &BigInt) -> FieldElement {
        match self.0 {
            Kind::Rationals => FieldElement(Repr::Rational(BigRational::from(n.clone()))),
            Kind::Prime(p) => FieldElement(Repr::Prime {
                value: bigint_mod_u64(n, p),
                modulus: p,
            }),
        }
    }

    /// Parse "a" or "a/b" (optionally signed) into an element.
    pub fn parse_element(&self, text: &str) -> Result<FieldElement> {
        let s = text.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse {text:?} as a field element"));
        let (num_s, den_s) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s, "1"),
        };
        let num: BigInt = num_s.parse().map_err(|_| bad())?;
        let den: BigInt = den_s.parse().map_err(|_| bad())?;
        FieldElement::from_ratio(num, den, *self)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Kind::Rationals => write!(f, "Q"),
            Kind::Prime(p) => write!(f, "F_{p}"),
        }
    }
}

/// An exact scalar: a reduced fraction over Q, or a residue in [0, p).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FieldElement(Repr);

#[derive(Clone, PartialEq, Eq, Debug)]
enum Repr {
    Rational(BigRational),
    Prime { value: u64, modulus: u64 },
}

impl FieldElement {
    pub fn spec(&self) -> FieldSpec {
        match &self.0 {
            Repr::Rational(_) => FieldSpec(Kind::Rationals),
            Repr::Prime { modulus, .. } => FieldSpec(Kind::Prime(*modulus)),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Rational(r) => r.is_zero(),
            Repr::Prime { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.0 {
            Repr::Rational(r) => r.is_one(),
            Repr::Prime { value, .. } => *value == 1,
        }
    }

    /// Canonical embedding of num/den into the field.
    ///
    /// Over F_p the denominator must be invertible; over Q it must be
    /// nonzero. The result is fully reduced/canonical.
    pub fn from_ratio(num: BigInt, den: BigInt, spec: FieldSpec) -> Result<FieldElement> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match spec.0 {
            Kind::Rationals => Ok(FieldElement(Repr::Rational(BigRational::new(num, den)))),
            Kind::Prime(p) => {
                let n = bigint_mod_u64(&num, p);
                let d = bigint_mod_u64(&den, p);
                let d_inv = p_inv(d, p).ok_or_else(|| Error::NonInvertibleDenominator {
                    den: den.to_string(),
                    modulus: p,
                })?;
                Ok(FieldElement(Repr::Prime {
                    value: p_mul(n, d_inv, p),
                    modulus: p,
                }))
            }
        }
    }

    /// Convenience wrapper over [`FieldElement::from_ratio`] for small literals.
    pub fn from_int_ratio(num: i64, den: i64, spec: FieldSpec) -> Result<FieldElement> {
        Self::from_ratio(BigInt::from(num), BigInt::from(den), spec)
    }

    /// Fallible sum; rejects mixed-field operands.
    pub fn checked_add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.require_same_field(other)?;
        Ok(self + other)
    }

    /// Fallible difference; rejects mixed-field operands.
    pub fn checked_sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.require_same_field(other)?;
        Ok(self - other)
    }

    /// Fallible product; rejects mixed-field operands.
    pub fn checked_mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.require_same_field(other)?;
        Ok(self * other)
    }

    /// Multiplicative inverse. Zero is rejected.
    pub fn inverse(&self) -> Result<FieldElement> {
        match &self.0 {
            Repr::Rational(r) => {
                if r.is_zero() {
                    Err(Error::DivisionByZero)
                } else {
                    Ok(FieldElement(Repr::Rational(r.recip())))
                }
            }
            Repr::Prime { value, modulus } => {
                let inv = p_inv(*value, *modulus).ok_or(Error::DivisionByZero)?;
                Ok(FieldElement(Repr::Prime {
                    value: inv,
                    modulus: *modulus,
                }))
            }
        }
    }

    /// Reduce a rational element modulo p (the denominator must be
    /// coprime to p). This realizes the reduction homomorphism from
    /// p-integral rationals onto F_p.
    pub fn reduce_to_prime_field(&self, target: FieldSpec) -> Result<FieldElement> {
        match (&self.0, target.0) {
            (Repr::Rational(r), Kind::Prime(_)) => {
                FieldElement::from_ratio(r.numer().clone(), r.denom().clone(), target)
            }
            _ => Err(Error::UnsupportedField(
                "reduction is defined from Q to a prime field".into(),
            )),
        }
    }

    /// True for negative rationals. Prime-field residues are canonical
    /// representatives in [0, p) and never count as negative.
    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Rational(r) => r.numer().sign() == num_bigint::Sign::Minus,
            Repr::Prime { .. } => false,
        }
    }

    /// The underlying rational value, when over Q.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.0 {
            Repr::Rational(r) => Some(r),
            Repr::Prime { .. } => None,
        }
    }

    /// The underlying residue, when over a prime field.
    pub fn as_residue(&self) -> Option<u64> {
        match &self.0 {
            Repr::Rational(_) => None,
            Repr::Prime { value, .. } => Some(*value),
        }
    }

    fn require_same_field(&self, other: &FieldElement) -> Result<()> {
        if self.spec() != other.spec() {
            Err(Error::FieldMismatch {
                left: self.spec().to_string(),
                right: other.spec().to_string(),
            })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Rational(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Repr::Prime { value, .. } => write!(f, "{value}"),
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $ratop:tt, $primop:expr) => {
        impl $trait<&FieldElement> for &FieldElement {
            type Output = FieldElement;
            /// Panics on mixed-field operands; use the `checked_*`
            /// methods where that is a recoverable condition.
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                match (&self.0, &rhs.0) {
                    (Repr::Rational(a), Repr::Rational(b)) => {
                        FieldElement(Repr::Rational(a $ratop b))
                    }
                    (
                        Repr::Prime { value: a, modulus: p },
                        Repr::Prime { value: b, modulus: q },
                    ) if p == q => FieldElement(Repr::Prime {
                        value: $primop(*a, *b, *p),
                        modulus: *p,
                    }),
                    _ => panic!(
                        "field mismatch: {} vs {}",
                        self.spec(),
                        rhs.spec()
                    ),
                }
            }
        }

        impl $trait<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, +, p_add);
binop!(Sub, sub, -, p_sub);
binop!(Mul, mul, *, p_mul);

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        match &self.0 {
            Repr::Rational(r) => FieldElement(Repr::Rational(-r)),
            Repr::Prime { value, modulus } => FieldElement(Repr::Prime {
                value: p_sub(0, *value, *modulus),
                modulus: *modulus,
            }),
        }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

fn bigint_mod_u64(n: &BigInt, p: u64) -> u64 {
    n.mod_floor(&BigInt::from(p))
        .to_u64()
        .expect("residue fits u64")
}

#[inline]
fn p_add(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
fn p_sub(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
fn p_mul(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// Inverse mod p by extended Euclid; None for zero.
fn p_inv(a: u64, p: u64) -> Option<u64> {
    if a == 0 {
        return None;
    }
    let (mut t, mut new_t): (i128, i128) = (0, 1);
    let (mut r, mut new_r): (i128, i128) = (p as i128, a as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(((t % p as i128 + p as i128) % p as i128) as u64)
}

fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = p_mul(acc, base, m);
        }
        base = p_mul(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve primes are a complete
/// witness set for all 64-bit inputs.
fn is_prime_u64(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = p_mul(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    fn fp(p: u64) -> FieldSpec {
        FieldSpec::prime_field(p).unwrap()
    }

    fn rat(n: i64, d: i64) -> FieldElement {
        FieldElement::from_int_ratio(n, d, q()).unwrap()
    }

    #[test]
    fn rational_sum() {
        assert_eq!(&rat(1, 6) + &rat(3, 40), rat(29, 120));
    }

    #[test]
    fn prime_sum_wraps() {
        let f5 = fp(5);
        assert_eq!(&f5.integer(3) + &f5.integer(4), f5.integer(2));
    }

    #[test]
    fn additive_identity() {
        for x in [rat(7, 3), rat(-2, 9)] {
            assert_eq!(&x + &q().zero(), x);
        }
    }

    #[test]
    fn rational_product() {
        assert_eq!(&rat(-1, 1) * &rat(2, 3), rat(-2, 3));
        assert_eq!(&rat(5, 4) * &q().one(), rat(5, 4));
    }

    #[test]
    fn prime_product() {
        let f7 = fp(7);
        assert_eq!(&f7.integer(3) * &f7.integer(5), f7.one());
    }

    #[test]
    fn inverses() {
        assert_eq!(rat(2, 3).inverse().unwrap(), rat(3, 2));
        assert_eq!(fp(7).integer(3).inverse().unwrap(), fp(7).integer(5));
        assert_eq!(q().one().inverse().unwrap(), q().one());
        assert_eq!(q().zero().inverse(), Err(Error::DivisionByZero));
        assert_eq!(fp(7).zero().inverse(), Err(Error::DivisionByZero));
    }

    #[test]
    fn from_ratio_embeddings() {
        assert_eq!(rat(1, 6).to_string(), "1/6");
        assert_eq!(
            FieldElement::from_int_ratio(1, 6, fp(7)).unwrap(),
            fp(7).integer(6)
        );
        assert!(matches!(
            FieldElement::from_int_ratio(1, 7, fp(7)),
            Err(Error::NonInvertibleDenominator { .. })
        ));
        assert_eq!(
            FieldElement::from_int_ratio(1, 0, q()),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn canonical_form_is_unique() {
        assert_eq!(rat(2, 4), rat(1, 2));
        assert_eq!(rat(3, -6), rat(-1, 2));
        assert_eq!(rat(3, -6).to_string(), "-1/2");
        // negative numerators reduce into [0, p)
        assert_eq!(
            FieldElement::from_int_ratio(-1, 1, fp(5)).unwrap(),
            fp(5).integer(4)
        );
    }

    #[test]
    fn mixed_fields_are_rejected() {
        let a = rat(1, 2);
        let b = fp(5).integer(3);
        assert!(matches!(
            a.checked_add(&b),
            Err(Error::FieldMismatch { .. })
        ));
        assert!(matches!(
            fp(5).integer(1).checked_mul(&fp(7).integer(1)),
            Err(Error::FieldMismatch { .. })
        ));
    }

    #[test]
    fn primality_gate() {
        for p in [2u64, 3, 5, 7, 101, 65537, 2_147_483_647, (1 << 61) - 1] {
            assert!(FieldSpec::prime_field(p).is_ok(), "{p} should be prime");
        }
        for n in [0u64, 1, 4, 15, 561, 1_000_000, (1 << 61)] {
            assert!(matches!(FieldSpec::prime_field(n), Err(Error::NotPrime(_))));
        }
        // largest prime below 2^63
        assert!(FieldSpec::prime_field(9_223_372_036_854_775_783).is_ok());
        assert!(matches!(
            FieldSpec::prime_field(1 << 63),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn reduction_homomorphism_spot() {
        // (1/6 + 3/40) * 2/3 over Q, then mod 7, equals the direct F_7 value
        let f7 = fp(7);
        let over_q = &(&rat(1, 6) + &rat(3, 40)) * &rat(2, 3);
        let reduced = over_q.reduce_to_prime_field(f7).unwrap();
        let direct = &(&FieldElement::from_int_ratio(1, 6, f7).unwrap()
            + &FieldElement::from_int_ratio(3, 40, f7).unwrap())
            * &FieldElement::from_int_ratio(2, 3, f7).unwrap();
        assert_eq!(reduced, direct);
    }

    #[test]
    fn parse_element_forms() {
        assert_eq!(q().parse_element("-3/40").unwrap(), rat(-3, 40));
        assert_eq!(q().parse_element("42").unwrap(), rat(42, 1));
        assert_eq!(fp(5).parse_element("-1").unwrap(), fp(5).integer(4));
        assert!(q().parse_element("x").is_err());
    }
}
