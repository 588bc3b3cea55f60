//! Exact scalars: rationals, polynomials in `z`, and the rational function
//! field `F(z)` with `F = Q`.
//!
//! `Poly` is stored sparsely by exponent. `RatFunc` is always kept in reduced
//! form with a monic denominator, so structural equality is field equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Univariate polynomial in `z` over `Q`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: BTreeMap<u32, Rat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn z() -> Self {
        Poly::monomial(Rat::one(), 1)
    }

    pub fn constant(c: Rat) -> Self {
        Poly::monomial(c, 0)
    }

    pub fn monomial(c: Rat, e: u32) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(e, c);
        }
        Poly { coeffs }
    }

    /// Builds `c_0 + c_1 z + ...` from integer coefficients in ascending order.
    pub fn from_ints(cs: &[i64]) -> Self {
        Poly::from_terms(cs.iter().enumerate().map(|(e, &c)| (e as u32, rat(c))))
    }

    pub fn from_terms<I: IntoIterator<Item = (u32, Rat)>>(terms: I) -> Self {
        let mut p = Poly::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, e: u32, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(e).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs.get(&0).is_some_and(|c| c.is_one())
    }

    /// `None` stands for the degree of the zero polynomial (minus infinity).
    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    /// Smallest exponent with a nonzero coefficient.
    pub fn low_degree(&self) -> Option<u32> {
        self.coeffs.keys().next().copied()
    }

    pub fn lead(&self) -> Option<&Rat> {
        self.coeffs.values().next_back()
    }

    pub fn coeff(&self, e: u32) -> Rat {
        self.coeffs.get(&e).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (u32, &Rat)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn is_constant(&self) -> bool {
        self.degree().is_none_or(|d| d == 0)
    }

    pub fn as_constant(&self) -> Option<Rat> {
        if self.is_constant() {
            Some(self.coeff(0))
        } else {
            None
        }
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            coeffs: self.coeffs.iter().map(|(e, v)| (*e, v * c)).collect(),
        }
    }

    pub fn shift_exponent(&self, by: u32) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|(e, v)| (e + by, v.clone())).collect(),
        }
    }

    pub fn monic(&self) -> Poly {
        match self.lead() {
            None => Poly::zero(),
            Some(l) => self.scale(&l.recip()),
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Euclidean division. Panics if `d` is zero.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("polynomial division by zero");
        let dl = d.lead().unwrap().clone();
        let mut q = Poly::zero();
        let mut r = self.clone();
        while let Some(rd) = r.degree() {
            if rd < dd {
                break;
            }
            let c = r.lead().unwrap() / &dl;
            let e = rd - dd;
            for (de, dc) in d.terms() {
                r.add_term(de + e, -(dc * &c));
            }
            q.add_term(e, c);
        }
        (q, r)
    }

    /// Exact quotient, or `None` if `d` does not divide `self`.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        let (q, r) = self.div_rem(d);
        r.is_zero().then_some(q)
    }

    pub fn divides(&self, other: &Poly) -> bool {
        !self.is_zero() && other.div_rem(self).1.is_zero()
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let mut a = a.clone();
        let mut b = b.clone();
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// `(g, u, v)` with `u a + v b = g`, `g` the monic gcd. Both inputs must not be zero.
    pub fn ext_gcd(a: &Poly, b: &Poly) -> (Poly, Poly, Poly) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut u0, mut u1) = (Poly::one(), Poly::zero());
        let (mut v0, mut v1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let u = &u0 - &(&q * &u1);
            let v = &v0 - &(&q * &v1);
            (r0, r1) = (r1, r);
            (u0, u1) = (u1, u);
            (v0, v1) = (v1, v);
        }
        let l = r0.lead().expect("nonzero input").recip();
        (r0.scale(&l), u0.scale(&l), v0.scale(&l))
    }

    /// Monic lcm; zero if either argument is zero.
    pub fn lcm(a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() || b.is_zero() {
            return Poly::zero();
        }
        let g = Poly::gcd(a, b);
        (a * &b.div_rem(&g).0).monic()
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        let mut last = self.degree().unwrap_or(0);
        for (e, c) in self.coeffs.iter().rev() {
            acc *= pow_rat(x, last - e);
            acc += c;
            last = *e;
        }
        acc * pow_rat(x, last)
    }

    /// `p(z + c)`.
    pub fn shift(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return self.clone();
        }
        let lin = Poly::from_terms([(0, c.clone()), (1, Rat::one())]);
        let mut acc = Poly::zero();
        let mut last = self.degree().unwrap_or(0);
        for (e, coef) in self.coeffs.iter().rev() {
            acc = &acc * &lin.pow(last - e);
            acc.add_term(0, coef.clone());
            last = *e;
        }
        &acc * &lin.pow(last)
    }

    pub fn derivative(&self) -> Poly {
        Poly::from_terms(
            self.coeffs
                .iter()
                .filter(|(e, _)| **e > 0)
                .map(|(e, c)| (e - 1, c * rat(*e as i64))),
        )
    }

    /// Multiplicity of `z = a` as a root, by repeated exact division by `z - a`.
    pub fn multiplicity_at(&self, a: &Rat) -> u32 {
        if self.is_zero() {
            return 0;
        }
        if a.is_zero() {
            return self.low_degree().unwrap_or(0);
        }
        let lin = Poly::from_terms([(0, -a.clone()), (1, Rat::one())]);
        let mut p = self.clone();
        let mut m = 0;
        while let Some(q) = p.exact_div(&lin) {
            p = q;
            m += 1;
        }
        m
    }

    /// Rational roots via the rational root theorem. Candidate enumeration is
    /// skipped for integer content beyond `10^6` (returns what it found).
    pub fn rational_roots(&self) -> Vec<Rat> {
        let mut roots = Vec::new();
        let Some(_) = self.degree() else {
            return roots;
        };
        let mut p = self.clone();
        if p.coeff(0).is_zero() {
            roots.push(Rat::zero());
            let low = p.low_degree().unwrap();
            p = Poly {
                coeffs: p.coeffs.iter().map(|(e, c)| (e - low, c.clone())).collect(),
            };
        }
        if p.degree() == Some(0) {
            return roots;
        }
        // clear denominators
        let l = p
            .coeffs
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: BTreeMap<u32, BigInt> = p
            .coeffs
            .iter()
            .map(|(e, c)| (*e, (c * Rat::from_integer(l.clone())).to_integer()))
            .collect();
        let a0 = ints.get(&0).unwrap().abs();
        let an = ints.values().next_back().unwrap().abs();
        let limit = BigInt::from(1_000_000);
        if a0 > limit || an > limit {
            return roots;
        }
        let (a0, an) = (a0.to_u64().unwrap(), an.to_u64().unwrap());
        for num in divisors(a0) {
            for den in divisors(an) {
                for sign in [1i64, -1] {
                    let cand = Rat::new(BigInt::from(sign) * BigInt::from(num), BigInt::from(den));
                    if !roots.contains(&cand) && p.eval(&cand).is_zero() {
                        roots.push(cand);
                    }
                }
            }
        }
        roots.sort();
        roots
    }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n.is_multiple_of(i) {
            out.push(i);
            if i * i != n {
                out.push(n / i);
            }
        }
        i += 1;
    }
    out
}

pub(crate) fn pow_rat(x: &Rat, e: u32) -> Rat {
    num_traits::pow(x.clone(), e as usize)
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ea, ca) in self.terms() {
            for (eb, cb) in rhs.terms() {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rat::one())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.coeffs.iter().rev() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let zpart = match e {
                0 => String::new(),
                1 => "z".to_string(),
                _ => format!("z^{e}"),
            };
            if zpart.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{zpart}")?;
            } else {
                write!(f, "{a}*{zpart}")?;
            }
        }
        Ok(())
    }
}

/// Reduced rational function `num / den` with `den` monic and coprime to `num`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFunc::zero());
        }
        let g = Poly::gcd(&num, &den);
        let (mut num, mut den) = (num.div_rem(&g).0, den.div_rem(&g).0);
        let l = den.lead().unwrap().clone();
        if !l.is_one() {
            let inv = l.recip();
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        Ok(RatFunc { num, den })
    }

    pub fn zero() -> Self {
        RatFunc {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        RatFunc::from_poly(Poly::one())
    }

    pub fn z() -> Self {
        RatFunc::from_poly(Poly::z())
    }

    pub fn constant(c: Rat) -> Self {
        RatFunc::from_poly(Poly::constant(c))
    }

    pub fn from_int(n: i64) -> Self {
        RatFunc::constant(rat(n))
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc {
            num: p,
            den: Poly::one(),
        }
    }

    /// `c * z^e` for any integer `e`.
    pub fn z_pow(e: i64) -> Self {
        if e >= 0 {
            RatFunc::from_poly(Poly::monomial(Rat::one(), e as u32))
        } else {
            RatFunc {
                num: Poly::one(),
                den: Poly::monomial(Rat::one(), (-e) as u32),
            }
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Rat> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn inv(&self) -> Result<RatFunc, ScalarError> {
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, rhs: &RatFunc) -> Result<RatFunc, ScalarError> {
        Ok(self * &rhs.inv()?)
    }

    pub fn scale(&self, c: &Rat) -> RatFunc {
        if c.is_zero() {
            return RatFunc::zero();
        }
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn pow(&self, e: i64) -> RatFunc {
        if e >= 0 {
            RatFunc {
                num: self.num.pow(e as u32),
                den: self.den.pow(e as u32),
            }
        } else {
            self.inv()
                .expect("negative power of zero rational function")
                .pow(-e)
        }
    }

    /// Order of vanishing at `z = a`; `None` encodes `+infinity` (for zero).
    pub fn valuation_at(&self, a: &Rat) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        Some(self.num.multiplicity_at(a) as i64 - self.den.multiplicity_at(a) as i64)
    }

    /// Valuation with respect to an arbitrary nonconstant polynomial `p`
    /// (repeated exact division). Used for places without a rational root.
    pub fn valuation_by(&self, p: &Poly) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let count = |q: &Poly| {
            let mut q = q.clone();
            let mut m = 0i64;
            while let Some(next) = q.exact_div(p) {
                q = next;
                m += 1;
            }
            m
        };
        Some(count(&self.num) - count(&self.den))
    }

    /// Substitutes `z -> z + c`.
    pub fn shift_z(&self, c: &Rat) -> RatFunc {
        if c.is_zero() {
            return self.clone();
        }
        RatFunc::new(self.num.shift(c), self.den.shift(c)).expect("shift keeps den nonzero")
    }

    /// Value at `z = a`, or `None` at a pole.
    pub fn eval(&self, a: &Rat) -> Option<Rat> {
        let d = self.den.eval(a);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(a) / d)
    }

    pub fn derivative(&self) -> RatFunc {
        let n = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        RatFunc::new(n, self.den.pow(2)).unwrap()
    }
}

impl Default for RatFunc {
    fn default() -> Self {
        RatFunc::zero()
    }
}

impl From<Poly> for RatFunc {
    fn from(p: Poly) -> Self {
        RatFunc::from_poly(p)
    }
}

impl<'a> Add<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.den == rhs.den {
            return RatFunc::new(&self.num + &rhs.num, self.den.clone()).unwrap();
        }
        let n = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RatFunc::new(n, &self.den * &rhs.den).unwrap()
    }
}

impl<'a> Sub<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.den.is_one() && rhs.den.is_one() {
            return RatFunc::from_poly(&self.num * &rhs.num);
        }
        RatFunc::new(&self.num * &rhs.num, &self.den * &rhs.den).unwrap()
    }
}

/// Panics on division by zero; use [`RatFunc::checked_div`] to get an error.
impl<'a> Div<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn div(self, rhs: &RatFunc) -> RatFunc {
        self.checked_div(rhs).expect("rational function division by zero")
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($t:ty, $($tr:ident $m:ident),*) => {$(
        impl $tr<$t> for $t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t { (&self).$m(&rhs) }
        }
    )*};
}
forward_owned!(Poly, Add add, Sub sub, Mul mul);
forward_owned!(RatFunc, Add add, Sub sub, Mul mul, Div div);

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(num: &[i64], den: &[i64]) -> RatFunc {
        RatFunc::new(Poly::from_ints(num), Poly::from_ints(den)).unwrap()
    }

    #[test]
    fn gcd_examples() {
        let a = Poly::from_ints(&[-1, 0, 1]);
        let b = Poly::from_ints(&[-1, 1]);
        assert_eq!(Poly::gcd(&a, &b), b);
        assert_eq!(Poly::gcd(&Poly::zero(), &Poly::z()), Poly::z());
        assert_eq!(Poly::gcd(&Poly::from_ints(&[1, 0, 1]), &Poly::from_ints(&[1, 1])), Poly::one());
        assert_eq!(Poly::gcd(&Poly::zero(), &Poly::zero()), Poly::zero());
        // gcd is monic even for non-monic inputs
        assert_eq!(Poly::gcd(&Poly::from_ints(&[0, 4]), &Poly::from_ints(&[0, 0, 6])), Poly::z());
    }

    #[test]
    fn arithmetic_examples() {
        let inv_z = rf(&[1], &[0, 1]);
        assert!((&inv_z + &rf(&[-1, 1], &[0, 1])).is_one());
        assert!((&inv_z * &RatFunc::z()).is_one());
        let s = &rf(&[1], &[-1, 1]) + &rf(&[1], &[1, 1]);
        assert_eq!(s, rf(&[0, 2], &[-1, 0, 1]));
        // evaluation cross-check at z = 2: 1 + 1/3 = 4/3
        assert_eq!(s.eval(&rat(2)), Some(ratio(4, 3)));
        assert_eq!(RatFunc::one().checked_div(&RatFunc::zero()), Err(ScalarError::DivisionByZero));
    }

    #[test]
    fn normal_form_is_monic_and_reduced() {
        let r = rf(&[2, 2], &[2, 4, 2]); // 2(1+z) / 2(1+z)^2
        assert_eq!(r.num(), &Poly::one());
        assert_eq!(r.den(), &Poly::from_ints(&[1, 1]));
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(RatFunc::z_pow(-2).valuation_at(&rat(0)), Some(-2));
        assert_eq!(RatFunc::from_poly(Poly::from_ints(&[0, 0, 0, 1, 1])).valuation_at(&rat(0)), Some(3));
        assert_eq!(rf(&[0, 1], &[-1, 1]).valuation_at(&rat(1)), Some(-1));
        assert_eq!(RatFunc::zero().valuation_at(&rat(0)), None);
    }

    #[test]
    fn shift_examples() {
        let r = rf(&[0, 1], &[-1, 1]);
        assert_eq!(r.shift_z(&rat(1)), rf(&[1, 1], &[0, 1]));
        assert_eq!(r.shift_z(&rat(0)), r);
        assert_eq!(RatFunc::z_pow(-1).shift_z(&rat(-1)), rf(&[1], &[-1, 1]));
    }

    #[test]
    fn rational_roots_found() {
        // (2z - 1)(z + 3) z
        let p = &(&Poly::from_ints(&[-1, 2]) * &Poly::from_ints(&[3, 1])) * &Poly::z();
        assert_eq!(p.rational_roots(), vec![rat(-3), rat(0), ratio(1, 2)]);
        assert!(Poly::from_ints(&[1, 0, 1]).rational_roots().is_empty());
    }

    #[test]
    fn display_forms() {
        assert_eq!(Poly::from_ints(&[-1, 0, 3]).to_string(), "3*z^2 - 1");
        assert_eq!(rf(&[1], &[0, 1]).to_string(), "(1)/(z)");
    }

    #[test]
    fn extended_gcd() {
        let a = Poly::from_ints(&[-2, 3]);
        let b = Poly::from_ints(&[-1, 3]);
        let (g, u, v) = Poly::ext_gcd(&a, &b);
        assert!(g.is_one());
        assert_eq!(&(&u * &a) + &(&v * &b), g);
        let (g, _, _) = Poly::ext_gcd(&Poly::from_ints(&[0, 2, 2]), &Poly::from_ints(&[0, 0, 3]));
        assert_eq!(g, Poly::z());
    }
}
