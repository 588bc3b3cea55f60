//! Commutative polynomials over `F(z)` in `x, y`, their endomorphisms, and the
//! Jung–van der Kulk peeling that produces the canonical elementary sequence.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Poly, Rat, RatFunc};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommError {
    #[error("not an automorphism: {0}")]
    NotAnAutomorphism(String),
    #[error("determinant is not a nonzero rational constant")]
    NonUnitDeterminant,
}

/// Polynomial in commuting `x, y` with `F(z)` coefficients, keyed by `(deg_x, deg_y)`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct CommPoly {
    terms: BTreeMap<(u32, u32), RatFunc>,
}

impl CommPoly {
    pub fn zero() -> Self {
        CommPoly::default()
    }

    pub fn one() -> Self {
        CommPoly::constant(RatFunc::one())
    }

    pub fn constant(c: RatFunc) -> Self {
        CommPoly::monomial(c, 0, 0)
    }

    pub fn x() -> Self {
        CommPoly::monomial(RatFunc::one(), 1, 0)
    }

    pub fn y() -> Self {
        CommPoly::monomial(RatFunc::one(), 0, 1)
    }

    pub fn monomial(c: RatFunc, i: u32, j: u32) -> Self {
        let mut p = CommPoly::zero();
        p.add_term((i, j), c);
        p
    }

    pub fn add_term(&mut self, key: (u32, u32), c: RatFunc) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.get(&key) {
            Some(old) => old + &c,
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, sum);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &RatFunc)> {
        self.terms.iter()
    }

    pub fn coeff(&self, i: u32, j: u32) -> RatFunc {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(RatFunc::zero)
    }

    /// Total degree; `None` for zero.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    pub fn leading_form(&self) -> CommPoly {
        let Some(d) = self.degree() else {
            return CommPoly::zero();
        };
        CommPoly {
            terms: self
                .terms
                .iter()
                .filter(|((i, j), _)| i + j == d)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }

    pub fn homogeneous_part(&self, d: u32) -> CommPoly {
        CommPoly {
            terms: self
                .terms
                .iter()
                .filter(|((i, j), _)| i + j == d)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }

    /// The coefficient when the polynomial is a pure constant (zero included).
    pub fn as_constant(&self) -> Option<RatFunc> {
        match self.terms.len() {
            0 => Some(RatFunc::zero()),
            1 => self.terms.get(&(0, 0)).cloned(),
            _ => None,
        }
    }

    pub fn is_z_polynomial(&self) -> bool {
        self.terms.values().all(RatFunc::is_polynomial)
    }

    pub fn add(&self, other: &CommPoly) -> CommPoly {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, c.clone());
        }
        out
    }

    pub fn neg(&self) -> CommPoly {
        CommPoly {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }

    pub fn sub(&self, other: &CommPoly) -> CommPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &CommPoly) -> CommPoly {
        let mut out = CommPoly::zero();
        for ((i, j), a) in &self.terms {
            for ((k, l), b) in &other.terms {
                out.add_term((i + k, j + l), a * b);
            }
        }
        out
    }

    pub fn scale(&self, c: &RatFunc) -> CommPoly {
        if c.is_zero() {
            return CommPoly::zero();
        }
        CommPoly {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> CommPoly {
        let mut out = CommPoly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                out = out.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// `self(fx, fy)`.
    pub fn substitute(&self, fx: &CommPoly, fy: &CommPoly) -> CommPoly {
        let max_i = self.terms.keys().map(|k| k.0).max().unwrap_or(0);
        let max_j = self.terms.keys().map(|k| k.1).max().unwrap_or(0);
        let px = powers(fx, max_i);
        let py = powers(fy, max_j);
        let mut out = CommPoly::zero();
        for ((i, j), c) in &self.terms {
            out = out.add(&px[*i as usize].mul(&py[*j as usize]).scale(c));
        }
        out
    }

    pub fn derivative_x(&self) -> CommPoly {
        let mut out = CommPoly::zero();
        for ((i, j), c) in &self.terms {
            if *i > 0 {
                out.add_term((i - 1, *j), c.scale(&Rat::from_integer((*i).into())));
            }
        }
        out
    }

    pub fn derivative_y(&self) -> CommPoly {
        let mut out = CommPoly::zero();
        for ((i, j), c) in &self.terms {
            if *j > 0 {
                out.add_term((*i, j - 1), c.scale(&Rat::from_integer((*j).into())));
            }
        }
        out
    }

    pub fn shift_z(&self, c: &Rat) -> CommPoly {
        CommPoly {
            terms: self.terms.iter().map(|(k, v)| (*k, v.shift_z(c))).collect(),
        }
    }

    /// `c` with `self = c * other`, both nonzero.
    pub fn proportional_to(&self, other: &CommPoly) -> Option<RatFunc> {
        let (k, a) = self.terms.iter().next_back()?;
        let b = other.terms.get(k)?;
        let c = a / b;
        (other.scale(&c) == *self).then_some(c)
    }
}

fn powers(p: &CommPoly, n: u32) -> Vec<CommPoly> {
    let mut out = vec![CommPoly::one()];
    for k in 1..=n as usize {
        let next = out[k - 1].mul(p);
        out.push(next);
    }
    out
}

impl fmt::Debug for CommPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CommPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::text::render_comm(self))
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CommEndo {
    pub image_x: CommPoly,
    pub image_y: CommPoly,
}

impl CommEndo {
    pub fn new(image_x: CommPoly, image_y: CommPoly) -> Self {
        CommEndo { image_x, image_y }
    }

    pub fn identity() -> Self {
        CommEndo::new(CommPoly::x(), CommPoly::y())
    }

    pub fn apply(&self, p: &CommPoly) -> CommPoly {
        p.substitute(&self.image_x, &self.image_y)
    }

    pub fn is_identity(&self) -> bool {
        *self == CommEndo::identity()
    }

    pub fn is_z_polynomial(&self) -> bool {
        self.image_x.is_z_polynomial() && self.image_y.is_z_polynomial()
    }

    pub fn shift_z(&self, c: &Rat) -> CommEndo {
        CommEndo::new(self.image_x.shift_z(c), self.image_y.shift_z(c))
    }

    pub fn swap_letters(&self) -> CommEndo {
        let sw = |p: &CommPoly| CommPoly {
            terms: p.terms.iter().map(|((i, j), c)| ((*j, *i), c.clone())).collect(),
        };
        CommEndo::new(sw(&self.image_y), sw(&self.image_x))
    }
}

/// `outer ∘ inner`: the image of `t` is `outer(inner(t))`.
pub fn comm_compose(outer: &CommEndo, inner: &CommEndo) -> CommEndo {
    CommEndo::new(outer.apply(&inner.image_x), outer.apply(&inner.image_y))
}

pub fn jacobian_det(e: &CommEndo) -> CommPoly {
    let (f, g) = (&e.image_x, &e.image_y);
    f.derivative_x()
        .mul(&g.derivative_y())
        .sub(&f.derivative_y().mul(&g.derivative_x()))
}

pub type Mat2 = [[RatFunc; 2]; 2];

pub fn mat_identity() -> Mat2 {
    [
        [RatFunc::one(), RatFunc::zero()],
        [RatFunc::zero(), RatFunc::one()],
    ]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let e = |i: usize, j: usize| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j]);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

pub fn mat_det(m: &Mat2) -> RatFunc {
    &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0])
}

/// One commutative elementary or affine step.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind")]
#[allow(clippy::large_enum_variant)]
pub enum CommStep {
    /// `x -> x + c * y^m`.
    ElemX { c: RatFunc, m: u32 },
    /// `y -> y + c * x^m`.
    ElemY { c: RatFunc, m: u32 },
    /// `x -> m00 x + m01 y + t0`, `y -> m10 x + m11 y + t1`.
    Affine { m: Mat2, t: [RatFunc; 2] },
}

impl CommStep {
    pub fn linear(m: Mat2) -> Self {
        CommStep::Affine {
            m,
            t: [RatFunc::zero(), RatFunc::zero()],
        }
    }

    pub fn to_endo(&self) -> CommEndo {
        match self {
            CommStep::ElemX { c, m } => CommEndo::new(
                CommPoly::x().add(&CommPoly::monomial(c.clone(), 0, *m)),
                CommPoly::y(),
            ),
            CommStep::ElemY { c, m } => CommEndo::new(
                CommPoly::x(),
                CommPoly::y().add(&CommPoly::monomial(c.clone(), *m, 0)),
            ),
            CommStep::Affine { m, t } => {
                let row = |r: &[RatFunc; 2], t: &RatFunc| {
                    let mut p = CommPoly::zero();
                    p.add_term((1, 0), r[0].clone());
                    p.add_term((0, 1), r[1].clone());
                    p.add_term((0, 0), t.clone());
                    p
                };
                CommEndo::new(row(&m[0], &t[0]), row(&m[1], &t[1]))
            }
        }
    }

    /// Coefficient and exponent of an elementary step.
    pub fn elementary(&self) -> Option<(&RatFunc, u32)> {
        match self {
            CommStep::ElemX { c, m } | CommStep::ElemY { c, m } => Some((c, *m)),
            CommStep::Affine { .. } => None,
        }
    }

    pub fn coefficients(&self) -> Vec<&RatFunc> {
        match self {
            CommStep::ElemX { c, .. } | CommStep::ElemY { c, .. } => vec![c],
            CommStep::Affine { m, t } => m.iter().flatten().chain(t.iter()).collect(),
        }
    }

    pub fn is_z_polynomial(&self) -> bool {
        self.coefficients().into_iter().all(RatFunc::is_polynomial)
    }

    pub fn shift_z(&self, s: &Rat) -> CommStep {
        match self {
            CommStep::ElemX { c, m } => CommStep::ElemX { c: c.shift_z(s), m: *m },
            CommStep::ElemY { c, m } => CommStep::ElemY { c: c.shift_z(s), m: *m },
            CommStep::Affine { m, t } => CommStep::Affine {
                m: [
                    [m[0][0].shift_z(s), m[0][1].shift_z(s)],
                    [m[1][0].shift_z(s), m[1][1].shift_z(s)],
                ],
                t: [t[0].shift_z(s), t[1].shift_z(s)],
            },
        }
    }
}

/// Left-to-right composite `s_1 ∘ s_2 ∘ ... ∘ s_n`.
pub fn recompose(steps: &[CommStep]) -> CommEndo {
    steps
        .iter()
        .fold(CommEndo::identity(), |acc, s| comm_compose(&acc, &s.to_endo()))
}

/// Linear part of the composite of affine steps, as the matrix of the resulting endomorphism.
pub fn endo_matrix(e: &CommEndo) -> Option<Mat2> {
    let lin = |p: &CommPoly| -> Option<[RatFunc; 2]> {
        if p.terms().any(|((i, j), _)| i + j > 1) {
            return None;
        }
        Some([p.coeff(1, 0), p.coeff(0, 1)])
    };
    Some([lin(&e.image_x)?, lin(&e.image_y)?])
}

/// Where the peeling loop stopped.
#[allow(clippy::large_enum_variant)]
enum Peel {
    Done(Vec<CommStep>),
    /// This step needed a coefficient outside `F[z]`.
    Blocked(CommStep),
}

fn peel(e: &CommEndo, polynomial_only: bool) -> Result<Peel, CommError> {
    let mut f = e.image_x.clone();
    let mut g = e.image_y.clone();
    // steps peeled from the right end; reversed at the end
    let mut rev: Vec<CommStep> = Vec::new();
    loop {
        let (df, dg) = match (f.degree(), g.degree()) {
            (Some(a), Some(b)) if a >= 1 && b >= 1 => (a, b),
            _ => return Err(CommError::NotAnAutomorphism("an image is constant".into())),
        };
        if df + dg <= 2 {
            break;
        }
        let fp = f.leading_form();
        let gp = g.leading_form();
        let step = if df == dg {
            let c = gp.proportional_to(&fp).ok_or_else(|| {
                CommError::NotAnAutomorphism(format!("leading forms of equal degree {df} are not proportional"))
            })?;
            let upper = c.inv().ok().filter(RatFunc::is_polynomial);
            if !polynomial_only || c.is_polynomial() {
                CommStep::linear([[RatFunc::one(), RatFunc::zero()], [c, RatFunc::one()]])
            } else if let Some(c) = upper {
                CommStep::linear([[RatFunc::one(), c], [RatFunc::zero(), RatFunc::one()]])
            } else {
                // c = n/d in lowest terms; with u d + v n = 1 the step [[d, -v], [n, u]]
                // has determinant one and cancels the leading form of g
                let (n, d) = (c.num().clone(), c.den().clone());
                let (_, u, v) = Poly::ext_gcd(&d, &n);
                let p = RatFunc::from_poly;
                CommStep::linear([[p(d), -p(v)], [p(n), p(u)]])
            }
        } else if df > dg {
            let m = df / dg;
            let c = (df % dg == 0)
                .then(|| fp.proportional_to(&gp.pow(m)))
                .flatten()
                .ok_or_else(|| {
                    CommError::NotAnAutomorphism(format!(
                        "leading form of degree {df} is not a multiple of a power of the degree-{dg} form"
                    ))
                })?;
            CommStep::ElemX { c, m }
        } else {
            let m = dg / df;
            let c = (dg % df == 0)
                .then(|| gp.proportional_to(&fp.pow(m)))
                .flatten()
                .ok_or_else(|| {
                    CommError::NotAnAutomorphism(format!(
                        "leading form of degree {dg} is not a multiple of a power of the degree-{df} form"
                    ))
                })?;
            CommStep::ElemY { c, m }
        };
        if polynomial_only && !step.is_z_polynomial() {
            return Ok(Peel::Blocked(step));
        }
        // e = e' ∘ step, where e' carries the reduced images
        let inv = invert_step(&step);
        let reduced = comm_compose(&CommEndo::new(f, g), &inv.to_endo());
        f = reduced.image_x;
        g = reduced.image_y;
        rev.push(step);
    }
    let m = [
        [f.coeff(1, 0), f.coeff(0, 1)],
        [g.coeff(1, 0), g.coeff(0, 1)],
    ];
    let det = mat_det(&m);
    if det.is_zero() {
        return Err(CommError::NotAnAutomorphism("linear part is singular".into()));
    }
    let affine = CommStep::Affine {
        m,
        t: [f.coeff(0, 0), g.coeff(0, 0)],
    };
    if polynomial_only
        && !(affine.is_z_polynomial() && det.as_constant().is_some())
    {
        return Ok(Peel::Blocked(affine));
    }
    if affine.to_endo() != CommEndo::identity() {
        rev.push(affine);
    }
    rev.reverse();
    Ok(Peel::Done(rev))
}

/// Inverse of a single step.
pub fn invert_step(s: &CommStep) -> CommStep {
    match s {
        CommStep::ElemX { c, m } => CommStep::ElemX { c: -c, m: *m },
        CommStep::ElemY { c, m } => CommStep::ElemY { c: -c, m: *m },
        CommStep::Affine { m, t } => {
            let d = mat_det(m);
            let inv = [
                [&m[1][1] / &d, -(&m[0][1] / &d)],
                [-(&m[1][0] / &d), &m[0][0] / &d],
            ];
            // x -> M x + t has inverse x -> M^{-1} (x - t)
            let nt0 = -(&(&inv[0][0] * &t[0]) + &(&inv[0][1] * &t[1]));
            let nt1 = -(&(&inv[1][0] * &t[0]) + &(&inv[1][1] * &t[1]));
            CommStep::Affine { m: inv, t: [nt0, nt1] }
        }
    }
}

/// Canonical peeling over the field `F(z)`. The returned steps recompose (left to right) to `e`.
pub fn jvdk_decompose(e: &CommEndo) -> Result<Vec<CommStep>, CommError> {
    match peel(e, false)? {
        Peel::Done(steps) => Ok(steps),
        Peel::Blocked(_) => unreachable!("unconstrained peeling never blocks"),
    }
}

/// The same loop with every coefficient required to lie in `F[z]` (and the
/// final linear part to have a rational determinant). `None` when a step
/// needed a genuine fraction.
pub fn z_tame_decompose(e: &CommEndo) -> Result<Option<Vec<CommStep>>, CommError> {
    Ok(match peel(e, true)? {
        Peel::Done(steps) => Some(steps),
        Peel::Blocked(_) => None,
    })
}

/// The first peeled step (peeling starts from the right end) that left `F[z]`.
pub fn z_tame_blocker(e: &CommEndo) -> Result<Option<CommStep>, CommError> {
    Ok(match peel(e, true)? {
        Peel::Done(_) => None,
        Peel::Blocked(s) => Some(s),
    })
}

/// A place of `F(z)`: a rational point `z = a`, or an irreducible non-linear factor.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub enum Place {
    At(#[serde(with = "crate::text::rat_string")] Rat),
    Factor(#[serde(with = "crate::text::poly_string")] Poly),
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Offender {
    pub index: usize,
    pub step: CommStep,
    pub coefficient: RatFunc,
    pub exponent: u32,
    pub place: Place,
    pub valuation: i64,
}

/// First elementary step with `l > 1` whose coefficient has a pole: at `z = 0`
/// first, then at each root of a denominator occurring in the sequence, then
/// at the remaining irreducible denominator factors.
pub fn detect_pattern(steps: &[CommStep]) -> Option<Offender> {
    let elementary: Vec<(usize, &CommStep, &RatFunc, u32)> = steps
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.elementary().map(|(c, m)| (i, s, c, m)))
        .filter(|(_, _, _, m)| *m > 1)
        .collect();
    let at = |a: &Rat| {
        elementary.iter().find_map(|(i, s, c, m)| {
            let v = c.valuation_at(a)?;
            (v < 0).then(|| Offender {
                index: *i,
                step: (*s).clone(),
                coefficient: (*c).clone(),
                exponent: *m,
                place: Place::At(a.clone()),
                valuation: v,
            })
        })
    };
    if let Some(o) = at(&Rat::zero()) {
        return Some(o);
    }
    let mut roots: Vec<Rat> = Vec::new();
    for s in steps {
        for c in s.coefficients() {
            for r in c.den().rational_roots() {
                if !roots.contains(&r) {
                    roots.push(r);
                }
            }
        }
    }
    roots.sort();
    for r in &roots {
        if let Some(o) = at(r) {
            return Some(o);
        }
    }
    // non-rational places: the whole remaining denominator stands in for its factors
    elementary.iter().find_map(|(i, s, c, m)| {
        let mut den = c.den().clone();
        for r in &roots {
            let lin = Poly::from_terms([(1, Rat::one()), (0, -r.clone())]);
            while let Some(q) = den.exact_div(&lin) {
                den = q;
            }
        }
        (!den.is_constant()).then(|| Offender {
            index: *i,
            step: (*s).clone(),
            coefficient: (*c).clone(),
            exponent: *m,
            valuation: c.valuation_by(&den).unwrap_or(0),
            place: Place::Factor(den),
        })
    })
}

/// Writes an `F[z]` matrix with rational nonzero determinant as a product of
/// transvections `[[1,p],[0,1]]`, `[[1,0],[p,1]]` and a rational diagonal.
///
/// The steps recompose (left to right, as endomorphisms) to the linear map
/// with matrix `m`.
pub fn linear_z_tame_reduce(m: &Mat2) -> Result<Vec<CommStep>, CommError> {
    if m.iter().flatten().any(|e| !e.is_polynomial()) {
        return Err(CommError::NonUnitDeterminant);
    }
    let det = mat_det(m);
    if det.is_zero() || det.as_constant().is_none() {
        return Err(CommError::NonUnitDeterminant);
    }
    let upper = |p: RatFunc| [[RatFunc::one(), p], [RatFunc::zero(), RatFunc::one()]];
    let lower = |p: RatFunc| [[RatFunc::one(), RatFunc::zero()], [p, RatFunc::one()]];
    let mut w = m.clone();
    // m = factors[0] * factors[1] * ... * w
    let mut factors: Vec<Mat2> = Vec::new();
    while !w[1][0].is_zero() {
        let a = w[0][0].num().clone();
        let c = w[1][0].num().clone();
        if a.is_zero() {
            // row1 += row2
            w = mat_mul(&upper(RatFunc::one()), &w);
            factors.push(upper(-RatFunc::one()));
        } else if a.degree() <= c.degree() {
            let q = RatFunc::from_poly(c.div_rem(&a).0);
            w = mat_mul(&lower(-&q), &w);
            factors.push(lower(q));
        } else {
            let q = RatFunc::from_poly(a.div_rem(&c).0);
            w = mat_mul(&upper(-&q), &w);
            factors.push(upper(q));
        }
    }
    let g = w[0][0].clone();
    let d = w[1][1].clone();
    let b = &w[0][1] / &d;
    if !b.is_zero() {
        factors.push(upper(b));
    }
    let diag = [[g, RatFunc::zero()], [RatFunc::zero(), d]];
    if diag != mat_identity() {
        factors.push(diag);
    }
    // endomorphism composition multiplies matrices in reverse order
    factors.reverse();
    Ok(factors.into_iter().map(CommStep::linear).collect())
}
