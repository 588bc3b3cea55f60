//! Endomorphisms of `F(z) * F<x,y>` fixing `z`, and the elementary automorphisms.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::commutative::{mat_det, CommEndo, Mat2};
use crate::freealg::{Letter, NCElement, TensorWord};
use crate::scalar::RatFunc;
use crate::text;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("tail summands must have at least two letters")]
    ShortTailSummand,
    #[error("tail contains the wrong letter or a mixed word")]
    TailLetterMismatch,
    #[error("coefficient must be nonzero")]
    ZeroCoefficient,
    #[error("linear part is singular")]
    SingularMatrix,
}

/// Images of `x` and `y`; `z` is always fixed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Endo {
    pub image_x: NCElement,
    pub image_y: NCElement,
}

impl Endo {
    pub fn new(image_x: NCElement, image_y: NCElement) -> Self {
        Endo { image_x, image_y }
    }

    pub fn identity() -> Self {
        Endo::new(NCElement::x(), NCElement::y())
    }

    pub fn is_identity(&self) -> bool {
        *self == Endo::identity()
    }

    pub fn image(&self, l: Letter) -> &NCElement {
        match l {
            Letter::X => &self.image_x,
            Letter::Y => &self.image_y,
        }
    }

    pub fn apply(&self, a: &NCElement) -> NCElement {
        a.substitute(&self.image_x, &self.image_y)
    }

    /// Larger of the two image degrees.
    pub fn degree(&self) -> Option<usize> {
        self.image_x.degree().max(self.image_y.degree())
    }

    /// `deg f + deg g`, the quantity that peeling decreases.
    pub fn total_degree(&self) -> usize {
        self.image_x.degree().unwrap_or(0) + self.image_y.degree().unwrap_or(0)
    }

    pub fn has_sandwich(&self) -> bool {
        self.image_x.has_sandwich() || self.image_y.has_sandwich()
    }

    pub fn shift_z(&self, c: &crate::scalar::Rat) -> Endo {
        Endo::new(self.image_x.shift_all_z(c), self.image_y.shift_all_z(c))
    }
}

/// `outer ∘ inner`: the image of `t` is `outer(inner(t))`.
pub fn compose(outer: &Endo, inner: &Endo) -> Endo {
    Endo::new(outer.apply(&inner.image_x), outer.apply(&inner.image_y))
}

/// True iff every slot of both images lies in `F[z]`.
pub fn is_z_polynomial(e: &Endo) -> bool {
    e.image_x.is_z_polynomial() && e.image_y.is_z_polynomial()
}

pub fn abelianize_endo(e: &Endo) -> CommEndo {
    CommEndo::new(e.image_x.abelianize(), e.image_y.abelianize())
}

impl Serialize for Endo {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            image_x: String,
            image_y: String,
        }
        Repr {
            image_x: text::render_nc(&self.image_x),
            image_y: text::render_nc(&self.image_y),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Endo {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            image_x: String,
            image_y: String,
        }
        let r = Repr::deserialize(d)?;
        let p = |s: &str| text::parse_nc(s).map_err(serde::de::Error::custom);
        Ok(Endo::new(p(&r.image_x)?, p(&r.image_y)?))
    }
}

/// `sum_i q_{i,0} v q_{i,1} v ... v q_{i,m_i}` in a single letter `v`, each `m_i >= 2`.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct TailForm {
    pub summands: Vec<Vec<RatFunc>>,
}

impl TailForm {
    pub fn new(summands: Vec<Vec<RatFunc>>) -> Result<Self, MorphismError> {
        for s in &summands {
            if s.len() < 3 {
                return Err(MorphismError::ShortTailSummand);
            }
            if s.iter().any(RatFunc::is_zero) {
                return Err(MorphismError::ZeroCoefficient);
            }
        }
        Ok(TailForm { summands })
    }

    pub fn empty() -> Self {
        TailForm::default()
    }

    /// `v^m` with unit coefficients.
    pub fn power(m: usize) -> Self {
        TailForm {
            summands: vec![vec![RatFunc::one(); m + 1]],
        }
    }

    /// Reads off the words of `e`, which must all be powers of `v` of degree at least 2.
    pub fn from_element(e: &NCElement, v: Letter) -> Result<Self, MorphismError> {
        let mut summands = Vec::new();
        for w in e.terms() {
            if w.letters.iter().any(|l| *l != v) {
                return Err(MorphismError::TailLetterMismatch);
            }
            if w.letters.len() < 2 {
                return Err(MorphismError::ShortTailSummand);
            }
            summands.push(w.slots);
        }
        Ok(TailForm { summands })
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    pub fn max_degree(&self) -> usize {
        self.summands.iter().map(|s| s.len() - 1).max().unwrap_or(0)
    }

    /// The tail as an element, in the letter `v`.
    pub fn materialize(&self, v: Letter) -> NCElement {
        NCElement::from_words(
            self.summands
                .iter()
                .map(|s| TensorWord::new(vec![v; s.len() - 1], s.clone())),
        )
    }

    /// `H(a, ..., a)`: the same multilinear shape evaluated at `a`.
    pub fn evaluate_at(&self, a: &NCElement) -> NCElement {
        let mut out = NCElement::zero();
        for s in &self.summands {
            let mut term = NCElement::scalar(s[0].clone());
            for q in &s[1..] {
                term = term.mul(a).mul_right(q);
            }
            out.add_assign(&term);
        }
        out
    }

    fn map_ends(&self, left: &RatFunc, right: &RatFunc) -> TailForm {
        TailForm {
            summands: self
                .summands
                .iter()
                .map(|s| {
                    let mut s = s.clone();
                    s[0] = left * &s[0];
                    let last = s.len() - 1;
                    s[last] = &s[last] * right;
                    s
                })
                .collect(),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ElementaryAuto {
    /// `x -> x`, `y -> r y r' + tail(x)`.
    TransvectY {
        r: RatFunc,
        r_prime: RatFunc,
        tail: TailForm,
    },
    /// `x -> q x q' + tail(y)`, `y -> y`.
    TransvectX {
        q: RatFunc,
        q_prime: RatFunc,
        tail: TailForm,
    },
    /// `x -> p1 x q1`, `y -> p2 y q2`.
    Scale {
        p1: RatFunc,
        q1: RatFunc,
        p2: RatFunc,
        q2: RatFunc,
    },
    /// `x -> m00 x + m01 y`, `y -> m10 x + m11 y`, coefficients on the left.
    LinearLeft { m: Mat2 },
}

impl ElementaryAuto {
    pub fn transvect_y(tail: TailForm) -> Self {
        ElementaryAuto::TransvectY {
            r: RatFunc::one(),
            r_prime: RatFunc::one(),
            tail,
        }
    }

    pub fn transvect_x(tail: TailForm) -> Self {
        ElementaryAuto::TransvectX {
            q: RatFunc::one(),
            q_prime: RatFunc::one(),
            tail,
        }
    }

    pub fn scale_x(p: RatFunc, q: RatFunc) -> Self {
        ElementaryAuto::Scale {
            p1: p,
            q1: q,
            p2: RatFunc::one(),
            q2: RatFunc::one(),
        }
    }

    pub fn validate(&self) -> Result<(), MorphismError> {
        let nonzero = |rs: &[&RatFunc]| {
            if rs.iter().any(|r| r.is_zero()) {
                Err(MorphismError::ZeroCoefficient)
            } else {
                Ok(())
            }
        };
        match self {
            ElementaryAuto::TransvectY { r, r_prime, tail } => {
                nonzero(&[r, r_prime])?;
                TailForm::new(tail.summands.clone()).map(|_| ())
            }
            ElementaryAuto::TransvectX { q, q_prime, tail } => {
                nonzero(&[q, q_prime])?;
                TailForm::new(tail.summands.clone()).map(|_| ())
            }
            ElementaryAuto::Scale { p1, q1, p2, q2 } => nonzero(&[p1, q1, p2, q2]),
            ElementaryAuto::LinearLeft { m } => {
                if mat_det(m).is_zero() {
                    Err(MorphismError::SingularMatrix)
                } else {
                    Ok(())
                }
            }
        }
    }

    /// The letter whose image this step changes, for the two transvection types.
    pub fn moved_letter(&self) -> Option<Letter> {
        match self {
            ElementaryAuto::TransvectY { .. } => Some(Letter::Y),
            ElementaryAuto::TransvectX { .. } => Some(Letter::X),
            _ => None,
        }
    }

    pub fn is_nonlinear(&self) -> bool {
        match self {
            ElementaryAuto::TransvectY { tail, .. } | ElementaryAuto::TransvectX { tail, .. } => {
                !tail.is_empty()
            }
            _ => false,
        }
    }

    pub fn tail(&self) -> Option<&TailForm> {
        match self {
            ElementaryAuto::TransvectY { tail, .. } | ElementaryAuto::TransvectX { tail, .. } => {
                Some(tail)
            }
            _ => None,
        }
    }
}

pub fn to_endo(s: &ElementaryAuto) -> Endo {
    let (x, y) = (NCElement::x(), NCElement::y());
    match s {
        ElementaryAuto::TransvectY { r, r_prime, tail } => Endo::new(
            x,
            y.mul_left(r).mul_right(r_prime).add(&tail.materialize(Letter::X)),
        ),
        ElementaryAuto::TransvectX { q, q_prime, tail } => Endo::new(
            x.mul_left(q).mul_right(q_prime).add(&tail.materialize(Letter::Y)),
            y,
        ),
        ElementaryAuto::Scale { p1, q1, p2, q2 } => Endo::new(
            x.mul_left(p1).mul_right(q1),
            y.mul_left(p2).mul_right(q2),
        ),
        ElementaryAuto::LinearLeft { m } => Endo::new(
            x.mul_left(&m[0][0]).add(&y.mul_left(&m[0][1])),
            x.mul_left(&m[1][0]).add(&y.mul_left(&m[1][1])),
        ),
    }
}

/// `to_endo(s) ∘ to_endo(invert_elementary(s))` is the identity.
pub fn invert_elementary(s: &ElementaryAuto) -> ElementaryAuto {
    let inv = |r: &RatFunc| r.inv().expect("elementary coefficients are nonzero");
    match s {
        ElementaryAuto::TransvectY { r, r_prime, tail } => {
            let (ri, rpi) = (inv(r), inv(r_prime));
            ElementaryAuto::TransvectY {
                tail: tail.map_ends(&(-&ri), &rpi),
                r: ri,
                r_prime: rpi,
            }
        }
        ElementaryAuto::TransvectX { q, q_prime, tail } => {
            let (qi, qpi) = (inv(q), inv(q_prime));
            ElementaryAuto::TransvectX {
                tail: tail.map_ends(&(-&qi), &qpi),
                q: qi,
                q_prime: qpi,
            }
        }
        ElementaryAuto::Scale { p1, q1, p2, q2 } => ElementaryAuto::Scale {
            p1: inv(p1),
            q1: inv(q1),
            p2: inv(p2),
            q2: inv(q2),
        },
        ElementaryAuto::LinearLeft { m } => {
            let d = mat_det(m);
            ElementaryAuto::LinearLeft {
                m: [
                    [&m[1][1] / &d, -(&m[0][1] / &d)],
                    [-(&m[1][0] / &d), &m[0][0] / &d],
                ],
            }
        }
    }
}

/// Left-to-right composite `s_1 ∘ s_2 ∘ ... ∘ s_n`.
pub fn recompose(steps: &[ElementaryAuto]) -> Endo {
    steps
        .iter()
        .fold(Endo::identity(), |acc, s| compose(&acc, &to_endo(s)))
}

/// Conjugates by each step in turn: `B ∘ phi ∘ B^{-1}` with `B = s_n ∘ ... ∘ s_1`.
pub fn conjugate(phi: &Endo, by: &[ElementaryAuto]) -> Endo {
    by.iter().fold(phi.clone(), |acc, s| {
        let inner = compose(&acc, &to_endo(&invert_elementary(s)));
        compose(&to_endo(s), &inner)
    })
}

/// The step list whose left-to-right composite is `conjugate(phi, by)` when
/// `phi` is itself given as steps.
pub fn conjugation_sequence(phi: &[ElementaryAuto], by: &[ElementaryAuto]) -> Vec<ElementaryAuto> {
    let mut out: Vec<ElementaryAuto> = by.iter().rev().cloned().collect();
    out.extend(phi.iter().cloned());
    out.extend(by.iter().map(invert_elementary));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{parse_comm, parse_nc};

    fn endo(fx: &str, fy: &str) -> Endo {
        Endo::new(parse_nc(fx).unwrap(), parse_nc(fy).unwrap())
    }

    fn rf(s: &str) -> RatFunc {
        crate::text::parse_ratfunc(s).unwrap()
    }

    #[test]
    fn apply_examples() {
        let a = parse_nc("x*(1/z)*y + 3").unwrap();
        assert_eq!(Endo::identity().apply(&a), a);
        let e = endo("x", "y + x*x");
        assert_eq!(e.apply(&NCElement::y()), parse_nc("y + x*x").unwrap());
        assert_eq!(e.apply(&parse_nc("x*y").unwrap()), parse_nc("x*(y + x*x)").unwrap());
    }

    #[test]
    fn compose_examples() {
        let e = endo("x + z*y*y", "y + x*(1/z)*x");
        assert_eq!(compose(&e, &Endo::identity()), e);
        // outer(inner(t)): substituting the outer images into the inner ones
        let outer = endo("x + y*y", "y");
        let inner = endo("x", "y + x*x");
        assert_eq!(compose(&outer, &inner), endo("x + y*y", "y + (x + y*y)*(x + y*y)"));
        let s = ElementaryAuto::transvect_y(TailForm::power(2));
        assert!(compose(&to_endo(&s), &to_endo(&invert_elementary(&s))).is_identity());
    }

    #[test]
    fn to_endo_examples() {
        assert_eq!(to_endo(&ElementaryAuto::transvect_y(TailForm::power(2))), endo("x", "y + x*x"));
        assert_eq!(to_endo(&ElementaryAuto::scale_x(RatFunc::z(), RatFunc::one())), endo("z*x", "y"));
        let swap = [
            [RatFunc::zero(), RatFunc::one()],
            [RatFunc::one(), RatFunc::zero()],
        ];
        assert_eq!(to_endo(&ElementaryAuto::LinearLeft { m: swap }), endo("y", "x"));
    }

    #[test]
    fn invert_examples() {
        let s = ElementaryAuto::transvect_y(TailForm::power(2));
        assert_eq!(to_endo(&invert_elementary(&s)), endo("x", "y - x*x"));
        assert_eq!(
            invert_elementary(&ElementaryAuto::scale_x(RatFunc::z(), RatFunc::one())),
            ElementaryAuto::scale_x(RatFunc::z_pow(-1), RatFunc::one())
        );
        let m = [[RatFunc::one(), RatFunc::z()], [RatFunc::zero(), RatFunc::one()]];
        let minus = [[RatFunc::one(), -RatFunc::z()], [RatFunc::zero(), RatFunc::one()]];
        assert_eq!(
            invert_elementary(&ElementaryAuto::LinearLeft { m }),
            ElementaryAuto::LinearLeft { m: minus }
        );
    }

    #[test]
    fn inverse_of_decorated_transvection() {
        let tail = TailForm::new(vec![
            vec![rf("z"), rf("1/(z-1)"), rf("z^2")],
            vec![rf("1"), rf("z"), rf("1"), rf("1/z")],
        ])
        .unwrap();
        for s in [
            ElementaryAuto::TransvectY { r: rf("z+2"), r_prime: rf("1/z"), tail: tail.clone() },
            ElementaryAuto::TransvectX { q: rf("3"), q_prime: rf("z^3"), tail },
        ] {
            let inv = to_endo(&invert_elementary(&s));
            assert!(compose(&to_endo(&s), &inv).is_identity());
            assert!(compose(&inv, &to_endo(&s)).is_identity());
        }
    }

    #[test]
    fn conjugate_examples() {
        let e = endo("x", "y + z*x");
        assert_eq!(conjugate(&e, &[]), e);
        let s = ElementaryAuto::transvect_x(TailForm::power(2));
        assert!(conjugate(&Endo::identity(), std::slice::from_ref(&s)).is_identity());
        let scale = ElementaryAuto::scale_x(RatFunc::z(), RatFunc::one());
        let n = abelianize_endo(&conjugate(&e, &[s, scale]));
        let f = parse_comm("x - 2*y*(y^2 + x*z) - (y^2 + x*z)^2*z").unwrap();
        let g = parse_comm("y + (y^2 + x*z)*z").unwrap();
        assert_eq!(n, CommEndo::new(f, g));
    }

    #[test]
    fn conjugation_sequence_matches() {
        let phi = vec![ElementaryAuto::LinearLeft {
            m: [[RatFunc::one(), RatFunc::zero()], [RatFunc::z(), RatFunc::one()]],
        }];
        let by = vec![
            ElementaryAuto::transvect_x(TailForm::power(2)),
            ElementaryAuto::scale_x(RatFunc::z(), RatFunc::one()),
        ];
        let seq = conjugation_sequence(&phi, &by);
        assert_eq!(seq.len(), 5);
        assert_eq!(recompose(&seq), conjugate(&recompose(&phi), &by));
    }

    #[test]
    fn z_polynomial_examples() {
        assert!(is_z_polynomial(&endo("x", "y + z*x")));
        assert!(!is_z_polynomial(&endo("x", "y + (1/z)*x*x")));
    }

    #[test]
    fn abelianize_examples() {
        assert_eq!(abelianize_endo(&Endo::identity()), CommEndo::identity());
        assert_eq!(abelianize_endo(&endo("x", "y + x*x - x*x")), CommEndo::identity());
        assert_eq!(abelianize_endo(&endo("x", "y + x*y - y*x")), CommEndo::identity());
    }

    #[test]
    fn json_roundtrip() {
        let e = endo("x*(1/z)*y + 2", "y - z*x*x");
        let j = serde_json::to_string(&e).unwrap();
        assert_eq!(serde_json::from_str::<Endo>(&j).unwrap(), e);
        let s = ElementaryAuto::TransvectY {
            r: rf("z"),
            r_prime: rf("1/(z+1)"),
            tail: TailForm::power(3),
        };
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<ElementaryAuto>(&j).unwrap(), s);
    }
}
