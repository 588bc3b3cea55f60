//! Noncommutative peeling: proportionality and multilinear matching, the
//! alternating elementary decomposition, and boundary-coefficient normalization.

use serde::Serialize;
use thiserror::Error;

use crate::freealg::{Letter, NCElement};
use crate::morphism::{compose, invert_elementary, recompose, to_endo, ElementaryAuto, Endo, TailForm};
use crate::scalar::{Poly, RatFunc};
use crate::tensor::{MPoly, SlotTensor};

/// Limits on the coefficients a match may use. `None` selects the per-call
/// default: denominator power `m + 2` and numerator degree `2 +` the largest
/// `z`-degree occurring in the inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct MatchBounds {
    pub max_den_power: Option<u32>,
    pub max_num_degree: Option<u32>,
}

impl MatchBounds {
    pub fn new(max_den_power: u32, max_num_degree: u32) -> Self {
        MatchBounds {
            max_den_power: Some(max_den_power),
            max_num_degree: Some(max_num_degree),
        }
    }

    fn admits(&self, coeffs: &[&RatFunc], u: &NCElement, v: &NCElement, m: usize) -> bool {
        let dp = self.max_den_power.unwrap_or(m as u32 + 2);
        let nd = self
            .max_num_degree
            .unwrap_or_else(|| {
                // dividing by `m` copies of `v` can raise numerator degrees by its full z-height each time
                let height = v.max_z_degree() as usize + v.denominator_lcm().degree().unwrap_or(0) as usize;
                (2 + u.max_z_degree() as usize + m * height) as u32
            });
        let base = &Poly::lcm(&u.denominator_lcm(), &v.denominator_lcm()) * &Poly::z();
        let cap = base.pow(dp);
        coeffs
            .iter()
            .all(|c| c.num().degree().unwrap_or(0) <= nd && c.den().divides(&cap))
    }
}

/// The unique `H` with `H(v, ..., v) = u` (`m` copies), if one exists.
///
/// Restricting to the skeleton `s^m`, where `s` is any skeleton of `v`, the
/// tensor of `u` factors as `H` (on the junction slots) times `m` copies of
/// the tensor of `v`; so `H` is an exact quotient, checked against all of `u`.
pub fn exact_multilinear_match(u: &NCElement, v: &NCElement, m: usize) -> Option<TailForm> {
    let d = v.degree()?;
    if m == 0 || d == 0 || u.degree()? != m * d || !u.is_homogeneous() || !v.is_homogeneous() {
        return None;
    }
    let (sk, vt) = v.blocks().next()?;
    let target: Vec<Letter> = sk.iter().copied().cycle().take(m * d).collect();
    let ut = u.block(&target)?;
    let mut prod = vt.clone();
    for _ in 1..m {
        prod = prod.concat(vt);
    }
    // H = (N_u * D_prod) / (N_prod * D_u)
    let mut num = ut.num().clone();
    for (i, dp) in prod.dens().iter().enumerate() {
        num = num.mul_univariate(i, dp);
    }
    // junction-only factors of the product may cancel against the denominators of H
    let junctions: Vec<usize> = (0..=m).map(|j| j * d).collect();
    let mut divisor = prod.num().clone();
    let mut dens = ut.dens().to_vec();
    for &j in &junctions {
        let c = divisor.univariate_content(j);
        if !c.is_one() && !c.is_zero() {
            divisor = divisor.div_univariate(j, &c);
            dens[j] = &dens[j] * &c;
        }
    }
    let q: MPoly = num.exact_div(&divisor)?;
    let full = SlotTensor::from_parts(q, dens)?;
    let h = full.restrict(&junctions)?;
    let tail = TailForm { summands: h.words() };
    (tail.evaluate_at(v) == *u).then_some(tail)
}

pub fn solve_multilinear_match(
    u: &NCElement,
    v: &NCElement,
    m: usize,
    bounds: &MatchBounds,
) -> Option<TailForm> {
    let tail = exact_multilinear_match(u, v, m)?;
    let coeffs: Vec<&RatFunc> = tail.summands.iter().flatten().collect();
    bounds.admits(&coeffs, u, v, m).then_some(tail)
}

/// Pairs `(p_i, q_i)` with `u = sum p_i v q_i`.
pub fn solve_proportional(
    u: &NCElement,
    v: &NCElement,
    bounds: &MatchBounds,
) -> Option<Vec<(RatFunc, RatFunc)>> {
    let tail = solve_multilinear_match(u, v, 1, bounds)?;
    Some(
        tail.summands
            .into_iter()
            .map(|s| (s[0].clone(), s[1].clone()))
            .collect(),
    )
}

/// `c` with `u = c v`, coefficient on the left only.
pub fn left_proportional(u: &NCElement, v: &NCElement) -> Option<RatFunc> {
    let tail = exact_multilinear_match(u, v, 1)?;
    let c = NCElement::from_words(
        tail.summands
            .iter()
            .map(|s| crate::freealg::TensorWord::new(vec![], vec![&s[0] * &s[1]])),
    );
    // the collapsed coefficient is only meaningful if the right factors are rational constants
    let total = c.constant_term();
    (v.mul_left(&total) == *u).then_some(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FailureReason {
    /// A match exists but its coefficients exceed the bounds.
    Bounds,
    /// No elementary step reduces the degree; the input is not an automorphism
    /// of the supported shape.
    NotAnAutomorphism,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PeelError {
    #[error("decomposition failed ({reason:?}) at residual ({}, {})", residual.image_x, residual.image_y)]
    DecompositionFailed { reason: FailureReason, residual: Endo },
    #[error("stage {stage} of the process contains a sandwich")]
    SandwichPresent { stage: usize },
    #[error("step {index} is not supported by the normalization")]
    UnsupportedStep { index: usize },
}

/// Elementary steps; the composite is `steps[0] ∘ steps[1] ∘ ...`, i.e.
/// applied left to right starting from the identity.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NCDecomposition {
    pub steps: Vec<ElementaryAuto>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageDigest {
    pub stage: usize,
    pub terms_x: usize,
    pub terms_y: usize,
    pub degree_x: Option<usize>,
    pub degree_y: Option<usize>,
    pub has_sandwich: bool,
}

impl NCDecomposition {
    pub fn recompose(&self) -> Endo {
        recompose(&self.steps)
    }

    /// True iff the nonlinear steps alternate between moving `x` and moving `y`.
    pub fn alternates(&self) -> bool {
        let moved: Vec<Letter> = self
            .steps
            .iter()
            .filter(|s| s.is_nonlinear())
            .filter_map(ElementaryAuto::moved_letter)
            .collect();
        moved.windows(2).all(|w| w[0] != w[1])
    }

    pub fn to_json(&self) -> serde_json::Value {
        let digests: Vec<StageDigest> = replay(self)
            .iter()
            .enumerate()
            .map(|(i, e)| StageDigest {
                stage: i,
                terms_x: e.image_x.term_count(),
                terms_y: e.image_y.term_count(),
                degree_x: e.image_x.degree(),
                degree_y: e.image_y.degree(),
                has_sandwich: e.has_sandwich(),
            })
            .collect();
        serde_json::json!({
            "order": "apply left-to-right starting from the identity",
            "steps": self.steps,
            "stages": digests,
        })
    }
}

/// Prefix composites: `[id, s_1, s_1 ∘ s_2, ...]`.
pub fn replay(d: &NCDecomposition) -> Vec<Endo> {
    let mut out = vec![Endo::identity()];
    for s in &d.steps {
        let next = compose(out.last().unwrap(), &to_endo(s));
        out.push(next);
    }
    out
}

fn fail(reason: FailureReason, f: &NCElement, g: &NCElement) -> PeelError {
    PeelError::DecompositionFailed {
        reason,
        residual: Endo::new(f.clone(), g.clone()),
    }
}

/// Peels the image of the higher degree against a power of the other one
/// until both are linear, merging consecutive peels of the same letter.
pub fn nc_decompose(e: &Endo, bounds: &MatchBounds) -> Result<NCDecomposition, PeelError> {
    let mut f = e.image_x.clone();
    let mut g = e.image_y.clone();
    // peeled from the right end of the composite
    let mut rev: Vec<ElementaryAuto> = Vec::new();
    loop {
        let (df, dg) = match (f.degree(), g.degree()) {
            (Some(a), Some(b)) if a >= 1 && b >= 1 => (a, b),
            _ => return Err(fail(FailureReason::NotAnAutomorphism, &f, &g)),
        };
        if df + dg <= 2 {
            break;
        }
        let (fp, gp) = (f.highest_form().unwrap(), g.highest_form().unwrap());
        if df == dg {
            let (step, nf, ng) = if let Some(c) = left_proportional(&gp, &fp) {
                let m = [[RatFunc::one(), RatFunc::zero()], [c.clone(), RatFunc::one()]];
                let ng = g.sub(&f.mul_left(&c));
                (ElementaryAuto::LinearLeft { m }, f.clone(), ng)
            } else if let Some(c) = left_proportional(&fp, &gp) {
                let m = [[RatFunc::one(), c.clone()], [RatFunc::zero(), RatFunc::one()]];
                let nf = f.sub(&g.mul_left(&c));
                (ElementaryAuto::LinearLeft { m }, nf, g.clone())
            } else {
                return Err(fail(FailureReason::NotAnAutomorphism, &f, &g));
            };
            rev.push(step);
            f = nf;
            g = ng;
            continue;
        }
        let (hi, lo, moved) = if df > dg { (&fp, &gp, Letter::X) } else { (&gp, &fp, Letter::Y) };
        let (dh, dl) = (df.max(dg), df.min(dg));
        if dh % dl != 0 {
            return Err(fail(FailureReason::NotAnAutomorphism, &f, &g));
        }
        let m = dh / dl;
        let tail = match solve_multilinear_match(hi, lo, m, bounds) {
            Some(t) => t,
            None => {
                let reason = if exact_multilinear_match(hi, lo, m).is_some() {
                    FailureReason::Bounds
                } else {
                    FailureReason::NotAnAutomorphism
                };
                return Err(fail(reason, &f, &g));
            }
        };
        match moved {
            Letter::X => f = f.sub(&tail.evaluate_at(&g)),
            Letter::Y => g = g.sub(&tail.evaluate_at(&f)),
        }
        push_tail(&mut rev, moved, tail);
    }
    let linear = linear_steps(&f, &g).ok_or_else(|| fail(FailureReason::NotAnAutomorphism, &f, &g))?;
    rev.reverse();
    let mut steps = linear;
    steps.extend(rev);
    let d = NCDecomposition { steps };
    if d.recompose() != *e {
        return Err(fail(FailureReason::NotAnAutomorphism, &e.image_x, &e.image_y));
    }
    Ok(d)
}

/// Adds a peeled tail, merging with the previous step when it moved the same letter.
fn push_tail(rev: &mut Vec<ElementaryAuto>, moved: Letter, tail: TailForm) {
    if let Some(last) = rev.last_mut() {
        if last.moved_letter() == Some(moved) {
            let prev = last.tail().unwrap().materialize(moved.other());
            let sum = prev.add(&tail.materialize(moved.other()));
            let merged = TailForm::from_element(&sum, moved.other()).expect("tails stay in one letter");
            *last = make_transvection(moved, merged);
            return;
        }
    }
    rev.push(make_transvection(moved, tail));
}

fn make_transvection(moved: Letter, tail: TailForm) -> ElementaryAuto {
    match moved {
        Letter::X => ElementaryAuto::transvect_x(tail),
        Letter::Y => ElementaryAuto::transvect_y(tail),
    }
}

/// Writes a linear pair `(f, g)` as `Scale` followed by `LinearLeft`.
fn linear_steps(f: &NCElement, g: &NCElement) -> Option<Vec<ElementaryAuto>> {
    let pure = |e: &NCElement, l: Letter| -> Option<Option<(RatFunc, RatFunc)>> {
        match e.block(&[l]) {
            None => Some(None),
            Some(t) => t.as_pure().map(|s| Some((s[0].clone(), s[1].clone()))),
        }
    };
    if f.low_degree() != Some(1) || g.low_degree() != Some(1) {
        return None;
    }
    let (fx, fy, gx, gy) = (
        pure(f, Letter::X)?,
        pure(f, Letter::Y)?,
        pure(g, Letter::X)?,
        pure(g, Letter::Y)?,
    );
    if fy.is_none() && gx.is_none() {
        let (p1, q1) = fx?;
        let (p2, q2) = gy?;
        let s = ElementaryAuto::Scale { p1, q1, p2, q2 };
        return Some(if to_endo(&s).is_identity() { vec![] } else { vec![s] });
    }
    linear_by_letter(&fx, &fy, &gx, &gy).or_else(|| linear_by_image(&fx, &fy, &gx, &gy))
}

type Pure = Option<(RatFunc, RatFunc)>;

fn coeff(a: &Pure, q: &RatFunc) -> Option<RatFunc> {
    match a {
        None => Some(RatFunc::zero()),
        Some((p, r)) => Some(p.scale(&(r / q).as_constant()?)),
    }
}

fn right_factor(a: &Pure, b: &Pure) -> Option<RatFunc> {
    a.as_ref().or(b.as_ref()).map(|(_, q)| q.clone())
}

fn push_nontrivial(out: &mut Vec<ElementaryAuto>, s: ElementaryAuto) -> Option<()> {
    s.validate().ok()?;
    if !to_endo(&s).is_identity() {
        out.push(s);
    }
    Some(())
}

fn unit_scale(q1: RatFunc, q2: RatFunc) -> ElementaryAuto {
    ElementaryAuto::Scale {
        p1: RatFunc::one(),
        q1,
        p2: RatFunc::one(),
        q2,
    }
}

/// `f = a x q1 + b y q2`, `g = c x q1 + d y q2`: scale the letters, then mix.
fn linear_by_letter(fx: &Pure, fy: &Pure, gx: &Pure, gy: &Pure) -> Option<Vec<ElementaryAuto>> {
    let q1 = right_factor(fx, gx)?;
    let q2 = right_factor(fy, gy)?;
    let m = [[coeff(fx, &q1)?, coeff(fy, &q2)?], [coeff(gx, &q1)?, coeff(gy, &q2)?]];
    let mut out = Vec::new();
    push_nontrivial(&mut out, unit_scale(q1, q2))?;
    push_nontrivial(&mut out, ElementaryAuto::LinearLeft { m })?;
    Some(out)
}

/// `f = (a x + b y) q1`, `g = (c x + d y) q2`: mix, then scale the images.
fn linear_by_image(fx: &Pure, fy: &Pure, gx: &Pure, gy: &Pure) -> Option<Vec<ElementaryAuto>> {
    let q1 = right_factor(fx, fy)?;
    let q2 = right_factor(gx, gy)?;
    let m = [[coeff(fx, &q1)?, coeff(fy, &q1)?], [coeff(gx, &q2)?, coeff(gy, &q2)?]];
    let mut out = Vec::new();
    push_nontrivial(&mut out, ElementaryAuto::LinearLeft { m })?;
    push_nontrivial(&mut out, unit_scale(q1, q2))?;
    Some(out)
}

/// True when the boundary coefficients of both images are polynomial and
/// jointly coprime, on the left and on the right.
pub fn boundary_normalized(e: &Endo) -> bool {
    [true, false].into_iter().all(|left| {
        let mut g = Poly::zero();
        for img in [&e.image_x, &e.image_y] {
            for (_, t) in img.blocks() {
                let i = if left { 0 } else { t.arity() - 1 };
                let c = t.slot_content(i);
                if !c.is_polynomial() {
                    return false;
                }
                g = Poly::gcd(&g, c.num());
            }
        }
        g.is_one()
    })
}

/// The scaling `x -> a x b`, `y -> c y d` tracked by [`coefficient_improve`].
#[derive(Clone)]
struct Scaling {
    a: RatFunc,
    b: RatFunc,
    c: RatFunc,
    d: RatFunc,
}

impl Scaling {
    fn identity() -> Self {
        Scaling {
            a: RatFunc::one(),
            b: RatFunc::one(),
            c: RatFunc::one(),
            d: RatFunc::one(),
        }
    }

    fn as_step(&self) -> ElementaryAuto {
        ElementaryAuto::Scale {
            p1: self.a.clone(),
            q1: self.b.clone(),
            p2: self.c.clone(),
            q2: self.d.clone(),
        }
    }
}

/// Part a: for `x' = p x q`, `M_qs(x') = p M_qs'(x) q` with `qs'_i = q qs_i p`.
pub fn thread_scaling(qs: &[RatFunc], p: &RatFunc, q: &RatFunc) -> Vec<RatFunc> {
    qs.iter().map(|qi| &(q * qi) * p).collect()
}

/// Substitutes `v -> p v q` into a tail and multiplies by `l` on the left and `r` on the right.
fn rescale_tail(tail: &TailForm, p: &RatFunc, q: &RatFunc, l: &RatFunc, r: &RatFunc) -> TailForm {
    TailForm {
        summands: tail
            .summands
            .iter()
            .map(|s| {
                let k = s.len() - 1;
                let mut out = Vec::with_capacity(s.len());
                out.push(&(l * &s[0]) * p);
                out.extend(thread_scaling(&s[1..k], p, q));
                out.push(&(q * &s[k]) * r);
                out
            })
            .collect(),
    }
}

/// Rewrites a sandwich-free decomposition so that every stage before the
/// last has normalized boundary coefficients (see [`boundary_normalized`]).
/// The intermediate scalings are threaded through the tails; a final `Scale`
/// step restores the original composite.
pub fn coefficient_improve(d: &NCDecomposition) -> Result<NCDecomposition, PeelError> {
    let stages = replay(d);
    if let Some(stage) = stages.iter().position(Endo::has_sandwich) {
        return Err(PeelError::SandwichPresent { stage });
    }
    let inv = |r: &RatFunc| r.inv().expect("nonzero");
    let mut cur = Scaling::identity();
    let mut out: Vec<ElementaryAuto> = Vec::new();
    for (i, s) in d.steps.iter().enumerate() {
        let stage = &stages[i + 1];
        match s {
            ElementaryAuto::Scale { p1, q1, p2, q2 } => {
                // absorbed: the new scaling is s^{-1} ∘ cur
                cur = Scaling {
                    a: &cur.a * &inv(p1),
                    b: &inv(q1) * &cur.b,
                    c: &cur.c * &inv(p2),
                    d: &inv(q2) * &cur.d,
                };
            }
            ElementaryAuto::TransvectY { r, r_prime, tail } => {
                let c2 = inv(&stage.image_y.left_content());
                let d2 = inv(&stage.image_y.right_content());
                let (ai, bi) = (inv(&cur.a), inv(&cur.b));
                out.push(ElementaryAuto::TransvectY {
                    r: &(&c2 * r) * &inv(&cur.c),
                    r_prime: &(&inv(&cur.d) * r_prime) * &d2,
                    tail: rescale_tail(tail, &ai, &bi, &c2, &d2),
                });
                cur.c = c2;
                cur.d = d2;
            }
            ElementaryAuto::TransvectX { q, q_prime, tail } => {
                let a2 = inv(&stage.image_x.left_content());
                let b2 = inv(&stage.image_x.right_content());
                let (ci, di) = (inv(&cur.c), inv(&cur.d));
                out.push(ElementaryAuto::TransvectX {
                    q: &(&a2 * q) * &inv(&cur.a),
                    q_prime: &(&inv(&cur.b) * q_prime) * &b2,
                    tail: rescale_tail(tail, &ci, &di, &a2, &b2),
                });
                cur.a = a2;
                cur.b = b2;
            }
            ElementaryAuto::LinearLeft { .. } => return Err(PeelError::UnsupportedStep { index: i }),
        }
    }
    let restore = invert_elementary(&cur.as_step());
    if !to_endo(&restore).is_identity() {
        out.push(restore);
    }
    Ok(NCDecomposition { steps: out })
}
