//! Degree estimate for `P(f, g)` in terms of the commutator `[f, g]` and the
//! weight degree of `P`.

use serde::Serialize;
use thiserror::Error;

use crate::freealg::{Letter, NCElement};
use crate::peel::{solve_proportional, MatchBounds};
use crate::scalar::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EstimateError {
    #[error("f and g commute")]
    ZeroCommutator,
    #[error("P has no letters")]
    ConstantP,
    #[error("an input is zero")]
    ZeroInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Hypotheses {
    /// Both leading forms are single words that are not powers of a common word.
    MonomialIndependent,
    /// Neither leading form is proportional to a power of the other, and the
    /// supplied witness shows both are powers of one element.
    DependentNonProportional,
    Unverified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EstimateReport {
    pub lhs_degree: u64,
    pub commutator_degree: u64,
    pub product_degree: u64,
    pub weight: u64,
    #[serde(with = "crate::text::rat_string")]
    pub bound: Rat,
    pub holds: bool,
    pub hypotheses: Hypotheses,
}

/// A claimed dependence `f⁺ = w^a`, `g⁺ = w^b`.
#[derive(Debug, Clone)]
pub struct DependenceWitness {
    pub base: NCElement,
    pub f_power: u32,
    pub g_power: u32,
}

pub fn commutator(f: &NCElement, g: &NCElement) -> NCElement {
    f.mul(g).sub(&g.mul(f))
}

/// The skeleton of a single-word element, if it is one.
fn single_word(a: &NCElement) -> Option<Vec<Letter>> {
    let mut it = a.blocks();
    let (sk, t) = it.next()?;
    (it.next().is_none() && t.as_pure().is_some()).then(|| sk.clone())
}

/// `u` is a sum `Σ p v^m q` for some `m ≥ 1`.
fn proportional_to_power(u: &NCElement, v: &NCElement, bounds: &MatchBounds) -> bool {
    let (Some(du), Some(dv)) = (u.degree(), v.degree()) else {
        return false;
    };
    if dv == 0 || du % dv != 0 {
        return false;
    }
    solve_proportional(u, &v.pow((du / dv) as u32), bounds).is_some()
}

pub fn check_hypotheses(f: &NCElement, g: &NCElement, bounds: &MatchBounds) -> Hypotheses {
    check_hypotheses_with(f, g, bounds, None)
}

pub fn check_hypotheses_with(
    f: &NCElement,
    g: &NCElement,
    bounds: &MatchBounds,
    witness: Option<&DependenceWitness>,
) -> Hypotheses {
    let (Ok(fp), Ok(gp)) = (f.highest_form(), g.highest_form()) else {
        return Hypotheses::Unverified;
    };
    if let (Some(a), Some(b)) = (single_word(&fp), single_word(&gp)) {
        // two words commute iff they are powers of a common word
        let ab: Vec<Letter> = a.iter().chain(&b).copied().collect();
        let ba: Vec<Letter> = b.iter().chain(&a).copied().collect();
        if ab != ba {
            return Hypotheses::MonomialIndependent;
        }
    }
    if proportional_to_power(&fp, &gp, bounds) || proportional_to_power(&gp, &fp, bounds) {
        return Hypotheses::Unverified;
    }
    match witness {
        Some(w) if fp == w.base.pow(w.f_power) && gp == w.base.pow(w.g_power) => {
            Hypotheses::DependentNonProportional
        }
        _ => Hypotheses::Unverified,
    }
}

/// Compares `deg P(f, g)` with `deg[f, g] / deg(fg) · w_{deg f, deg g}(P)`.
pub fn check_estimate(f: &NCElement, g: &NCElement, p: &NCElement) -> Result<EstimateReport, EstimateError> {
    let (Some(df), Some(dg)) = (f.degree(), g.degree()) else {
        return Err(EstimateError::ZeroInput);
    };
    if p.is_zero() {
        return Err(EstimateError::ZeroInput);
    }
    if p.degree() == Some(0) {
        return Err(EstimateError::ConstantP);
    }
    let c = commutator(f, g).degree().ok_or(EstimateError::ZeroCommutator)?;
    let lhs = p.substitute(f, g).degree().ok_or(EstimateError::ZeroInput)? as u64;
    let weight = p.weight_degree(df as u64, dg as u64).ok_or(EstimateError::ZeroInput)?;
    let product = (df + dg) as u64;
    let bound = Rat::new((c as u64 * weight).into(), product.into());
    Ok(EstimateReport {
        lhs_degree: lhs,
        commutator_degree: c as u64,
        product_degree: product,
        weight,
        holds: Rat::from_integer(lhs.into()) >= bound,
        bound,
        hypotheses: check_hypotheses(f, g, &MatchBounds::default()),
    })
}
