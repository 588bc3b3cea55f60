//! Seeded generators shared by the integration suites.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use zlift::freealg::{Letter, NCElement, TensorWord};
use zlift::morphism::{ElementaryAuto, TailForm};
use zlift::scalar::{Poly, Rat, RatFunc};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_rat(r: &mut ChaCha8Rng) -> Rat {
    let n: i64 = *[-3, -2, -1, 1, 2, 3].choose(r).unwrap();
    let d: i64 = *[1, 1, 1, 2, 3].choose(r).unwrap();
    Rat::new(n.into(), d.into())
}

/// Nonzero polynomial in `z` of degree at most `deg`.
pub fn poly(r: &mut ChaCha8Rng, deg: u32) -> Poly {
    loop {
        let mut p = Poly::zero();
        for e in 0..=deg {
            if r.gen_bool(0.6) {
                p.add_term(e, small_rat(r));
            }
        }
        if !p.is_zero() {
            return p;
        }
    }
}

pub fn poly_coeff(r: &mut ChaCha8Rng, deg: u32) -> RatFunc {
    RatFunc::from_poly(poly(r, deg))
}

/// Nonzero rational function with denominator among `1, z, z^2, z+1, z-2`.
pub fn ratfunc(r: &mut ChaCha8Rng) -> RatFunc {
    let den = match r.gen_range(0..6) {
        0 | 1 => Poly::one(),
        2 => Poly::z(),
        3 => Poly::monomial(Rat::from_integer(1.into()), 2),
        4 => Poly::from_ints(&[1, 1]),
        _ => Poly::from_ints(&[-2, 1]),
    };
    RatFunc::new(poly(r, 2), den).unwrap()
}

/// Nonzero coefficient `c * z^k` with `-2 <= k <= 2`, so every denominator divides `z^2`.
pub fn laurent_monomial(r: &mut ChaCha8Rng) -> RatFunc {
    RatFunc::z_pow(r.gen_range(-2..=2)).scale(&small_rat(r))
}

pub fn letter(r: &mut ChaCha8Rng) -> Letter {
    if r.gen_bool(0.5) {
        Letter::X
    } else {
        Letter::Y
    }
}

pub fn word(r: &mut ChaCha8Rng, deg: usize, coeff: &mut impl FnMut(&mut ChaCha8Rng) -> RatFunc) -> TensorWord {
    let letters: Vec<Letter> = (0..deg).map(|_| letter(r)).collect();
    let slots: Vec<RatFunc> = (0..=deg).map(|_| coeff(r)).collect();
    TensorWord::new(letters, slots)
}

/// Random element of degree at most `max_deg` with up to `terms` words.
pub fn element(r: &mut ChaCha8Rng, max_deg: usize, terms: usize) -> NCElement {
    let n = r.gen_range(1..=terms);
    NCElement::from_words((0..n).map(|_| {
        let d = r.gen_range(0..=max_deg);
        word(r, d, &mut ratfunc)
    }))
}

/// Tail of degree `deg` in one letter with `summands` terms and the given coefficient law.
pub fn tail(
    r: &mut ChaCha8Rng,
    deg: usize,
    summands: usize,
    coeff: &mut impl FnMut(&mut ChaCha8Rng) -> RatFunc,
) -> TailForm {
    loop {
        let s: Vec<Vec<RatFunc>> = (0..summands)
            .map(|_| {
                let d = r.gen_range(2..=deg.max(2));
                (0..=d).map(|_| coeff(r)).collect()
            })
            .collect();
        let t = TailForm::new(s).unwrap();
        // the top-degree part must survive so the step really has degree `deg`
        if t.materialize(Letter::X).degree() == Some(t.max_degree()) {
            return t;
        }
    }
}

pub fn transvection(moved: Letter, t: TailForm) -> ElementaryAuto {
    match moved {
        Letter::X => ElementaryAuto::transvect_x(t),
        Letter::Y => ElementaryAuto::transvect_y(t),
    }
}

/// Rough word count of the recomposed images, used to keep instances small.
pub fn expansion_estimate(shape: &[(usize, usize)]) -> f64 {
    let (mut a, mut b) = (1.0f64, 1.0f64);
    for &(deg, summands) in shape {
        let moved = a + summands as f64 * b.powi(deg as i32);
        (a, b) = (b, moved);
    }
    a + b
}

/// Per-step `(degree, summands)` with degrees in `2..=max_deg`, resampled
/// until the expansion estimate stays within `budget`.
pub fn budgeted_shape(r: &mut ChaCha8Rng, steps: usize, max_deg: usize, max_summands: usize, budget: f64) -> Vec<(usize, usize)> {
    loop {
        let shape: Vec<(usize, usize)> = (0..steps)
            .map(|_| (r.gen_range(2..=max_deg), r.gen_range(1..=max_summands)))
            .collect();
        if expansion_estimate(&shape) <= budget {
            return shape;
        }
    }
}

/// Alternating transvections with the given shape, starting with `start`.
pub fn alternating_shaped(
    r: &mut ChaCha8Rng,
    start: Letter,
    shape: &[(usize, usize)],
    coeff: &mut impl FnMut(&mut ChaCha8Rng) -> RatFunc,
) -> Vec<ElementaryAuto> {
    let mut moved = start;
    shape
        .iter()
        .map(|&(deg, summands)| {
            let t = tail_exact(r, deg, summands, coeff);
            let s = transvection(moved, t);
            moved = moved.other();
            s
        })
        .collect()
}

/// Tail whose top summand has degree exactly `deg`; the others have degree `2..=deg`.
pub fn tail_exact(
    r: &mut ChaCha8Rng,
    deg: usize,
    summands: usize,
    coeff: &mut impl FnMut(&mut ChaCha8Rng) -> RatFunc,
) -> TailForm {
    loop {
        let s: Vec<Vec<RatFunc>> = (0..summands)
            .map(|i| {
                let d = if i == 0 { deg } else { r.gen_range(2..=deg.max(2)) };
                (0..=d).map(|_| coeff(r)).collect()
            })
            .collect();
        let t = TailForm::new(s).unwrap();
        if t.materialize(Letter::X).degree() == Some(deg) {
            return t;
        }
    }
}

/// Alternating transvections, starting with a random letter.
pub fn alternating(
    r: &mut ChaCha8Rng,
    steps: usize,
    max_deg: usize,
    coeff: &mut impl FnMut(&mut ChaCha8Rng) -> RatFunc,
) -> Vec<ElementaryAuto> {
    let mut moved = letter(r);
    (0..steps)
        .map(|_| {
            let summands = r.gen_range(1..=2);
            let t = tail(r, max_deg, summands, coeff);
            let s = transvection(moved, t);
            moved = moved.other();
            s
        })
        .collect()
}
