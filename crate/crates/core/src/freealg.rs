//! The coproduct `A = F(z) * F<x,y>`.
//!
//! An element is a finite sum of tensor words `q_0 v_1 q_1 ... v_k q_k` with
//! letters `v_i` in `{x, y}` and coefficients `q_i` in `F(z)`. The coefficient
//! field does not commute with the letters: `z x` and `x z` are different
//! elements. Elements are stored grouped by skeleton (the letter sequence),
//! each group holding a reduced [`SlotTensor`]; this makes zero-testing and
//! equality structural.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commutative::CommPoly;
use crate::linalg::{Matrix, MODULUS};
use crate::scalar::{Rat, RatFunc};
use crate::tensor::SlotTensor;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("operation undefined on the zero element")]
    ZeroElement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum Letter {
    X,
    Y,
}

impl Letter {
    pub fn other(self) -> Letter {
        match self {
            Letter::X => Letter::Y,
            Letter::Y => Letter::X,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Letter::X => "x",
            Letter::Y => "y",
        }
    }
}

pub type Skeleton = Vec<Letter>;

/// `slots[0] letters[0] slots[1] ... letters[k-1] slots[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TensorWord {
    pub letters: Skeleton,
    pub slots: Vec<RatFunc>,
}

impl TensorWord {
    pub fn new(letters: Skeleton, slots: Vec<RatFunc>) -> Self {
        assert_eq!(slots.len(), letters.len() + 1, "a word with k letters has k+1 slots");
        TensorWord { letters, slots }
    }

    /// Word with unit slots.
    pub fn plain(letters: &[Letter]) -> Self {
        TensorWord::new(letters.to_vec(), vec![RatFunc::one(); letters.len() + 1])
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct NCElement {
    blocks: BTreeMap<Skeleton, SlotTensor>,
}

impl NCElement {
    pub fn zero() -> Self {
        NCElement::default()
    }

    pub fn one() -> Self {
        NCElement::scalar(RatFunc::one())
    }

    pub fn scalar(c: RatFunc) -> Self {
        NCElement::from_word(TensorWord::new(vec![], vec![c]))
    }

    pub fn letter(l: Letter) -> Self {
        NCElement::from_word(TensorWord::plain(&[l]))
    }

    pub fn x() -> Self {
        NCElement::letter(Letter::X)
    }

    pub fn y() -> Self {
        NCElement::letter(Letter::Y)
    }

    pub fn from_word(w: TensorWord) -> Self {
        let mut blocks = BTreeMap::new();
        if let Some(t) = SlotTensor::from_slots(&w.slots) {
            blocks.insert(w.letters, t);
        }
        NCElement { blocks }
    }

    pub fn from_words<I: IntoIterator<Item = TensorWord>>(words: I) -> Self {
        words
            .into_iter()
            .fold(NCElement::zero(), |acc, w| acc.add(&NCElement::from_word(w)))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&Skeleton, &SlotTensor)> {
        self.blocks.iter()
    }

    pub fn block(&self, sk: &[Letter]) -> Option<&SlotTensor> {
        self.blocks.get(sk)
    }

    pub fn skeletons(&self) -> impl Iterator<Item = &Skeleton> {
        self.blocks.keys()
    }

    /// Tensor words of the normal form: one per block when the block is a
    /// pure tensor, otherwise one per numerator monomial.
    pub fn terms(&self) -> Vec<TensorWord> {
        self.blocks
            .iter()
            .flat_map(|(sk, t)| {
                let words = t.as_pure().map_or_else(|| t.words(), |s| vec![s]);
                words.into_iter().map(move |slots| TensorWord::new(sk.clone(), slots))
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn add(&self, other: &NCElement) -> NCElement {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &NCElement) {
        for (sk, t) in &other.blocks {
            self.add_block(sk.clone(), t);
        }
    }

    fn add_block(&mut self, sk: Skeleton, t: &SlotTensor) {
        match self.blocks.remove(&sk) {
            None => {
                self.blocks.insert(sk, t.clone());
            }
            Some(old) => {
                if let Some(sum) = old.add(t) {
                    self.blocks.insert(sk, sum);
                }
            }
        }
    }

    pub fn neg(&self) -> NCElement {
        NCElement {
            blocks: self.blocks.iter().map(|(k, t)| (k.clone(), t.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &NCElement) -> NCElement {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> NCElement {
        NCElement {
            blocks: self
                .blocks
                .iter()
                .filter_map(|(k, t)| t.scale(c).map(|t| (k.clone(), t)))
                .collect(),
        }
    }

    /// `r * self`.
    pub fn mul_left(&self, r: &RatFunc) -> NCElement {
        if r.is_zero() {
            return NCElement::zero();
        }
        NCElement {
            blocks: self
                .blocks
                .iter()
                .map(|(k, t)| (k.clone(), t.mul_slot(0, r)))
                .collect(),
        }
    }

    /// `self * r`.
    pub fn mul_right(&self, r: &RatFunc) -> NCElement {
        if r.is_zero() {
            return NCElement::zero();
        }
        NCElement {
            blocks: self
                .blocks
                .iter()
                .map(|(k, t)| (k.clone(), t.mul_slot(t.arity() - 1, r)))
                .collect(),
        }
    }

    pub fn mul(&self, other: &NCElement) -> NCElement {
        let mut out = NCElement::zero();
        for (ka, ta) in &self.blocks {
            for (kb, tb) in &other.blocks {
                let mut sk = ka.clone();
                sk.extend_from_slice(kb);
                out.add_block(sk, &ta.concat(tb));
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> NCElement {
        (0..n).fold(NCElement::one(), |acc, _| acc.mul(self))
    }

    /// Letter count of the longest surviving word; `None` is minus infinity.
    pub fn degree(&self) -> Option<usize> {
        self.blocks.keys().map(Vec::len).max()
    }

    /// Smallest letter count among surviving words.
    pub fn low_degree(&self) -> Option<usize> {
        self.blocks.keys().map(Vec::len).min()
    }

    /// `max (r * #x + s * #y)`; pure coefficient words weigh 0.
    pub fn weight_degree(&self, r: u64, s: u64) -> Option<u64> {
        self.blocks
            .keys()
            .map(|sk| {
                sk.iter()
                    .map(|l| match l {
                        Letter::X => r,
                        Letter::Y => s,
                    })
                    .sum()
            })
            .max()
    }

    pub fn homogeneous_component(&self, d: usize) -> NCElement {
        NCElement {
            blocks: self
                .blocks
                .iter()
                .filter(|(k, _)| k.len() == d)
                .map(|(k, t)| (k.clone(), t.clone()))
                .collect(),
        }
    }

    /// The highest homogeneous form `a⁺`.
    pub fn highest_form(&self) -> Result<NCElement, AlgebraError> {
        let d = self.degree().ok_or(AlgebraError::ZeroElement)?;
        Ok(self.homogeneous_component(d))
    }

    pub fn is_homogeneous(&self) -> bool {
        self.degree() == self.low_degree()
    }

    /// Letters that occur in some surviving word.
    pub fn letters_used(&self) -> Vec<Letter> {
        let mut out: Vec<Letter> = self.blocks.keys().flatten().copied().collect();
        out.sort();
        out.dedup();
        out
    }

    /// Constant (letter-free) part.
    pub fn constant_term(&self) -> RatFunc {
        self.blocks
            .get(&Vec::new())
            .map(SlotTensor::collapse)
            .unwrap_or_else(RatFunc::zero)
    }

    /// Homomorphic image under `x -> img_x`, `y -> img_y`, keeping every
    /// coefficient slot in place. Monomials sharing a slot prefix share the
    /// partial products.
    pub fn substitute(&self, img_x: &NCElement, img_y: &NCElement) -> NCElement {
        let mut out = NCElement::zero();
        for (sk, t) in &self.blocks {
            let words: Vec<(&Vec<u32>, &Rat)> = t.num().terms().collect();
            let part = horner(sk, t, &words, 0, img_x, img_y);
            out.add_assign(&part);
        }
        out
    }

    /// True iff some word of the normal form has a coefficient outside `F[z]`
    /// strictly between two letters.
    pub fn has_sandwich(&self) -> bool {
        self.blocks.values().any(|t| !t.interior_polynomial())
    }

    /// Minimum valuation at `z = 0` of the rightmost slot; `None` for zero (+infinity).
    pub fn right_z_degree(&self) -> Option<i64> {
        self.blocks.values().map(|t| t.valuation_at_zero(t.arity() - 1)).min()
    }

    /// Minimum valuation at `z = 0` of the leftmost slot; `None` for zero.
    pub fn left_z_degree(&self) -> Option<i64> {
        self.blocks.values().map(|t| t.valuation_at_zero(0)).min()
    }

    /// True iff every slot of every word is a polynomial, i.e. the element lies in `F<x,y,z>`.
    pub fn is_z_polynomial(&self) -> bool {
        self.blocks.values().all(SlotTensor::is_polynomial)
    }

    /// Applies the ring automorphism `z -> z + c` to every slot.
    pub fn shift_all_z(&self, c: &Rat) -> NCElement {
        if c.is_zero() {
            return self.clone();
        }
        NCElement {
            blocks: self
                .blocks
                .iter()
                .map(|(k, t)| (k.clone(), t.shift(c)))
                .collect(),
        }
    }

    /// Commutative image in `F(z)[x, y]`.
    pub fn abelianize(&self) -> CommPoly {
        let mut out = CommPoly::zero();
        for (sk, t) in &self.blocks {
            let nx = sk.iter().filter(|l| **l == Letter::X).count() as u32;
            let ny = sk.len() as u32 - nx;
            out.add_term((nx, ny), t.collapse());
        }
        out
    }

    /// Left boundary content: the gcd (in the fractional-ideal sense) of the
    /// univariate left factors of every block. Zero for the zero element.
    pub fn left_content(&self) -> RatFunc {
        content_of(self.blocks.values().map(|t| t.slot_content(0)))
    }

    pub fn right_content(&self) -> RatFunc {
        content_of(self.blocks.values().map(|t| t.slot_content(t.arity() - 1)))
    }

    /// Largest `z`-degree of a slot numerator or denominator.
    pub fn max_z_degree(&self) -> u32 {
        self.blocks
            .values()
            .flat_map(|t| {
                (0..t.arity()).map(move |i| t.num().max_exponent(i).max(t.dens()[i].degree().unwrap_or(0)))
            })
            .max()
            .unwrap_or(0)
    }

    /// Monic lcm of all slot denominators.
    pub fn denominator_lcm(&self) -> crate::scalar::Poly {
        self.blocks
            .values()
            .flat_map(|t| t.dens().iter())
            .fold(crate::scalar::Poly::one(), |acc, d| crate::scalar::Poly::lcm(&acc, d))
    }

    pub fn term_count(&self) -> usize {
        self.blocks.values().map(|t| t.num().len()).sum()
    }
}

/// gcd of numerators over lcm of denominators, normalized monic.
pub(crate) fn content_of<I: Iterator<Item = RatFunc>>(items: I) -> RatFunc {
    use crate::scalar::Poly;
    let mut num = Poly::zero();
    let mut den = Poly::one();
    for r in items {
        num = Poly::gcd(&num, r.num());
        den = Poly::lcm(&den, r.den());
    }
    if num.is_zero() {
        return RatFunc::zero();
    }
    RatFunc::new(num, den).unwrap()
}

fn horner(
    sk: &[Letter],
    t: &SlotTensor,
    words: &[(&Vec<u32>, &Rat)],
    depth: usize,
    img_x: &NCElement,
    img_y: &NCElement,
) -> NCElement {
    let den = &t.dens()[depth];
    let last = depth == sk.len();
    let mut out = NCElement::zero();
    let mut start = 0;
    // `words` is sorted lexicographically, so equal exponents at `depth` are contiguous.
    while start < words.len() {
        let e = words[start].0[depth];
        let mut end = start;
        while end < words.len() && words[end].0[depth] == e {
            end += 1;
        }
        let group = &words[start..end];
        let slot_num = crate::scalar::Poly::monomial(Rat::one(), e);
        let slot = RatFunc::new(slot_num, den.clone()).unwrap();
        let value = if last {
            let c: BigRational = group.iter().map(|(_, c)| (*c).clone()).sum();
            NCElement::scalar(slot.scale(&c))
        } else {
            let img = match sk[depth] {
                Letter::X => img_x,
                Letter::Y => img_y,
            };
            let rest = horner(sk, t, group, depth + 1, img_x, img_y);
            img.mul(&rest).mul_left(&slot)
        };
        out.add_assign(&value);
        start = end;
    }
    out
}

impl std::ops::Add for &NCElement {
    type Output = NCElement;
    fn add(self, rhs: &NCElement) -> NCElement {
        NCElement::add(self, rhs)
    }
}

impl std::ops::Sub for &NCElement {
    type Output = NCElement;
    fn sub(self, rhs: &NCElement) -> NCElement {
        NCElement::sub(self, rhs)
    }
}

impl std::ops::Mul for &NCElement {
    type Output = NCElement;
    fn mul(self, rhs: &NCElement) -> NCElement {
        NCElement::mul(self, rhs)
    }
}

impl fmt::Debug for NCElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for NCElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::text::render_nc(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("a slot denominator is singular at the sampled matrix")]
pub struct PoleHit;

/// Matrix dimension for the evaluation oracle. Letters and the `z`-degrees of
/// the slots both count towards the degree, since `z` is evaluated at a matrix
/// as well; `dim x dim` matrices satisfy no identity of degree below `2 dim`.
pub fn oracle_dim(a: &NCElement) -> usize {
    let deg = a
        .blocks
        .iter()
        .map(|(sk, t)| {
            let zdeg: u32 = (0..t.arity())
                .map(|i| t.num().max_exponent(i).max(t.dens()[i].degree().unwrap_or(0)))
                .sum();
            sk.len() + zdeg as usize
        })
        .max()
        .unwrap_or(0);
    deg.div_ceil(2) + 1
}

/// Random matrices over `Z/p` substituted for `x`, `y`, and `z`.
pub struct MatrixPoint {
    pub x: Matrix,
    pub y: Matrix,
    pub z: Matrix,
}

impl MatrixPoint {
    pub fn random(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sample = || Matrix::from_fn(dim, |_, _| rng.gen_range(0..MODULUS));
        MatrixPoint {
            x: sample(),
            y: sample(),
            z: sample(),
        }
    }

    pub fn eval_coefficient(&self, r: &RatFunc) -> Result<Matrix, PoleHit> {
        let den = self.z.eval_poly(r.den()).and_then(|d| d.inverse()).ok_or(PoleHit)?;
        Ok(self.z.eval_poly(r.num()).ok_or(PoleHit)?.mul(&den))
    }

    pub fn eval(&self, a: &NCElement) -> Result<Matrix, PoleHit> {
        let n = self.x.dim();
        let mut cache: HashMap<RatFunc, Matrix> = HashMap::new();
        let mut total = Matrix::zero(n);
        for w in a.terms() {
            let mut acc: Option<Matrix> = None;
            for (i, slot) in w.slots.iter().enumerate() {
                if !slot.is_one() {
                    if !cache.contains_key(slot) {
                        cache.insert(slot.clone(), self.eval_coefficient(slot)?);
                    }
                    let m = &cache[slot];
                    acc = Some(match acc {
                        None => m.clone(),
                        Some(p) => p.mul(m),
                    });
                }
                if let Some(l) = w.letters.get(i) {
                    let m = match l {
                        Letter::X => &self.x,
                        Letter::Y => &self.y,
                    };
                    acc = Some(match acc {
                        None => m.clone(),
                        Some(p) => p.mul(m),
                    });
                }
            }
            total = total.add(&acc.unwrap_or_else(|| Matrix::identity(n)));
        }
        Ok(total)
    }
}

/// Evaluates at independent random matrices over `Z/p` for `x`, `y`, and `z`.
pub fn eval_matrices(a: &NCElement, dim: usize, seed: u64) -> Result<Matrix, PoleHit> {
    MatrixPoint::random(dim, seed).eval(a)
}

/// Zero test by majority over three seeded evaluations; points where a
/// denominator is singular are re-drawn.
pub fn oracle_is_zero(a: &NCElement, seed: u64) -> bool {
    let dim = oracle_dim(a);
    let mut votes = 0;
    let mut s = seed;
    for _ in 0..3 {
        let m = loop {
            match eval_matrices(a, dim, s) {
                Ok(m) => break m,
                Err(PoleHit) => s = s.wrapping_add(1_000_003),
            }
        };
        s = s.wrapping_add(1);
        if m.is_zero() {
            votes += 1;
        }
    }
    votes >= 2
}
