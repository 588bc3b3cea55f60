//! Canonical form for elements of `F(z) ⊗ F(z) ⊗ ... ⊗ F(z)`.
//!
//! The coefficient slots of a word with `k` letters form an element of the
//! `(k+1)`-fold tensor power of `F(z)`. That tensor power embeds into the
//! rational function field `F(t_0, ..., t_k)` (slot `i` becomes the variable
//! `t_i`), and its image is exactly the fractions whose denominator is a
//! product of univariate polynomials `D_0(t_0) ... D_k(t_k)`. Cancelling every
//! univariate factor shared between numerator and `D_i` yields a unique
//! representative, so equality of slot tensors is structural.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::scalar::{Poly, Rat, RatFunc};

/// Multivariate polynomial over `Q` with a fixed number of variables.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct MPoly {
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl MPoly {
    pub fn zero() -> Self {
        MPoly::default()
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        let mut p = MPoly::zero();
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.terms.iter()
    }

    fn lead(&self) -> Option<(&Vec<u32>, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn scale(&self, c: &Rat) -> MPoly {
        if c.is_zero() {
            return MPoly::zero();
        }
        MPoly {
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        let mut out = MPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// Multiplies by `p(t_var)`.
    pub fn mul_univariate(&self, var: usize, p: &Poly) -> MPoly {
        if p.is_one() {
            return self.clone();
        }
        let mut out = MPoly::zero();
        for (e, c) in &self.terms {
            for (pe, pc) in p.terms() {
                let mut e2 = e.clone();
                e2[var] += pe;
                out.add_term(e2, c * pc);
            }
        }
        out
    }

    /// Splits into coefficient polynomials in `t_var`, keyed by the remaining exponents.
    pub fn coefficients_in(&self, var: usize) -> BTreeMap<Vec<u32>, Poly> {
        let mut groups: BTreeMap<Vec<u32>, Poly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut key = e.clone();
            let d = std::mem::replace(&mut key[var], 0);
            groups.entry(key).or_default().add_term(d, c.clone());
        }
        groups
    }

    /// Monic gcd of the coefficient polynomials in `t_var`, i.e. the largest
    /// univariate factor in that variable. Zero for the zero polynomial.
    pub fn univariate_content(&self, var: usize) -> Poly {
        let mut g = Poly::zero();
        for p in self.coefficients_in(var).values() {
            g = Poly::gcd(&g, p);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Exact division by `p(t_var)`; the caller guarantees divisibility.
    pub fn div_univariate(&self, var: usize, p: &Poly) -> MPoly {
        if p.is_one() {
            return self.clone();
        }
        let mut out = MPoly::zero();
        for (key, cp) in self.coefficients_in(var) {
            let q = cp.exact_div(p).expect("univariate factor must divide");
            for (d, c) in q.terms() {
                let mut e = key.clone();
                e[var] = d;
                out.add_term(e, c.clone());
            }
        }
        out
    }

    /// Exact multivariate division in lex order; `None` if not exact.
    pub fn exact_div(&self, d: &MPoly) -> Option<MPoly> {
        let (de, dc) = d.lead().expect("division by zero polynomial");
        let (de, dc) = (de.clone(), dc.clone());
        let mut r = self.clone();
        let mut q = MPoly::zero();
        while let Some((re, rc)) = r.lead() {
            if re.iter().zip(&de).any(|(a, b)| a < b) {
                return None;
            }
            let e: Vec<u32> = re.iter().zip(&de).map(|(a, b)| a - b).collect();
            let c = rc / &dc;
            for (te, tc) in &d.terms {
                let sum = te.iter().zip(&e).map(|(a, b)| a + b).collect();
                r.add_term(sum, -(tc * &c));
            }
            q.add_term(e, c);
        }
        Some(q)
    }

    /// Moves variable `i` of `self` to position `map[i]` in a ring of `nvars` variables.
    pub fn embed(&self, map: &[usize], nvars: usize) -> MPoly {
        let mut out = MPoly::zero();
        for (e, c) in &self.terms {
            let mut e2 = vec![0; nvars];
            for (i, x) in e.iter().enumerate() {
                e2[map[i]] += x;
            }
            out.add_term(e2, c.clone());
        }
        out
    }

    pub fn max_exponent(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    pub fn min_exponent(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).min().unwrap_or(0)
    }
}

/// Reduced element of the tensor power of `F(z)`: `num / prod_i dens[i](t_i)`.
///
/// Invariants: `num` nonzero (zero tensors are never stored), every `dens[i]`
/// monic and coprime to the univariate content of `num` in `t_i`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SlotTensor {
    dens: Vec<Poly>,
    num: MPoly,
}

impl SlotTensor {
    /// Pure tensor `s_0 ⊗ s_1 ⊗ ... ⊗ s_k`; `None` if any slot is zero.
    pub fn from_slots(slots: &[RatFunc]) -> Option<Self> {
        if slots.iter().any(RatFunc::is_zero) {
            return None;
        }
        let n = slots.len();
        let mut num = MPoly::constant(n, Rat::one());
        for (i, s) in slots.iter().enumerate() {
            num = num.mul_univariate(i, s.num());
        }
        Some(SlotTensor {
            dens: slots.iter().map(|s| s.den().clone()).collect(),
            num,
        })
    }

    /// Builds from an arbitrary numerator and denominators, reducing. `None` if zero.
    pub fn from_parts(num: MPoly, dens: Vec<Poly>) -> Option<Self> {
        if num.is_zero() {
            return None;
        }
        let mut t = SlotTensor { dens, num };
        for d in &mut t.dens {
            let l = d.lead().expect("zero denominator").clone();
            if !l.is_one() {
                t.num = t.num.scale(&l.recip());
                *d = d.monic();
            }
        }
        t.reduce_all();
        Some(t)
    }

    pub fn arity(&self) -> usize {
        self.dens.len()
    }

    pub fn num(&self) -> &MPoly {
        &self.num
    }

    pub fn dens(&self) -> &[Poly] {
        &self.dens
    }

    fn reduce_slot(&mut self, i: usize) {
        if self.dens[i].is_one() {
            return;
        }
        let mut g = self.dens[i].clone();
        for p in self.num.coefficients_in(i).values() {
            g = Poly::gcd(&g, p);
            if g.is_one() {
                return;
            }
        }
        self.num = self.num.div_univariate(i, &g);
        self.dens[i] = self.dens[i].div_rem(&g).0;
    }

    fn reduce_all(&mut self) {
        for i in 0..self.arity() {
            self.reduce_slot(i);
        }
    }

    /// Rewrites the numerator over the given denominators, which must be
    /// multiples of the current ones.
    pub fn numerator_over(&self, dens: &[Poly]) -> MPoly {
        let mut num = self.num.clone();
        for (i, (mine, target)) in self.dens.iter().zip(dens).enumerate() {
            if mine != target {
                let f = target.exact_div(mine).expect("target denominator must be a multiple");
                num = num.mul_univariate(i, &f);
            }
        }
        num
    }

    /// Sum; `None` when the result is zero.
    pub fn add(&self, other: &SlotTensor) -> Option<SlotTensor> {
        debug_assert_eq!(self.arity(), other.arity());
        if self.dens == other.dens {
            let num = self.num.add(&other.num);
            if num.is_zero() {
                return None;
            }
            let mut t = SlotTensor {
                dens: self.dens.clone(),
                num,
            };
            t.reduce_all();
            return Some(t);
        }
        let dens: Vec<Poly> = self
            .dens
            .iter()
            .zip(&other.dens)
            .map(|(a, b)| Poly::lcm(a, b))
            .collect();
        let num = self.numerator_over(&dens).add(&other.numerator_over(&dens));
        if num.is_zero() {
            return None;
        }
        let mut t = SlotTensor { dens, num };
        t.reduce_all();
        Some(t)
    }

    pub fn neg(&self) -> SlotTensor {
        SlotTensor {
            dens: self.dens.clone(),
            num: self.num.scale(&-Rat::one()),
        }
    }

    pub fn scale(&self, c: &Rat) -> Option<SlotTensor> {
        if c.is_zero() {
            return None;
        }
        Some(SlotTensor {
            dens: self.dens.clone(),
            num: self.num.scale(c),
        })
    }

    /// Multiplies slot `i` by `r` (nonzero).
    pub fn mul_slot(&self, i: usize, r: &RatFunc) -> SlotTensor {
        let mut t = SlotTensor {
            dens: self.dens.clone(),
            num: self.num.mul_univariate(i, r.num()),
        };
        t.dens[i] = &t.dens[i] * r.den();
        t.reduce_slot(i);
        t
    }

    /// Concatenation product: the last slot of `self` and the first slot of
    /// `other` multiply into one junction slot.
    pub fn concat(&self, other: &SlotTensor) -> SlotTensor {
        let k = self.arity() - 1;
        let mut dens = self.dens[..k].to_vec();
        dens.push(&self.dens[k] * &other.dens[0]);
        dens.extend_from_slice(&other.dens[1..]);
        let mut num = MPoly::zero();
        for (ea, ca) in self.num.terms() {
            for (eb, cb) in other.num.terms() {
                let mut e = Vec::with_capacity(dens.len());
                e.extend_from_slice(&ea[..k]);
                e.push(ea[k] + eb[0]);
                e.extend_from_slice(&eb[1..]);
                num.add_term(e, ca * cb);
            }
        }
        let mut t = SlotTensor { dens, num };
        t.reduce_slot(k);
        t
    }

    /// Expands into pure tensors, one per numerator monomial; the rational
    /// coefficient is folded into slot 0.
    pub fn words(&self) -> Vec<Vec<RatFunc>> {
        self.num
            .terms()
            .map(|(e, c)| {
                e.iter()
                    .enumerate()
                    .map(|(i, &x)| {
                        let n = Poly::monomial(if i == 0 { c.clone() } else { Rat::one() }, x);
                        RatFunc::new(n, self.dens[i].clone()).unwrap()
                    })
                    .collect()
            })
            .collect()
    }

    /// Image under the multiplication map (all slots multiplied together).
    pub fn collapse(&self) -> RatFunc {
        let mut num = Poly::zero();
        for (e, c) in self.num.terms() {
            num.add_term(e.iter().sum(), c.clone());
        }
        let den = self.dens.iter().fold(Poly::one(), |acc, d| &acc * d);
        RatFunc::new(num, den).unwrap()
    }

    /// Valuation at `t_i = 0` (intrinsic to the tensor).
    pub fn valuation_at_zero(&self, i: usize) -> i64 {
        self.num.min_exponent(i) as i64 - self.dens[i].multiplicity_at(&Rat::zero()) as i64
    }

    /// True when every slot strictly between the boundary slots is polynomial.
    pub fn interior_polynomial(&self) -> bool {
        let n = self.arity();
        n <= 2 || self.dens[1..n - 1].iter().all(Poly::is_one)
    }

    pub fn is_polynomial(&self) -> bool {
        self.dens.iter().all(Poly::is_one)
    }

    /// Largest univariate factor `c(t_i)/D_i(t_i)` that can be pulled out of slot `i`.
    pub fn slot_content(&self, i: usize) -> RatFunc {
        RatFunc::new(self.num.univariate_content(i), self.dens[i].clone()).unwrap()
    }

    /// Applies `z -> z + c` in every slot.
    pub fn shift(&self, c: &Rat) -> SlotTensor {
        let n = self.arity();
        let lin = Poly::from_terms([(0, c.clone()), (1, Rat::one())]);
        let mut num = MPoly::zero();
        for (e, coef) in self.num.terms() {
            let mut term = MPoly::constant(n, coef.clone());
            for (i, &x) in e.iter().enumerate() {
                if x > 0 {
                    term = term.mul_univariate(i, &lin.pow(x));
                }
            }
            num = num.add(&term);
        }
        let dens = self.dens.iter().map(|d| d.shift(c)).collect();
        SlotTensor::from_parts(num, dens).expect("shift is injective")
    }

    /// Factors a rank-one tensor as `s_0 ⊗ ... ⊗ s_k`; `None` if the rank exceeds one.
    pub fn as_pure(&self) -> Option<Vec<RatFunc>> {
        let mut num = self.num.clone();
        let mut slots = Vec::with_capacity(self.arity());
        for i in 0..self.arity() {
            let c = num.univariate_content(i);
            num = num.div_univariate(i, &c);
            slots.push(RatFunc::new(c, self.dens[i].clone()).unwrap());
        }
        let mut terms = num.terms();
        let (e, c) = terms.next()?;
        if terms.next().is_some() || e.iter().any(|&x| x != 0) {
            return None;
        }
        slots[0] = slots[0].scale(c);
        Some(slots)
    }

    /// Keeps only the given slots; the others must carry trivial denominators
    /// and exponent zero. Returns `None` if that is not the case.
    pub fn restrict(&self, keep: &[usize]) -> Option<SlotTensor> {
        let n = self.arity();
        for i in 0..n {
            if !keep.contains(&i) && (!self.dens[i].is_one() || self.num.max_exponent(i) != 0) {
                return None;
            }
        }
        let mut num = MPoly::zero();
        for (e, c) in self.num.terms() {
            num.add_term(keep.iter().map(|&i| e[i]).collect(), c.clone());
        }
        Some(SlotTensor {
            dens: keep.iter().map(|&i| self.dens[i].clone()).collect(),
            num,
        })
    }
}
