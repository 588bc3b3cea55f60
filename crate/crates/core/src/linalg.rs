//! Matrices over a prime field for the evaluation oracle, and a sparse
//! linear solver over `Q`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::scalar::{Poly, Rat};

/// The prime `2^61 - 1` used by the evaluation oracle.
pub const MODULUS: u64 = (1 << 61) - 1;

fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MODULUS as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a);
        }
        a = mul_mod(a, a);
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64) -> u64 {
    pow_mod(a, MODULUS - 2)
}

/// Image of a rational number in `Z/p`; `None` if `p` divides the denominator.
pub fn rat_mod(r: &Rat) -> Option<u64> {
    let m = BigInt::from(MODULUS);
    let red = |n: &BigInt| -> u64 { n.mod_floor(&m).to_u64().expect("reduced below the modulus") };
    let d = red(r.denom());
    (d != 0).then(|| mul_mod(red(r.numer()), inv_mod(d)))
}

/// Dense square matrix over `Z/p`, `p = 2^61 - 1`.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    n: usize,
    a: Vec<u64>,
}

impl Matrix {
    pub fn zero(n: usize) -> Self {
        Matrix { n, a: vec![0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zero(n);
        for i in 0..n {
            m.a[i * n + i] = 1;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> u64) -> Self {
        let mut m = Matrix::zero(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i * n + j] = f(i, j) % MODULUS;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.a[i * self.n + j]
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|&x| x == 0)
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        Matrix {
            n: self.n,
            a: self.a.iter().zip(&o.a).map(|(x, y)| (x + y) % MODULUS).collect(),
        }
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        Matrix {
            n: self.n,
            a: self.a.iter().zip(&o.a).map(|(x, y)| (x + MODULUS - y) % MODULUS).collect(),
        }
    }

    pub fn scale(&self, c: u64) -> Matrix {
        Matrix {
            n: self.n,
            a: self.a.iter().map(|&x| mul_mod(x, c)).collect(),
        }
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc: u128 = 0;
                for k in 0..n {
                    acc += self.a[i * n + k] as u128 * o.a[k * n + j] as u128;
                    if acc >= 1 << 126 {
                        acc %= MODULUS as u128;
                    }
                }
                out.a[i * n + j] = (acc % MODULUS as u128) as u64;
            }
        }
        out
    }

    /// Gauss-Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        let n = self.n;
        let mut m = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let piv = (col..n).find(|&r| m.a[r * n + col] != 0)?;
            if piv != col {
                for j in 0..n {
                    m.a.swap(piv * n + j, col * n + j);
                    inv.a.swap(piv * n + j, col * n + j);
                }
            }
            let p = inv_mod(m.a[col * n + col]);
            for j in 0..n {
                m.a[col * n + j] = mul_mod(m.a[col * n + j], p);
                inv.a[col * n + j] = mul_mod(inv.a[col * n + j], p);
            }
            for r in 0..n {
                let f = m.a[r * n + col];
                if r == col || f == 0 {
                    continue;
                }
                for j in 0..n {
                    let (mv, iv) = (m.a[col * n + j], inv.a[col * n + j]);
                    m.a[r * n + j] = (m.a[r * n + j] + MODULUS - mul_mod(f, mv)) % MODULUS;
                    inv.a[r * n + j] = (inv.a[r * n + j] + MODULUS - mul_mod(f, iv)) % MODULUS;
                }
            }
        }
        Some(inv)
    }

    /// `p(self)` by Horner's rule; `None` if a coefficient is not defined mod `p`.
    pub fn eval_poly(&self, p: &Poly) -> Option<Matrix> {
        let Some(d) = p.degree() else {
            return Some(Matrix::zero(self.n));
        };
        let id = Matrix::identity(self.n);
        let mut acc = id.scale(rat_mod(&p.coeff(d))?);
        for e in (0..d).rev() {
            acc = acc.mul(self).add(&id.scale(rat_mod(&p.coeff(e))?));
        }
        Some(acc)
    }
}

/// One sparse linear equation `sum coeffs[j] * v_j = rhs`.
pub type Equation = (BTreeMap<usize, Rat>, Rat);

/// Solves a sparse system over `Q` by Gauss-Jordan elimination, setting free
/// variables to zero. `None` if inconsistent.
pub fn solve_sparse(eqs: Vec<Equation>, nvars: usize) -> Option<Vec<Rat>> {
    let mut pivots: Vec<(usize, Equation)> = Vec::new();
    for (mut row, mut rhs) in eqs {
        for (pv, (prow, prhs)) in &pivots {
            if let Some(c) = row.get(pv).cloned() {
                for (j, v) in prow {
                    let e = row.entry(*j).or_insert_with(Rat::zero);
                    *e -= &c * v;
                    if e.is_zero() {
                        row.remove(j);
                    }
                }
                rhs -= &c * prhs;
            }
        }
        let Some((&pv, pc)) = row.iter().next() else {
            if rhs.is_zero() {
                continue;
            }
            return None;
        };
        let inv = pc.recip();
        for v in row.values_mut() {
            *v *= &inv;
        }
        rhs *= &inv;
        // keep earlier pivots reduced against the new one
        for (_, (prow, prhs)) in pivots.iter_mut() {
            if let Some(c) = prow.get(&pv).cloned() {
                for (j, v) in &row {
                    let e = prow.entry(*j).or_insert_with(Rat::zero);
                    *e -= &c * v;
                    if e.is_zero() {
                        prow.remove(j);
                    }
                }
                *prhs -= &c * &rhs;
            }
        }
        pivots.push((pv, (row, rhs)));
    }
    let mut out = vec![Rat::zero(); nvars];
    for (pv, (_, rhs)) in pivots {
        out[pv] = rhs;
    }
    Some(out)
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ratio};

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_fn(rows.len(), |i, j| rat_mod(&rat(rows[i][j])).unwrap())
    }

    #[test]
    fn inverse_roundtrip() {
        let a = m(&[&[2, 1, 0], &[0, 1, 3], &[1, 0, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(3));
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn commutator_of_matrix_units() {
        let e12 = m(&[&[0, 1], &[0, 0]]);
        let e21 = m(&[&[0, 0], &[1, 0]]);
        let c = e12.mul(&e21).sub(&e21.mul(&e12));
        assert_eq!(c, m(&[&[1, 0], &[0, -1]]));
    }

    #[test]
    fn rationals_reduce() {
        let half = rat_mod(&ratio(1, 2)).unwrap();
        assert_eq!(mul_mod(half, 2), 1);
        assert_eq!(rat_mod(&ratio(-3, 1)).unwrap(), MODULUS - 3);
    }

    #[test]
    fn sparse_solve() {
        let eq = |cs: &[(usize, i64)], r: i64| -> Equation {
            (cs.iter().map(|&(j, c)| (j, rat(c))).collect(), rat(r))
        };
        let sol = solve_sparse(vec![eq(&[(0, 1), (1, 1)], 3), eq(&[(0, 1), (1, -1)], 1)], 3).unwrap();
        assert_eq!(sol, vec![rat(2), rat(1), rat(0)]);
        assert!(solve_sparse(vec![eq(&[(0, 1)], 1), eq(&[(0, 2)], 3)], 1).is_none());
    }

    #[test]
    fn poly_evaluation() {
        let a = m(&[&[1, 1], &[0, 1]]);
        let p = Poly::from_ints(&[1, -2, 1]);
        assert!(a.eval_poly(&p).unwrap().is_zero());
    }
}
