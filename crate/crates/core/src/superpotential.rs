//! The superpotential `W(x_0, ..., x_n)`, the residue of `B(z, omega_1(z))`.
//!
//! Two constructions are provided. [`build_combinatorial`] sums the blocks
//! `W_d^(k)` (ordered index tuples of length `d` adding up to `k`) counted
//! through multinomial coefficients. [`build_residue`] walks every ordered
//! tuple, tracks the resulting power of `z`, and keeps the `z^-1` ones.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::potential::GeometricPotential;
use crate::scalar::{prune, Coeff, Complex, Rational};

/// Exponent vector over `x_0, ..., x_n`.
pub type MultiIndex = Vec<u32>;

#[derive(Debug, Clone, PartialEq)]
pub struct Superpotential<C: Coeff> {
    n: u32,
    monomials: BTreeMap<MultiIndex, C>,
}

impl<C: Coeff> Superpotential<C> {
    pub fn zero(n: u32) -> Self {
        Self {
            n,
            monomials: BTreeMap::new(),
        }
    }

    /// Builds from `(multi-index, coefficient)` pairs; repeats are summed.
    pub fn from_terms<I: IntoIterator<Item = (MultiIndex, C)>>(n: u32, terms: I) -> Result<Self> {
        let mut monomials: BTreeMap<MultiIndex, C> = BTreeMap::new();
        for (alpha, c) in terms {
            if alpha.len() != n as usize + 1 {
                return Err(Error::DimensionMismatch {
                    expected: n as usize + 1,
                    got: alpha.len(),
                });
            }
            let slot = monomials.entry(alpha).or_insert_with(C::zero);
            *slot = slot.clone() + c;
        }
        prune(&mut monomials);
        Ok(Self { n, monomials })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n as usize + 1
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = (&MultiIndex, &C)> + '_ {
        self.monomials.iter()
    }

    pub fn coeff(&self, alpha: &[u32]) -> C {
        self.monomials.get(alpha).cloned().unwrap_or_else(C::zero)
    }

    /// Largest total degree among the monomials (0 for `W = 0`).
    pub fn degree(&self) -> u32 {
        self.monomials
            .keys()
            .map(|a| a.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Whether every monomial has total degree exactly 2 (true for `W = 0`).
    pub fn is_quadratic_form(&self) -> bool {
        self.monomials.keys().all(|a| a.iter().sum::<u32>() == 2)
    }

    /// Sum of `i * alpha_i`: the power of `z` a monomial carries.
    pub fn z_weight(alpha: &[u32]) -> u64 {
        alpha
            .iter()
            .enumerate()
            .map(|(i, &a)| i as u64 * u64::from(a))
            .sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut monomials = self.monomials.clone();
        for (a, c) in &other.monomials {
            let slot = monomials.entry(a.clone()).or_insert_with(C::zero);
            *slot = slot.clone() + c.clone();
        }
        prune(&mut monomials);
        Self {
            n: self.n,
            monomials,
        }
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut monomials: BTreeMap<MultiIndex, C> = self
            .monomials
            .iter()
            .map(|(a, c)| (a.clone(), c.clone() * s.clone()))
            .collect();
        prune(&mut monomials);
        Self {
            n: self.n,
            monomials,
        }
    }

    /// Symbolic `dW/dx_j`.
    pub fn derivative(&self, j: usize) -> Self {
        let mut monomials: BTreeMap<MultiIndex, C> = BTreeMap::new();
        for (alpha, c) in &self.monomials {
            let power = alpha[j];
            if power == 0 {
                continue;
            }
            let mut beta = alpha.clone();
            beta[j] -= 1;
            let slot = monomials.entry(beta).or_insert_with(C::zero);
            *slot = slot.clone() + c.clone() * C::from_int(i64::from(power));
        }
        prune(&mut monomials);
        Self {
            n: self.n,
            monomials,
        }
    }

    fn check_point(&self, x: &[C]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[C]) -> Result<C> {
        self.check_point(x)?;
        Ok(self.monomials.iter().fold(C::zero(), |acc, (alpha, c)| {
            let mut term = c.clone();
            for (xi, &a) in x.iter().zip(alpha) {
                for _ in 0..a {
                    term = term * xi.clone();
                }
            }
            acc + term
        }))
    }

    pub fn gradient(&self, x: &[C]) -> Result<Vec<C>> {
        self.check_point(x)?;
        (0..self.dim())
            .map(|j| self.derivative(j).evaluate(x))
            .collect()
    }

    #[allow(clippy::needless_range_loop)]
    pub fn hessian(&self, x: &[C]) -> Result<HessianMatrix<C>> {
        self.check_point(x)?;
        let dim = self.dim();
        let firsts: Vec<Self> = (0..dim).map(|i| self.derivative(i)).collect();
        let mut entries = vec![vec![C::zero(); dim]; dim];
        for i in 0..dim {
            for j in i..dim {
                let v = firsts[i].derivative(j).evaluate(x)?;
                entries[j][i] = v.clone();
                entries[i][j] = v;
            }
        }
        Ok(HessianMatrix { entries })
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Superpotential<D> {
        let mut monomials: BTreeMap<MultiIndex, D> = self
            .monomials
            .iter()
            .map(|(a, c)| (a.clone(), f(c)))
            .collect();
        prune(&mut monomials);
        Superpotential {
            n: self.n,
            monomials,
        }
    }
}

impl Superpotential<Rational> {
    pub fn to_float(&self) -> Superpotential<Complex> {
        self.map_coeffs(Coeff::to_complex)
    }
}

/// Symmetric matrix of second partials `d^2 W / dx_i dx_j` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianMatrix<C: Coeff> {
    entries: Vec<Vec<C>>,
}

impl<C: Coeff> HessianMatrix<C> {
    pub fn from_rows(entries: Vec<Vec<C>>) -> Self {
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn rows(&self) -> &[Vec<C>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &C {
        &self.entries[i][j]
    }

    pub fn is_symmetric(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    pub fn rank(&self) -> crate::linalg::RankInfo {
        C::rank(&self.entries, self.dim())
    }

    /// `(n + 1) - rank`.
    pub fn corank(&self) -> usize {
        self.dim() - self.rank().rank
    }

    pub fn kernel(&self) -> Vec<Vec<C>> {
        C::kernel(&self.entries, self.dim())
    }
}

fn factorial(m: u32) -> BigInt {
    (1..=m).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Calls `visit` for every `alpha` in `N^(n+1)` with `|alpha| = d` and
/// `sum i * alpha_i = k`.
fn for_each_weighted_composition(n: u32, d: u32, k: i64, visit: &mut impl FnMut(&[u32])) {
    fn rec(
        i: usize,
        dim: usize,
        left_deg: u32,
        left_weight: i64,
        alpha: &mut Vec<u32>,
        visit: &mut impl FnMut(&[u32]),
    ) {
        if i + 1 == dim {
            if left_weight == i as i64 * i64::from(left_deg) {
                alpha.push(left_deg);
                visit(alpha);
                alpha.pop();
            }
            return;
        }
        for a in 0..=left_deg {
            let w = i as i64 * i64::from(a);
            if w > left_weight {
                break;
            }
            alpha.push(a);
            rec(i + 1, dim, left_deg - a, left_weight - w, alpha, visit);
            alpha.pop();
        }
    }
    if k < 0 {
        return;
    }
    let mut alpha = Vec::with_capacity(n as usize + 1);
    rec(0, n as usize + 1, d, k, &mut alpha, visit);
}

/// `W_d^(k)`: sum over ordered tuples `(i_1..i_d)` in `{0..n}^d` adding to `k`
/// of `x_{i_1} ... x_{i_d}`. `W_0^(0) = 1`; out-of-range `k` gives zero.
pub fn w_block<C: Coeff>(n: u32, d: u32, k: i64) -> Superpotential<C> {
    let mut terms = Vec::new();
    let d_fact = factorial(d);
    for_each_weighted_composition(n, d, k, &mut |alpha| {
        let denom = alpha
            .iter()
            .fold(BigInt::one(), |acc, &a| acc * factorial(a));
        terms.push((alpha.to_vec(), C::from_bigint(&(&d_fact / denom))));
    });
    Superpotential::from_terms(n, terms).expect("multi-index length matches n")
}

/// `W = sum t_d^(k) W_d^(k)`.
pub fn build_combinatorial<C: Coeff>(p: &GeometricPotential<C>) -> Result<Superpotential<C>> {
    p.ensure_normalized()?;
    Ok(p.terms()
        .fold(Superpotential::zero(p.n()), |acc, (d, k, t)| {
            acc.add(&w_block::<C>(p.n(), d, k).scale(t))
        }))
}

/// Residue of `B(z, sum x_i z^i)` with the `x_i` kept formal: expands each
/// term over ordered index tuples and keeps those landing on `z^-1`.
pub fn build_residue<C: Coeff>(p: &GeometricPotential<C>) -> Result<Superpotential<C>> {
    p.ensure_normalized()?;
    let n = p.n();
    let dim = n as usize + 1;
    let mut terms = Vec::new();
    for (d, k, t) in p.terms() {
        let mut tuple = vec![0u32; d as usize];
        loop {
            let z_power = tuple.iter().map(|&i| i64::from(i)).sum::<i64>() - k - 1;
            if z_power == -1 {
                let mut alpha = vec![0u32; dim];
                for &i in &tuple {
                    alpha[i as usize] += 1;
                }
                terms.push((alpha, t.clone()));
            }
            // odometer over {0..n}^d
            let Some(pos) = tuple.iter().position(|&i| i < n) else {
                break;
            };
            tuple[pos] += 1;
            for slot in &mut tuple[..pos] {
                *slot = 0;
            }
        }
    }
    Superpotential::from_terms(n, terms)
}

/// `dW_d^(k)/dx_j = d * W_(d-1)^(k-j)`, returned as `(d, d - 1, k - j)`.
pub fn reduce_derivative(d: u32, k: i64, j: u32) -> (u32, u32, i64) {
    (d, d - 1, k - i64::from(j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> Rational {
        Rational::from_int(v)
    }

    fn pot(n: u32, terms: &[(u32, i64, i64)]) -> GeometricPotential<Rational> {
        GeometricPotential::new(n, terms.iter().map(|&(d, k, t)| (d, k, q(t)))).unwrap()
    }

    fn w(n: u32, terms: &[(&[u32], i64)]) -> Superpotential<Rational> {
        Superpotential::from_terms(n, terms.iter().map(|(a, c)| (a.to_vec(), q(*c)))).unwrap()
    }

    #[test]
    fn combinatorial_examples() {
        assert_eq!(
            build_combinatorial(&pot(1, &[(2, 1, 1)])).unwrap(),
            w(1, &[(&[1, 1], 2)])
        );
        assert_eq!(
            build_combinatorial(&pot(2, &[(2, 2, 1)])).unwrap(),
            w(2, &[(&[0, 2, 0], 1), (&[1, 0, 1], 2)])
        );
        assert!(build_combinatorial(&pot(3, &[])).unwrap().is_zero());
    }

    #[test]
    fn residue_examples() {
        assert_eq!(
            build_residue(&pot(1, &[(2, 1, 1)])).unwrap(),
            w(1, &[(&[1, 1], 2)])
        );
        assert_eq!(
            build_residue(&pot(0, &[(3, 0, 7)])).unwrap(),
            w(0, &[(&[3], 7)])
        );
        assert!(build_residue(&pot(2, &[])).unwrap().is_zero());
    }

    #[test]
    fn builders_reject_unnormalized() {
        let raw = pot(1, &[(1, -1, 1)]);
        assert!(matches!(
            build_combinatorial(&raw),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            build_residue(&raw),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn block_base_cases() {
        assert_eq!(w_block::<Rational>(2, 0, 0), w(2, &[(&[0, 0, 0], 1)]));
        assert!(w_block::<Rational>(2, 0, 1).is_zero());
        assert!(w_block::<Rational>(2, 2, -1).is_zero());
        assert!(w_block::<Rational>(1, 2, 3).is_zero());
    }

    #[test]
    fn reduce_derivative_examples() {
        assert_eq!(reduce_derivative(2, 1, 0), (2, 1, 1));
        let dw = w_block::<Rational>(1, 2, 1).derivative(0);
        assert_eq!(dw, w_block::<Rational>(1, 1, 1).scale(&q(2)));
        assert_eq!(reduce_derivative(1, 0, 0), (1, 0, 0));
        assert_eq!(w_block::<Rational>(1, 1, 0).derivative(0), w_block(1, 0, 0));
    }

    #[test]
    fn gradient_examples() {
        let w2 = w(1, &[(&[1, 1], 2)]);
        assert_eq!(w2.gradient(&[q(1), q(3)]).unwrap(), vec![q(6), q(2)]);
        assert_eq!(
            Superpotential::<Rational>::zero(1)
                .gradient(&[q(4), q(5)])
                .unwrap(),
            vec![q(0), q(0)]
        );
        let sq = w(1, &[(&[2, 0], 1)]);
        for c in [-3, 0, 11] {
            assert_eq!(sq.gradient(&[q(0), q(c)]).unwrap(), vec![q(0), q(0)]);
        }
        assert!(matches!(
            w2.gradient(&[q(1)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hessian_and_corank_examples() {
        let h = w(1, &[(&[1, 1], 2)]).hessian(&[q(5), q(-2)]).unwrap();
        assert_eq!(h.rows(), &[vec![q(0), q(2)], vec![q(2), q(0)]]);
        assert_eq!(h.corank(), 0);
        let h = w(1, &[(&[2, 0], 1)]).hessian(&[q(1), q(1)]).unwrap();
        assert_eq!(h.rows(), &[vec![q(2), q(0)], vec![q(0), q(0)]]);
        assert_eq!(h.corank(), 1);
        let h = Superpotential::<Rational>::zero(2)
            .hessian(&[q(0), q(0), q(0)])
            .unwrap();
        assert_eq!(h.corank(), 3);
    }

    #[test]
    fn stratified_cubic_hessian() {
        // {(3,1): 1, (2,0): 1} at n = 1: W = 3 x0^2 x1 + x0^2.
        let wp = build_combinatorial(&pot(1, &[(3, 1, 1), (2, 0, 1)])).unwrap();
        assert_eq!(wp, w(1, &[(&[2, 1], 3), (&[2, 0], 1)]));
        for c in [q(1), q(-1), q(2), Rational::new((-1).into(), 3.into())] {
            let h = wp.hessian(&[q(0), c.clone()]).unwrap();
            let expected = q(6) * c.clone() + q(2);
            assert_eq!(h.rows(), &[vec![expected, q(0)], vec![q(0), q(0)]]);
        }
    }

    #[test]
    fn homogeneity_in_z_weight() {
        let p = pot(2, &[(3, 4, 2), (2, 1, -1), (4, 6, 5)]);
        let wp = build_combinatorial(&p).unwrap();
        for (alpha, _) in wp.monomials() {
            let deg: u32 = alpha.iter().sum();
            let k = p.terms().find(|&(d, _, _)| d == deg).unwrap().1;
            assert_eq!(Superpotential::<Rational>::z_weight(alpha) as i64, k);
        }
    }
}
