//! Finitely supported Laurent polynomials in one variable.
//!
//! The ambient variable is `z` on the overlap of the two standard charts of
//! the projective line. All contour integrals in this crate reduce to
//! coefficient extraction on these objects: the residue is the `z^-1`
//! coefficient, and a Cauchy kernel `1/(u - z)` around `0` and `z` keeps the
//! nonnegative part.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{prune, Coeff};

#[derive(Clone, PartialEq)]
pub struct LaurentPoly<C: Coeff> {
    coeffs: BTreeMap<i64, C>,
}

impl<C: Coeff> Default for LaurentPoly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> LaurentPoly<C> {
    pub fn zero() -> Self {
        Self {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(c, 0)
    }

    /// `c * z^exp`.
    pub fn monomial(c: C, exp: i64) -> Self {
        Self::from_terms([(exp, c)])
    }

    /// Builds from `(exponent, coefficient)` pairs; repeated exponents are summed.
    pub fn from_terms<I: IntoIterator<Item = (i64, C)>>(terms: I) -> Self {
        let mut coeffs: BTreeMap<i64, C> = BTreeMap::new();
        for (e, c) in terms {
            let slot = coeffs.entry(e).or_insert_with(C::zero);
            *slot = slot.clone() + c;
        }
        Self::from_map(coeffs)
    }

    fn from_map(mut coeffs: BTreeMap<i64, C>) -> Self {
        prune(&mut coeffs);
        Self { coeffs }
    }

    /// Polynomial `sum_i xs[i] z^i`.
    pub fn from_dense(xs: &[C]) -> Self {
        Self::from_terms(xs.iter().cloned().enumerate().map(|(i, c)| (i as i64, c)))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `z^exp`; zero when absent.
    pub fn coeff(&self, exp: i64) -> C {
        self.coeffs.get(&exp).cloned().unwrap_or_else(C::zero)
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> + '_ {
        self.coeffs.iter().map(|(&e, c)| (e, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest coefficient magnitude (0 for the zero polynomial).
    pub fn max_magnitude(&self) -> f64 {
        self.coeffs
            .values()
            .map(Coeff::magnitude)
            .fold(0.0, f64::max)
    }

    /// The coefficient of `z^-1`.
    pub fn residue(&self) -> C {
        self.coeff(-1)
    }

    /// `(principal, holomorphic)`: exponents `< 0` and `>= 0`.
    pub fn split_parts(&self) -> (Self, Self) {
        let (mut principal, mut holomorphic) = (BTreeMap::new(), BTreeMap::new());
        for (&e, c) in &self.coeffs {
            if e < 0 {
                principal.insert(e, c.clone());
            } else {
                holomorphic.insert(e, c.clone());
            }
        }
        (
            Self { coeffs: principal },
            Self {
                coeffs: holomorphic,
            },
        )
    }

    /// Terms with `lo <= exponent <= hi`.
    pub fn restrict(&self, lo: i64, hi: i64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .range(lo..=hi)
                .map(|(&e, c)| (e, c.clone()))
                .collect(),
        }
    }

    /// Rewrites a function of `z` as a function of `z' = 1/z`.
    pub fn invert_chart(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&e, c)| (-e, c.clone())).collect(),
        }
    }

    /// Multiplication by `z^shift`.
    pub fn checked_shift(&self, shift: i64) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (&e, c) in &self.coeffs {
            let e = e.checked_add(shift).ok_or(Error::ExponentOverflow)?;
            coeffs.insert(e, c.clone());
        }
        Ok(Self { coeffs })
    }

    pub fn shift(&self, shift: i64) -> Self {
        self.checked_shift(shift)
            .expect("Laurent exponent overflow")
    }

    pub fn scale(&self, s: &C) -> Self {
        Self::from_map(
            self.coeffs
                .iter()
                .map(|(&e, c)| (e, c.clone() * s.clone()))
                .collect(),
        )
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let mut out: BTreeMap<i64, C> = BTreeMap::new();
        for (&ea, ca) in &self.coeffs {
            for (&eb, cb) in &other.coeffs {
                let e = ea.checked_add(eb).ok_or(Error::ExponentOverflow)?;
                let slot = out.entry(e).or_insert_with(C::zero);
                *slot = slot.clone() + ca.clone() * cb.clone();
            }
        }
        Ok(Self::from_map(out))
    }

    pub fn pow(&self, d: u32) -> Self {
        let mut acc = Self::constant(C::one());
        for _ in 0..d {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluates at a nonzero point.
    pub fn eval(&self, z: &C) -> C {
        let inv = C::one() / z.clone();
        self.coeffs.iter().fold(C::zero(), |acc, (&e, c)| {
            let base = if e < 0 { inv.clone() } else { z.clone() };
            let mut p = C::one();
            for _ in 0..e.unsigned_abs() {
                p = p * base.clone();
            }
            acc + c.clone() * p
        })
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> LaurentPoly<D> {
        LaurentPoly::from_terms(self.coeffs.iter().map(|(&e, c)| (e, f(c))))
    }
}

impl<C: Coeff> Add for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;

    fn add(self, rhs: Self) -> LaurentPoly<C> {
        let mut out = self.coeffs.clone();
        for (&e, c) in &rhs.coeffs {
            let slot = out.entry(e).or_insert_with(C::zero);
            *slot = slot.clone() + c.clone();
        }
        LaurentPoly::from_map(out)
    }
}

impl<C: Coeff> Sub for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;

    fn sub(self, rhs: Self) -> LaurentPoly<C> {
        self + &(-rhs)
    }
}

impl<C: Coeff> Neg for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;

    fn neg(self) -> LaurentPoly<C> {
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(&e, c)| (e, -c.clone())).collect(),
        }
    }
}

impl<C: Coeff> Mul for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;

    fn mul(self, rhs: Self) -> LaurentPoly<C> {
        self.checked_mul(rhs).expect("Laurent exponent overflow")
    }
}

impl<C: Coeff> fmt::Display for LaurentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match e {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})z")?,
                _ => write!(f, "({c})z^{e}")?,
            }
        }
        Ok(())
    }
}

impl<C: Coeff> fmt::Debug for LaurentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly[{self}]")
    }
}

/// A polynomial in `omega` whose coefficients are Laurent polynomials in `z`,
/// i.e. one slice `B(z, omega)` of a potential.
#[derive(Clone, PartialEq, Debug)]
pub struct OmegaPoly<C: Coeff> {
    by_power: BTreeMap<i64, LaurentPoly<C>>,
}

impl<C: Coeff> Default for OmegaPoly<C> {
    fn default() -> Self {
        Self {
            by_power: BTreeMap::new(),
        }
    }
}

impl<C: Coeff> OmegaPoly<C> {
    /// Builds `sum coefficient(z) * omega^power`; repeated powers are summed.
    pub fn from_terms<I: IntoIterator<Item = (i64, LaurentPoly<C>)>>(terms: I) -> Self {
        let mut by_power: BTreeMap<i64, LaurentPoly<C>> = BTreeMap::new();
        for (p, c) in terms {
            let slot = by_power.entry(p).or_default();
            *slot = &*slot + &c;
        }
        by_power.retain(|_, c| !c.is_zero());
        Self { by_power }
    }

    pub fn coeff(&self, power: i64) -> LaurentPoly<C> {
        self.by_power.get(&power).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &LaurentPoly<C>)> + '_ {
        self.by_power.iter().map(|(&p, c)| (p, c))
    }

    /// Formal derivative in `omega`.
    pub fn derivative(&self) -> Self {
        Self::from_terms(
            self.by_power
                .iter()
                .filter(|(&p, _)| p != 0)
                .map(|(&p, c)| (p - 1, c.scale(&C::from_int(p)))),
        )
    }

    /// Replaces every `omega^d` by `arg^d` and sums.
    pub fn substitute(&self, arg: &LaurentPoly<C>) -> Result<LaurentPoly<C>> {
        if let Some((&p, _)) = self.by_power.iter().find(|(&p, _)| p < 0) {
            return Err(Error::NegativeOmegaExponent(p));
        }
        let mut out = LaurentPoly::zero();
        let mut power = LaurentPoly::constant(C::one());
        let mut current = 0;
        for (&p, c) in &self.by_power {
            while current < p {
                power = power.checked_mul(arg)?;
                current += 1;
            }
            out = &out + &c.checked_mul(&power)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use proptest::prelude::*;

    type L = LaurentPoly<Rational>;

    fn q(v: i64) -> Rational {
        Rational::from_int(v)
    }

    fn lp(terms: &[(i64, i64)]) -> L {
        L::from_terms(terms.iter().map(|&(e, c)| (e, q(c))))
    }

    #[test]
    fn add_examples() {
        assert_eq!(&lp(&[(-1, 1), (0, 1)]) + &lp(&[(-1, -1)]), lp(&[(0, 1)]));
        assert_eq!(&L::zero() + &lp(&[(2, 3)]), lp(&[(2, 3)]));
        assert_eq!(
            &lp(&[(-2, 1), (1, 1)]) + &lp(&[(-2, 1), (1, -1)]),
            lp(&[(-2, 2)])
        );
    }

    #[test]
    fn mul_examples() {
        assert_eq!(
            &lp(&[(-1, 1), (0, 1)]) * &lp(&[(1, 1), (0, -1)]),
            lp(&[(1, 1), (-1, -1)])
        );
        assert!((&lp(&[(3, 5), (-4, 1)]) * &L::zero()).is_zero());
        assert_eq!(&lp(&[(-2, 1)]) * &lp(&[(2, 1)]), lp(&[(0, 1)]));
    }

    #[test]
    fn residue_examples() {
        assert_eq!(lp(&[(-1, 3), (0, 2), (1, 1)]).residue(), q(3));
        assert_eq!(lp(&[(-2, 1)]).residue(), q(0));
        assert_eq!(lp(&[(0, 5)]).residue(), q(0));
    }

    #[test]
    fn split_examples() {
        assert_eq!(
            lp(&[(-2, 2), (0, 5), (1, 1)]).split_parts(),
            (lp(&[(-2, 2)]), lp(&[(0, 5), (1, 1)]))
        );
        assert_eq!(lp(&[(-1, 1)]).split_parts(), (lp(&[(-1, 1)]), L::zero()));
        assert_eq!(L::zero().split_parts(), (L::zero(), L::zero()));
    }

    #[test]
    fn invert_chart_examples() {
        assert_eq!(
            lp(&[(2, 1), (-1, 1)]).invert_chart(),
            lp(&[(-2, 1), (1, 1)])
        );
        assert_eq!(lp(&[(0, 7)]).invert_chart(), lp(&[(0, 7)]));
    }

    #[test]
    fn substitute_examples() {
        // z^-2 omega with omega = 1 + 2z
        let body = OmegaPoly::from_terms([(1, lp(&[(-2, 1)]))]);
        assert_eq!(
            body.substitute(&lp(&[(0, 1), (1, 2)])).unwrap(),
            lp(&[(-2, 1), (-1, 2)])
        );
        // omega^2 with omega = z
        let body = OmegaPoly::from_terms([(2, lp(&[(0, 1)]))]);
        assert_eq!(body.substitute(&lp(&[(1, 1)])).unwrap(), lp(&[(2, 1)]));
        // z^-2 omega^2 with omega = 1 + z: (1+z)^2 = 1 + 2z + z^2 by hand
        let body = OmegaPoly::from_terms([(2, lp(&[(-2, 1)]))]);
        assert_eq!(
            body.substitute(&lp(&[(0, 1), (1, 1)])).unwrap(),
            lp(&[(-2, 1), (-1, 2), (0, 1)])
        );
    }

    #[test]
    fn substitute_rejects_negative_omega_power() {
        let body = OmegaPoly::from_terms([(-1, lp(&[(0, 1)]))]);
        assert_eq!(
            body.substitute(&lp(&[(0, 1)])),
            Err(Error::NegativeOmegaExponent(-1))
        );
    }

    #[test]
    fn exponent_overflow_is_an_error() {
        let a = lp(&[(i64::MAX, 1)]);
        assert_eq!(a.checked_mul(&lp(&[(1, 1)])), Err(Error::ExponentOverflow));
        assert_eq!(a.checked_shift(1), Err(Error::ExponentOverflow));
    }

    #[test]
    fn absent_exponent_reads_zero() {
        let a = lp(&[(3, 4)]);
        assert_eq!(a.coeff(2), q(0));
        assert_eq!((a.min_exp(), a.max_exp()), (Some(3), Some(3)));
        assert_eq!((L::zero().min_exp(), L::zero().max_exp()), (None, None));
    }

    fn arb_poly() -> impl Strategy<Value = L> {
        prop::collection::vec((-6i64..6, -5i64..5), 0..6)
            .prop_map(|ts| L::from_terms(ts.into_iter().map(|(e, c)| (e, q(c)))))
    }

    proptest! {
        #[test]
        fn residue_is_additive(a in arb_poly(), b in arb_poly()) {
            prop_assert_eq!((&a + &b).residue(), a.residue() + b.residue());
        }

        #[test]
        fn split_parts_reassemble(a in arb_poly()) {
            let (p, h) = a.split_parts();
            prop_assert!(p.max_exp().is_none_or(|e| e < 0));
            prop_assert!(h.min_exp().is_none_or(|e| e >= 0));
            prop_assert_eq!(&p + &h, a);
        }

        #[test]
        fn invert_chart_is_an_involutive_algebra_map(a in arb_poly(), b in arb_poly()) {
            prop_assert_eq!(a.invert_chart().invert_chart(), a.clone());
            prop_assert_eq!((&a * &b).invert_chart(), &a.invert_chart() * &b.invert_chart());
        }

        #[test]
        fn no_zero_coefficients_stored(a in arb_poly(), b in arb_poly()) {
            let c = &(&a * &b) - &b;
            prop_assert!(c.terms().all(|(_, v)| *v != q(0)));
        }
    }
}
