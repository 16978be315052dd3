//! The geometric potential `B(z, omega) = sum t_d^(k) z^(-k-1) omega^d`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, OmegaPoly};
use crate::scalar::{prune, Coeff, Complex, Rational};

/// Deformation data over `O(n) + O(-n-2)`, keyed by `(d, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricPotential<C: Coeff> {
    n: u32,
    terms: BTreeMap<(u32, i64), C>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Chart {
    U0,
    U1,
}

/// One out-of-window term removed by a holomorphic change of fibre coordinates.
///
/// On `U0` (`k < 0`) the shift is `w2 -> w2 + d z^l w1^(d-1)` with `l = -k-1`;
/// on `U1` (`k > dn`) it is `w2' -> w2' - z'^m w1'^(d-1)` with `m = k-dn-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorbedTerm<C: Coeff> {
    pub chart: Chart,
    pub d: u32,
    pub exponent: i64,
    pub coefficient: C,
    pub k: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateChangeLog<C: Coeff> {
    pub entries: Vec<AbsorbedTerm<C>>,
}

impl<C: Coeff> Default for CoordinateChangeLog<C> {
    fn default() -> Self {
        Self {
            entries: Vec::new(),
        }
    }
}

impl<C: Coeff> CoordinateChangeLog<C> {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<C: Coeff> GeometricPotential<C> {
    /// The zero potential `B = 0`, i.e. the undeformed bundle.
    pub fn zero(n: u32) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a potential; duplicate `(d, k)` keys are summed. `d = 0`
    /// terms are rejected since they never enter the transition functions.
    pub fn new<I: IntoIterator<Item = (u32, i64, C)>>(n: u32, terms: I) -> Result<Self> {
        let mut p = Self::zero(n);
        for (d, k, t) in terms {
            p.add_term(d, k, t)?;
        }
        Ok(p)
    }

    pub fn add_term(&mut self, d: u32, k: i64, t: C) -> Result<()> {
        if d == 0 {
            return Err(Error::Input(format!(
                "degree d must be >= 1 (got d = 0, k = {k})"
            )));
        }
        let slot = self.terms.entry((d, k)).or_insert_with(C::zero);
        *slot = slot.clone() + t;
        prune(&mut self.terms);
        Ok(())
    }

    /// Replaces (or removes, when `t` is zero) the coefficient at `(d, k)`.
    pub fn set_term(&mut self, d: u32, k: i64, t: C) -> Result<()> {
        self.terms.remove(&(d, k));
        self.add_term(d, k, t)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, i64, &C)> + '_ {
        self.terms.iter().map(|(&(d, k), t)| (d, k, t))
    }

    pub fn coeff(&self, d: u32, k: i64) -> C {
        self.terms.get(&(d, k)).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|&(d, _)| d).max().unwrap_or(0)
    }

    fn window_upper(&self, d: u32) -> i64 {
        i64::from(d) * i64::from(self.n)
    }

    fn in_window(&self, d: u32, k: i64) -> bool {
        (0..=self.window_upper(d)).contains(&k)
    }

    pub fn is_normalized(&self) -> bool {
        self.terms.keys().all(|&(d, k)| self.in_window(d, k))
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        match self.terms.keys().find(|&&(d, k)| !self.in_window(d, k)) {
            None => Ok(()),
            Some(&(d, k)) => Err(Error::NotNormalized {
                d,
                k,
                bound: self.window_upper(d),
            }),
        }
    }

    /// Drops every term outside `0 <= k <= dn`, recording the coordinate
    /// change that absorbs it. Terms are absorbed independently.
    pub fn normalize(&self) -> (Self, CoordinateChangeLog<C>) {
        let mut kept = BTreeMap::new();
        let mut log = CoordinateChangeLog::default();
        for (&(d, k), t) in &self.terms {
            if self.in_window(d, k) {
                kept.insert((d, k), t.clone());
                continue;
            }
            let (chart, exponent) = if k < 0 {
                (Chart::U0, -k - 1)
            } else {
                (Chart::U1, k - self.window_upper(d) - 1)
            };
            log.entries.push(AbsorbedTerm {
                chart,
                d,
                exponent,
                coefficient: t.clone(),
                k,
            });
        }
        (
            Self {
                n: self.n,
                terms: kept,
            },
            log,
        )
    }

    /// `B` as a polynomial in `omega` with Laurent coefficients in `z`.
    pub fn as_omega_poly(&self) -> OmegaPoly<C> {
        OmegaPoly::from_terms(
            self.terms
                .iter()
                .map(|(&(d, k), t)| (i64::from(d), LaurentPoly::monomial(t.clone(), -k - 1))),
        )
    }

    /// `d^order B / d omega^order` evaluated along `omega_1(z) = sum x_i z^i`.
    pub fn eval_along_section(&self, x: &[C], order: u32) -> Result<LaurentPoly<C>> {
        self.check_point(x)?;
        self.ensure_normalized()?;
        let mut slice = self.as_omega_poly();
        for _ in 0..order {
            slice = slice.derivative();
        }
        slice.substitute(&LaurentPoly::from_dense(x))
    }

    pub fn check_point(&self, x: &[C]) -> Result<()> {
        let expected = self.n as usize + 1;
        if x.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> GeometricPotential<D> {
        let mut terms: BTreeMap<(u32, i64), D> =
            self.terms.iter().map(|(&key, t)| (key, f(t))).collect();
        prune(&mut terms);
        GeometricPotential { n: self.n, terms }
    }
}

impl GeometricPotential<Rational> {
    pub fn to_float(&self) -> GeometricPotential<Complex> {
        self.map_coeffs(Coeff::to_complex)
    }
}
