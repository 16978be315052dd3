//! Normal bundle of a section and its splitting type.
//!
//! Along a section the fibre displacements `(u1, u2)` glue by
//! `u1' = z^-n u1`, `u2' = z^(n+2) (u2 + beta(z) u1)` with
//! `beta = d^2B/domega^2(z, omega_1(z))`. The number of global sections is
//! counted directly from this cocycle (polynomial `s1` of degree `<= n`,
//! polynomial `s2` of degree `<= D`, no positive powers of `z` after
//! gluing), which does not touch the superpotential at all. For a rank-2
//! bundle `O(a) + O(b)` with `a + b = -2` that count is `a + 1` (or `0`
//! when `a = -1`) and determines the splitting.

use crate::critical::CriticalPoint;
use crate::error::Result;
use crate::laurent::LaurentPoly;
use crate::linalg::RankInfo;
use crate::potential::GeometricPotential;
use crate::scalar::{Coeff, Mode};
use crate::sections::reconstruct;
use crate::superpotential::build_combinatorial;

/// `M(z) = [[z^-n, 0], [z^(n+2) beta(z), z^(n+2)]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<C: Coeff> {
    pub n: u32,
    pub beta: LaurentPoly<C>,
}

impl<C: Coeff> TransitionMatrix<C> {
    pub fn diagonal(n: u32) -> Self {
        Self {
            n,
            beta: LaurentPoly::zero(),
        }
    }

    /// Entries `[[m00, m01], [m10, m11]]` as Laurent polynomials in `z`.
    pub fn entries(&self) -> [[LaurentPoly<C>; 2]; 2] {
        let n = i64::from(self.n);
        let z_n2 = LaurentPoly::monomial(C::one(), n + 2);
        [
            [LaurentPoly::monomial(C::one(), -n), LaurentPoly::zero()],
            [&z_n2 * &self.beta, z_n2],
        ]
    }

    pub fn determinant(&self) -> LaurentPoly<C> {
        let [[a, b], [c, d]] = self.entries();
        &(&a * &d) - &(&b * &c)
    }

    /// Smallest `s2` degree bound that can absorb every nonnegative power of
    /// `beta * s1`.
    pub fn default_s2_bound(&self) -> u32 {
        let top = self.beta.max_exp().unwrap_or(-1).max(0);
        self.n + u32::try_from(top).expect("nonnegative")
    }
}

/// `(a, b)` with `a >= b` for `O(a) + O(b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct SplittingType {
    pub a: i64,
    pub b: i64,
}

impl SplittingType {
    /// `O(r-1) + O(-r-1)`.
    pub fn from_corank(r: usize) -> Self {
        let r = r as i64;
        Self {
            a: r - 1,
            b: -r - 1,
        }
    }

    pub fn degree(&self) -> i64 {
        self.a + self.b
    }
}

impl std::fmt::Display for SplittingType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "O({})+O({})", self.a, self.b)
    }
}

/// The rank-2 bundle of degree -2 with `h0` independent global sections.
pub fn splitting_from_h0(h0: usize) -> SplittingType {
    if h0 == 0 {
        SplittingType { a: -1, b: -1 }
    } else {
        SplittingType::from_corank(h0)
    }
}

pub fn normal_transition<C: Coeff>(
    p: &GeometricPotential<C>,
    x: &[C],
) -> Result<TransitionMatrix<C>> {
    reconstruct(p, x)?;
    Ok(TransitionMatrix {
        n: p.n(),
        beta: p.eval_along_section(x, 2)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct H0Result {
    pub h0: usize,
    pub s2_bound: u32,
    pub rank: RankInfo,
}

/// Global sections with the default `s2` degree bound.
pub fn h0_oracle<C: Coeff>(m: &TransitionMatrix<C>) -> H0Result {
    h0_with_bound(m, m.default_s2_bound())
}

/// Kernel dimension of the linear conditions "`z^(n+2)(s2 + beta s1)` has
/// no positive power of `z`" on `s1 = sum a_i z^i` (`i <= n`) and
/// `s2 = sum b_j z^j` (`j <= bound`).
pub fn h0_with_bound<C: Coeff>(m: &TransitionMatrix<C>, bound: u32) -> H0Result {
    let n = i64::from(m.n);
    let n_a = m.n as usize + 1;
    let n_b = bound as usize + 1;
    // Column images: z^(n+2+i) beta for a_i, z^(n+2+j) for b_j.
    let mut columns: Vec<LaurentPoly<C>> =
        (0..n_a as i64).map(|i| m.beta.shift(n + 2 + i)).collect();
    columns.extend((0..n_b as i64).map(|j| LaurentPoly::monomial(C::one(), n + 2 + j)));
    let top = columns
        .iter()
        .filter_map(LaurentPoly::max_exp)
        .max()
        .unwrap_or(0);
    let rows: Vec<Vec<C>> = (1..=top)
        .map(|e| columns.iter().map(|col| col.coeff(e)).collect())
        .collect();
    let unknowns = n_a + n_b;
    let rank = C::rank(&rows, unknowns);
    H0Result {
        h0: unknowns - rank.rank,
        s2_bound: bound,
        rank,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BundleAnalysis<C: Coeff> {
    pub point: CriticalPoint<C>,
    pub hessian_corank: usize,
    pub predicted: SplittingType,
    pub oracle_h0: usize,
    pub verified: SplittingType,
    pub agrees: bool,
    /// FLOAT only: a rank decision sat near the singular-value threshold.
    pub near_threshold: bool,
}

/// Corank of the Hessian of `W` at `x` against the splitting obtained from
/// the normal-bundle cocycle.
pub fn ferrari_check<C: Coeff>(p: &GeometricPotential<C>, x: &[C]) -> Result<BundleAnalysis<C>> {
    let w = build_combinatorial(p)?;
    let transition = normal_transition(p, x)?;
    let hessian = w.hessian(x)?;
    let hess_rank = hessian.rank();
    let r = hessian.dim() - hess_rank.rank;
    let oracle = h0_oracle(&transition);
    let predicted = SplittingType::from_corank(r);
    let verified = splitting_from_h0(oracle.h0);
    let tol = match C::MODE {
        Mode::Exact => 0.0,
        Mode::Float => f64::INFINITY,
    };
    let point = CriticalPoint::verify(&w, x.to_vec(), tol)?
        .expect("gluing succeeded, so the gradient vanishes");
    Ok(BundleAnalysis {
        point,
        hessian_corank: r,
        predicted,
        oracle_h0: oracle.h0,
        verified,
        agrees: predicted == verified,
        near_threshold: hess_rank.near_threshold || oracle.rank.near_threshold,
    })
}
