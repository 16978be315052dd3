//! Critical points of the superpotential, i.e. holomorphic sections.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{Coeff, Complex};
use crate::superpotential::Superpotential;

/// Max-norm distance under which two solver outputs are the same point.
pub const DEDUP_DISTANCE: f64 = 1e-6;
pub const DEFAULT_STARTS: usize = 64;
pub const DEFAULT_START_RADIUS: f64 = 2.0;
pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_NEWTON_STEPS: usize = 200;
const POLISH_STEPS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PointKind {
    Isolated,
    FamilyMember,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint<C: Coeff> {
    pub x: Vec<C>,
    /// Gradient norm at `x`; exactly zero for EXACT points.
    pub residual: f64,
    pub kind: PointKind,
}

impl<C: Coeff> CriticalPoint<C> {
    /// Checks `grad W(x) = 0` exactly (EXACT) or to `tol` (FLOAT) and
    /// classifies the point by the rank of the Hessian there.
    pub fn verify(w: &Superpotential<C>, x: Vec<C>, tol: f64) -> Result<Option<Self>> {
        let g = w.gradient(&x)?;
        let residual = norm(&g);
        let critical = match C::MODE {
            crate::scalar::Mode::Exact => g.iter().all(num_traits::Zero::is_zero),
            crate::scalar::Mode::Float => residual <= tol,
        };
        if !critical {
            return Ok(None);
        }
        let kind = if w.hessian(&x)?.corank() > 0 {
            PointKind::FamilyMember
        } else {
            PointKind::Isolated
        };
        Ok(Some(Self { x, residual, kind }))
    }
}

fn norm<C: Coeff>(v: &[C]) -> f64 {
    v.iter().map(|c| c.magnitude().powi(2)).sum::<f64>().sqrt()
}

/// Solution set of the gradient system.
#[derive(Debug, Clone, PartialEq)]
pub enum CriticalLocus<C: Coeff> {
    /// Quadratic `W`: the critical set is the kernel of the Hessian.
    Subspace {
        basis: Vec<Vec<C>>,
    },
    Points(Vec<CriticalPoint<C>>),
}

impl<C: Coeff> CriticalLocus<C> {
    /// Representative points: the origin and each basis vector for a subspace.
    pub fn sample_points(&self, dim: usize) -> Vec<Vec<C>> {
        match self {
            CriticalLocus::Subspace { basis } => {
                let mut pts = vec![vec![C::zero(); dim]];
                pts.extend(basis.iter().cloned());
                pts
            }
            CriticalLocus::Points(ps) => ps.iter().map(|p| p.x.clone()).collect(),
        }
    }
}

/// Kernel of the (constant) Hessian of a homogeneous quadratic `W`.
pub fn solve_quadratic<C: Coeff>(w: &Superpotential<C>) -> Result<CriticalLocus<C>> {
    if !w.is_quadratic_form() {
        return Err(Error::NotQuadratic);
    }
    let origin = vec![C::zero(); w.dim()];
    let basis = w.hessian(&origin)?.kernel();
    Ok(CriticalLocus::Subspace { basis })
}

/// `(particular, basis)` of an affine solution set.
pub type AffineSolution<C> = (Vec<C>, Vec<Vec<C>>);

/// Critical set of `W` of degree at most 2 (linear terms allowed): an affine
/// subspace `particular + span(basis)`, or `None` when the system is
/// inconsistent.
pub fn solve_affine<C: Coeff>(w: &Superpotential<C>) -> Result<Option<AffineSolution<C>>> {
    if w.degree() > 2 {
        return Err(Error::NotQuadratic);
    }
    let dim = w.dim();
    let origin = vec![C::zero(); dim];
    let h = w.hessian(&origin)?;
    let b = w.gradient(&origin)?;
    // Kernel of [H | b]: solutions with last coordinate 1 give H x = -b.
    let augmented: Vec<Vec<C>> = h
        .rows()
        .iter()
        .zip(&b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let ext = C::kernel(&augmented, dim + 1);
    let Some(pivot) = ext.iter().find(|v| !v[dim].negligible(1.0)) else {
        return Ok(None);
    };
    let s = C::one() / pivot[dim].clone();
    let particular: Vec<C> = pivot[..dim].iter().map(|v| v.clone() * s.clone()).collect();
    Ok(Some((particular, h.kernel())))
}

fn univariate_coeffs<C: Coeff>(w: &Superpotential<C>) -> Vec<Complex> {
    let deg = w.degree() as usize;
    let mut c = vec![Complex::new(0.0, 0.0); deg + 1];
    for (alpha, v) in w.monomials() {
        c[alpha[0] as usize] += v.to_complex();
    }
    c
}

fn derivative_coeffs(c: &[Complex]) -> Vec<Complex> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, v)| v * i as f64)
        .collect()
}

fn horner(c: &[Complex], x: Complex) -> Complex {
    c.iter()
        .rev()
        .fold(Complex::new(0.0, 0.0), |acc, v| acc * x + v)
}

/// Roots of a complex polynomial (ascending coefficients) as eigenvalues
/// of its companion matrix.
pub fn companion_roots(coeffs: &[Complex]) -> Vec<Complex> {
    let mut c = coeffs.to_vec();
    let scale = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    while c.last().is_some_and(|v| v.norm() <= 1e-14 * scale) {
        c.pop();
    }
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let companion = DMatrix::from_fn(deg, deg, |i, j| {
        if j == deg - 1 {
            -c[i] / lead
        } else if i == j + 1 {
            Complex::new(1.0, 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    companion
        .schur()
        .eigenvalues()
        .expect("complex Schur form is triangular")
        .iter()
        .copied()
        .collect()
}

/// Complex critical points of a univariate `W` from the companion matrix
/// of `dW/dx_0`, polished by a few Newton steps.
pub fn solve_univariate<C: Coeff>(w: &Superpotential<C>) -> Result<Vec<CriticalPoint<Complex>>> {
    if w.n() != 0 {
        return Err(Error::NotUnivariate(w.n()));
    }
    let dw = derivative_coeffs(&univariate_coeffs(w));
    if dw.iter().all(|v| v.norm() == 0.0) {
        return Err(Error::EveryPointCritical);
    }
    let d2w = derivative_coeffs(&dw);
    let mut roots = companion_roots(&dw);
    for r in &mut roots {
        for _ in 0..POLISH_STEPS {
            let slope = horner(&d2w, *r);
            if slope.norm() == 0.0 {
                break;
            }
            let next = *r - horner(&dw, *r) / slope;
            if horner(&dw, next).norm() >= horner(&dw, *r).norm() {
                break;
            }
            *r = next;
        }
    }
    let points = roots
        .into_iter()
        .map(|r| {
            let h = vec![vec![horner(&d2w, r)]];
            let kind = if linalg::rank_float(&h, 1).rank == 0 {
                PointKind::FamilyMember
            } else {
                PointKind::Isolated
            };
            CriticalPoint {
                x: vec![r],
                residual: horner(&dw, r).norm(),
                kind,
            }
        })
        .collect();
    Ok(dedup_and_sort(points))
}

/// Uniform starts in the complex polydisc `|x_i| <= radius`.
pub fn default_starts(n: u32, count: usize, radius: f64, seed: u64) -> Vec<Vec<Complex>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..=n)
                .map(|_| {
                    let r = radius * rng.gen::<f64>().sqrt();
                    let theta = std::f64::consts::TAU * rng.gen::<f64>();
                    Complex::from_polar(r, theta)
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonFailure {
    pub start: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub points: Vec<CriticalPoint<Complex>>,
    pub failures: Vec<NewtonFailure>,
}

struct GradientSystem {
    grad: Vec<Superpotential<Complex>>,
    hess: Vec<Vec<Superpotential<Complex>>>,
}

impl GradientSystem {
    fn new(w: &Superpotential<Complex>) -> Self {
        let grad: Vec<_> = (0..w.dim()).map(|j| w.derivative(j)).collect();
        let hess = grad
            .iter()
            .map(|g| (0..w.dim()).map(|j| g.derivative(j)).collect())
            .collect();
        Self { grad, hess }
    }

    fn gradient(&self, x: &[Complex]) -> DVector<Complex> {
        DVector::from_iterator(
            x.len(),
            self.grad
                .iter()
                .map(|g| g.evaluate(x).expect("dimension checked")),
        )
    }

    fn hessian(&self, x: &[Complex]) -> DMatrix<Complex> {
        let d = x.len();
        DMatrix::from_fn(d, d, |i, j| {
            self.hess[i][j].evaluate(x).expect("dimension checked")
        })
    }

    /// Pseudo-inverse Newton step `H^+ g`.
    fn step(&self, x: &[Complex], g: &DVector<Complex>) -> DVector<Complex> {
        let svd = self.hessian(x).svd(true, true);
        let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
        if top == 0.0 {
            return DVector::zeros(x.len());
        }
        svd.solve(g, linalg::FLOAT_RANK_REL * top * 1e-4)
            .unwrap_or_else(|_| DVector::zeros(x.len()))
    }
}

fn run_newton(
    sys: &GradientSystem,
    start: &[Complex],
    tol: f64,
) -> std::result::Result<Vec<Complex>, f64> {
    let mut x = start.to_vec();
    let mut g = sys.gradient(&x);
    let mut steps = 0;
    while g.norm() > tol {
        steps += 1;
        if steps > MAX_NEWTON_STEPS || !g.norm().is_finite() {
            return Err(g.norm());
        }
        let s = sys.step(&x, &g);
        if s.norm() == 0.0 {
            return Err(g.norm());
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<Complex> = x
                .iter()
                .zip(s.iter())
                .map(|(a, b)| a - b * lambda)
                .collect();
            let gt = sys.gradient(&trial);
            if gt.norm() < g.norm() {
                x = trial;
                g = gt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(g.norm());
        }
    }
    for _ in 0..POLISH_STEPS {
        let s = sys.step(&x, &g);
        let trial: Vec<Complex> = x.iter().zip(s.iter()).map(|(a, b)| a - b).collect();
        let gt = sys.gradient(&trial);
        if gt.norm() >= g.norm() {
            break;
        }
        x = trial;
        g = gt;
    }
    Ok(x)
}

/// Damped Newton iteration on `grad W = 0` from every start.
pub fn solve_newton(
    w: &Superpotential<Complex>,
    starts: &[Vec<Complex>],
    tol: f64,
) -> Result<NewtonOutcome> {
    if tol <= 0.0 {
        return Err(Error::Input(format!(
            "solver tolerance must be positive, got {tol}"
        )));
    }
    for s in starts {
        if s.len() != w.dim() {
            return Err(Error::DimensionMismatch {
                expected: w.dim(),
                got: s.len(),
            });
        }
    }
    let sys = GradientSystem::new(w);
    let runs: Vec<_> = starts
        .par_iter()
        .map(|s| run_newton(&sys, s, tol))
        .collect();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (start, run) in runs.into_iter().enumerate() {
        match run {
            Ok(x) => {
                let residual = sys.gradient(&x).norm();
                let h = sys.hessian(&x);
                let rows: Vec<Vec<Complex>> = (0..h.nrows())
                    .map(|i| h.row(i).iter().copied().collect())
                    .collect();
                let kind = if linalg::rank_float(&rows, x.len()).rank < x.len() {
                    PointKind::FamilyMember
                } else {
                    PointKind::Isolated
                };
                points.push(CriticalPoint { x, residual, kind });
            }
            Err(residual) => failures.push(NewtonFailure { start, residual }),
        }
    }
    Ok(NewtonOutcome {
        points: dedup_and_sort(points),
        failures,
    })
}

fn max_dist(a: &[Complex], b: &[Complex]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v).norm())
        .fold(0.0, f64::max)
}

/// Keeps the first of every cluster closer than `DEDUP_DISTANCE`, then
/// orders points lexicographically by (re, im) of each coordinate.
pub fn dedup_and_sort(points: Vec<CriticalPoint<Complex>>) -> Vec<CriticalPoint<Complex>> {
    let mut kept: Vec<CriticalPoint<Complex>> = Vec::new();
    for p in points {
        if kept.iter().all(|k| max_dist(&k.x, &p.x) >= DEDUP_DISTANCE) {
            kept.push(p);
        }
    }
    kept.sort_by(|a, b| {
        for (u, v) in a.x.iter().zip(&b.x) {
            let ord = u.re.total_cmp(&v.re).then(u.im.total_cmp(&v.im));
            if ord.is_ne() {
                return ord;
            }
        }
        std::cmp::Ordering::Equal
    });
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::GeometricPotential;
    use crate::scalar::Rational;
    use crate::superpotential::build_combinatorial;

    fn q(v: i64) -> Rational {
        Rational::from_int(v)
    }

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    fn w(n: u32, terms: &[(&[u32], i64)]) -> Superpotential<Rational> {
        Superpotential::from_terms(n, terms.iter().map(|(a, v)| (a.to_vec(), q(*v)))).unwrap()
    }

    #[test]
    fn quadratic_examples() {
        assert_eq!(
            solve_quadratic(&w(1, &[(&[1, 1], 2)])).unwrap(),
            CriticalLocus::Subspace { basis: vec![] }
        );
        assert_eq!(
            solve_quadratic(&w(1, &[(&[2, 0], 1)])).unwrap(),
            CriticalLocus::Subspace {
                basis: vec![vec![q(0), q(1)]]
            }
        );
        let CriticalLocus::Subspace { basis } =
            solve_quadratic(&Superpotential::<Rational>::zero(1)).unwrap()
        else {
            panic!()
        };
        assert_eq!(basis.len(), 2);
        assert_eq!(
            solve_quadratic(&w(1, &[(&[1, 0], 1), (&[2, 0], 1)])),
            Err(Error::NotQuadratic)
        );
        assert_eq!(
            solve_quadratic(&w(0, &[(&[3], 1)])),
            Err(Error::NotQuadratic)
        );
    }

    #[test]
    fn quadratic_kernel_dimension_matches_corank() {
        let wp = w(2, &[(&[2, 0, 0], 1), (&[1, 1, 0], 2), (&[0, 2, 0], 1)]);
        let CriticalLocus::Subspace { basis } = solve_quadratic(&wp).unwrap() else {
            panic!()
        };
        assert_eq!(
            basis.len(),
            wp.hessian(&[q(0), q(0), q(0)]).unwrap().corank()
        );
        for v in basis {
            assert!(wp.gradient(&v).unwrap().iter().all(|g| *g == q(0)));
        }
    }

    #[test]
    fn affine_solve() {
        // W = x0^2 + 2 x0 x1 + 4 x1: grad = (2x0 + 2x1, 2x0 + 4) -> x0 = -2, x1 = 2.
        let wp = w(1, &[(&[2, 0], 1), (&[1, 1], 2), (&[0, 1], 4)]);
        let (p, k) = solve_affine(&wp).unwrap().unwrap();
        assert_eq!(p, vec![q(-2), q(2)]);
        assert!(k.is_empty());
        // W = x0: no critical points.
        assert_eq!(solve_affine(&w(0, &[(&[1], 1)])).unwrap(), None);
    }

    #[test]
    fn univariate_examples() {
        // t_3^(0) = 1/3, t_1^(0) = -1 at n = 0
        let p = GeometricPotential::new(
            0,
            [(3, 0, Rational::new(1.into(), 3.into())), (1, 0, q(-1))],
        )
        .unwrap();
        let wp = build_combinatorial(&p).unwrap();
        let roots = solve_univariate(&wp).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0].x[0] - c(-1.0)).norm() < 1e-12);
        assert!((roots[1].x[0] - c(1.0)).norm() < 1e-12);
        assert!(roots
            .iter()
            .all(|r| r.kind == PointKind::Isolated && r.residual < 1e-12));

        let roots = solve_univariate(&w(0, &[(&[2], 1)])).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].x[0].norm() < 1e-14);

        assert!(solve_univariate(&w(0, &[(&[1], 5)])).unwrap().is_empty());
        assert_eq!(
            solve_univariate(&Superpotential::<Rational>::zero(0)),
            Err(Error::EveryPointCritical)
        );
        assert_eq!(
            solve_univariate(&w(1, &[(&[2, 0], 1)])),
            Err(Error::NotUnivariate(1))
        );
    }

    #[test]
    fn newton_isolated_point() {
        let wp = w(1, &[(&[1, 1], 2)]).to_float();
        let starts = default_starts(1, 16, 0.5, 7);
        let out = solve_newton(&wp, &starts, DEFAULT_TOL).unwrap();
        assert!(out.failures.is_empty());
        assert_eq!(out.points.len(), 1);
        assert!(out.points[0].x.iter().all(|v| v.norm() < 1e-12));
        assert_eq!(out.points[0].kind, PointKind::Isolated);
    }

    #[test]
    fn newton_family_is_flagged() {
        let wp = w(1, &[(&[2, 0], 1)]).to_float();
        let starts = default_starts(1, 12, DEFAULT_START_RADIUS, 3);
        let out = solve_newton(&wp, &starts, DEFAULT_TOL).unwrap();
        assert!(out.failures.is_empty());
        assert!(out.points.len() > 1);
        for p in &out.points {
            assert!(p.x[0].norm() < 1e-10);
            assert_eq!(p.kind, PointKind::FamilyMember);
        }
    }

    #[test]
    fn newton_without_critical_points() {
        let wp = w(0, &[(&[1], 1)]).to_float();
        let out = solve_newton(&wp, &default_starts(0, 8, 2.0, 1), DEFAULT_TOL).unwrap();
        assert!(out.points.is_empty());
        assert_eq!(out.failures.len(), 8);
    }

    #[test]
    fn newton_rejects_bad_input() {
        let wp = w(1, &[(&[2, 0], 1)]).to_float();
        assert!(solve_newton(&wp, &[vec![c(0.0)]], 1e-10).is_err());
        assert!(solve_newton(&wp, &[vec![c(0.0), c(0.0)]], 0.0).is_err());
    }

    #[test]
    fn starts_are_seeded_and_bounded() {
        let a = default_starts(2, 64, 2.0, 42);
        assert_eq!(a, default_starts(2, 64, 2.0, 42));
        assert!(a.iter().flatten().all(|v| v.norm() <= 2.0));
    }

    #[test]
    fn verify_classifies_points() {
        let wp = w(1, &[(&[2, 1], 3), (&[2, 0], 1)]);
        let p = CriticalPoint::verify(&wp, vec![q(0), q(5)], 0.0)
            .unwrap()
            .unwrap();
        assert_eq!(p.kind, PointKind::FamilyMember);
        assert!(CriticalPoint::verify(&wp, vec![q(1), q(0)], 0.0)
            .unwrap()
            .is_none());
    }
}
