//! Section curves `(omega_1, omega_2)` and the gluing law
//! `omega_2' = z^(n+2) (omega_2 + dB/domega(z, omega_1))`.
//!
//! With `g(z) = dB/domega(z, omega_1(z))`, the Cauchy integral around `0`
//! and `z` sends `u^m` to `z^m` for `m >= 0` and to `0` for `m < 0`, so
//! `omega_2 = -[g]_{>=0}` and the gluing law leaves
//! `omega_2' = z^(n+2) [g]_{<0}`. That is holomorphic in `z' = 1/z` exactly
//! when the coefficients of `z^-1 .. z^-(n+1)` in `g` vanish, which are the
//! partial derivatives of `W`.

use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;
use crate::potential::{Chart, GeometricPotential};
use crate::scalar::{Coeff, Mode};

/// Coefficient-wise tolerance for FLOAT gluing checks.
pub const FLOAT_GLUING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SectionCurve<C: Coeff> {
    /// `omega_1(z) = sum x_i z^i`, `omega_1'(z') = sum x_i z'^(n-i)`.
    pub x: Vec<C>,
    /// `omega_2` on `U0`, in `z`.
    pub omega2_u0: LaurentPoly<C>,
    /// `omega_2'` on `U1`, in `z'`.
    pub omega2_u1: LaurentPoly<C>,
}

impl<C: Coeff> SectionCurve<C> {
    pub fn parameters(&self) -> &[C] {
        &self.x
    }

    /// `omega_1` in the `z` chart.
    pub fn omega1_u0(&self) -> LaurentPoly<C> {
        LaurentPoly::from_dense(&self.x)
    }

    /// `omega_1'` in the `z'` chart.
    pub fn omega1_u1(&self) -> LaurentPoly<C> {
        let n = self.x.len() as i64 - 1;
        LaurentPoly::from_terms(
            self.x
                .iter()
                .enumerate()
                .map(|(i, c)| (n - i as i64, c.clone())),
        )
    }
}

fn is_significant<C: Coeff>(c: &C, scale: f64) -> bool {
    match C::MODE {
        Mode::Exact => !c.is_zero(),
        Mode::Float => c.magnitude() > FLOAT_GLUING_TOL * scale.max(1.0),
    }
}

/// Builds the section through the critical point `x`.
///
/// Fails with [`Error::Obstruction`] listing the positive powers of `z`
/// left in the `U1` chart when `x` is not critical.
pub fn reconstruct<C: Coeff>(p: &GeometricPotential<C>, x: &[C]) -> Result<SectionCurve<C>> {
    let s = assemble(p, x)?;
    let scale = p.eval_along_section(x, 1)?.max_magnitude();
    // positive powers of z are negative powers of z'
    let offending: Vec<_> = s
        .omega2_u1
        .terms()
        .filter(|&(e, c)| e < 0 && is_significant(c, scale))
        .map(|(e, c)| (-e, c.to_scalar()))
        .collect();
    if !offending.is_empty() {
        return Err(Error::Obstruction { offending });
    }
    Ok(SectionCurve {
        omega2_u1: s.omega2_u1.restrict(0, i64::MAX),
        ..s
    })
}

/// Applies the two section formulas at any `x`, critical or not. Off the
/// critical locus `omega2_u1` carries poles in `z'`.
pub fn assemble<C: Coeff>(p: &GeometricPotential<C>, x: &[C]) -> Result<SectionCurve<C>> {
    let g = p.eval_along_section(x, 1)?;
    let (principal, holomorphic) = g.split_parts();
    let glued = principal.checked_shift(i64::from(p.n()) + 2)?;
    Ok(SectionCurve {
        x: x.to_vec(),
        omega2_u0: -&holomorphic,
        omega2_u1: glued.invert_chart(),
    })
}

/// `omega_2'` from its own contour formula: the Cauchy integral of
/// `dB/domega(1/u, omega_1(1/u)) / u^(n+2)` around `0` and `z'`, i.e. the
/// nonnegative part in `u` of that Laurent polynomial.
pub fn omega2_u1_by_contour<C: Coeff>(
    p: &GeometricPotential<C>,
    x: &[C],
) -> Result<LaurentPoly<C>> {
    let g = p.eval_along_section(x, 1)?;
    let integrand = g.invert_chart().checked_shift(-(i64::from(p.n()) + 2))?;
    Ok(integrand.split_parts().1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `omega_2` has a pole at `z = 0`.
    NegativeExponentOnU0,
    /// `omega_2'` has a pole at `z' = 0`.
    NegativeExponentOnU1,
    /// `z^(n+2)(omega_2 + g)` differs from `omega_2'`.
    GluingMismatch,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub chart: Chart,
    /// Exponent in the chart coordinate (`z` for U0, `z'` for U1).
    pub exponent: i64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GluingReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Checks holomorphy on both charts and the gluing law; never fails.
pub fn verify_gluing<C: Coeff>(p: &GeometricPotential<C>, s: &SectionCurve<C>) -> GluingReport {
    let mut violations = Vec::new();
    let g = match p.eval_along_section(&s.x, 1) {
        Ok(g) => g,
        Err(_) => {
            return GluingReport {
                ok: false,
                violations: vec![Violation {
                    kind: ViolationKind::GluingMismatch,
                    chart: Chart::U0,
                    exponent: 0,
                    magnitude: f64::INFINITY,
                }],
            }
        }
    };
    let scale = g
        .max_magnitude()
        .max(s.omega2_u0.max_magnitude())
        .max(s.omega2_u1.max_magnitude());
    let mut flag = |kind, chart, poly: &LaurentPoly<C>, keep: &dyn Fn(i64) -> bool| {
        for (e, c) in poly.terms() {
            if keep(e) && is_significant(c, scale) {
                violations.push(Violation {
                    kind,
                    chart,
                    exponent: e,
                    magnitude: c.magnitude(),
                });
            }
        }
    };
    flag(
        ViolationKind::NegativeExponentOnU0,
        Chart::U0,
        &s.omega2_u0,
        &|e| e < 0,
    );
    flag(
        ViolationKind::NegativeExponentOnU1,
        Chart::U1,
        &s.omega2_u1,
        &|e| e < 0,
    );
    let predicted = (&s.omega2_u0 + &g).shift(i64::from(p.n()) + 2);
    let mismatch = &s.omega2_u1.invert_chart() - &predicted;
    // reported in the z' coordinate
    flag(
        ViolationKind::GluingMismatch,
        Chart::U1,
        &mismatch.invert_chart(),
        &|_| true,
    );
    GluingReport {
        ok: violations.is_empty(),
        violations,
    }
}

/// Terms of `dB/domega` along the section with exponent below `-(n+1)`.
/// They never obstruct the gluing but land in `omega_2'` as nonnegative
/// powers of `z'`.
pub fn trivial_terms<C: Coeff>(p: &GeometricPotential<C>, x: &[C]) -> Result<LaurentPoly<C>> {
    let g = p.eval_along_section(x, 1)?;
    Ok(g.restrict(i64::MIN, -(i64::from(p.n()) + 2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Complex, Rational};

    fn q(v: i64) -> Rational {
        Rational::from_int(v)
    }

    fn pot(n: u32, terms: &[(u32, i64, i64)]) -> GeometricPotential<Rational> {
        GeometricPotential::new(n, terms.iter().map(|&(d, k, t)| (d, k, q(t)))).unwrap()
    }

    #[test]
    fn zero_section_of_rigid_potential() {
        let s = reconstruct(&pot(1, &[(2, 1, 1)]), &[q(0), q(0)]).unwrap();
        assert!(s.omega2_u0.is_zero() && s.omega2_u1.is_zero());
    }

    #[test]
    fn stratified_family_sections() {
        // g = 3a z^-2 (cz)^2 + 2b z^-1 (cz) = 3ac^2 + 2bc
        let (a, b) = (2, -3);
        let p = pot(1, &[(3, 1, a), (2, 0, b)]);
        for c in [-2, 0, 1, 5] {
            let s = reconstruct(&p, &[q(0), q(c)]).unwrap();
            assert_eq!(
                s.omega2_u0,
                LaurentPoly::constant(q(-(3 * a * c * c + 2 * b * c)))
            );
            assert!(s.omega2_u1.is_zero());
            assert!(verify_gluing(&p, &s).ok);
            assert_eq!(s.parameters(), &[q(0), q(c)]);
        }
    }

    #[test]
    fn non_critical_point_is_obstructed() {
        let err = reconstruct(&pot(1, &[(2, 0, 1)]), &[q(1), q(0)]).unwrap_err();
        assert_eq!(
            err,
            Error::Obstruction {
                offending: vec![(2, q(2).to_scalar())]
            }
        );
    }

    #[test]
    fn pole_on_u0_is_reported() {
        let p = pot(1, &[(2, 1, 1)]);
        let s = SectionCurve {
            x: vec![q(0), q(0)],
            omega2_u0: LaurentPoly::monomial(q(1), -1),
            omega2_u1: LaurentPoly::zero(),
        };
        let r = verify_gluing(&p, &s);
        assert!(!r.ok);
        assert!(r
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::NegativeExponentOnU0 && v.exponent == -1));
    }

    #[test]
    fn trivial_terms_land_in_u1_chart() {
        // n = 1, {(2,2): 1}: g = 2 z^-3 (x0 + x1 z); critical iff x1 = 0.
        let p = pot(1, &[(2, 2, 1)]);
        let s = reconstruct(&p, &[q(4), q(0)]).unwrap();
        assert_eq!(s.omega2_u1, LaurentPoly::constant(q(8)));
        assert!(verify_gluing(&p, &s).ok);
        assert_eq!(
            trivial_terms(&p, &[q(4), q(0)]).unwrap(),
            LaurentPoly::monomial(q(8), -3)
        );
        assert!(reconstruct(&p, &[q(0), q(1)]).is_err());
    }

    #[test]
    fn contour_formula_matches_gluing() {
        let p = pot(2, &[(2, 2, 1), (3, 4, -1), (2, 4, 3), (1, 0, 2)]);
        // W has gradient zero at the origin only if there is no linear term; use
        // the B = d=2,3 part at the origin.
        let p0 = pot(2, &[(2, 2, 1), (3, 4, -1), (2, 4, 3)]);
        let x = [q(0), q(0), q(0)];
        let s = reconstruct(&p0, &x).unwrap();
        assert_eq!(omega2_u1_by_contour(&p0, &x).unwrap(), s.omega2_u1);
        assert!(reconstruct(&p, &x).is_err());
    }

    #[test]
    fn perturbed_float_section_fails_gluing() {
        let p = pot(1, &[(3, 1, 1), (2, 0, 1)]).to_float();
        let c = Complex::new(2.0, 0.0);
        let good = [Complex::new(0.0, 0.0), c];
        let s = reconstruct(&p, &good).unwrap();
        assert!(verify_gluing(&p, &s).ok);
        let bad = [Complex::new(1e-3, 0.0), c];
        match reconstruct(&p, &bad) {
            Err(Error::Obstruction { offending }) => assert!(!offending.is_empty()),
            other => panic!("expected obstruction, got {other:?}"),
        }
        // first-order obstruction: z^3 (grad_0 z^-1 + grad_1 z^-2) with grad_0 = (6c+2) eps
        let r = verify_gluing(&p, &assemble(&p, &bad).unwrap());
        assert!(!r.ok);
        let v = r
            .violations
            .iter()
            .find(|v| v.kind == ViolationKind::NegativeExponentOnU1 && v.exponent == -2)
            .expect("pole of order 2 in z'");
        assert!((v.magnitude - 14e-3).abs() < 1e-9, "{}", v.magnitude);
    }

    #[test]
    fn omega1_charts_are_compatible() {
        // omega_1' = z^-n omega_1
        let s = SectionCurve {
            x: vec![q(1), q(2), q(3)],
            omega2_u0: LaurentPoly::zero(),
            omega2_u1: LaurentPoly::zero(),
        };
        assert_eq!(s.omega1_u1().invert_chart(), s.omega1_u0().shift(-2));
    }
}
