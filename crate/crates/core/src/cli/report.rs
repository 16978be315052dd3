//! End-to-end analysis of one potential.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::bundle::{ferrari_check, SplittingType};
use crate::cli::input::{scalar_to_json, AnyPotential};
use crate::critical::{
    default_starts, solve_affine, solve_newton, solve_univariate, CriticalPoint, PointKind,
    DEFAULT_STARTS, DEFAULT_START_RADIUS, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::potential::{Chart, GeometricPotential};
use crate::scalar::{Coeff, Complex, Scalar};
use crate::sections::{reconstruct, verify_gluing, Violation};
use crate::superpotential::{build_combinatorial, build_residue, Superpotential};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    /// Hand-supplied critical points; replaces the solver when present.
    pub points: Option<Vec<Vec<Scalar>>>,
    pub starts: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            points: None,
            starts: DEFAULT_STARTS,
            tol: DEFAULT_TOL,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorbedReport {
    pub chart: Chart,
    pub d: u32,
    pub k: i64,
    pub exponent: i64,
    pub t: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonomialReport {
    pub exponents: Vec<u32>,
    pub coeff: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperpotentialReport {
    pub routes_agree: bool,
    pub degree: u32,
    pub monomials: Vec<MonomialReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocusReport {
    /// Affine critical set `particular + span(basis)` of a `W` of degree <= 2.
    Subspace {
        particular: Vec<Value>,
        basis: Vec<Vec<Value>>,
    },
    Points {
        source: PointSource,
        count: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointSource {
    User,
    Affine,
    Companion,
    Newton,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverFailure {
    pub start: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointReport {
    pub x: Vec<Value>,
    pub mode: &'static str,
    pub kind: Option<PointKind>,
    pub residual: f64,
    pub gluing_ok: bool,
    pub gluing_violations: Vec<Violation>,
    pub corank: Option<usize>,
    pub predicted: Option<SplittingType>,
    pub oracle_h0: Option<usize>,
    pub verified: Option<SplittingType>,
    pub agrees: bool,
    pub near_threshold: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub input: Value,
    pub warnings: Vec<String>,
    pub absorbed: Vec<AbsorbedReport>,
    pub superpotential: SuperpotentialReport,
    pub locus: LocusReport,
    pub solver_failures: Vec<SolverFailure>,
    pub points: Vec<PointReport>,
    pub verdict: bool,
}

impl AnalysisReport {
    /// 0 iff the verdict holds and no solver start failed, otherwise 1.
    pub fn exit_code(&self) -> i32 {
        if self.verdict && self.solver_failures.is_empty() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fixed-width table for terminals.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "potential : {}", self.input);
        for w in &self.warnings {
            let _ = writeln!(out, "warning   : {w}");
        }
        for a in &self.absorbed {
            let _ = writeln!(
                out,
                "absorbed  : (d={}, k={}) t={} on {:?}, exponent {}",
                a.d, a.k, a.t, a.chart, a.exponent
            );
        }
        let _ = writeln!(
            out,
            "W         : degree {}, {} monomials, routes agree: {}",
            self.superpotential.degree,
            self.superpotential.monomials.len(),
            self.superpotential.routes_agree
        );
        match &self.locus {
            LocusReport::Subspace { particular, basis } => {
                let _ = writeln!(
                    out,
                    "locus     : affine, dimension {}, through {}",
                    basis.len(),
                    fmt_point(particular)
                );
            }
            LocusReport::Points { source, count } => {
                let _ = writeln!(out, "locus     : {count} point(s) from {source:?}");
            }
        }
        if !self.solver_failures.is_empty() {
            let _ = writeln!(
                out,
                "failures  : {} start(s) did not converge",
                self.solver_failures.len()
            );
        }
        let _ = writeln!(
            out,
            "{:>3}  {:<36} {:<14} {:>3} {:>12} {:>3} {:>12} {:>6} {:>5}",
            "#", "x", "kind", "r", "predicted", "h0", "verified", "glue", "agree"
        );
        for (i, p) in self.points.iter().enumerate() {
            let split = |s: &Option<SplittingType>| {
                s.map(|s| format!("({},{})", s.a, s.b))
                    .unwrap_or_else(|| "-".into())
            };
            let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
            let kind = p
                .kind
                .map(|k| format!("{k:?}"))
                .unwrap_or_else(|| "-".into());
            let flag = if p.near_threshold { "*" } else { "" };
            let _ = writeln!(
                out,
                "{:>3}  {:<36} {:<14} {:>3} {:>12} {:>3} {:>12} {:>6} {:>5}{}",
                i,
                truncate(&fmt_point(&p.x), 36),
                kind,
                opt(p.corank),
                split(&p.predicted),
                opt(p.oracle_h0),
                split(&p.verified),
                p.gluing_ok,
                p.agrees,
                flag
            );
            if let Some(e) = &p.error {
                let _ = writeln!(out, "     error: {e}");
            }
        }
        let _ = writeln!(out, "verdict   : {}", self.verdict);
        out
    }
}

fn fmt_point(x: &[Value]) -> String {
    let parts: Vec<String> = x.iter().map(|v| v.to_string().replace('"', "")).collect();
    format!("({})", parts.join(", "))
}

fn truncate(s: &str, width: usize) -> String {
    if s.chars().count() <= width {
        s.to_string()
    } else {
        let mut t: String = s.chars().take(width - 1).collect();
        t.push('~');
        t
    }
}

fn point_json<C: Coeff>(x: &[C]) -> Vec<Value> {
    x.iter().map(|c| scalar_to_json(&c.to_scalar())).collect()
}

fn superpotential_report<C: Coeff>(
    w: &Superpotential<C>,
    routes_agree: bool,
) -> SuperpotentialReport {
    SuperpotentialReport {
        routes_agree,
        degree: w.degree(),
        monomials: w
            .monomials()
            .map(|(a, c)| MonomialReport {
                exponents: a.clone(),
                coeff: scalar_to_json(&c.to_scalar()),
            })
            .collect(),
    }
}

/// Reconstructs the section and runs the splitting check at one point.
pub fn analyze_point<C: Coeff>(p: &GeometricPotential<C>, x: &[C]) -> PointReport {
    let mut report = PointReport {
        x: point_json(x),
        mode: C::MODE.name(),
        kind: None,
        residual: 0.0,
        gluing_ok: false,
        gluing_violations: Vec::new(),
        corank: None,
        predicted: None,
        oracle_h0: None,
        verified: None,
        agrees: false,
        near_threshold: false,
        error: None,
    };
    match reconstruct(p, x) {
        Ok(s) => {
            let g = verify_gluing(p, &s);
            report.gluing_ok = g.ok;
            report.gluing_violations = g.violations;
        }
        Err(e) => {
            report.error = Some(e.to_string());
            return report;
        }
    }
    match ferrari_check(p, x) {
        Ok(a) => {
            report.kind = Some(a.point.kind);
            report.residual = a.point.residual;
            report.corank = Some(a.hessian_corank);
            report.predicted = Some(a.predicted);
            report.oracle_h0 = Some(a.oracle_h0);
            report.verified = Some(a.verified);
            report.agrees = a.agrees && report.gluing_ok;
            report.near_threshold = a.near_threshold;
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    report
}

struct Solved {
    locus: LocusReport,
    failures: Vec<SolverFailure>,
    points: Vec<PointReport>,
}

fn analyze_points<C: Coeff>(p: &GeometricPotential<C>, pts: &[Vec<C>]) -> Vec<PointReport> {
    use rayon::prelude::*;
    pts.par_iter().map(|x| analyze_point(p, x)).collect()
}

fn float_points(
    pf: &GeometricPotential<Complex>,
    wf: &Superpotential<Complex>,
    opts: &AnalyzeOptions,
) -> Result<Solved> {
    let (source, found, failures): (_, Vec<CriticalPoint<Complex>>, _) = if wf.n() == 0 {
        match solve_univariate(wf) {
            Ok(pts) => (PointSource::Companion, pts, Vec::new()),
            Err(Error::EveryPointCritical) => (PointSource::Companion, Vec::new(), Vec::new()),
            Err(e) => return Err(e),
        }
    } else {
        let starts = default_starts(wf.n(), opts.starts, DEFAULT_START_RADIUS, opts.seed);
        let out = solve_newton(wf, &starts, opts.tol)?;
        let failures = out
            .failures
            .iter()
            .map(|f| SolverFailure {
                start: f.start,
                residual: f.residual,
            })
            .collect();
        (PointSource::Newton, out.points, failures)
    };
    let xs: Vec<Vec<Complex>> = found.into_iter().map(|p| p.x).collect();
    Ok(Solved {
        locus: LocusReport::Points {
            source,
            count: xs.len(),
        },
        failures,
        points: analyze_points(pf, &xs),
    })
}

fn solve<C: Coeff>(
    pn: &GeometricPotential<C>,
    w: &Superpotential<C>,
    pf: impl FnOnce() -> GeometricPotential<Complex>,
    opts: &AnalyzeOptions,
) -> Result<Solved> {
    if let Some(user) = &opts.points {
        let xs: Vec<Vec<C>> = user
            .iter()
            .map(|pt| pt.iter().map(C::from_scalar).collect::<Result<Vec<C>>>())
            .collect::<Result<_>>()?;
        for x in &xs {
            pn.check_point(x)?;
        }
        return Ok(Solved {
            locus: LocusReport::Points {
                source: PointSource::User,
                count: xs.len(),
            },
            failures: Vec::new(),
            points: analyze_points(pn, &xs),
        });
    }
    if w.degree() <= 2 {
        let Some((particular, basis)) = solve_affine(w)? else {
            return Ok(Solved {
                locus: LocusReport::Points {
                    source: PointSource::Affine,
                    count: 0,
                },
                failures: Vec::new(),
                points: Vec::new(),
            });
        };
        let mut xs = vec![particular.clone()];
        xs.extend(basis.iter().map(|b| {
            particular
                .iter()
                .zip(b)
                .map(|(p, v)| p.clone() + v.clone())
                .collect::<Vec<C>>()
        }));
        return Ok(Solved {
            locus: LocusReport::Subspace {
                particular: point_json(&particular),
                basis: basis.iter().map(|b| point_json(b)).collect(),
            },
            failures: Vec::new(),
            points: analyze_points(pn, &xs),
        });
    }
    let pf = pf();
    let wf = build_combinatorial(&pf)?;
    float_points(&pf, &wf, opts)
}

/// normalize -> build W (both routes) -> critical points -> sections ->
/// splitting check at every point.
pub fn analyze(input: &AnyPotential, opts: &AnalyzeOptions) -> Result<AnalysisReport> {
    if opts.starts == 0 && opts.points.is_none() {
        return Err(Error::Input("--starts must be at least 1".into()));
    }
    match input {
        AnyPotential::Exact(p) => run(input, p, || p.normalize().0.to_float(), opts),
        AnyPotential::Float(p) => run(input, p, || p.normalize().0, opts),
    }
}

fn run<C: Coeff>(
    input: &AnyPotential,
    raw: &GeometricPotential<C>,
    pf: impl FnOnce() -> GeometricPotential<Complex>,
    opts: &AnalyzeOptions,
) -> Result<AnalysisReport> {
    let (pn, log) = raw.normalize();
    let w = build_combinatorial(&pn)?;
    let routes_agree = w == build_residue(&pn)?;
    let solved = solve(&pn, &w, pf, opts)?;
    let verdict = routes_agree && solved.points.iter().all(|p| p.agrees);
    Ok(AnalysisReport {
        input: input.to_json(),
        warnings: Vec::new(),
        absorbed: log
            .entries
            .iter()
            .map(|e| AbsorbedReport {
                chart: e.chart,
                d: e.d,
                k: e.k,
                exponent: e.exponent,
                t: scalar_to_json(&e.coefficient.to_scalar()),
            })
            .collect(),
        superpotential: superpotential_report(&w, routes_agree),
        locus: solved.locus,
        solver_failures: solved.failures,
        points: solved.points,
        verdict,
    })
}
