//! Parameter sweeps over one or two coefficient slots `t_d^(k)`.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::cli::input::{scalar_to_json, AnyPotential};
use crate::cli::report::{analyze, AnalyzeOptions};
use crate::error::{Error, Result};
use crate::potential::GeometricPotential;
use crate::scalar::{parse_rational, Coeff, Complex, Mode, Rational, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub d: u32,
    pub k: i64,
    pub values: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: AnyPotential,
    pub axes: Vec<SweepAxis>,
    pub options: AnalyzeOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub cell: usize,
    pub values: Vec<Scalar>,
    pub points: usize,
    /// `(corank, splitting)` per point, in report order.
    pub results: Vec<(usize, (i64, i64))>,
    pub agrees: bool,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axes: Vec<(u32, i64)>,
    pub rows: Vec<SweepRow>,
}

/// Parses `d,k`.
pub fn parse_slot(text: &str) -> Result<(u32, i64)> {
    let bad = || Error::Input(format!("slot must look like \"d,k\", got {text:?}"));
    let (d, k) = text.split_once(',').ok_or_else(bad)?;
    let d: u32 = d.trim().parse().map_err(|_| bad())?;
    let k: i64 = k.trim().parse().map_err(|_| bad())?;
    if d == 0 {
        return Err(Error::Input("swept slot needs d >= 1".into()));
    }
    Ok((d, k))
}

/// Parses `a:b:steps` into `steps` evenly spaced values from `a` to `b`.
pub fn parse_range(text: &str, mode: Mode) -> Result<Vec<Scalar>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, steps] = parts.as_slice() else {
        return Err(Error::Input(format!(
            "range must look like \"a:b:steps\", got {text:?}"
        )));
    };
    let steps: usize = steps
        .trim()
        .parse()
        .map_err(|_| Error::Input(format!("bad step count in {text:?}")))?;
    if steps == 0 {
        return Err(Error::Input("grid size must be at least 1".into()));
    }
    let values = match mode {
        Mode::Exact => {
            let (a, b) = (parse_rational(a)?, parse_rational(b)?);
            (0..steps)
                .map(|i| {
                    let v = if steps == 1 {
                        a.clone()
                    } else {
                        &a + (&b - &a) * Rational::from_int(i as i64)
                            / Rational::from_int(steps as i64 - 1)
                    };
                    Scalar::Exact(v)
                })
                .collect()
        }
        Mode::Float => {
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Input(format!("not a number: {s:?}")))
            };
            let (a, b) = (parse(a)?, parse(b)?);
            (0..steps)
                .map(|i| {
                    let v = if steps == 1 {
                        a
                    } else {
                        a + (b - a) * i as f64 / (steps - 1) as f64
                    };
                    Scalar::Float(Complex::new(v, 0.0))
                })
                .collect()
        }
    };
    Ok(values)
}

fn validate<C: Coeff>(base: &GeometricPotential<C>, axes: &[SweepAxis]) -> Result<()> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::Input("a sweep varies one or two slots".into()));
    }
    for axis in axes {
        if axis.values.is_empty() {
            return Err(Error::Input("grid size must be at least 1".into()));
        }
        let present = base.terms().any(|(d, k, _)| (d, k) == (axis.d, axis.k));
        let in_window = (0..=i64::from(axis.d) * i64::from(base.n())).contains(&axis.k);
        if !present && !in_window {
            return Err(Error::Input(format!(
                "slot (d={}, k={}) is neither in the base potential nor inside 0 <= k <= dn",
                axis.d, axis.k
            )));
        }
    }
    Ok(())
}

fn with_values<C: Coeff>(
    base: &GeometricPotential<C>,
    axes: &[SweepAxis],
    values: &[Scalar],
) -> Result<GeometricPotential<C>> {
    let mut p = base.clone();
    for (axis, v) in axes.iter().zip(values) {
        p.set_term(axis.d, axis.k, C::from_scalar(v)?)?;
    }
    Ok(p)
}

/// Runs the full analysis on every grid cell (first axis outermost).
pub fn sweep(spec: &SweepSpec) -> Result<SweepTable> {
    match &spec.base {
        AnyPotential::Exact(p) => validate(p, &spec.axes)?,
        AnyPotential::Float(p) => validate(p, &spec.axes)?,
    }
    for axis in &spec.axes {
        if axis.values.iter().any(|v| v.mode() != spec.base.mode()) {
            return Err(Error::ModeMismatch {
                left: spec.base.mode().name(),
                right: "sweep value",
            });
        }
    }
    let mut cells: Vec<Vec<Scalar>> = vec![Vec::new()];
    for axis in &spec.axes {
        cells = cells
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |v| {
                    let mut c = prefix.clone();
                    c.push(v.clone());
                    c
                })
            })
            .collect();
    }
    let rows = cells
        .into_par_iter()
        .enumerate()
        .map(|(cell, values)| run_cell(spec, cell, values))
        .collect();
    Ok(SweepTable {
        axes: spec.axes.iter().map(|a| (a.d, a.k)).collect(),
        rows,
    })
}

fn run_cell(spec: &SweepSpec, cell: usize, values: Vec<Scalar>) -> SweepRow {
    let potential = match &spec.base {
        AnyPotential::Exact(p) => with_values(p, &spec.axes, &values).map(AnyPotential::Exact),
        AnyPotential::Float(p) => with_values(p, &spec.axes, &values).map(AnyPotential::Float),
    };
    let report = potential.and_then(|p| analyze(&p, &spec.options));
    match report {
        Ok(r) => {
            let results = r
                .points
                .iter()
                .filter_map(|p| Some((p.corank?, (p.verified?.a, p.verified?.b))))
                .collect();
            let errors = r.points.iter().filter(|p| p.error.is_some()).count();
            let status = if errors > 0 {
                format!("point_errors={errors}")
            } else if !r.solver_failures.is_empty() {
                format!("solver_failures={}", r.solver_failures.len())
            } else {
                "ok".to_string()
            };
            SweepRow {
                cell,
                values,
                points: r.points.len(),
                results,
                agrees: r.verdict,
                status,
            }
        }
        Err(e) => SweepRow {
            cell,
            values,
            points: 0,
            results: Vec::new(),
            agrees: false,
            status: format!("error: {e}"),
        },
    }
}

impl SweepTable {
    /// Tab-separated table with a header row and one row per cell.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("cell");
        for (d, k) in &self.axes {
            let _ = write!(out, "\tt[{d},{k}]");
        }
        out.push_str("\tpoints\tcoranks\tsplittings\tagrees\tstatus\n");
        for row in &self.rows {
            let _ = write!(out, "{}", row.cell);
            for v in &row.values {
                let _ = write!(out, "\t{}", scalar_to_json(v).to_string().replace('"', ""));
            }
            let coranks: Vec<String> = row.results.iter().map(|(r, _)| r.to_string()).collect();
            let splits: Vec<String> = row
                .results
                .iter()
                .map(|(_, (a, b))| format!("({a},{b})"))
                .collect();
            let _ = writeln!(
                out,
                "\t{}\t{}\t{}\t{}\t{}",
                row.points,
                coranks.join(";"),
                splits.join(";"),
                row.agrees,
                row.status.replace(['\t', '\n'], " ")
            );
        }
        out
    }

    pub fn all_agree(&self) -> bool {
        self.rows.iter().all(|r| r.agrees && r.status == "ok")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::input::parse_potential;

    fn base(doc: &str) -> AnyPotential {
        parse_potential(doc).unwrap().potential
    }

    #[test]
    fn scaling_keeps_corank() {
        let spec = SweepSpec {
            base: base(r#"{"n":1,"mode":"exact","terms":[]}"#),
            axes: vec![SweepAxis {
                d: 2,
                k: 1,
                values: parse_range("1:3:3", Mode::Exact).unwrap(),
            }],
            options: AnalyzeOptions::default(),
        };
        let t = sweep(&spec).unwrap();
        assert_eq!(t.rows.len(), 3);
        for row in &t.rows {
            assert_eq!(row.points, 1);
            assert_eq!(row.results, vec![(0, (-1, -1))]);
            assert!(row.agrees);
        }
        assert!(t.all_agree());
    }

    #[test]
    fn rank_jump_at_zero() {
        let spec = SweepSpec {
            base: base(r#"{"n":1,"mode":"exact","terms":[{"d":2,"k":0,"t":1}]}"#),
            axes: vec![SweepAxis {
                d: 2,
                k: 0,
                values: parse_range("0:1:2", Mode::Exact).unwrap(),
            }],
            options: AnalyzeOptions::default(),
        };
        let t = sweep(&spec).unwrap();
        assert!(t.rows[0].results.iter().all(|&r| r == (2, (1, -3))));
        assert!(t.rows[1].results.iter().all(|&r| r == (1, (0, -2))));
        assert!(t.all_agree());
    }

    #[test]
    fn single_cell_zero_potential() {
        let spec = SweepSpec {
            base: base(r#"{"n":2,"mode":"exact","terms":[]}"#),
            axes: vec![SweepAxis {
                d: 2,
                k: 0,
                values: parse_range("0:0:1", Mode::Exact).unwrap(),
            }],
            options: AnalyzeOptions::default(),
        };
        let t = sweep(&spec).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.rows[0].results.iter().all(|&(r, _)| r == 3));
    }

    #[test]
    fn two_axes_in_grid_order_and_tsv() {
        let spec = SweepSpec {
            base: base(r#"{"n":1,"mode":"exact","terms":[]}"#),
            axes: vec![
                SweepAxis {
                    d: 2,
                    k: 0,
                    values: parse_range("0:1:2", Mode::Exact).unwrap(),
                },
                SweepAxis {
                    d: 2,
                    k: 2,
                    values: parse_range("-1/2:1/2:3", Mode::Exact).unwrap(),
                },
            ],
            options: AnalyzeOptions::default(),
        };
        let t = sweep(&spec).unwrap();
        assert_eq!(t.rows.len(), 6);
        let tsv = t.to_tsv();
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(
            lines[0],
            "cell\tt[2,0]\tt[2,2]\tpoints\tcoranks\tsplittings\tagrees\tstatus"
        );
        assert!(lines[1].starts_with("0\t0\t-1/2\t"));
        assert!(lines[6].starts_with("5\t1\t1/2\t"));
        assert!(t.all_agree());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(parse_range("1:2:0", Mode::Exact).is_err());
        assert!(parse_range("1:2", Mode::Exact).is_err());
        assert!(parse_slot("0,1").is_err());
        assert!(parse_slot("2;1").is_err());
        let spec = SweepSpec {
            base: base(r#"{"n":1,"mode":"exact","terms":[]}"#),
            axes: vec![SweepAxis {
                d: 2,
                k: 7,
                values: parse_range("0:1:2", Mode::Exact).unwrap(),
            }],
            options: AnalyzeOptions::default(),
        };
        assert!(sweep(&spec).is_err());
    }

    #[test]
    fn float_range() {
        let v = parse_range("0:1:5", Mode::Float).unwrap();
        assert_eq!(v[2], Scalar::Float(Complex::new(0.5, 0.0)));
    }
}
