//! Property checks over seeded random corpora. Each check returns a
//! [`CriterionOutcome`]; the `selftest` command runs the exact ones.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bundle::{
    ferrari_check, h0_oracle, h0_with_bound, normal_transition, splitting_from_h0, SplittingType,
};
use crate::cli::input::AnyPotential;
use crate::cli::report::{analyze, AnalyzeOptions};
use crate::critical::{
    default_starts, solve_newton, solve_quadratic, solve_univariate, CriticalLocus, DEFAULT_STARTS,
    DEFAULT_START_RADIUS, DEFAULT_TOL,
};
use crate::error::Error;
use crate::potential::GeometricPotential;
use crate::scalar::{Coeff, Complex, Rational};
use crate::sections::{assemble, reconstruct, verify_gluing};
use crate::superpotential::{build_combinatorial, build_residue, w_block, Superpotential};

pub const SEED: u64 = 0x5EC7_1015;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionOutcome {
    fn new(id: u32, title: &'static str, failures: Vec<String>, checked: usize) -> Self {
        let passed = failures.is_empty();
        let detail = if passed {
            format!("{checked} checks")
        } else {
            format!(
                "{} of {checked} checks failed; first: {}",
                failures.len(),
                failures[0]
            )
        };
        Self {
            id,
            title,
            passed,
            detail,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {}: {} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail
        )
    }
}

fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ salt)
}

/// `p/q` with `p, q` in `[-9, 9]`, `q != 0`.
pub fn small_rational(rng: &mut impl Rng) -> Rational {
    let p = rng.gen_range(-9i64..=9);
    let mut q = 0;
    while q == 0 {
        q = rng.gen_range(-9i64..=9);
    }
    Rational::new(p.into(), q.into())
}

fn nonzero_rational(rng: &mut impl Rng) -> Rational {
    loop {
        let v = small_rational(rng);
        if !v.is_zero() {
            return v;
        }
    }
}

/// Purely quadratic normalized potential. With `deficient`, only slots
/// `k > n` are populated, so the first Hessian row vanishes.
pub fn random_quadratic(
    rng: &mut impl Rng,
    n: u32,
    deficient: bool,
) -> GeometricPotential<Rational> {
    let top = 2 * i64::from(n);
    let lo = if deficient { i64::from(n) + 1 } else { 0 };
    let mut p = GeometricPotential::zero(n);
    for k in lo..=top {
        if rng.gen_bool(0.7) {
            p.add_term(2, k, small_rational(rng)).expect("d = 2");
        }
    }
    p
}

/// Random normalized potential with `1 <= d <= max_d`.
pub fn random_potential(
    rng: &mut impl Rng,
    n: u32,
    max_d: u32,
    min_d: u32,
) -> GeometricPotential<Rational> {
    let mut p = GeometricPotential::zero(n);
    for _ in 0..rng.gen_range(1..=5) {
        let d = rng.gen_range(min_d..=max_d);
        let k = rng.gen_range(0..=i64::from(d) * i64::from(n));
        p.add_term(d, k, nonzero_rational(rng)).expect("d >= 1");
    }
    p
}

fn random_point(rng: &mut impl Rng, n: u32) -> Vec<Rational> {
    (0..=n).map(|_| small_rational(rng)).collect()
}

fn combine(rng: &mut impl Rng, basis: &[Vec<Rational>], dim: usize) -> Vec<Rational> {
    let mut x = vec![Rational::zero(); dim];
    for b in basis {
        let c = small_rational(rng);
        for (xi, bi) in x.iter_mut().zip(b) {
            *xi = &*xi + &c * bi;
        }
    }
    x
}

/// Quadratic corpus: potential plus one sampled critical point each.
pub fn quadratic_corpus(count: usize) -> Vec<(GeometricPotential<Rational>, Vec<Rational>)> {
    let mut rng = rng(1);
    (0..count)
        .map(|i| {
            let n = rng.gen_range(0..=4);
            let p = random_quadratic(&mut rng, n, i % 10 == 0);
            let w = build_combinatorial(&p).expect("normalized");
            let CriticalLocus::Subspace { basis } = solve_quadratic(&w).expect("quadratic") else {
                unreachable!()
            };
            let x = combine(&mut rng, &basis, n as usize + 1);
            (p, x)
        })
        .collect()
}

/// General corpus: potentials without linear terms (the origin is critical)
/// and the cubic stratified family at `(0, c)`.
pub fn general_corpus(count: usize) -> Vec<(GeometricPotential<Rational>, Vec<Rational>)> {
    let mut rng = rng(2);
    let mut out: Vec<_> = (0..count)
        .map(|_| {
            let n = rng.gen_range(0..=3);
            let p = random_potential(&mut rng, n, 4, 2);
            (p, vec![Rational::zero(); n as usize + 1])
        })
        .collect();
    let cubic = stratified(Rational::one(), Rational::one());
    for c in [1, -1, 2, 5] {
        out.push((cubic.clone(), vec![Rational::zero(), Rational::from_int(c)]));
    }
    out.push((
        cubic,
        vec![Rational::zero(), Rational::new((-1).into(), 3.into())],
    ));
    out
}

/// `{(3,1): a, (2,0): b}` at `n = 1`.
pub fn stratified(a: Rational, b: Rational) -> GeometricPotential<Rational> {
    GeometricPotential::new(1, [(3, 1, a), (2, 0, b)]).expect("valid terms")
}

pub fn criterion_quadratic_ferrari() -> CriterionOutcome {
    let mut failures = Vec::new();
    let corpus = quadratic_corpus(200);
    let deficient = corpus
        .iter()
        .filter(|(p, x)| build_combinatorial(p).unwrap().hessian(x).unwrap().corank() > 0)
        .count();
    for (i, (p, x)) in corpus.iter().enumerate() {
        let w = build_combinatorial(p).unwrap();
        let h = w.hessian(x).unwrap();
        let r = h.corank();
        let CriticalLocus::Subspace { basis } = solve_quadratic(&w).unwrap() else {
            unreachable!()
        };
        if basis.len() != r {
            failures.push(format!(
                "#{i}: kernel dimension {} != corank {r}",
                basis.len()
            ));
        }
        match normal_transition(p, x) {
            Ok(m) => {
                let h0 = h0_oracle(&m).h0;
                if h0 != r {
                    failures.push(format!("#{i}: h0 {h0} != corank {r}"));
                }
                if SplittingType::from_corank(r) != splitting_from_h0(h0) {
                    failures.push(format!("#{i}: splitting mismatch"));
                }
            }
            Err(e) => failures.push(format!("#{i}: {e}")),
        }
    }
    if deficient < 20 {
        failures.push(format!(
            "only {deficient} rank-deficient Hessians in corpus"
        ));
    }
    CriterionOutcome::new(
        1,
        "Ferrari property on 200 quadratic potentials",
        failures,
        corpus.len(),
    )
}

pub fn criterion_zero_potential() -> CriterionOutcome {
    let mut failures = Vec::new();
    for n in 0..=6u32 {
        let report = match analyze(
            &AnyPotential::Exact(GeometricPotential::zero(n)),
            &AnalyzeOptions::default(),
        ) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("n={n}: {e}"));
                continue;
            }
        };
        let expected = SplittingType {
            a: i64::from(n),
            b: -i64::from(n) - 2,
        };
        if report.points.is_empty() || !report.verdict {
            failures.push(format!("n={n}: empty or failing report"));
        }
        for p in &report.points {
            if p.corank != Some(n as usize + 1)
                || p.verified != Some(expected)
                || p.predicted != Some(expected)
            {
                failures.push(format!(
                    "n={n}: got r={:?} split={:?}",
                    p.corank, p.verified
                ));
            }
        }
    }
    CriterionOutcome::new(2, "B = 0 gives O(n) + O(-n-2)", failures, 7)
}

pub fn criterion_route_equivalence() -> CriterionOutcome {
    let mut rng = rng(3);
    let mut failures = Vec::new();
    for i in 0..100 {
        let n = rng.gen_range(0..=3);
        let p = random_potential(&mut rng, n, 4, 1);
        let (a, b) = (build_combinatorial(&p).unwrap(), build_residue(&p).unwrap());
        if a != b {
            failures.push(format!("#{i}: {a:?} != {b:?}"));
        }
    }
    CriterionOutcome::new(
        3,
        "combinatorial and residue constructions agree",
        failures,
        100,
    )
}

fn falling_factorial(d: u32, l: u32) -> i64 {
    (0..l).map(|i| i64::from(d) - i64::from(i)).product()
}

pub fn criterion_derivative_identities() -> CriterionOutcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in 0..=3u32 {
        for d in 1..=4u32 {
            for k in 0..=i64::from(d * n) {
                let w = w_block::<Rational>(n, d, k);
                for l in 1..=3u32 {
                    let mut js = vec![0u32; l as usize];
                    loop {
                        let mut lhs = w.clone();
                        for &j in &js {
                            lhs = lhs.derivative(j as usize);
                        }
                        let shifted = k - js.iter().map(|&j| i64::from(j)).sum::<i64>();
                        let rhs = if l > d {
                            Superpotential::zero(n)
                        } else {
                            w_block::<Rational>(n, d - l, shifted)
                                .scale(&Rational::from_int(falling_factorial(d, l)))
                        };
                        checked += 1;
                        if lhs != rhs {
                            failures.push(format!("n={n} d={d} k={k} js={js:?}"));
                        }
                        let Some(pos) = js.iter().position(|&j| j < n) else {
                            break;
                        };
                        js[pos] += 1;
                        for s in &mut js[..pos] {
                            *s = 0;
                        }
                    }
                }
            }
        }
    }
    CriterionOutcome::new(4, "derivative identities for W_d^(k)", failures, checked)
}

/// Coefficients of `z^-(j+1)` in `dB` equal `dW/dx_j`; coefficients of
/// `z^-(m+1)` in `d^2B` equal `d_i d_j W` for every `i <= j`, `i + j = m`.
pub fn window_identity_failures(p: &GeometricPotential<Rational>, x: &[Rational]) -> Vec<String> {
    let mut failures = Vec::new();
    let n = p.n() as usize;
    let w = build_combinatorial(p).unwrap();
    let g = p.eval_along_section(x, 1).unwrap();
    let grad = w.gradient(x).unwrap();
    for (j, gj) in grad.iter().enumerate() {
        if g.coeff(-(j as i64) - 1) != *gj {
            failures.push(format!("first derivative, j={j}"));
        }
    }
    let beta = p.eval_along_section(x, 2).unwrap();
    let h = w.hessian(x).unwrap();
    for i in 0..=n {
        for j in i..=n {
            if beta.coeff(-((i + j) as i64) - 1) != *h.get(i, j) {
                failures.push(format!("second derivative, (i,j)=({i},{j})"));
            }
        }
    }
    failures
}

pub fn criterion_window_identity() -> CriterionOutcome {
    let mut rng = rng(5);
    let mut failures = Vec::new();
    for i in 0..50 {
        let n = rng.gen_range(0..=3);
        let p = random_potential(&mut rng, n, 4, 1);
        let x = random_point(&mut rng, n);
        for f in window_identity_failures(&p, &x) {
            failures.push(format!("#{i}: {f}"));
        }
    }
    CriterionOutcome::new(5, "principal-part window identities", failures, 50)
}

pub fn criterion_gluing_exact() -> CriterionOutcome {
    let mut failures = Vec::new();
    let corpus: Vec<_> = quadratic_corpus(200)
        .into_iter()
        .chain(general_corpus(100))
        .collect();
    for (i, (p, x)) in corpus.iter().enumerate() {
        match reconstruct(p, x) {
            Ok(s) => {
                if !verify_gluing(p, &s).ok {
                    failures.push(format!("#{i}: gluing check failed"));
                }
            }
            Err(e) => failures.push(format!("#{i}: {e}")),
        }
    }
    CriterionOutcome::new(
        6,
        "sections glue at every exact critical point",
        failures,
        corpus.len(),
    )
}

pub fn criterion_gluing_obstruction_float() -> CriterionOutcome {
    let mut failures = Vec::new();
    let p = stratified(Rational::one(), Rational::one()).to_float();
    let eps = Complex::new(1e-3, 0.0);
    let cs = [1.0, -1.0, 2.0, -1.0 / 3.0];
    for c in cs {
        let x = [eps, Complex::new(c, 0.0)];
        match reconstruct(&p, &x) {
            Err(Error::Obstruction { offending })
                if offending.iter().all(|(e, _)| *e > 0) && !offending.is_empty() => {}
            other => failures.push(format!("c={c}: expected obstruction, got {other:?}")),
        }
        let report = verify_gluing(&p, &assemble(&p, &x).unwrap());
        if report.ok {
            failures.push(format!("c={c}: perturbed section passed gluing"));
        }
        let on = [Complex::new(0.0, 0.0), Complex::new(c, 0.0)];
        match reconstruct(&p, &on) {
            Ok(s) if verify_gluing(&p, &s).ok => {}
            _ => failures.push(format!("c={c}: unperturbed section failed")),
        }
    }
    CriterionOutcome::new(
        6,
        "perturbed sections are obstructed (FLOAT)",
        failures,
        cs.len(),
    )
}

pub fn criterion_stratified_family() -> CriterionOutcome {
    let mut failures = Vec::new();
    let p = stratified(Rational::one(), Rational::one());
    let third = Rational::new((-1).into(), 3.into());
    let cases = [
        (Rational::from_int(1), 1usize, SplittingType { a: 0, b: -2 }),
        (Rational::from_int(-1), 1, SplittingType { a: 0, b: -2 }),
        (Rational::from_int(2), 1, SplittingType { a: 0, b: -2 }),
        (third, 2, SplittingType { a: 1, b: -3 }),
    ];
    let w = build_combinatorial(&p).unwrap();
    for (c, r, split) in &cases {
        let x = [Rational::zero(), c.clone()];
        let h = w.hessian(&x).unwrap();
        let expected = vec![
            vec![
                Rational::from_int(6) * c + Rational::from_int(2),
                Rational::zero(),
            ],
            vec![Rational::zero(), Rational::zero()],
        ];
        if h.rows() != expected.as_slice() {
            failures.push(format!("c={c}: Hessian {:?}", h.rows()));
        }
        match ferrari_check(&p, &x) {
            Ok(a) => {
                if a.hessian_corank != *r
                    || a.verified != *split
                    || a.predicted != *split
                    || !a.agrees
                {
                    failures.push(format!(
                        "c={c}: r={} verified={}",
                        a.hessian_corank, a.verified
                    ));
                }
            }
            Err(e) => failures.push(format!("c={c}: {e}")),
        }
    }
    CriterionOutcome::new(7, "stratified cubic family", failures, cases.len())
}

fn fd_gradient(w: &Superpotential<Complex>, x: &[Complex], h: f64) -> Vec<Complex> {
    (0..x.len())
        .map(|j| {
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[j] += h;
            minus[j] -= h;
            (w.evaluate(&plus).unwrap() - w.evaluate(&minus).unwrap()) / (2.0 * h)
        })
        .collect()
}

fn random_complex(rng: &mut impl Rng, radius: f64) -> Complex {
    let r = radius * rng.gen::<f64>().sqrt();
    Complex::from_polar(r, std::f64::consts::TAU * rng.gen::<f64>())
}

pub fn criterion_float_numerics() -> CriterionOutcome {
    let mut failures = Vec::new();
    let mut rng = rng(8);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = rng.gen_range(0..=3);
        let mut p = GeometricPotential::<Complex>::zero(n);
        for _ in 0..rng.gen_range(1..=5) {
            let d = rng.gen_range(1..=4);
            let k = rng.gen_range(0..=i64::from(d) * i64::from(n));
            p.add_term(d, k, random_complex(&mut rng, 2.0)).unwrap();
        }
        let w = build_combinatorial(&p).unwrap();
        let x: Vec<Complex> = (0..=n).map(|_| random_complex(&mut rng, 1.0)).collect();
        let exact = w.gradient(&x).unwrap();
        let approx = fd_gradient(&w, &x, 1e-5);
        let num: f64 = exact
            .iter()
            .zip(&approx)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den: f64 = exact.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let rel = if den == 0.0 { num } else { num / den };
        worst = worst.max(rel);
        if rel > 1e-6 {
            failures.push(format!("gradient pair #{i}: relative error {rel:e}"));
        }
    }

    let mut roots_checked = 0;
    while roots_checked < 20 {
        let count = rng.gen_range(1..=5);
        let mut roots: Vec<Complex> = Vec::new();
        while roots.len() < count {
            let r = random_complex(&mut rng, 1.0);
            if roots.iter().all(|s| (s - r).norm() >= 0.1) {
                roots.push(r);
            }
        }
        // W' = lead * prod (x - r), W = integral; W_d^(0) = x_0^d at n = 0
        let lead = random_complex(&mut rng, 2.0) + Complex::new(0.5, 0.0);
        let mut dw = vec![lead];
        for r in &roots {
            let mut next = vec![Complex::zero(); dw.len() + 1];
            for (i, c) in dw.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            dw = next;
        }
        let terms = dw
            .iter()
            .enumerate()
            .map(|(i, c)| (i as u32 + 1, 0i64, c / (i as f64 + 1.0)));
        let p = GeometricPotential::new(0, terms).unwrap();
        let w = build_combinatorial(&p).unwrap();
        let companion = solve_univariate(&w).unwrap();
        let starts = default_starts(
            0,
            DEFAULT_STARTS,
            DEFAULT_START_RADIUS,
            SEED + roots_checked as u64,
        );
        let newton = solve_newton(&w, &starts, DEFAULT_TOL).unwrap();
        let a: Vec<Complex> = companion.iter().map(|p| p.x[0]).collect();
        let b: Vec<Complex> = newton.points.iter().map(|p| p.x[0]).collect();
        let hausdorff = hausdorff(&a, &b);
        if a.len() != count || hausdorff > 1e-8 {
            failures.push(format!(
                "root set #{roots_checked}: {} companion vs {} Newton roots, Hausdorff {hausdorff:e}",
                a.len(),
                b.len()
            ));
        }
        roots_checked += 1;
    }
    let mut out = CriterionOutcome::new(
        8,
        "FLOAT gradient and root-finding cross-checks",
        failures,
        120,
    );
    if out.passed {
        out.detail = format!("{}; worst gradient relative error {worst:.2e}", out.detail);
    }
    out
}

fn hausdorff(a: &[Complex], b: &[Complex]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.len() == b.len() {
            0.0
        } else {
            f64::INFINITY
        };
    }
    let one_way = |u: &[Complex], v: &[Complex]| {
        u.iter()
            .map(|p| {
                v.iter()
                    .map(|q| (p - q).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

pub fn criterion_oracle_stability() -> CriterionOutcome {
    let mut failures = Vec::new();
    let corpus: Vec<_> = quadratic_corpus(200)
        .into_iter()
        .chain(general_corpus(100))
        .collect();
    for (i, (p, x)) in corpus.iter().enumerate() {
        let Ok(m) = normal_transition(p, x) else {
            failures.push(format!("#{i}: point not critical"));
            continue;
        };
        let n = p.n();
        // D = n, n+1, n+2, n+3, plus the default bound and three beyond it
        let default = m.default_s2_bound();
        let reference = h0_oracle(&m).h0;
        let mut bounds: Vec<u32> = (n..=n + 3).collect();
        bounds.extend(default..=default + 3);
        for d in bounds {
            let h0 = h0_with_bound(&m, d).h0;
            if h0 != reference {
                failures.push(format!(
                    "#{i}: D={d} gives h0={h0}, default gives {reference}"
                ));
            }
        }
        let window = crate::bundle::TransitionMatrix {
            n,
            beta: m.beta.restrict(-2 * i64::from(n) - 1, -1),
        };
        if h0_oracle(&window).h0 != reference {
            failures.push(format!("#{i}: window restriction changes h0"));
        }
    }
    CriterionOutcome::new(9, "h0 oracle is truncation-stable", failures, corpus.len())
}

/// Ferrari invariant over the general corpus (origin and stratified points).
pub fn criterion_general_ferrari() -> CriterionOutcome {
    let mut failures = Vec::new();
    let corpus = general_corpus(100);
    for (i, (p, x)) in corpus.iter().enumerate() {
        match ferrari_check(p, x) {
            Ok(a) if a.agrees && a.verified.degree() == -2 => {}
            Ok(a) => failures.push(format!("#{i}: r={} h0={}", a.hessian_corank, a.oracle_h0)),
            Err(e) => failures.push(format!("#{i}: {e}")),
        }
    }
    CriterionOutcome::new(
        1,
        "Ferrari property on higher-degree potentials",
        failures,
        corpus.len(),
    )
}

/// The checks that need no floating point.
pub fn exact_suite() -> Vec<CriterionOutcome> {
    vec![
        criterion_quadratic_ferrari(),
        criterion_zero_potential(),
        criterion_route_equivalence(),
        criterion_derivative_identities(),
        criterion_window_identity(),
        criterion_gluing_exact(),
        criterion_stratified_family(),
        criterion_oracle_stability(),
        criterion_general_ferrari(),
    ]
}
