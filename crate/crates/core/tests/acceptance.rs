//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on
//! any failure.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use mimetic_core::analysis::{convergence_study, inf_sup_constant, ExactSolution, Rate};
use mimetic_core::assembly::mass_matrix;
use mimetic_core::basis::{GaussRule, SpectralBasis};
use mimetic_core::cases::{Case, Manufactured2d, Trig2d, Trig3d};
use mimetic_core::mimetic::{check_commutation, project, reconstruct, Analytic, Cochain, Derivative, Discretization};
use mimetic_core::solver::{grid_points, solve_stokes};
use mimetic_core::topology::{CellComplex, FormKind, MeshSpec};
use mimetic_core::Point;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn unit(dim: usize, k: usize, n: usize) -> Discretization {
    Discretization::new(MeshSpec::unit(dim, k, n).unwrap()).unwrap()
}

fn topological_exactness() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for dim in [2, 3] {
        for k in 1..=4 {
            for n in 1..=4 {
                let c = CellComplex::new(MeshSpec::unit(dim, k, n).unwrap()).unwrap();
                let g = c.grad_matrix();
                let d = c.div_matrix();
                let (cg, dc) = if dim == 3 {
                    let curl = c.curl_matrix().unwrap();
                    (g.then(&curl), curl.then(&d))
                } else {
                    (
                        g.then(&c.scalar_curl_matrix().unwrap()),
                        c.rot_matrix().unwrap().then(&d),
                    )
                };
                if !cg.is_zero() || !dc.is_zero() {
                    return outcome(false, format!("non-zero product at dim={dim} K={k} N={n}"));
                }
                checked += 1;
            }
        }
    }
    let t = start.elapsed();
    outcome(
        t < Duration::from_secs(5),
        format!(
            "{checked} complexes, all products exactly zero, {:.2} s",
            t.as_secs_f64()
        ),
    )
}

fn pointwise_divergence_free() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for (case, k, n, res) in [(Case::Lid2d, 2, 8, 49), (Case::Lid3d, 2, 4, 19)] {
        let disc = unit(case.dim(), k, n);
        let sol = match solve_stokes(&disc, &case.problem()) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("{case}: {e}")),
        };
        let u = sol.velocity_field();
        let div = sol.divergence_field();
        let mut max_u = 0.0f64;
        let mut max_div = 0.0f64;
        for x in grid_points(&disc, res) {
            let (elem, xi) = disc.complex().locate_point(&x).unwrap();
            let tab = disc.tabulate(xi);
            let v = u.value_in(elem, &tab);
            max_u = max_u.max(v.iter().map(|c| c * c).sum::<f64>().sqrt());
            max_div = max_div
                .max(u.divergence_in(elem, &tab).unwrap().abs())
                .max(div.value_in(elem, &tab)[0].abs());
        }
        let ratio = max_div / max_u;
        worst = worst.max(ratio);
        notes.push(format!("{case} K={k} N={n}: max|div|/max|u| = {ratio:.1e}"));
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-10 && t < Duration::from_secs(60),
        format!("{}, {:.1} s", notes.join("; "), t.as_secs_f64()),
    )
}

fn optimal_convergence() -> Outcome {
    let start = Instant::now();
    let table = convergence_study(Arc::new(Manufactured2d), &[2, 3], &[2, 4, 8, 16]);
    if !table.is_complete() {
        return outcome(false, format!("failed meshes: {:?}", table.failures));
    }
    let mut pass = true;
    let mut notes = Vec::new();
    for r in &table.rates {
        let n = r.degree as f64;
        for (name, rate) in [("omega Hcurl", r.omega_hcurl), ("u Hdiv", r.u_hdiv), ("p L2", r.p_l2)] {
            match rate {
                Rate::Fitted { rate, .. } => {
                    pass &= (rate - n).abs() <= 0.25;
                    notes.push(format!("N={} {name} {rate:.2}", r.degree));
                }
                other => {
                    pass = false;
                    notes.push(format!("N={} {name} {other:?}", r.degree));
                }
            }
        }
    }
    let t = start.elapsed();
    pass &= t < Duration::from_secs(600);
    outcome(pass, format!("{}, {:.1} s", notes.join(", "), t.as_secs_f64()))
}

/// Polynomial `Σ c x^a y^b z^c` with exact partial derivatives.
#[derive(Clone)]
struct Poly(Vec<(f64, [i32; 3])>);

impl Poly {
    fn random(rng: &mut StdRng, dim: usize, degree: i32) -> Self {
        let mut terms = Vec::new();
        let top = |d: usize| if d < dim { degree } else { 0 };
        for a in 0..=top(0) {
            for b in 0..=top(1) {
                for c in 0..=top(2) {
                    terms.push((rng.random_range(-1.0..1.0), [a, b, c]));
                }
            }
        }
        Poly(terms)
    }

    fn eval(&self, x: &Point) -> f64 {
        self.0
            .iter()
            .map(|(c, e)| c * x[0].powi(e[0]) * x[1].powi(e[1]) * x[2].powi(e[2]))
            .sum()
    }

    fn partial(&self, d: usize) -> Poly {
        Poly(
            self.0
                .iter()
                .filter(|(_, e)| e[d] > 0)
                .map(|(c, e)| {
                    let mut e2 = *e;
                    e2[d] -= 1;
                    (c * e[d] as f64, e2)
                })
                .collect(),
        )
    }
}

fn commuting_diagrams() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut fields = 0;
    for (dim, k, n) in [(2, 2, 3), (3, 2, 2)] {
        let disc = unit(dim, k, n);
        for &der in Derivative::available(dim) {
            for trial in 0..100 {
                let p: Vec<Poly> = (0..dim).map(|_| Poly::random(&mut rng, dim, n as i32)).collect();
                let s = p[0].clone();
                let vec3 = |x: &Point| -> [f64; 3] {
                    let mut v = [0.0; 3];
                    for (c, q) in p.iter().enumerate() {
                        v[c] = q.eval(x);
                    }
                    v
                };
                let sx: Vec<Poly> = (0..3).map(|d| s.partial(d)).collect();
                let grad = |x: &Point| [sx[0].eval(x), sx[1].eval(x), if dim == 3 { sx[2].eval(x) } else { 0.0 }];
                let rot = |x: &Point| [sx[1].eval(x), -sx[0].eval(x), 0.0];
                let dp: Vec<Vec<Poly>> = p.iter().map(|q| (0..3).map(|d| q.partial(d)).collect()).collect();
                let curl = |x: &Point| {
                    [
                        dp[2][1].eval(x) - dp[1][2].eval(x),
                        dp[0][2].eval(x) - dp[2][0].eval(x),
                        dp[1][0].eval(x) - dp[0][1].eval(x),
                    ]
                };
                let scurl = |x: &Point| dp[1][0].eval(x) - dp[0][1].eval(x);
                let div = |x: &Point| (0..dim).map(|d| dp[d][d].eval(x)).sum::<f64>();
                let scalar = |x: &Point| s.eval(x);
                let (f, df) = match der {
                    Derivative::Grad => (Analytic::Scalar(&scalar), Analytic::Vector(&grad)),
                    Derivative::Rot => (Analytic::Scalar(&scalar), Analytic::Vector(&rot)),
                    Derivative::Curl => (Analytic::Vector(&vec3), Analytic::Vector(&curl)),
                    Derivative::ScalarCurl => (Analytic::Vector(&vec3), Analytic::Scalar(&scurl)),
                    Derivative::Div => (Analytic::Vector(&vec3), Analytic::Scalar(&div)),
                };
                let r = match check_commutation(&disc, der, f, df, 5, trial) {
                    Ok(r) => r,
                    Err(e) => return outcome(false, format!("{dim}D {der:?}: {e}")),
                };
                worst = worst.max(r.reduction_relative).max(r.reconstruction_residual / r.scale);
                fields += 1;
            }
        }
    }

    // div π_h u for divergence-free analytic u
    let mut div_err = 0.0f64;
    let flows: [(usize, Arc<dyn ExactSolution>); 2] = [(2, Arc::new(Trig2d::default())), (3, Arc::new(Trig3d))];
    for (dim, exact) in flows {
        let disc = unit(dim, 2, 3);
        let u = |x: &Point| exact.velocity(x);
        let pu = project(&disc, FormKind::Flux, Analytic::Vector(&u)).unwrap();
        let rule = GaussRule::new(disc.degree() + 3).unwrap();
        let mut acc = 0.0;
        for elem in disc.complex().elements() {
            for (_, xi, w) in disc.element_quadrature(elem, &rule) {
                let d = pu.divergence_in(elem, &disc.tabulate(xi)).unwrap();
                acc += w * d * d;
            }
        }
        div_err = div_err.max(acc.sqrt());
    }
    outcome(
        worst < 1e-10 && div_err < 1e-10,
        format!("{fields} random polynomial fields, worst relative residual {worst:.1e}; ‖div π_h u‖ = {div_err:.1e}"),
    )
}

fn basis_duality() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=12 {
        let b = SpectralBasis::new(n).unwrap();
        let x = b.rule.nodes();
        for i in 0..=n {
            for (j, xj) in x.iter().enumerate() {
                let v = b.lagrange.eval(i, *xj).unwrap();
                worst = worst.max((v - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        let g = GaussRule::new(n + 1).unwrap();
        for i in 1..=n {
            for j in 1..=n {
                let v = g.integrate_on(x[j - 1], x[j], |t| b.edge.eval(i, t).unwrap());
                worst = worst.max((v - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    outcome(worst < 1e-12, format!("N = 1..12, worst deviation {worst:.1e}"))
}

fn discrete_lbb() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut notes = Vec::new();
    for (dim, n, ks) in [(2, 2, vec![1, 2, 3, 4]), (2, 3, vec![1, 2, 3]), (3, 2, vec![1, 2])] {
        let betas: Vec<f64> = ks
            .iter()
            .map(|&k| inf_sup_constant(&unit(dim, k, n)).unwrap_or(f64::NAN))
            .collect();
        let max = betas.iter().copied().fold(f64::MIN, f64::max);
        let min = betas.iter().copied().fold(f64::MAX, f64::min);
        let spread = (max - min) / max;
        pass &= betas.iter().all(|b| *b > 0.0) && spread < 0.25;
        let list: Vec<String> = betas.iter().map(|b| format!("{b:.4}")).collect();
        notes.push(format!(
            "{dim}D N={n} K={ks:?}: β = [{}], spread {:.1}%",
            list.join(", "),
            100.0 * spread
        ));
    }
    let t = start.elapsed();
    pass &= t < Duration::from_secs(30);
    outcome(pass, format!("{}; {:.1} s", notes.join("; "), t.as_secs_f64()))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for dim in [2, 3] {
        for k in 1..=2 {
            for n in 1..=3 {
                let disc = Discretization::new(
                    MeshSpec::new(dim, &vec![k; dim], n, &vec![0.0; dim], &[1.0, 0.7, 1.3][..dim]).unwrap(),
                )
                .unwrap();
                let rule = GaussRule::new(n + 3).unwrap();
                for kind in FormKind::ALL {
                    let m = mass_matrix(&disc, kind);
                    let len = disc.complex().kind_count(kind);
                    let mut random = || -> Vec<f64> { (0..len).map(|_| rng.random_range(-1.0..1.0)).collect() };
                    let (a, b) = (random(), random());
                    let mb = m.mul_vec(&b);
                    let fast: f64 = a.iter().zip(&mb).map(|(x, y)| x * y).sum();
                    let fa = reconstruct(&disc, Cochain::new(disc.complex(), kind, a).unwrap()).unwrap();
                    let fb = reconstruct(&disc, Cochain::new(disc.complex(), kind, b).unwrap()).unwrap();
                    let mut slow = 0.0;
                    let mut scale = 0.0;
                    for elem in disc.complex().elements() {
                        for (_, xi, w) in disc.element_quadrature(elem, &rule) {
                            let tab = disc.tabulate(xi);
                            let (va, vb) = (fa.value_in(elem, &tab), fb.value_in(elem, &tab));
                            let dot: f64 = (0..3).map(|c| va[c] * vb[c]).sum();
                            slow += w * dot;
                            scale += w * dot.abs();
                        }
                    }
                    worst = worst.max((fast - slow).abs() / scale);
                    cases += 1;
                }
            }
        }
    }
    outcome(
        worst < 1e-10,
        format!("{cases} pairings, worst relative gap {worst:.1e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("topological exactness", topological_exactness),
        ("pointwise divergence-free lid-driven flow", pointwise_divergence_free),
        ("optimal convergence on the manufactured flow", optimal_convergence),
        ("commuting diagrams", commuting_diagrams),
        ("basis duality", basis_duality),
        ("discrete inf-sup stability", discrete_lbb),
        ("mass matrices against quadrature", oracle_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!(
            "{} [{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
