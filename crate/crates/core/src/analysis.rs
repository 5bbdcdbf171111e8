//! Error norms, convergence studies and the discrete inf-sup constant.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::assembly::{mass_matrix, StokesProblem};
use crate::basis::GaussRule;
use crate::cases::problem_from_exact;
use crate::mimetic::Discretization;
use crate::solver::{solve_stokes, StokesSolution};
use crate::topology::{FormKind, MeshSpec};
use crate::{Error, Point, Result};

/// Closed-form Stokes solution `curl ω + ∇p = f`, `ω = curl u`,
/// `div u = 0`. In 2D the vorticity is a scalar stored in component 0 and
/// its curl is the rotor `(∂_y ω, -∂_x ω)`.
pub trait ExactSolution: Send + Sync {
    fn dim(&self) -> usize;
    fn velocity(&self, x: &Point) -> [f64; 3];
    fn vorticity(&self, x: &Point) -> [f64; 3];
    fn curl_vorticity(&self, x: &Point) -> [f64; 3];
    fn pressure(&self, x: &Point) -> f64;
    fn pressure_gradient(&self, x: &Point) -> [f64; 3];

    fn forcing(&self, x: &Point) -> [f64; 3] {
        let c = self.curl_vorticity(x);
        let g = self.pressure_gradient(x);
        [c[0] + g[0], c[1] + g[1], c[2] + g[2]]
    }
}

/// Errors of one solve against the exact solution.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorNorms {
    pub omega_l2: f64,
    pub omega_hcurl: f64,
    pub u_l2: f64,
    pub u_hdiv: f64,
    /// After removing the mean of both pressures.
    pub p_l2: f64,
    /// Largest `|div u_h|` seen at the quadrature points.
    pub max_div: f64,
}

fn sq(v: &[f64; 3], w: &[f64; 3]) -> f64 {
    (0..3).map(|c| (v[c] - w[c]).powi(2)).sum()
}

/// Integrates the errors with `N + 3` Gauss points per direction and
/// element.
pub fn error_norms(solution: &StokesSolution<'_>, exact: &dyn ExactSolution) -> Result<ErrorNorms> {
    error_norms_with(solution, exact, solution.discretization().degree() + 3)
}

pub fn error_norms_with(solution: &StokesSolution<'_>, exact: &dyn ExactSolution, points: usize) -> Result<ErrorNorms> {
    let disc = solution.discretization();
    if exact.dim() != disc.dim() {
        return Err(Error::WrongDimension {
            op: "error norms",
            dim: exact.dim(),
        });
    }
    let rule = GaussRule::new(points)?;
    let volume = disc.spec().volume();
    let w = solution.vorticity_field();
    let u = solution.velocity_field();
    let p = solution.pressure_field();
    let p_mean_h: f64 = solution.pressure.values().iter().sum::<f64>() / volume;

    let elements: Vec<[usize; 3]> = disc.complex().elements().collect();
    let mut p_mean = 0.0;
    for &elem in &elements {
        for (x, _, wt) in disc.element_quadrature(elem, &rule) {
            p_mean += wt * exact.pressure(&x);
        }
    }
    p_mean /= volume;

    let mut acc = [0.0f64; 5];
    let mut max_div = 0.0f64;
    for &elem in &elements {
        for (x, xi, wt) in disc.element_quadrature(elem, &rule) {
            let tab = disc.tabulate(xi);
            let wh = w.value_in(elem, &tab);
            let cwh = w.curl_in(elem, &tab)?;
            let uh = u.value_in(elem, &tab);
            let divh = u.divergence_in(elem, &tab)?;
            let ph = p.value_in(elem, &tab)[0] - p_mean_h;
            acc[0] += wt * sq(&wh, &exact.vorticity(&x));
            acc[1] += wt * sq(&cwh, &exact.curl_vorticity(&x));
            acc[2] += wt * sq(&uh, &exact.velocity(&x));
            acc[3] += wt * divh * divh;
            acc[4] += wt * (ph - (exact.pressure(&x) - p_mean)).powi(2);
            max_div = max_div.max(divh.abs());
        }
    }
    Ok(ErrorNorms {
        omega_l2: acc[0].sqrt(),
        omega_hcurl: (acc[0] + acc[1]).sqrt(),
        u_l2: acc[2].sqrt(),
        u_hdiv: (acc[2] + acc[3]).sqrt(),
        p_l2: acc[4].sqrt(),
        max_div,
    })
}

/// Errors below this are treated as round-off when fitting rates.
pub const SATURATION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    /// Least-squares slope of `log e` against `log h` and the RMS residual
    /// of the fit.
    Fitted { rate: f64, residual: f64, points: usize },
    /// Fewer than two meshes.
    NotAvailable,
    /// Errors already at round-off level.
    Saturated,
}

impl Rate {
    pub fn value(&self) -> Option<f64> {
        match self {
            Rate::Fitted { rate, .. } => Some(*rate),
            _ => None,
        }
    }
}

/// Fits the convergence rate over the three finest meshes.
pub fn fit_rate(h: &[f64], err: &[f64]) -> Rate {
    if h.len() != err.len() || h.len() < 2 {
        return Rate::NotAvailable;
    }
    let mut pairs: Vec<(f64, f64)> = h.iter().copied().zip(err.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.truncate(3);
    let usable: Vec<(f64, f64)> = pairs
        .iter()
        .copied()
        .filter(|&(h, e)| h > 0.0 && e > SATURATION && e.is_finite())
        .collect();
    if usable.len() < 2 {
        return Rate::Saturated;
    }
    let n = usable.len() as f64;
    let xs: Vec<f64> = usable.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Rate::NotAvailable;
    }
    let rate = sxy / sxx;
    let icpt = my - rate * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - icpt - rate * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Rate::Fitted {
        rate,
        residual,
        points: usable.len(),
    }
}

/// One mesh of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub dim: usize,
    pub degree: usize,
    pub elements: usize,
    pub h: f64,
    pub unknowns: usize,
    pub errors: ErrorNorms,
}

/// Fitted rates for one polynomial degree.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub degree: usize,
    pub omega_l2: Rate,
    pub omega_hcurl: Rate,
    pub u_l2: Rate,
    pub u_hdiv: Rate,
    pub p_l2: Rate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub rates: Vec<RateRow>,
    /// Meshes whose solve failed; rates use the remaining ones.
    pub failures: Vec<(usize, usize, String)>,
}

impl ConvergenceTable {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Solves on `K^dim` unit-box meshes for every `(N, K)` pair and fits
/// rates per degree. Meshes run in parallel when the `parallel` feature
/// is enabled; the result order does not depend on scheduling.
pub fn convergence_study(exact: Arc<dyn ExactSolution>, degrees: &[usize], elements: &[usize]) -> ConvergenceTable {
    let dim = exact.dim();
    let problem = problem_from_exact(exact.clone());
    let jobs: Vec<(usize, usize)> = degrees
        .iter()
        .flat_map(|&n| elements.iter().map(move |&k| (n, k)))
        .collect();
    let run = |&(n, k): &(usize, usize)| -> Result<ConvergenceRow> { study_row(&*exact, &problem, dim, n, k) };

    #[cfg(feature = "parallel")]
    let results: Vec<Result<ConvergenceRow>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<ConvergenceRow>> = jobs.iter().map(run).collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for ((n, k), r) in jobs.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => failures.push((*n, *k, e.to_string())),
        }
    }
    let rates = degrees
        .iter()
        .map(|&n| {
            let sel: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.degree == n).collect();
            let h: Vec<f64> = sel.iter().map(|r| r.h).collect();
            let fit = |f: fn(&ErrorNorms) -> f64| fit_rate(&h, &sel.iter().map(|r| f(&r.errors)).collect::<Vec<_>>());
            RateRow {
                degree: n,
                omega_l2: fit(|e| e.omega_l2),
                omega_hcurl: fit(|e| e.omega_hcurl),
                u_l2: fit(|e| e.u_l2),
                u_hdiv: fit(|e| e.u_hdiv),
                p_l2: fit(|e| e.p_l2),
            }
        })
        .collect();
    ConvergenceTable { rows, rates, failures }
}

fn study_row(
    exact: &dyn ExactSolution,
    problem: &StokesProblem,
    dim: usize,
    n: usize,
    k: usize,
) -> Result<ConvergenceRow> {
    let disc = Discretization::new(MeshSpec::unit(dim, k, n)?)?;
    let sol = solve_stokes(&disc, problem)?;
    Ok(ConvergenceRow {
        dim,
        degree: n,
        elements: k,
        h: disc.spec().h(),
        unknowns: sol.unknowns,
        errors: error_norms(&sol, exact)?,
    })
}

/// Discrete inf-sup constant of the velocity-pressure pairing with
/// no-flux boundary conditions.
///
/// Solves `B A⁻¹ Bᵀ q = λ M_Q q` with `B = M_Q D` on the interior fluxes
/// and `A = M_V + Dᵀ M_Q D` the H(div) inner product, and returns the
/// square root of the smallest eigenvalue once the constant pressure
/// mode is removed.
pub fn inf_sup_constant(disc: &Discretization) -> Result<f64> {
    Ok(inf_sup_spectrum(disc)?[0].sqrt())
}

/// Eigenvalues `λ` of the pairing, ascending, with the constant pressure
/// mode deflated.
pub fn inf_sup_spectrum(disc: &Discretization) -> Result<Vec<f64>> {
    let complex = disc.complex();
    let div = complex.div_matrix().to_f64();
    let mv = mass_matrix(disc, FormKind::Flux);
    let mq = mass_matrix(disc, FormKind::Density);
    let mut boundary = vec![false; complex.kind_count(FormKind::Flux)];
    for (_, id, _) in complex.boundary_fluxes() {
        boundary[id] = true;
    }
    let free: Vec<usize> = (0..boundary.len()).filter(|&i| !boundary[i]).collect();
    let mqd = mq.matmul(&div);
    let b = mqd.select_cols(&free).to_dense();
    let gram = mv
        .add(&div.transpose().matmul(&mqd))
        .select_rows(&free)
        .select_cols(&free)
        .to_dense();
    let mq = mq.to_dense();

    let a_chol = gram
        .cholesky()
        .ok_or_else(|| Error::Eigen("velocity Gram matrix is not positive definite".into()))?;
    let s = &b * a_chol.solve(&b.transpose());
    let q_chol = mq
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Eigen("pressure mass matrix is not positive definite".into()))?;
    let l = q_chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Eigen("singular Cholesky factor".into()))?;
    let mut t = &linv * s * linv.transpose();
    t = (&t + t.transpose()) * 0.5;
    let eig = SymmetricEigen::new(t);

    // constant pressure: the cochain of cell volumes, mapped by Lᵀ
    let ones = DMatrix::from_element(mq.nrows(), 1, 1.0);
    let c = q_chol.solve(&ones);
    let y = l.transpose() * c;
    let y = &y / y.norm();
    let mut best = 0;
    let mut best_align = -1.0;
    for j in 0..eig.eigenvalues.len() {
        let align = eig.eigenvectors.column(j).dot(&y.column(0)).abs();
        if align > best_align {
            best_align = align;
            best = j;
        }
    }
    let mut values: Vec<f64> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != best)
        .map(|(_, v)| *v)
        .collect();
    values.sort_by(f64::total_cmp);
    if values.is_empty() {
        return Err(Error::Eigen("no pressure modes besides the constant".into()));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::{Manufactured2d, Trig2d, Trig3d};

    #[test]
    fn rate_fit_states() {
        assert_eq!(fit_rate(&[0.5], &[1e-3]), Rate::NotAvailable);
        assert_eq!(fit_rate(&[0.5, 0.25], &[1e-14, 1e-15]), Rate::Saturated);
        let h = [0.5, 0.25, 0.125, 0.0625];
        let e: Vec<f64> = h.iter().map(|h: &f64| 3.0 * h.powi(2)).collect();
        match fit_rate(&h, &e) {
            Rate::Fitted { rate, residual, points } => {
                assert!((rate - 2.0).abs() < 1e-12);
                assert!(residual < 1e-12);
                assert_eq!(points, 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn quadrature_order_does_not_change_norms() {
        let d = Discretization::new(MeshSpec::unit(2, 2, 3).unwrap()).unwrap();
        let e = Manufactured2d;
        let sol = solve_stokes(&d, &problem_from_exact(Arc::new(e))).unwrap();
        let a = error_norms(&sol, &e).unwrap();
        let b = error_norms_with(&sol, &e, d.degree() + 5).unwrap();
        for (x, y) in [(a.omega_hcurl, b.omega_hcurl), (a.u_hdiv, b.u_hdiv), (a.p_l2, b.p_l2)] {
            assert!((x - y).abs() <= 0.05 * y, "{x} vs {y}");
        }
        // div u_h vanishes, so the H(div) and L² velocity errors agree
        assert!((a.u_hdiv - a.u_l2).abs() < 1e-12);
        assert!(a.max_div < 1e-10);
    }

    #[test]
    fn nonhomogeneous_flows_converge() {
        for exact in [Arc::new(Trig2d::default()) as Arc<dyn ExactSolution>, Arc::new(Trig3d)] {
            let dim = exact.dim();
            let ks: &[usize] = if dim == 2 { &[2, 4] } else { &[1, 2] };
            let t = convergence_study(exact, &[2], ks);
            assert!(t.is_complete());
            let (c, f) = (&t.rows[0].errors, &t.rows[1].errors);
            assert!(f.u_hdiv < 0.4 * c.u_hdiv, "{dim}D {c:?} -> {f:?}");
            assert!(f.omega_hcurl < 0.4 * c.omega_hcurl, "{dim}D {c:?} -> {f:?}");
            assert!(f.p_l2 < 0.4 * c.p_l2, "{dim}D {c:?} -> {f:?}");
            assert!(f.max_div < 1e-10);
        }
    }

    #[test]
    fn inf_sup_positive_on_small_mesh() {
        let d = Discretization::new(MeshSpec::unit(2, 2, 2).unwrap()).unwrap();
        let spec = inf_sup_spectrum(&d).unwrap();
        assert!(spec[0] > 1e-3);
        assert!(spec[spec.len() - 1] <= 1.0 + 1e-10, "{spec:?}");
    }
}
