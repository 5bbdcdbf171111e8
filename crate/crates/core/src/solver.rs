//! Sparse direct solve of the Stokes system and post-processing.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::ldlt::factor::LdltRegularization;
use faer::prelude::Solve;
use faer::sparse::linalg::cholesky::{factorize_symbolic_cholesky, SymmetricOrdering};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{Col, Conj, Mat, Par, Side};

use crate::assembly::{assemble_stokes, vorticity_kind, StokesProblem, StokesSystem};
use crate::mimetic::{reconstruct, Cochain, DiscreteField, Discretization};
use crate::sparse::Csr;
use crate::topology::FormKind;
use crate::{Error, Point, Result};

/// Normwise backward error accepted after refinement.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Diagonal shift of the quasi-definite factorization, relative to `‖A‖∞`.
const REGULARIZATION: f64 = 1e-8;

const MAX_REFINEMENT: usize = 10;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, a| m.max(a.abs()))
}

fn matrix_inf_norm(matrix: &Csr<f64>) -> f64 {
    (0..matrix.nrows())
        .map(|i| matrix.row(i).map(|(_, v)| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn check_shape(matrix: &Csr<f64>, rhs: &[f64]) -> Result<()> {
    if matrix.ncols() != matrix.nrows() || rhs.len() != matrix.nrows() {
        return Err(Error::Solver(format!(
            "shape mismatch: {}x{} matrix, {} right-hand side",
            matrix.nrows(),
            matrix.ncols(),
            rhs.len()
        )));
    }
    Ok(())
}

/// Iterative refinement of `A x = b` with an approximate inverse `solve`.
///
/// Steps are taken while the componentwise backward error
/// `max_i |r_i| / (|A| |x| + |b|)_i` decreases, so rows with small entries
/// are resolved to their own scale. Returns the best iterate and its
/// normwise backward error `‖r‖∞ / (‖A‖∞ ‖x‖∞ + ‖b‖∞)`.
fn refine(
    matrix: &Csr<f64>,
    rhs: &[f64],
    mut x: Vec<f64>,
    steps: usize,
    mut solve: impl FnMut(&[f64]) -> Vec<f64>,
) -> (Vec<f64>, f64) {
    let componentwise = |x: &[f64]| -> (Vec<f64>, f64) {
        let mut r = Vec::with_capacity(rhs.len());
        let mut worst = 0.0f64;
        for (i, b) in rhs.iter().enumerate() {
            let (mut ax, mut scale) = (0.0, b.abs());
            for (j, a) in matrix.row(i) {
                ax += a * x[j];
                scale += (a * x[j]).abs();
            }
            let ri = b - ax;
            if ri != 0.0 {
                worst = worst.max(if scale > 0.0 { ri.abs() / scale } else { f64::INFINITY });
            }
            r.push(ri);
        }
        (r, if worst.is_nan() { f64::INFINITY } else { worst })
    };
    let (mut r, mut cw) = componentwise(&x);
    for _ in 0..steps {
        if cw <= f64::EPSILON {
            break;
        }
        let dx = solve(&r);
        let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
        let (r_new, cw_new) = componentwise(&trial);
        if cw_new >= cw {
            break;
        }
        (x, r, cw) = (trial, r_new, cw_new);
    }
    let denom = matrix_inf_norm(matrix) * inf_norm(&x) + inf_norm(rhs);
    let normwise = if denom == 0.0 { 0.0 } else { inf_norm(&r) / denom };
    (x, if normwise.is_finite() { normwise } else { f64::INFINITY })
}

fn accept(x: Vec<f64>, backward: f64) -> Result<(Vec<f64>, f64)> {
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::Singular { index });
    }
    if backward > RESIDUAL_TOLERANCE {
        return Err(Error::Solver(format!(
            "backward error {backward:.3e} exceeds {RESIDUAL_TOLERANCE:e}; the system is numerically singular"
        )));
    }
    Ok((x, backward))
}

/// Solves `A x = b` by sparse LU with partial pivoting plus iterative
/// refinement. Returns the solution and its backward error
/// `‖Ax - b‖∞ / (‖A‖∞ ‖x‖∞ + ‖b‖∞)`.
pub fn solve_sparse(matrix: &Csr<f64>, rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
    check_shape(matrix, rhs)?;
    let n = matrix.nrows();
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let lu = matrix.to_faer().sp_lu().map_err(|e| match e {
        LuError::SymbolicSingular { index } => Error::Singular { index },
        LuError::Generic(g) => Error::Solver(format!("{g:?}")),
    })?;
    let solve = |b: &[f64]| -> Vec<f64> {
        let mut col = Col::<f64>::from_fn(n, |i| b[i]);
        lu.solve_in_place(col.as_mut());
        (0..n).map(|i| col[i]).collect()
    };
    let x = solve(rhs);
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::Singular { index });
    }
    let (x, backward) = refine(matrix, rhs, x, 3, solve);
    accept(x, backward)
}

/// Upper triangle of the symmetric `matrix` in CSC form with
/// `signs[i] * delta` placed on every zero diagonal entry.
fn shifted_upper(matrix: &Csr<f64>, signs: &[i8], delta: f64) -> SparseColMat<usize, f64> {
    let n = matrix.nrows();
    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut row_idx = Vec::new();
    let mut vals = Vec::new();
    col_ptr.push(0);
    for j in 0..n {
        let mut diag = 0.0;
        for (i, v) in matrix.row(j) {
            if i < j {
                row_idx.push(i);
                vals.push(v);
            } else if i == j {
                diag = v;
            }
        }
        row_idx.push(j);
        vals.push(if diag == 0.0 { f64::from(signs[j]) * delta } else { diag });
        col_ptr.push(row_idx.len());
    }
    let symbolic = SymbolicSparseColMat::new_checked(n, n, col_ptr, None, row_idx);
    SparseColMat::new(symbolic, vals)
}

/// Solves the symmetric indefinite `A x = b` whose unknowns split into a
/// `+` group with a positive semidefinite diagonal block and a `-` group
/// with a negative semidefinite one, as given by `signs`.
///
/// Shifting the zero diagonal entries by `δ` with the given sign makes the
/// matrix quasi-definite, so it has an `LDLᵀ` factorization under any
/// symmetric ordering; AMD keeps the fill low. Iterative refinement
/// against `A` then removes the shift. Falls back to [`solve_sparse`] if
/// refinement stalls above the tolerance.
pub fn solve_quasi_definite(matrix: &Csr<f64>, rhs: &[f64], signs: &[i8]) -> Result<(Vec<f64>, f64)> {
    check_shape(matrix, rhs)?;
    let n = matrix.nrows();
    if signs.len() != n || signs.iter().any(|s| s.abs() != 1) {
        return Err(Error::Solver("pivot signs must be ±1, one per unknown".into()));
    }
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let delta = REGULARIZATION * matrix_inf_norm(matrix).max(f64::MIN_POSITIVE);
    let a = shifted_upper(matrix, signs, delta);
    let factored = (|| {
        let symbolic =
            factorize_symbolic_cholesky(a.symbolic(), Side::Upper, SymmetricOrdering::Amd, Default::default()).ok()?;
        let mut values = vec![0.0; symbolic.len_val()];
        let mut buf = MemBuffer::try_new(
            symbolic
                .factorize_numeric_ldlt_scratch::<f64>(Par::Seq, Default::default())
                .or(symbolic.solve_in_place_scratch::<f64>(1, Par::Seq)),
        )
        .ok()?;
        let stack = MemStack::new(&mut buf);
        let regularization = LdltRegularization {
            dynamic_regularization_signs: Some(signs),
            dynamic_regularization_delta: delta,
            dynamic_regularization_epsilon: 1e-3 * delta,
        };
        let ldlt = symbolic
            .factorize_numeric_ldlt(
                &mut values,
                a.as_ref(),
                Side::Upper,
                regularization,
                Par::Seq,
                stack,
                Default::default(),
            )
            .ok()?;
        let solve = |b: &[f64]| -> Vec<f64> {
            let mut m = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
            ldlt.solve_in_place_with_conj(Conj::No, m.as_mut(), Par::Seq, stack);
            (0..n).map(|i| m[(i, 0)]).collect()
        };
        Some(refine(matrix, rhs, vec![0.0; n], MAX_REFINEMENT, solve))
    })();
    match factored {
        Some((x, backward)) if backward <= RESIDUAL_TOLERANCE => accept(x, backward),
        _ => solve_sparse(matrix, rhs),
    }
}

/// Expected pivot signs of the Stokes system: `+` for vorticity and
/// pressure, `-` for velocity and the gauge multiplier.
pub fn pivot_signs(system: &StokesSystem) -> Vec<i8> {
    let (nw, nu, np) = (system.n_vorticity(), system.n_free(), system.n_pressure());
    let mut signs = vec![1i8; nw];
    signs.extend(std::iter::repeat_n(-1, nu));
    signs.extend(std::iter::repeat_n(1, np));
    signs.resize(system.size(), -1);
    signs
}

/// Discrete vorticity, velocity and pressure of one Stokes solve.
#[derive(Debug, Clone)]
pub struct StokesSolution<'a> {
    disc: &'a Discretization,
    pub vorticity: Cochain,
    pub velocity: Cochain,
    pub pressure: Cochain,
    /// Lagrange multiplier of the zero-mean pressure constraint.
    pub multiplier: f64,
    pub backward_error: f64,
    pub unknowns: usize,
}

/// Assembles and solves the Stokes problem.
pub fn solve_stokes<'a>(disc: &'a Discretization, problem: &StokesProblem) -> Result<StokesSolution<'a>> {
    let system = assemble_stokes(disc, problem)?;
    solve_system(disc, &system)
}

pub fn solve_system<'a>(disc: &'a Discretization, system: &StokesSystem) -> Result<StokesSolution<'a>> {
    let (x, backward_error) = solve_quasi_definite(&system.matrix, &system.rhs, &pivot_signs(system))?;
    let parts = system.unpack(&x)?;
    let complex = disc.complex();
    Ok(StokesSolution {
        disc,
        vorticity: Cochain::new(complex, vorticity_kind(disc.dim()), parts.vorticity)?,
        velocity: Cochain::new(complex, FormKind::Flux, parts.velocity)?,
        pressure: Cochain::new(complex, FormKind::Density, parts.pressure)?,
        multiplier: parts.multiplier,
        backward_error,
        unknowns: system.size(),
    })
}

/// Reconstructed fields at one point. Scalars use component 0 of the
/// vector slots (2D vorticity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub point: Point,
    pub velocity: [f64; 3],
    pub vorticity: [f64; 3],
    pub pressure: f64,
    /// Divergence of the reconstructed velocity by direct differentiation.
    pub divergence: f64,
}

impl<'a> StokesSolution<'a> {
    pub fn discretization(&self) -> &'a Discretization {
        self.disc
    }

    pub fn velocity_field(&self) -> DiscreteField<'a> {
        reconstruct(self.disc, self.velocity.clone()).expect("velocity cochain matches its complex")
    }

    pub fn vorticity_field(&self) -> DiscreteField<'a> {
        reconstruct(self.disc, self.vorticity.clone()).expect("vorticity cochain matches its complex")
    }

    pub fn pressure_field(&self) -> DiscreteField<'a> {
        reconstruct(self.disc, self.pressure.clone()).expect("pressure cochain matches its complex")
    }

    /// `D u`: the cell-integrated divergence.
    pub fn divergence_cochain(&self) -> Cochain {
        self.velocity
            .apply(&self.disc.complex().div_matrix())
            .expect("div acts on flux cochains")
    }

    /// Reconstruction of `D u`, equal to the divergence of the
    /// reconstructed velocity.
    pub fn divergence_field(&self) -> DiscreteField<'a> {
        reconstruct(self.disc, self.divergence_cochain()).expect("density cochain matches its complex")
    }

    pub fn sample(&self, x: &Point) -> Result<Sample> {
        let (elem, xi) = self.disc.complex().locate_point(x)?;
        let tab = self.disc.tabulate(xi);
        let u = self.velocity_field();
        Ok(Sample {
            point: *x,
            velocity: u.value_in(elem, &tab),
            vorticity: self.vorticity_field().value_in(elem, &tab),
            pressure: self.pressure_field().value_in(elem, &tab)[0],
            divergence: u.divergence_in(elem, &tab)?,
        })
    }

    /// Samples on a uniform grid with `resolution + 1` points per
    /// direction, x fastest.
    pub fn sample_grid(&self, resolution: usize) -> Result<Vec<Sample>> {
        grid_points(self.disc, resolution)
            .iter()
            .map(|x| self.sample(x))
            .collect()
    }

    /// Samples on the plane `x[axis] = value` (3D), `resolution + 1`
    /// points per in-plane direction.
    pub fn sample_plane(&self, axis: usize, value: f64, resolution: usize) -> Result<Vec<Sample>> {
        if self.disc.dim() != 3 {
            return Err(Error::WrongDimension {
                op: "plane slice",
                dim: self.disc.dim(),
            });
        }
        let spec = self.disc.spec();
        let dirs: Vec<usize> = (0..3).filter(|&d| d != axis).collect();
        let r = resolution.max(1);
        let mut out = Vec::with_capacity((r + 1) * (r + 1));
        for j in 0..=r {
            for i in 0..=r {
                let mut x = [0.0; 3];
                x[axis] = value;
                for (&d, t) in dirs.iter().zip([i, j]) {
                    x[d] = spec.lo[d] + (spec.hi[d] - spec.lo[d]) * t as f64 / r as f64;
                }
                out.push(self.sample(&x)?);
            }
        }
        Ok(out)
    }
}

/// Uniform grid over the domain, `resolution + 1` points per direction.
pub fn grid_points(disc: &Discretization, resolution: usize) -> Vec<Point> {
    let spec = disc.spec();
    let dim = disc.dim();
    let r = resolution.max(1);
    let total = (r + 1).pow(dim as u32);
    (0..total)
        .map(|q| {
            let mut x = [0.0; 3];
            let mut rest = q;
            for (d, slot) in x.iter_mut().enumerate().take(dim) {
                let i = rest % (r + 1);
                rest /= r + 1;
                *slot = spec.lo[d] + (spec.hi[d] - spec.lo[d]) * i as f64 / r as f64;
            }
            x
        })
        .collect()
}
