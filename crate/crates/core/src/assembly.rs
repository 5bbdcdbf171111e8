//! Mass matrices and the mixed vorticity-velocity-pressure Stokes system.
//!
//! The unknowns are ordered `[ω, u_free, p, λ]`: all vorticity dofs, the
//! velocity fluxes not fixed by the boundary condition, all pressure dofs
//! and one multiplier enforcing zero mean pressure. The matrix is
//! symmetric and indefinite:
//!
//! ```text
//! [ M_W        -(Cᵀ M_V)_F   0           0 ] [ ω   ]   [ t + (Cᵀ M_V)_B u_B ]
//! [ -(M_V C)_F  0            (Dᵀ M_Q)_F  0 ] [ u_F ] = [ -g_F               ]
//! [ 0           (M_Q D)_F    0           1 ] [ p   ]   [ -(M_Q D)_B u_B     ]
//! [ 0           0            1ᵀ          0 ] [ λ   ]   [ 0                  ]
//! ```
//!
//! `g` pairs the forcing with the velocity basis and `t` is the boundary
//! integral of the prescribed tangential velocity against the vorticity
//! basis.

use crate::basis::GaussRule;
use crate::mimetic::{reduce_cells, Analytic, Discretization, VectorFn};
use crate::sparse::{block_diag, Csr};
use crate::topology::{BoxFace, FormKind, IncidenceMatrix};
use crate::{Error, Point, Result};

/// Vorticity is a nodal scalar in 2D and a circulation field in 3D.
pub fn vorticity_kind(dim: usize) -> FormKind {
    if dim == 2 {
        FormKind::Nodal
    } else {
        FormKind::Circulation
    }
}

/// 1D mass matrix along direction `d` for cells that are points (`false`)
/// or intervals (`true`) along it.
fn mass_1d(disc: &Discretization, d: usize, interval: bool) -> Csr<f64> {
    if d >= disc.dim() {
        return Csr::identity(1, 1.0);
    }
    let n = disc.degree();
    let k = disc.spec().elements[d];
    let jac = disc.jacobian(d);
    let mut trip = Vec::new();
    if interval {
        let e = disc.basis().edge_mass();
        for el in 0..k {
            for i in 0..n {
                for j in 0..n {
                    trip.push((el * n + i, el * n + j, e[i * n + j] / jac));
                }
            }
        }
        Csr::from_triplets(k * n, k * n, trip)
    } else {
        let l = disc.basis().nodal_mass();
        for el in 0..k {
            for i in 0..=n {
                for j in 0..=n {
                    trip.push((el * n + i, el * n + j, l[i * (n + 1) + j] * jac));
                }
            }
        }
        Csr::from_triplets(k * n + 1, k * n + 1, trip)
    }
}

/// Gram matrix `∫ ℐ(e_i) · ℐ(e_j)` of the reconstruction basis of `kind`.
///
/// Each species is a tensor product, so its block is a Kronecker product
/// of 1D matrices; different species never couple.
pub fn mass_matrix(disc: &Discretization, kind: FormKind) -> Csr<f64> {
    let blocks: Vec<Csr<f64>> = disc
        .complex()
        .kind_species(kind)
        .iter()
        .map(|sp| {
            let mx = mass_1d(disc, 0, sp.spans[0]);
            let my = mass_1d(disc, 1, sp.spans[1]);
            let mz = mass_1d(disc, 2, sp.spans[2]);
            mz.kron(&my).kron(&mx)
        })
        .collect();
    block_diag(&blocks)
}

/// Body force and prescribed boundary velocity.
#[derive(Clone)]
pub struct StokesProblem {
    pub forcing: VectorFn,
    /// Evaluated only on the boundary of the domain.
    pub boundary_velocity: VectorFn,
}

/// Boundary flux dofs with their prescribed values, and the boundary term
/// of the vorticity equation.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub flux_ids: Vec<usize>,
    pub flux_values: Vec<f64>,
    /// Outward orientation (`±1`) of each boundary flux.
    pub outward: Vec<f64>,
    /// Boundary integral for every vorticity dof.
    pub tangential: Vec<f64>,
}

impl BoundaryData {
    /// Net outward flux of the prescribed velocity.
    pub fn imbalance(&self) -> f64 {
        self.flux_values.iter().zip(&self.outward).map(|(v, s)| v * s).sum()
    }
}

/// Reduces the boundary velocity onto the boundary faces and integrates
/// its tangential part against the vorticity basis. Rejects data whose net
/// flux does not vanish, since no incompressible flow can match it.
pub fn apply_boundary_conditions(disc: &Discretization, velocity: &VectorFn) -> Result<BoundaryData> {
    let complex = disc.complex();
    let boundary = complex.boundary_fluxes();
    let flux_ids: Vec<usize> = boundary.iter().map(|b| b.1).collect();
    let outward: Vec<f64> = boundary.iter().map(|b| b.2).collect();
    let flux_values = reduce_cells(disc, FormKind::Flux, &flux_ids, Analytic::Vector(&**velocity))?;

    let total: f64 = flux_values.iter().map(|v| v.abs()).sum();
    let data = BoundaryData {
        flux_ids,
        flux_values,
        outward,
        tangential: boundary_term(disc, velocity)?,
    };
    let imbalance = data.imbalance();
    if imbalance.abs() > 1e-8 * total + 1e-13 {
        return Err(Error::InconsistentBoundary { imbalance });
    }
    Ok(data)
}

/// 2D: `∮ σ_i (u·τ) dl` with the counter-clockwise tangent `τ = (-n_y, n_x)`.
/// 3D: `-∮ ε_i · (u × n) dS`.
fn boundary_term(disc: &Discretization, velocity: &VectorFn) -> Result<Vec<f64>> {
    let dim = disc.dim();
    let complex = disc.complex();
    let kind = vorticity_kind(dim);
    let mut t = vec![0.0; complex.kind_count(kind)];
    let rule = GaussRule::new(disc.degree() + 3)?;
    let m = rule.len();
    let k = disc.spec().elements;
    for &face in BoxFace::faces(dim) {
        let a = face.axis();
        let mut n = [0.0; 3];
        n[a] = face.outward();
        let tangent_dirs: Vec<usize> = (0..dim).filter(|&d| d != a).collect();
        let jac: f64 = tangent_dirs.iter().map(|&d| disc.jacobian(d)).product();
        let total = m.pow(tangent_dirs.len() as u32);
        for elem in complex.elements() {
            let on_face = if face.is_upper() {
                elem[a] == k[a] - 1
            } else {
                elem[a] == 0
            };
            if !on_face {
                continue;
            }
            for q in 0..total {
                let mut xi = [0.0; 3];
                xi[a] = if face.is_upper() { 1.0 } else { -1.0 };
                let mut w = jac;
                let mut rest = q;
                for &d in &tangent_dirs {
                    let i = rest % m;
                    rest /= m;
                    xi[d] = rule.points()[i];
                    w *= rule.weights()[i];
                }
                let x = complex.map_point(elem, xi);
                let u = velocity(&x);
                if u.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite(format!("boundary velocity at {x:?}")));
                }
                let tab = disc.tabulate(xi);
                if dim == 2 {
                    let ut = -u[0] * n[1] + u[1] * n[0];
                    disc.for_each_basis(kind, elem, &tab, None, |id, _, b| t[id] += w * b * ut);
                } else {
                    let uxn = cross(&u, &n);
                    disc.for_each_basis(kind, elem, &tab, None, |id, comp, b| {
                        t[id] -= w * b * uxn[comp.unwrap()];
                    });
                }
            }
        }
    }
    Ok(t)
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `g_i = ∫ f · ℐ(e_i)` over every velocity flux dof.
pub fn load_vector(disc: &Discretization, forcing: &VectorFn) -> Result<Vec<f64>> {
    let rule = GaussRule::new(disc.degree() + 3)?;
    let mut g = vec![0.0; disc.complex().kind_count(FormKind::Flux)];
    for elem in disc.complex().elements() {
        for (x, xi, w) in disc.element_quadrature(elem, &rule) {
            let f = forcing(&x);
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("forcing at {x:?}")));
            }
            let tab = disc.tabulate(xi);
            disc.for_each_basis(FormKind::Flux, elem, &tab, None, |id, comp, b| {
                g[id] += w * b * f[comp.unwrap()];
            });
        }
    }
    Ok(g)
}

/// Assembled saddle-point system together with the pieces needed to
/// post-process its solution.
#[derive(Debug, Clone)]
pub struct StokesSystem {
    pub matrix: Csr<f64>,
    pub rhs: Vec<f64>,
    pub vorticity_mass: Csr<f64>,
    pub velocity_mass: Csr<f64>,
    pub pressure_mass: Csr<f64>,
    pub curl: IncidenceMatrix,
    pub div: IncidenceMatrix,
    pub free_fluxes: Vec<usize>,
    pub boundary: BoundaryData,
}

/// Solution vector split into its fields (velocity with boundary values
/// restored).
#[derive(Debug, Clone, PartialEq)]
pub struct Unpacked {
    pub vorticity: Vec<f64>,
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    pub multiplier: f64,
}

impl StokesSystem {
    pub fn n_vorticity(&self) -> usize {
        self.vorticity_mass.nrows()
    }

    pub fn n_free(&self) -> usize {
        self.free_fluxes.len()
    }

    pub fn n_pressure(&self) -> usize {
        self.pressure_mass.nrows()
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn unpack(&self, x: &[f64]) -> Result<Unpacked> {
        if x.len() != self.size() {
            return Err(Error::CochainLength {
                expected: self.size(),
                got: x.len(),
            });
        }
        let (nw, nf, np) = (self.n_vorticity(), self.n_free(), self.n_pressure());
        let mut velocity = vec![0.0; self.velocity_mass.nrows()];
        for (&id, &v) in self.boundary.flux_ids.iter().zip(&self.boundary.flux_values) {
            velocity[id] = v;
        }
        for (k, &id) in self.free_fluxes.iter().enumerate() {
            velocity[id] = x[nw + k];
        }
        Ok(Unpacked {
            vorticity: x[..nw].to_vec(),
            velocity,
            pressure: x[nw + nf..nw + nf + np].to_vec(),
            multiplier: x[nw + nf + np],
        })
    }
}

/// Builds the mixed Stokes system for `problem` on `disc`.
pub fn assemble_stokes(disc: &Discretization, problem: &StokesProblem) -> Result<StokesSystem> {
    let complex = disc.complex();
    let dim = disc.dim();
    let curl = complex.vorticity_curl();
    let div = complex.div_matrix();
    let mw = mass_matrix(disc, vorticity_kind(dim));
    let mv = mass_matrix(disc, FormKind::Flux);
    let mq = mass_matrix(disc, FormKind::Density);

    let boundary = apply_boundary_conditions(disc, &problem.boundary_velocity)?;
    let mut is_boundary = vec![false; complex.kind_count(FormKind::Flux)];
    for &id in &boundary.flux_ids {
        is_boundary[id] = true;
    }
    let free_fluxes: Vec<usize> = (0..is_boundary.len()).filter(|&i| !is_boundary[i]).collect();

    // Cᵀ M_V (vorticity rows, flux columns) and M_Q D (pressure rows, flux columns)
    let ctmv = curl.to_f64().transpose().matmul(&mv);
    let mqd = mq.matmul(&div.to_f64());
    let ctmv_f = ctmv.select_cols(&free_fluxes);
    let ctmv_b = ctmv.select_cols(&boundary.flux_ids);
    let mqd_f = mqd.select_cols(&free_fluxes);
    let mqd_b = mqd.select_cols(&boundary.flux_ids);

    let (nw, nf, np) = (mw.nrows(), free_fluxes.len(), mq.nrows());
    let (ou, op, ol) = (nw, nw + nf, nw + nf + np);
    let size = ol + 1;
    let mut trip = Vec::with_capacity(mw.nnz() + 2 * ctmv_f.nnz() + 2 * mqd_f.nnz() + 2 * np);
    trip.extend(mw.triplets());
    for (r, c, v) in ctmv_f.triplets() {
        trip.push((r, ou + c, -v));
        trip.push((ou + c, r, -v));
    }
    for (r, c, v) in mqd_f.triplets() {
        trip.push((op + r, ou + c, v));
        trip.push((ou + c, op + r, v));
    }
    for i in 0..np {
        trip.push((op + i, ol, 1.0));
        trip.push((ol, op + i, 1.0));
    }
    let matrix = Csr::from_triplets(size, size, trip);

    let g = load_vector(disc, &problem.forcing)?;
    let mut rhs = vec![0.0; size];
    let lift_w = ctmv_b.mul_vec(&boundary.flux_values);
    for i in 0..nw {
        rhs[i] = boundary.tangential[i] + lift_w[i];
    }
    for (k, &id) in free_fluxes.iter().enumerate() {
        rhs[ou + k] = -g[id];
    }
    let lift_p = mqd_b.mul_vec(&boundary.flux_values);
    for i in 0..np {
        rhs[op + i] = -lift_p[i];
    }

    Ok(StokesSystem {
        matrix,
        rhs,
        vorticity_mass: mw,
        velocity_mass: mv,
        pressure_mass: mq,
        curl,
        div,
        free_fluxes,
        boundary,
    })
}

/// Zero forcing and zero boundary velocity.
pub fn homogeneous_problem() -> StokesProblem {
    let zero: VectorFn = std::sync::Arc::new(|_: &Point| [0.0; 3]);
    StokesProblem {
        forcing: zero.clone(),
        boundary_velocity: zero,
    }
}
