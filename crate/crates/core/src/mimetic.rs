//! Reduction, reconstruction and projection of fields.
//!
//! Reduction integrates a continuous field over the cells of one kind.
//! Reconstruction expands a cochain in tensor products of Lagrange
//! polynomials (along directions where the cell is a point) and edge
//! polynomials (along directions the cell spans). Edge factors carry the
//! inverse half-width of the element so that reducing a reconstructed
//! field returns its cochain exactly.

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::basis::{GaussRule, SpectralBasis};
use crate::topology::{CellComplex, FormKind, IncidenceMatrix, MeshSpec, Species};
use crate::{Error, Point, Result};

/// Cell complex paired with the 1D bases of matching degree.
#[derive(Debug, Clone)]
pub struct Discretization {
    complex: CellComplex,
    basis: SpectralBasis,
}

impl Discretization {
    pub fn new(spec: MeshSpec) -> Result<Self> {
        let basis = SpectralBasis::new(spec.degree)?;
        let complex = CellComplex::new(spec)?;
        Ok(Self { complex, basis })
    }

    pub fn complex(&self) -> &CellComplex {
        &self.complex
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.complex.dim()
    }

    pub fn degree(&self) -> usize {
        self.complex.degree()
    }

    pub fn spec(&self) -> &MeshSpec {
        self.complex.spec()
    }

    /// Half element width along `d` (the affine Jacobian factor).
    pub fn jacobian(&self, d: usize) -> f64 {
        0.5 * self.spec().element_size(d)
    }

    /// Basis values at reference coordinates `xi`.
    pub fn tabulate(&self, xi: [f64; 3]) -> Tabulation {
        let n = self.degree();
        let mut tab = Tabulation {
            nodal: Default::default(),
            nodal_deriv: Default::default(),
            edge: Default::default(),
        };
        let mut scratch = vec![0.0; n + 1];
        for d in 0..self.dim() {
            let jac = self.jacobian(d);
            let mut l = vec![0.0; n + 1];
            let mut dl = vec![0.0; n + 1];
            let mut e = vec![0.0; n];
            self.basis.lagrange.values_into(xi[d], &mut l);
            self.basis.lagrange.derivs_into(xi[d], &mut dl);
            self.basis.edge.values_into(xi[d], &mut e, &mut scratch);
            dl.iter_mut().for_each(|v| *v /= jac);
            e.iter_mut().for_each(|v| *v /= jac);
            tab.nodal[d] = l;
            tab.nodal_deriv[d] = dl;
            tab.edge[d] = e;
        }
        tab
    }

    /// Calls `f(global_id, component, value)` for every basis function of
    /// `kind` supported on `elem`. With `deriv = Some(d)` the factor along
    /// `d` is differentiated; `d` must be a direction the species does not
    /// span (the only derivatives grad, curl and div need).
    pub fn for_each_basis(
        &self,
        kind: FormKind,
        elem: [usize; 3],
        tab: &Tabulation,
        deriv: Option<usize>,
        mut f: impl FnMut(usize, Option<usize>, f64),
    ) {
        let dim = self.dim();
        let n = self.degree();
        for sp in self.complex.kind_species(kind) {
            if let Some(d) = deriv {
                if sp.spans[d] {
                    continue;
                }
            }
            let comp = kind.component(sp, dim);
            let mut axes: [Vec<(usize, f64)>; 3] = Default::default();
            for (d, axis) in axes.iter_mut().enumerate() {
                *axis = if d >= dim {
                    vec![(0, 1.0)]
                } else if sp.spans[d] {
                    (1..=n).map(|i| (elem[d] * n + i - 1, tab.edge[d][i - 1])).collect()
                } else if deriv == Some(d) {
                    (0..=n).map(|i| (elem[d] * n + i, tab.nodal_deriv[d][i])).collect()
                } else {
                    (0..=n).map(|i| (elem[d] * n + i, tab.nodal[d][i])).collect()
                };
            }
            for &(gz, vz) in &axes[2] {
                for &(gy, vy) in &axes[1] {
                    let vyz = vy * vz;
                    for &(gx, vx) in &axes[0] {
                        f(sp.id([gx, gy, gz]), comp, vx * vyz);
                    }
                }
            }
        }
    }

    /// Tensor Gauss rule with `m` points per direction on `elem`:
    /// `(physical point, reference point, weight × |J|)`.
    pub fn element_quadrature(&self, elem: [usize; 3], rule: &GaussRule) -> Vec<(Point, [f64; 3], f64)> {
        let dim = self.dim();
        let det: f64 = (0..dim).map(|d| self.jacobian(d)).product();
        let m = rule.len();
        let total = m.pow(dim as u32);
        let mut out = Vec::with_capacity(total);
        for q in 0..total {
            let mut xi = [0.0; 3];
            let mut w = det;
            let mut rest = q;
            for slot in xi.iter_mut().take(dim) {
                let i = rest % m;
                rest /= m;
                *slot = rule.points()[i];
                w *= rule.weights()[i];
            }
            out.push((self.complex.map_point(elem, xi), xi, w));
        }
        out
    }
}

/// Per-direction 1D basis values at one reference point. Edge values and
/// nodal derivatives are already divided by the element half-width.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub nodal: [Vec<f64>; 3],
    pub nodal_deriv: [Vec<f64>; 3],
    pub edge: [Vec<f64>; 3],
}

/// Degrees of freedom of one kind, one real per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Cochain {
    kind: FormKind,
    values: Vec<f64>,
}

impl Cochain {
    pub fn new(complex: &CellComplex, kind: FormKind, values: Vec<f64>) -> Result<Self> {
        let expected = complex.kind_count(kind);
        if values.len() != expected {
            return Err(Error::CochainLength {
                expected,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("{kind} cochain")));
        }
        Ok(Self { kind, values })
    }

    pub fn zeros(complex: &CellComplex, kind: FormKind) -> Self {
        Self {
            kind,
            values: vec![0.0; complex.kind_count(kind)],
        }
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Applies an incidence matrix whose domain is this cochain's kind.
    pub fn apply(&self, m: &IncidenceMatrix) -> Result<Cochain> {
        if m.from != self.kind {
            return Err(Error::KindMismatch(format!(
                "matrix acts on {} cochains, got {}",
                m.from, self.kind
            )));
        }
        Ok(Cochain {
            kind: m.to,
            values: m.apply(&self.values),
        })
    }
}

/// Owned scalar field.
pub type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
/// Owned vector field; 2D fields leave the third component at zero.
pub type VectorFn = Arc<dyn Fn(&Point) -> [f64; 3] + Send + Sync>;

/// Continuous field handed to [`reduce`].
#[derive(Clone, Copy)]
pub enum Analytic<'a> {
    Scalar(&'a (dyn Fn(&Point) -> f64 + Sync)),
    Vector(&'a (dyn Fn(&Point) -> [f64; 3] + Sync)),
}

impl Analytic<'_> {
    fn component(&self, x: &Point, comp: Option<usize>) -> f64 {
        match (self, comp) {
            (Analytic::Scalar(f), _) => f(x),
            (Analytic::Vector(f), Some(c)) => f(x)[c],
            (Analytic::Vector(f), None) => f(x)[0],
        }
    }
}

/// Reduction: integrates `field` over every cell of `kind` with a Gauss
/// rule of `N + 2` points per spanned direction.
pub fn reduce(disc: &Discretization, kind: FormKind, field: Analytic<'_>) -> Result<Cochain> {
    match (kind.is_vector(), field) {
        (true, Analytic::Vector(_)) | (false, Analytic::Scalar(_)) => {}
        _ => {
            return Err(Error::KindMismatch(format!(
                "{kind} cochains need a {} field",
                if kind.is_vector() { "vector" } else { "scalar" }
            )))
        }
    }
    let complex = disc.complex();
    let rule = GaussRule::new(disc.degree() + 2)?;
    let mut values = vec![0.0; complex.kind_count(kind)];
    for sp in complex.kind_species(kind) {
        for idx in sp.indices() {
            values[sp.id(idx)] = reduce_cell(disc, kind, sp, idx, field, &rule)?;
        }
    }
    Ok(Cochain { kind, values })
}

/// Reduction restricted to the listed cells of `kind`.
pub fn reduce_cells(disc: &Discretization, kind: FormKind, ids: &[usize], field: Analytic<'_>) -> Result<Vec<f64>> {
    let complex = disc.complex();
    let rule = GaussRule::new(disc.degree() + 2)?;
    let k = kind.cell_dim(disc.dim());
    ids.iter()
        .map(|&id| {
            let (s, idx) = complex.locate_cell(k, id);
            reduce_cell(disc, kind, &complex.species(k)[s], idx, field, &rule)
        })
        .collect()
}

fn reduce_cell(
    disc: &Discretization,
    kind: FormKind,
    sp: &Species,
    idx: [usize; 3],
    field: Analytic<'_>,
    rule: &GaussRule,
) -> Result<f64> {
    let dim = disc.dim();
    let comp = kind.component(sp, dim);
    let spanned: Vec<usize> = sp.spanned(dim).collect();
    let m = rule.len();
    let total = m.pow(spanned.len() as u32);
    let ext = disc.complex().cell_extent(sp, idx);
    let mut base = [0.0; 3];
    for d in 0..dim {
        base[d] = ext[d].0;
    }
    let mut sum = 0.0;
    for q in 0..total {
        let mut x = base;
        let mut w = 1.0;
        let mut rest = q;
        for &d in &spanned {
            let i = rest % m;
            rest /= m;
            let (a, b) = ext[d];
            let half = 0.5 * (b - a);
            x[d] = 0.5 * (a + b) + half * rule.points()[i];
            w *= half * rule.weights()[i];
        }
        sum += w * field.component(&x, comp);
    }
    if !sum.is_finite() {
        return Err(Error::NonFinite(format!("reduction onto {kind} cell {}", sp.id(idx))));
    }
    Ok(sum)
}

/// A cochain together with its reconstruction, evaluable anywhere in the
/// domain.
#[derive(Debug, Clone)]
pub struct DiscreteField<'a> {
    disc: &'a Discretization,
    cochain: Cochain,
}

/// Reconstruction operator.
pub fn reconstruct(disc: &Discretization, cochain: Cochain) -> Result<DiscreteField<'_>> {
    let expected = disc.complex().kind_count(cochain.kind());
    if cochain.values().len() != expected {
        return Err(Error::CochainLength {
            expected,
            got: cochain.values().len(),
        });
    }
    Ok(DiscreteField { disc, cochain })
}

/// Projection `π_h = reconstruct ∘ reduce`.
pub fn project<'a>(disc: &'a Discretization, kind: FormKind, field: Analytic<'_>) -> Result<DiscreteField<'a>> {
    reconstruct(disc, reduce(disc, kind, field)?)
}

impl<'a> DiscreteField<'a> {
    pub fn kind(&self) -> FormKind {
        self.cochain.kind()
    }

    pub fn cochain(&self) -> &Cochain {
        &self.cochain
    }

    pub fn discretization(&self) -> &'a Discretization {
        self.disc
    }

    /// Value at reference point `xi` of element `elem`; scalar kinds put
    /// their value in component 0.
    pub fn value_in(&self, elem: [usize; 3], tab: &Tabulation) -> [f64; 3] {
        let vals = self.cochain.values();
        let mut out = [0.0; 3];
        self.disc.for_each_basis(self.kind(), elem, tab, None, |id, comp, b| {
            out[comp.unwrap_or(0)] += vals[id] * b;
        });
        out
    }

    pub fn value(&self, x: &Point) -> Result<[f64; 3]> {
        let (elem, xi) = self.disc.complex().locate_point(x)?;
        Ok(self.value_in(elem, &self.disc.tabulate(xi)))
    }

    pub fn scalar(&self, x: &Point) -> Result<f64> {
        if self.kind().is_vector() {
            return Err(Error::KindMismatch(format!("{} field is a vector", self.kind())));
        }
        Ok(self.value(x)?[0])
    }

    /// `∂_d` of every component at `(elem, xi)`.
    fn partial_in(&self, elem: [usize; 3], tab: &Tabulation, d: usize) -> [f64; 3] {
        let vals = self.cochain.values();
        let mut out = [0.0; 3];
        self.disc
            .for_each_basis(self.kind(), elem, tab, Some(d), |id, comp, b| {
                out[comp.unwrap_or(0)] += vals[id] * b;
            });
        out
    }

    /// Divergence of a flux field by direct differentiation of the basis.
    pub fn divergence_in(&self, elem: [usize; 3], tab: &Tabulation) -> Result<f64> {
        if self.kind() != FormKind::Flux {
            return Err(Error::KindMismatch("divergence needs a flux field".into()));
        }
        Ok((0..self.disc.dim()).map(|d| self.partial_in(elem, tab, d)[d]).sum())
    }

    pub fn divergence(&self, x: &Point) -> Result<f64> {
        let (elem, xi) = self.disc.complex().locate_point(x)?;
        self.divergence_in(elem, &self.disc.tabulate(xi))
    }

    /// Gradient of a nodal field.
    pub fn gradient_in(&self, elem: [usize; 3], tab: &Tabulation) -> Result<[f64; 3]> {
        if self.kind() != FormKind::Nodal {
            return Err(Error::KindMismatch("gradient needs a nodal field".into()));
        }
        let mut g = [0.0; 3];
        for (d, slot) in g.iter_mut().enumerate().take(self.disc.dim()) {
            *slot = self.partial_in(elem, tab, d)[0];
        }
        Ok(g)
    }

    /// Curl of a circulation field (a scalar in component 0 in 2D), or the
    /// rotor `(∂_y σ, -∂_x σ)` of a 2D nodal field.
    pub fn curl_in(&self, elem: [usize; 3], tab: &Tabulation) -> Result<[f64; 3]> {
        match (self.disc.dim(), self.kind()) {
            (2, FormKind::Nodal) => {
                let g = self.gradient_in(elem, tab)?;
                Ok([g[1], -g[0], 0.0])
            }
            (2, FormKind::Circulation) => {
                let dx = self.partial_in(elem, tab, 0);
                let dy = self.partial_in(elem, tab, 1);
                Ok([dx[1] - dy[0], 0.0, 0.0])
            }
            (3, FormKind::Circulation) => {
                let dx = self.partial_in(elem, tab, 0);
                let dy = self.partial_in(elem, tab, 1);
                let dz = self.partial_in(elem, tab, 2);
                Ok([dy[2] - dz[1], dz[0] - dx[2], dx[1] - dy[0]])
            }
            (dim, kind) => Err(Error::KindMismatch(format!("curl of a {kind} field in {dim}D"))),
        }
    }

    pub fn curl(&self, x: &Point) -> Result<[f64; 3]> {
        let (elem, xi) = self.disc.complex().locate_point(x)?;
        self.curl_in(elem, &self.disc.tabulate(xi))
    }
}

/// The discrete derivatives of the complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    Grad,
    /// 2D rotor of a scalar.
    Rot,
    /// 3D curl.
    Curl,
    /// 2D curl of a vector, a scalar.
    ScalarCurl,
    Div,
}

impl Derivative {
    pub fn available(dim: usize) -> &'static [Derivative] {
        if dim == 2 {
            &[
                Derivative::Grad,
                Derivative::ScalarCurl,
                Derivative::Rot,
                Derivative::Div,
            ]
        } else {
            &[Derivative::Grad, Derivative::Curl, Derivative::Div]
        }
    }

    pub fn matrix(self, complex: &CellComplex) -> Result<IncidenceMatrix> {
        match self {
            Derivative::Grad => Ok(complex.grad_matrix()),
            Derivative::Rot => complex.rot_matrix(),
            Derivative::Curl => complex.curl_matrix(),
            Derivative::ScalarCurl => complex.scalar_curl_matrix(),
            Derivative::Div => Ok(complex.div_matrix()),
        }
    }
}

/// Residuals of the two commuting squares for one derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutationReport {
    pub derivative: Derivative,
    /// `max |ℛ(d f) - M ℛ(f)|`.
    pub reduction_residual: f64,
    /// `max(1, max |ℛ(d f)|)`, the scale of the relative residuals.
    pub scale: f64,
    /// The above divided by `scale`.
    pub reduction_relative: f64,
    /// `max |d(ℐa) - ℐ(M a)|` over random sample points, `a = ℛ f`.
    pub reconstruction_residual: f64,
}

/// Checks `ℛ d = M ℛ` and `d ℐ = ℐ M` for a field whose derivative
/// `dfield` is known analytically.
pub fn check_commutation(
    disc: &Discretization,
    derivative: Derivative,
    field: Analytic<'_>,
    dfield: Analytic<'_>,
    samples: usize,
    seed: u64,
) -> Result<CommutationReport> {
    let complex = disc.complex();
    let m = derivative.matrix(complex)?;
    let a = reduce(disc, m.from, field)?;
    let lhs = reduce(disc, m.to, dfield)?;
    let rhs = a.apply(&m)?;
    let reduction_residual = lhs
        .values()
        .iter()
        .zip(rhs.values())
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
    let scale = lhs.max_abs().max(1.0);
    let reduction_relative = reduction_residual / scale;

    let src = reconstruct(disc, a)?;
    let dst = reconstruct(disc, rhs)?;
    let spec = disc.spec();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut reconstruction_residual = 0.0f64;
    for _ in 0..samples {
        let mut x = [0.0; 3];
        for d in 0..disc.dim() {
            x[d] = rng.random_range(spec.lo[d]..spec.hi[d]);
        }
        let (elem, xi) = complex.locate_point(&x)?;
        let tab = disc.tabulate(xi);
        let direct: [f64; 3] = match derivative {
            Derivative::Grad => src.gradient_in(elem, &tab)?,
            Derivative::Rot | Derivative::Curl | Derivative::ScalarCurl => src.curl_in(elem, &tab)?,
            Derivative::Div => [src.divergence_in(elem, &tab)?, 0.0, 0.0],
        };
        let via_matrix = dst.value_in(elem, &tab);
        for c in 0..3 {
            reconstruction_residual = reconstruction_residual.max((direct[c] - via_matrix[c]).abs());
        }
    }
    Ok(CommutationReport {
        derivative,
        reduction_residual,
        scale,
        reduction_relative,
        reconstruction_residual,
    })
}
