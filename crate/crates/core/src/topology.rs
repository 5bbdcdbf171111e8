//! Oriented tensor-product cell complexes and their incidence matrices.
//!
//! A box mesh of `K_x × K_y (× K_z)` spectral elements of degree `N` is,
//! topologically, the product of 1D complexes with `K N + 1` points per
//! direction. Every k-cell is identified by which directions it spans
//! with an interval (its *species*) and by a lexicographic tensor index,
//! `x` fastest.
//!
//! All cells are oriented along the positive coordinate axes. The four
//! [`FormKind`]s differ in how a cochain value is read: tangential
//! circulation along lines, or flux through (dim-1)-cells in the positive
//! normal direction (outer orientation). The sign conventions of the
//! incidence matrices encode this difference.

use std::fmt;
use std::io::{self, Write};

use crate::basis::gll_rule;
use crate::sparse::Csr;
use crate::{Error, Point, Result};

/// Faces of the box domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoxFace {
    XMinus,
    XPlus,
    YMinus,
    YPlus,
    ZMinus,
    ZPlus,
}

impl BoxFace {
    pub const ALL: [BoxFace; 6] = [
        BoxFace::XMinus,
        BoxFace::XPlus,
        BoxFace::YMinus,
        BoxFace::YPlus,
        BoxFace::ZMinus,
        BoxFace::ZPlus,
    ];

    pub fn new(axis: usize, upper: bool) -> Self {
        Self::ALL[2 * axis + upper as usize]
    }

    pub fn axis(self) -> usize {
        self as usize / 2
    }

    pub fn is_upper(self) -> bool {
        self as usize % 2 == 1
    }

    /// Sign of the outward normal along [`Self::axis`].
    pub fn outward(self) -> f64 {
        if self.is_upper() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn faces(dim: usize) -> &'static [BoxFace] {
        &Self::ALL[..2 * dim]
    }
}

impl fmt::Display for BoxFace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let axis = ["x", "y", "z"][self.axis()];
        let sign = if self.is_upper() { "+" } else { "-" };
        write!(f, "{axis}{sign}")
    }
}

/// Axis-aligned box mesh description.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshSpec {
    pub dim: usize,
    pub elements: [usize; 3],
    pub degree: usize,
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl MeshSpec {
    pub fn new(dim: usize, elements: &[usize], degree: usize, lo: &[f64], hi: &[f64]) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidMesh(format!("dimension must be 2 or 3, got {dim}")));
        }
        if elements.len() != dim || lo.len() != dim || hi.len() != dim {
            return Err(Error::InvalidMesh(format!(
                "expected {dim} entries for elements and bounds"
            )));
        }
        let mut spec = Self {
            dim,
            elements: [1; 3],
            degree,
            lo: [0.0; 3],
            hi: [0.0; 3],
        };
        spec.elements[..dim].copy_from_slice(elements);
        spec.lo[..dim].copy_from_slice(lo);
        spec.hi[..dim].copy_from_slice(hi);
        spec.validate()?;
        Ok(spec)
    }

    /// Unit square or cube with `k` elements per direction.
    pub fn unit(dim: usize, k: usize, degree: usize) -> Result<Self> {
        Self::new(dim, &vec![k; dim], degree, &vec![0.0; dim], &vec![1.0; dim])
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree == 0 {
            return Err(Error::ZeroDegree(0));
        }
        for d in 0..self.dim {
            if self.elements[d] == 0 {
                return Err(Error::InvalidMesh(format!("element count along axis {d} is zero")));
            }
            if !(self.hi[d] > self.lo[d]) || !self.lo[d].is_finite() || !self.hi[d].is_finite() {
                return Err(Error::InvalidMesh(format!(
                    "bounds along axis {d} must satisfy lo < hi, got [{}, {}]",
                    self.lo[d], self.hi[d]
                )));
            }
        }
        Ok(())
    }

    pub fn element_size(&self, d: usize) -> f64 {
        (self.hi[d] - self.lo[d]) / self.elements[d] as f64
    }

    /// Mesh parameter: the largest element edge.
    pub fn h(&self) -> f64 {
        (0..self.dim).map(|d| self.element_size(d)).fold(0.0, f64::max)
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|d| self.hi[d] - self.lo[d]).product()
    }
}

/// How the values of a cochain are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormKind {
    /// Point values.
    Nodal,
    /// Tangential line integrals `∫ w·t dl`.
    Circulation,
    /// Normal fluxes `∫ u·n dS` through (dim-1)-cells.
    Flux,
    /// Cell integrals `∫ p dV`.
    Density,
}

impl FormKind {
    pub const ALL: [FormKind; 4] = [
        FormKind::Nodal,
        FormKind::Circulation,
        FormKind::Flux,
        FormKind::Density,
    ];

    pub fn cell_dim(self, dim: usize) -> usize {
        match self {
            FormKind::Nodal => 0,
            FormKind::Circulation => 1,
            FormKind::Flux => dim - 1,
            FormKind::Density => dim,
        }
    }

    /// Whether the reconstructed field is a vector.
    pub fn is_vector(self) -> bool {
        matches!(self, FormKind::Circulation | FormKind::Flux)
    }

    /// Vector component carried by a species of this kind, if any.
    pub fn component(self, species: &Species, dim: usize) -> Option<usize> {
        match self {
            FormKind::Circulation => species.spanned(dim).next(),
            FormKind::Flux => species.fixed(dim).next(),
            _ => None,
        }
    }

    /// Orientation of a cell species relative to the cubical orientation.
    /// Flux cells are oriented by their positive normal, which flips the
    /// cells whose normal is the odd axis.
    fn orientation(self, species: &Species, dim: usize) -> i64 {
        match self {
            FormKind::Flux => {
                let normal = species.fixed(dim).next().unwrap();
                if normal.is_multiple_of(2) {
                    1
                } else {
                    -1
                }
            }
            _ => 1,
        }
    }
}

impl fmt::Display for FormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FormKind::Nodal => "nodal",
            FormKind::Circulation => "circulation",
            FormKind::Flux => "flux",
            FormKind::Density => "density",
        };
        f.write_str(name)
    }
}

/// One family of k-cells sharing the same spanned directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Species {
    /// `spans[d]` is true when the cell extends over an interval along `d`.
    pub spans: [bool; 3],
    pub shape: [usize; 3],
    pub offset: usize,
}

impl Species {
    pub fn count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn local_id(&self, idx: [usize; 3]) -> usize {
        idx[0] + self.shape[0] * (idx[1] + self.shape[1] * idx[2])
    }

    pub fn id(&self, idx: [usize; 3]) -> usize {
        self.offset + self.local_id(idx)
    }

    pub fn index(&self, local: usize) -> [usize; 3] {
        let i0 = local % self.shape[0];
        let rest = local / self.shape[0];
        [i0, rest % self.shape[1], rest / self.shape[1]]
    }

    pub fn spanned(&self, dim: usize) -> impl Iterator<Item = usize> + '_ {
        (0..dim).filter(move |&d| self.spans[d])
    }

    pub fn fixed(&self, dim: usize) -> impl Iterator<Item = usize> + '_ {
        (0..dim).filter(move |&d| !self.spans[d])
    }

    pub fn indices(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        (0..self.count()).map(move |l| self.index(l))
    }
}

/// Oriented cell complex of a box mesh.
#[derive(Debug, Clone)]
pub struct CellComplex {
    spec: MeshSpec,
    coords: [Vec<f64>; 3],
    species: Vec<Vec<Species>>,
    counts: Vec<usize>,
}

impl CellComplex {
    pub fn new(spec: MeshSpec) -> Result<Self> {
        spec.validate()?;
        let dim = spec.dim;
        let n = spec.degree;
        let rule = gll_rule(n)?;
        let mut npts = [1usize; 3];
        for d in 0..dim {
            npts[d] = spec.elements[d]
                .checked_mul(n)
                .and_then(|v| v.checked_add(1))
                .ok_or_else(|| Error::Overflow(format!("points along axis {d}")))?;
        }
        let mut coords: [Vec<f64>; 3] = [vec![0.0], vec![0.0], vec![0.0]];
        for d in 0..dim {
            let h = spec.element_size(d);
            let mut c = Vec::with_capacity(npts[d]);
            for e in 0..spec.elements[d] {
                let a = spec.lo[d] + e as f64 * h;
                for &xi in &rule.nodes()[..n] {
                    c.push(a + 0.5 * (xi + 1.0) * h);
                }
            }
            c.push(spec.hi[d]);
            coords[d] = c;
        }

        let mut species = Vec::with_capacity(dim + 1);
        let mut counts = Vec::with_capacity(dim + 1);
        for k in 0..=dim {
            let mut list = Vec::new();
            let mut offset = 0usize;
            for spans in species_masks(dim, k) {
                let mut shape = [1usize; 3];
                for d in 0..dim {
                    shape[d] = if spans[d] { npts[d] - 1 } else { npts[d] };
                }
                let count = shape
                    .iter()
                    .try_fold(1usize, |acc, &s| acc.checked_mul(s))
                    .ok_or_else(|| Error::Overflow(format!("{k}-cells")))?;
                list.push(Species { spans, shape, offset });
                offset = offset
                    .checked_add(count)
                    .ok_or_else(|| Error::Overflow(format!("{k}-cells")))?;
            }
            species.push(list);
            counts.push(offset);
        }
        Ok(Self {
            spec,
            coords,
            species,
            counts,
        })
    }

    pub fn spec(&self) -> &MeshSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn degree(&self) -> usize {
        self.spec.degree
    }

    /// Number of k-cells.
    pub fn count(&self, k: usize) -> usize {
        self.counts[k]
    }

    pub fn kind_count(&self, kind: FormKind) -> usize {
        self.count(kind.cell_dim(self.dim()))
    }

    pub fn species(&self, k: usize) -> &[Species] {
        &self.species[k]
    }

    pub fn kind_species(&self, kind: FormKind) -> &[Species] {
        self.species(kind.cell_dim(self.dim()))
    }

    /// Global GLL grid coordinates along axis `d`.
    pub fn coords(&self, d: usize) -> &[f64] {
        &self.coords[d]
    }

    /// Species index and tensor index of global k-cell `id`.
    pub fn locate_cell(&self, k: usize, id: usize) -> (usize, [usize; 3]) {
        let list = &self.species[k];
        let s = list.iter().rposition(|sp| sp.offset <= id).unwrap();
        (s, list[s].index(id - list[s].offset))
    }

    /// `(lo, hi)` extent of a cell along each axis (`lo == hi` when fixed).
    pub fn cell_extent(&self, species: &Species, idx: [usize; 3]) -> [(f64, f64); 3] {
        let mut ext = [(0.0, 0.0); 3];
        for d in 0..self.dim() {
            let a = self.coords[d][idx[d]];
            let b = if species.spans[d] {
                self.coords[d][idx[d] + 1]
            } else {
                a
            };
            ext[d] = (a, b);
        }
        ext
    }

    /// Element containing `x` and the reference coordinates inside it.
    /// Points on an interface belong to the element with the lower index.
    pub fn locate_point(&self, x: &Point) -> Result<([usize; 3], [f64; 3])> {
        let mut elem = [0usize; 3];
        let mut xi = [0.0; 3];
        for d in 0..self.dim() {
            let (lo, hi) = (self.spec.lo[d], self.spec.hi[d]);
            let tol = 1e-12 * (hi - lo);
            if !x[d].is_finite() || x[d] < lo - tol || x[d] > hi + tol {
                return Err(Error::OutsideDomain { point: *x });
            }
            let k = self.spec.elements[d];
            let h = self.spec.element_size(d);
            let t = ((x[d] - lo) / h).clamp(0.0, k as f64);
            let mut e = t.floor() as usize;
            if e >= k || (e > 0 && t == e as f64) {
                e -= 1;
            }
            let a = lo + e as f64 * h;
            elem[d] = e;
            xi[d] = (2.0 * (x[d] - a) / h - 1.0).clamp(-1.0, 1.0);
        }
        Ok((elem, xi))
    }

    /// Physical point of reference coordinates `xi` in element `elem`.
    pub fn map_point(&self, elem: [usize; 3], xi: [f64; 3]) -> Point {
        let mut x = [0.0; 3];
        for d in 0..self.dim() {
            let h = self.spec.element_size(d);
            x[d] = self.spec.lo[d] + (elem[d] as f64 + 0.5 * (xi[d] + 1.0)) * h;
        }
        x
    }

    pub fn elements(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let k = self.spec.elements;
        let kz = if self.dim() == 3 { k[2] } else { 1 };
        (0..kz).flat_map(move |z| (0..k[1]).flat_map(move |y| (0..k[0]).map(move |x| [x, y, z])))
    }

    pub fn element_count(&self) -> usize {
        self.spec.elements[..self.dim()].iter().product()
    }

    /// `n_0 - n_1 + n_2 (- n_3)`.
    pub fn euler_characteristic(&self) -> i64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &n)| if k % 2 == 0 { n as i64 } else { -(n as i64) })
            .sum()
    }

    fn coboundary(&self, from: FormKind, to: FormKind) -> IncidenceMatrix {
        let dim = self.dim();
        let (kf, kt) = (from.cell_dim(dim), to.cell_dim(dim));
        debug_assert_eq!(kf + 1, kt);
        let mut trip = Vec::new();
        for target in &self.species[kt] {
            let t_orient = to.orientation(target, dim);
            for idx in target.indices() {
                let row = target.id(idx);
                for (pos, d) in target.spanned(dim).enumerate() {
                    let mut spans = target.spans;
                    spans[d] = false;
                    let source = self.species[kf].iter().find(|s| s.spans == spans).unwrap();
                    let cubical = if pos % 2 == 0 { 1 } else { -1 };
                    let sign = cubical * t_orient * from.orientation(source, dim);
                    let mut head = idx;
                    head[d] += 1;
                    trip.push((row, source.id(head), sign));
                    trip.push((row, source.id(idx), -sign));
                }
            }
        }
        IncidenceMatrix {
            from,
            to,
            matrix: Csr::from_triplets(self.count(kt), self.count(kf), trip),
        }
    }

    /// `G`: point values to tangential line integrals.
    pub fn grad_matrix(&self) -> IncidenceMatrix {
        self.coboundary(FormKind::Nodal, FormKind::Circulation)
    }

    /// 2D rotor: point values of a stream function (or vorticity) to the
    /// fluxes of its curl through lines.
    pub fn rot_matrix(&self) -> Result<IncidenceMatrix> {
        if self.dim() != 2 {
            return Err(Error::WrongDimension {
                op: "rot",
                dim: self.dim(),
            });
        }
        Ok(self.coboundary(FormKind::Nodal, FormKind::Flux))
    }

    /// `C`: circulations to fluxes through faces (3D only).
    pub fn curl_matrix(&self) -> Result<IncidenceMatrix> {
        if self.dim() != 3 {
            return Err(Error::WrongDimension {
                op: "curl",
                dim: self.dim(),
            });
        }
        Ok(self.coboundary(FormKind::Circulation, FormKind::Flux))
    }

    /// 2D scalar curl: circulations to cell integrals of `∂x w_y - ∂y w_x`.
    pub fn scalar_curl_matrix(&self) -> Result<IncidenceMatrix> {
        if self.dim() != 2 {
            return Err(Error::WrongDimension {
                op: "scalar curl",
                dim: self.dim(),
            });
        }
        Ok(self.coboundary(FormKind::Circulation, FormKind::Density))
    }

    /// `D`: fluxes to cell integrals of the divergence.
    pub fn div_matrix(&self) -> IncidenceMatrix {
        self.coboundary(FormKind::Flux, FormKind::Density)
    }

    /// The incidence matrix taking `W`-cochains (vorticity) to fluxes:
    /// rot in 2D, curl in 3D.
    pub fn vorticity_curl(&self) -> IncidenceMatrix {
        match self.dim() {
            2 => self.coboundary(FormKind::Nodal, FormKind::Flux),
            _ => self.coboundary(FormKind::Circulation, FormKind::Flux),
        }
    }

    /// Ids of cells of species `s` (dimension `k`) lying on each box face,
    /// in face order `x-, x+, y-, ...`; faces spanned by the species are
    /// omitted.
    pub fn boundary_cells(&self, k: usize, s: usize) -> Vec<(BoxFace, Vec<usize>)> {
        let sp = &self.species[k][s];
        let dim = self.dim();
        let mut out = Vec::new();
        for &face in BoxFace::faces(dim) {
            let d = face.axis();
            if sp.spans[d] {
                continue;
            }
            let target = if face.is_upper() { sp.shape[d] - 1 } else { 0 };
            let ids = sp
                .indices()
                .filter(|idx| idx[d] == target)
                .map(|idx| sp.id(idx))
                .collect();
            out.push((face, ids));
        }
        out
    }

    /// All k-cells on `∂Ω`, grouped by face (cells on box edges repeat).
    pub fn boundary_cells_all(&self, k: usize) -> Vec<(BoxFace, Vec<usize>)> {
        let mut out: Vec<(BoxFace, Vec<usize>)> = BoxFace::faces(self.dim()).iter().map(|&f| (f, Vec::new())).collect();
        for s in 0..self.species[k].len() {
            for (face, ids) in self.boundary_cells(k, s) {
                out.iter_mut().find(|(f, _)| *f == face).unwrap().1.extend(ids);
            }
        }
        out
    }

    /// Boundary flux cells with the sign of their outward normal.
    pub fn boundary_fluxes(&self) -> Vec<(BoxFace, usize, f64)> {
        let k = self.dim() - 1;
        let mut out = Vec::new();
        for s in 0..self.species[k].len() {
            for (face, ids) in self.boundary_cells(k, s) {
                if self.species[k][s].fixed(self.dim()).next() == Some(face.axis()) {
                    out.extend(ids.into_iter().map(|id| (face, id, face.outward())));
                }
            }
        }
        out.sort_by_key(|&(_, id, _)| id);
        out
    }
}

fn species_masks(dim: usize, k: usize) -> Vec<[bool; 3]> {
    let mut masks = Vec::new();
    if dim == 3 && k == 2 {
        // ordered by normal: yz, zx, xy
        for normal in 0..3 {
            let mut m = [true, true, true];
            m[normal] = false;
            masks.push(m);
        }
        return masks;
    }
    for bits in 0u32..(1 << dim) {
        if bits.count_ones() as usize != k {
            continue;
        }
        let mut m = [false; 3];
        for (d, slot) in m.iter_mut().enumerate().take(dim) {
            *slot = bits & (1 << d) != 0;
        }
        masks.push(m);
    }
    masks
}

/// Signed integer incidence matrix between two cochain kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix {
    pub from: FormKind,
    pub to: FormKind,
    matrix: Csr<i64>,
}

impl IncidenceMatrix {
    pub fn matrix(&self) -> &Csr<i64> {
        &self.matrix
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.to_f64().mul_vec(x)
    }

    pub fn apply_int(&self, x: &[i64]) -> Vec<i64> {
        self.matrix.mul_vec(x)
    }

    /// Exact integer product `next · self`.
    pub fn then(&self, next: &IncidenceMatrix) -> Csr<i64> {
        next.matrix.matmul(&self.matrix)
    }

    pub fn to_f64(&self) -> Csr<f64> {
        self.matrix.to_f64()
    }

    /// Copy with the sign of the `nth` stored entry of `row` flipped.
    pub fn with_flipped_entry(&self, row: usize, nth: usize) -> Self {
        let trip = self
            .matrix
            .triplets()
            .map(|(r, c, v)| {
                let hit = r == row && self.matrix.row(row).nth(nth).map(|(cc, _)| cc) == Some(c);
                (r, c, if hit { -v } else { v })
            })
            .collect();
        Self {
            from: self.from,
            to: self.to,
            matrix: Csr::from_triplets(self.nrows(), self.ncols(), trip),
        }
    }

    pub fn write_matrix_market<W: Write>(&self, out: W) -> io::Result<()> {
        self.matrix.write_matrix_market(out)
    }
}
