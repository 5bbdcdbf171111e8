//! Native implementations behind the browser exports. Grids are row-major
//! with `x` fastest and `resolution + 1` points per direction.

use std::f64::consts::PI;

use mimetic_core::basis::SpectralBasis;
use mimetic_core::cases::Case;
use mimetic_core::mimetic::{project as project_field, Analytic, Discretization};
use mimetic_core::solver::{grid_points, solve_stokes};
use mimetic_core::topology::{FormKind, MeshSpec};
use mimetic_core::Point;

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] mimetic_core::Error),
}

pub type Result<T> = std::result::Result<T, DemoError>;

/// Largest degree and element count the demo accepts.
pub const MAX_DEGREE: usize = 12;
pub const MAX_ELEMENTS: usize = 16;

/// Preset scalar fields for [`project`].
pub const FIELDS: [&str; 3] = ["waves", "bump", "corner"];

fn preset(name: &str) -> Result<fn(&Point) -> f64> {
    Ok(match name {
        "waves" => |x: &Point| (2.0 * PI * x[0]).sin() * (PI * x[1]).cos(),
        "bump" => |x: &Point| (-40.0 * ((x[0] - 0.4).powi(2) + (x[1] - 0.6).powi(2))).exp(),
        "corner" => |x: &Point| (x[0] * x[0] + x[1] * x[1]).sqrt().powf(1.5),
        _ => return Err(DemoError::Input(format!("unknown field `{name}`"))),
    })
}

fn mesh(elements: usize, degree: usize) -> Result<Discretization> {
    if elements > MAX_ELEMENTS || degree > MAX_DEGREE {
        return Err(DemoError::Input(format!(
            "demo limits are K <= {MAX_ELEMENTS} and N <= {MAX_DEGREE}"
        )));
    }
    Ok(Discretization::new(MeshSpec::unit(2, elements, degree)?)?)
}

/// Rows: the sample abscissae, then `l_0..l_N`, then `e_1..e_N`, each of
/// length `samples`. The GLL nodes follow as a final row of length `N + 1`.
pub fn basis_curves(degree: usize, samples: usize) -> Result<Vec<f64>> {
    if degree > MAX_DEGREE || samples < 2 {
        return Err(DemoError::Input(format!(
            "need N <= {MAX_DEGREE} and at least 2 samples"
        )));
    }
    let b = SpectralBasis::new(degree)?;
    let xs: Vec<f64> = (0..samples)
        .map(|i| -1.0 + 2.0 * i as f64 / (samples - 1) as f64)
        .collect();
    let mut out = xs.clone();
    for i in 0..=degree {
        for &x in &xs {
            out.push(b.lagrange.eval(i, x)?);
        }
    }
    for i in 1..=degree {
        for &x in &xs {
            out.push(b.edge.eval(i, x)?);
        }
    }
    out.extend_from_slice(b.rule.nodes());
    Ok(out)
}

pub struct Projection {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub max_error: f64,
}

/// Projects a preset onto nodal (continuous) or density (discontinuous)
/// forms and samples the result together with the pointwise error.
pub fn project(field: &str, kind: &str, elements: usize, degree: usize, resolution: usize) -> Result<Projection> {
    let f = preset(field)?;
    let kind = match kind {
        "nodal" => FormKind::Nodal,
        "density" => FormKind::Density,
        _ => return Err(DemoError::Input(format!("unknown form kind `{kind}`"))),
    };
    let disc = mesh(elements, degree)?;
    let ph = project_field(&disc, kind, Analytic::Scalar(&f))?;
    let mut values = Vec::new();
    let mut errors = Vec::new();
    for x in grid_points(&disc, resolution) {
        let v = ph.scalar(&x)?;
        values.push(v);
        errors.push((v - f(&x)).abs());
    }
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(Projection {
        values,
        errors,
        max_error,
    })
}

pub struct LidFlow {
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
    pub speed: Vec<f64>,
    pub divergence: Vec<f64>,
    pub max_divergence: f64,
    pub unknowns: usize,
}

pub fn lid_driven(elements: usize, degree: usize, resolution: usize) -> Result<LidFlow> {
    let disc = mesh(elements, degree)?;
    let sol = solve_stokes(&disc, &Case::Lid2d.problem())?;
    let samples = sol.sample_grid(resolution)?;
    let ux: Vec<f64> = samples.iter().map(|s| s.velocity[0]).collect();
    let uy: Vec<f64> = samples.iter().map(|s| s.velocity[1]).collect();
    let speed = ux.iter().zip(&uy).map(|(a, b)| a.hypot(*b)).collect();
    let divergence: Vec<f64> = samples.iter().map(|s| s.divergence).collect();
    let max_divergence = divergence.iter().map(|d| d.abs()).fold(0.0, f64::max);
    Ok(LidFlow {
        ux,
        uy,
        speed,
        divergence,
        max_divergence,
        unknowns: sol.unknowns,
    })
}
