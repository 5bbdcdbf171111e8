//! File writers. Numbers are printed with a fixed format so identical
//! runs produce identical bytes.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use mimetic_core::analysis::{ConvergenceTable, Rate};
use mimetic_core::solver::Sample;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct DofCounts {
    pub vorticity: usize,
    pub velocity: usize,
    pub velocity_free: usize,
    pub pressure: usize,
    pub unknowns: usize,
}

#[derive(Debug, Serialize)]
pub struct ErrorSummary {
    pub omega_l2: f64,
    pub omega_hcurl: f64,
    pub u_l2: f64,
    pub u_hdiv: f64,
    pub p_l2: f64,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub case: String,
    pub dim: usize,
    pub elements: usize,
    pub degree: usize,
    pub resolution: usize,
    pub dofs: DofCounts,
    pub backward_error: f64,
    pub gauge_multiplier: f64,
    /// Largest `|D u|` over all cells.
    pub max_div_cochain: f64,
    /// Largest pointwise `|div u_h|` over the sampling grid.
    pub max_div: f64,
    pub max_velocity: f64,
    pub divergence_free: bool,
    pub errors: Option<ErrorSummary>,
    /// Plane positions of the 3D slice output.
    pub slices_y: Vec<f64>,
}

pub fn write_summary(path: &Path, summary: &Summary) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(summary).map_err(io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}

fn vorticity_xyz(dim: usize, s: &Sample) -> [f64; 3] {
    if dim == 2 {
        [0.0, 0.0, s.vorticity[0]]
    } else {
        s.vorticity
    }
}

/// Columns: `x,y,z,u_x,u_y,u_z,omega_x,omega_y,omega_z,p,div_u`
/// (2D vorticity goes to `omega_z`).
pub fn fields_csv(dim: usize, samples: &[Sample], extra: Option<(&str, &[f64])>) -> String {
    let mut out = String::from("x,y,z,u_x,u_y,u_z,omega_x,omega_y,omega_z,p,div_u");
    if let Some((name, _)) = extra {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, s) in samples.iter().enumerate() {
        let w = vorticity_xyz(dim, s);
        let vals = [
            s.point[0],
            s.point[1],
            s.point[2],
            s.velocity[0],
            s.velocity[1],
            s.velocity[2],
            w[0],
            w[1],
            w[2],
            s.pressure,
            s.divergence,
        ];
        let line: Vec<String> = vals.iter().map(|v| format!("{v:.12e}")).collect();
        out.push_str(&line.join(","));
        if let Some((_, col)) = extra {
            let _ = write!(out, ",{:.12e}", col[i]);
        }
        out.push('\n');
    }
    out
}

/// Legacy ASCII VTK structured points; `shape` counts points per axis.
pub fn fields_vtk(dim: usize, shape: [usize; 3], origin: [f64; 3], spacing: [f64; 3], samples: &[Sample]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "mimetic spectral element Stokes solution");
    let _ = writeln!(out, "ASCII");
    let _ = writeln!(out, "DATASET STRUCTURED_POINTS");
    let _ = writeln!(out, "DIMENSIONS {} {} {}", shape[0], shape[1], shape[2]);
    let _ = writeln!(out, "ORIGIN {} {} {}", origin[0], origin[1], origin[2]);
    let _ = writeln!(out, "SPACING {} {} {}", spacing[0], spacing[1], spacing[2]);
    let _ = writeln!(out, "POINT_DATA {}", samples.len());
    let vector = |out: &mut String, name: &str, f: &dyn Fn(&Sample) -> [f64; 3]| {
        let _ = writeln!(out, "VECTORS {name} double");
        for s in samples {
            let v = f(s);
            let _ = writeln!(out, "{:.12e} {:.12e} {:.12e}", v[0], v[1], v[2]);
        }
    };
    let scalar = |out: &mut String, name: &str, f: &dyn Fn(&Sample) -> f64| {
        let _ = writeln!(out, "SCALARS {name} double 1");
        let _ = writeln!(out, "LOOKUP_TABLE default");
        for s in samples {
            let _ = writeln!(out, "{:.12e}", f(s));
        }
    };
    vector(&mut out, "velocity", &|s| s.velocity);
    vector(&mut out, "vorticity", &|s| vorticity_xyz(dim, s));
    scalar(&mut out, "pressure", &|s| s.pressure);
    scalar(&mut out, "divergence", &|s| s.divergence);
    scalar(&mut out, "speed", &|s| {
        s.velocity.iter().map(|v| v * v).sum::<f64>().sqrt()
    });
    out
}

fn rate_cell(r: &Rate) -> String {
    match r {
        Rate::Fitted { rate, .. } => format!("{rate:.4}"),
        Rate::NotAvailable => "n/a".into(),
        Rate::Saturated => "saturated".into(),
    }
}

pub const ERRORS_HEADER: &str = "dim,N,K,h,err_omega_L2,err_omega_Hcurl,err_u_L2,err_u_Hdiv,err_p_L2,max_div";

/// One row per mesh, then one footer row per degree with `K = rate`
/// holding the fitted rates in the error columns. Failed meshes are
/// listed as `#` comments.
pub fn errors_csv(dim: usize, table: &ConvergenceTable) -> String {
    let mut out = String::new();
    if !table.is_complete() {
        let _ = writeln!(out, "# partial sweep: {} mesh(es) failed", table.failures.len());
        for (n, k, e) in &table.failures {
            let _ = writeln!(out, "# failed N={n} K={k}: {e}");
        }
    }
    out.push_str(ERRORS_HEADER);
    out.push('\n');
    for r in &table.rows {
        let e = &r.errors;
        let _ = writeln!(
            out,
            "{},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.3e}",
            r.dim, r.degree, r.elements, r.h, e.omega_l2, e.omega_hcurl, e.u_l2, e.u_hdiv, e.p_l2, e.max_div
        );
    }
    for r in &table.rates {
        let _ = writeln!(
            out,
            "{dim},{},rate,,{},{},{},{},{},",
            r.degree,
            rate_cell(&r.omega_l2),
            rate_cell(&r.omega_hcurl),
            rate_cell(&r.u_l2),
            rate_cell(&r.u_hdiv),
            rate_cell(&r.p_l2)
        );
    }
    out
}
