//! Benchmark flows: lid-driven cavities and closed-form solutions.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::analysis::ExactSolution;
use crate::assembly::StokesProblem;
use crate::{Error, Point};

/// Lid speed along `-x`.
pub const LID_VELOCITY: [f64; 3] = [-1.0, 0.0, 0.0];

fn lid_problem(dim: usize) -> StokesProblem {
    let top = dim - 1;
    StokesProblem {
        forcing: Arc::new(|_: &Point| [0.0; 3]),
        boundary_velocity: Arc::new(move |x: &Point| {
            if (x[top] - 1.0).abs() < 1e-12 {
                LID_VELOCITY
            } else {
                [0.0; 3]
            }
        }),
    }
}

/// Problem whose forcing and boundary data come from an exact solution.
pub fn problem_from_exact(exact: Arc<dyn ExactSolution>) -> StokesProblem {
    let e = exact.clone();
    StokesProblem {
        forcing: Arc::new(move |x: &Point| e.forcing(x)),
        boundary_velocity: Arc::new(move |x: &Point| exact.velocity(x)),
    }
}

fn a(x: f64) -> f64 {
    x * x * (x - 1.0) * (x - 1.0)
}

fn da(x: f64) -> f64 {
    2.0 * x * (x - 1.0) * (2.0 * x - 1.0)
}

fn dda(x: f64) -> f64 {
    12.0 * x * x - 12.0 * x + 2.0
}

fn ddda(x: f64) -> f64 {
    24.0 * x - 12.0
}

/// No-slip flow on the unit square with stream function `a(x) a(y)`,
/// `a(t) = t²(t-1)²`, and pressure `(x-½)⁵ + (y-½)⁵`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Manufactured2d;

impl ExactSolution for Manufactured2d {
    fn dim(&self) -> usize {
        2
    }

    fn velocity(&self, x: &Point) -> [f64; 3] {
        [-a(x[0]) * da(x[1]), a(x[1]) * da(x[0]), 0.0]
    }

    fn vorticity(&self, x: &Point) -> [f64; 3] {
        [a(x[1]) * dda(x[0]) + a(x[0]) * dda(x[1]), 0.0, 0.0]
    }

    fn curl_vorticity(&self, x: &Point) -> [f64; 3] {
        let dwdx = a(x[1]) * ddda(x[0]) + da(x[0]) * dda(x[1]);
        let dwdy = da(x[1]) * dda(x[0]) + a(x[0]) * ddda(x[1]);
        [dwdy, -dwdx, 0.0]
    }

    fn pressure(&self, x: &Point) -> f64 {
        (x[0] - 0.5).powi(5) + (x[1] - 0.5).powi(5)
    }

    fn pressure_gradient(&self, x: &Point) -> [f64; 3] {
        [5.0 * (x[0] - 0.5).powi(4), 5.0 * (x[1] - 0.5).powi(4), 0.0]
    }
}

/// Divergence-free trigonometric flow with non-zero boundary velocity,
/// `u = (sin(ay), cos(bx))`, `p = sin(x) cos(y)`.
#[derive(Debug, Clone, Copy)]
pub struct Trig2d {
    pub a: f64,
    pub b: f64,
}

impl Default for Trig2d {
    fn default() -> Self {
        Self { a: 1.3, b: 2.1 }
    }
}

impl ExactSolution for Trig2d {
    fn dim(&self) -> usize {
        2
    }

    fn velocity(&self, x: &Point) -> [f64; 3] {
        [(self.a * x[1]).sin(), (self.b * x[0]).cos(), 0.0]
    }

    fn vorticity(&self, x: &Point) -> [f64; 3] {
        [
            -self.b * (self.b * x[0]).sin() - self.a * (self.a * x[1]).cos(),
            0.0,
            0.0,
        ]
    }

    fn curl_vorticity(&self, x: &Point) -> [f64; 3] {
        [
            self.a * self.a * (self.a * x[1]).sin(),
            self.b * self.b * (self.b * x[0]).cos(),
            0.0,
        ]
    }

    fn pressure(&self, x: &Point) -> f64 {
        x[0].sin() * x[1].cos()
    }

    fn pressure_gradient(&self, x: &Point) -> [f64; 3] {
        [x[0].cos() * x[1].cos(), -x[0].sin() * x[1].sin(), 0.0]
    }
}

/// `u = (sin(y+2z), cos(z+2x), sin(x+2y))`, for which `curl curl u = 5u`,
/// with `p = xyz`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Trig3d;

impl ExactSolution for Trig3d {
    fn dim(&self) -> usize {
        3
    }

    fn velocity(&self, x: &Point) -> [f64; 3] {
        [
            (x[1] + 2.0 * x[2]).sin(),
            (x[2] + 2.0 * x[0]).cos(),
            (x[0] + 2.0 * x[1]).sin(),
        ]
    }

    fn vorticity(&self, x: &Point) -> [f64; 3] {
        let c1 = (x[1] + 2.0 * x[2]).cos();
        let s2 = (x[2] + 2.0 * x[0]).sin();
        let c3 = (x[0] + 2.0 * x[1]).cos();
        [2.0 * c3 + s2, 2.0 * c1 - c3, -2.0 * s2 - c1]
    }

    fn curl_vorticity(&self, x: &Point) -> [f64; 3] {
        let u = self.velocity(x);
        [5.0 * u[0], 5.0 * u[1], 5.0 * u[2]]
    }

    fn pressure(&self, x: &Point) -> f64 {
        x[0] * x[1] * x[2]
    }

    fn pressure_gradient(&self, x: &Point) -> [f64; 3] {
        [x[1] * x[2], x[0] * x[2], x[0] * x[1]]
    }
}

/// Named flows available to the command line and the demos.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    /// Unit square, lid `y = 1` moving with velocity `(-1, 0)`.
    Lid2d,
    /// Unit cube, lid `z = 1` moving with velocity `(-1, 0, 0)`.
    Lid3d,
    Manufactured2d,
    Trig2d,
    Trig3d,
}

impl Case {
    pub const ALL: [Case; 5] = [
        Case::Lid2d,
        Case::Lid3d,
        Case::Manufactured2d,
        Case::Trig2d,
        Case::Trig3d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Case::Lid2d => "lid2d",
            Case::Lid3d => "lid3d",
            Case::Manufactured2d => "manufactured2d",
            Case::Trig2d => "trig2d",
            Case::Trig3d => "trig3d",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Case::Lid3d | Case::Trig3d => 3,
            _ => 2,
        }
    }

    pub fn exact(self) -> Option<Arc<dyn ExactSolution>> {
        match self {
            Case::Lid2d | Case::Lid3d => None,
            Case::Manufactured2d => Some(Arc::new(Manufactured2d)),
            Case::Trig2d => Some(Arc::new(Trig2d::default())),
            Case::Trig3d => Some(Arc::new(Trig3d)),
        }
    }

    pub fn problem(self) -> StokesProblem {
        match self.exact() {
            Some(e) => problem_from_exact(e),
            None => lid_problem(self.dim()),
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Case::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<_> = Case::ALL.iter().map(|c| c.name()).collect();
            Error::InvalidMesh(format!("unknown case `{s}` (expected one of {})", names.join(", ")))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central differences of order four.
    fn fd(f: impl Fn(&Point) -> f64, x: &Point, d: usize) -> f64 {
        let h = 1e-3;
        let at = |s: f64| {
            let mut y = *x;
            y[d] += s * h;
            f(&y)
        };
        (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h)
    }

    fn check(e: &dyn ExactSolution) {
        let pts = [[0.21, 0.37, 0.55], [0.8, 0.1, 0.33], [0.5, 0.5, 0.5]];
        for x in &pts {
            let div: f64 = (0..e.dim()).map(|d| fd(|y| e.velocity(y)[d], x, d)).sum();
            assert!(div.abs() < 1e-8, "div {div}");
            let curl_of = |f: &dyn Fn(&Point) -> [f64; 3]| -> [f64; 3] {
                if e.dim() == 2 {
                    [fd(|y| f(y)[0], x, 1), -fd(|y| f(y)[0], x, 0), 0.0]
                } else {
                    [
                        fd(|y| f(y)[2], x, 1) - fd(|y| f(y)[1], x, 2),
                        fd(|y| f(y)[0], x, 2) - fd(|y| f(y)[2], x, 0),
                        fd(|y| f(y)[1], x, 0) - fd(|y| f(y)[0], x, 1),
                    ]
                }
            };
            // vorticity is curl u (2D scalar: ∂x u_y - ∂y u_x)
            let w = e.vorticity(x);
            if e.dim() == 2 {
                let rot = fd(|y| e.velocity(y)[1], x, 0) - fd(|y| e.velocity(y)[0], x, 1);
                assert!((rot - w[0]).abs() < 1e-8);
            } else {
                let c = curl_of(&|y| e.velocity(y));
                for k in 0..3 {
                    assert!((c[k] - w[k]).abs() < 1e-8);
                }
            }
            let cw = curl_of(&|y| e.vorticity(y));
            let ecw = e.curl_vorticity(x);
            for k in 0..3 {
                assert!((cw[k] - ecw[k]).abs() < 1e-7, "{k}: {} vs {}", cw[k], ecw[k]);
            }
            for d in 0..e.dim() {
                assert!((fd(|y| e.pressure(y), x, d) - e.pressure_gradient(x)[d]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn exact_solutions_are_consistent() {
        check(&Manufactured2d);
        check(&Trig2d::default());
        check(&Trig3d);
    }

    #[test]
    fn manufactured_velocity_vanishes_on_boundary() {
        for t in [0.0, 0.3, 0.77, 1.0] {
            for x in [[0.0, t, 0.0], [1.0, t, 0.0], [t, 0.0, 0.0], [t, 1.0, 0.0]] {
                assert_eq!(Manufactured2d.velocity(&x), [0.0; 3]);
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for c in Case::ALL {
            assert_eq!(c.name().parse::<Case>().unwrap(), c);
        }
        assert!("cavity".parse::<Case>().is_err());
    }
}
