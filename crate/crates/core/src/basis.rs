//! Polynomial machinery on the reference interval `[-1, 1]`.
//!
//! The nodal (Lagrange) basis interpolates point values at the
//! Gauss-Lobatto-Legendre nodes. The edge basis histopolates: `e_i`
//! integrates to one over the `i`-th GLL sub-interval and to zero over
//! all others. Tensor products of the two give every cell-based basis in
//! [`crate::mimetic`].

use std::f64::consts::PI;

use crate::{Error, Result};

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;
const NODE_HIT_TOL: f64 = 1e-14;

/// Legendre polynomial `P_n(x)` and its derivative.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    let nf = n as f64;
    let dp = if (x * x - 1.0).abs() < 1e-300 {
        // P'_n(±1) = (±1)^(n-1) n(n+1)/2
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (x * p - p_prev) / (x * x - 1.0)
    };
    (p, dp)
}

/// Gauss-Lobatto-Legendre rule with `N + 1` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GllRule {
    degree: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GllRule {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Computes the GLL rule of degree `n`: the roots of `(1 - x²) P'_n(x)`.
///
/// Interior nodes come from Newton iteration started at the
/// Chebyshev-Lobatto points; pairs `(x, -x)` are symmetrized afterwards.
pub fn gll_rule(n: usize) -> Result<GllRule> {
    if n == 0 {
        return Err(Error::ZeroDegree(n));
    }
    let nf = n as f64;
    let mut nodes: Vec<f64> = (0..=n).map(|j| -(PI * j as f64 / nf).cos()).collect();
    nodes[0] = -1.0;
    nodes[n] = 1.0;
    for x in nodes.iter_mut().take(n).skip(1) {
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre(n, *x);
            // d/dx[(1-x²)P'_n] = -n(n+1) P_n
            let dx = (1.0 - *x * *x) * dp / (nf * (nf + 1.0) * p);
            *x += dx;
            if dx.abs() < NEWTON_TOL {
                break;
            }
        }
    }
    symmetrize(&mut nodes);
    let weights = nodes
        .iter()
        .map(|&x| {
            let (p, _) = legendre(n, x);
            2.0 / (nf * (nf + 1.0) * p * p)
        })
        .collect();
    Ok(GllRule {
        degree: n,
        nodes,
        weights,
    })
}

fn symmetrize(nodes: &mut [f64]) {
    let len = nodes.len();
    for j in 0..len / 2 {
        let a = 0.5 * (nodes[len - 1 - j] - nodes[j]);
        nodes[j] = -a;
        nodes[len - 1 - j] = a;
    }
    if len % 2 == 1 {
        nodes[len / 2] = 0.0;
    }
}

/// Gauss-Legendre rule with `M` interior points, exact to degree `2M - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyRule);
        }
        let mf = m as f64;
        let mut points = vec![0.0; m];
        for (i, x) in points.iter_mut().enumerate() {
            *x = -(PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            for _ in 0..NEWTON_MAX_ITER {
                let (p, dp) = legendre(m, *x);
                let dx = p / dp;
                *x -= dx;
                if dx.abs() < NEWTON_TOL {
                    break;
                }
            }
        }
        symmetrize(&mut points);
        let weights = points
            .iter()
            .map(|&x| {
                let (_, dp) = legendre(m, x);
                2.0 / ((1.0 - x * x) * dp * dp)
            })
            .collect();
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ_m w_m f(p_m)` on `[-1, 1]`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Integral over `[a, b]` through the affine map from `[-1, 1]`.
    pub fn integrate_on(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.integrate(|t| f(mid + half * t))
    }

    /// Physical points and weights of the rule mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (mid + half * t, half * w))
    }
}

pub fn integrate(f: impl Fn(f64) -> f64, rule: &GaussRule) -> f64 {
    rule.integrate(f)
}

/// Lagrange polynomials `l_0..l_N` through the GLL nodes, evaluated with
/// the barycentric formula.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    nodes: Vec<f64>,
    bary: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(rule: &GllRule) -> Self {
        let nodes = rule.nodes().to_vec();
        let bary = (0..nodes.len())
            .map(|i| {
                let prod: f64 = (0..nodes.len())
                    .filter(|&k| k != i)
                    .map(|k| nodes[i] - nodes[k])
                    .product();
                1.0 / prod
            })
            .collect();
        Self { nodes, bary }
    }

    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn check(&self, i: usize) -> Result<()> {
        if i > self.degree() {
            return Err(Error::IndexOutOfRange {
                index: i,
                min: 0,
                max: self.degree(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, i: usize, x: f64) -> Result<f64> {
        self.check(i)?;
        let mut out = vec![0.0; self.nodes.len()];
        self.values_into(x, &mut out);
        Ok(out[i])
    }

    pub fn deriv(&self, i: usize, x: f64) -> Result<f64> {
        self.check(i)?;
        let mut out = vec![0.0; self.nodes.len()];
        self.derivs_into(x, &mut out);
        Ok(out[i])
    }

    /// All `l_i(x)` at once.
    pub fn values_into(&self, x: f64, out: &mut [f64]) {
        if let Some(j) = self.nodes.iter().position(|&n| (x - n).abs() < NODE_HIT_TOL) {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[j] = 1.0;
            return;
        }
        let mut denom = 0.0;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.bary[i] / (x - self.nodes[i]);
            denom += *o;
        }
        out.iter_mut().for_each(|v| *v /= denom);
    }

    /// All `l_i'(x)`, from the product rule so that no division by
    /// `x - x_k` occurs near the nodes.
    pub fn derivs_into(&self, x: f64, out: &mut [f64]) {
        let n = self.nodes.len();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let mut sum = 0.0;
            for m in (0..n).filter(|&m| m != i) {
                let mut prod = 1.0;
                for k in (0..n).filter(|&k| k != i && k != m) {
                    prod *= x - self.nodes[k];
                }
                sum += prod;
            }
            *o = self.bary[i] * sum;
        }
    }

    pub fn values(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.nodes.len()];
        self.values_into(x, &mut out);
        out
    }

    pub fn derivs(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.nodes.len()];
        self.derivs_into(x, &mut out);
        out
    }
}

/// Edge polynomials `e_i = -Σ_{k<i} l_k'`, `i = 1..=N`.
#[derive(Debug, Clone)]
pub struct EdgeBasis {
    lagrange: LagrangeBasis,
}

impl EdgeBasis {
    pub fn new(rule: &GllRule) -> Self {
        Self {
            lagrange: LagrangeBasis::new(rule),
        }
    }

    pub fn degree(&self) -> usize {
        self.lagrange.degree()
    }

    /// `e_i(x)`; edge indices start at 1.
    pub fn eval(&self, i: usize, x: f64) -> Result<f64> {
        if i == 0 || i > self.degree() {
            return Err(Error::IndexOutOfRange {
                index: i,
                min: 1,
                max: self.degree(),
            });
        }
        Ok(self.values(x)[i - 1])
    }

    /// `out[j]` receives `e_{j+1}(x)`; `scratch` holds `N + 1` derivatives.
    pub fn values_into(&self, x: f64, out: &mut [f64], scratch: &mut [f64]) {
        self.lagrange.derivs_into(x, scratch);
        let mut acc = 0.0;
        for (o, d) in out.iter_mut().zip(scratch.iter()) {
            acc -= d;
            *o = acc;
        }
    }

    pub fn values(&self, x: f64) -> Vec<f64> {
        let n = self.degree();
        let mut out = vec![0.0; n];
        let mut scratch = vec![0.0; n + 1];
        self.values_into(x, &mut out, &mut scratch);
        out
    }
}

/// GLL rule together with the nodal and edge bases built on it, plus the
/// 1D reference mass matrices `∫ l_i l_j` and `∫ e_i e_j`.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub rule: GllRule,
    pub lagrange: LagrangeBasis,
    pub edge: EdgeBasis,
    nodal_mass: Vec<f64>,
    edge_mass: Vec<f64>,
}

impl SpectralBasis {
    pub fn new(degree: usize) -> Result<Self> {
        let rule = gll_rule(degree)?;
        let lagrange = LagrangeBasis::new(&rule);
        let edge = EdgeBasis::new(&rule);
        // N + 1 Gauss points integrate l_i l_j (degree 2N) exactly.
        let gauss = GaussRule::new(degree + 1)?;
        let np = degree + 1;
        let mut nodal_mass = vec![0.0; np * np];
        let mut edge_mass = vec![0.0; degree * degree];
        for (&x, &w) in gauss.points().iter().zip(gauss.weights()) {
            let l = lagrange.values(x);
            let e = edge.values(x);
            for i in 0..np {
                for j in 0..np {
                    nodal_mass[i * np + j] += w * l[i] * l[j];
                }
            }
            for i in 0..degree {
                for j in 0..degree {
                    edge_mass[i * degree + j] += w * e[i] * e[j];
                }
            }
        }
        Ok(Self {
            rule,
            lagrange,
            edge,
            nodal_mass,
            edge_mass,
        })
    }

    pub fn degree(&self) -> usize {
        self.rule.degree()
    }

    /// Row-major `(N+1) x (N+1)` matrix of `∫ l_i l_j` on `[-1, 1]`.
    pub fn nodal_mass(&self) -> &[f64] {
        &self.nodal_mass
    }

    /// Row-major `N x N` matrix of `∫ e_i e_j` on `[-1, 1]`.
    pub fn edge_mass(&self) -> &[f64] {
        &self.edge_mass
    }
}
