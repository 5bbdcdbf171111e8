//! Structural self-check of the discretization.

use mimetic_core::analysis::inf_sup_constant;
use mimetic_core::assembly::mass_matrix;
use mimetic_core::basis::{GaussRule, SpectralBasis};
use mimetic_core::mimetic::{check_commutation, Analytic, Derivative, Discretization};
use mimetic_core::topology::{CellComplex, FormKind, MeshSpec};
use mimetic_core::Point;

pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn line(name: &str, pass: bool, detail: String) -> CheckLine {
    CheckLine {
        name: name.into(),
        pass,
        detail,
    }
}

/// Runs every check. `flip_div` corrupts one entry of `D` first, which
/// must make the `DC = 0` check fail.
pub fn run(flip_div: bool) -> Vec<CheckLine> {
    let mut out = Vec::new();

    let mut cg_ok = true;
    let mut dc_ok = true;
    for dim in [2, 3] {
        for k in 1..=3 {
            for n in 1..=3 {
                let c = CellComplex::new(MeshSpec::unit(dim, k, n).expect("valid mesh")).expect("valid complex");
                let mut d = c.div_matrix();
                if flip_div {
                    d = d.with_flipped_entry(0, 0);
                }
                let g = c.grad_matrix();
                let (curl_g, dcurl) = if dim == 3 {
                    let curl = c.curl_matrix().expect("3D curl");
                    (g.then(&curl), curl.then(&d))
                } else {
                    let rot = c.rot_matrix().expect("2D rot");
                    (g.then(&c.scalar_curl_matrix().expect("2D curl")), rot.then(&d))
                };
                cg_ok &= curl_g.is_zero();
                dc_ok &= dcurl.is_zero();
            }
        }
    }
    out.push(line("CG = 0", cg_ok, "dim 2 and 3, K <= 3, N <= 3".into()));
    out.push(line("DC = 0", dc_ok, "dim 2 and 3, K <= 3, N <= 3".into()));

    let mut worst = 0.0f64;
    for n in 1..=12 {
        let b = SpectralBasis::new(n).expect("degree in range");
        let x = b.rule.nodes();
        let g = GaussRule::new(n + 1).expect("non-empty rule");
        for i in 0..=n {
            for (j, xj) in x.iter().enumerate() {
                let v = b.lagrange.eval(i, *xj).expect("index in range");
                worst = worst.max((v - f64::from(u8::from(i == j))).abs());
            }
        }
        for i in 1..=n {
            for j in 1..=n {
                let v = g.integrate_on(x[j - 1], x[j], |t| b.edge.eval(i, t).expect("index in range"));
                worst = worst.max((v - f64::from(u8::from(i == j))).abs());
            }
        }
    }
    out.push(line(
        "Kronecker duality",
        worst < 1e-12,
        format!("N <= 12, max deviation {worst:.1e}"),
    ));

    let phi = |x: &Point| x[0] * x[0] * x[1] - x[1] * x[2] + 0.3 * x[2];
    let grad = |x: &Point| [2.0 * x[0] * x[1], x[0] * x[0] - x[2], 0.3 - x[1]];
    let rot = |x: &Point| [x[0] * x[0] - x[2], -2.0 * x[0] * x[1], 0.0];
    let u = |x: &Point| [x[1] * x[1], x[0] * x[2], x[0] * x[1] * x[2]];
    let curl_u = |x: &Point| [x[0] * x[2] - x[0], -x[1] * x[2], x[2] - 2.0 * x[1]];
    let scurl_u = |x: &Point| -2.0 * x[1];
    let div_u3 = |x: &Point| x[0] * x[1];
    let div_u2 = |_: &Point| 0.0;
    let mut worst = 0.0f64;
    let mut failure = None;
    for dim in [2, 3] {
        let disc = Discretization::new(MeshSpec::unit(dim, 2, 3).expect("valid mesh")).expect("valid mesh");
        for &der in Derivative::available(dim) {
            let (f, df) = match der {
                Derivative::Grad => (Analytic::Scalar(&phi), Analytic::Vector(&grad)),
                Derivative::Rot => (Analytic::Scalar(&phi), Analytic::Vector(&rot)),
                Derivative::Curl => (Analytic::Vector(&u), Analytic::Vector(&curl_u)),
                Derivative::ScalarCurl => (Analytic::Vector(&u), Analytic::Scalar(&scurl_u)),
                Derivative::Div if dim == 2 => (Analytic::Vector(&u), Analytic::Scalar(&div_u2)),
                Derivative::Div => (Analytic::Vector(&u), Analytic::Scalar(&div_u3)),
            };
            match check_commutation(&disc, der, f, df, 20, 11) {
                Ok(r) => worst = worst.max(r.reduction_relative).max(r.reconstruction_residual / r.scale),
                Err(e) => failure = Some(format!("{dim}D {der:?}: {e}")),
            }
        }
    }
    out.push(match failure {
        Some(e) => line("commuting diagrams", false, e),
        None => line(
            "commuting diagrams",
            worst < 1e-10,
            format!("polynomial fields, max residual {worst:.1e}"),
        ),
    });

    let mut spd = true;
    for dim in [2, 3] {
        let disc = Discretization::new(MeshSpec::unit(dim, 2, 2).expect("valid mesh")).expect("valid mesh");
        for kind in FormKind::ALL {
            let m = mass_matrix(&disc, kind);
            spd &= m.asymmetry() < 1e-14 && m.to_dense().cholesky().is_some();
        }
    }
    out.push(line("mass matrices SPD", spd, "all kinds, K = 2, N = 2".into()));

    let betas: Vec<f64> = [1, 2, 3]
        .iter()
        .map(|&k| {
            Discretization::new(MeshSpec::unit(2, k, 2).expect("valid mesh"))
                .ok()
                .and_then(|d| inf_sup_constant(&d).ok())
                .unwrap_or(f64::NAN)
        })
        .collect();
    let list: Vec<String> = betas.iter().map(|b| format!("{b:.4}")).collect();
    out.push(line(
        "inf-sup positive",
        betas.iter().all(|b| *b > 0.0),
        format!("2D N = 2, K = 1..3: beta = [{}]", list.join(", ")),
    ));
    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn sign_flip_is_caught() {
        let clean = super::run(false);
        assert!(
            clean.iter().all(|l| l.pass),
            "{:?}",
            clean.iter().map(|l| &l.detail).collect::<Vec<_>>()
        );
        let broken = super::run(true);
        assert!(!broken.iter().find(|l| l.name == "DC = 0").unwrap().pass);
        assert!(broken.iter().find(|l| l.name == "CG = 0").unwrap().pass);
    }
}
