//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export has a plain Rust counterpart in [`demo`] so the numerics
//! can be tested natively.

pub mod demo;

use wasm_bindgen::prelude::*;

/// Basis curves at `samples` points on [-1, 1], see [`demo::basis_curves`].
#[wasm_bindgen(js_name = basisCurves)]
pub fn basis_curves(degree: usize, samples: usize) -> Result<Vec<f64>, JsError> {
    demo::basis_curves(degree, samples).map_err(|e| JsError::new(&e.to_string()))
}

/// Projection of a preset scalar field onto a 2D mesh.
#[wasm_bindgen]
pub struct Projection(demo::Projection);

#[wasm_bindgen]
impl Projection {
    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.0.values.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn errors(&self) -> Vec<f64> {
        self.0.errors.clone()
    }

    #[wasm_bindgen(getter, js_name = maxError)]
    pub fn max_error(&self) -> f64 {
        self.0.max_error
    }
}

/// `field` is one of [`demo::FIELDS`]; `kind` is `"nodal"` or `"density"`.
#[wasm_bindgen]
pub fn project(
    field: &str,
    kind: &str,
    elements: usize,
    degree: usize,
    resolution: usize,
) -> Result<Projection, JsError> {
    demo::project(field, kind, elements, degree, resolution)
        .map(Projection)
        .map_err(|e| JsError::new(&e.to_string()))
}

/// Lid-driven cavity flow sampled on a grid.
#[wasm_bindgen]
pub struct LidFlow(demo::LidFlow);

#[wasm_bindgen]
impl LidFlow {
    #[wasm_bindgen(getter)]
    pub fn speed(&self) -> Vec<f64> {
        self.0.speed.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn ux(&self) -> Vec<f64> {
        self.0.ux.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn uy(&self) -> Vec<f64> {
        self.0.uy.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn divergence(&self) -> Vec<f64> {
        self.0.divergence.clone()
    }

    #[wasm_bindgen(getter, js_name = maxDivergence)]
    pub fn max_divergence(&self) -> f64 {
        self.0.max_divergence
    }

    #[wasm_bindgen(getter)]
    pub fn unknowns(&self) -> usize {
        self.0.unknowns
    }
}

#[wasm_bindgen(js_name = lidDriven)]
pub fn lid_driven(elements: usize, degree: usize, resolution: usize) -> Result<LidFlow, JsError> {
    demo::lid_driven(elements, degree, resolution)
        .map(LidFlow)
        .map_err(|e| JsError::new(&e.to_string()))
}
