//! Browser bindings: cascade curves, `S_j^*` decay and the `√N S_0^*` eigenspace.
//!
//! Banks cross the boundary as the same JSON the CLI reads. Each export has a
//! plain Rust twin in [`api`] so the logic can be tested natively.

use wasm_bindgen::prelude::*;

pub mod api {
    use cuntz_lab::attractor::eigenspace;
    use cuntz_lab::filterbank::{check_lowpass, check_unitary, lipschitz_m1, polyphase, DEFAULT_TOL};
    use cuntz_lab::fixtures;
    use cuntz_lab::wavelet::{cascade, wavelets_from_scaling, CascadeOptions, SampledFunction};
    use cuntz_lab::wold::shift_decay;
    use cuntz_lab::{FilterBank, FilterRep, LaurentPoly};
    use num_complex::Complex64;
    use serde_json::json;

    pub type Result<T> = std::result::Result<T, String>;

    fn err(e: impl std::fmt::Display) -> String {
        e.to_string()
    }

    pub fn preset(name: &str) -> Result<String> {
        let bank = match name {
            "haar" => fixtures::haar(),
            "stretched" => fixtures::stretched_haar(),
            "dft3" => fixtures::dft_bank(3),
            "identity" => FilterBank::identity(2).map_err(err)?,
            other => return Err(format!("unknown preset {other:?}")),
        };
        serde_json::to_string_pretty(&bank).map_err(err)
    }

    fn bank(text: &str) -> Result<FilterBank> {
        serde_json::from_str(text).map_err(|e| format!("bank JSON: {e}"))
    }

    /// `"3:1, -1:0.5"` as `e_3 + 0.5 e_{-1}`.
    pub fn parse_vector(text: &str) -> Result<LaurentPoly> {
        let mut terms = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (n, c) = part.split_once(':').unwrap_or((part, "1"));
            let n: i64 = n.trim().parse().map_err(|_| format!("bad index in {part:?}"))?;
            let c: f64 = c.trim().parse().map_err(|_| format!("bad coefficient in {part:?}"))?;
            terms.push((n, Complex64::new(c, 0.0)));
        }
        if terms.is_empty() {
            return Err("vector is empty".into());
        }
        Ok(LaurentPoly::from_terms(terms))
    }

    fn rows(f: &SampledFunction) -> Vec<[f64; 2]> {
        let w = (f.n() as f64).powi(-f.level());
        let mut out = Vec::new();
        for (x, v) in f.rows() {
            out.push([x, v.re]);
            out.push([x + w, v.re]);
        }
        out
    }

    /// Scaling function and wavelets as step outlines `[[x, y], ...]`.
    pub fn cascade_curve(bank_json: &str, iters: usize, grid_level: i32) -> Result<String> {
        let bank = bank(bank_json)?;
        let mut opts = CascadeOptions::new(iters);
        opts.grid_level = grid_level;
        let phi = cascade(&bank, &opts).map_err(err)?;
        let psis = wavelets_from_scaling(&bank, &phi).map_err(err)?;
        let out = json!({
            "phi": rows(&phi),
            "psi": psis.iter().map(rows).collect::<Vec<_>>(),
            "norm": phi.norm(),
            "support": phi.support(),
        });
        Ok(out.to_string())
    }

    /// `‖S_j^{*k} f‖` for `k ≤ n_max`.
    pub fn decay(bank_json: &str, j: usize, vector: &str, n_max: usize) -> Result<Vec<f64>> {
        let rep = FilterRep::new(bank(bank_json)?).map_err(err)?;
        if j >= rep.n() {
            return Err(format!("j = {j} but the bank has N = {}", rep.n()));
        }
        Ok(shift_decay(&rep, j, &parse_vector(vector)?, n_max))
    }

    pub fn eigenspace_summary(bank_json: &str, window: Option<i64>) -> Result<String> {
        let bank = bank(bank_json)?;
        let a = polyphase(&bank);
        let unitary = check_unitary(&a, DEFAULT_TOL);
        let lowpass = check_lowpass(&a, DEFAULT_TOL);
        let m1 = lipschitz_m1(&bank);
        if !unitary.pass {
            return Ok(json!({ "unitary": false, "lowpass": lowpass.pass, "M1": m1 }).to_string());
        }
        let rep = FilterRep::new(bank).map_err(err)?;
        let e = eigenspace(&rep, window).map_err(err)?;
        let labels: Vec<String> = e.affine_basis.iter().map(ToString::to_string).collect();
        let out = json!({
            "unitary": true,
            "lowpass": lowpass.pass,
            "M1": m1,
            "window": e.window,
            "dim": e.dim,
            "affine_basis": labels,
            "residual": e.global_residual,
        });
        Ok(out.to_string())
    }
}

fn js(e: String) -> JsValue {
    JsValue::from_str(&e)
}

/// Bank JSON for `haar`, `stretched`, `dft3` or `identity`.
#[wasm_bindgen]
pub fn preset(name: &str) -> Result<String, JsValue> {
    api::preset(name).map_err(js)
}

#[wasm_bindgen(js_name = cascadeCurve)]
pub fn cascade_curve(bank_json: &str, iters: usize, grid_level: i32) -> Result<String, JsValue> {
    api::cascade_curve(bank_json, iters, grid_level).map_err(js)
}

#[wasm_bindgen(js_name = shiftDecay)]
pub fn shift_decay(bank_json: &str, j: usize, vector: &str, n_max: usize) -> Result<Vec<f64>, JsValue> {
    api::decay(bank_json, j, vector, n_max).map_err(js)
}

/// A negative window means the default.
#[wasm_bindgen(js_name = eigenspaceSummary)]
pub fn eigenspace_summary(bank_json: &str, window: i32) -> Result<String, JsValue> {
    api::eigenspace_summary(bank_json, (window >= 0).then_some(window as i64)).map_err(js)
}
