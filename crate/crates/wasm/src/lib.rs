//! Browser bindings for the demo page in `www/`. Every export returns a JSON
//! string; the page draws it with a plain canvas.

use matorth::orthopoly::{monic_sequence, verify_eigen};
use matorth::symmetry::catalog::xi;
use matorth::symmetry::{catalog, find_mass, mass_conditions, Branch, CatalogOptions};
use matorth::{Family, Matrix};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    matorth::numkernel::to_rows(m)
}

fn hermite_weight(a: f64, gamma: f64, zeta: f64, t0: f64) -> matorth::Result<(matorth::WeightMatrix, Matrix)> {
    let fam = Family::Hermite { a };
    let e = catalog(&fam, t0, Branch::Plus, &CatalogOptions::default())?;
    let w = fam.weight()?.with_atom(t0, e.mass.clone(), gamma, zeta)?;
    Ok((w, e.mass))
}

#[derive(Serialize)]
struct Curves {
    t: Vec<f64>,
    /// `entries[k]` is the curve of entry `(k / 2, k % 2)` of `γW(t)`.
    entries: Vec<Vec<f64>>,
    atom: Vec<Vec<f64>>,
}

/// Density entries of `γ W_a` on `[from, to]` and the atom mass `ζ M`.
pub fn density_curves_json(a: f64, gamma: f64, zeta: f64, t0: f64, from: f64, to: f64, points: usize) -> Result<String, String> {
    if points < 2 || points > 5000 || !(to > from) {
        return Err("need 2..=5000 points and to > from".into());
    }
    let (w, mass) = hermite_weight(a, gamma, zeta, t0).map_err(|e| e.to_string())?;
    let t: Vec<f64> = (0..points)
        .map(|i| from + (to - from) * i as f64 / (points - 1) as f64)
        .collect();
    let mut entries: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(points)).collect();
    for &x in &t {
        let d = w.density(x);
        for (k, e) in entries.iter_mut().enumerate() {
            e.push(d[(k / 2, k % 2)]);
        }
    }
    serde_json::to_string(&Curves {
        t,
        entries,
        atom: rows(&(mass * zeta)),
    })
    .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SweepPoint {
    t0: f64,
    xi_plus: f64,
    xi_minus: f64,
    /// Largest deviation between the recovered mass and the closed form.
    deviation: Option<f64>,
    condition_residual: f64,
}

/// For each `t₀`, recovers the mass of the Hermite-type operator and
/// compares it with the closed form built from `ξ⁺`.
pub fn mass_sweep_json(a: f64, from: f64, to: f64, points: usize) -> Result<String, String> {
    if points < 2 || points > 2000 || !(to > from) {
        return Err("need 2..=2000 points and to > from".into());
    }
    let fam = Family::Hermite { a };
    fam.validate().map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(points);
    for i in 0..points {
        let t0 = from + (to - from) * i as f64 / (points - 1) as f64;
        let e = catalog(&fam, t0, Branch::Plus, &CatalogOptions::default()).map_err(|e| e.to_string())?;
        let want = &e.mass / e.mass.trace();
        let deviation = find_mass(&e.operator, t0).map(|m| (m - &want).amax());
        let cond = mass_conditions(&e.operator, t0, &e.mass, 1e-9).map_err(|e| e.to_string())?;
        out.push(SweepPoint {
            t0,
            xi_plus: xi(a, t0, Branch::Plus),
            xi_minus: xi(a, t0, Branch::Minus),
            deviation,
            condition_residual: cond.max_residual,
        });
    }
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct EigenRow {
    n: usize,
    residual: f64,
    gamma_n: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct EigenSummary {
    verdict: bool,
    max_residual: f64,
    rows: Vec<EigenRow>,
    /// Constant coefficient of `P₁`, which moves with `ζ/γ`.
    p1_constant: Vec<Vec<f64>>,
}

/// Checks `PₙD = ΓₙPₙ` for `n ≤ n_max` on `γW_a + ζδ_{t₀}M`.
pub fn eigen_check_json(a: f64, gamma: f64, zeta: f64, t0: f64, n_max: usize) -> Result<String, String> {
    if n_max > 20 {
        return Err("n_max is limited to 20".into());
    }
    let (w, _) = hermite_weight(a, gamma, zeta, t0).map_err(|e| e.to_string())?;
    let d = catalog(&Family::Hermite { a }, t0, Branch::Plus, &CatalogOptions::default())
        .map_err(|e| e.to_string())?
        .operator;
    let s = monic_sequence(&w, n_max.max(1)).map_err(|e| e.to_string())?;
    let r = verify_eigen(&s, &d).map_err(|e| e.to_string())?;
    serde_json::to_string(&EigenSummary {
        verdict: r.verdict,
        max_residual: r.max_residual,
        rows: r
            .entries
            .iter()
            .map(|e| EigenRow {
                n: e.n,
                residual: e.residual,
                gamma_n: rows(&e.gamma_n),
            })
            .collect(),
        p1_constant: rows(&s.polys[1].coeff(0)),
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn density_curves(a: f64, gamma: f64, zeta: f64, t0: f64, from: f64, to: f64, points: usize) -> Result<String, JsValue> {
    density_curves_json(a, gamma, zeta, t0, from, to, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn mass_sweep(a: f64, from: f64, to: f64, points: usize) -> Result<String, JsValue> {
    mass_sweep_json(a, from, to, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn eigen_check(a: f64, gamma: f64, zeta: f64, t0: f64, n_max: usize) -> Result<String, JsValue> {
    eigen_check_json(a, gamma, zeta, t0, n_max).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn curves_have_requested_shape() {
        let v: Value = serde_json::from_str(&density_curves_json(1.0, 1.0, 1.0, 0.0, -2.0, 2.0, 9).unwrap()).unwrap();
        assert_eq!(v["t"].as_array().unwrap().len(), 9);
        assert_eq!(v["entries"].as_array().unwrap().len(), 4);
        // Off-diagonal a t e^{-t²} vanishes at t = 0.
        assert_eq!(v["entries"][1][4].as_f64().unwrap(), 0.0);
        assert!(density_curves_json(1.0, 1.0, 1.0, 0.0, 2.0, -2.0, 9).is_err());
    }

    #[test]
    fn sweep_recovers_every_mass() {
        let v: Value = serde_json::from_str(&mass_sweep_json(0.5, -3.0, 3.0, 13).unwrap()).unwrap();
        for p in v.as_array().unwrap() {
            assert!(p["deviation"].as_f64().unwrap() < 1e-8);
            assert!((p["xi_plus"].as_f64().unwrap() * p["xi_minus"].as_f64().unwrap() + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigen_check_passes_and_p1_moves() {
        let a: Value = serde_json::from_str(&eigen_check_json(1.0, 1.0, 0.0, 0.0, 8).unwrap()).unwrap();
        let b: Value = serde_json::from_str(&eigen_check_json(1.0, 1.0, 2.0, 0.0, 8).unwrap()).unwrap();
        assert_eq!(a["verdict"], true);
        assert_eq!(b["verdict"], true);
        let ga: Vec<&Value> = a["rows"].as_array().unwrap().iter().map(|r| &r["gamma_n"]).collect();
        let gb: Vec<&Value> = b["rows"].as_array().unwrap().iter().map(|r| &r["gamma_n"]).collect();
        assert_eq!(ga, gb);
        assert_ne!(a["p1_constant"], b["p1_constant"]);
    }
}
