//! wasm-bindgen entry points for the static page in `www/`.
//!
//! Every function returns a JSON string; errors come back as thrown strings.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use hilbert_doubling::{
    eisenstein, run_experiment, verify_eigenform, ConstantMode, EigenCheck, Error, ExperimentConfig, GfContext,
    NarrowClassGroup, QuadraticField, RootChoice,
};

fn js(e: Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

pub fn field_info_json(d: i64) -> Result<Value, Error> {
    let field = QuadraticField::new(d)?;
    let group = NarrowClassGroup::of_field(field.clone())?;
    Ok(json!({
        "D": d,
        "discriminant": field.discriminant(),
        "fundamental_unit": field.display(field.fundamental_unit()),
        "unit_norm": field.unit_norm(),
        "narrow_class_number": group.order(),
        "structure": group.structure(),
        "representatives": group.reps().iter().map(|r| r.to_string()).collect::<Vec<_>>(),
    }))
}

/// Hecke eigenvalues of E(phi1, phi2) at primes of norm <= `max_norm` not above p.
pub fn eigenvalues_json(d: i64, p: u64, phi1: usize, phi2: usize, max_norm: u64) -> Result<Value, Error> {
    if !hilbert_doubling::arith::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let field = QuadraticField::new(d)?;
    let group = NarrowClassGroup::of_field(field.clone())?;
    let gf = GfContext::new(p, group.minimal_degree(p)?)?;
    let chars = group.characters(&gf)?;
    let pick = |i: usize| {
        chars.get(i).ok_or_else(|| Error::InvalidArgument(format!("character index {i} out of range (0..{})", chars.len())))
    };
    let primes: Vec<_> = field.primes_up_to_norm(max_norm).into_iter().filter(|q| q.norm() % p != 0).collect();
    let precision = 20 * max_norm.max(10);
    let f = eisenstein(pick(phi1)?, pick(phi2)?, precision, ConstantMode::Zero)?;
    let rows: Vec<Value> = match verify_eigenform(&f, &primes)? {
        EigenCheck::Eigen(v) => v
            .iter()
            .map(|(q, l)| json!({ "prime": q.to_string(), "norm": q.norm(), "eigenvalue": gf.display(*l) }))
            .collect(),
        EigenCheck::NotEigen { prime, .. } => {
            return Err(Error::InvalidArgument(format!("not an eigenform at {prime}")));
        }
    };
    Ok(json!({ "p": p, "m": gf.degree(), "precision": precision, "eigenvalues": rows }))
}

pub fn doubling_json(d: i64, p: u64, precision: u64, phi1: usize, phi2: usize, both_roots: bool) -> Result<Value, Error> {
    let mut config = ExperimentConfig::new(d, p, precision);
    config.phi1 = phi1;
    config.phi2 = phi2;
    config.roots = if both_roots { RootChoice::Both } else { RootChoice::First };
    let reports = run_experiment(&config)?;
    Ok(serde_json::to_value(reports).expect("reports serialize"))
}

#[wasm_bindgen]
pub fn field_info(d: i32) -> Result<String, JsValue> {
    field_info_json(d as i64).map(|v| v.to_string()).map_err(js)
}

#[wasm_bindgen]
pub fn hecke_eigenvalues(d: i32, p: u32, phi1: u32, phi2: u32, max_norm: u32) -> Result<String, JsValue> {
    eigenvalues_json(d as i64, p as u64, phi1 as usize, phi2 as usize, max_norm as u64).map(|v| v.to_string()).map_err(js)
}

#[wasm_bindgen]
pub fn doubling(d: i32, p: u32, precision: u32, phi1: u32, phi2: u32, both_roots: bool) -> Result<String, JsValue> {
    doubling_json(d as i64, p as u64, precision as u64, phi1 as usize, phi2 as usize, both_roots)
        .map(|v| v.to_string())
        .map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_info_for_d3() {
        let v = field_info_json(3).unwrap();
        assert_eq!(v["narrow_class_number"], 2);
        assert!(field_info_json(4).is_err());
    }

    #[test]
    fn eigenvalues_of_trivial_eisenstein() {
        // weight one with trivial characters: every eigenvalue is 1 + 1
        let v = eigenvalues_json(5, 7, 0, 0, 30).unwrap();
        let rows = v["eigenvalues"].as_array().unwrap();
        assert!(rows.len() > 3);
        for row in rows {
            assert_eq!(row["eigenvalue"], "2");
        }
        assert!(eigenvalues_json(5, 9, 0, 0, 30).is_err());
    }

    #[test]
    fn doubling_runs() {
        let v = doubling_json(3, 7, 2000, 0, 0, false).unwrap();
        assert_eq!(v[0]["rank"], 2);
    }
}
