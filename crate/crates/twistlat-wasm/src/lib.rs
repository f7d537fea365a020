//! Browser bindings: decomposition, pair constants and the C table of a
//! lattice input. Every function takes the input document as JSON text or a
//! bundled name and returns JSON text; complex numbers are `[re, im]`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use twistlat::cx::{from_ivec, C64};
use twistlat::input::Setup;
use twistlat::{presets, structure};

fn setup(input: &str) -> Result<Setup, String> {
    let t = input.trim();
    let (text, name) = match presets::by_name(t) {
        Some(text) => (text, t),
        None => (t, "input"),
    };
    Setup::from_json(text, name).map_err(|e| e.to_string())
}

fn cpx(z: C64) -> Value {
    json!([z.re + 0.0, z.im + 0.0])
}

pub fn decompose_json(input: &str) -> Result<String, String> {
    let s = setup(input)?;
    let jd = s.jordan().map_err(|e| e.to_string())?;
    let blocks: Vec<Value> = jd
        .blocks
        .iter()
        .map(|b| json!({"eigenvalue": cpx(b.eigenvalue), "alpha0": cpx(b.alpha0), "dim": b.dim, "sign_class": b.sign_class}))
        .collect();
    Ok(json!({"labels": s.lattice.labels, "nilpotency_index": jd.nilpotency_index, "blocks": blocks}).to_string())
}

pub fn constants_json(input: &str, lambda: &str, mu: &str) -> Result<String, String> {
    let s = setup(input)?;
    let jd = s.jordan().map_err(|e| e.to_string())?;
    let lam = s.parse_vector(lambda).map_err(|e| e.to_string())?;
    let mu = s.parse_vector(mu).map_err(|e| e.to_string())?;
    let one = |v: &[i64]| {
        let t = structure::twist_constants(&jd, &from_ivec(v));
        json!({"coords": v, "b": cpx(t.b), "a": t.a_poly.iter().map(|&z| cpx(z)).collect::<Vec<_>>(), "c": cpx(t.c)})
    };
    let pc = structure::pair_constants(&jd, &s.lattice, &lam, &mu).map_err(|e| e.to_string())?;
    Ok(json!({"lambda": one(&lam), "mu": one(&mu), "B": cpx(pc.b), "C": cpx(pc.c)}).to_string())
}

pub fn c_table_json(input: &str) -> Result<String, String> {
    let s = setup(input)?;
    let jd = s.jordan().map_err(|e| e.to_string())?;
    let d = s.lattice.rank();
    let mut rows = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            let pc = structure::pair_constants(&jd, &s.lattice, &s.lattice.basis(i), &s.lattice.basis(j))
                .map_err(|e| e.to_string())?;
            rows.push(json!({"lambda": s.lattice.labels[i], "mu": s.lattice.labels[j], "B": cpx(pc.b), "C": cpx(pc.c)}));
        }
    }
    Ok(Value::Array(rows).to_string())
}

#[wasm_bindgen]
pub fn decompose(input: &str) -> Result<String, JsError> {
    decompose_json(input).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn constants(input: &str, lambda: &str, mu: &str) -> Result<String, JsError> {
    constants_json(input, lambda, mu).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn c_table(input: &str) -> Result<String, JsError> {
    c_table_json(input).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_rank3_table() {
        let v: Value = serde_json::from_str(&c_table_json("example-6.2").unwrap()).unwrap();
        let row = v.as_array().unwrap().iter().find(|r| r["lambda"] == "a1" && r["mu"] == "L0").unwrap();
        let t = std::f64::consts::PI / 3.0;
        assert!((row["C"][0].as_f64().unwrap() - t.cos()).abs() < 1e-10);
        assert!((row["C"][1].as_f64().unwrap() - t.sin()).abs() < 1e-10);
    }

    #[test]
    fn inline_document_and_labels() {
        let doc = r#"{"rank": 2, "gram": [[0, 1], [1, 0]], "phi": [[1, 0], [0, 1]], "labels": ["u", "v"]}"#;
        let v: Value = serde_json::from_str(&constants_json(doc, "u", "u+v").unwrap()).unwrap();
        assert!((v["B"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(v["mu"]["coords"], json!([1, 1]));
        let d: Value = serde_json::from_str(&decompose_json(doc).unwrap()).unwrap();
        assert_eq!(d["nilpotency_index"], 1);
    }

    #[test]
    fn errors_are_reported() {
        assert!(constants_json("example-6.1", "nope", "l1").is_err());
        assert!(decompose_json("{").unwrap_err().contains("BadInput"));
    }
}
