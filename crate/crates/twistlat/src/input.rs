//! The JSON input document shared by every command.

use serde::{Deserialize, Serialize};

use crate::decomp::{JordanData, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::intlin::IMat;
use crate::lattice::{build_eta, Automorphism, Cocycle, EtaMap, Lattice};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDoc {
    pub rank: usize,
    pub gram: Vec<Vec<i64>>,
    pub phi: Vec<Vec<i64>>,
    pub labels: Vec<String>,
    /// Basis pairs (i, j) with ε(e_i, e_j) = −1; the upper-triangular
    /// normalization is built when absent.
    #[serde(default)]
    pub cocycle_minus: Option<Vec<[usize; 2]>>,
    #[serde(default)]
    pub module: Option<serde_json::Value>,
}

fn to_imat(rows: &[Vec<i64>], d: usize, what: &str) -> Result<IMat> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::BadInput(format!("field `{what}` must be a {d}x{d} matrix")));
    }
    Ok(IMat::from_fn(d, d, |i, j| rows[i][j]))
}

/// Lattice-level data every command starts from.
#[derive(Clone, Debug)]
pub struct Setup {
    pub name: String,
    pub lattice: Lattice,
    pub phi: Automorphism,
    pub eps: Cocycle,
    pub module: Option<serde_json::Value>,
}

impl Setup {
    pub fn from_doc(doc: InputDoc, name: &str) -> Result<Setup> {
        let d = doc.rank;
        if d == 0 {
            return Err(Error::BadInput("field `rank` must be positive".into()));
        }
        let lattice = Lattice::new(to_imat(&doc.gram, d, "gram")?, doc.labels)?;
        let phi = Automorphism::new(&lattice, to_imat(&doc.phi, d, "phi")?)?;
        let eps = match &doc.cocycle_minus {
            Some(pairs) => {
                if pairs.iter().any(|p| p[0] >= d || p[1] >= d) {
                    return Err(Error::BadInput("field `cocycle_minus` has an index out of range".into()));
                }
                let pairs: Vec<(usize, usize)> = pairs.iter().map(|p| (p[0], p[1])).collect();
                Cocycle::from_minus_pairs(d, &pairs)
            }
            None => Cocycle::build(&lattice),
        };
        Ok(Setup { name: name.to_string(), lattice, phi, eps, module: doc.module })
    }

    pub fn from_json(text: &str, name: &str) -> Result<Setup> {
        let doc: InputDoc = serde_json::from_str(text).map_err(|e| {
            Error::BadInput(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        Setup::from_doc(doc, name)
    }

    pub fn jordan(&self) -> Result<JordanData> {
        JordanData::new(&self.lattice, &self.phi, DEFAULT_TOL)
    }

    pub fn eta(&self, seed: u64) -> Result<EtaMap> {
        build_eta(&self.lattice, &self.phi, &self.eps, seed)
    }

    /// Parses a lattice vector given as labels with coefficients ("l1+2*l3-l4")
    /// or as a coordinate list ("1,0,-2").
    pub fn parse_vector(&self, text: &str) -> Result<Vec<i64>> {
        parse_vector(&self.lattice, text)
    }
}

pub fn parse_vector(lat: &Lattice, text: &str) -> Result<Vec<i64>> {
    let d = lat.rank();
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::NotLatticeVector(format!("cannot parse `{text}`"));
    if t.is_empty() {
        return Err(bad());
    }
    if t.contains(',') || t.parse::<i64>().is_ok() && d == 1 {
        let v: Vec<i64> = t
            .trim_matches(|c| c == '[' || c == ']')
            .split(',')
            .map(|s| s.parse::<i64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if v.len() != d {
            return Err(Error::NotLatticeVector(format!("expected {d} coordinates in `{text}`")));
        }
        return Ok(v);
    }
    let mut v = vec![0i64; d];
    let mut terms = Vec::new();
    let mut cur = String::new();
    for ch in t.chars() {
        if (ch == '+' || ch == '-') && !cur.is_empty() && !cur.ends_with('*') {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    terms.push(cur);
    for term in terms {
        let (sign, body) = match term.strip_prefix('-') {
            Some(b) => (-1, b.to_string()),
            None => (1, term.trim_start_matches('+').to_string()),
        };
        let (coef, name) = match body.split_once('*') {
            Some((c, n)) => (c.parse::<i64>().map_err(|_| bad())?, n.to_string()),
            None => (1, body),
        };
        let idx = lat.label_index(&name).ok_or_else(bad)?;
        v[idx] += sign * coef;
    }
    Ok(v)
}
