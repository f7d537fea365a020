//! Truncated generalized Verma modules: sparse states, mode actions, the
//! zero-mode representation, U_λ, θ_h and Virasoro operators.
//!
//! Operators act symbolically on sparse states; nothing is truncated inside
//! an operator product except creation beyond the internal weight cap
//! (`cutoff + margin`). Checks compare only where truncation is exact.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cx::{self, c, from_ivec, r, CMat, CVec, C64};
use crate::decomp::{in_c_plus, sign_class, JordanData, SignClass};
use crate::error::{Error, Result};
use crate::input::Setup;
use crate::lattice::{Automorphism, Cocycle, EtaMap, IVec, Lattice};
use crate::report::Check;
use crate::structure;

type DetHasher = rustc_hash::FxBuildHasher;

/// Exponents of the negative-mode variables, then per y-variable the
/// polynomial degree and exponential grading, then the q-exponents.
pub type Mono = Vec<i16>;
pub type State = HashMap<Mono, C64, DetHasher>;
/// Coefficients of ζ^0..=ζ^J.
pub type ZState = Vec<State>;
/// z-exponent ↦ ζ-polynomial of states.
pub type FieldVec = BTreeMap<ExpKey, ZState>;

const EXP_DEN: f64 = 27720.0 * 65536.0;

/// A complex z-exponent on a fixed rational grid, so equal exponents compare exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExpKey(pub i64, pub i64);

impl ExpKey {
    pub fn from_c64(z: C64) -> ExpKey {
        ExpKey((z.re * EXP_DEN).round() as i64, (z.im * EXP_DEN).round() as i64)
    }

    pub fn value(self) -> C64 {
        c(self.0 as f64 / EXP_DEN, self.1 as f64 / EXP_DEN)
    }

    pub fn add(self, o: ExpKey) -> ExpKey {
        ExpKey(self.0 + o.0, self.1 + o.1)
    }

    pub const ZERO: ExpKey = ExpKey(0, 0);

    /// Splits off the integer part of the real exponent: self = rep + n.
    pub fn split_integer(self) -> (ExpKey, i64) {
        let one = EXP_DEN as i64;
        let n = self.0.div_euclid(one);
        (ExpKey(self.0 - n * one, self.1), n)
    }
}

pub fn new_state() -> State {
    State::default()
}

pub fn add_term(st: &mut State, m: Mono, v: C64) {
    if v.re == 0.0 && v.im == 0.0 {
        return;
    }
    *st.entry(m).or_insert(C64::new(0.0, 0.0)) += v;
}

pub fn axpy(acc: &mut State, a: C64, x: &State) {
    for (m, v) in x {
        add_term(acc, m.clone(), a * v);
    }
}

pub fn scaled(x: &State, a: C64) -> State {
    let mut out = new_state();
    axpy(&mut out, a, x);
    out
}

pub fn sub(x: &State, y: &State) -> State {
    let mut out = x.clone();
    axpy(&mut out, r(-1.0), y);
    out
}

pub fn max_coeff(x: &State) -> f64 {
    x.values().fold(0.0, |a, v| a.max(v.norm()))
}

pub fn zstate(j: usize) -> ZState {
    vec![new_state(); j + 1]
}

/// acc += p(ζ)·x (mod ζ^{J+1}).
pub fn zaxpy_poly(acc: &mut ZState, p: &[C64], x: &ZState) {
    let jmax = acc.len() - 1;
    for (a, pa) in p.iter().enumerate() {
        if pa.norm() == 0.0 {
            continue;
        }
        for (b, xb) in x.iter().enumerate() {
            if a + b > jmax {
                break;
            }
            axpy(&mut acc[a + b], *pa, xb);
        }
    }
}

pub fn fv_add(acc: &mut FieldVec, key: ExpKey, x: &ZState, a: C64) {
    let j = x.len() - 1;
    let e = acc.entry(key).or_insert_with(|| zstate(j));
    for (t, s) in e.iter_mut().zip(x) {
        axpy(t, a, s);
    }
}

pub fn fv_from_state(st: &State, j: usize) -> FieldVec {
    let mut z = zstate(j);
    z[0] = st.clone();
    let mut fv = FieldVec::new();
    fv.insert(ExpKey::ZERO, z);
    fv
}

/// Applies a ζ-independent operator to every entry.
pub fn fv_map(fv: &FieldVec, f: impl Fn(&State) -> State + Sync) -> FieldVec {
    fv.iter().map(|(k, z)| (*k, z.iter().map(&f).collect())).collect()
}

/// Composes with a field-valued operator: keys add, ζ-degrees convolve.
pub fn fv_compose(fv: &FieldVec, f: impl Fn(&State) -> FieldVec) -> FieldVec {
    let mut out = FieldVec::new();
    for (k, z) in fv {
        let jmax = z.len() - 1;
        for (j, s) in z.iter().enumerate() {
            if s.is_empty() {
                continue;
            }
            for (k2, z2) in f(s) {
                let e = out.entry(k.add(k2)).or_insert_with(|| zstate(jmax));
                for (j2, s2) in z2.iter().enumerate() {
                    if j + j2 <= jmax {
                        axpy(&mut e[j + j2], r(1.0), s2);
                    }
                }
            }
        }
    }
    out
}

pub fn fv_scale_poly(fv: &FieldVec, p: &[C64]) -> FieldVec {
    fv.iter()
        .map(|(k, z)| {
            let mut out = zstate(z.len() - 1);
            zaxpy_poly(&mut out, p, z);
            (*k, out)
        })
        .collect()
}

pub fn fv_shift(fv: &FieldVec, e: C64) -> FieldVec {
    let d = ExpKey::from_c64(e);
    fv.iter().map(|(k, z)| (k.add(d), z.clone())).collect()
}

/// Rewrites every z^{c+n}, n ∈ ℤ, as z^c e^{nζ} with e^{nζ} expanded to ζ-degree
/// `jmax`. Two fields that agree as functions of ζ = log z agree after this
/// map, even when one carries e^{nζ} inside a truncated ζ-series.
pub fn fv_collapse(fv: &FieldVec, jmax: usize) -> FieldVec {
    let mut out = FieldVec::new();
    for (k, z) in fv {
        let (rep, n) = k.split_integer();
        let mut p = vec![r(0.0); jmax + 1];
        if jmax >= 1 {
            p[1] = r(n as f64);
        }
        let e = exp_poly(&p, jmax);
        let mut zz = zstate(jmax);
        zaxpy_poly(&mut zz, &e, z);
        fv_add(&mut out, rep, &zz, r(1.0));
    }
    out
}

pub fn fv_sub(x: &FieldVec, y: &FieldVec) -> FieldVec {
    let mut out = x.clone();
    for (k, z) in y {
        fv_add(&mut out, *k, z, r(-1.0));
    }
    out
}

/// exp of a ζ-polynomial, truncated at degree `jmax`.
pub fn exp_poly(p: &[C64], jmax: usize) -> Vec<C64> {
    let mut out = vec![r(0.0); jmax + 1];
    out[0] = p.first().copied().unwrap_or(r(0.0)).exp();
    let q: Vec<C64> = (0..=jmax).map(|k| if k == 0 { r(0.0) } else { p.get(k).copied().unwrap_or(r(0.0)) }).collect();
    // f' = q' f
    for n in 1..=jmax {
        let mut s = r(0.0);
        for k in 1..=n {
            s += q[k] * k as f64 * out[n - k];
        }
        out[n] = s / n as f64;
    }
    out
}

fn poly_mul(a: &[C64], b: &[C64], jmax: usize) -> Vec<C64> {
    let mut out = vec![r(0.0); jmax + 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if i + j <= jmax {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn poly_add(a: &mut Vec<C64>, b: &[C64], s: C64) {
    if a.len() < b.len() {
        a.resize(b.len(), r(0.0));
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += s * y;
    }
}

fn cpair(z: [f64; 2]) -> C64 {
    c(z[0], z[1])
}

/// Primitive zero-mode operators. Linear ones (`scalar`, `mul_y`, `diff_y`,
/// `euler`) build zero modes; invertible ones (`scalar`, `mul_q`, `exp_y`,
/// `shift_y`, `phase_euler`) build U-descriptors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum ZeroOp {
    Scalar { c: [f64; 2] },
    /// c·y
    MulY { var: usize, c: [f64; 2] },
    /// c·∂_y
    DiffY { var: usize, c: [f64; 2] },
    /// c·q∂_q
    Euler { var: usize, c: [f64; 2] },
    /// q^n
    MulQ { var: usize, n: i64 },
    /// e^{k·s·y} with s the variable's exponential scale
    ExpY { var: usize, k: i64 },
    /// e^{c∂_y}
    ShiftY { var: usize, c: [f64; 2] },
    /// e^{c·q∂_q}
    PhaseEuler { var: usize, c: [f64; 2] },
}

impl ZeroOp {
    fn inverse(&self) -> Result<ZeroOp> {
        let neg = |z: [f64; 2]| [-z[0], -z[1]];
        Ok(match self {
            ZeroOp::Scalar { c: z } => {
                let v = r(1.0) / cpair(*z);
                ZeroOp::Scalar { c: [v.re, v.im] }
            }
            ZeroOp::MulQ { var, n } => ZeroOp::MulQ { var: *var, n: -n },
            ZeroOp::ExpY { var, k } => ZeroOp::ExpY { var: *var, k: -k },
            ZeroOp::ShiftY { var, c: z } => ZeroOp::ShiftY { var: *var, c: neg(*z) },
            ZeroOp::PhaseEuler { var, c: z } => ZeroOp::PhaseEuler { var: *var, c: neg(*z) },
            other => return Err(Error::RepInconsistent(format!("{other:?} is not invertible in a U-descriptor"))),
        })
    }

    fn var(&self) -> Option<(bool, usize)> {
        match self {
            ZeroOp::Scalar { .. } => None,
            ZeroOp::MulY { var, .. } | ZeroOp::DiffY { var, .. } | ZeroOp::ExpY { var, .. } | ZeroOp::ShiftY { var, .. } => {
                Some((true, *var))
            }
            ZeroOp::Euler { var, .. } | ZeroOp::MulQ { var, .. } | ZeroOp::PhaseEuler { var, .. } => Some((false, *var)),
        }
    }
}

/// Zero-mode data: operators for a basis of h₀ and optional U-descriptors for
/// the lattice basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroModeRep {
    pub ny: usize,
    pub nq: usize,
    /// s_j in e^{k·s_j·y_j}
    #[serde(default)]
    pub y_scales: Vec<[f64; 2]>,
    /// Columns spanning h₀ in lattice coordinates.
    pub zero_basis: Vec<Vec<[f64; 2]>>,
    /// Zero mode of each `zero_basis` vector as a sum of linear primitives.
    pub zero_modes: Vec<Vec<ZeroOp>>,
    /// U_{e_i} as a product of primitives, leftmost applied last.
    #[serde(default)]
    pub u: Option<Vec<Vec<ZeroOp>>>,
}

fn cvec_json(v: &CVec) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn sc(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

impl ZeroModeRep {
    /// The rank-4 unipotent example: R = C[x₁₀, q₁^±, q₂^±] with e^{±2πix₁₀} adjoined.
    pub fn example_61() -> ZeroModeRep {
        let tpi = cx::two_pi_i();
        // v = (λ₁, λ₂/2πi, 2πiλ₃, λ₄)
        let cols = [
            CVec::from_vec(vec![r(1.0), r(0.0), r(0.0), r(0.0)]),
            CVec::from_vec(vec![r(0.0), r(1.0) / tpi, r(0.0), r(0.0)]),
            CVec::from_vec(vec![r(0.0), r(0.0), tpi, r(0.0)]),
            CVec::from_vec(vec![r(0.0), r(0.0), r(0.0), r(1.0)]),
        ];
        let pi = std::f64::consts::PI;
        ZeroModeRep {
            ny: 1,
            nq: 2,
            y_scales: vec![sc(tpi)],
            zero_basis: cols.iter().map(cvec_json).collect(),
            zero_modes: vec![
                vec![ZeroOp::MulY { var: 0, c: [1.0, 0.0] }],
                vec![ZeroOp::Euler { var: 0, c: sc(r(1.0) / tpi) }],
                vec![ZeroOp::DiffY { var: 0, c: [-1.0, 0.0] }],
                vec![ZeroOp::Euler { var: 1, c: [1.0, 0.0] }],
            ],
            u: Some(vec![
                vec![ZeroOp::MulQ { var: 1, n: 1 }],
                vec![ZeroOp::PhaseEuler { var: 0, c: [0.0, pi] }, ZeroOp::ExpY { var: 0, k: -1 }],
                vec![ZeroOp::MulQ { var: 0, n: 1 }, ZeroOp::PhaseEuler { var: 1, c: [0.0, -pi / 6.0] }],
                vec![ZeroOp::PhaseEuler { var: 1, c: [0.0, pi] }, ZeroOp::ShiftY { var: 0, c: [-1.0, 0.0] }],
            ]),
        }
    }

    /// The rank-3 example (basis α₁, δ, Λ₀): R = C[x₁₀, q^±] with e^{±√2x₁₀} adjoined.
    pub fn example_62() -> ZeroModeRep {
        let tpi = cx::two_pi_i();
        let s2 = std::f64::consts::SQRT_2;
        // v = (−(2πi/√2)Λ₀, α₁/√2, −(√2/2πi)δ)
        let cols = [
            CVec::from_vec(vec![r(0.0), r(0.0), -tpi / s2]),
            CVec::from_vec(vec![r(1.0 / s2), r(0.0), r(0.0)]),
            CVec::from_vec(vec![r(0.0), -r(s2) / tpi, r(0.0)]),
        ];
        let pi = std::f64::consts::PI;
        ZeroModeRep {
            ny: 1,
            nq: 1,
            y_scales: vec![[s2, 0.0]],
            zero_basis: cols.iter().map(cvec_json).collect(),
            zero_modes: vec![
                vec![ZeroOp::MulY { var: 0, c: [1.0, 0.0] }],
                vec![ZeroOp::DiffY { var: 0, c: [-1.0, 0.0] }],
                vec![ZeroOp::Euler { var: 0, c: sc(-r(s2) / tpi) }],
            ],
            u: Some(vec![
                vec![
                    ZeroOp::Scalar { c: [0.0, -1.0] },
                    ZeroOp::PhaseEuler { var: 0, c: [0.0, pi / 3.0] },
                    ZeroOp::ExpY { var: 0, k: -1 },
                ],
                vec![ZeroOp::PhaseEuler { var: 0, c: [0.0, pi] }, ZeroOp::ShiftY { var: 0, c: sc(tpi / s2) }],
                vec![ZeroOp::MulQ { var: 0, n: 1 }],
            ]),
        }
    }

    /// A canonical choice of R. For φ = Id it is the twisted group algebra
    /// C_ε[Q] with U-descriptors; otherwise h₀ is split into Darboux pairs
    /// (y, ∂_y) for the form (N·|·) plus Euler operators on its radical, and
    /// no U-descriptors are produced.
    pub fn polarization(jd: &JordanData, lat: &Lattice, eps: &Cocycle) -> Result<ZeroModeRep> {
        let d = jd.rank();
        let untwisted = jd.zero_block().map(|b| jd.blocks[b].dim == d).unwrap_or(false)
            && cx::max_abs(&jd.nilp) < 1e-12;
        if untwisted {
            let zero_basis = (0..d)
                .map(|i| (0..d).map(|j| if i == j { [1.0, 0.0] } else { [0.0, 0.0] }).collect())
                .collect();
            let zero_modes = (0..d)
                .map(|i| {
                    (0..d)
                        .filter(|&j| lat.gram[(i, j)] != 0)
                        .map(|j| ZeroOp::Euler { var: j, c: [lat.gram[(i, j)] as f64, 0.0] })
                        .collect()
                })
                .collect();
            let u = (0..d)
                .map(|i| {
                    let mut ops = vec![ZeroOp::MulQ { var: i, n: 1 }];
                    for j in 0..d {
                        if eps.table[i][j] < 0 {
                            ops.push(ZeroOp::PhaseEuler { var: j, c: [0.0, std::f64::consts::PI] });
                        }
                    }
                    ops
                })
                .collect();
            return Ok(ZeroModeRep { ny: 0, nq: d, y_scales: vec![], zero_basis, zero_modes, u: Some(u) });
        }
        let Some(zb) = jd.zero_block() else {
            return Ok(ZeroModeRep {
                ny: 0,
                nq: 0,
                y_scales: vec![],
                zero_basis: vec![],
                zero_modes: vec![],
                u: None,
            });
        };
        let w = jd.blocks[zb].basis.clone();
        let k = w.ncols();
        let omega = |a: &CVec, b: &CVec| jd.form(&(&jd.nilp * a), b);
        let mut rest: Vec<CVec> = (0..k).map(|i| w.column(i).into_owned()).collect();
        let mut pairs: Vec<(CVec, CVec)> = Vec::new();
        loop {
            let mut found = None;
            'outer: for i in 0..rest.len() {
                for j in 0..rest.len() {
                    if i != j && omega(&rest[i], &rest[j]).norm() > 1e-9 {
                        found = Some((i, j));
                        break 'outer;
                    }
                }
            }
            let Some((i, j)) = found else { break };
            let p = rest[i].clone();
            let q = &rest[j] / omega(&rest[i], &rest[j]);
            let mut next = Vec::new();
            for (t, v) in rest.iter().enumerate() {
                if t == i || t == j {
                    continue;
                }
                // symplectic projection away from span{p, q}
                let v2 = v - &p * omega(v, &q) + &q * omega(v, &p);
                next.push(v2);
            }
            rest = next;
            pairs.push((p, q));
        }
        let ny = pairs.len();
        let mut zero_basis = Vec::new();
        let mut zero_modes = Vec::new();
        for (t, (p, _)) in pairs.iter().enumerate() {
            zero_basis.push(cvec_json(p));
            zero_modes.push(vec![ZeroOp::DiffY { var: t, c: [1.0, 0.0] }]);
        }
        for (t, (_, q)) in pairs.iter().enumerate() {
            zero_basis.push(cvec_json(q));
            zero_modes.push(vec![ZeroOp::MulY { var: t, c: [1.0, 0.0] }]);
        }
        for (t, v) in rest.iter().enumerate() {
            zero_basis.push(cvec_json(v));
            zero_modes.push(vec![ZeroOp::Euler { var: t, c: [1.0, 0.0] }]);
        }
        Ok(ZeroModeRep {
            ny,
            nq: rest.len(),
            y_scales: vec![[1.0, 0.0]; ny],
            zero_basis,
            zero_modes,
            u: None,
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Windows {
    /// Maximal degree in each polynomial zero-mode variable.
    pub poly_degree: i16,
    /// Exponential grading range [−E, E].
    pub exp_range: i16,
    /// q-exponent range [−Q, Q].
    pub q_range: i16,
}

impl Default for Windows {
    fn default() -> Self {
        Windows { poly_degree: 1, exp_range: 1, q_range: 1 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockConfig {
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
    /// Extra weight kept internally above the cutoff.
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub windows: Windows,
    /// Highest ζ-degree carried in field computations.
    #[serde(default = "default_zeta_order")]
    pub zeta_order: usize,
    #[serde(default = "default_basis_limit")]
    pub basis_limit: usize,
}

fn default_cutoff() -> f64 {
    3.0
}
fn default_margin() -> f64 {
    2.0
}
fn default_zeta_order() -> usize {
    4
}
fn default_basis_limit() -> usize {
    20_000
}

impl Default for FockConfig {
    fn default() -> Self {
        FockConfig {
            cutoff: default_cutoff(),
            margin: default_margin(),
            windows: Windows::default(),
            zeta_order: default_zeta_order(),
            basis_limit: default_basis_limit(),
        }
    }
}

/// The `module` section of an input document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleSpec {
    #[serde(default = "default_preset")]
    pub preset: String,
    #[serde(default)]
    pub rep: Option<ZeroModeRep>,
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub windows: Windows,
    #[serde(default = "default_zeta_order")]
    pub zeta_order: usize,
    #[serde(default = "default_basis_limit")]
    pub basis_limit: usize,
}

fn default_preset() -> String {
    "polarization".into()
}

impl ModuleSpec {
    pub fn from_setup(setup: &Setup) -> Result<ModuleSpec> {
        match &setup.module {
            None => Ok(serde_json::from_str("{}").expect("defaults")),
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| Error::BadInput(format!("field `module`: {e}"))),
        }
    }

    pub fn config(&self) -> FockConfig {
        FockConfig {
            cutoff: self.cutoff,
            margin: self.margin,
            windows: self.windows,
            zeta_order: self.zeta_order,
            basis_limit: self.basis_limit,
        }
    }

    pub fn rep(&self, jd: &JordanData, setup: &Setup) -> Result<ZeroModeRep> {
        match self.preset.as_str() {
            "example-6.1" => Ok(ZeroModeRep::example_61()),
            "example-6.2" => Ok(ZeroModeRep::example_62()),
            "polarization" => ZeroModeRep::polarization(jd, &setup.lattice, &setup.eps),
            "custom" => self.rep.clone().ok_or_else(|| Error::BadInput("field `module.rep` is required for preset `custom`".into())),
            other => Err(Error::BadInput(format!("field `module.preset`: unknown preset `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VarInfo {
    pub block: usize,
    /// m = α₀ + level
    pub level: i64,
    pub index: usize,
    pub m: C64,
    pub weight: f64,
}

/// Linear combination of linear zero-mode primitives.
#[derive(Clone, Debug)]
pub struct LinearZero {
    pub mul: Vec<C64>,
    pub diff: Vec<C64>,
    pub euler: Vec<C64>,
    pub scalar: C64,
}

impl LinearZero {
    fn zero(ny: usize, nq: usize) -> LinearZero {
        LinearZero { mul: vec![r(0.0); ny], diff: vec![r(0.0); ny], euler: vec![r(0.0); nq], scalar: r(0.0) }
    }

    fn axpy(&mut self, a: C64, o: &LinearZero) {
        for (x, y) in self.mul.iter_mut().zip(&o.mul) {
            *x += a * y;
        }
        for (x, y) in self.diff.iter_mut().zip(&o.diff) {
            *x += a * y;
        }
        for (x, y) in self.euler.iter_mut().zip(&o.euler) {
            *x += a * y;
        }
        self.scalar += a * o.scalar;
    }
}

/// How a single mode acts.
#[derive(Clone, Debug)]
pub enum ModeOp {
    Mul(Vec<(usize, C64)>),
    Diff(Vec<(usize, C64)>),
    Zero(LinearZero),
}

/// A U-descriptor: scalar times primitives, the last one applied first.
#[derive(Clone, Debug)]
pub struct UOp {
    pub scalar: C64,
    pub ops: Vec<ZeroOp>,
}

impl UOp {
    pub fn identity() -> UOp {
        UOp { scalar: r(1.0), ops: vec![] }
    }

    /// self ∘ o
    pub fn then(&self, o: &UOp) -> UOp {
        let mut ops = self.ops.clone();
        ops.extend(o.ops.iter().cloned());
        UOp { scalar: self.scalar * o.scalar, ops }
    }

    pub fn inverse(&self) -> Result<UOp> {
        let ops = self.ops.iter().rev().map(|o| o.inverse()).collect::<Result<Vec<_>>>()?;
        Ok(UOp { scalar: r(1.0) / self.scalar, ops })
    }

    pub fn scale(&self, s: C64) -> UOp {
        UOp { scalar: self.scalar * s, ops: self.ops.clone() }
    }
}

/// θ_h(ζ) = exp(Σ_k ζ^k X_k) in canonical form.
#[derive(Clone, Debug)]
pub struct ThetaOp {
    /// ζ-polynomials per y-variable for the multiplication and derivative parts.
    a: Vec<Vec<C64>>,
    b: Vec<Vec<C64>>,
    euler: Vec<Vec<C64>>,
    scalar: Vec<C64>,
}

pub struct FockModule {
    pub jd: JordanData,
    pub lattice: Lattice,
    pub eps: Cocycle,
    pub eta: EtaMap,
    pub b_log: CMat,
    pub rep: ZeroModeRep,
    pub config: FockConfig,
    pub cap: f64,
    pub vars: Vec<VarInfo>,
    var_index: HashMap<(usize, i64, usize), usize>,
    /// Per block: basis columns and coordinates map (pseudo-inverse).
    pub block_basis: Vec<CMat>,
    block_coords: Vec<CMat>,
    zero_lin: Vec<LinearZero>,
    y_scales: Vec<C64>,
    /// Truncated basis, sorted.
    pub basis: Vec<Mono>,
    nv: usize,
    zero_weight_cap: i16,
}

impl FockModule {
    pub fn from_setup(setup: &Setup, seed: u64) -> Result<FockModule> {
        let jd = setup.jordan()?;
        let spec = ModuleSpec::from_setup(setup)?;
        let rep = spec.rep(&jd, setup)?;
        FockModule::build(setup, jd, rep, spec.config(), seed)
    }

    pub fn build(setup: &Setup, jd: JordanData, rep: ZeroModeRep, config: FockConfig, seed: u64) -> Result<FockModule> {
        if !(config.cutoff >= 0.0) || !(config.margin >= 0.0) {
            return Err(Error::BadInput("cutoff and margin must be nonnegative".into()));
        }
        let d = jd.rank();
        let cap = config.cutoff + config.margin;
        let zb = jd.zero_block();
        let dim0 = zb.map(|b| jd.blocks[b].dim).unwrap_or(0);
        if rep.zero_basis.len() != dim0 || rep.zero_modes.len() != dim0 {
            return Err(Error::RepInconsistent(format!(
                "h₀ has dimension {dim0}; the representation lists {} basis vectors and {} zero modes",
                rep.zero_basis.len(),
                rep.zero_modes.len()
            )));
        }
        let mut y_scales: Vec<C64> = rep.y_scales.iter().map(|z| cpair(*z)).collect();
        y_scales.resize(rep.ny, r(1.0));
        for ops in rep.zero_modes.iter().chain(rep.u.iter().flatten()) {
            for op in ops {
                if let Some((is_y, v)) = op.var() {
                    let n = if is_y { rep.ny } else { rep.nq };
                    if v >= n {
                        return Err(Error::RepInconsistent(format!("{op:?} refers to a missing variable")));
                    }
                }
            }
        }
        if let Some(u) = &rep.u {
            if u.len() != d {
                return Err(Error::RepInconsistent(format!("{} U-descriptors for rank {d}", u.len())));
            }
        }
        let mut block_basis = Vec::new();
        for (b, blk) in jd.blocks.iter().enumerate() {
            if Some(b) == zb {
                let w = CMat::from_fn(d, dim0, |i, j| cpair(rep.zero_basis[j].get(i).copied().unwrap_or([0.0, 0.0])));
                let resid = cx::max_abs(&(&blk.projector * &w - &w));
                let rank = w.clone().svd(false, false).singular_values.iter().filter(|s| **s > 1e-9).count();
                if resid > 1e-9 || rank != dim0 {
                    return Err(Error::RepInconsistent("zero_basis does not span h₀".into()));
                }
                block_basis.push(w);
            } else {
                block_basis.push(blk.basis.clone());
            }
        }
        let block_coords = block_basis
            .iter()
            .map(|w| {
                if w.ncols() == 0 {
                    Ok(CMat::zeros(0, d))
                } else {
                    w.clone().pseudo_inverse(1e-12).map_err(|e| Error::SingularRestriction(e.to_string()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mut zero_lin = Vec::new();
        for ops in &rep.zero_modes {
            let mut lz = LinearZero::zero(rep.ny, rep.nq);
            for op in ops {
                match op {
                    ZeroOp::Scalar { c: z } => lz.scalar += cpair(*z),
                    ZeroOp::MulY { var, c: z } => lz.mul[*var] += cpair(*z),
                    ZeroOp::DiffY { var, c: z } => lz.diff[*var] += cpair(*z),
                    ZeroOp::Euler { var, c: z } => lz.euler[*var] += cpair(*z),
                    other => return Err(Error::RepInconsistent(format!("{other:?} is not linear"))),
                }
            }
            zero_lin.push(lz);
        }
        let mut vars = Vec::new();
        let mut var_index = HashMap::new();
        for (b, blk) in jd.blocks.iter().enumerate() {
            let mut level = 0i64;
            loop {
                let m = if Some(b) == zb { r(level as f64) } else { blk.alpha0 + level as f64 };
                let w = -m.re;
                if w > cap + 1e-9 {
                    break;
                }
                if sign_class(m) == SignClass::Minus {
                    for i in 0..blk.dim {
                        var_index.insert((b, level, i), vars.len());
                        vars.push(VarInfo { block: b, level, index: i, m, weight: w.max(0.0) });
                    }
                }
                level -= 1;
            }
        }
        let nv = vars.len();
        let mut fm = FockModule {
            lattice: setup.lattice.clone(),
            eps: setup.eps.clone(),
            eta: setup.eta(seed)?,
            b_log: structure::b_log_matrix(&jd)?,
            jd,
            rep,
            cap,
            vars,
            var_index,
            block_basis,
            block_coords,
            zero_lin,
            y_scales,
            basis: vec![],
            nv,
            zero_weight_cap: config.windows.poly_degree + config.margin.ceil() as i16,
            config,
        };
        fm.basis = fm.enumerate_basis()?;
        fm.check_heisenberg_zero()?;
        if fm.rep.u.is_some() {
            fm.fit_eta(&setup.phi, seed);
        }
        Ok(fm)
    }

    /// η is fixed only up to a character of Q; given U operators, its basis
    /// values are pinned by U_{φe} = η(e)e^{2πic_e}U_eτ_e. Keeps the default
    /// when some generator's ratio is not ±1.
    fn fit_eta(&mut self, phi: &Automorphism, seed: u64) {
        let d = self.lattice.rank();
        let mut signs = Vec::with_capacity(d);
        for i in 0..d {
            let e = self.lattice.basis(i);
            let (Ok(left), Ok(u), Ok(tau)) = (self.u_descriptor(&phi.apply(&e)), self.u_descriptor(&e), self.tau_op(&e)) else {
                return;
            };
            let pre = (cx::two_pi_i() * structure::c_lambda(&self.jd, &from_ivec(&e))).exp();
            let right = u.then(&tau).scale(pre);
            let fit = [1i8, -1].into_iter().find(|&sg| {
                self.max_residual(|s| Ok(sub(&self.apply_uop(&left, s), &scaled(&self.apply_uop(&right, s), r(sg as f64)))))
                    < 1e-9
            });
            match fit {
                Some(sg) => signs.push(sg),
                None => return,
            }
        }
        if let Some(eta) = EtaMap::from_basis(signs, &self.lattice, phi, &self.eps, seed) {
            self.eta = eta;
        }
    }

    fn mono_len(&self) -> usize {
        self.nv + 2 * self.rep.ny + self.rep.nq
    }

    fn yd(&self, j: usize) -> usize {
        self.nv + j
    }

    fn ye(&self, j: usize) -> usize {
        self.nv + self.rep.ny + j
    }

    fn qi(&self, l: usize) -> usize {
        self.nv + 2 * self.rep.ny + l
    }

    pub fn vacuum(&self) -> Mono {
        vec![0; self.mono_len()]
    }

    pub fn weight(&self, m: &Mono) -> f64 {
        self.vars.iter().zip(m.iter()).map(|(v, &e)| v.weight * e as f64).sum()
    }

    pub fn var_of(&self, block: usize, level: i64, index: usize) -> Option<usize> {
        self.var_index.get(&(block, level, index)).copied()
    }

    fn enumerate_basis(&self) -> Result<Vec<Mono>> {
        let cutoff = self.config.cutoff;
        let win = self.config.windows;
        let mut fock: Vec<Vec<i16>> = vec![vec![0; self.nv]];
        for v in 0..self.nv {
            let mut next = Vec::new();
            for m in &fock {
                let w: f64 = (0..v).map(|u| self.vars[u].weight * m[u] as f64).sum();
                let mut e = 0i16;
                loop {
                    let mut m2 = m.clone();
                    m2[v] = e;
                    next.push(m2);
                    e += 1;
                    let w2 = w + self.vars[v].weight * e as f64;
                    let deg_ok = self.vars[v].weight > 0.0 || e <= win.poly_degree;
                    if w2 > cutoff + 1e-9 || !deg_ok {
                        break;
                    }
                }
            }
            fock = next;
            if fock.len() > self.config.basis_limit {
                return Err(Error::BasisTooLarge { size: fock.len(), limit: self.config.basis_limit });
            }
        }
        let mut zero: Vec<Vec<i16>> = vec![vec![]];
        let ranges: Vec<(i16, i16)> = (0..self.rep.ny)
            .map(|_| (0, win.poly_degree))
            .chain((0..self.rep.ny).map(|_| (-win.exp_range, win.exp_range)))
            .chain((0..self.rep.nq).map(|_| (-win.q_range, win.q_range)))
            .collect();
        for (lo, hi) in ranges {
            zero = zero
                .into_iter()
                .flat_map(|z| {
                    (lo..=hi).map(move |e| {
                        let mut z2 = z.clone();
                        z2.push(e);
                        z2
                    })
                })
                .collect();
        }
        let size = fock.len() * zero.len();
        if size > self.config.basis_limit {
            return Err(Error::BasisTooLarge { size, limit: self.config.basis_limit });
        }
        let mut basis: Vec<Mono> = Vec::with_capacity(size);
        for f in &fock {
            for z in &zero {
                let mut m = f.clone();
                m.extend_from_slice(z);
                basis.push(m);
            }
        }
        basis.sort_by(|a, b| self.weight(a).partial_cmp(&self.weight(b)).unwrap().then(a.cmp(b)));
        Ok(basis)
    }

    /// Product of two monomials, or None if it leaves the weight cap `out_cap`.
    pub fn mono_mul(&self, a: &Mono, b: &Mono, out_cap: f64) -> Option<Mono> {
        let m: Mono = a.iter().zip(b).map(|(x, y)| x + y).collect();
        if self.weight(&m) > out_cap + 1e-9 {
            return None;
        }
        for (v, info) in self.vars.iter().enumerate() {
            if info.weight == 0.0 && m[v] > self.zero_weight_cap {
                return None;
            }
        }
        Some(m)
    }

    /// Number of basis states per weight.
    pub fn weight_histogram(&self) -> Vec<(f64, usize)> {
        let mut h: BTreeMap<i64, usize> = BTreeMap::new();
        for m in &self.basis {
            *h.entry((self.weight(m) * 1e6).round() as i64).or_default() += 1;
        }
        h.into_iter().map(|(k, n)| (k as f64 / 1e6, n)).collect()
    }

    pub fn basis_states(&self) -> impl Iterator<Item = State> + '_ {
        self.basis.iter().map(|m| {
            let mut s = new_state();
            s.insert(m.clone(), r(1.0));
            s
        })
    }

    // ---- zero-mode primitives ----

    fn apply_mul_y(&self, j: usize, st: &State) -> State {
        let mut out = new_state();
        let p = self.yd(j);
        for (m, v) in st {
            let mut m2 = m.clone();
            m2[p] += 1;
            add_term(&mut out, m2, *v);
        }
        out
    }

    fn apply_diff_y(&self, j: usize, st: &State) -> State {
        let mut out = new_state();
        let (p, e) = (self.yd(j), self.ye(j));
        for (m, v) in st {
            let k = m[e];
            if k != 0 {
                add_term(&mut out, m.clone(), v * self.y_scales[j] * k as f64);
            }
            if m[p] > 0 {
                let mut m2 = m.clone();
                m2[p] -= 1;
                add_term(&mut out, m2, v * m[p] as f64);
            }
        }
        out
    }

    pub fn apply_zero_op(&self, op: &ZeroOp, st: &State) -> State {
        let mut out = new_state();
        match op {
            ZeroOp::Scalar { c: z } => return scaled(st, cpair(*z)),
            ZeroOp::MulY { var, c: z } => return scaled(&self.apply_mul_y(*var, st), cpair(*z)),
            ZeroOp::DiffY { var, c: z } => return scaled(&self.apply_diff_y(*var, st), cpair(*z)),
            ZeroOp::Euler { var, c: z } => {
                let q = self.qi(*var);
                for (m, v) in st {
                    add_term(&mut out, m.clone(), v * cpair(*z) * m[q] as f64);
                }
            }
            ZeroOp::MulQ { var, n } => {
                let q = self.qi(*var);
                for (m, v) in st {
                    let mut m2 = m.clone();
                    m2[q] += *n as i16;
                    add_term(&mut out, m2, *v);
                }
            }
            ZeroOp::ExpY { var, k } => {
                let e = self.ye(*var);
                for (m, v) in st {
                    let mut m2 = m.clone();
                    m2[e] += *k as i16;
                    add_term(&mut out, m2, *v);
                }
            }
            ZeroOp::ShiftY { var, c: z } => {
                // y^p e^{ksy} ↦ e^{ksc} (y+c)^p e^{ksy}
                let sh = cpair(*z);
                let (p, e) = (self.yd(*var), self.ye(*var));
                for (m, v) in st {
                    let pre = (self.y_scales[*var] * sh * m[e] as f64).exp();
                    let deg = m[p] as usize;
                    for rr in 0..=deg {
                        let mut m2 = m.clone();
                        m2[p] = rr as i16;
                        add_term(&mut out, m2, v * pre * cx::binom(deg, rr) * sh.powu((deg - rr) as u32));
                    }
                }
            }
            ZeroOp::PhaseEuler { var, c: z } => {
                let q = self.qi(*var);
                for (m, v) in st {
                    add_term(&mut out, m.clone(), v * (cpair(*z) * m[q] as f64).exp());
                }
            }
        }
        out
    }

    pub fn apply_linear_zero(&self, lz: &LinearZero, st: &State) -> State {
        let mut out = scaled(st, lz.scalar);
        for j in 0..self.rep.ny {
            if lz.mul[j].norm() != 0.0 {
                axpy(&mut out, lz.mul[j], &self.apply_mul_y(j, st));
            }
            if lz.diff[j].norm() != 0.0 {
                axpy(&mut out, lz.diff[j], &self.apply_diff_y(j, st));
            }
        }
        for l in 0..self.rep.nq {
            if lz.euler[l].norm() != 0.0 {
                let q = self.qi(l);
                for (m, v) in st {
                    add_term(&mut out, m.clone(), v * lz.euler[l] * m[q] as f64);
                }
            }
        }
        out
    }

    /// The zero mode of h ∈ h (projected to h₀) as a linear combination of primitives.
    pub fn linear_zero(&self, h: &CVec) -> LinearZero {
        let mut lz = LinearZero::zero(self.rep.ny, self.rep.nq);
        if let Some(zb) = self.jd.zero_block() {
            let coef = &self.block_coords[zb] * self.jd.pi0(h);
            for (i, l) in self.zero_lin.iter().enumerate() {
                lz.axpy(coef[i], l);
            }
        }
        lz
    }

    fn check_heisenberg_zero(&self) -> Result<()> {
        let Some(zb) = self.jd.zero_block() else { return Ok(()) };
        let w = &self.block_basis[zb];
        let probe: Vec<State> = self.basis_states().filter(|s| self.weight(s.keys().next().unwrap()) == 0.0).collect();
        for i in 0..w.ncols() {
            for j in 0..w.ncols() {
                let (a, b) = (w.column(i).into_owned(), w.column(j).into_owned());
                let expect = self.jd.form(&(&self.jd.nilp * &a), &b);
                for s in &probe {
                    let la = self.linear_zero(&a);
                    let lb = self.linear_zero(&b);
                    let ab = self.apply_linear_zero(&la, &self.apply_linear_zero(&lb, s));
                    let ba = self.apply_linear_zero(&lb, &self.apply_linear_zero(&la, s));
                    let resid = max_coeff(&sub(&sub(&ab, &ba), &scaled(s, expect)));
                    if resid > 1e-9 {
                        return Err(Error::RepInconsistent(format!(
                            "[h_{i}, h_{j}] differs from (Nh_{i}|h_{j}) by {resid:e}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    // ---- modes ----

    /// Mode index m = α₀(block) + level.
    pub fn mode_value(&self, block: usize, level: i64) -> C64 {
        if Some(block) == self.jd.zero_block() {
            r(level as f64)
        } else {
            self.jd.blocks[block].alpha0 + level as f64
        }
    }

    /// Level in block `b` of the mode −m, where m = α₀(b′) + level′.
    fn partner_level(&self, b: usize, m: C64) -> i64 {
        let base = self.mode_value(b, 0);
        (-m - base).re.round() as i64
    }

    /// a_{(m+N)} with m = α₀(block) + level.
    pub fn mode_op(&self, a: &CVec, block: usize, level: i64) -> Result<ModeOp> {
        let m = self.mode_value(block, level);
        let blk = self.jd.blocks.get(block).ok_or_else(|| Error::UnknownBlock(format!("block {block}")))?;
        let pa = &blk.projector * a;
        match sign_class(m) {
            SignClass::Zero => Ok(ModeOp::Zero(self.linear_zero(&pa))),
            SignClass::Minus => {
                let coef = &self.block_coords[block] * pa;
                let mut out = Vec::new();
                for i in 0..blk.dim {
                    if coef[i].norm() > 0.0 {
                        if let Some(v) = self.var_of(block, level, i) {
                            out.push((v, coef[i]));
                        }
                    }
                }
                Ok(ModeOp::Mul(out))
            }
            SignClass::Plus => {
                let bp = self.jd.partner(block).ok_or_else(|| Error::UnknownBlock(format!("partner of block {block}")))?;
                let lp = self.partner_level(bp, m);
                let mn = &pa * m + &self.jd.nilp * &pa;
                let wb = &self.block_basis[bp];
                let mut out = Vec::new();
                for i in 0..wb.ncols() {
                    let cf = self.jd.form(&mn, &wb.column(i).into_owned());
                    if cf.norm() > 1e-300 {
                        if let Some(v) = self.var_of(bp, lp, i) {
                            out.push((v, cf));
                        }
                    }
                }
                Ok(ModeOp::Diff(out))
            }
        }
    }

    pub fn apply_mode_op(&self, op: &ModeOp, st: &State) -> State {
        let mut out = new_state();
        match op {
            ModeOp::Mul(list) => {
                for (m, v) in st {
                    let w = self.weight(m);
                    for &(var, cf) in list {
                        let info = &self.vars[var];
                        if w + info.weight > self.cap + 1e-9 {
                            continue;
                        }
                        if info.weight == 0.0 && m[var] >= self.zero_weight_cap {
                            continue;
                        }
                        let mut m2 = m.clone();
                        m2[var] += 1;
                        add_term(&mut out, m2, v * cf);
                    }
                }
            }
            ModeOp::Diff(list) => {
                for (m, v) in st {
                    for &(var, cf) in list {
                        if m[var] > 0 {
                            let mut m2 = m.clone();
                            m2[var] -= 1;
                            add_term(&mut out, m2, v * cf * m[var] as f64);
                        }
                    }
                }
            }
            ModeOp::Zero(lz) => return self.apply_linear_zero(lz, st),
        }
        out
    }

    pub fn act_mode(&self, a: &CVec, block: usize, level: i64, st: &State) -> Result<State> {
        Ok(self.apply_mode_op(&self.mode_op(a, block, level)?, st))
    }

    /// All (block, level) with |Re m| ≤ bound.
    pub fn modes_within(&self, bound: f64) -> Vec<(usize, i64)> {
        let mut out = Vec::new();
        for b in 0..self.jd.blocks.len() {
            let base = self.mode_value(b, 0).re;
            let lo = (-bound - base).ceil() as i64;
            let hi = (bound - base).floor() as i64;
            for l in lo..=hi {
                out.push((b, l));
            }
        }
        out
    }

    // ---- U ----

    pub fn u_generator(&self, i: usize) -> Result<UOp> {
        let u = self.rep.u.as_ref().ok_or_else(|| Error::NoUDescriptor("the zero-mode representation has no U-descriptors".into()))?;
        Ok(UOp { scalar: r(1.0), ops: u[i].clone() })
    }

    fn b(&self, lam: &[i64], mu: &[i64]) -> C64 {
        (from_ivec(lam).transpose() * &self.b_log * from_ivec(mu))[(0, 0)].exp()
    }

    /// U_λ composed from generators through U_{λ+μ} = ε(λ,μ)B_{λ,μ}U_λU_μ.
    pub fn u_descriptor(&self, lam: &[i64]) -> Result<UOp> {
        let d = self.jd.rank();
        let mut acc = UOp::identity();
        let mut cur: IVec = vec![0; d];
        for i in 0..d {
            let n = lam[i];
            if n == 0 {
                continue;
            }
            let mut e = vec![0i64; d];
            e[i] = n.signum();
            let gen = self.u_generator(i)?;
            let step = if n > 0 {
                gen
            } else {
                let ei = self.lattice.basis(i);
                gen.inverse()?.scale(self.eps.eval(&ei, &ei) as f64 * self.b(&ei, &ei))
            };
            for _ in 0..n.abs() {
                let pre = self.eps.eval(&cur, &e) as f64 * self.b(&cur, &e);
                acc = acc.then(&step).scale(pre);
                cur = crate::lattice::add(&cur, &e);
            }
        }
        Ok(acc)
    }

    pub fn apply_uop(&self, u: &UOp, st: &State) -> State {
        let mut s = st.clone();
        for op in u.ops.iter().rev() {
            s = self.apply_zero_op(op, &s);
        }
        scaled(&s, u.scalar)
    }

    pub fn act_u(&self, lam: &[i64], st: &State) -> Result<State> {
        Ok(self.apply_uop(&self.u_descriptor(lam)?, st))
    }

    // ---- θ ----

    pub fn theta_op(&self, h: &CVec) -> ThetaOp {
        let jmax = self.config.zeta_order;
        let (ny, nq) = (self.rep.ny, self.rep.nq);
        let mut t = ThetaOp {
            a: vec![vec![r(0.0); jmax + 1]; ny],
            b: vec![vec![r(0.0); jmax + 1]; ny],
            euler: vec![vec![r(0.0); jmax + 1]; nq],
            scalar: vec![r(0.0); jmax + 1],
        };
        // ζP⁻h = Σ_k ζ^{k+1}(−N)^k/(k+1)! h
        for (k, v) in self.jd.p_coeffs(false, h).iter().enumerate() {
            if k + 1 > jmax {
                break;
            }
            let lz = self.linear_zero(v);
            for j in 0..ny {
                t.a[j][k + 1] = lz.mul[j];
                t.b[j][k + 1] = lz.diff[j];
            }
            for l in 0..nq {
                t.euler[l][k + 1] = lz.euler[l];
            }
            t.scalar[k + 1] = lz.scalar;
        }
        // e^{Ay+B∂} = e^{Ay}e^{B∂}e^{AB/2}
        for j in 0..ny {
            let ab = poly_mul(&t.a[j], &t.b[j], jmax);
            poly_add(&mut t.scalar, &ab, r(0.5));
        }
        t
    }

    /// exp(Σ_j p_j(ζ)·D_j) on a ζ-state, where every p_j has no constant term.
    fn exp_zeta_op(&self, polys: &[Vec<C64>], apply: impl Fn(usize, &State) -> State, v: ZState) -> ZState {
        let jmax = self.config.zeta_order;
        let mut acc = v.clone();
        let mut term = v;
        for n in 1..=jmax {
            let mut next = zstate(jmax);
            for (j, p) in polys.iter().enumerate() {
                if p.iter().all(|x| x.norm() == 0.0) {
                    continue;
                }
                let applied: ZState = term.iter().map(|s| apply(j, s)).collect();
                zaxpy_poly(&mut next, p, &applied);
            }
            for s in next.iter_mut() {
                *s = scaled(s, r(1.0 / n as f64));
            }
            if next.iter().all(|s| s.is_empty()) {
                break;
            }
            for (a, s) in acc.iter_mut().zip(&next) {
                axpy(a, r(1.0), s);
            }
            term = next;
        }
        acc
    }

    pub fn apply_theta(&self, t: &ThetaOp, st: &State) -> FieldVec {
        let jmax = self.config.zeta_order;
        let mut out = FieldVec::new();
        for (m, v) in st {
            let mut s = t.scalar.clone();
            for l in 0..self.rep.nq {
                poly_add(&mut s, &t.euler[l], r(m[self.qi(l)] as f64));
            }
            let key = ExpKey::from_c64(s[1]);
            s[1] = r(0.0);
            let es = exp_poly(&s, jmax);
            let mut z = zstate(jmax);
            let mut one = new_state();
            one.insert(m.clone(), *v);
            z[0] = one;
            let mut zs = zstate(jmax);
            zaxpy_poly(&mut zs, &es, &z);
            let zs = self.exp_zeta_op(&t.b, |j, s| self.apply_diff_y(j, s), zs);
            let zs = self.exp_zeta_op(&t.a, |j, s| self.apply_mul_y(j, s), zs);
            fv_add(&mut out, key, &zs, r(1.0));
        }
        out
    }

    /// e^{h_{(0)}} for a fixed h, as an exact U-style operator. Requires the
    /// multiplication part to be an integer multiple of each exponential scale.
    pub fn exp_zero_exact(&self, h: &CVec) -> Result<UOp> {
        let lz = self.linear_zero(h);
        let mut ops = Vec::new();
        let mut scalar = lz.scalar;
        for j in 0..self.rep.ny {
            let k = lz.mul[j] / self.y_scales[j];
            let kr = k.re.round();
            if (k - r(kr)).norm() > 1e-9 {
                return Err(Error::ThetaWindowOverflow(format!(
                    "e^{{{} y_{j}}} is outside the adjoined exponentials",
                    lz.mul[j]
                )));
            }
            scalar += lz.mul[j] * lz.diff[j] / 2.0;
            if kr != 0.0 {
                ops.push(ZeroOp::ExpY { var: j, k: kr as i64 });
            }
            if lz.diff[j].norm() != 0.0 {
                ops.push(ZeroOp::ShiftY { var: j, c: sc(lz.diff[j]) });
            }
        }
        for l in 0..self.rep.nq {
            if lz.euler[l].norm() != 0.0 {
                ops.push(ZeroOp::PhaseEuler { var: l, c: sc(lz.euler[l]) });
            }
        }
        Ok(UOp { scalar: scalar.exp(), ops })
    }

    /// τ_λ = θ_λ(2πi)
    pub fn tau_op(&self, lam: &[i64]) -> Result<UOp> {
        self.exp_zero_exact(&structure::tau_argument(&self.jd, &from_ivec(lam)))
    }

    // ---- Virasoro ----

    /// Dual vectors v^i ∈ h_{partner} with (v^i|w_j) = δ_ij, as columns.
    fn dual_basis(&self, b: usize) -> Result<CMat> {
        let bp = self.jd.partner(b).ok_or_else(|| Error::UnsupportedBlockStructure(format!("block {b} has no partner")))?;
        let (w, wp) = (&self.block_basis[b], &self.block_basis[bp]);
        let gp = wp.transpose() * &self.jd.gram * w;
        let inv = gp
            .try_inverse()
            .ok_or_else(|| Error::UnsupportedBlockStructure(format!("pairing of block {b} with its partner is singular")))?;
        Ok(wp * inv.transpose())
    }

    /// L_k = ½Σ_i Σ_{m∈α} :(v^i t^{−m})(v_i t^{k+m}): − δ_{k0}Σ_blocks (dim/4)α₀(α₀+1),
    /// the sum running over a basis of each block and its dual basis.
    pub fn virasoro(&self, k: i64, st: &State) -> Result<State> {
        let mut out = new_state();
        let wmax = st.keys().map(|m| self.weight(m)).fold(0.0, f64::max);
        let reach = wmax + k.abs() as f64 + 1.0;
        for (b, blk) in self.jd.blocks.iter().enumerate() {
            let dual = self.dual_basis(b)?;
            let bp = self.jd.partner(b).unwrap();
            let base = self.mode_value(b, 0);
            let lo = (-reach - base.re).floor() as i64;
            let hi = (reach - base.re).ceil() as i64;
            for i in 0..blk.dim {
                let vi = self.block_basis[b].column(i).into_owned();
                let vd = dual.column(i).into_owned();
                for l in lo..=hi {
                    let m = base + l as f64;
                    let first_level = self.partner_level(bp, m);
                    let p = self.mode_value(bp, first_level);
                    let first = self.mode_op(&vd, bp, first_level)?;
                    let second = self.mode_op(&vi, b, l + k)?;
                    let term = if sign_class(p) == SignClass::Minus {
                        self.apply_mode_op(&first, &self.apply_mode_op(&second, st))
                    } else {
                        self.apply_mode_op(&second, &self.apply_mode_op(&first, st))
                    };
                    axpy(&mut out, r(0.5), &term);
                }
            }
            if k == 0 {
                let a = if sign_class(blk.alpha0) == SignClass::Plus { -blk.alpha0 } else { blk.alpha0 };
                axpy(&mut out, -(blk.dim as f64 / 4.0) * a * (a + 1.0), st);
            }
        }
        Ok(out)
    }

    /// Applies `f` to every basis state in parallel and returns the largest
    /// coefficient of the results restricted to weight ≤ cutoff.
    pub fn max_residual<F>(&self, f: F) -> f64
    where
        F: Fn(&State) -> Result<State> + Sync,
    {
        self.basis
            .par_iter()
            .map(|m| {
                let mut s = new_state();
                s.insert(m.clone(), r(1.0));
                match f(&s) {
                    Ok(res) => self.max_within_cutoff(&res),
                    Err(_) => f64::INFINITY,
                }
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn max_within_cutoff(&self, st: &State) -> f64 {
        st.iter()
            .filter(|(m, _)| self.weight(m) <= self.config.cutoff + 1e-9)
            .fold(0.0, |a, (_, v)| a.max(v.norm()))
    }

    pub fn fv_max_within_cutoff(&self, fv: &FieldVec, jmax: usize) -> f64 {
        fv.values()
            .flat_map(|z| z.iter().take(jmax + 1))
            .map(|s| self.max_within_cutoff(s))
            .fold(0.0, f64::max)
    }

    pub fn fv_max_residual<F>(&self, jmax: usize, f: F) -> f64
    where
        F: Fn(&State) -> Result<FieldVec> + Sync,
    {
        self.basis
            .par_iter()
            .map(|m| {
                let mut s = new_state();
                s.insert(m.clone(), r(1.0));
                match f(&s) {
                    Ok(res) => self.fv_max_within_cutoff(&res, jmax),
                    Err(_) => f64::INFINITY,
                }
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Closed-form L₀ of the two bundled examples, written directly in the
/// module's variables. `printed_sign` selects the sign of the q₁∂_{q₁}∂_{x₁₀}
/// term in the rank-4 formula.
pub fn l0_closed_form(fm: &FockModule, example: &str, printed_sign: f64, st: &State) -> Result<State> {
    let zb = fm.jd.zero_block().ok_or_else(|| Error::UnsupportedBlockStructure("no zero block".into()))?;
    let mut out = new_state();
    // Σ n x∂x
    for (m, v) in st {
        add_term(&mut out, m.clone(), v * fm.weight(m));
    }
    let shift = |from: usize, to: usize, coef: C64, out: &mut State| {
        // coef · Σ_n x_{to,n} ∂_{x_{from,n}}
        for (m, v) in st {
            for (var, info) in fm.vars.iter().enumerate() {
                if info.block != zb || info.index != from || m[var] == 0 {
                    continue;
                }
                let Some(tv) = fm.var_of(zb, info.level, to) else { continue };
                let mut m2 = m.clone();
                m2[var] -= 1;
                m2[tv] += 1;
                add_term(out, m2, v * coef * m[var] as f64);
            }
        }
    };
    let z = |ops: &[ZeroOp], s: &State| ops.iter().rev().fold(s.clone(), |acc, op| fm.apply_zero_op(op, &acc));
    match example {
        "example-6.1" => {
            shift(2, 3, r(1.0), &mut out);
            shift(0, 1, r(-1.0), &mut out);
            axpy(&mut out, r(1.0), &z(&[ZeroOp::MulY { var: 0, c: [1.0, 0.0] }, ZeroOp::Euler { var: 1, c: [1.0, 0.0] }], st));
            let k = r(printed_sign) / cx::two_pi_i();
            axpy(&mut out, k, &z(&[ZeroOp::Euler { var: 0, c: [1.0, 0.0] }, ZeroOp::DiffY { var: 0, c: [1.0, 0.0] }], st));
        }
        "example-6.2" => {
            shift(1, 2, r(1.0), &mut out);
            shift(0, 1, r(-1.0), &mut out);
            let k = -r(std::f64::consts::SQRT_2) / cx::two_pi_i();
            axpy(&mut out, k, &z(&[ZeroOp::MulY { var: 0, c: [1.0, 0.0] }, ZeroOp::Euler { var: 0, c: [1.0, 0.0] }], st));
            axpy(
                &mut out,
                r(0.5),
                &z(&[ZeroOp::DiffY { var: 0, c: [1.0, 0.0] }, ZeroOp::DiffY { var: 0, c: [1.0, 0.0] }], st),
            );
        }
        other => return Err(Error::BadInput(format!("no closed-form L₀ for `{other}`"))),
    }
    Ok(out)
}

fn lattice_vectors(fm: &FockModule) -> Vec<(IVec, CVec)> {
    (0..fm.jd.rank()).map(|i| {
        let e = fm.lattice.basis(i);
        let v = from_ivec(&e);
        (e, v)
    }).collect()
}

/// Module-level battery: Heisenberg commutators, [a, U_λ], restrictedness,
/// the θ group law and inverse, the θ-derivative identity, and [L₀, a].
pub fn fock_checks(fm: &FockModule, tol: f64) -> Vec<Check> {
    let mut out = Vec::new();
    let gens = lattice_vectors(fm);
    let modes = fm.modes_within(2.0);

    // Heisenberg
    let mut worst: f64 = 0.0;
    for (_, a) in &gens {
        for &(ba, la) in &modes {
            let opa = match fm.mode_op(a, ba, la) {
                Ok(o) => o,
                Err(_) => return vec![Check::flag("heisenberg-commutator", "hbrext", false)],
            };
            let m = fm.mode_value(ba, la);
            for (_, bvec) in &gens {
                for &(bb, lb) in &modes {
                    let n = fm.mode_value(bb, lb);
                    let opb = fm.mode_op(bvec, bb, lb).unwrap();
                    let expect = if (m + n).norm() < 1e-9 {
                        let pa = fm.jd.project(ba, a).unwrap();
                        fm.jd.form(&(&pa * m + &fm.jd.nilp * &pa), bvec)
                    } else {
                        r(0.0)
                    };
                    let res = fm.max_residual(|s| {
                        let ab = fm.apply_mode_op(&opa, &fm.apply_mode_op(&opb, s));
                        let ba_ = fm.apply_mode_op(&opb, &fm.apply_mode_op(&opa, s));
                        Ok(sub(&sub(&ab, &ba_), &scaled(s, expect)))
                    });
                    worst = worst.max(res);
                }
            }
        }
    }
    out.push(Check::new("heisenberg-commutator", "hbrext", worst, tol));

    // [a_{(m+N)}, U_λ] = δ_{m0}(π₀a|λ)U_λ
    if fm.rep.u.is_some() {
        let mut worst: f64 = 0.0;
        for (lam, lv) in &gens {
            let u = fm.u_descriptor(lam).unwrap();
            for (_, a) in &gens {
                for &(b, l) in &modes {
                    let op = fm.mode_op(a, b, l).unwrap();
                    let m = fm.mode_value(b, l);
                    let expect = if m.norm() == 0.0 { fm.jd.form(&fm.jd.pi0(a), lv) } else { r(0.0) };
                    let res = fm.max_residual(|s| {
                        let lhs = sub(&fm.apply_mode_op(&op, &fm.apply_uop(&u, s)), &fm.apply_uop(&u, &fm.apply_mode_op(&op, s)));
                        Ok(sub(&lhs, &scaled(&fm.apply_uop(&u, s), expect)))
                    });
                    worst = worst.max(res);
                }
            }
        }
        out.push(Check::new("zero-mode-vs-U", "aUcomm", worst, tol));
        // generator commutation U_λU_μ = C_{λ,μ}U_μU_λ
        let mut worst: f64 = 0.0;
        for (lam, _) in &gens {
            for (mu, _) in &gens {
                let cst = structure::c_constant(&fm.jd, &fm.lattice, lam, mu).unwrap();
                let (ul, um) = (fm.u_descriptor(lam).unwrap(), fm.u_descriptor(mu).unwrap());
                let res = fm.max_residual(|s| {
                    let a = fm.apply_uop(&ul, &fm.apply_uop(&um, s));
                    let b = fm.apply_uop(&um, &fm.apply_uop(&ul, s));
                    Ok(sub(&a, &scaled(&b, cst)))
                });
                worst = worst.max(res);
            }
        }
        out.push(Check::new("U-commutation-constant", "C-constant", worst, tol));
    }

    // restrictedness: positive modes lower weight and kill states lighter than Re m
    let mut ok = true;
    for (_, a) in &gens {
        for (b, l) in fm.modes_within(fm.config.cutoff + 1.0) {
            let m = fm.mode_value(b, l);
            if !in_c_plus(m) {
                continue;
            }
            let op = fm.mode_op(a, b, l).unwrap();
            for mono in &fm.basis {
                let mut s = new_state();
                s.insert(mono.clone(), r(1.0));
                let w = fm.weight(mono);
                let res = fm.apply_mode_op(&op, &s);
                if w < m.re - 1e-9 && max_coeff(&res) > 0.0 {
                    ok = false;
                }
                if res.keys().any(|k| (fm.weight(k) - (w - m.re)).abs() > 1e-9) {
                    ok = false;
                }
            }
        }
    }
    out.push(Check::flag("restrictedness", "generalized-verma", ok));

    // θ_hθ_{h′} = e^{(ζPh₀|h′)}θ_{h+h′}, θ_hθ_{−h} = Id
    let jmax = fm.config.zeta_order;
    let mut worst: f64 = 0.0;
    let mut inv_worst: f64 = 0.0;
    for (_, h) in &gens {
        let th = fm.theta_op(h);
        let thn = fm.theta_op(&-h);
        for (_, h2) in &gens {
            let th2 = fm.theta_op(h2);
            let thsum = fm.theta_op(&(h + h2));
            // (ζPh₀|h′): P = Σ_{k odd} ζ^k N^k/(k+1)!
            let mut poly = vec![r(0.0); jmax + 1];
            let h0 = fm.jd.pi0(h);
            let mut v = h0.clone();
            for k in 0..jmax {
                if k % 2 == 1 {
                    poly[k + 1] = fm.jd.form(&v, h2) / cx::factorial(k + 1);
                }
                v = &fm.jd.nilp * v;
            }
            let e = exp_poly(&poly, jmax);
            let res = fm.fv_max_residual(jmax, |s| {
                let lhs = fv_compose(&fm.apply_theta(&th2, s), |x| fm.apply_theta(&th, x));
                let rhs = fv_scale_poly(&fm.apply_theta(&thsum, s), &e);
                Ok(fv_sub(&lhs, &rhs))
            });
            worst = worst.max(res);
        }
        let res = fm.fv_max_residual(jmax, |s| {
            let lhs = fv_compose(&fm.apply_theta(&thn, s), |x| fm.apply_theta(&th, x));
            Ok(fv_sub(&lhs, &fv_from_state(s, jmax)))
        });
        inv_worst = inv_worst.max(res);
    }
    out.push(Check::new("theta-group-law", "thmult", worst, tol));
    out.push(Check::new("theta-inverse", "thmult", inv_worst, tol));

    // ∂_ζθ = θ·(D(X) − C/2), X = (ζP⁻λ)_{(0)}, D(X) = (e^{−ζN}λ)_{(0)}
    let mut worst: f64 = 0.0;
    for (_, h) in &gens {
        let th = fm.theta_op(h);
        let x_coeffs = fm.jd.p_coeffs(false, h);
        let mut dx: Vec<CVec> = Vec::new();
        let mut v = h.clone();
        for k in 0..=jmax {
            dx.push(&v * r(if k % 2 == 0 { 1.0 } else { -1.0 } / cx::factorial(k)));
            v = &fm.jd.nilp * v;
        }
        // C = [X, D(X)] = Σ ζ^{k+1+l} (N X_k | D_l)
        let mut cpoly = vec![r(0.0); jmax + 1];
        for (k, xk) in x_coeffs.iter().enumerate() {
            for (l, dl) in dx.iter().enumerate() {
                if k + 1 + l <= jmax {
                    cpoly[k + 1 + l] += fm.jd.form(&(&fm.jd.nilp * fm.jd.pi0(xk)), &fm.jd.pi0(dl));
                }
            }
        }
        let dops: Vec<LinearZero> = dx.iter().map(|d| fm.linear_zero(d)).collect();
        let res = fm.fv_max_residual(jmax - 1, |s| {
            let lhs = fv_d_zeta(&fm.apply_theta(&th, s));
            let mut inner = FieldVec::new();
            let mut z = zstate(jmax);
            for (l, op) in dops.iter().enumerate() {
                if l <= jmax {
                    z[l] = fm.apply_linear_zero(op, s);
                }
            }
            let mut zc = zstate(jmax);
            let mut s0 = zstate(jmax);
            s0[0] = s.clone();
            zaxpy_poly(&mut zc, &cpoly, &s0);
            for (a, b) in z.iter_mut().zip(&zc) {
                axpy(a, r(-0.5), b);
            }
            inner.insert(ExpKey::ZERO, z);
            let rhs = fv_compose(&inner, |x| fm.apply_theta(&th, x));
            Ok(fv_sub(&lhs, &rhs))
        });
        worst = worst.max(res);
    }
    out.push(Check::new("theta-derivative", "derlemma", worst, tol));

    // [L₀, a_{(m+N)}] = −((m+N)a)_{(m+N)}
    let mut worst: f64 = 0.0;
    for (_, a) in &gens {
        for &(b, l) in &fm.modes_within(1.0) {
            let m = fm.mode_value(b, l);
            let op = fm.mode_op(a, b, l).unwrap();
            let rhs_op = fm.mode_op(&(a * m + &fm.jd.nilp * a), b, l).unwrap();
            let res = fm.max_residual(|s| {
                let lhs = sub(&fm.virasoro(0, &fm.apply_mode_op(&op, s))?, &fm.apply_mode_op(&op, &fm.virasoro(0, s)?));
                Ok(sub(&lhs, &scaled(&fm.apply_mode_op(&rhs_op, s), r(-1.0))))
            });
            worst = worst.max(res);
        }
    }
    out.push(Check::new("virasoro-L0-mode-commutator", "virasoro", worst, tol));
    out
}

/// ∂_ζ on a field whose z-powers stand for e^{cζ}.
pub fn fv_d_zeta(fv: &FieldVec) -> FieldVec {
    fv.iter()
        .map(|(k, z)| {
            let jmax = z.len() - 1;
            let cval = k.value();
            let mut out = zstate(jmax);
            for j in 0..=jmax {
                axpy(&mut out[j], cval, &z[j]);
                if j < jmax {
                    axpy(&mut out[j], r((j + 1) as f64), &z[j + 1]);
                }
            }
            (*k, out)
        })
        .collect()
}

/// Largest residual of L₀ against the closed form on the basis.
pub fn l0_closed_form_residual(fm: &FockModule, example: &str, printed_sign: f64) -> f64 {
    fm.max_residual(|s| Ok(sub(&fm.virasoro(0, s)?, &l0_closed_form(fm, example, printed_sign, s)?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn module(name: &str, cutoff: f64) -> FockModule {
        let p = match name {
            "example-6.1" => presets::example_61(),
            "example-6.2" => presets::example_62(),
            _ => presets::hyperbolic_identity(),
        };
        let jd = p.setup.jordan().unwrap();
        let rep = match name {
            "example-6.1" => ZeroModeRep::example_61(),
            "example-6.2" => ZeroModeRep::example_62(),
            _ => ZeroModeRep::polarization(&jd, &p.lattice, &p.setup.eps).unwrap(),
        };
        let cfg = FockConfig { cutoff, ..FockConfig::default() };
        FockModule::build(&p.setup, jd, rep, cfg, 7).unwrap()
    }

    fn one(fm: &FockModule, m: Mono) -> State {
        let mut s = new_state();
        s.insert(m, r(1.0));
        let _ = fm;
        s
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(module("example-6.1", 3.0).basis.len(), 59 * 54);
        assert_eq!(module("example-6.2", 3.0).basis.len(), 35 * 18);
    }

    #[test]
    fn rank3_positive_mode_matches_display() {
        // α₁_{(m+N)} = √2(m∂_{x_{2,m}} − ∂_{x_{1,m}})
        let fm = module("example-6.2", 3.0);
        let a1 = from_ivec(&[1, 0, 0]);
        let s2 = std::f64::consts::SQRT_2;
        for m in 1..=3i64 {
            let ModeOp::Diff(list) = fm.mode_op(&a1, 0, m).unwrap() else { panic!() };
            let mut got: Vec<(usize, C64)> = list.iter().map(|&(v, c)| (fm.vars[v].index, c)).collect();
            got.sort_by_key(|x| x.0);
            assert_eq!(got.len(), 2);
            assert!((got[0].1 - r(-s2)).norm() < 1e-12);
            assert!((got[1].1 - r(s2 * m as f64)).norm() < 1e-12);
            assert!(got.iter().all(|&(v, _)| fm.vars.iter().any(|x| x.index == v && x.level == -m)));
        }
    }

    #[test]
    fn rank4_modes_match_display() {
        let fm = module("example-6.1", 3.0);
        // λ₃_{(m+N)} = (1/2πi)(m∂_{x_{2,m}} − ∂_{x_{1,m}}); λ₁_{(−m+N)} = x_{1,m}
        let l3 = from_ivec(&[0, 0, 1, 0]);
        let ModeOp::Diff(list) = fm.mode_op(&l3, 0, 2).unwrap() else { panic!() };
        let k = r(1.0) / cx::two_pi_i();
        for (v, cf) in list {
            match fm.vars[v].index {
                1 => assert!((cf - k * 2.0).norm() < 1e-12),
                0 => assert!((cf + k).norm() < 1e-12),
                _ => panic!(),
            }
        }
        let l1 = from_ivec(&[1, 0, 0, 0]);
        let ModeOp::Mul(list) = fm.mode_op(&l1, 0, -2).unwrap() else { panic!() };
        assert_eq!(list.len(), 1);
        assert_eq!(fm.vars[list[0].0].index, 0);
        assert!((list[0].1 - r(1.0)).norm() < 1e-12);
    }

    #[test]
    fn positive_mode_kills_vacuum() {
        let fm = module("example-6.1", 2.0);
        let vac = one(&fm, fm.vacuum());
        for (b, l) in fm.modes_within(2.0) {
            if in_c_plus(fm.mode_value(b, l)) {
                assert!(fm.act_mode(&from_ivec(&[1, 1, 1, 1]), b, l, &vac).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn heisenberg_scalar_on_vacuum() {
        // [λ₁_{(1+N)}, λ₃_{(−1+N)}] vac = ((1+N)λ₁|λ₃) vac
        let fm = module("example-6.1", 2.0);
        let (l1, l3) = (from_ivec(&[1, 0, 0, 0]), from_ivec(&[0, 0, 1, 0]));
        let vac = one(&fm, fm.vacuum());
        let got = fm.act_mode(&l1, 0, 1, &fm.act_mode(&l3, 0, -1, &vac).unwrap()).unwrap();
        let expect = fm.jd.form(&(&l1 + &fm.jd.nilp * &l1), &l3);
        assert!((got[&fm.vacuum()] - expect).norm() < 1e-12);
        assert!((expect - r(1.0) / cx::two_pi_i()).norm() < 1e-12);
    }

    #[test]
    fn u_zero_is_identity() {
        let fm = module("example-6.2", 1.0);
        let u = fm.u_descriptor(&[0, 0, 0]).unwrap();
        assert!(u.ops.is_empty() && u.scalar == r(1.0));
    }

    #[test]
    fn batteries_pass() {
        for name in ["example-6.1", "example-6.2", "hyperbolic"] {
            let fm = module(name, 2.0);
            for ch in fock_checks(&fm, 1e-10) {
                assert!(ch.pass, "{name}: {ch:?}");
            }
        }
    }

    #[test]
    fn l0_matches_closed_forms() {
        let fm = module("example-6.1", 2.0);
        assert!(l0_closed_form_residual(&fm, "example-6.1", -1.0) < 1e-12);
        assert!(l0_closed_form_residual(&fm, "example-6.1", 1.0) > 0.1);
        let fm = module("example-6.2", 2.0);
        assert!(l0_closed_form_residual(&fm, "example-6.2", 1.0) < 1e-12);
    }

    #[test]
    fn bad_rep_is_rejected() {
        let p = presets::example_62();
        let jd = p.setup.jordan().unwrap();
        let mut rep = ZeroModeRep::example_62();
        rep.zero_modes[1] = vec![ZeroOp::DiffY { var: 0, c: [1.0, 0.0] }];
        let e = FockModule::build(&p.setup, jd, rep, FockConfig { cutoff: 1.0, ..Default::default() }, 1);
        assert!(matches!(e, Err(Error::RepInconsistent(_))));
    }

    #[test]
    fn exp_poly_matches_series() {
        let p = vec![r(0.0), r(1.0), r(0.5)];
        let e = exp_poly(&p, 3);
        // exp(ζ + ζ²/2) = 1 + ζ + ζ² + (1/6 + 1/2)ζ³ + ...
        assert!((e[2] - r(1.0)).norm() < 1e-15);
        assert!((e[3] - r(2.0 / 3.0)).norm() < 1e-15);
    }
}
