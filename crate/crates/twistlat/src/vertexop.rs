//! Twisted logarithmic fields on a truncated module: currents Y(a,z), the
//! exponentials E_λ(z)_±, vertex operators Y(e^λ,z), their identities, and the
//! scalar locality transport.
//!
//! A field applied to a state is a [`FieldVec`]: z-exponent ↦ ζ-polynomial of
//! states. Every scalar e^{cζ} is stored as the z-power z^c, so the pair
//! (exponent, ζ-degree) is a canonical coordinate.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::cx::{self, from_ivec, r, CVec, C64};
use crate::decomp::{in_c_plus, sign_class, JordanData, SignClass};
use crate::error::{Error, Result};
use crate::fock::{
    self, axpy, exp_poly, fv_add, fv_compose, fv_from_state, fv_map, fv_scale_poly, fv_shift, fv_sub, new_state,
    zstate, ExpKey, FieldVec, FockModule, ModeOp, Mono, State, ThetaOp, UOp, ZeroOp,
};
use crate::lattice::{self, IVec, Lattice};
use crate::report::Check;
use crate::specfun;
use crate::structure;

/// One summand c·z^{key}ζ^{deg}·op of a field or of an exponent.
#[derive(Clone, Debug)]
pub struct Term {
    pub key: ExpKey,
    pub deg: usize,
    pub op: ModeOp,
    pub creation: bool,
}

fn apply_terms<'a>(fm: &FockModule, terms: impl Iterator<Item = &'a Term>, fv: &FieldVec) -> FieldVec {
    let mut out = FieldVec::new();
    let jmax = fm.config.zeta_order;
    for t in terms {
        for (k, z) in fv {
            let mut zz = zstate(jmax);
            let mut any = false;
            for (j, s) in z.iter().enumerate() {
                if j + t.deg > jmax || s.is_empty() {
                    continue;
                }
                let res = fm.apply_mode_op(&t.op, s);
                if !res.is_empty() {
                    zz[j + t.deg] = res;
                    any = true;
                }
            }
            if any {
                fv_add(&mut out, k.add(t.key), &zz, r(1.0));
            }
        }
    }
    out
}

fn exp_terms(fm: &FockModule, terms: &[Term], fv: FieldVec) -> FieldVec {
    let mut acc = fv.clone();
    let mut term = fv;
    for n in 1.. {
        let next = apply_terms(fm, terms.iter(), &term);
        let next: FieldVec = next
            .into_iter()
            .map(|(k, z)| (k, z.into_iter().map(|s| fock::scaled(&s, r(1.0 / n as f64))).collect::<Vec<_>>()))
            .filter(|(_, z): &(ExpKey, Vec<State>)| z.iter().any(|s| !s.is_empty()))
            .collect();
        if next.is_empty() {
            break;
        }
        for (k, z) in &next {
            fv_add(&mut acc, *k, z, r(1.0));
        }
        term = next;
    }
    acc
}

/// Y(a,z) = Σ_m (z^{−m−1−N}a)_{(m+N)} over all modes that can act within the cap.
pub fn current_terms(fm: &FockModule, a: &CVec) -> Result<Vec<Term>> {
    let mut out = Vec::new();
    let k = fm.jd.nilpotency_index.max(1);
    for (b, l) in fm.modes_within(fm.cap + 1.0) {
        let m = fm.mode_value(b, l);
        let mut v = a.clone();
        for deg in 0..k.min(fm.config.zeta_order + 1) {
            let coef = r(if deg % 2 == 0 { 1.0 } else { -1.0 } / cx::factorial(deg));
            let op = fm.mode_op(&(&v * coef), b, l)?;
            out.push(Term { key: ExpKey::from_c64(-m - 1.0), deg, op, creation: sign_class(m) == SignClass::Minus });
            v = &fm.jd.nilp * v;
        }
    }
    Ok(out)
}

pub fn apply_current(fm: &FockModule, terms: &[Term], st: &State) -> FieldVec {
    apply_terms(fm, terms.iter(), &fv_from_state(st, fm.config.zeta_order))
}

/// Exponent −Σ_{m∈C^∓}((m+N)^{−1}z^{−m−N}λ)_{(m+N)} of E_λ(z)_±.
pub fn e_terms(fm: &FockModule, lam: &CVec, plus: bool) -> Result<Vec<Term>> {
    let jd = &fm.jd;
    let k = jd.nilpotency_index.max(1);
    let mut out = Vec::new();
    for (b, l) in fm.modes_within(fm.cap + 1.0) {
        let m = fm.mode_value(b, l);
        let class = sign_class(m);
        if class == SignClass::Zero || (class == SignClass::Minus) != plus {
            continue;
        }
        // (m+N)^{−1}λ = Σ_j (−N)^j λ / m^{j+1}
        let mut inv = CVec::zeros(jd.rank());
        let mut v = lam.clone();
        for j in 0..k {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            inv += &v * (r(s) / m.powu(j as u32 + 1));
            v = &jd.nilp * v;
        }
        // z^{−N} = Σ_deg (−ζN)^deg/deg!
        let mut w = inv;
        for deg in 0..k.min(fm.config.zeta_order + 1) {
            let coef = r(-(if deg % 2 == 0 { 1.0 } else { -1.0 }) / cx::factorial(deg));
            let op = fm.mode_op(&(&w * coef), b, l)?;
            out.push(Term { key: ExpKey::from_c64(-m), deg, op, creation: plus });
            w = &jd.nilp * w;
        }
    }
    Ok(out)
}

/// Everything needed to apply Y(e^λ,z).
pub struct VertexData {
    pub lam: IVec,
    /// E_λ(z)_+ applied to the vacuum monomial: a multiplier field.
    pub plus: FieldVec,
    pub minus: Vec<Term>,
    pub theta: ThetaOp,
    /// z-power from z^{b_λ} and the ζ-linear part of ζa_λ.
    pub shift: C64,
    /// e^{ζa_λ} without its ζ-linear part.
    pub a_series: Vec<C64>,
    pub u: UOp,
}

impl VertexData {
    pub fn new(fm: &FockModule, lam: &[i64]) -> Result<VertexData> {
        let lv = from_ivec(lam);
        let jmax = fm.config.zeta_order;
        let plus_terms = e_terms(fm, &lv, true)?;
        let plus = exp_terms(fm, &plus_terms, fv_from_state(&unit(fm.vacuum()), jmax));
        let (shift, a_series) = scalar_part(fm, &lv);
        Ok(VertexData {
            lam: lam.to_vec(),
            plus,
            minus: e_terms(fm, &lv, false)?,
            theta: fm.theta_op(&lv),
            shift,
            a_series,
            u: fm.u_descriptor(lam)?,
        })
    }
}

/// z^{b_λ}e^{ζa_λ} in canonical form.
fn scalar_part(fm: &FockModule, lv: &CVec) -> (C64, Vec<C64>) {
    let jmax = fm.config.zeta_order;
    let a = structure::a_lambda(&fm.jd, lv);
    let mut p = vec![r(0.0); jmax + 1];
    for (k, ak) in a.iter().enumerate() {
        if k < jmax {
            p[k + 1] = *ak;
        }
    }
    let lin = p[1];
    p[1] = r(0.0);
    (structure::b_lambda(&fm.jd, lv) + lin, exp_poly(&p, jmax))
}

fn unit(m: Mono) -> State {
    let mut s = new_state();
    s.insert(m, r(1.0));
    s
}

/// Multiplies by a field of creation monomials, dropping results above `out_cap`.
pub fn mul_field(fm: &FockModule, p: &FieldVec, fv: &FieldVec, out_cap: f64) -> FieldVec {
    let jmax = fm.config.zeta_order;
    let lim = out_cap + 1e-9;
    // weights are additive: sorted factors let the inner loop stop at the cap
    let pw: Vec<(ExpKey, Vec<Vec<(f64, &Mono, C64)>>)> = p
        .iter()
        .map(|(k, z)| {
            let z = z
                .iter()
                .map(|s| {
                    let mut v: Vec<_> = s.iter().map(|(m, c)| (fm.weight(m), m, *c)).collect();
                    v.sort_by(|a, b| a.0.total_cmp(&b.0));
                    v
                })
                .collect();
            (*k, z)
        })
        .collect();
    let mut out = FieldVec::new();
    for (k1, z1) in fv {
        for (k2, z2) in &pw {
            let mut zz = zstate(jmax);
            let mut any = false;
            for (j1, s1) in z1.iter().enumerate() {
                for (m1, v1) in s1 {
                    let w1 = fm.weight(m1);
                    for (j2, s2) in z2.iter().enumerate() {
                        if j1 + j2 > jmax {
                            break;
                        }
                        for &(w2, m2, v2) in s2 {
                            if w1 + w2 > lim {
                                break;
                            }
                            if let Some(m) = fm.mono_mul(m1, m2, out_cap) {
                                fock::add_term(&mut zz[j1 + j2], m, v1 * v2);
                                any = true;
                            }
                        }
                    }
                }
            }
            if any {
                fv_add(&mut out, k1.add(*k2), &zz, r(1.0));
            }
        }
    }
    out
}

/// E_λ(z) = E_λ(z)_+E_λ(z)_− on a field.
pub fn apply_e(fm: &FockModule, vd: &VertexData, fv: &FieldVec, out_cap: f64) -> FieldVec {
    let m = exp_terms(fm, &vd.minus, fv.clone());
    mul_field(fm, &vd.plus, &m, out_cap)
}

/// U_λθ_λe^{ζa_λ}z^{b_λ} on a field.
pub fn apply_zero_part(fm: &FockModule, vd: &VertexData, fv: &FieldVec) -> FieldVec {
    let fv = fv_scale_poly(&fv_shift(fv, vd.shift), &vd.a_series);
    let fv = fv_compose(&fv, |s| fm.apply_theta(&vd.theta, s));
    fv_map(&fv, |s| fm.apply_uop(&vd.u, s))
}

/// Y(e^λ,z) on a field, results kept up to weight `out_cap`. The zero-mode
/// factor commutes with E_λ(z) and is applied first, while the state is small.
pub fn apply_vertex_fv(fm: &FockModule, vd: &VertexData, fv: &FieldVec, out_cap: f64) -> FieldVec {
    apply_e(fm, vd, &apply_zero_part(fm, vd, fv), out_cap)
}

pub fn apply_vertex(fm: &FockModule, vd: &VertexData, st: &State, out_cap: f64) -> FieldVec {
    apply_vertex_fv(fm, vd, &fv_from_state(st, fm.config.zeta_order), out_cap)
}

/// D_z = ∂_z + z^{−1}∂_ζ on the canonical form.
pub fn fv_dz(fv: &FieldVec) -> FieldVec {
    let one = ExpKey::from_c64(r(-1.0));
    fock::fv_d_zeta(fv).into_iter().map(|(k, z)| (k.add(one), z)).collect()
}

fn scale_fv_by_scalar_fn(fv: &FieldVec, m: C64, poly: &[C64]) -> FieldVec {
    fv_scale_poly(&fv_shift(fv, m), poly)
}

/// (z^{m+N}b|λ) as the z-power m and a ζ-polynomial.
fn zmn_pairing(fm: &FockModule, b: &CVec, lam: &CVec) -> Vec<C64> {
    let jmax = fm.config.zeta_order;
    let mut out = vec![r(0.0); jmax + 1];
    let mut v = b.clone();
    for (k, o) in out.iter_mut().enumerate() {
        *o = fm.jd.form(&v, lam) / cx::factorial(k);
        v = &fm.jd.nilp * v;
    }
    out
}

fn generators(lat: &Lattice) -> Vec<IVec> {
    (0..lat.rank()).map(|i| lat.basis(i)).collect()
}

/// The part of `fv` of weight ≤ `w`.
fn fv_below(fm: &FockModule, fv: &FieldVec, w: f64) -> FieldVec {
    let w = w + 1e-9;
    fv_map(fv, |s| s.iter().filter(|(m, _)| fm.weight(m) <= w).map(|(m, c)| (m.clone(), *c)).collect())
}

/// Memo of a field applied to single monomials, for states that recur.
struct FieldCache<'a> {
    fm: &'a FockModule,
    vd: &'a VertexData,
    with_zero_part: bool,
    cap: f64,
    map: RwLock<HashMap<Mono, Arc<FieldVec>>>,
}

impl<'a> FieldCache<'a> {
    fn new(fm: &'a FockModule, vd: &'a VertexData, with_zero_part: bool, cap: f64) -> Self {
        FieldCache { fm, vd, with_zero_part, cap, map: RwLock::new(HashMap::new()) }
    }

    fn apply_fv(&self, fv: &FieldVec) -> FieldVec {
        if self.with_zero_part {
            apply_vertex_fv(self.fm, self.vd, fv, self.cap)
        } else {
            apply_e(self.fm, self.vd, fv, self.cap)
        }
    }

    fn get(&self, m: &Mono) -> Arc<FieldVec> {
        if let Some(v) = self.map.read().expect("cache lock").get(m) {
            return v.clone();
        }
        let v = Arc::new(self.apply_fv(&fv_from_state(&unit(m.clone()), self.fm.config.zeta_order)));
        self.map.write().expect("cache lock").insert(m.clone(), v.clone());
        v
    }

    fn apply(&self, st: &State) -> FieldVec {
        let mut out = FieldVec::new();
        for (m, c) in st {
            for (k, z) in self.get(m).iter() {
                fv_add(&mut out, *k, z, *c);
            }
        }
        out
    }
}

/// [a_{(m+N)}, X] = (z^{m+N}π_αa|λ)X for X = E_λ(z) or Y(e^λ,z).
fn bracket_check(fm: &FockModule, with_zero_part: bool, include_zero_mode: bool) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let bound = fm.config.margin;
    for lam in generators(&fm.lattice) {
        let lv = from_ivec(&lam);
        let vd = VertexData::new(fm, &lam)?;
        let full = FieldCache::new(fm, &vd, with_zero_part, fm.cap);
        let low = FieldCache::new(fm, &vd, with_zero_part, fm.config.cutoff);
        let mut ops = Vec::new();
        for i in 0..fm.jd.rank() {
            let a = from_ivec(&fm.lattice.basis(i));
            for (b, l) in fm.modes_within(bound) {
                let m = fm.mode_value(b, l);
                if m.norm() == 0.0 && !include_zero_mode {
                    continue;
                }
                let pa = fm.jd.project(b, &a)?;
                ops.push((m, fm.mode_op(&a, b, l)?, zmn_pairing(fm, &pa, &lv)));
            }
        }
        let jmax = fm.config.zeta_order;
        let res = fm.fv_max_residual(jmax, |s| {
            let y = full.apply_fv(&fv_from_state(s, jmax));
            let y_low = fv_below(fm, &y, fm.config.cutoff);
            let mut worst = FieldVec::new();
            let mut best = 0.0f64;
            for (m, op, poly) in &ops {
                // a_{(m+N)} moves the weight by at most |m|
                let lhs1 = fv_map(&fv_below(fm, &y, fm.config.cutoff + m.norm()), |x| fm.apply_mode_op(op, x));
                let lhs2 = low.apply(&fm.apply_mode_op(op, s));
                let rhs = scale_fv_by_scalar_fn(&y_low, *m, poly);
                let diff = fv_sub(&fv_sub(&lhs1, &lhs2), &rhs);
                let v = fm.fv_max_within_cutoff(&diff, jmax);
                if v >= best {
                    best = v;
                    worst = diff;
                }
            }
            Ok(worst)
        });
        worst = worst.max(res);
    }
    Ok(worst)
}

/// D_zY(e^λ,z) = :Y(λ,z)Y(e^λ,z):_± + z^{−1}b_λY(e^λ,z), compared below the top ζ-degree.
fn dz_check(fm: &FockModule) -> Result<f64> {
    let jmax = fm.config.zeta_order;
    let mut worst: f64 = 0.0;
    for lam in generators(&fm.lattice) {
        let lv = from_ivec(&lam);
        let vd = VertexData::new(fm, &lam)?;
        let cur = current_terms(fm, &lv)?;
        let b = structure::b_lambda(&fm.jd, &lv);
        let res = fm.fv_max_residual(jmax - 1, |s| {
            let base = fv_from_state(s, jmax);
            let y = apply_vertex_fv(fm, &vd, &base, fm.cap);
            let lhs = fv_dz(&y);
            let left = apply_terms(fm, cur.iter().filter(|t| t.creation), &y);
            let right_in = apply_terms(fm, cur.iter().filter(|t| !t.creation), &base);
            let right = apply_vertex_fv(fm, &vd, &right_in, fm.cap);
            let mut rhs = left;
            for (k, z) in &right {
                fv_add(&mut rhs, *k, z, r(1.0));
            }
            let zy = fv_shift(&y, r(-1.0));
            for (k, z) in &zy {
                fv_add(&mut rhs, *k, z, b);
            }
            Ok(fv_sub(&lhs, &rhs))
        });
        worst = worst.max(res);
    }
    Ok(worst)
}

/// Lattice vectors used for φ-equivariance: generators and pairwise sums.
fn phieq_sample(lat: &Lattice) -> Vec<IVec> {
    let g = generators(lat);
    let mut out = g.clone();
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            out.push(lattice::add(&g[i], &g[j]));
        }
    }
    out
}

/// U_{φλ} = η(λ)e^{2πic_λ}U_λτ_λ on the basis.
pub fn phieq_residual(fm: &FockModule, lam: &[i64], phi: &crate::lattice::Automorphism) -> Result<f64> {
    let lv = from_ivec(lam);
    let left = fm.u_descriptor(&phi.apply(lam))?;
    let pre = fm.eta.eval(lam) as f64 * (cx::two_pi_i() * structure::c_lambda(&fm.jd, &lv)).exp();
    let right = fm.u_descriptor(lam)?.then(&fm.tau_op(lam)?).scale(pre);
    Ok(fm.max_residual(|s| Ok(fock::sub(&fm.apply_uop(&left, s), &fm.apply_uop(&right, s)))))
}

/// (z₁−z₂)^{−(λ|μ)}Y(e^λ,z₁)Y(e^μ,z₂)|_{z₁=z₂} applied to `st`: both zero-mode
/// parts, z^{−(λ|μ)}, the coincident-point B from its series, and the normally
/// ordered exponentials E_{λ+}E_{μ+}E_{λ−}E_{μ−}.
pub struct ProductLimit {
    vl: VertexData,
    vm: VertexData,
    /// E_{λ+}E_{μ+} on the vacuum.
    plus: FieldVec,
    /// Exponents of E_{λ−} and E_{μ−}; annihilators commute, so one exponential.
    minus: Vec<Term>,
    b: C64,
    lm: f64,
}

impl ProductLimit {
    pub fn new(fm: &FockModule, lam: &[i64], mu: &[i64], oracle_terms: usize) -> Result<ProductLimit> {
        let vl = VertexData::new(fm, lam)?;
        let vm = VertexData::new(fm, mu)?;
        let plus = mul_field(fm, &vl.plus, &vm.plus, fm.cap);
        let minus = vl.minus.iter().chain(&vm.minus).cloned().collect();
        Ok(ProductLimit {
            vl,
            vm,
            plus,
            minus,
            b: structure::b_oracle(&fm.jd, &from_ivec(lam), &from_ivec(mu), oracle_terms),
            lm: fm.lattice.form(lam, mu) as f64,
        })
    }

    pub fn apply(&self, fm: &FockModule, st: &State, out_cap: f64) -> FieldVec {
        let z = apply_zero_part(fm, &self.vl, &apply_zero_part(fm, &self.vm, &fv_from_state(st, fm.config.zeta_order)));
        let e = mul_field(fm, &self.plus, &exp_terms(fm, &self.minus, z), out_cap);
        fv_map(&fv_shift(&e, r(-self.lm)), |x| fock::scaled(x, self.b))
    }
}

/// The n-th product of Y(e^λ,z) and Y(e^μ,z) as a field to apply.
pub enum ProductField {
    Zero,
    Limit(Box<ProductLimit>),
}

impl ProductField {
    pub fn apply(&self, fm: &FockModule, st: &State, out_cap: f64) -> FieldVec {
        match self {
            ProductField::Zero => FieldVec::new(),
            ProductField::Limit(p) => p.apply(fm, st, out_cap),
        }
    }
}

/// Y(e^λ,z)_{(n)}Y(e^μ,z) with locality order `n_loc` (default max(0, −(λ|μ))).
/// Orders below −1−(λ|μ) need higher D_{z₁}-derivatives and are not provided.
pub fn nth_product(fm: &FockModule, lam: &[i64], mu: &[i64], n: i64, n_loc: Option<i64>) -> Result<ProductField> {
    let lm = fm.lattice.form(lam, mu);
    let min_loc = 0.max(-lm);
    let n_loc = n_loc.unwrap_or(min_loc);
    if n_loc < min_loc {
        return Err(Error::BadInput(format!("locality order {n_loc} is below {min_loc}")));
    }
    if n >= n_loc {
        return Ok(ProductField::Zero);
    }
    if n == -1 - lm {
        return Ok(ProductField::Limit(Box::new(ProductLimit::new(fm, lam, mu, 10_000)?)));
    }
    Err(Error::UnsupportedProductOrder(format!("order {n} for (λ|μ) = {lm}")))
}

/// Y(a,z)_{(n)}Y(b,z) for currents as a multiple of the identity field.
pub fn current_product(fm: &FockModule, a: &CVec, b: &CVec, n: i64) -> Result<C64> {
    match n {
        1 => Ok(fm.jd.form(a, b)),
        n if n == 0 || n >= 2 => Ok(r(0.0)),
        _ => Err(Error::UnsupportedProductOrder(format!("current product of order {n}"))),
    }
}

/// ε(λ,μ)Y(e^{λ+μ},z) against the (−1−(λ|μ))-th product. Moving θ_λ past U_μ
/// can turn a z-power into e^{nζ} inside a ζ-series, so the difference is
/// compared after [`fock::fv_collapse`].
pub fn product_limit_residual(fm: &FockModule, lam: &[i64], mu: &[i64], n_loc: Option<i64>) -> Result<f64> {
    let n = -1 - fm.lattice.form(lam, mu);
    let prod = nth_product(fm, lam, mu, n, n_loc)?;
    let vs = VertexData::new(fm, &lattice::add(lam, mu))?;
    let eps = fm.eps.eval(lam, mu) as f64;
    let jmax = fm.config.zeta_order;
    let cap = fm.config.cutoff;
    Ok(fm.fv_max_residual(jmax, |s| {
        let lhs = prod.apply(fm, s, cap);
        let rhs = fv_map(&apply_vertex(fm, &vs, s, cap), |x| fock::scaled(x, r(eps)));
        Ok(fock::fv_collapse(&fv_sub(&lhs, &rhs), jmax))
    }))
}

/// Field-level battery at the module's cutoff.
pub fn vertexop_checks(fm: &FockModule, phi: &crate::lattice::Automorphism, tol: f64) -> Vec<Check> {
    let mut out = Vec::new();
    let wrap = |name: &str, anchor: &str, r: Result<f64>, tol: f64| match r {
        Ok(v) => Check::new(name, anchor, v, tol),
        Err(_) => Check::flag(name, anchor, false),
    };
    if fm.rep.u.is_none() {
        return vec![Check::flag("vertex-operators", "twistedvop", false)];
    }
    out.push(wrap("E-mode-commutator", "emodes", bracket_check(fm, false, false), tol));
    out.push(wrap("vertex-mode-commutator", "hvobrext", bracket_check(fm, true, true), tol));
    out.push(wrap("vertex-derivative", "Dzlem", dz_check(fm), tol));
    let mut worst: f64 = 0.0;
    let mut failed = false;
    for lam in phieq_sample(&fm.lattice) {
        match phieq_residual(fm, &lam, phi) {
            Ok(v) => worst = worst.max(v),
            Err(_) => failed = true,
        }
    }
    out.push(if failed { Check::flag("phi-equivariance", "phieq", false) } else { Check::new("phi-equivariance", "phieq", worst, tol) });
    let gens = generators(&fm.lattice);
    let mut worst: f64 = 0.0;
    let mut failed = false;
    for l in &gens {
        for m in &gens {
            match product_limit_residual(fm, l, m, None) {
                Ok(v) => worst = worst.max(v),
                Err(_) => failed = true,
            }
        }
    }
    out.push(if failed {
        Check::flag("exponential-product", "VAexpmult", false)
    } else {
        Check::new("exponential-product", "VAexpmult", worst, tol)
    });
    out
}

/// Largest ζ-degree with a nonzero coefficient in Y(e^λ,z) on the basis.
pub fn max_zeta_degree(fm: &FockModule, lam: &[i64]) -> Result<usize> {
    let vd = VertexData::new(fm, lam)?;
    let mut deg = 0;
    for m in &fm.basis {
        let y = apply_vertex(fm, &vd, &unit(m.clone()), fm.config.cutoff);
        for z in y.values() {
            for (j, s) in z.iter().enumerate() {
                if fock::max_coeff(s) > 1e-14 {
                    deg = deg.max(j);
                }
            }
        }
    }
    Ok(deg)
}

// ---------------------------------------------------------------------------
// Closed forms of the bundled examples' vertex operators.

/// A vertex operator written as a product of explicit factors, leftmost
/// applied last.
pub struct ClosedVertex {
    pub exact: Vec<ZeroOp>,
    /// exp(p(ζ)·X) with X a sum of linear zero-mode primitives.
    pub zeta_exps: Vec<(Vec<C64>, Vec<ZeroOp>)>,
    /// z^{c·q_l∂_{q_l}}
    pub z_euler: Vec<(usize, C64)>,
    /// exp(p(ζ)) with p having no linear term.
    pub scalar: Vec<C64>,
    /// exp(Σ_n Σ_i c_i(n,ζ) x_{i,n} z^n)
    pub plus: Vec<(usize, fn(f64) -> Vec<C64>)>,
    /// exp(Σ_n Σ_i d_i(n,ζ) ∂_{x_{i,n}} z^{−n})
    pub minus: Vec<(usize, fn(f64) -> Vec<C64>)>,
}

fn closed_e_terms(fm: &FockModule, list: &[(usize, fn(f64) -> Vec<C64>)], plus: bool) -> Vec<Term> {
    let zb = fm.jd.zero_block().expect("zero block");
    let mut out = Vec::new();
    for (var, info) in fm.vars.iter().enumerate() {
        if info.block != zb {
            continue;
        }
        let n = -info.level;
        for (i, f) in list {
            if *i != info.index {
                continue;
            }
            for (deg, cf) in f(n as f64).into_iter().enumerate() {
                if cf.norm() == 0.0 {
                    continue;
                }
                let op = if plus { ModeOp::Mul(vec![(var, cf)]) } else { ModeOp::Diff(vec![(var, cf)]) };
                let key = ExpKey::from_c64(r(if plus { n as f64 } else { -(n as f64) }));
                out.push(Term { key, deg, op, creation: plus });
            }
        }
    }
    out
}

pub fn apply_closed(fm: &FockModule, cv: &ClosedVertex, st: &State, out_cap: f64) -> FieldVec {
    let jmax = fm.config.zeta_order;
    let fv = fv_from_state(st, jmax);
    let fv = exp_terms(fm, &closed_e_terms(fm, &cv.minus, false), fv);
    let plus = exp_terms(fm, &closed_e_terms(fm, &cv.plus, true), fv_from_state(&unit(fm.vacuum()), jmax));
    let mut fv = mul_field(fm, &plus, &fv, out_cap);
    fv = fv_scale_poly(&fv, &exp_poly(&cv.scalar, jmax));
    for &(l, cf) in cv.z_euler.iter().rev() {
        let mut next = FieldVec::new();
        for (k, z) in &fv {
            for (j, s) in z.iter().enumerate() {
                for (m, v) in s {
                    let q = m[m.len() - fm.rep.nq + l] as f64;
                    let mut zz = zstate(jmax);
                    fock::add_term(&mut zz[j], m.clone(), *v);
                    fv_add(&mut next, k.add(ExpKey::from_c64(cf * q)), &zz, r(1.0));
                }
            }
        }
        fv = next;
    }
    for (p, ops) in cv.zeta_exps.iter().rev() {
        // exp(p(ζ)X) = Σ_n p^n X^n / n!
        let mut acc = fv.clone();
        let mut term = fv.clone();
        for n in 1..=jmax {
            let xt = fv_map(&term, |s| ops.iter().fold(new_state(), |mut a, op| {
                axpy(&mut a, r(1.0), &fm.apply_zero_op(op, s));
                a
            }));
            term = fv_scale_poly(&xt, &p.iter().map(|c| c / n as f64).collect::<Vec<_>>());
            for (k, z) in &term {
                fv_add(&mut acc, *k, z, r(1.0));
            }
        }
        fv = acc;
    }
    fv_map(&fv, |s| cv.exact.iter().rev().fold(s.clone(), |a, op| fm.apply_zero_op(op, &a)))
}

fn zp(c: &[C64]) -> Vec<C64> {
    c.to_vec()
}

fn cz(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// The displayed vertex operators of the two bundled examples, in lattice
/// basis order. For the rank-3 Λ₀ operator, `corrected` adds the factor
/// e^{−ζ³/8π²} from splitting exp(Ay + B∂) into e^{Ay}e^{B∂}.
pub fn closed_forms(example: &str, corrected: bool) -> Result<Vec<(IVec, ClosedVertex)>> {
    let tpi = cx::two_pi_i();
    let pi = std::f64::consts::PI;
    let s2 = std::f64::consts::SQRT_2;
    let z0 = r(0.0);
    let one = r(1.0);
    let euler = |var: usize, c: C64| ZeroOp::Euler { var, c: cz(c) };
    let mul_y = |c: C64| ZeroOp::MulY { var: 0, c: cz(c) };
    let diff_y = |c: C64| ZeroOp::DiffY { var: 0, c: cz(c) };
    match example {
        "example-6.1" => Ok(vec![
            (
                vec![1, 0, 0, 0],
                ClosedVertex {
                    exact: vec![ZeroOp::MulQ { var: 1, n: 1 }],
                    zeta_exps: vec![(zp(&[z0, one]), vec![mul_y(one)]), (zp(&[z0, z0, -one / (2.0 * tpi)]), vec![euler(0, one)])],
                    z_euler: vec![],
                    scalar: vec![],
                    plus: vec![(0, |n| vec![r(1.0 / n)]), (1, |n| vec![r(1.0 / (n * n)), r(-1.0 / n)])],
                    minus: vec![(3, |_| vec![r(-1.0)]), (2, |_| vec![r(0.0), r(1.0)])],
                },
            ),
            (
                vec![0, 1, 0, 0],
                ClosedVertex {
                    exact: vec![ZeroOp::PhaseEuler { var: 0, c: [0.0, pi] }, ZeroOp::ExpY { var: 0, k: -1 }],
                    zeta_exps: vec![],
                    z_euler: vec![(0, one)],
                    scalar: vec![],
                    plus: vec![(1, |n| vec![cx::two_pi_i() / n])],
                    minus: vec![(2, |_| vec![-cx::two_pi_i()])],
                },
            ),
            (
                vec![0, 0, 1, 0],
                ClosedVertex {
                    exact: vec![ZeroOp::MulQ { var: 0, n: 1 }, ZeroOp::PhaseEuler { var: 1, c: [0.0, -pi / 6.0] }],
                    zeta_exps: vec![
                        (zp(&[z0, z0, one / (2.0 * tpi)]), vec![euler(1, one)]),
                        (zp(&[z0, -one / tpi]), vec![diff_y(one)]),
                    ],
                    z_euler: vec![],
                    scalar: vec![],
                    plus: vec![
                        (2, |n| vec![r(1.0 / n) / cx::two_pi_i()]),
                        (3, |n| vec![r(-1.0 / (n * n)) / cx::two_pi_i(), r(1.0 / n) / cx::two_pi_i()]),
                    ],
                    minus: vec![
                        (1, |_| vec![r(-1.0) / cx::two_pi_i()]),
                        (0, |_| vec![r(0.0), r(-1.0) / cx::two_pi_i()]),
                    ],
                },
            ),
            (
                vec![0, 0, 0, 1],
                ClosedVertex {
                    exact: vec![ZeroOp::PhaseEuler { var: 1, c: [0.0, pi] }, ZeroOp::ShiftY { var: 0, c: [-1.0, 0.0] }],
                    zeta_exps: vec![],
                    z_euler: vec![(1, one)],
                    scalar: vec![],
                    plus: vec![(3, |n| vec![r(1.0 / n)])],
                    minus: vec![(0, |_| vec![r(-1.0)])],
                },
            ),
        ]),
        "example-6.2" => {
            let k = -r(s2) / tpi;
            let mut lam0_scalar = vec![z0, z0, z0, r(1.0 / (24.0 * pi * pi))];
            if corrected {
                lam0_scalar[3] -= r(1.0 / (8.0 * pi * pi));
            }
            Ok(vec![
                (
                    vec![0, 0, 1],
                    ClosedVertex {
                        exact: vec![ZeroOp::MulQ { var: 0, n: 1 }],
                        zeta_exps: vec![
                            (zp(&[z0, k]), vec![mul_y(one)]),
                            (
                                zp(&[z0, z0, one]),
                                vec![diff_y(-r(s2) / (2.0 * tpi)), euler(0, r(0.0))],
                            ),
                            (zp(&[z0, z0, z0, one]), vec![euler(0, r(1.0 / (12.0 * pi * pi)))]),
                        ],
                        z_euler: vec![],
                        scalar: lam0_scalar,
                        plus: vec![
                            (0, |n| vec![-r(std::f64::consts::SQRT_2) / cx::two_pi_i() / n]),
                            (1, |n| {
                                let k = -r(std::f64::consts::SQRT_2) / cx::two_pi_i();
                                vec![k / (n * n), -k / n]
                            }),
                            (2, |n| {
                                let k = -r(std::f64::consts::SQRT_2) / cx::two_pi_i();
                                // −(n²ζ² − 2nζ + 2)/(2n³)
                                vec![-k / (n * n * n), k / (n * n), -k / (2.0 * n)]
                            }),
                        ],
                        minus: vec![
                            (2, |_| vec![r(std::f64::consts::SQRT_2) / cx::two_pi_i()]),
                            (1, |_| vec![r(0.0), -r(std::f64::consts::SQRT_2) / cx::two_pi_i()]),
                            (0, |_| vec![r(0.0), r(0.0), -r(std::f64::consts::SQRT_2) / cx::two_pi_i() / 2.0]),
                        ],
                    },
                ),
                (
                    vec![1, 0, 0],
                    ClosedVertex {
                        exact: vec![
                            ZeroOp::Scalar { c: [0.0, -1.0] },
                            ZeroOp::PhaseEuler { var: 0, c: [0.0, pi / 3.0] },
                            ZeroOp::ExpY { var: 0, k: -1 },
                        ],
                        zeta_exps: vec![
                            (zp(&[z0, one]), vec![diff_y(r(-s2))]),
                            (zp(&[z0, z0, one]), vec![euler(0, -one / tpi)]),
                        ],
                        z_euler: vec![],
                        scalar: vec![],
                        plus: vec![
                            (1, |n| vec![r(std::f64::consts::SQRT_2 / n)]),
                            (2, |n| vec![r(-std::f64::consts::SQRT_2 / (n * n)), r(std::f64::consts::SQRT_2 / n)]),
                        ],
                        minus: vec![
                            (1, |_| vec![r(-std::f64::consts::SQRT_2)]),
                            (0, |_| vec![r(0.0), r(-std::f64::consts::SQRT_2)]),
                        ],
                    },
                ),
                (
                    vec![0, 1, 0],
                    ClosedVertex {
                        exact: vec![ZeroOp::PhaseEuler { var: 0, c: [0.0, pi] }, ZeroOp::ShiftY { var: 0, c: cz(tpi / s2) }],
                        zeta_exps: vec![],
                        z_euler: vec![(0, one)],
                        scalar: vec![],
                        plus: vec![(2, |n| vec![-cx::two_pi_i() / std::f64::consts::SQRT_2 / n])],
                        minus: vec![(0, |_| vec![cx::two_pi_i() / std::f64::consts::SQRT_2])],
                    },
                ),
            ])
        }
        other => Err(Error::BadInput(format!("no closed-form vertex operators for `{other}`"))),
    }
}

/// Largest difference between Y(e^λ,z) and its closed form over the basis.
pub fn closed_form_residual(fm: &FockModule, lam: &[i64], cv: &ClosedVertex) -> Result<f64> {
    let vd = VertexData::new(fm, lam)?;
    let jmax = fm.config.zeta_order;
    let cap = fm.config.cutoff;
    Ok(fm.fv_max_residual(jmax, |s| Ok(fv_sub(&apply_vertex(fm, &vd, s, cap), &apply_closed(fm, cv, s, cap)))))
}

// ---------------------------------------------------------------------------
// Scalar locality transport.

/// ∂_a^j of x^aΦ(x,1,a) = ∫₀¹ x^a s^{a−1}/(1−xs) ds by tanh-sinh quadrature,
/// valid off the ray [1, ∞) for Re a > 0.
pub fn lerch_integral_derivs(x: C64, a: C64, jmax: usize) -> Vec<C64> {
    let lx = x.ln();
    let h = 1.0 / 128.0;
    let tmax = 4.5;
    let n = (tmax / h) as i64;
    let mut out = vec![r(0.0); jmax + 1];
    let pi = std::f64::consts::PI;
    for k in -n..=n {
        let t = k as f64 * h;
        let u = pi * t.sinh();
        // s = 1/(1+e^{−u}), ln s = −ln(1+e^{−u}), 1−s = 1/(1+e^{u})
        let ln_s = -softplus(-u);
        let s = ln_s.exp();
        let one_minus_s = (-softplus(u)).exp();
        let w = pi * t.cosh() * s * one_minus_s;
        if w == 0.0 {
            continue;
        }
        let lt = lx + ln_s;
        let base = (a * lx + (a - 1.0) * ln_s).exp() / (r(1.0) - x * s) * (w * h);
        let mut p = r(1.0);
        for o in out.iter_mut() {
            *o += base * p;
            p *= lt;
        }
    }
    out
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalityPoint {
    pub ratio: [f64; 2],
    pub direct: [f64; 2],
    pub transported: [f64; 2],
    pub rel_err: f64,
}

/// Compares, at z₁ = 1 and z₂ = x, the function
///   exp(−((ln(1−x) + x^{S′+N}Φ(x,1,S′+N))λ|μ))
/// (continued by quadrature) with
///   (−1)^{|λ|²|μ|²+(λ|μ)} C_{λ,μ}^{−1} exp(((x^N−1)/N)λ₀|μ) R_{μ,λ}(x, 1)
/// where R_{μ,λ} uses its convergent expansion in 1/x.
pub fn scalar_locality(jd: &JordanData, lat: &Lattice, lam: &[i64], mu: &[i64], x: C64) -> Result<LocalityPoint> {
    if x.im == 0.0 {
        return Err(Error::OutOfDomain("the ratio z₂/z₁ must be nonreal".into()));
    }
    let (lv, mv) = (from_ivec(lam), from_ivec(mu));
    let k = jd.nilpotency_index.max(1);
    let lm = lat.form(lam, mu) as f64;
    let lx = x.ln();
    let mut direct_d = Vec::new();
    let mut trans_d = Vec::new();
    for blk in &jd.blocks {
        direct_d.push(lerch_integral_derivs(x, blk.alpha0_prime, k));
        trans_d.push(specfun::lerch_power_derivs(-lx, blk.alpha0_prime, k)?);
    }
    let f_l = jd.nilpotent_calculus(&direct_d, &lv)?;
    let g_m = jd.nilpotent_calculus(&trans_d, &mv)?;
    let direct = (-(r(lm) * (r(1.0) - x).ln() + jd.form(&f_l, &mv))).exp();
    let l0 = jd.pi0(&lv);
    let mut xn = CVec::zeros(jd.rank());
    let mut v = l0.clone();
    let mut p = r(1.0);
    for kk in 1..=k {
        p *= lx / kk as f64;
        xn += &v * p;
        v = &jd.nilp * v;
    }
    let parity = (lat.norm2(lam) * lat.norm2(mu) + lat.form(lam, mu)).rem_euclid(2);
    let sign = if parity == 1 { -1.0 } else { 1.0 };
    let cst = structure::c_constant(jd, lat, lam, mu)?;
    let r_ml = x.powf(-lm) * (-(r(lm) * (r(1.0) - r(1.0) / x).ln() + jd.form(&g_m, &lv))).exp();
    let transported = sign / cst * jd.form(&xn, &mv).exp() * r_ml;
    Ok(LocalityPoint {
        ratio: cx::pair(x),
        direct: cx::pair(direct),
        transported: cx::pair(transported),
        rel_err: cx::rel_err(transported, direct),
    })
}

pub const LOCALITY_POINTS: [(f64, f64); 3] = [(0.0, 2.0), (1.0, 1.0), (-1.0, 2.0)];

pub fn locality_check(jd: &JordanData, lat: &Lattice, pairs: &[(IVec, IVec)], tol: f64) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for (l, m) in pairs {
        for &(re, im) in &LOCALITY_POINTS {
            worst = worst.max(scalar_locality(jd, lat, l, m, C64::new(re, im))?.rel_err);
        }
    }
    Ok(Check::new("scalar-locality", "localeq", worst, tol))
}

/// φ = Id degeneration on a module: B ≡ 1, a_λ ≡ 0, c_λ = b_λ, and vertex
/// operators free of ζ.
pub fn untwisted_checks(fm: &FockModule, tol: f64) -> Result<Vec<Check>> {
    let jd = &fm.jd;
    let gens = generators(&fm.lattice);
    let mut b_dev: f64 = 0.0;
    let mut c_dev: f64 = 0.0;
    let mut a_dev: f64 = 0.0;
    let mut cb_dev: f64 = 0.0;
    let mut zdeg = 0;
    let mut sample = gens.clone();
    sample.push(lattice::add(&gens[0], &gens[gens.len() - 1]));
    sample.push(lattice::neg(&gens[0]));
    for l in &sample {
        let lv = from_ivec(l);
        for m in &sample {
            let mv = from_ivec(m);
            b_dev = b_dev.max((structure::b_constant(jd, &lv, &mv)? - r(1.0)).norm());
            let parity = (fm.lattice.form(l, m) + fm.lattice.norm2(l) * fm.lattice.norm2(m)).rem_euclid(2);
            let expect = if parity == 1 { -1.0 } else { 1.0 };
            c_dev = c_dev.max((structure::c_constant(jd, &fm.lattice, l, m)? - r(expect)).norm());
        }
        a_dev = a_dev.max(structure::a_lambda(jd, &lv).iter().fold(0.0, |a, z| a.max(z.norm())));
        cb_dev = cb_dev.max((structure::c_lambda(jd, &lv) - structure::b_lambda(jd, &lv)).norm());
        zdeg = zdeg.max(max_zeta_degree(fm, l)?);
    }
    Ok(vec![
        Check::new("untwisted-B-is-one", "ecomb", b_dev, tol),
        Check::new("untwisted-C-sign", "C-constant", c_dev, tol),
        Check::new("untwisted-a-vanishes", "twistedvop", a_dev, tol),
        Check::new("untwisted-c-equals-b", "phieq", cb_dev, tol),
        Check::flag("untwisted-no-log", "twistedvop", zdeg == 0),
    ])
}

#[allow(dead_code)]
fn is_annihilator(m: C64) -> bool {
    in_c_plus(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{FockConfig, ZeroModeRep};
    use crate::presets;

    fn module(name: &str, cutoff: f64) -> (FockModule, crate::lattice::Automorphism) {
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
        (FockModule::build(&p.setup, jd, rep, cfg, 7).unwrap(), p.phi.clone())
    }

    #[test]
    fn integral_oracle_matches_series_inside_disc() {
        let x = C64::new(0.3, 0.4);
        for a in [r(1.0), C64::new(0.4, -0.2)] {
            let q = lerch_integral_derivs(x, a, 2);
            let s = specfun::lerch_power_derivs(x.ln(), a, 2).unwrap();
            for j in 0..3 {
                assert!((q[j] - s[j]).norm() < 1e-11, "{a} {j}: {} vs {}", q[j], s[j]);
            }
        }
    }

    #[test]
    fn identity_locality_is_trivial() {
        let p = presets::hyperbolic_identity();
        let jd = p.setup.jordan().unwrap();
        let ch = locality_check(&jd, &p.lattice, &[(vec![1, 0], vec![0, 1]), (vec![1, 1], vec![1, 0])], 1e-10).unwrap();
        assert!(ch.pass, "{ch:?}");
    }

    #[test]
    fn example_locality() {
        let p = presets::example_61();
        let jd = p.setup.jordan().unwrap();
        let ch = locality_check(&jd, &p.lattice, &[(vec![1, 0, 0, 0], vec![0, 0, 1, 0])], 1e-7).unwrap();
        assert!(ch.pass, "{ch:?}");
        let p = presets::example_62();
        let jd = p.setup.jordan().unwrap();
        let ch = locality_check(&jd, &p.lattice, &[(vec![0, 0, 1], vec![0, 1, 0])], 1e-7).unwrap();
        assert!(ch.pass, "{ch:?}");
    }

    #[test]
    fn zero_vector_gives_identity_field() {
        let (fm, _) = module("example-6.2", 1.0);
        let vd = VertexData::new(&fm, &[0, 0, 0]).unwrap();
        for m in fm.basis.iter().take(20) {
            let s = unit(m.clone());
            let y = apply_vertex(&fm, &vd, &s, fm.config.cutoff);
            let d = fv_sub(&y, &fv_from_state(&s, fm.config.zeta_order));
            assert!(fm.fv_max_within_cutoff(&d, fm.config.zeta_order) < 1e-14);
        }
    }

    #[test]
    fn current_log_part_uses_n() {
        // ζ-degree-1 part of Y(λ₁,z) is −Σ(Nλ₁)_{(m+N)}z^{−m−1}, Nλ₁ = λ₂/2πi
        let (fm, _) = module("example-6.1", 2.0);
        let l1 = from_ivec(&[1, 0, 0, 0]);
        let terms = current_terms(&fm, &l1).unwrap();
        let s = unit(fm.vacuum());
        let y = apply_current(&fm, &terms, &s);
        let l2 = from_ivec(&[0, 1, 0, 0]) / cx::two_pi_i();
        for (b, l) in fm.modes_within(2.0) {
            let m = fm.mode_value(b, l);
            let key = ExpKey::from_c64(-m - 1.0);
            let expect = fock::scaled(&fm.act_mode(&l2, b, l, &s).unwrap(), r(-1.0));
            let got = y.get(&key).map(|z| z[1].clone()).unwrap_or_default();
            assert!(fock::max_coeff(&fock::sub(&got, &expect)) < 1e-14);
        }
    }

    #[test]
    fn closed_forms_match() {
        for name in ["example-6.1", "example-6.2"] {
            let (fm, _) = module(name, 2.0);
            for (lam, cv) in closed_forms(name, true).unwrap() {
                let res = closed_form_residual(&fm, &lam, &cv).unwrap();
                assert!(res < 1e-10, "{name} {lam:?}: {res}");
            }
        }
        let (fm, _) = module("example-6.2", 1.0);
        let (lam, cv) = closed_forms("example-6.2", false).unwrap().remove(0);
        assert!(closed_form_residual(&fm, &lam, &cv).unwrap() > 1e-3);
    }

    #[test]
    fn batteries_pass_small() {
        for name in ["example-6.1", "example-6.2"] {
            let (fm, phi) = module(name, 1.0);
            for ch in vertexop_checks(&fm, &phi, 1e-8) {
                assert!(ch.pass, "{name}: {ch:?}");
            }
        }
    }

    #[test]
    fn product_orders() {
        let (fm, _) = module("example-6.1", 1.0);
        let (l1, l4) = (vec![1, 0, 0, 0], vec![0, 0, 0, 1]);
        assert!(matches!(nth_product(&fm, &l1, &l4, 0, None).unwrap(), ProductField::Zero));
        assert!(matches!(nth_product(&fm, &l1, &l4, -3, None), Err(Error::UnsupportedProductOrder(_))));
        assert!(matches!(nth_product(&fm, &l1, &l1, -1, Some(-1)), Err(Error::BadInput(_))));
        // a larger locality order leaves the product unchanged
        let a = product_limit_residual(&fm, &l1, &l4, None).unwrap();
        let b = product_limit_residual(&fm, &l1, &l4, Some(3)).unwrap();
        assert!(a < 1e-10 && b < 1e-10);
        let v = from_ivec(&l1);
        let w = from_ivec(&l4);
        assert_eq!(current_product(&fm, &v, &w, 1).unwrap(), r(1.0));
        assert_eq!(current_product(&fm, &v, &w, 0).unwrap(), r(0.0));
    }

    #[test]
    fn rank3_eta_is_fitted_to_u() {
        let (fm, _) = module("example-6.2", 0.0);
        assert_eq!(fm.eta.basis, vec![1, 1, -1]);
        let (fm, _) = module("example-6.1", 0.0);
        assert_eq!(fm.eta.basis, vec![1, 1, 1, 1]);
    }

    #[test]
    fn untwisted_degeneration() {
        let (fm, _) = module("hyperbolic", 2.0);
        for ch in untwisted_checks(&fm, 1e-12).unwrap() {
            assert!(ch.pass, "{ch:?}");
        }
    }
}
