//! Multiplicative Jordan–Chevalley splitting φ = σ·exp(−2πiN), eigenblocks
//! and the nilpotent functional calculus built on them.

use serde::Serialize;

use crate::cx::{self, bform, c, factorial, max_abs, r, two_pi_i, CMat, CVec, C64};
use crate::error::{Error, Result};
use crate::intlin::{self, IMat, IPoly};
use crate::lattice::{Automorphism, Lattice};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignClass {
    Zero,
    Plus,
    Minus,
}

#[derive(Clone, Debug)]
pub struct EigenBlock {
    pub eigenvalue: C64,
    pub alpha0: C64,
    pub alpha0_prime: C64,
    pub sign_class: SignClass,
    pub dim: usize,
    pub projector: CMat,
    /// Columns spanning the block.
    pub basis: CMat,
}

#[derive(Clone, Debug)]
pub struct JordanData {
    pub gram: CMat,
    pub phi: CMat,
    pub sigma: CMat,
    pub nilp: CMat,
    pub blocks: Vec<EigenBlock>,
    pub nilpotency_index: usize,
    pub tol: f64,
    /// ((1−σ)(1−π₀)+π₀)⁻¹
    inv_one_minus_sigma: CMat,
    /// ((1−φ)(1−π₀)+π₀)⁻¹
    inv_one_minus_phi: CMat,
    pi0: CMat,
}

pub fn alpha0_of(ev: C64) -> Result<C64> {
    if ev.norm() == 0.0 {
        return Err(Error::ZeroEigenvalue);
    }
    let mut x = -ev.arg() / (2.0 * std::f64::consts::PI);
    if x > 0.0 {
        x -= 1.0;
    }
    if x.abs() < 1e-14 || x <= -1.0 + 1e-14 {
        x = 0.0;
    }
    let y = ev.norm().ln() / (2.0 * std::f64::consts::PI);
    Ok(c(x, y))
}

pub fn sign_class(a: C64) -> SignClass {
    if a.re < 0.0 || (a.re == 0.0 && a.im < 0.0) {
        SignClass::Minus
    } else if a.re == 0.0 && a.im == 0.0 {
        SignClass::Zero
    } else {
        SignClass::Plus
    }
}

pub fn alpha0_prime(a: C64) -> C64 {
    match sign_class(a) {
        SignClass::Plus => a,
        _ => a + 1.0,
    }
}

/// True for the half-plane {Re > 0} ∪ {Re = 0, Im > 0}.
pub fn in_c_plus(m: C64) -> bool {
    sign_class(m) == SignClass::Plus
}

fn poly_roots(p: &IPoly) -> Vec<C64> {
    let n = p.degree().unwrap_or(0);
    let coef: Vec<C64> = p.0[..=n].iter().map(|&x| r(x as f64)).collect();
    if n == 0 {
        return vec![];
    }
    if n == 1 {
        return vec![-coef[0] / coef[1]];
    }
    let eval = |z: C64| -> (C64, C64) {
        let mut f = C64::new(0.0, 0.0);
        let mut df = C64::new(0.0, 0.0);
        for k in (0..=n).rev() {
            df = df * z + f;
            f = f * z + coef[k];
        }
        (f, df)
    };
    // Aberth–Ehrlich iteration from points on a circle
    let bound = 1.0
        + (0..n)
            .map(|k| (coef[k] / coef[n]).norm())
            .fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(0.5 * bound, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (f, df) = eval(z[i]);
            if f.norm() == 0.0 {
                continue;
            }
            let ratio = f / df;
            let s: C64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            z[i] -= w;
            moved = moved.max(w.norm() / z[i].norm().max(1e-300));
        }
        if moved < 1e-16 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (f, df) = eval(*zi);
            if df.norm() > 0.0 {
                *zi -= f / df;
            }
        }
        if zi.im.abs() < 1e-12 * zi.norm().max(1.0) {
            zi.im = 0.0;
        }
    }
    z
}

/// Eigenvalues of an integer matrix with algebraic multiplicities.
pub fn eigenvalues(a: &IMat) -> Result<Vec<(C64, usize)>> {
    let cp = intlin::charpoly(a)?;
    let mut out = Vec::new();
    for (mult, f) in intlin::squarefree_split(&cp)? {
        let mut f = f;
        for root in [1i128, -1] {
            if f.eval_i(root) == 0 {
                out.push((r(root as f64), mult));
                f = IPoly::div_exact(&f, &IPoly(vec![-root, 1]))?;
            }
        }
        for z in poly_roots(&f) {
            out.push((z, mult));
        }
    }
    Ok(out)
}

fn null_space(m: &CMat, k: usize) -> CMat {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    // singular values are sorted descending: the last k rows span the kernel
    CMat::from_fn(n, k, |i, j| vt[(n - k + j, i)].conj())
}

fn mat_pow(m: &CMat, k: usize) -> CMat {
    let n = m.nrows();
    (0..k).fold(CMat::identity(n, n), |acc, _| &acc * m)
}

pub fn exp_nilpotent(x: &CMat, terms: usize) -> CMat {
    let n = x.nrows();
    let mut acc = CMat::identity(n, n);
    let mut p = CMat::identity(n, n);
    for k in 1..=terms {
        p = &p * x / r(k as f64);
        acc += &p;
    }
    acc
}

/// Matrix exponential by scaling and squaring.
pub fn expm(x: &CMat) -> CMat {
    let norm = max_abs(x) * x.nrows() as f64;
    let mut k = 0;
    while norm / 2f64.powi(k) > 0.25 {
        k += 1;
    }
    let mut e = exp_nilpotent(&(x / r(2f64.powi(k))), 18);
    for _ in 0..k {
        e = &e * &e;
    }
    e
}

impl JordanData {
    pub fn new(lat: &Lattice, phi: &Automorphism, tol: f64) -> Result<JordanData> {
        let d = lat.rank();
        let gram = cx::from_imat(&lat.gram);
        let phic = cx::from_imat(&phi.mat);
        let eig = eigenvalues(&phi.mat)?;
        let mut blocks = Vec::new();
        for (ev, mult) in eig {
            let shifted = &phic - CMat::identity(d, d) * ev;
            let basis = null_space(&mat_pow(&shifted, mult), mult);
            let alpha0 = alpha0_of(ev)?;
            let (alpha0, ev) = if ev == r(1.0) {
                (r(0.0), ev)
            } else if ev == r(-1.0) {
                (r(-0.5), ev)
            } else {
                (alpha0, ev)
            };
            blocks.push(EigenBlock {
                eigenvalue: ev,
                alpha0,
                alpha0_prime: alpha0_prime(alpha0),
                sign_class: sign_class(alpha0),
                dim: mult,
                projector: CMat::zeros(d, d),
                basis,
            });
        }
        let total: usize = blocks.iter().map(|b| b.dim).sum();
        if total != d {
            return Err(Error::DecompositionResidual {
                what: "eigenspace dimensions".into(),
                residual: (d as f64 - total as f64).abs(),
                tol,
            });
        }
        let mut v = CMat::zeros(d, d);
        let mut col = 0;
        for b in &blocks {
            for j in 0..b.dim {
                v.set_column(col + j, &b.basis.column(j));
            }
            col += b.dim;
        }
        let vinv = v.clone().try_inverse().ok_or_else(|| Error::DecompositionResidual {
            what: "eigenbasis is singular".into(),
            residual: f64::INFINITY,
            tol,
        })?;
        let mut col = 0;
        let mut sigma = CMat::zeros(d, d);
        for b in blocks.iter_mut() {
            let mut e = CMat::zeros(d, d);
            for j in col..col + b.dim {
                e[(j, j)] = r(1.0);
            }
            col += b.dim;
            b.projector = &v * e * &vinv;
            sigma += &b.projector * b.eigenvalue;
        }
        let sigma_inv = sigma.clone().try_inverse().ok_or(Error::ZeroEigenvalue)?;
        let x = &sigma_inv * &phic - CMat::identity(d, d);
        let mut log = CMat::zeros(d, d);
        let mut p = CMat::identity(d, d);
        for k in 1..=d {
            p = &p * &x;
            let s = if k % 2 == 1 { 1.0 } else { -1.0 };
            log += &p * r(s / k as f64);
        }
        let nilp = -log / two_pi_i();
        let scale = max_abs(&nilp).max(1.0);
        let mut nilpotency_index = 0;
        let mut pw = CMat::identity(d, d);
        while nilpotency_index <= d && max_abs(&pw) > tol * scale {
            pw = &pw * &nilp;
            nilpotency_index += 1;
        }
        let pi0 = blocks
            .iter()
            .find(|b| b.sign_class == SignClass::Zero)
            .map(|b| b.projector.clone())
            .unwrap_or_else(|| CMat::zeros(d, d));
        let id = CMat::identity(d, d);
        let m_sigma = (&id - &sigma) * (&id - &pi0) + &pi0;
        let m_phi = (&id - &phic) * (&id - &pi0) + &pi0;
        let inv_one_minus_sigma = m_sigma
            .try_inverse()
            .ok_or_else(|| Error::SingularRestriction("1−σ on the complement of h₀".into()))?;
        let inv_one_minus_phi = m_phi
            .try_inverse()
            .ok_or_else(|| Error::SingularRestriction("1−φ on the complement of h₀".into()))?;
        let jd = JordanData {
            gram,
            phi: phic,
            sigma,
            nilp,
            blocks,
            nilpotency_index,
            tol,
            inv_one_minus_sigma,
            inv_one_minus_phi,
            pi0,
        };
        jd.check()?;
        Ok(jd)
    }

    pub fn rank(&self) -> usize {
        self.gram.nrows()
    }

    /// Largest residual of every structural invariant, by name.
    pub fn residuals(&self) -> Vec<(&'static str, f64)> {
        let d = self.rank();
        let id = CMat::identity(d, d);
        let recon = &self.sigma * exp_nilpotent(&(&self.nilp * -two_pi_i()), d);
        let mut s_op = CMat::zeros(d, d);
        let mut proj_sum = CMat::zeros(d, d);
        let mut idem: f64 = 0.0;
        let mut eig: f64 = 0.0;
        for b in &self.blocks {
            s_op += &b.projector * b.alpha0;
            proj_sum += &b.projector;
            idem = idem.max(max_abs(&(&b.projector * &b.projector - &b.projector)));
            eig = eig.max(max_abs(&(&self.sigma * &b.projector - &b.projector * b.eigenvalue)));
        }
        let via_s = expm(&((&s_op + &self.nilp) * -two_pi_i()));
        let g = &self.gram;
        vec![
            ("reconstruction", max_abs(&(recon - &self.phi))),
            ("exp(-2πi(S+N))", max_abs(&(via_s - &self.phi))),
            ("commutation", max_abs(&(&self.sigma * &self.nilp - &self.nilp * &self.sigma))),
            ("nilpotency", max_abs(&mat_pow(&self.nilp, d))),
            ("sigma isometry", max_abs(&(self.sigma.transpose() * g * &self.sigma - g))),
            ("N skew", max_abs(&(self.nilp.transpose() * g + g * &self.nilp))),
            ("projector sum", max_abs(&(proj_sum - id))),
            ("idempotence", idem),
            ("eigenvalue", eig),
        ]
    }

    fn check(&self) -> Result<()> {
        let scale = max_abs(&self.phi).max(1.0);
        for (what, res) in self.residuals() {
            let tol = self.tol;
            if !(res <= tol * scale) {
                return Err(Error::DecompositionResidual { what: what.into(), residual: res, tol });
            }
        }
        Ok(())
    }

    pub fn zero_block(&self) -> Option<usize> {
        self.blocks.iter().position(|b| b.sign_class == SignClass::Zero)
    }

    /// Block with eigenvalue 1/λ (the coset −α).
    pub fn partner(&self, b: usize) -> Option<usize> {
        let target = 1.0 / self.blocks[b].eigenvalue;
        self.blocks
            .iter()
            .position(|x| (x.eigenvalue - target).norm() < 1e-8 * target.norm().max(1.0))
    }

    pub fn block_of_alpha(&self, alpha0: C64) -> Result<usize> {
        self.blocks
            .iter()
            .position(|b| (b.alpha0 - alpha0).norm() < 1e-9)
            .ok_or_else(|| Error::UnknownBlock(format!("no block with α₀ = {alpha0}")))
    }

    pub fn project(&self, b: usize, a: &CVec) -> Result<CVec> {
        let blk = self
            .blocks
            .get(b)
            .ok_or_else(|| Error::UnknownBlock(format!("block index {b}")))?;
        Ok(&blk.projector * a)
    }

    pub fn pi0(&self, a: &CVec) -> CVec {
        &self.pi0 * a
    }

    pub fn form(&self, a: &CVec, b: &CVec) -> C64 {
        bform(&self.gram, a, b)
    }

    /// λ = λ₀ + (1−σ)λ_* with λ_* ⟂ h₀.
    pub fn star_split(&self, lam: &CVec) -> Result<(CVec, CVec)> {
        let l0 = self.pi0(lam);
        let rest = lam - &l0;
        let star = &self.inv_one_minus_sigma * &rest;
        let d = self.rank();
        let back = &l0 + (CMat::identity(d, d) - &self.sigma) * &star;
        let err = cx::vmax_abs(&(back - lam));
        if !(err <= 1e-8 * cx::vmax_abs(lam).max(1.0)) || cx::vmax_abs(&self.pi0(&star)) > 1e-8 {
            return Err(Error::SingularRestriction(format!("star split residual {err:e}")));
        }
        Ok((l0, star))
    }

    /// (1−φ)⁻¹ restricted to the complement of h₀.
    pub fn inv_one_minus_phi(&self, v: &CVec) -> CVec {
        &self.inv_one_minus_phi * (v - self.pi0(v))
    }

    pub fn nilp_pow_apply(&self, k: usize, a: &CVec) -> CVec {
        let mut v = a.clone();
        for _ in 0..k {
            v = &self.nilp * v;
        }
        v
    }

    /// Coefficients of ζ^k in P^±a = Σ_k (±ζN)^k/(k+1)! a.
    pub fn p_coeffs(&self, plus: bool, a: &CVec) -> Vec<CVec> {
        let mut out = Vec::new();
        let mut v = a.clone();
        for k in 0..self.nilpotency_index.max(1) {
            let s = if plus || k % 2 == 0 { 1.0 } else { -1.0 };
            out.push(&v * r(s / factorial(k + 1)));
            v = &self.nilp * v;
        }
        out
    }

    pub fn apply_p(&self, plus: bool, zeta: C64, a: &CVec) -> CVec {
        let mut acc = CVec::zeros(self.rank());
        let mut zk = r(1.0);
        for v in self.p_coeffs(plus, a) {
            acc += v * zk;
            zk *= zeta;
        }
        acc
    }

    /// P = (P⁺ − P⁻)/2 at a concrete ζ.
    pub fn apply_p_mid(&self, zeta: C64, a: &CVec) -> CVec {
        (self.apply_p(true, zeta, a) - self.apply_p(false, zeta, a)) / r(2.0)
    }

    /// f(S′+N)a from derivatives f^{(j)}(α₀′) listed per block.
    pub fn nilpotent_calculus(&self, derivs: &[Vec<C64>], a: &CVec) -> Result<CVec> {
        let k = self.nilpotency_index.max(1);
        let mut acc = CVec::zeros(self.rank());
        for (b, blk) in self.blocks.iter().enumerate() {
            let ds = derivs.get(b).map(|x| x.as_slice()).unwrap_or(&[]);
            let mut v = &blk.projector * a;
            for j in 0..k {
                if cx::vmax_abs(&v) == 0.0 {
                    break;
                }
                let dj = *ds.get(j).ok_or(Error::InsufficientDerivatives {
                    block: b,
                    needed: k,
                    got: ds.len(),
                })?;
                acc += &v * (dj / factorial(j));
                v = &self.nilp * v;
            }
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use proptest::prelude::*;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn alpha0_normalization() {
        assert_eq!(alpha0_of(r(1.0)).unwrap(), r(0.0));
        assert!(close(alpha0_of(r(-1.0)).unwrap(), r(-0.5)));
        let a = alpha0_of(r((2.0 * std::f64::consts::PI).exp())).unwrap();
        assert!(close(a, c(0.0, 1.0)));
        assert_eq!(alpha0_of(r(0.0)), Err(Error::ZeroEigenvalue));
        assert_eq!(alpha0_prime(r(0.0)), r(1.0));
        assert_eq!(alpha0_prime(r(-0.5)), r(0.5));
        assert_eq!(alpha0_prime(c(0.0, 1.0 / 3.0)), c(0.0, 1.0 / 3.0));
        // round trip on the unit circle and off it
        for &ev in &[c(0.0, 1.0), c(0.0, -1.0), C64::from_polar(1.0, 2.0), c(3.0, -4.0), r(-0.25)] {
            let a = alpha0_of(ev).unwrap();
            assert!(a.re > -1.0 && a.re <= 0.0);
            assert!(((-two_pi_i() * a).exp() - ev).norm() < 1e-12);
        }
    }

    #[test]
    fn example_61_nilpotent_part() {
        let p = presets::example_61();
        let jd = JordanData::new(&p.lattice, &p.phi, DEFAULT_TOL).unwrap();
        assert_eq!(jd.blocks.len(), 1);
        assert!(max_abs(&(&jd.sigma - CMat::identity(4, 4))) < 1e-14);
        let e = |i| cx::from_ivec(&p.lattice.basis(i));
        let n1 = &jd.nilp * e(0);
        let n3 = &jd.nilp * e(2);
        assert!(cx::vmax_abs(&(n1 - e(1) / two_pi_i())) < 1e-14);
        assert!(cx::vmax_abs(&(n3 + e(3) / two_pi_i())) < 1e-14);
        assert_eq!(jd.nilpotency_index, 2);
    }

    #[test]
    fn example_62_nilpotent_part() {
        let p = presets::example_62();
        let jd = JordanData::new(&p.lattice, &p.phi, DEFAULT_TOL).unwrap();
        let [a1, de, l0] = [0, 1, 2].map(|i| cx::from_ivec(&p.lattice.basis(i)));
        let pi = std::f64::consts::PI;
        assert!(cx::vmax_abs(&(&jd.nilp * &a1 - &de / c(0.0, pi))) < 1e-14);
        assert!(cx::vmax_abs(&(&jd.nilp * &l0 + &a1 / two_pi_i())) < 1e-14);
        assert!(cx::vmax_abs(&(&jd.nilp * (&jd.nilp * &l0) - &de / r(2.0 * pi * pi))) < 1e-14);
        assert_eq!(jd.nilpotency_index, 3);
        // fully unipotent: the split is trivial
        let (l0s, star) = jd.star_split(&l0).unwrap();
        assert!(cx::vmax_abs(&(l0s - &l0)) < 1e-14 && cx::vmax_abs(&star) < 1e-14);
    }

    #[test]
    fn minus_identity() {
        let lat = Lattice::new(IMat::from_row_slice(2, 2, &[2, 1, 1, 2]), vec!["a".into(), "b".into()]).unwrap();
        let phi = Automorphism::new(&lat, -IMat::identity(2, 2)).unwrap();
        let jd = JordanData::new(&lat, &phi, DEFAULT_TOL).unwrap();
        assert_eq!(jd.blocks.len(), 1);
        assert_eq!(jd.blocks[0].alpha0, r(-0.5));
        assert!(max_abs(&jd.nilp) < 1e-15);
        assert!(jd.zero_block().is_none());
        let v = cx::from_ivec(&[3, -1]);
        assert!(cx::vmax_abs(&jd.pi0(&v)) == 0.0);
        let (l0, star) = jd.star_split(&v).unwrap();
        assert!(cx::vmax_abs(&l0) == 0.0);
        assert!(cx::vmax_abs(&(star - &v / r(2.0))) < 1e-14);
    }

    #[test]
    fn finite_order_and_hyperbolic_blocks() {
        // order-3 rotation of A2
        let lat = Lattice::new(IMat::from_row_slice(2, 2, &[2, -1, -1, 2]), vec!["a".into(), "b".into()]).unwrap();
        let phi = Automorphism::new(&lat, IMat::from_row_slice(2, 2, &[0, -1, 1, -1])).unwrap();
        let jd = JordanData::new(&lat, &phi, DEFAULT_TOL).unwrap();
        let mut a0: Vec<f64> = jd.blocks.iter().map(|b| b.alpha0.re).collect();
        a0.sort_by(f64::total_cmp);
        assert!((a0[0] + 2.0 / 3.0).abs() < 1e-14 && (a0[1] + 1.0 / 3.0).abs() < 1e-14);
        for b in 0..2 {
            let p = jd.partner(b).unwrap();
            assert_ne!(p, b);
        }
        // hyperbolic plane with φ = diag(2+√3 type) from [[2,1],[1,1]] on U ⊕ ... use [[0,1],[1,0]]
        let lat = Lattice::new(IMat::from_row_slice(2, 2, &[0, 1, 1, 0]), vec!["u".into(), "v".into()]).unwrap();
        let phi = Automorphism::new(&lat, IMat::from_row_slice(2, 2, &[-1, 0, 0, -1])).unwrap();
        assert!(JordanData::new(&lat, &phi, DEFAULT_TOL).is_ok());
    }

    #[test]
    fn p_operators_and_calculus() {
        let p = presets::example_62();
        let jd = JordanData::new(&p.lattice, &p.phi, DEFAULT_TOL).unwrap();
        let a = cx::from_ivec(&[1, -2, 3]);
        let b = cx::from_ivec(&[2, 1, -1]);
        let z = c(0.3, -1.1);
        let lhs = jd.form(&jd.apply_p(true, z, &a), &b);
        let rhs = jd.form(&a, &jd.apply_p(false, z, &b));
        assert!((lhs - rhs).norm() < 1e-12);
        let l = jd.form(&jd.apply_p_mid(z, &a), &b);
        let rr = jd.form(&a, &jd.apply_p_mid(z, &b));
        assert!((l + rr).norm() < 1e-12);
        // f(x) = x gives (S'+N)a
        let derivs: Vec<Vec<C64>> = jd.blocks.iter().map(|b| vec![b.alpha0_prime, r(1.0), r(0.0)]).collect();
        let got = jd.nilpotent_calculus(&derivs, &a).unwrap();
        let want = &a + &jd.nilp * &a;
        assert!(cx::vmax_abs(&(got - want)) < 1e-14);
        assert!(matches!(
            jd.nilpotent_calculus(&[vec![r(1.0)]], &a),
            Err(Error::InsufficientDerivatives { .. })
        ));
        assert!(matches!(jd.project(7, &a), Err(Error::UnknownBlock(_))));
    }

    fn isometries() -> impl Strategy<Value = (IMat, IMat)> {
        prop_oneof![
            Just((IMat::from_row_slice(2, 2, &[2, -1, -1, 2]), IMat::from_row_slice(2, 2, &[0, -1, 1, -1]))),
            Just((IMat::from_row_slice(2, 2, &[2, -1, -1, 2]), IMat::from_row_slice(2, 2, &[0, 1, 1, 0]))),
            Just((IMat::from_row_slice(3, 3, &[2, 0, 0, 0, 0, 1, 0, 1, 0]), IMat::from_row_slice(3, 3, &[1, 0, 1, -2, 1, -1, 0, 0, 1]))),
            Just((IMat::from_row_slice(4, 4, &[0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 0]), IMat::from_row_slice(4, 4, &[1, 0, 0, 0, -1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 1, 1]))),
            // two hyperbolic planes, φ swapping them with a sign
            Just((IMat::from_row_slice(4, 4, &[0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0]), IMat::from_row_slice(4, 4, &[0, 0, -1, 0, 0, 0, 0, -1, 1, 0, 0, 0, 0, 1, 0, 0]))),
        ]
    }

    proptest! {
        #[test]
        fn decomposition_invariants((g, a) in isometries(), v in proptest::collection::vec(-4i64..=4, 4), w in proptest::collection::vec(-4i64..=4, 4)) {
            let d = g.nrows();
            let lat = Lattice::new(g, (0..d).map(|i| format!("e{i}")).collect()).unwrap();
            let phi = Automorphism::new(&lat, a).unwrap();
            let jd = JordanData::new(&lat, &phi, DEFAULT_TOL).unwrap();
            for (_, res) in jd.residuals() {
                prop_assert!(res < 1e-9);
            }
            let v = cx::from_ivec(&v[..d]);
            let w = cx::from_ivec(&w[..d]);
            let (l0, star) = jd.star_split(&v).unwrap();
            let back = &l0 + (CMat::identity(d, d) - &jd.sigma) * &star;
            prop_assert!(cx::vmax_abs(&(back - &v)) < 1e-10);
            for b in 0..jd.blocks.len() {
                let pb = jd.partner(b).unwrap();
                let lhs = jd.form(&jd.project(b, &v).unwrap(), &w);
                let rhs = jd.form(&jd.project(b, &v).unwrap(), &jd.project(pb, &w).unwrap());
                prop_assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }
}
