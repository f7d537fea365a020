//! The group of elements c·U_λ·e^h, its τ- and g-elements, and the quotient
//! by the central subgroup {g_λ}.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cx::{self, from_ivec, r, CMat, CVec, C64};
use crate::decomp::JordanData;
use crate::error::{Error, Result};
use crate::input::Setup;
use crate::intlin::{self, IMat};
use crate::lattice::{self, random_vec, Automorphism, Cocycle, EtaMap, IVec, Lattice};
use crate::report::Check;
use crate::structure;

const WINDOW_CENTRE: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Debug)]
pub struct GroupElement {
    pub c: C64,
    pub lam: IVec,
    /// Exponent in h₀.
    pub h: CVec,
}

/// Reduced representative of a coset modulo {g_λ}.
#[derive(Clone, Debug)]
pub struct GNormalForm(pub GroupElement);

pub struct GroupCtx {
    pub lattice: Lattice,
    pub phi: Automorphism,
    pub jd: JordanData,
    pub eps: Cocycle,
    pub eta: EtaMap,
    /// B_{λ,μ} = exp(λᵀ L μ)
    pub b_log: CMat,
    snf: (IMat, IMat, IMat),
    /// Z-basis of ker(1−φ) as columns, and its pseudo-inverse.
    kernel: CMat,
    kernel_pinv: CMat,
    kernel_int: Vec<IVec>,
}

impl GroupCtx {
    pub fn new(setup: &Setup, jd: JordanData, seed: u64) -> Result<GroupCtx> {
        let d = setup.lattice.rank();
        let b_log = structure::b_log_matrix(&jd)?;
        let one_minus_phi = IMat::identity(d, d) - &setup.phi.mat;
        let snf = intlin::smith(&one_minus_phi)?;
        let kernel_int: Vec<IVec> = (0..d)
            .filter(|&i| snf.1[(i, i)] == 0)
            .map(|i| snf.2.column(i).iter().copied().collect())
            .collect();
        let kernel = CMat::from_fn(d, kernel_int.len(), |i, j| r(kernel_int[j][i] as f64));
        let kernel_pinv = if kernel_int.is_empty() {
            CMat::zeros(0, d)
        } else {
            kernel.clone().pseudo_inverse(1e-12).map_err(|e| Error::SingularRestriction(e.to_string()))?
        };
        Ok(GroupCtx {
            lattice: setup.lattice.clone(),
            phi: setup.phi.clone(),
            eta: setup.eta(seed)?,
            eps: setup.eps.clone(),
            jd,
            b_log,
            snf,
            kernel,
            kernel_pinv,
            kernel_int,
        })
    }

    pub fn rank(&self) -> usize {
        self.lattice.rank()
    }

    pub fn b(&self, lam: &[i64], mu: &[i64]) -> C64 {
        let (x, y) = (from_ivec(lam), from_ivec(mu));
        (x.transpose() * &self.b_log * y)[(0, 0)].exp()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { c: r(1.0), lam: vec![0; self.rank()], h: CVec::zeros(self.rank()) }
    }

    pub fn scalar(&self, c: C64) -> GroupElement {
        GroupElement { c, ..self.identity() }
    }

    pub fn u(&self, lam: &[i64]) -> GroupElement {
        GroupElement { lam: lam.to_vec(), ..self.identity() }
    }

    /// e^h; h is projected to h₀.
    pub fn exp_h(&self, h: &CVec) -> GroupElement {
        GroupElement { h: self.jd.pi0(h), ..self.identity() }
    }

    pub fn multiply(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let nh2 = &self.jd.nilp * &y.h * r(0.5);
        let shift = self.jd.form(&x.h, &(from_ivec(&y.lam) - nh2));
        let eps = self.eps.eval(&x.lam, &y.lam) as f64;
        GroupElement {
            c: x.c * y.c * shift.exp() * eps / self.b(&x.lam, &y.lam),
            lam: lattice::add(&x.lam, &y.lam),
            h: &x.h + &y.h,
        }
    }

    pub fn inverse(&self, x: &GroupElement) -> GroupElement {
        let eps = self.eps.eval(&x.lam, &x.lam) as f64;
        let e = self.jd.form(&x.h, &from_ivec(&x.lam)).exp();
        GroupElement { c: eps * e / (x.c * self.b(&x.lam, &x.lam)), lam: lattice::neg(&x.lam), h: -&x.h }
    }

    pub fn product(&self, xs: &[GroupElement]) -> GroupElement {
        xs.iter().fold(self.identity(), |acc, x| self.multiply(&acc, x))
    }

    pub fn commutator(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        self.product(&[x.clone(), y.clone(), self.inverse(x), self.inverse(y)])
    }

    /// τ_λ realized as e^h with h = ((1−φ)/N)π₀λ.
    pub fn tau_element(&self, lam: &[i64]) -> GroupElement {
        GroupElement { h: structure::tau_argument(&self.jd, &from_ivec(lam)), ..self.identity() }
    }

    /// g_λ = η(λ) e^{2πi c_λ} U_{φλ}⁻¹ U_λ τ_λ.
    pub fn g_element(&self, lam: &[i64]) -> GroupElement {
        let c = structure::c_lambda(&self.jd, &from_ivec(lam));
        let pre = self.eta.eval(lam) as f64 * (cx::two_pi_i() * c).exp();
        let phl = self.phi.apply(lam);
        self.product(&[self.scalar(pre), self.inverse(&self.u(&phl)), self.u(lam), self.tau_element(lam)])
    }

    /// Scalar shift of h′_{(m+N)} under conjugation by x: δ_{m,0}(h′|Nh − λ).
    /// Zero modes exist only on h₀, so h′ is projected there first.
    pub fn adjoint_on_mode(&self, x: &GroupElement, a: &CVec, m: C64) -> C64 {
        if m != r(0.0) {
            return r(0.0);
        }
        self.jd.form(&self.jd.pi0(a), &(&self.jd.nilp * &x.h - from_ivec(&x.lam)))
    }

    /// Multiplies by g_μ^{±1} until λ is the Smith-form residue of its coset
    /// and the ker(1−φ) part of h has imaginary coordinates within π of
    /// `WINDOW_CENTRE`.
    pub fn reduce_mod_nphi(&self, x: &GroupElement) -> GNormalForm {
        let d = self.rank();
        let (u, dmat, v) = &self.snf;
        let y = lattice::mat_vec(u, &x.lam);
        let mut q = vec![0i64; d];
        for i in 0..d {
            let di = dmat[(i, i)];
            if di != 0 {
                q[i] = y[i].div_euclid(di);
            }
        }
        let mu = lattice::mat_vec(v, &q);
        let mut out = self.multiply(x, &self.inverse(&self.g_element(&mu)));
        if !self.kernel_int.is_empty() {
            let t = &self.kernel_pinv * &out.h;
            let mut kappa = vec![0i64; d];
            for (j, kv) in self.kernel_int.iter().enumerate() {
                // window centred off the rational points that integer data hits
                let n = ((t[j].im - WINDOW_CENTRE) / std::f64::consts::TAU).round() as i64;
                for i in 0..d {
                    kappa[i] += n * kv[i];
                }
            }
            if kappa.iter().any(|&k| k != 0) {
                out = self.multiply(&out, &self.inverse(&self.g_element(&kappa)));
            }
        }
        GNormalForm(out)
    }

    /// Spanning columns of ker(1−φ) ∩ Q.
    pub fn fixed_lattice(&self) -> &CMat {
        &self.kernel
    }

    pub fn random_element(&self, rng: &mut ChaCha8Rng) -> GroupElement {
        let d = self.rank();
        let lam = random_vec(rng, d, 2);
        let mu = random_vec(rng, d, 2);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let c = C64::from_polar(rng.gen_range(0.5..2.0), phase);
        self.product(&[self.scalar(c), self.u(&lam), self.tau_element(&mu)])
    }
}

/// Distance between two elements; infinite when the λ-coordinates differ.
pub fn distance(x: &GroupElement, y: &GroupElement) -> f64 {
    if x.lam != y.lam {
        return f64::INFINITY;
    }
    cx::rel_err(x.c, y.c).max(cx::vmax_abs(&(&x.h - &y.h)))
}

/// Distance of x from a pure scalar with λ = 0 and h = 0.
pub fn scalar_part_error(x: &GroupElement) -> f64 {
    if x.lam.iter().any(|&k| k != 0) {
        return f64::INFINITY;
    }
    cx::vmax_abs(&x.h)
}

/// (φ + φ⁻¹ − 2)/N on h₀ through the series Σ_{k≥1} 2(2πi)^{2k} N^{2k−1}/(2k)!.
fn tau_pair_operator(jd: &JordanData, a: &CVec) -> CVec {
    let mut acc = CVec::zeros(jd.rank());
    let mut v = &jd.nilp * a;
    let mut k = 1;
    while 2 * k - 1 < jd.nilpotency_index.max(1) {
        acc += &v * (cx::two_pi_i().powu(2 * k as u32) * 2.0 / cx::factorial(2 * k));
        v = &jd.nilp * (&jd.nilp * v);
        k += 1;
    }
    acc
}

/// Full invariant battery.
pub fn group_checks(ctx: &GroupCtx, seed: u64, scale: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = ctx.rank();
    let one = ctx.identity();
    let mut out = Vec::new();

    let mut m: f64 = 0.0;
    for _ in 0..5 * scale {
        let (x, y, z) = (ctx.random_element(&mut rng), ctx.random_element(&mut rng), ctx.random_element(&mut rng));
        let lhs = ctx.multiply(&ctx.multiply(&x, &y), &z);
        let rhs = ctx.multiply(&x, &ctx.multiply(&y, &z));
        m = m.max(distance(&lhs, &rhs));
    }
    out.push(Check::new("associativity", "group-multiplication", m, 1e-10));

    let mut m: f64 = 0.0;
    for _ in 0..scale {
        let x = ctx.random_element(&mut rng);
        m = m.max(distance(&ctx.multiply(&x, &one), &x));
        m = m.max(distance(&ctx.multiply(&one, &x), &x));
        m = m.max(distance(&ctx.multiply(&x, &ctx.inverse(&x)), &one));
        m = m.max(distance(&ctx.multiply(&ctx.inverse(&x), &x), &one));
    }
    out.push(Check::new("neutral and inverse laws", "group-inverse", m, 1e-12));

    let mut m: f64 = 0.0;
    for _ in 0..scale {
        let (a, b) = (random_vec(&mut rng, d, 3), random_vec(&mut rng, d, 3));
        let lhs = ctx.multiply(&ctx.g_element(&a), &ctx.g_element(&b));
        m = m.max(distance(&lhs, &ctx.g_element(&lattice::add(&a, &b))));
    }
    out.push(Check::new("g_λ g_μ = g_{λ+μ}", "N-phi-subgroup", m, 1e-9));

    let mut m: f64 = 0.0;
    for _ in 0..scale {
        let g = ctx.g_element(&random_vec(&mut rng, d, 3));
        let y = match rng.gen_range(0..4) {
            0 => ctx.u(&random_vec(&mut rng, d, 3)),
            1 => ctx.tau_element(&random_vec(&mut rng, d, 3)),
            2 => ctx.scalar(C64::from_polar(1.3, rng.gen_range(0.0..6.0))),
            _ => ctx.exp_h(&CVec::from_fn(d, |_, _| cx::c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))),
        };
        m = m.max(distance(&ctx.commutator(&g, &y), &one));
    }
    out.push(Check::new("g_λ central", "N-phi-central", m, 1e-9));

    let mut m: f64 = 0.0;
    let mut lam_ok = true;
    for _ in 0..scale {
        let x = ctx.random_element(&mut rng);
        let g = ctx.g_element(&random_vec(&mut rng, d, 3));
        let a = ctx.reduce_mod_nphi(&x).0;
        let b = ctx.reduce_mod_nphi(&ctx.multiply(&x, &g)).0;
        lam_ok &= a.lam == b.lam;
        m = m.max(distance(&a, &b));
        // idempotent
        m = m.max(distance(&ctx.reduce_mod_nphi(&a).0, &a));
    }
    out.push(Check::flag("quotient representative exact in λ", "quotient", lam_ok));
    out.push(Check::new("quotient soundness", "quotient", m, 1e-9));

    let mut m: f64 = 0.0;
    for _ in 0..scale {
        let (a, b) = (random_vec(&mut rng, d, 3), random_vec(&mut rng, d, 3));
        let (ta, tb) = (ctx.tau_element(&a), ctx.tau_element(&b));
        let prod = ctx.multiply(&ta, &tb);
        let tab = ctx.tau_element(&lattice::add(&a, &b));
        let l0 = ctx.jd.pi0(&from_ivec(&a));
        let expect = (ctx.jd.form(&tau_pair_operator(&ctx.jd, &l0), &from_ivec(&b)) / 2.0).exp();
        m = m.max(distance(&prod, &GroupElement { c: expect, ..tab }));
        // τ U τ⁻¹ = exp(((1−φ)/N)λ₀ | μ) U
        let u = ctx.u(&b);
        let conj = ctx.product(&[ta.clone(), u.clone(), ctx.inverse(&ta)]);
        let phase = ctx.jd.form(&structure::tau_argument(&ctx.jd, &from_ivec(&a)), &from_ivec(&b)).exp();
        m = m.max(distance(&conj, &GroupElement { c: phase, ..u }));
        // commutators of τ-elements are scalars
        m = m.max(scalar_part_error(&ctx.commutator(&ta, &tb)));
    }
    out.push(Check::new("τ relations", "tau-relations", m, 1e-9));

    let mut m: f64 = 0.0;
    for _ in 0..scale {
        let (x, y) = (ctx.random_element(&mut rng), ctx.random_element(&mut rng));
        let a = CVec::from_fn(d, |_, _| cx::c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let sxy = ctx.adjoint_on_mode(&ctx.multiply(&x, &y), &a, r(0.0));
        m = m.max((sxy - ctx.adjoint_on_mode(&x, &a, r(0.0)) - ctx.adjoint_on_mode(&y, &a, r(0.0))).norm());
        let g = ctx.g_element(&random_vec(&mut rng, d, 3));
        m = m.max(ctx.adjoint_on_mode(&g, &a, r(0.0)).norm());
    }
    out.push(Check::new("adjoint action additive, trivial on g_λ", "conjugation-action", m, 1e-10));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use std::f64::consts::PI;

    fn ctx(p: &presets::Preset) -> GroupCtx {
        GroupCtx::new(&p.setup, p.setup.jordan().unwrap(), 1).unwrap()
    }

    fn e(d: usize, i: usize) -> IVec {
        let mut v = vec![0; d];
        v[i] = 1;
        v
    }

    #[test]
    fn commutation_in_group() {
        let p = presets::example_61();
        let g = ctx(&p);
        let (u1, u3) = (g.u(&e(4, 0)), g.u(&e(4, 2)));
        let a = g.multiply(&u1, &u3);
        let b = g.multiply(&u3, &u1);
        assert_eq!(a.lam, b.lam);
        assert!(((a.c / b.c) - (cx::I * PI / 6.0).exp()).norm() < 1e-12);
        let w = g.commutator(&u1, &u3);
        assert!(distance(&w, &g.scalar((cx::I * PI / 6.0).exp())) < 1e-12);
        // U_{λ₁} is not central
        assert!(distance(&w, &g.identity()) > 0.1);
    }

    #[test]
    fn heisenberg_commutator() {
        let p = presets::example_62();
        let g = ctx(&p);
        let h = g.jd.pi0(&CVec::from_vec(vec![r(0.3), r(-0.2), r(0.5)]));
        let h2 = g.jd.pi0(&CVec::from_vec(vec![cx::c(0.1, 0.4), r(0.7), r(-1.1)]));
        let w = g.commutator(&g.exp_h(&h), &g.exp_h(&h2));
        let expect = g.jd.form(&(&g.jd.nilp * &h), &h2).exp();
        assert!(distance(&w, &g.scalar(expect)) < 1e-12);
        // abelian when Nh = 0
        let k = CVec::from_vec(vec![r(0.0), r(1.0), r(0.0)]);
        assert!(cx::vmax_abs(&(&g.jd.nilp * &k)) < 1e-12);
        let inv = g.inverse(&g.exp_h(&k));
        assert!(distance(&inv, &g.exp_h(&-k)) < 1e-12);
    }

    #[test]
    fn inverse_of_generator() {
        let p = presets::example_61();
        let g = ctx(&p);
        let x = g.u(&e(4, 0));
        assert!(distance(&g.multiply(&x, &g.inverse(&x)), &g.identity()) < 1e-12);
        assert!(distance(&g.inverse(&g.identity()), &g.identity()) == 0.0);
        assert!(distance(&g.tau_element(&[0, 0, 0, 0]), &g.identity()) == 0.0);
    }

    #[test]
    fn g_of_fixed_vector_is_trivial() {
        let p = presets::example_61();
        let g = ctx(&p);
        let x = g.g_element(&e(4, 1));
        // φλ₂ = λ₂ and λ₂ ⟂ everything moved by N: g reduces to a scalar times e^{2πiλ₂}
        assert!(x.lam.iter().all(|&k| k == 0));
        assert!(g.adjoint_on_mode(&x, &CVec::from_element(4, r(1.0)), r(0.0)).norm() < 1e-12);
    }

    #[test]
    fn identity_twist_g_elements() {
        let p = presets::hyperbolic_identity();
        let g = ctx(&p);
        for v in [[1i64, 0], [0, 1], [1, 1], [2, -3]] {
            let x = g.g_element(&v);
            // U_λ⁻¹U_λ τ_λ = scalar · e^{2πiλ}; the scalar is e^{2πi b_λ} = 1
            assert!(x.lam.iter().all(|&k| k == 0));
            assert!((x.c - r(1.0)).norm() < 1e-12, "{v:?}: {}", x.c);
            assert!(cx::vmax_abs(&(&x.h - from_ivec(&v) * cx::two_pi_i())) < 1e-12);
        }
    }

    #[test]
    fn adjoint_shift_example() {
        let p = presets::example_61();
        let g = ctx(&p);
        let s = g.adjoint_on_mode(&g.u(&e(4, 0)), &from_ivec(&e(4, 3)), r(0.0));
        assert!((s - r(-1.0)).norm() < 1e-14);
        assert_eq!(g.adjoint_on_mode(&g.u(&e(4, 0)), &from_ivec(&e(4, 3)), r(1.5)), r(0.0));
    }

    #[test]
    fn reduction_examples() {
        for p in [presets::example_61(), presets::example_62()] {
            let g = ctx(&p);
            let one = g.reduce_mod_nphi(&g.identity()).0;
            for v in [e(p.lattice.rank(), 0), e(p.lattice.rank(), 1), vec![1; p.lattice.rank()]] {
                let r = g.reduce_mod_nphi(&g.g_element(&v)).0;
                assert!(distance(&r, &one) < 1e-9, "{v:?}");
            }
        }
    }

    #[test]
    fn closure_needs_c_without_extra_factor() {
        // with c′ = 2πi·a(2πi) + b in place of c = a(2πi) + b, g_λ g_μ = g_{λ+μ} fails
        let p = presets::example_62();
        let g = ctx(&p);
        let alt = |v: &[i64]| {
            let x = from_ivec(v);
            let c = cx::two_pi_i() * structure::eval_poly(&structure::a_lambda(&g.jd, &x), cx::two_pi_i())
                + structure::b_lambda(&g.jd, &x);
            let pre = g.eta.eval(v) as f64 * (cx::two_pi_i() * c).exp();
            let phl = g.phi.apply(v);
            g.product(&[g.scalar(pre), g.inverse(&g.u(&phl)), g.u(v), g.tau_element(v)])
        };
        let (a, b) = ([0, 0, 1], [0, 0, 1]);
        let good = distance(&g.multiply(&g.g_element(&a), &g.g_element(&b)), &g.g_element(&[0, 0, 2]));
        let bad = distance(&g.multiply(&alt(&a), &alt(&b)), &alt(&[0, 0, 2]));
        assert!(good < 1e-10);
        assert!(bad > 1e-3, "{bad}");
    }

    #[test]
    fn batteries_pass() {
        for p in [presets::example_61(), presets::example_62(), presets::hyperbolic_identity()] {
            let g = ctx(&p);
            for chk in group_checks(&g, 9, 40) {
                assert!(chk.pass, "{}: {chk:?}", p.setup.name);
            }
        }
    }
}
