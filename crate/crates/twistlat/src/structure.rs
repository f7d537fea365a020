//! Scalar structure constants a_λ(ζ), b_λ, c_λ, B_{λ,μ}, C_{λ,μ} and the
//! τ-argument, plus an independent series evaluation of B.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cx::{self, from_ivec, r, two_pi_i, CMat, CVec, C64, I};
use crate::decomp::JordanData;
use crate::error::{Error, Result};
use crate::lattice::{random_vec, Lattice};
use crate::report::Check;
use crate::specfun::{self, EULER_GAMMA};

#[derive(Clone, Debug, Serialize)]
pub struct TwistConstants {
    pub b: C64,
    /// Coefficients of ζ^k.
    pub a_poly: Vec<C64>,
    pub c: C64,
    pub tau_arg: Vec<C64>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PairConstants {
    #[serde(rename = "B")]
    pub b: C64,
    #[serde(rename = "C")]
    pub c: C64,
}

pub fn b_lambda(jd: &JordanData, lam: &CVec) -> C64 {
    let l0 = jd.pi0(lam);
    (jd.form(&l0, &l0) - jd.form(lam, lam)) / 2.0
}

/// a_λ(ζ) = ((P⁻λ₀|λ) − |λ₀|²)/2 as ζ-coefficients.
pub fn a_lambda(jd: &JordanData, lam: &CVec) -> Vec<C64> {
    let l0 = jd.pi0(lam);
    let mut out: Vec<C64> = jd.p_coeffs(false, &l0).iter().map(|v| jd.form(v, lam) / 2.0).collect();
    out[0] -= jd.form(&l0, &l0) / 2.0;
    out
}

pub fn eval_poly(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(r(0.0), |acc, &ci| acc * z + ci)
}

/// c_λ = ((P⁻_{2πi}λ₀|λ) − |λ|²)/2.
pub fn c_lambda(jd: &JordanData, lam: &CVec) -> C64 {
    let l0 = jd.pi0(lam);
    (jd.form(&jd.apply_p(false, two_pi_i(), &l0), lam) - jd.form(lam, lam)) / 2.0
}

/// ((1−φ)/N)π₀λ = Σ_k (−1)^k (2πi)^{k+1} N^k λ₀/(k+1)!.
pub fn tau_argument(jd: &JordanData, lam: &CVec) -> CVec {
    let l0 = jd.pi0(lam);
    let mut acc = CVec::zeros(jd.rank());
    let mut v = l0;
    let mut coef = two_pi_i();
    for k in 0..jd.nilpotency_index.max(1) {
        acc += &v * coef;
        coef *= -two_pi_i() / (k + 2) as f64;
        v = &jd.nilp * v;
    }
    acc
}

pub fn twist_constants(jd: &JordanData, lam: &CVec) -> TwistConstants {
    TwistConstants {
        b: b_lambda(jd, lam),
        a_poly: a_lambda(jd, lam),
        c: c_lambda(jd, lam),
        tau_arg: tau_argument(jd, lam).iter().copied().collect(),
    }
}

/// Per-block derivatives Ψ^{(j)}(α₀′) + γδ_{j0}.
fn psi_derivs(jd: &JordanData) -> Result<Vec<Vec<C64>>> {
    let k = jd.nilpotency_index.max(1);
    jd.blocks
        .iter()
        .map(|blk| {
            let a = blk.alpha0_prime;
            if a.re <= 0.0 && a.im == 0.0 {
                return Err(Error::AtPole(format!("α₀′ = {a} on the nonpositive axis")));
            }
            (0..k)
                .map(|j| Ok(specfun::polygamma(j, a)? + if j == 0 { EULER_GAMMA } else { 0.0 }))
                .collect()
        })
        .collect()
}

/// (Ψ(S′+N)+γ)a
pub fn psi_operator(jd: &JordanData, a: &CVec) -> Result<CVec> {
    jd.nilpotent_calculus(&psi_derivs(jd)?, a)
}

/// L with B_{λ,μ} = exp(λᵀ L μ) for integer coordinates.
pub fn b_log_matrix(jd: &JordanData) -> Result<CMat> {
    let d = jd.rank();
    let derivs = psi_derivs(jd)?;
    let mut l = CMat::zeros(d, d);
    for i in 0..d {
        let mut e = CVec::zeros(d);
        e[i] = r(1.0);
        let w = jd.nilpotent_calculus(&derivs, &e)?;
        let gw = &jd.gram * w;
        for j in 0..d {
            l[(i, j)] = gw[j];
        }
    }
    Ok(l)
}

pub fn b_constant(jd: &JordanData, lam: &CVec, mu: &CVec) -> Result<C64> {
    Ok(jd.form(&psi_operator(jd, lam)?, mu).exp())
}

/// Σ_{m≥0} (m+s)^{−p}, explicit to `terms` with an Euler–Maclaurin tail.
fn power_sum(s: C64, p: i32, terms: usize) -> C64 {
    let mut acc = r(0.0);
    for m in 0..terms {
        acc += (m as f64 + s).powi(-p);
    }
    let x = terms as f64 + s;
    let pf = p as f64;
    acc + x.powi(1 - p) / (pf - 1.0) + x.powi(-p) * 0.5 + x.powi(-p - 1) * (pf / 12.0)
}

/// Σ_{m≥0} (1/(m+1) − 1/(m+s)), explicit to `terms` with an Euler–Maclaurin tail.
fn telescoped_sum(s: C64, terms: usize) -> C64 {
    let mut acc = r(0.0);
    for m in 0..terms {
        acc += 1.0 / (m as f64 + 1.0) - 1.0 / (m as f64 + s);
    }
    let mm = terms as f64;
    let x = mm + s;
    let f = 1.0 / (mm + 1.0) - 1.0 / x;
    let fp = -1.0 / ((mm + 1.0) * (mm + 1.0)) + 1.0 / (x * x);
    acc + (x / (mm + 1.0)).ln() + f * 0.5 - fp / 12.0
}

/// B from the defining series at coincident points, without polygamma.
pub fn b_oracle(jd: &JordanData, lam: &CVec, mu: &CVec, terms: usize) -> C64 {
    let k = jd.nilpotency_index.max(1);
    let mut expo = r(0.0);
    for blk in &jd.blocks {
        let s = blk.alpha0_prime;
        let mut v = &blk.projector * lam;
        for j in 0..k {
            let t = jd.form(&v, mu);
            if t.norm() > 0.0 {
                expo += if j == 0 {
                    t * telescoped_sum(s, terms)
                } else {
                    let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                    t * power_sum(s, j as i32 + 1, terms) * sign
                };
            }
            v = &jd.nilp * v;
        }
    }
    expo.exp()
}

/// f(N)a = −2 Σ_{j≥0} ζ(2j+2) N^{2j+1} a.
pub fn cot_series(jd: &JordanData, a: &CVec) -> Result<CVec> {
    let mut acc = CVec::zeros(jd.rank());
    let mut v = &jd.nilp * a;
    let mut j = 0;
    while 2 * j + 1 < jd.nilpotency_index.max(1) {
        acc += &v * (specfun::zeta(r((2 * j + 2) as f64))? * -2.0);
        v = &jd.nilp * (&jd.nilp * v);
        j += 1;
    }
    Ok(acc)
}

pub fn c_constant(jd: &JordanData, lat: &Lattice, lam: &[i64], mu: &[i64]) -> Result<C64> {
    let d = lat.rank();
    if lam.len() != d || mu.len() != d {
        return Err(Error::NotLatticeVector(format!("expected {d} coordinates")));
    }
    let parity = (lat.norm2(lam) * lat.norm2(mu)).rem_euclid(2);
    let (l, m) = (from_ivec(lam), from_ivec(mu));
    let l0 = jd.pi0(&l);
    let rest = jd.inv_one_minus_phi(&(&l - &l0));
    let expo = I * PI * jd.form(&l0, &m) + two_pi_i() * jd.form(&rest, &m) + jd.form(&cot_series(jd, &l0)?, &m);
    Ok(expo.exp() * if parity == 1 { -1.0 } else { 1.0 })
}

pub fn pair_constants(jd: &JordanData, lat: &Lattice, lam: &[i64], mu: &[i64]) -> Result<PairConstants> {
    Ok(PairConstants { b: b_constant(jd, &from_ivec(lam), &from_ivec(mu))?, c: c_constant(jd, lat, lam, mu)? })
}

/// Invariant battery: bimultiplicativity, oracle agreement, B–C compatibility,
/// C antisymmetry on even pairs, the c_λ chain and τ-argument routes.
pub fn structure_checks(jd: &JordanData, lat: &Lattice, seed: u64, trials: usize) -> Result<Vec<Check>> {
    let d = lat.rank();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let basis: Vec<Vec<i64>> = (0..d).map(|i| lat.basis(i)).collect();

    let mut m: f64 = 0.0;
    for a in &basis {
        for b in &basis {
            let (x, y) = (from_ivec(a), from_ivec(b));
            let closed = b_constant(jd, &x, &y)?;
            let oracle = b_oracle(jd, &x, &y, 10_000);
            m = m.max((closed - oracle).norm() / closed.norm());
        }
    }
    out.push(Check::new("B closed form vs coincident-point series", "B-constant", m, 1e-6));

    let (mut bimult, mut compat, mut anti, mut cchain, mut tau): (f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let lmat = b_log_matrix(jd)?;
    for _ in 0..trials {
        let (a, a2, b) = (random_vec(&mut rng, d, 3), random_vec(&mut rng, d, 3), random_vec(&mut rng, d, 3));
        let (x, x2, y) = (from_ivec(a.as_slice()), from_ivec(a2.as_slice()), from_ivec(b.as_slice()));
        let b1 = b_constant(jd, &(&x + &x2), &y)?;
        let b2 = b_constant(jd, &x, &y)? * b_constant(jd, &x2, &y)?;
        bimult = bimult.max(cx::rel_err(b1, b2));
        let viam = (x.transpose() * &lmat * &y)[(0, 0)].exp();
        bimult = bimult.max(cx::rel_err(viam, b_constant(jd, &x, &y)?));

        let (a, b) = (a.as_slice(), b.as_slice());
        let cab = c_constant(jd, lat, a, b)?;
        let sign_l = if (lat.norm2(a) * lat.norm2(b)).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        let sign_r = if lat.form(a, b).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        let rhs = b_constant(jd, &y, &x)? / b_constant(jd, &x, &y)? * sign_r;
        compat = compat.max(cx::rel_err(cab * sign_l, rhs));
        if lat.norm2(a) % 2 == 0 && lat.norm2(b) % 2 == 0 {
            anti = anti.max((cab * c_constant(jd, lat, b, a)? - 1.0).norm());
        }

        let ap = a_lambda(jd, &x);
        cchain = cchain.max((c_lambda(jd, &x) - (eval_poly(&ap, two_pi_i()) + b_lambda(jd, &x))).norm());

        // N·((1−φ)/N)λ₀ = (1−φ)λ₀
        let l0 = jd.pi0(&x);
        let t = tau_argument(jd, &x);
        let lhs = &jd.nilp * &t;
        let rhs = &l0 - &jd.phi * &l0;
        tau = tau.max(cx::vmax_abs(&(lhs - rhs)));
    }
    out.push(Check::new("B bimultiplicative", "B-constant", bimult, 1e-9));
    out.push(Check::new("C vs ratio of B", "C-constant", compat, 1e-9));
    out.push(Check::new("C antisymmetric on even pairs", "C-constant", anti, 1e-9));
    out.push(Check::new("c = a(2πi) + b", "c-lambda", cchain, 1e-12));
    out.push(Check::new("N·τ-argument = (1−φ)λ₀", "tau-lambda", tau, 1e-10));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use proptest::prelude::*;

    fn e(d: usize, i: usize) -> Vec<i64> {
        let mut v = vec![0; d];
        v[i] = 1;
        v
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn commutation_scalars_rank_four() {
        let p = presets::example_61();
        let jd = p.setup.jordan().unwrap();
        let lat = &p.lattice;
        let cc = |i, j| c_constant(&jd, lat, &e(4, i), &e(4, j)).unwrap();
        assert!(close(cc(0, 2), (I * PI / 6.0).exp(), 1e-10), "{}", cc(0, 2));
        assert!(close(cc(0, 3), r(-1.0), 1e-10));
        assert!(close(cc(1, 2), r(-1.0), 1e-10));
        assert!(close(cc(0, 1), r(1.0), 1e-10));
        assert!(close(cc(1, 3), r(1.0), 1e-10));
        assert!(close(cc(2, 3), r(1.0), 1e-10));
    }

    #[test]
    fn commutation_scalars_rank_three() {
        let p = presets::example_62();
        let jd = p.setup.jordan().unwrap();
        let lat = &p.lattice;
        let (a1, dl, l0) = (e(3, 0), e(3, 1), e(3, 2));
        assert!(close(c_constant(&jd, lat, &l0, &a1).unwrap(), (-I * PI / 3.0).exp(), 1e-10));
        assert!(close(c_constant(&jd, lat, &l0, &dl).unwrap(), r(-1.0), 1e-10));
        assert!(close(c_constant(&jd, lat, &a1, &dl).unwrap(), r(1.0), 1e-10));
    }

    #[test]
    fn unipotent_examples_have_trivial_b() {
        for p in [presets::example_61(), presets::example_62()] {
            let jd = p.setup.jordan().unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..20 {
                let v = from_ivec(random_vec(&mut rng, p.lattice.rank(), 4).as_slice());
                assert!(b_lambda(&jd, &v).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn b_lambda_minus_identity() {
        let lat = Lattice::new(nalgebra::DMatrix::from_row_slice(1, 1, &[2]), vec!["x".into()]).unwrap();
        let phi = crate::lattice::Automorphism::new(&lat, nalgebra::DMatrix::from_row_slice(1, 1, &[-1])).unwrap();
        let jd = JordanData::new(&lat, &phi, 1e-10).unwrap();
        assert!(close(b_lambda(&jd, &from_ivec(&[1])), r(-1.0), 1e-12));
        assert!(close(c_lambda(&jd, &from_ivec(&[1])), r(-1.0), 1e-12));
        assert!(cx::vmax_abs(&tau_argument(&jd, &from_ivec(&[1]))) < 1e-14);
        // α₀′ = 1/2 there: B_{x,x} = exp(2(Ψ(1/2)+γ)) = 1/16
        assert!(close(b_constant(&jd, &from_ivec(&[1]), &from_ivec(&[1])).unwrap(), r(1.0 / 16.0), 1e-12));
        assert!(close(b_oracle(&jd, &from_ivec(&[1]), &from_ivec(&[1]), 10_000), r(1.0 / 16.0), 1e-9));
        // C_{x,x} = 1 for any single vector
        assert!(close(c_constant(&jd, &lat, &[1], &[1]).unwrap(), r(1.0), 1e-12));
    }

    #[test]
    fn a_lambda_rank_three() {
        let p = presets::example_62();
        let jd = p.setup.jordan().unwrap();
        let a = a_lambda(&jd, &from_ivec(&[0, 0, 1]));
        // hand expansion: a(ζ) = ½·ζ²/3!·(N²Λ₀|Λ₀) with (N²Λ₀|Λ₀) = 1/(2π²)
        assert!(a[0].norm() < 1e-14 && a[1].norm() < 1e-14);
        assert!(close(a[2], r(1.0 / (24.0 * PI * PI)), 1e-14), "{a:?}");
        // constant term vanishes and matches ((λ₀|λ) − |λ₀|²)/2
        let v = from_ivec(&[2, -1, 3]);
        let l0 = jd.pi0(&v);
        assert!(close(a_lambda(&jd, &v)[0], (jd.form(&l0, &v) - jd.form(&l0, &l0)) / 2.0, 1e-13));
    }

    #[test]
    fn tau_argument_routes() {
        let p = presets::example_62();
        let jd = p.setup.jordan().unwrap();
        let v = from_ivec(&[0, 0, 1]);
        let t = tau_argument(&jd, &v);
        // (1 − e^{−2πiN})/N through the matrix exponential, with N invertible on
        // nothing: compare N·t against (1−φ)λ₀ and the leading term 2πiλ₀
        let lhs = &jd.nilp * &t;
        let rhs = &v - &jd.phi * &v;
        assert!(cx::vmax_abs(&(lhs - rhs)) < 1e-12);
        let n3 = &jd.nilp * &jd.nilp * &jd.nilp;
        assert!(cx::max_abs(&n3) < 1e-12);
        let direct = &v * two_pi_i() - &jd.nilp * &v * (two_pi_i() * two_pi_i() / 2.0)
            + &jd.nilp * &jd.nilp * &v * (two_pi_i().powu(3) / 6.0);
        assert!(cx::vmax_abs(&(t - direct)) < 1e-12);
    }

    #[test]
    fn identity_degeneration() {
        let p = presets::hyperbolic_identity();
        let jd = p.setup.jordan().unwrap();
        let lat = &p.lattice;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let a = random_vec(&mut rng, 2, 4);
            let b = random_vec(&mut rng, 2, 4);
            let (x, y) = (from_ivec(a.as_slice()), from_ivec(b.as_slice()));
            assert!(close(b_constant(&jd, &x, &y).unwrap(), r(1.0), 1e-12));
            assert!(close(b_oracle(&jd, &x, &y, 1000), r(1.0), 1e-12));
            let expect = if (lat.form(a.as_slice(), b.as_slice()) + lat.norm2(a.as_slice()) * lat.norm2(b.as_slice())) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            let cval = c_constant(&jd, lat, a.as_slice(), b.as_slice()).unwrap();
            assert!(close(cval, r(expect), 1e-12), "{a:?} {b:?} {cval}");
            assert!(a_lambda(&jd, &x).iter().all(|z| z.norm() < 1e-15));
            assert!(close(c_lambda(&jd, &x), b_lambda(&jd, &x), 1e-15));
            assert!(cx::vmax_abs(&(tau_argument(&jd, &x) - &x * two_pi_i())) < 1e-12);
        }
    }

    #[test]
    fn battery_passes_on_examples() {
        for p in [presets::example_61(), presets::example_62(), presets::hyperbolic_identity()] {
            let jd = p.setup.jordan().unwrap();
            for chk in structure_checks(&jd, &p.lattice, 5, 100).unwrap() {
                assert!(chk.pass, "{}: {chk:?}", p.setup.name);
            }
        }
    }

    #[test]
    fn oracle_on_finite_order_twist() {
        // order-3 rotation of A2: α₀′ ∈ {1/3, 2/3}
        let lat = Lattice::new(nalgebra::DMatrix::from_row_slice(2, 2, &[2, -1, -1, 2]), vec!["a".into(), "b".into()]).unwrap();
        let phi = crate::lattice::Automorphism::new(&lat, nalgebra::DMatrix::from_row_slice(2, 2, &[0, -1, 1, -1])).unwrap();
        let jd = JordanData::new(&lat, &phi, 1e-10).unwrap();
        for (a, b) in [([1, 0], [1, 0]), ([1, 0], [0, 1]), ([0, 1], [1, 0])] {
            let (x, y) = (from_ivec(&a), from_ivec(&b));
            let closed = b_constant(&jd, &x, &y).unwrap();
            let oracle = b_oracle(&jd, &x, &y, 10_000);
            assert!((closed - oracle).norm() < 1e-9 * closed.norm());
        }
        for chk in structure_checks(&jd, &lat, 1, 50).unwrap() {
            assert!(chk.pass, "{chk:?}");
        }
    }

    proptest! {
        #[test]
        fn c_chain_holds(a in prop::collection::vec(-5i64..5, 3)) {
            let p = presets::example_62();
            let jd = p.setup.jordan().unwrap();
            let x = from_ivec(&a);
            let lhs = c_lambda(&jd, &x);
            let rhs = eval_poly(&a_lambda(&jd, &x), two_pi_i()) + b_lambda(&jd, &x);
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn b_c_compatible(a in prop::collection::vec(-4i64..4, 4), b in prop::collection::vec(-4i64..4, 4)) {
            let p = presets::example_61();
            let jd = p.setup.jordan().unwrap();
            let lat = &p.lattice;
            let (x, y) = (from_ivec(&a), from_ivec(&b));
            let sl = if (lat.norm2(&a) * lat.norm2(&b)).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
            let sr = if lat.form(&a, &b).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
            let lhs = c_constant(&jd, lat, &a, &b).unwrap() * sl;
            let rhs = b_constant(&jd, &y, &x).unwrap() / b_constant(&jd, &x, &y).unwrap() * sr;
            prop_assert!(cx::rel_err(lhs, rhs) < 1e-9);
        }
    }
}
