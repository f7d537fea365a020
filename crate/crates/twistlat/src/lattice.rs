//! Integral lattices, isometries, the sign cocycle and the compatibility map η.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::intlin::{self, IMat};

pub type IVec = Vec<i64>;

#[derive(Clone, Debug)]
pub struct Lattice {
    pub gram: IMat,
    pub labels: Vec<String>,
}

impl Lattice {
    pub fn new(gram: IMat, labels: Vec<String>) -> Result<Self> {
        let d = gram.nrows();
        if d == 0 || gram.ncols() != d {
            return Err(Error::BadInput("gram matrix must be square and nonempty".into()));
        }
        if gram.transpose() != gram {
            return Err(Error::BadInput("gram matrix is not symmetric".into()));
        }
        if intlin::det(&gram)? == 0 {
            return Err(Error::BadInput("gram matrix is degenerate".into()));
        }
        if labels.len() != d {
            return Err(Error::BadInput(format!("expected {d} labels, got {}", labels.len())));
        }
        Ok(Lattice { gram, labels })
    }

    pub fn rank(&self) -> usize {
        self.gram.nrows()
    }

    pub fn form(&self, a: &[i64], b: &[i64]) -> i64 {
        let d = self.rank();
        let mut s = 0;
        for i in 0..d {
            if a[i] == 0 {
                continue;
            }
            for j in 0..d {
                s += a[i] * self.gram[(i, j)] * b[j];
            }
        }
        s
    }

    pub fn norm2(&self, a: &[i64]) -> i64 {
        self.form(a, a)
    }

    pub fn basis(&self, i: usize) -> IVec {
        let mut v = vec![0; self.rank()];
        v[i] = 1;
        v
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }
}

/// Integer matrix acting on coordinate columns.
#[derive(Clone, Debug)]
pub struct Automorphism {
    pub mat: IMat,
    pub inv: IMat,
}

impl Automorphism {
    pub fn new(lat: &Lattice, mat: IMat) -> Result<Self> {
        let d = lat.rank();
        if mat.shape() != (d, d) {
            return Err(Error::BadInput("phi has the wrong shape".into()));
        }
        let det = intlin::det(&mat)?;
        if det == 0 {
            return Err(Error::NotInvertible(0));
        }
        if det.abs() != 1 {
            return Err(Error::BadInput(format!("phi has determinant {det}, not ±1")));
        }
        if mat.transpose() * &lat.gram * &mat != lat.gram {
            return Err(Error::BadInput("phi does not preserve the form".into()));
        }
        let inv = intlin::inverse_unimodular(&mat)?;
        Ok(Automorphism { mat, inv })
    }

    pub fn apply(&self, v: &[i64]) -> IVec {
        mat_vec(&self.mat, v)
    }

    pub fn apply_inv(&self, v: &[i64]) -> IVec {
        mat_vec(&self.inv, v)
    }
}

pub fn mat_vec(m: &IMat, v: &[i64]) -> IVec {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

pub fn add(a: &[i64], b: &[i64]) -> IVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn neg(a: &[i64]) -> IVec {
    a.iter().map(|x| -x).collect()
}

fn parity_sign(k: i64) -> i8 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Values of ε on ordered basis pairs, extended bimultiplicatively.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cocycle {
    pub table: Vec<Vec<i8>>,
}

impl Cocycle {
    /// Upper-triangular normalization: 1 above the diagonal, forced values elsewhere.
    pub fn build(lat: &Lattice) -> Cocycle {
        let d = lat.rank();
        let g = &lat.gram;
        let mut table = vec![vec![1i8; d]; d];
        for i in 0..d {
            for j in 0..d {
                table[i][j] = if i < j {
                    1
                } else if i > j {
                    parity_sign(g[(i, j)] + g[(i, i)] * g[(j, j)])
                } else {
                    let n = g[(i, i)];
                    parity_sign(n * (n + 1) / 2)
                };
            }
        }
        Cocycle { table }
    }

    /// Table given as the set of basis pairs with value −1.
    pub fn from_minus_pairs(d: usize, pairs: &[(usize, usize)]) -> Cocycle {
        let mut table = vec![vec![1i8; d]; d];
        for &(i, j) in pairs {
            table[i][j] = -1;
        }
        Cocycle { table }
    }

    pub fn eval(&self, a: &[i64], b: &[i64]) -> i8 {
        let mut odd = 0i64;
        for (i, &x) in a.iter().enumerate() {
            if x.rem_euclid(2) == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if self.table[i][j] < 0 && y.rem_euclid(2) == 1 {
                    odd += 1;
                }
            }
        }
        parity_sign(odd)
    }
}

#[derive(Clone, Debug, Default)]
pub struct EpsilonReport {
    pub trials: usize,
    pub failures: Vec<String>,
}

impl EpsilonReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn random_vec(rng: &mut ChaCha8Rng, d: usize, r: i64) -> IVec {
    (0..d).map(|_| rng.gen_range(-r..=r)).collect()
}

pub fn verify_epsilon(c: &Cocycle, lat: &Lattice, trials: usize, seed: u64) -> EpsilonReport {
    let d = lat.rank();
    let mut rep = EpsilonReport { trials, failures: Vec::new() };
    let check = |a: &IVec, b: &IVec, rep: &mut EpsilonReport| {
        let na = lat.norm2(a);
        let nb = lat.norm2(b);
        if c.eval(a, a) != parity_sign(na * (na + 1) / 2) {
            rep.failures.push(format!("diagonal at {a:?}"));
        }
        if c.eval(a, b) * c.eval(b, a) != parity_sign(lat.form(a, b) + na * nb) {
            rep.failures.push(format!("skew relation at ({a:?}, {b:?})"));
        }
    };
    for i in 0..d {
        for j in 0..d {
            check(&lat.basis(i), &lat.basis(j), &mut rep);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let a = random_vec(&mut rng, d, 5);
        let b = random_vec(&mut rng, d, 5);
        check(&a, &b, &mut rep);
    }
    rep
}

/// η: Q → {±1}, determined by its basis values through
/// η(λ+μ) = η(λ)η(μ)ε(λ,μ)ε(φλ,φμ).
#[derive(Clone, Debug)]
pub struct EtaMap {
    pub basis: Vec<i8>,
    beta: Vec<Vec<i8>>,
}

impl EtaMap {
    fn with_basis(basis: Vec<i8>, lat: &Lattice, phi: &Automorphism, eps: &Cocycle) -> EtaMap {
        let d = lat.rank();
        let beta = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let (ei, ej) = (lat.basis(i), lat.basis(j));
                        eps.eval(&ei, &ej) * eps.eval(&phi.apply(&ei), &phi.apply(&ej))
                    })
                    .collect()
            })
            .collect();
        EtaMap { basis, beta }
    }

    /// η with prescribed basis values, or None if these violate the relation.
    pub fn from_basis(basis: Vec<i8>, lat: &Lattice, phi: &Automorphism, eps: &Cocycle, seed: u64) -> Option<EtaMap> {
        let e = EtaMap::with_basis(basis, lat, phi, eps);
        (e.check(lat, phi, eps, 200, seed) == 0).then_some(e)
    }

    pub fn eval(&self, v: &[i64]) -> i8 {
        let d = v.len();
        let mut odd = 0i64;
        for i in 0..d {
            if self.basis[i] < 0 {
                odd += v[i];
            }
            if self.beta[i][i] < 0 {
                odd += v[i] * (v[i] - 1) / 2;
            }
            for j in i + 1..d {
                if self.beta[i][j] < 0 {
                    odd += v[i] * v[j];
                }
            }
        }
        parity_sign(odd)
    }

    /// Exact check of the defining relation on random pairs; returns the failures.
    pub fn check(
        &self,
        lat: &Lattice,
        phi: &Automorphism,
        eps: &Cocycle,
        trials: usize,
        seed: u64,
    ) -> usize {
        let d = lat.rank();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bad = 0;
        for _ in 0..trials {
            let a = random_vec(&mut rng, d, 5);
            let b = random_vec(&mut rng, d, 5);
            let lhs = self.eval(&a) * self.eval(&b) * eps.eval(&a, &b);
            let rhs = self.eval(&add(&a, &b)) * eps.eval(&phi.apply(&a), &phi.apply(&b));
            if lhs != rhs {
                bad += 1;
            }
        }
        bad
    }
}

pub fn build_eta(lat: &Lattice, phi: &Automorphism, eps: &Cocycle, seed: u64) -> Result<EtaMap> {
    let d = lat.rank();
    let first = EtaMap::with_basis(vec![1; d], lat, phi, eps);
    if first.check(lat, phi, eps, 200, seed) == 0 {
        return Ok(first);
    }
    if d < 20 {
        for mask in 1u32..(1 << d) {
            let basis = (0..d).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
            let cand = EtaMap::with_basis(basis, lat, phi, eps);
            if cand.check(lat, phi, eps, 200, seed) == 0 {
                return Ok(cand);
            }
        }
    }
    Err(Error::EtaInconsistent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use proptest::prelude::*;

    #[test]
    fn rank_one_diagonal() {
        let lat = Lattice::new(IMat::from_element(1, 1, 2), vec!["e".into()]).unwrap();
        let c = Cocycle::build(&lat);
        assert_eq!(c.eval(&[1], &[1]), -1);
        assert_eq!(c.eval(&[0], &[1]), 1);
        let ones = Cocycle::from_minus_pairs(1, &[]);
        let rep = verify_epsilon(&ones, &lat, 10, 1);
        assert!(!rep.pass());
        assert!(rep.failures[0].contains("diagonal"));
    }

    #[test]
    fn example_tables_pass() {
        for p in [presets::example_61(), presets::example_62()] {
            let rep = verify_epsilon(&p.shipped_cocycle(), &p.lattice, 300, 7);
            assert!(rep.pass(), "{:?}", rep.failures);
            let built = Cocycle::build(&p.lattice);
            assert!(verify_epsilon(&built, &p.lattice, 300, 7).pass());
        }
    }

    #[test]
    fn example_61_table_values() {
        let p = presets::example_61();
        let c = p.shipped_cocycle();
        let e = |i: usize| p.lattice.basis(i);
        assert_eq!(c.eval(&e(3), &e(0)), -1);
        assert_eq!(c.eval(&e(2), &e(1)), -1);
        assert_eq!(c.eval(&e(0), &e(3)), 1);
    }

    #[test]
    fn eta_on_examples() {
        for p in [presets::example_61(), presets::example_62()] {
            let c = p.shipped_cocycle();
            let eta = build_eta(&p.lattice, &p.phi, &c, 3).unwrap();
            assert_eq!(eta.basis, vec![1; p.lattice.rank()]);
            assert_eq!(eta.check(&p.lattice, &p.phi, &c, 200, 11), 0);
        }
        // rank 4: ε is φ-invariant on basis pairs, so η ≡ 1 on the whole lattice
        let p = presets::example_61();
        let eta = build_eta(&p.lattice, &p.phi, &p.shipped_cocycle(), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let v = random_vec(&mut rng, 4, 5);
            assert_eq!(eta.eval(&v), 1);
        }
        // rank 3: ε(φα₁,φΛ₀) = −ε(α₁,Λ₀), so η(α₁+Λ₀) = −1 although η = 1 on the basis
        let p = presets::example_62();
        let c = p.shipped_cocycle();
        let (a1, l0) = (p.lattice.basis(0), p.lattice.basis(2));
        assert_eq!(c.eval(&a1, &l0), -c.eval(&p.phi.apply(&a1), &p.phi.apply(&l0)));
        let eta = build_eta(&p.lattice, &p.phi, &c, 3).unwrap();
        assert_eq!(eta.eval(&add(&a1, &l0)), -1);
    }

    #[test]
    fn rejects_bad_automorphisms() {
        let lat = Lattice::new(IMat::from_row_slice(2, 2, &[2, 1, 1, 2]), vec!["a".into(), "b".into()]).unwrap();
        let not_iso = IMat::from_row_slice(2, 2, &[1, 1, 0, 1]);
        assert!(matches!(Automorphism::new(&lat, not_iso), Err(Error::BadInput(_))));
        let singular = IMat::from_row_slice(2, 2, &[1, 1, 1, 1]);
        assert!(matches!(Automorphism::new(&lat, singular), Err(Error::NotInvertible(0))));
        let swap = IMat::from_row_slice(2, 2, &[0, 1, 1, 0]);
        assert!(Automorphism::new(&lat, swap).is_ok());
    }

    fn small_lattice() -> impl Strategy<Value = (Lattice, Automorphism)> {
        // A2, D4-like and hyperbolic examples with a nontrivial isometry
        prop_oneof![
            Just((IMat::from_row_slice(2, 2, &[2, -1, -1, 2]), IMat::from_row_slice(2, 2, &[0, -1, 1, -1]))),
            Just((IMat::from_row_slice(2, 2, &[0, 1, 1, 0]), IMat::from_row_slice(2, 2, &[-1, 0, 0, -1]))),
            Just((IMat::from_row_slice(3, 3, &[2, -1, 0, -1, 2, -1, 0, -1, 2]), IMat::from_row_slice(3, 3, &[0, 0, 1, 0, 1, 0, 1, 0, 0]))),
        ]
        .prop_map(|(g, a)| {
            let d = g.nrows();
            let lat = Lattice::new(g, (0..d).map(|i| format!("e{i}")).collect()).unwrap();
            let phi = Automorphism::new(&lat, a).unwrap();
            (lat, phi)
        })
    }

    proptest! {
        #[test]
        fn cocycle_relations(
            (lat, _phi) in small_lattice(),
            a in proptest::collection::vec(-5i64..=5, 3),
            b in proptest::collection::vec(-5i64..=5, 3),
        ) {
            let d = lat.rank();
            let (a, b) = (&a[..d], &b[..d]);
            let c = Cocycle::build(&lat);
            let na = lat.norm2(a);
            let nb = lat.norm2(b);
            prop_assert_eq!(c.eval(a, a), parity_sign(na * (na + 1) / 2));
            prop_assert_eq!(c.eval(a, b) * c.eval(b, a), parity_sign(lat.form(a, b) + na * nb));
            let ab = add(a, b);
            prop_assert_eq!(c.eval(&ab, b), c.eval(a, b) * c.eval(b, b));
        }

        #[test]
        fn isometry_and_eta(
            (lat, phi) in small_lattice(),
            a in proptest::collection::vec(-5i64..=5, 3),
            b in proptest::collection::vec(-5i64..=5, 3),
        ) {
            let d = lat.rank();
            let (a, b) = (&a[..d], &b[..d]);
            prop_assert_eq!(lat.form(&phi.apply(a), &phi.apply(b)), lat.form(a, b));
            let c = Cocycle::build(&lat);
            let eta = build_eta(&lat, &phi, &c, 1).unwrap();
            let lhs = eta.eval(a) * eta.eval(b) * c.eval(a, b);
            let rhs = eta.eval(&add(a, b)) * c.eval(&phi.apply(a), &phi.apply(b));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
