//! Exact integer linear algebra: determinants, characteristic polynomials,
//! squarefree splitting over the rationals and Smith normal form.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type IMat = DMatrix<i64>;

fn overflow() -> Error {
    Error::BadInput("integer overflow in exact arithmetic".into())
}

/// Determinant by fraction-free (Bareiss) elimination.
pub fn det(a: &IMat) -> Result<i64> {
    let n = a.nrows();
    if n == 0 {
        return Ok(1);
    }
    let mut m: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)] as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| m[i][k] != 0) else {
                return Ok(0);
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[i][j]
                    .checked_mul(m[k][k])
                    .and_then(|x| x.checked_sub(m[i][k].checked_mul(m[k][j])?))
                    .ok_or_else(overflow)?;
                m[i][j] = v / prev;
            }
        }
        prev = m[k][k];
    }
    i64::try_from(sign * m[n - 1][n - 1]).map_err(|_| overflow())
}

/// Inverse of a unimodular matrix via the adjugate.
pub fn inverse_unimodular(a: &IMat) -> Result<IMat> {
    let n = a.nrows();
    let d = det(a)?;
    if d.abs() != 1 {
        return Err(Error::NotInvertible(d));
    }
    let mut inv = IMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let minor = a.clone().remove_row(j).remove_column(i);
            let c = det(&minor)?;
            let s = if (i + j) % 2 == 0 { 1 } else { -1 };
            inv[(i, j)] = s * c * d;
        }
    }
    Ok(inv)
}

/// Integer polynomial, coefficients in increasing degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IPoly(pub Vec<i128>);

impl IPoly {
    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|&c| c != 0)
    }

    fn trimmed(mut v: Vec<i128>) -> IPoly {
        while v.len() > 1 && *v.last().unwrap() == 0 {
            v.pop();
        }
        if v.is_empty() {
            v.push(0);
        }
        IPoly(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn derivative(&self) -> IPoly {
        if self.0.len() <= 1 {
            return IPoly(vec![0]);
        }
        IPoly::trimmed(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as i128)
                .collect(),
        )
    }

    pub fn eval_i(&self, x: i128) -> i128 {
        self.0.iter().rev().fold(0, |acc, &c| acc * x + c)
    }

    fn content(&self) -> i128 {
        self.0.iter().fold(0, |g, &c| gcd_i(g, c))
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive(&self) -> IPoly {
        let c = self.content();
        if c == 0 {
            return IPoly(vec![0]);
        }
        let lead = self.0[self.degree().unwrap()];
        let c = if lead < 0 { -c } else { c };
        IPoly::trimmed(self.0.iter().map(|&x| x / c).collect())
    }

    /// Pseudo-division: lc(b)^k a = q b + r.
    fn pseudo_divmod(a: &IPoly, b: &IPoly) -> Result<(IPoly, IPoly)> {
        let db = b.degree().expect("division by zero polynomial");
        let lb = b.0[db];
        let mut r = a.0.clone();
        let mut q = vec![0i128; a.0.len().saturating_sub(db).max(1)];
        while let Some(dr) = r.iter().rposition(|&c| c != 0) {
            if dr < db {
                break;
            }
            let lr = r[dr];
            let shift = dr - db;
            for x in q.iter_mut().chain(r.iter_mut()) {
                *x = x.checked_mul(lb).ok_or_else(overflow)?;
            }
            q[shift] += lr;
            for (k, &bc) in b.0.iter().enumerate() {
                r[k + shift] -= lr.checked_mul(bc).ok_or_else(overflow)?;
            }
        }
        Ok((IPoly::trimmed(q), IPoly::trimmed(r)))
    }

    /// Exact quotient over the rationals, returned primitive.
    pub fn div_exact(a: &IPoly, b: &IPoly) -> Result<IPoly> {
        let (q, r) = IPoly::pseudo_divmod(a, b)?;
        if !r.is_zero() {
            return Err(Error::BadInput("inexact polynomial division".into()));
        }
        Ok(q.primitive())
    }

    pub fn gcd(a: &IPoly, b: &IPoly) -> Result<IPoly> {
        let mut x = a.primitive();
        let mut y = b.primitive();
        while !y.is_zero() {
            let (_, r) = IPoly::pseudo_divmod(&x, &y)?;
            x = y;
            y = r.primitive();
        }
        Ok(x.primitive())
    }
}

fn gcd_i(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// det(x·I − A) by the Faddeev–LeVerrier recursion (exact divisions).
pub fn charpoly(a: &IMat) -> Result<IPoly> {
    let n = a.nrows();
    let am: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)] as i128).collect())
        .collect();
    let mut coeffs = vec![0i128; n + 1];
    coeffs[n] = 1;
    let mut m = vec![vec![0i128; n]; n];
    let mut c = 1i128;
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![0i128; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0i128;
                for l in 0..n {
                    s = s
                        .checked_add(am[i][l].checked_mul(m[l][j]).ok_or_else(overflow)?)
                        .ok_or_else(overflow)?;
                }
                next[i][j] = s;
            }
            next[i][i] += c;
        }
        m = next;
        let mut tr = 0i128;
        for i in 0..n {
            for l in 0..n {
                tr = tr
                    .checked_add(am[i][l].checked_mul(m[l][i]).ok_or_else(overflow)?)
                    .ok_or_else(overflow)?;
            }
        }
        c = -tr / k as i128;
        coeffs[n - k] = c;
    }
    Ok(IPoly(coeffs))
}

/// Splits p = Π f_k^k with each f_k squarefree; returns (k, f_k) for nonconstant f_k.
pub fn squarefree_split(p: &IPoly) -> Result<Vec<(usize, IPoly)>> {
    // g_0 = p, g_{k} = gcd(g_{k-1}, g_{k-1}'); h_k = g_{k-1}/g_k has the roots
    // of multiplicity at least k.
    let mut gs = vec![p.primitive()];
    while gs.last().unwrap().degree().unwrap_or(0) > 0 {
        let g = gs.last().unwrap();
        let next = IPoly::gcd(g, &g.derivative())?;
        gs.push(next);
    }
    let hs: Vec<IPoly> = gs
        .windows(2)
        .map(|w| IPoly::div_exact(&w[0], &w[1]))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for k in 0..hs.len() {
        let f = if k + 1 < hs.len() {
            IPoly::div_exact(&hs[k], &hs[k + 1])?
        } else {
            hs[k].clone()
        };
        if f.degree().unwrap_or(0) > 0 {
            out.push((k + 1, f));
        }
    }
    Ok(out)
}

/// Smith normal form: returns (U, D, V) with U·A·V = D diagonal,
/// U and V unimodular, d_i | d_{i+1}, d_i ≥ 0.
pub fn smith(a: &IMat) -> Result<(IMat, IMat, IMat)> {
    let (n, m) = a.shape();
    let mut d = a.map(|x| x as i128);
    let mut u = DMatrix::<i128>::identity(n, n);
    let mut v = DMatrix::<i128>::identity(m, m);
    let k_max = n.min(m);
    for t in 0..k_max {
        loop {
            // pivot: smallest nonzero |entry| in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..m {
                    if d[(i, j)] != 0
                        && best.is_none_or(|(bi, bj)| d[(i, j)].abs() < d[(bi, bj)].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                break;
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_columns(t, pj);
            v.swap_columns(t, pj);
            let p = d[(t, t)];
            let mut clean = true;
            for i in t + 1..n {
                let q = d[(i, t)] / p;
                if q != 0 {
                    for j in 0..m {
                        d[(i, j)] -= q * d[(t, j)];
                    }
                    for j in 0..n {
                        u[(i, j)] -= q * u[(t, j)];
                    }
                }
                if d[(i, t)] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..m {
                let q = d[(t, j)] / p;
                if q != 0 {
                    for i in 0..n {
                        d[(i, j)] -= q * d[(i, t)];
                    }
                    for i in 0..m {
                        v[(i, j)] -= q * v[(i, t)];
                    }
                }
                if d[(t, j)] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility of the trailing block by the pivot
            let mut bad = None;
            'outer: for i in t + 1..n {
                for j in t + 1..m {
                    if d[(i, j)] % p != 0 {
                        bad = Some(i);
                        break 'outer;
                    }
                }
            }
            match bad {
                Some(i) => {
                    for j in 0..m {
                        d[(t, j)] += d[(i, j)];
                    }
                    for j in 0..n {
                        u[(t, j)] += u[(i, j)];
                    }
                }
                None => break,
            }
        }
        if d[(t, t)] < 0 {
            for j in 0..m {
                d[(t, j)] = -d[(t, j)];
            }
            for j in 0..n {
                u[(t, j)] = -u[(t, j)];
            }
        }
    }
    let conv = |x: &DMatrix<i128>| -> Result<IMat> {
        let mut out = IMat::zeros(x.nrows(), x.ncols());
        for (o, &y) in out.iter_mut().zip(x.iter()) {
            *o = i64::try_from(y).map_err(|_| overflow())?;
        }
        Ok(out)
    };
    Ok((conv(&u)?, conv(&d)?, conv(&v)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IMat {
        IMat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn det_and_inverse() {
        let a = m(&[&[2, 1, 0], &[1, 1, 0], &[0, 3, 1]]);
        assert_eq!(det(&a).unwrap(), 1);
        let inv = inverse_unimodular(&a).unwrap();
        assert_eq!(&a * &inv, IMat::identity(3, 3));
        assert_eq!(det(&m(&[&[0, 1], &[1, 0]])).unwrap(), -1);
        assert_eq!(det(&m(&[&[1, 2], &[2, 4]])).unwrap(), 0);
    }

    #[test]
    fn charpoly_of_companion() {
        // x^3 - 2x^2 + 3x - 5
        let a = m(&[&[0, 0, 5], &[1, 0, -3], &[0, 1, 2]]);
        assert_eq!(charpoly(&a).unwrap(), IPoly(vec![-5, 3, -2, 1]));
    }

    #[test]
    fn squarefree_multiplicities() {
        // (x-1)^3 (x+1) (x^2+x+1)^2
        let a = IPoly(vec![-1, 1]);
        let b = IPoly(vec![1, 1]);
        let c = IPoly(vec![1, 1, 1]);
        let mul = |p: &IPoly, q: &IPoly| {
            let mut r = vec![0i128; p.0.len() + q.0.len() - 1];
            for (i, x) in p.0.iter().enumerate() {
                for (j, y) in q.0.iter().enumerate() {
                    r[i + j] += x * y;
                }
            }
            IPoly(r)
        };
        let mut p = mul(&a, &a);
        p = mul(&p, &a);
        p = mul(&p, &b);
        p = mul(&p, &c);
        p = mul(&p, &c);
        let s = squarefree_split(&p).unwrap();
        let ks: Vec<usize> = s.iter().map(|x| x.0).collect();
        assert_eq!(ks, vec![1, 2, 3]);
        assert_eq!(s[0].1, b);
        assert_eq!(s[1].1, c);
        assert_eq!(s[2].1, a);
    }

    #[test]
    fn smith_form() {
        let a = m(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let (u, d, v) = smith(&a).unwrap();
        assert_eq!(&u * &a * &v, d);
        assert_eq!(d, m(&[&[2, 0, 0], &[0, 6, 0], &[0, 0, 12]]));
        assert_eq!(det(&u).unwrap().abs(), 1);
        assert_eq!(det(&v).unwrap().abs(), 1);
        let z = m(&[&[0, 0], &[1, 0]]);
        let (u, d, v) = smith(&z).unwrap();
        assert_eq!(&u * &z * &v, d);
        assert_eq!(d[(0, 0)], 1);
        assert_eq!(d[(1, 1)], 0);
    }
}
