//! Exact arithmetic: prime fields, Vandermonde matrices, rationals and
//! subgroup spans over Z/NZ kept in Howell normal form.

use crate::error::{Error, Result};
use num_integer::Integer;

pub type Rational = num_rational::BigRational;

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// The smallest prime in [q, 2q].
pub fn bertrand_prime(q: u64) -> u64 {
    assert!(q >= 2, "bertrand_prime needs q >= 2");
    (q..=2 * q).find(|&p| is_prime(p)).expect("Bertrand's postulate")
}

/// Arithmetic in F_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    pub p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Config(format!("{p} is not prime")));
        }
        Ok(PrimeField { p })
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b % self.p) % self.p
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a as u128 * b as u128 % self.p as u128) as u64
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.p;
        a %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        if a % self.p == 0 {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }
}

/// q×r Vandermonde matrix over F_p with rows (1, y_i, …, y_i^{r−1}), y_i = i − 1.
#[derive(Clone, Debug)]
pub struct VandermondeMatrix {
    pub field: PrimeField,
    pub q: usize,
    pub r: usize,
    pub rows: Vec<Vec<u64>>,
}

impl VandermondeMatrix {
    pub fn new(p: u64, q: usize, r: usize) -> Result<Self> {
        let field = PrimeField::new(p)?;
        if q as u64 > p {
            return Err(Error::Config(format!("need q <= p for distinct rows, got q={q}, p={p}")));
        }
        let rows = (0..q)
            .map(|i| (0..r).map(|j| field.pow(i as u64, j as u64)).collect())
            .collect();
        Ok(VandermondeMatrix { field, q, r, rows })
    }

    /// Rows indexed by the 1-based set `rows_1based`.
    pub fn submatrix(&self, rows_1based: &[usize]) -> Vec<Vec<u64>> {
        rows_1based.iter().map(|&i| self.rows[i - 1].clone()).collect()
    }

    /// Inverse of the r×r submatrix M_I (1-based row indices).
    pub fn submatrix_invert(&self, rows_1based: &[usize]) -> Result<Vec<Vec<u64>>> {
        if rows_1based.len() != self.r {
            return Err(Error::Malformed(format!("need {} rows, got {}", self.r, rows_1based.len())));
        }
        if rows_1based.iter().any(|&i| i == 0 || i > self.q) {
            return Err(Error::Malformed("row index out of range".into()));
        }
        invert_mod_p(&self.submatrix(rows_1based), self.field)
            .ok_or_else(|| Error::Malformed("singular submatrix (repeated rows?)".into()))
    }

    /// M·u for u ∈ F_p^r.
    pub fn apply(&self, u: &[u64]) -> Vec<u64> {
        mat_vec(&self.rows, u, self.field)
    }
}

pub fn mat_vec(m: &[Vec<u64>], u: &[u64], f: PrimeField) -> Vec<u64> {
    m.iter()
        .map(|row| row.iter().zip(u).fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b))))
        .collect()
}

pub fn mat_mul(a: &[Vec<u64>], b: &[Vec<u64>], f: PrimeField) -> Vec<Vec<u64>> {
    let m = b[0].len();
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| row.iter().enumerate().fold(0, |acc, (k, &x)| f.add(acc, f.mul(x, b[k][j]))))
                .collect()
        })
        .collect()
}

/// Gauss–Jordan inversion over F_p.
pub fn invert_mod_p(m: &[Vec<u64>], f: PrimeField) -> Option<Vec<Vec<u64>>> {
    let n = m.len();
    let mut a: Vec<Vec<u64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<u64> = row.iter().map(|x| x % f.p).collect();
            r.extend((0..n).map(|j| u64::from(i == j)));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&i| a[i][col] != 0)?;
        a.swap(col, piv);
        let inv = f.inv(a[col][col])?;
        for x in a[col].iter_mut() {
            *x = f.mul(*x, inv);
        }
        for i in 0..n {
            if i != col && a[i][col] != 0 {
                let factor = a[i][col];
                for j in 0..2 * n {
                    let t = f.mul(factor, a[col][j]);
                    a[i][j] = f.sub(a[i][j], t);
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn det_mod_p(m: &[Vec<u64>], f: PrimeField) -> u64 {
    let n = m.len();
    let mut a: Vec<Vec<u64>> = m.iter().map(|r| r.iter().map(|x| x % f.p).collect()).collect();
    let mut det = 1;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&i| a[i][col] != 0) else {
            return 0;
        };
        if piv != col {
            a.swap(col, piv);
            det = f.sub(0, det);
        }
        det = f.mul(det, a[col][col]);
        let inv = f.inv(a[col][col]).unwrap();
        for i in col + 1..n {
            let factor = f.mul(a[i][col], inv);
            for j in col..n {
                let t = f.mul(factor, a[col][j]);
                a[i][j] = f.sub(a[i][j], t);
            }
        }
    }
    det
}

/// Outcome of inserting a vector into a span.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Insert {
    Grew,
    Unchanged,
}

#[derive(Clone, Debug)]
struct Row {
    pivot: usize,
    v: Vec<u64>,
    /// Coefficients over the inserted generators, when tracked.
    coef: Vec<u64>,
}

/// A subgroup of (Z/NZ)^dim kept in Howell form: echelon rows whose pivots
/// divide N, closed under multiplication by annihilators of the pivots.
#[derive(Clone, Debug)]
pub struct ModSpan {
    modulus: u64,
    dim: usize,
    rows: Vec<Row>,
    track: bool,
    generators: usize,
    growths: usize,
}

fn modinv(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

impl ModSpan {
    pub fn new(modulus: u64, dim: usize) -> Self {
        assert!(modulus >= 2, "modulus must be at least 2");
        ModSpan {
            modulus,
            dim,
            rows: Vec::new(),
            track: false,
            generators: 0,
            growths: 0,
        }
    }

    /// Span that records, for every basis row, its expression in terms of the
    /// inserted generators, so that `express` can return coefficients.
    pub fn with_tracking(modulus: u64, dim: usize) -> Self {
        let mut s = Self::new(modulus, dim);
        s.track = true;
        s
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn growths(&self) -> usize {
        self.growths
    }

    pub fn rank_rows(&self) -> usize {
        self.rows.len()
    }

    fn norm(&self, v: &[i64]) -> Result<Vec<u64>> {
        if v.len() != self.dim {
            return Err(Error::Malformed(format!("vector of length {} in span of dimension {}", v.len(), self.dim)));
        }
        Ok(v.iter().map(|&x| x.rem_euclid(self.modulus as i64) as u64).collect())
    }

    fn lead(v: &[u64]) -> Option<usize> {
        v.iter().position(|&x| x != 0)
    }

    fn axpy(&self, dst: &mut [u64], c: u64, src: &[u64]) {
        // dst += c * src (mod N)
        let m = self.modulus;
        for (d, &s) in dst.iter_mut().zip(src) {
            if s != 0 {
                *d = ((*d as u128 + c as u128 * s as u128) % m as u128) as u64;
            }
        }
    }

    fn scale(&self, c: u64, v: &[u64]) -> Vec<u64> {
        let m = self.modulus as u128;
        v.iter().map(|&x| (c as u128 * x as u128 % m) as u64).collect()
    }

    fn coef_add(&self, dst: &mut Vec<u64>, c: u64, src: &[u64]) {
        if dst.len() < src.len() {
            dst.resize(src.len(), 0);
        }
        self.axpy(&mut dst[..src.len()], c, src);
    }

    /// A unit u of Z/NZ with u·a ≡ gcd(a, N).
    fn unit_normalizer(&self, a: u64) -> (u64, u64) {
        let n = self.modulus;
        let g = a.gcd(&n);
        let np = n / g;
        let u0 = if np == 1 { 1 } else { modinv((a / g) % np, np).expect("coprime") };
        let mut u = u0;
        while u.gcd(&n) != 1 {
            u += np;
        }
        (u % n, g)
    }

    /// Exact membership test.
    pub fn member(&self, v: &[i64]) -> Result<bool> {
        let mut w = self.norm(v)?;
        Ok(self.reduce(&mut w, None))
    }

    /// Reduces `w` to zero if possible. Returns membership; when `coef` is
    /// given it accumulates the generator coefficients of the subtracted part.
    fn reduce(&self, w: &mut [u64], mut coef: Option<&mut Vec<u64>>) -> bool {
        let m = self.modulus;
        for row in &self.rows {
            let a = w[row.pivot];
            if a == 0 {
                continue;
            }
            if Self::lead(&w[..row.pivot]).is_some() {
                return false;
            }
            let d = row.v[row.pivot];
            if a % d != 0 {
                return false;
            }
            let c = a / d;
            self.axpy(w, m - c % m, &row.v);
            if let Some(cf) = coef.as_deref_mut() {
                self.coef_add(cf, c % m, &row.coef);
            }
        }
        Self::lead(w).is_none()
    }

    /// Coefficients λ over the generators (in insertion order) with Σ λ_j g_j = v,
    /// or None when v is not in the span. Requires tracking.
    pub fn express(&self, v: &[i64]) -> Result<Option<Vec<u64>>> {
        if !self.track {
            return Err(Error::Config("span was built without coefficient tracking".into()));
        }
        let mut w = self.norm(v)?;
        let mut coef = vec![0u64; self.generators];
        if self.reduce(&mut w, Some(&mut coef)) {
            coef.resize(self.generators, 0);
            Ok(Some(coef))
        } else {
            Ok(None)
        }
    }

    /// Inserts a generator. Returns whether the span grew.
    pub fn insert(&mut self, v: &[i64]) -> Result<Insert> {
        let w = self.norm(v)?;
        let was_member = {
            let mut t = w.clone();
            self.reduce(&mut t, None)
        };
        let gi = self.generators;
        self.generators += 1;
        if was_member {
            return Ok(Insert::Unchanged);
        }
        let mut coef = Vec::new();
        if self.track {
            coef = vec![0; gi + 1];
            coef[gi] = 1;
        }
        let mut work: Vec<(Vec<u64>, Vec<u64>)> = vec![(w, coef)];
        while let Some((mut v, mut cf)) = work.pop() {
            loop {
                let Some(c) = Self::lead(&v) else { break };
                let pos = self.rows.iter().position(|r| r.pivot >= c);
                match pos {
                    Some(i) if self.rows[i].pivot == c => {
                        let d = self.rows[i].v[c];
                        let a = v[c];
                        if a % d == 0 {
                            let k = a / d;
                            let m = self.modulus;
                            let (rv, rc) = (self.rows[i].v.clone(), self.rows[i].coef.clone());
                            self.axpy(&mut v, m - k % m, &rv);
                            if self.track {
                                self.coef_add(&mut cf, (m - k % m) % m, &rc);
                            }
                            continue;
                        }
                        // new pivot g = gcd(a, d) combining v and the old row
                        let m = self.modulus as i128;
                        let e = (a as i128).extended_gcd(&(d as i128));
                        let s = e.x.rem_euclid(m) as u64;
                        let t = e.y.rem_euclid(m) as u64;
                        let old = self.rows[i].clone();
                        let mut nv = self.scale(s, &v);
                        self.axpy(&mut nv, t, &old.v);
                        let mut nc = Vec::new();
                        if self.track {
                            nc = self.scale(s, &cf);
                            self.coef_add(&mut nc, t, &old.coef);
                        }
                        self.rows.remove(i);
                        work.push((old.v, old.coef));
                        work.push((v, cf));
                        self.place(nv, nc, c, &mut work);
                        break;
                    }
                    _ => {
                        self.place(v, cf, c, &mut work);
                        break;
                    }
                }
            }
        }
        self.growths += 1;
        Ok(Insert::Grew)
    }

    /// Installs a row with leading column c, normalizing the pivot to a divisor
    /// of N, and queues its annihilator multiple.
    fn place(&mut self, v: Vec<u64>, cf: Vec<u64>, c: usize, work: &mut Vec<(Vec<u64>, Vec<u64>)>) {
        let (u, g) = self.unit_normalizer(v[c]);
        let v = self.scale(u, &v);
        let cf = if self.track { self.scale(u, &cf) } else { cf };
        debug_assert_eq!(v[c], g);
        let ann = self.modulus / g;
        if ann != self.modulus {
            let av = self.scale(ann, &v);
            if Self::lead(&av).is_some() {
                let ac = if self.track { self.scale(ann, &cf) } else { Vec::new() };
                work.push((av, ac));
            }
        }
        let pos = self.rows.iter().position(|r| r.pivot > c).unwrap_or(self.rows.len());
        self.rows.insert(pos, Row { pivot: c, v, coef: cf });
    }

    /// The canonical Howell basis: pivots divide N and entries above each pivot
    /// are reduced into [0, pivot).
    pub fn basis(&self) -> Vec<Vec<u64>> {
        let mut rows: Vec<(usize, Vec<u64>)> = self.rows.iter().map(|r| (r.pivot, r.v.clone())).collect();
        let m = self.modulus;
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                let pc = rows[j].0;
                let d = rows[j].1[pc];
                let k = rows[i].1[pc] / d;
                if k > 0 {
                    let pv = rows[j].1.clone();
                    let row = &mut rows[i].1;
                    for (a, &b) in row.iter_mut().zip(&pv) {
                        *a = ((*a as u128 + (m - k % m) as u128 * b as u128) % m as u128) as u64;
                    }
                }
            }
        }
        rows.into_iter().map(|(_, v)| v).collect()
    }

    /// Number of elements of the subgroup (product of N / pivot).
    pub fn order(&self) -> u128 {
        self.rows.iter().map(|r| (self.modulus / r.v[r.pivot]) as u128).product()
    }
}
