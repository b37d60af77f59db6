//! Local decoders on K^r_{q+r}, the divisibility conditions and integral
//! decomposition of divisible edge vectors.

use crate::error::{Error, Result};
use crate::hypercore::{binom, factorial, for_each_subset, is_subset, set_minus, CliqueVec, IntVec, Params, VSet};
use serde::Serialize;
use std::collections::BTreeMap;

/// Coefficients x(t) of the decoder Ψ, indexed by t = |e \ Q'|.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecoderTable {
    pub q: usize,
    pub r: usize,
    pub big_n: i64,
    pub coeff: Vec<i64>,
}

/// Falling factorial (q)_i.
fn falling(q: u64, i: u64) -> i128 {
    (0..i).map(|j| (q - j) as i128).product()
}

pub fn decoder(p: &Params) -> DecoderTable {
    decoder_qr(p.q, p.r)
}

pub fn decoder_qr(q: usize, r: usize) -> DecoderTable {
    assert!(q > r && r >= 1, "decoder needs q > r >= 1");
    let coeff = (0..=r as u64)
        .map(|t| {
            let mut x: i128 = 0;
            for i in 0..=t {
                let term = binom(t, i) as i128 * falling(q as u64, i) * factorial(r as u64 - i) as i128;
                x += if i % 2 == 0 { term } else { -term };
            }
            x as i64
        })
        .collect();
    let big_n = (factorial(r as u64) * binom(q as u64, r as u64)) as i64;
    DecoderTable { q, r, big_n, coeff }
}

impl DecoderTable {
    /// 2^q · r!, the a priori bound on every coefficient.
    pub fn bound(&self) -> i64 {
        (1i64 << self.q) * factorial(self.r as u64) as i64
    }

    pub fn max_abs(&self) -> i64 {
        self.coeff.iter().map(|x| x.abs()).max().unwrap_or(0)
    }

    /// Ψ on the (q+r)-set `z` with target edge `e ⊆ z`: Ψ_{Q'} = x(|e \ Q'|).
    pub fn materialize(&self, z: &[u32], e: &[u32]) -> CliqueVec {
        assert_eq!(z.len(), self.q + self.r);
        assert!(e.len() == self.r && is_subset(e, z));
        let mut out = CliqueVec::new();
        for_each_subset(z, self.q, |c| {
            let t = set_minus(e, c).len();
            out.add_slice(c, self.coeff[t]);
        });
        out
    }

    /// Ψ on [q+r] with e = [r].
    pub fn materialize_standard(&self) -> CliqueVec {
        let z: Vec<u32> = (1..=(self.q + self.r) as u32).collect();
        self.materialize(&z, &z[..self.r])
    }
}

/// |J(I)| = Σ { J_e : I ⊆ e } for every i-set I (i = 0..=r) contained in a
/// support edge. Returned as one map per i.
fn shadow_totals(j: &IntVec, r: usize) -> Vec<BTreeMap<VSet, i128>> {
    let mut out = vec![BTreeMap::new(); r + 1];
    for (e, x) in j.iter() {
        for (i, m) in out.iter_mut().enumerate() {
            for_each_subset(e, i, |s| *m.entry(VSet::from_slice(s)).or_insert(0) += x as i128);
        }
    }
    out
}

/// Checks C(q−i, r−i) | |J(I)| for all i-sets I, 0 ≤ i ≤ r. The first
/// violation (largest i, then lexicographically smallest I) is returned.
pub fn divisible(j: &IntVec, q: usize, r: usize) -> Result<()> {
    for (k, _) in j.iter() {
        if k.len() != r {
            return Err(Error::Malformed(format!("{k:?} is not an {r}-set")));
        }
    }
    for (i, m) in shadow_totals(j, r).into_iter().enumerate().rev() {
        let modulus = binom((q - i) as u64, (r - i) as u64) as i128;
        for (s, tot) in m {
            if tot % modulus != 0 {
                return Err(Error::NotDivisible {
                    i,
                    set: s.to_vec(),
                    total: tot as i64,
                    modulus: modulus as i64,
                });
            }
        }
    }
    Ok(())
}

type Vec128 = BTreeMap<VSet, i128>;

fn add128(v: &mut Vec128, k: &[u32], x: i128) -> Result<()> {
    if x == 0 {
        return Ok(());
    }
    let e = v.entry(VSet::from_slice(k)).or_insert(0);
    *e = e.checked_add(x).ok_or_else(|| Error::Overflow("integral_decompose".into()))?;
    if *e == 0 {
        v.remove(k);
    }
    Ok(())
}

/// Base case on vertex set [q+r]: the unique solution by inclusion–exclusion,
/// x_{Q'} = Σ_{I ⊆ [q+r] \ Q'} (−1)^{|I|} |J(I)| / C(q−|I|, r−|I|).
fn solve_base(j: &Vec128, q: usize, r: usize) -> Result<Vec128> {
    let n = (q + r) as u32;
    let verts: Vec<u32> = (1..=n).collect();
    let mut s: Vec<Vec128> = vec![BTreeMap::new(); r + 1];
    for (e, &x) in j {
        for (i, m) in s.iter_mut().enumerate() {
            let mut err = Ok(());
            for_each_subset(e, i, |sub| {
                if err.is_ok() {
                    err = add128(m, sub, x);
                }
            });
            err?;
        }
    }
    for (i, m) in s.iter_mut().enumerate() {
        let modulus = binom((q - i) as u64, (r - i) as u64) as i128;
        for v in m.values_mut() {
            debug_assert_eq!(*v % modulus, 0);
            *v /= modulus;
        }
    }
    let mut out = Vec128::new();
    let mut err = Ok(());
    for_each_subset(&verts, q, |c| {
        if err.is_err() {
            return;
        }
        let comp = set_minus(&verts, c);
        let mut x: i128 = 0;
        for (i, m) in s.iter().enumerate() {
            for_each_subset(&comp, i, |sub| {
                let t = m.get(sub).copied().unwrap_or(0);
                let t = if i % 2 == 0 { t } else { -t };
                match x.checked_add(t) {
                    Some(v) => x = v,
                    None => err = Err(Error::Overflow("integral_decompose".into())),
                }
            });
        }
        if x != 0 {
            out.insert(VSet::from_slice(c), x);
        }
    });
    err.map(|_| out)
}

/// Decomposes a divisible J supported on [n] (n ≥ q + r) by peeling vertex n.
fn decompose_rec(j: Vec128, q: usize, r: usize, n: u32) -> Result<Vec128> {
    if j.is_empty() {
        return Ok(Vec128::new());
    }
    if r == 0 {
        let m = j.get(&VSet::new()).copied().unwrap_or(0);
        let mut out = Vec128::new();
        add128(&mut out, &(1..=q as u32).collect::<Vec<_>>(), m)?;
        return Ok(out);
    }
    if n as usize == q + r {
        return solve_base(&j, q, r);
    }
    let mut link = Vec128::new();
    let mut rest = Vec128::new();
    for (e, &x) in &j {
        if e.last() == Some(&n) {
            link.insert(VSet::from_slice(&e[..e.len() - 1]), x);
        } else {
            rest.insert(e.clone(), x);
        }
    }
    let psi = decompose_rec(link, q - 1, r - 1, n - 1)?;
    let mut out = Vec128::new();
    for (c, &x) in &psi {
        let mut full = c.clone();
        full.push(n);
        // the boundary of the lifted clique restricted to edges avoiding n
        let mut err = Ok(());
        for_each_subset(c, r, |e| {
            if err.is_ok() {
                err = add128(&mut rest, e, x.checked_neg().unwrap_or(i128::MAX));
            }
        });
        err?;
        add128(&mut out, &full, x)?;
    }
    let phi = decompose_rec(rest, q, r, n - 1)?;
    for (c, x) in phi {
        add128(&mut out, &c, x)?;
    }
    Ok(out)
}

/// Returns an integral Φ with ∂Φ = J, where J lives on K^r_n.
pub fn integral_decompose(j: &IntVec, q: usize, r: usize, n: u32) -> Result<CliqueVec> {
    if !(q > r && r >= 1) {
        return Err(Error::Config(format!("need q > r >= 1, got q={q}, r={r}")));
    }
    if (n as usize) < q + r {
        return Err(Error::Config(format!("n = {n} is below q + r = {}", q + r)));
    }
    divisible(j, q, r)?;
    if j.max_vertex() > n {
        return Err(Error::Malformed(format!("vertex {} exceeds n = {n}", j.max_vertex())));
    }
    // relabel the support (padded with unused vertices) onto [m]
    let mut verts: Vec<u32> = j.vertices().to_vec();
    let mut pad = 1;
    while verts.len() < q + r {
        if !verts.contains(&pad) {
            verts.push(pad);
        }
        pad += 1;
    }
    verts.sort_unstable();
    let pos: BTreeMap<u32, u32> = verts.iter().enumerate().map(|(i, &v)| (v, i as u32 + 1)).collect();
    let mut local = Vec128::new();
    for (e, x) in j.relabel(|v| pos[&v]).iter() {
        local.insert(e.clone(), x as i128);
    }
    let phi = decompose_rec(local, q, r, verts.len() as u32)?;
    let mut out = CliqueVec::new();
    for (c, x) in phi {
        let x = i64::try_from(x).map_err(|_| Error::Overflow("integral_decompose".into()))?;
        let mut k: VSet = c.iter().map(|&v| verts[v as usize - 1]).collect();
        k.sort_unstable();
        out.add(k, x);
    }
    Ok(out)
}
