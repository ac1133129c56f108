//! Sign selection: find `s_i in {+1, -1}` with `sum s_i d_i = n (mod 2n)`.
//!
//! Choosing `I = {i : s_i = +1}` turns the condition into
//! `sum_{i in I} d_i = (sum d_i + n) / 2 (mod n)`. The sets `{0, d_i}` are
//! added one at a time; since every `d_i` is a unit mod `n`, each sum grows
//! by at least one residue until it covers `Z/n`, so every target is reached.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::zmod::{gcd, Instance, Parity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Origin {
    from: usize,
    index: usize,
}

/// The running sumset `{0, d_1} + ... + {0, d_k}` over `Z/n`, with one
/// witness subset per reached residue.
///
/// Witnesses are stored as back-pointers: each reached residue records the
/// residue it was reached from and the index that was added.
#[derive(Debug, Clone)]
pub struct WitnessTable {
    modulus: usize,
    reached: Vec<bool>,
    origin: Vec<Option<Origin>>,
    step_sizes: Vec<usize>,
}

impl WitnessTable {
    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn is_reached(&self, r: usize) -> bool {
        self.reached.get(r).copied().unwrap_or(false)
    }

    /// Reached residues in increasing order.
    pub fn reached(&self) -> Vec<usize> {
        (0..self.modulus).filter(|&r| self.reached[r]).collect()
    }

    /// `|R_k|` after each step `k = 1..n`.
    pub fn step_sizes(&self) -> &[usize] {
        &self.step_sizes
    }

    /// Indices (0-based, increasing) whose differences sum to `r`, if `r` is reached.
    pub fn witness(&self, r: usize) -> Option<Vec<usize>> {
        if !self.is_reached(r) {
            return None;
        }
        let mut out = Vec::new();
        let mut cur = r;
        while let Some(Origin { from, index }) = self.origin[cur] {
            out.push(index);
            cur = from;
        }
        out.reverse();
        Some(out)
    }

    /// Re-sums every witness; `ds` must be the list the table was built from.
    pub fn witnesses_sound(&self, ds: &[u64]) -> bool {
        let m = self.modulus as u64;
        (0..self.modulus).filter(|&r| self.reached[r]).all(|r| {
            let w = self.witness(r).unwrap();
            w.iter().map(|&i| ds[i] % m).sum::<u64>() % m == r as u64
        })
    }
}

/// Runs the sumset DP over `Z/modulus` for the differences `ds` in index order.
///
/// A residue keeps the first witness found for it. Residues reached before
/// step `k` are never re-derived in step `k` ("skip" wins over "take").
pub fn reachable_sums(ds: &[u64], modulus: usize) -> Result<WitnessTable> {
    if modulus == 0 {
        return Err(Error::Precondition(
            "sumset modulus must be positive".into(),
        ));
    }
    let m = modulus as u64;
    for (i, &d) in ds.iter().enumerate() {
        if gcd(d % m, m) != 1 {
            return Err(Error::Precondition(format!(
                "difference #{} ({d}) is not a unit modulo {modulus}",
                i + 1
            )));
        }
    }

    let mut reached = vec![false; modulus];
    let mut origin = vec![None; modulus];
    let mut order = Vec::with_capacity(modulus);
    let mut step_sizes = Vec::with_capacity(ds.len());
    reached[0] = true;
    order.push(0usize);

    for (k, &d) in ds.iter().enumerate() {
        if order.len() < modulus {
            let shift = (d % m) as usize;
            let before = order.len();
            for idx in 0..before {
                let from = order[idx];
                let to = (from + shift) % modulus;
                if !reached[to] {
                    reached[to] = true;
                    origin[to] = Some(Origin { from, index: k });
                    order.push(to);
                }
            }
        }
        let size = order.len();
        if size < modulus.min(k + 2) {
            return Err(Error::internal(
                "sumset grew slower than the Cauchy-Davenport bound",
                format!("modulus={modulus} step={} size={size} ds={ds:?}", k + 1),
            ));
        }
        step_sizes.push(size);
    }

    let table = WitnessTable {
        modulus,
        reached,
        origin,
        step_sizes,
    };
    debug_assert!(table.witnesses_sound(ds));
    Ok(table)
}

/// A subset `I` of indices with `sum_{i in I} ds[i] = target (mod modulus)`.
pub fn subset_with_sum(ds: &[u64], modulus: usize, target: usize) -> Result<Vec<usize>> {
    let table = reachable_sums(ds, modulus)?;
    table.witness(target % modulus).ok_or_else(|| {
        Error::internal(
            "target residue not reached by the sumset",
            format!("modulus={modulus} target={target} ds={ds:?}"),
        )
    })
}

/// Signs `s_1..s_n` with `s_i = +1` exactly on `witness_set`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignVector {
    pub signs: Vec<i8>,
    /// 0-based indices with positive sign.
    pub witness_set: Vec<usize>,
    /// The residue `(sum d_i + n) / 2 mod n` the witness set sums to.
    pub target: usize,
}

impl SignVector {
    /// `s_i * d_i` reduced modulo `modulus`.
    pub fn apply(&self, ds: &[u64], modulus: u64) -> Vec<u64> {
        ds.iter()
            .zip(&self.signs)
            .map(|(&d, &s)| {
                if s > 0 {
                    d % modulus
                } else {
                    (modulus - d % modulus) % modulus
                }
            })
            .collect()
    }
}

/// Picks signs with `sum s_i d_i = n (mod 2n)` for an even instance.
pub fn choose_signs(inst: &Instance) -> Result<SignVector> {
    if inst.parity() != Parity::Even {
        return Err(Error::WrongParity {
            expected: Parity::Even,
        });
    }
    let modulus = inst.modulus();
    let n = inst.n();
    let ds = inst.difference_values();

    if n == 1 {
        // Z/1 is trivial: +d_1 = 1 = n (mod 2)
        return Ok(SignVector {
            signs: vec![1],
            witness_set: vec![0],
            target: 0,
        });
    }

    let sum = ds.iter().fold(0u64, |acc, &d| (acc + d) % modulus);
    // every d_i is odd, so sum + n has the parity of n + n
    let target = (((sum + n as u64) / 2) % n as u64) as usize;
    let witness_set = subset_with_sum(&ds, n, target)?;

    let mut signs = vec![-1i8; n];
    for &i in &witness_set {
        signs[i] = 1;
    }
    let out = SignVector {
        signs,
        witness_set,
        target,
    };
    let signed_sum = out
        .apply(&ds, modulus)
        .iter()
        .fold(0u64, |acc, &x| (acc + x) % modulus);
    if signed_sum != n as u64 % modulus {
        return Err(Error::internal(
            "signed sum is not n mod 2n",
            format!("N={modulus} ds={ds:?} signs={:?}", out.signs),
        ));
    }
    Ok(out)
}
