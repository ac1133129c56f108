//! Residues modulo `N`, problem instances, and the partition verifier.
//!
//! Elements of `Z/N` are always represented canonically as `0..N`. Every
//! other module is checked against [`verify_partition`].

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus accepted anywhere in the crate.
pub const MAX_MODULUS: u64 = 1 << 31;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// An element of `Z/modulus`, with `0 <= value < modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    /// Reduces `value` modulo `modulus`.
    pub fn new(value: u64, modulus: u64) -> Result<Self> {
        check_modulus(modulus as i128)?;
        Ok(Residue {
            value: value % modulus,
            modulus,
        })
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn checked_add(self, rhs: Residue) -> Result<Residue> {
        same_modulus(self, rhs)?;
        Ok(Residue {
            value: (self.value + rhs.value) % self.modulus,
            modulus: self.modulus,
        })
    }

    pub fn checked_sub(self, rhs: Residue) -> Result<Residue> {
        same_modulus(self, rhs)?;
        Ok(Residue {
            value: (self.value + self.modulus - rhs.value) % self.modulus,
            modulus: self.modulus,
        })
    }
}

fn same_modulus(a: Residue, b: Residue) -> Result<()> {
    if a.modulus != b.modulus {
        return Err(Error::ModulusMismatch(a.modulus, b.modulus));
    }
    Ok(())
}

impl Add for Residue {
    type Output = Residue;

    /// Panics if the moduli differ; use [`Residue::checked_add`] to get an error instead.
    fn add(self, rhs: Residue) -> Residue {
        self.checked_add(rhs).expect("residue moduli differ")
    }
}

impl Sub for Residue {
    type Output = Residue;

    fn sub(self, rhs: Residue) -> Residue {
        self.checked_sub(rhs).expect("residue moduli differ")
    }
}

impl Neg for Residue {
    type Output = Residue;

    fn neg(self) -> Residue {
        Residue {
            value: (self.modulus - self.value) % self.modulus,
            modulus: self.modulus,
        }
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

fn check_modulus(modulus: i128) -> Result<u64> {
    if modulus < 1 || modulus > MAX_MODULUS as i128 {
        return Err(Error::InvalidModulus(modulus));
    }
    Ok(modulus as u64)
}

/// Euclidean remainder of `x` modulo `modulus`.
pub fn canonicalize(x: i64, modulus: i64) -> Result<Residue> {
    let modulus = check_modulus(modulus as i128)?;
    Ok(Residue {
        value: (x as i128).rem_euclid(modulus as i128) as u64,
        modulus,
    })
}

pub fn is_unit(d: Residue) -> bool {
    gcd(d.value, d.modulus) == 1
}

/// Canonical representative `min(d, N - d)` of the class `{d, -d}`.
pub fn class_of(d: u64, modulus: u64) -> u64 {
    let d = d % modulus;
    d.min((modulus - d) % modulus)
}

/// The difference class realized by the unordered pair `{a, b}`.
pub fn diff_class(a: Residue, b: Residue) -> Result<Residue> {
    let forward = a.checked_sub(b)?;
    Ok(forward.min(-forward))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// A modulus `N` together with `n = floor(N / 2)` unit differences.
///
/// For even `N` the pairs must cover all of `Z/N`; for odd `N` they cover
/// `Z/N \ {0}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    modulus: u64,
    differences: Vec<Residue>,
}

impl Instance {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Number of pairs.
    pub fn n(&self) -> usize {
        self.differences.len()
    }

    pub fn parity(&self) -> Parity {
        if self.modulus.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn differences(&self) -> &[Residue] {
        &self.differences
    }

    pub fn difference_values(&self) -> Vec<u64> {
        self.differences.iter().map(|d| d.value).collect()
    }

    /// Whether `x` must be covered by a partition of this instance.
    pub fn in_target(&self, x: u64) -> bool {
        x < self.modulus && (self.parity() == Parity::Even || x != 0)
    }

    pub fn target_set(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.modulus).filter(|&x| self.in_target(x))
    }
}

/// Builds an [`Instance`], canonicalizing every difference and rejecting non-units.
pub fn validate_instance(modulus: i64, ds: &[i64]) -> Result<Instance> {
    if modulus < 2 {
        return Err(Error::InvalidModulus(modulus as i128));
    }
    let modulus = check_modulus(modulus as i128)?;
    let expected = (modulus / 2) as usize;
    if ds.len() != expected {
        return Err(Error::WrongCount {
            expected,
            got: ds.len(),
        });
    }
    let mut differences = Vec::with_capacity(expected);
    for (i, &d) in ds.iter().enumerate() {
        let r = canonicalize(d, modulus as i64)?;
        if !is_unit(r) {
            return Err(Error::NonUnit {
                index: i + 1,
                value: r.value,
                modulus,
            });
        }
        differences.push(r);
    }
    Ok(Instance {
        modulus,
        differences,
    })
}

/// Which ordered difference of a pair equals the realized input difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "a-b")]
    AMinusB,
    #[serde(rename = "b-a")]
    BMinusA,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::AMinusB => "a-b",
            Orientation::BMinusA => "b-a",
        }
    }
}

/// Two residues and the input difference they realize.
///
/// `index` is 0-based into [`Instance::differences`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pair {
    pub a: u64,
    pub b: u64,
    pub index: usize,
    pub orientation: Orientation,
}

impl Pair {
    /// The ordered difference selected by `orientation`, reduced mod `modulus`.
    pub fn oriented_difference(&self, modulus: u64) -> u64 {
        let (x, y) = match self.orientation {
            Orientation::AMinusB => (self.a, self.b),
            Orientation::BMinusA => (self.b, self.a),
        };
        (x % modulus + modulus - y % modulus) % modulus
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairPartition {
    pub instance: Instance,
    pub pairs: Vec<Pair>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Failure {
    WrongPairCount { expected: usize, got: usize },
    ElementMissing { element: u64 },
    ElementRepeated { element: u64 },
    ElementOutsideTarget { element: u64 },
    DifferenceMismatch { pair: usize, index: usize },
    IndexOutOfRange { pair: usize, index: usize },
    IndexNotPermutation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub valid: bool,
    pub failures: Vec<Failure>,
}

impl VerificationReport {
    fn from_failures(failures: Vec<Failure>) -> Self {
        VerificationReport {
            valid: failures.is_empty(),
            failures,
        }
    }
}

/// Checks coverage, distinctness, the index permutation, and every oriented difference.
///
/// Pair numbers in failures are 0-based positions in `p.pairs`.
pub fn verify_partition(p: &PairPartition) -> VerificationReport {
    let inst = &p.instance;
    let modulus = inst.modulus;
    let n = inst.n();
    let mut failures = Vec::new();

    if p.pairs.len() != n {
        failures.push(Failure::WrongPairCount {
            expected: n,
            got: p.pairs.len(),
        });
    }

    let mut seen = vec![0usize; modulus as usize];
    let mut outside = Vec::new();
    for pair in &p.pairs {
        for x in [pair.a, pair.b] {
            if inst.in_target(x) {
                seen[x as usize] += 1;
            } else if !outside.contains(&x) {
                outside.push(x);
            }
        }
    }
    for x in 0..modulus {
        if seen[x as usize] > 1 {
            failures.push(Failure::ElementRepeated { element: x });
        }
    }
    for x in inst.target_set() {
        if seen[x as usize] == 0 {
            failures.push(Failure::ElementMissing { element: x });
        }
    }
    failures.extend(
        outside
            .into_iter()
            .map(|element| Failure::ElementOutsideTarget { element }),
    );

    let mut used = vec![false; n];
    let mut permutation = p.pairs.len() == n;
    for (k, pair) in p.pairs.iter().enumerate() {
        if pair.index >= n {
            failures.push(Failure::IndexOutOfRange {
                pair: k,
                index: pair.index,
            });
            permutation = false;
            continue;
        }
        if std::mem::replace(&mut used[pair.index], true) {
            permutation = false;
        }
        let want = inst.differences[pair.index].value;
        if pair.a >= modulus || pair.b >= modulus || pair.oriented_difference(modulus) != want {
            failures.push(Failure::DifferenceMismatch {
                pair: k,
                index: pair.index,
            });
        }
    }
    if !permutation {
        failures.push(Failure::IndexNotPermutation);
    }

    VerificationReport::from_failures(failures)
}
