//! Exhaustive backtracking over the target set.
//!
//! Nothing here reuses the constructive pipeline; only the instance type and
//! [`verify_partition`](crate::zmod::verify_partition) are shared. The
//! oracle is the ground truth for tests and the engine for sweeping odd
//! moduli, where the existence of a partition is only conjectured.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::zmod::validate_instance;
use crate::zmod::{class_of, is_unit, Instance, Orientation, Pair, PairPartition, Parity, Residue};

/// Moduli above this cannot be represented by the bitmask search at all.
pub const HARD_LIMIT: u64 = 63;

pub const ENV_MAX_N: &str = "SEATING_ORACLE_MAX_N";
pub const ENV_SWEEP_EVEN: &str = "SEATING_SWEEP_MAX_EVEN";
pub const ENV_SWEEP_ODD: &str = "SEATING_SWEEP_MAX_ODD";

/// Size limits for exhaustive work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OracleBounds {
    /// Largest modulus for a single oracle solve or count.
    pub max_n: u64,
    /// Largest even modulus in a sweep.
    pub sweep_even: u64,
    /// Largest odd modulus in a sweep.
    pub sweep_odd: u64,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds {
            max_n: 31,
            sweep_even: 24,
            sweep_odd: 15,
        }
    }
}

impl OracleBounds {
    /// Defaults, overridden by `SEATING_ORACLE_MAX_N`, `SEATING_SWEEP_MAX_EVEN`
    /// and `SEATING_SWEEP_MAX_ODD` when set.
    pub fn from_env() -> Result<Self> {
        let mut b = Self::default();
        for (name, slot) in [
            (ENV_MAX_N, &mut b.max_n),
            (ENV_SWEEP_EVEN, &mut b.sweep_even),
            (ENV_SWEEP_ODD, &mut b.sweep_odd),
        ] {
            if let Ok(raw) = std::env::var(name) {
                *slot = raw.trim().parse().map_err(|_| Error::Parse {
                    position: 0,
                    message: format!("{name}={raw:?} is not a non-negative integer"),
                })?;
            }
        }
        Ok(b)
    }

    fn check_single(&self, modulus: u64) -> Result<()> {
        let bound = self.max_n.min(HARD_LIMIT);
        if modulus > bound {
            return Err(Error::TooLarge { modulus, bound });
        }
        Ok(())
    }
}

struct Backtrack<'a> {
    modulus: u64,
    ds: &'a [u64],
    classes: Vec<u64>,
    used: Vec<bool>,
    pairs: Vec<Pair>,
    full: u64,
}

impl Backtrack<'_> {
    fn run(&mut self, mask: u64) -> bool {
        if mask == self.full {
            return true;
        }
        let a = (!mask).trailing_zeros() as u64;
        let m = self.modulus;
        let mut tried: Vec<u64> = Vec::new();
        for j in 0..self.ds.len() {
            if self.used[j] || tried.contains(&self.classes[j]) {
                continue;
            }
            tried.push(self.classes[j]);
            let d = self.ds[j];
            let up = (a + d) % m;
            let down = (a + m - d) % m;
            for (b, orientation) in [(up, Orientation::BMinusA), (down, Orientation::AMinusB)] {
                if orientation == Orientation::AMinusB && down == up {
                    continue;
                }
                if mask & (1 << b) != 0 {
                    continue;
                }
                self.used[j] = true;
                self.pairs.push(Pair {
                    a,
                    b,
                    index: j,
                    orientation,
                });
                if self.run(mask | (1 << a) | (1 << b)) {
                    return true;
                }
                self.pairs.pop();
                self.used[j] = false;
            }
        }
        false
    }
}

/// Initial mask: every bit outside the target set is already "used".
fn start_mask(inst: &Instance) -> (u64, u64) {
    let m = inst.modulus();
    let full = (1u64 << m) - 1;
    let mask = if inst.parity() == Parity::Odd { 1 } else { 0 };
    (mask, full)
}

/// First partition in search order, or `None` if there is none.
///
/// The smallest uncovered element `a` is paired with `a + d_j`, then
/// `a - d_j`, for each unused `j` in increasing order. Among unused indices
/// with the same difference class only the lowest is tried.
pub fn oracle_solve(inst: &Instance, bounds: &OracleBounds) -> Result<Option<PairPartition>> {
    bounds.check_single(inst.modulus())?;
    let ds = inst.difference_values();
    let m = inst.modulus();
    let (mask, full) = start_mask(inst);
    let mut bt = Backtrack {
        modulus: m,
        classes: ds.iter().map(|&d| class_of(d, m)).collect(),
        ds: &ds,
        used: vec![false; ds.len()],
        pairs: Vec::with_capacity(ds.len()),
        full,
    };
    if bt.run(mask) {
        Ok(Some(PairPartition {
            instance: inst.clone(),
            pairs: bt.pairs,
        }))
    } else {
        Ok(None)
    }
}

fn count_from(mask: u64, full: u64, m: u64, classes: &mut [(u64, usize)]) -> u64 {
    if mask == full {
        return 1;
    }
    let a = (!mask).trailing_zeros() as u64;
    let mut total = 0;
    for k in 0..classes.len() {
        let (c, left) = classes[k];
        if left == 0 {
            continue;
        }
        let up = (a + c) % m;
        let down = (a + m - c) % m;
        let partners: &[u64] = if up == down { &[up] } else { &[up, down] };
        for &b in partners {
            if mask & (1 << b) != 0 {
                continue;
            }
            classes[k].1 -= 1;
            total += count_from(mask | (1 << a) | (1 << b), full, m, classes);
            classes[k].1 += 1;
        }
    }
    total
}

/// Number of partitions (sets of unordered pairs) whose difference classes
/// match the input's classes as a multiset.
pub fn oracle_count(inst: &Instance, bounds: &OracleBounds) -> Result<u64> {
    bounds.check_single(inst.modulus())?;
    let m = inst.modulus();
    let mut classes: Vec<(u64, usize)> = Vec::new();
    for d in inst.difference_values() {
        let c = class_of(d, m);
        match classes.iter_mut().find(|(k, _)| *k == c) {
            Some(entry) => entry.1 += 1,
            None => classes.push((c, 1)),
        }
    }
    classes.sort_unstable();
    let (mask, full) = start_mask(inst);
    Ok(count_from(mask, full, m, &mut classes))
}

/// Class-level acceptance check, independent of pair annotations: the pairs
/// cover the target set exactly once and their difference classes equal the
/// input's classes as a multiset.
pub fn accepts(inst: &Instance, pairs: &[(u64, u64)]) -> bool {
    let m = inst.modulus();
    let mut elements: Vec<u64> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    elements.sort_unstable();
    if !elements.iter().copied().eq(inst.target_set()) {
        return false;
    }
    let mut got: Vec<u64> = pairs
        .iter()
        .map(|&(a, b)| class_of((a + m - b) % m, m))
        .collect();
    let mut want: Vec<u64> = inst
        .difference_values()
        .into_iter()
        .map(|d| class_of(d, m))
        .collect();
    got.sort_unstable();
    want.sort_unstable();
    got == want
}

/// All units of `Z/m` in increasing order.
pub fn units(m: u64) -> Vec<u64> {
    (1..m)
        .filter(|&d| Residue::new(d, m).map(is_unit).unwrap_or(false))
        .collect()
}

/// Nondecreasing sequences of length `k` over `items`.
pub fn multisets(items: &[u64], k: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    if items.is_empty() {
        if k == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut idx = vec![0usize; k];
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        // advance to the next nondecreasing index vector
        let Some(pos) = (0..k).rev().find(|&p| idx[p] + 1 < items.len()) else {
            return out;
        };
        let next = idx[pos] + 1;
        idx[pos..].iter_mut().for_each(|x| *x = next);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusStats {
    #[serde(rename = "N")]
    pub modulus: u64,
    pub instances: usize,
    pub failures: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    #[serde(rename = "N")]
    pub modulus: u64,
    pub differences: Vec<u64>,
}

/// Evidence gathered by [`explore`]. An empty `failures` list means every
/// examined instance admitted a partition; it proves nothing beyond the range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplorationReport {
    pub parity: Parity,
    pub range: Vec<u64>,
    pub per_modulus: Vec<ModulusStats>,
    pub total_instances: usize,
    pub failures: Vec<Counterexample>,
    pub wall_seconds: f64,
}

/// Runs [`oracle_solve`] on every multiset of `floor(N/2)` units for each `N`
/// in `from..=to` of the given parity.
///
/// Instances are processed on a rayon pool (`jobs` threads, or the global
/// pool when `None`); results are merged in enumeration order.
pub fn explore(
    from: u64,
    to: u64,
    parity: Parity,
    bounds: &OracleBounds,
    jobs: Option<usize>,
) -> Result<ExplorationReport> {
    if from > to {
        return Err(Error::Precondition(format!("empty range {from}..={to}")));
    }
    let bound = match parity {
        Parity::Even => bounds.sweep_even,
        Parity::Odd => bounds.sweep_odd,
    }
    .min(HARD_LIMIT);
    if to > bound {
        return Err(Error::TooLarge { modulus: to, bound });
    }
    let wanted = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    let range: Vec<u64> = (from.max(2)..=to).filter(|m| m % 2 == wanted).collect();

    let single = OracleBounds {
        max_n: bound,
        ..*bounds
    };
    let run = || -> Result<ExplorationReport> {
        let wall = Instant::now();
        let mut per_modulus = Vec::with_capacity(range.len());
        let mut failures = Vec::new();
        for &m in &range {
            let started = Instant::now();
            let all = multisets(&units(m), (m / 2) as usize);
            let outcomes: Vec<Result<Option<Counterexample>>> = all
                .par_iter()
                .map(|ds| {
                    let signed: Vec<i64> = ds.iter().map(|&d| d as i64).collect();
                    let inst = validate_instance(m as i64, &signed)?;
                    Ok(oracle_solve(&inst, &single)?
                        .is_none()
                        .then(|| Counterexample {
                            modulus: m,
                            differences: ds.clone(),
                        }))
                })
                .collect();
            let mut local = 0;
            for outcome in outcomes {
                if let Some(f) = outcome? {
                    failures.push(f);
                    local += 1;
                }
            }
            per_modulus.push(ModulusStats {
                modulus: m,
                instances: all.len(),
                failures: local,
                seconds: started.elapsed().as_secs_f64(),
            });
        }
        Ok(ExplorationReport {
            parity,
            range: range.clone(),
            total_instances: per_modulus.iter().map(|s| s.instances).sum(),
            per_modulus,
            failures,
            wall_seconds: wall.elapsed().as_secs_f64(),
        })
    };

    match jobs {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Precondition(format!("cannot start worker pool: {e}")))?
            .install(run),
        None => run(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zmod::verify_partition;

    fn inst(m: i64, ds: &[i64]) -> Instance {
        validate_instance(m, ds).unwrap()
    }

    fn simple_pairs(p: &PairPartition) -> Vec<(u64, u64)> {
        p.pairs.iter().map(|q| (q.a, q.b)).collect()
    }

    #[test]
    fn first_solution_order() {
        let b = OracleBounds::default();
        let p = oracle_solve(&inst(4, &[1, 1]), &b).unwrap().unwrap();
        assert_eq!(simple_pairs(&p), vec![(0, 1), (2, 3)]);
        assert!(verify_partition(&p).valid);

        let p = oracle_solve(&inst(2, &[1]), &b).unwrap().unwrap();
        assert_eq!(simple_pairs(&p), vec![(0, 1)]);

        let p = oracle_solve(&inst(5, &[1, 1]), &b).unwrap().unwrap();
        assert_eq!(simple_pairs(&p), vec![(1, 2), (3, 4)]);
        assert!(verify_partition(&p).valid);
    }

    #[test]
    fn count_fixtures() {
        let b = OracleBounds::default();
        assert_eq!(oracle_count(&inst(4, &[1, 1]), &b).unwrap(), 2);
        assert_eq!(oracle_count(&inst(4, &[1, 3]), &b).unwrap(), 2);
        assert_eq!(oracle_count(&inst(6, &[1, 1, 1]), &b).unwrap(), 2);
        assert_eq!(oracle_count(&inst(2, &[1]), &b).unwrap(), 1);
        // odd: only {1,2} exists in Z/3 \ {0}
        assert_eq!(oracle_count(&inst(3, &[1]), &b).unwrap(), 1);
    }

    #[test]
    fn bounds_enforced() {
        let b = OracleBounds::default();
        let big = inst(33, &[1; 16]);
        assert_eq!(
            oracle_solve(&big, &b).unwrap_err(),
            Error::TooLarge {
                modulus: 33,
                bound: 31
            }
        );
        let huge = OracleBounds { max_n: 1000, ..b };
        let big = inst(65, &[1; 32]);
        assert_eq!(
            oracle_count(&big, &huge).unwrap_err(),
            Error::TooLarge {
                modulus: 65,
                bound: HARD_LIMIT
            }
        );
        assert!(matches!(
            explore(2, 26, Parity::Even, &b, Some(1)),
            Err(Error::TooLarge { .. })
        ));
        assert!(matches!(
            explore(9, 3, Parity::Odd, &b, Some(1)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn accepts_is_class_level() {
        let i = inst(4, &[1, 3]);
        assert!(accepts(&i, &[(0, 1), (2, 3)]));
        assert!(accepts(&i, &[(3, 0), (1, 2)]));
        assert!(!accepts(&i, &[(0, 2), (1, 3)]));
        assert!(!accepts(&i, &[(0, 1), (1, 2)]));
        let odd = inst(5, &[1, 2]);
        assert!(!accepts(&odd, &[(1, 2), (4, 2)]));
        assert!(!accepts(&odd, &[(1, 3), (2, 4)]));
        assert!(!accepts(&odd, &[(1, 2), (3, 0)]));
        assert!(accepts(&odd, &[(2, 3), (4, 1)]));
    }

    #[test]
    fn multiset_enumeration() {
        assert_eq!(
            multisets(&[1, 3], 2),
            vec![vec![1, 1], vec![1, 3], vec![3, 3]]
        );
        assert_eq!(multisets(&[1, 5, 7, 11, 13, 17, 19, 23], 12).len(), 50388);
        assert_eq!(multisets(&units(15), 7).len(), 3432);
        assert_eq!(multisets(&[], 0), vec![Vec::<u64>::new()]);
        assert_eq!(units(12), vec![1, 5, 7, 11]);
    }

    #[test]
    fn small_sweeps_are_clean() {
        let b = OracleBounds::default();
        let even = explore(2, 10, Parity::Even, &b, Some(2)).unwrap();
        assert_eq!(even.range, vec![2, 4, 6, 8, 10]);
        assert!(even.failures.is_empty());
        let odd = explore(1, 9, Parity::Odd, &b, None).unwrap();
        assert_eq!(odd.range, vec![3, 5, 7, 9]);
        assert!(odd.failures.is_empty());
        assert_eq!(odd.per_modulus[0].instances, 2);
    }
}
