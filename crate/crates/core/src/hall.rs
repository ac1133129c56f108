//! Realizing a zero-sum sequence over `Z/n` as the differences of a permutation.
//!
//! Given `e_1, ..., e_n` in `Z/n` with `sum e_i = 0`, Hall's theorem on
//! abelian groups says there is a permutation `c` of `Z/n` whose difference
//! multiset `{i - c_i}` is exactly `{e_i}`. No algorithm comes with the
//! theorem, so [`hall_realize`] searches for `c`. Existence makes the search
//! total: running out of candidates is reported as an internal error.
//!
//! Positions and `c`-values are 0-based here: position `i` in `0..n` is
//! paired with `c[i]` in `0..n`, and `(i - c[i]) mod n` is the difference it
//! carries.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// The sequence `e_i` together with its multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HalvedDifferences {
    modulus: usize,
    values: Vec<usize>,
    #[serde(skip)]
    multiplicity: Vec<usize>,
}

impl HalvedDifferences {
    /// Wraps `values` (reduced mod `modulus`), requiring `len == modulus` and zero sum.
    pub fn new(modulus: usize, values: Vec<usize>) -> Result<Self> {
        if modulus == 0 || values.len() != modulus {
            return Err(Error::Precondition(format!(
                "need exactly {modulus} values over Z/{modulus}, got {}",
                values.len()
            )));
        }
        let values: Vec<usize> = values.into_iter().map(|v| v % modulus).collect();
        let sum = values.iter().fold(0usize, |acc, &v| (acc + v) % modulus);
        if sum != 0 {
            return Err(Error::Precondition(format!(
                "values sum to {sum}, not 0, modulo {modulus}"
            )));
        }
        let mut multiplicity = vec![0; modulus];
        for &v in &values {
            multiplicity[v] += 1;
        }
        Ok(HalvedDifferences {
            modulus,
            values,
            multiplicity,
        })
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn multiplicity(&self, r: usize) -> usize {
        self.multiplicity.get(r).copied().unwrap_or(0)
    }

    /// The common value, if every `e_i` is equal.
    fn constant(&self) -> Option<usize> {
        let first = self.values[0];
        (self.multiplicity[first] == self.modulus).then_some(first)
    }
}

/// `e_i = ((d_i + 1) mod 2n) / 2 mod n` for odd signed differences `d_i` mod `2n`.
pub fn halved_differences(signed_ds: &[u64], modulus: u64) -> Result<HalvedDifferences> {
    if modulus == 0 || !modulus.is_multiple_of(2) || signed_ds.len() as u64 != modulus / 2 {
        return Err(Error::Precondition(format!(
            "expected {} signed differences modulo an even modulus, got {} modulo {modulus}",
            modulus / 2,
            signed_ds.len()
        )));
    }
    let n = (modulus / 2) as usize;
    let mut values = Vec::with_capacity(n);
    for (i, &d) in signed_ds.iter().enumerate() {
        let d = d % modulus;
        if d.is_multiple_of(2) {
            return Err(Error::Precondition(format!(
                "signed difference #{} ({d}) is even",
                i + 1
            )));
        }
        values.push((((d + 1) % modulus) / 2) as usize % n);
    }
    HalvedDifferences::new(n, values).map_err(|e| {
        Error::internal(
            "halved differences do not sum to zero",
            format!("{e}; N={modulus} signed={signed_ds:?}"),
        )
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchConfig {
    pub seed: u64,
    /// Search nodes per attempt before restarting.
    pub restart_budget: u64,
    /// Attempts per budget level; the budget doubles after that many.
    pub max_restarts: u32,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 0,
            restart_budget: 1_000_000,
            max_restarts: 8,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(seed: u64) -> Self {
        SearchConfig {
            seed,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        if self.restart_budget == 0 || self.max_restarts == 0 {
            return Err(Error::Precondition(
                "restart_budget and max_restarts must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A permutation `c` and an assignment `sigma` with `(i - c[i]) mod n = e[sigma[i]]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HallSolution {
    pub c: Vec<usize>,
    pub sigma: Vec<usize>,
}

fn is_permutation(p: &[usize], n: usize) -> bool {
    if p.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    p.iter()
        .all(|&x| x < n && !std::mem::replace(&mut seen[x], true))
}

pub fn verify_hall(e: &HalvedDifferences, sol: &HallSolution) -> bool {
    let n = e.modulus;
    is_permutation(&sol.c, n)
        && is_permutation(&sol.sigma, n)
        && (0..n).all(|i| (i + n - sol.c[i]) % n == e.values[sol.sigma[i]])
}

/// Assigns input indices to positions, matching equal values in increasing index order.
fn assign_sigma(e: &HalvedDifferences, carried: &[usize]) -> Vec<usize> {
    let n = e.modulus;
    let mut queues: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, &v) in e.values.iter().enumerate().rev() {
        queues[v].push(j);
    }
    carried
        .iter()
        .map(|&r| queues[r].pop().expect("carried multiset matches input"))
        .collect()
}

/// Finds `c` and `sigma` realizing `e`.
///
/// A constant sequence `r` is answered by the rotation `c[i] = i - r`.
/// Otherwise the search runs in rounds. Each round makes `max_restarts`
/// local-repair attempts of `budget` swaps each, then one complete
/// backtracking attempt limited to `budget` nodes; the budget doubles after
/// every round. The search never gives up on its own.
pub fn hall_realize(e: &HalvedDifferences, cfg: &SearchConfig) -> Result<HallSolution> {
    cfg.check()?;
    let n = e.modulus;

    let carried = if let Some(r) = e.constant() {
        vec![r; n]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut budget = cfg.restart_budget;
        let mut attempt = 0u32;
        'rounds: loop {
            for _ in 0..cfg.max_restarts {
                let mut repair = Repair::new(e, &mut rng, attempt == 0);
                attempt += 1;
                if repair.run(budget, &mut rng) {
                    break 'rounds repair.carried();
                }
            }
            let mut search = Search::new(e, budget, rng.gen());
            match search.run() {
                Outcome::Found => break 'rounds search.carried(),
                Outcome::OutOfBudget => {}
                Outcome::Exhausted => {
                    return Err(Error::internal(
                        "exhaustive search found no realization of a zero-sum sequence",
                        format!("n={n} e={:?} cfg={cfg:?}", e.values),
                    ))
                }
            }
            budget = budget.saturating_mul(2);
        }
    };

    let c = carried
        .iter()
        .enumerate()
        .map(|(i, &r)| (i + n - r) % n)
        .collect();
    let sol = HallSolution {
        c,
        sigma: assign_sigma(e, &carried),
    };
    if !verify_hall(e, &sol) {
        return Err(Error::internal(
            "search produced an invalid realization",
            format!("n={n} e={:?} sol={sol:?}", e.values),
        ));
    }
    Ok(sol)
}

/// Probability of a random (rather than best) repair move.
const REPAIR_NOISE: f64 = 0.1;

/// Local repair on a full permutation.
///
/// `excess[r]` is how many more positions carry `r` than `e` asks for
/// (negative when `r` is missing). A step picks a position carrying a
/// surplus residue, and a missing residue `r` for it: swapping `c` with
/// the position that currently owns value `i - r` makes `i` carry `r`.
/// The swap with the lowest resulting cost is taken, or a random one with
/// probability [`REPAIR_NOISE`].
struct Repair {
    n: usize,
    c: Vec<usize>,
    owner: Vec<usize>,
    excess: Vec<i64>,
    missing: i64,
}

impl Repair {
    fn new(e: &HalvedDifferences, rng: &mut ChaCha8Rng, rotate: bool) -> Self {
        let n = e.modulus;
        let c: Vec<usize> = if rotate {
            // rotation by the most frequent value already carries it everywhere
            let top = (0..n).max_by_key(|&r| (e.multiplicity[r], n - r)).unwrap();
            (0..n).map(|i| (i + n - top) % n).collect()
        } else {
            let mut c: Vec<usize> = (0..n).collect();
            c.shuffle(rng);
            c
        };
        let mut owner = vec![0; n];
        let mut excess: Vec<i64> = e.multiplicity.iter().map(|&m| -(m as i64)).collect();
        for (i, &v) in c.iter().enumerate() {
            owner[v] = i;
            excess[(i + n - v) % n] += 1;
        }
        let missing = excess.iter().filter(|&&x| x < 0).map(|&x| -x).sum();
        Repair {
            n,
            c,
            owner,
            excess,
            missing,
        }
    }

    fn carried_at(&self, i: usize) -> usize {
        (i + self.n - self.c[i]) % self.n
    }

    fn carried(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.carried_at(i)).collect()
    }

    /// Change in `missing` if positions `i` and `j` swapped values.
    fn delta(&mut self, i: usize, j: usize) -> i64 {
        let n = self.n;
        let old = [self.carried_at(i), self.carried_at(j)];
        let new = [(i + n - self.c[j]) % n, (j + n - self.c[i]) % n];
        let touched = [old[0], old[1], new[0], new[1]];
        let before: i64 = self.missing_among(&touched);
        old.iter().for_each(|&r| self.excess[r] -= 1);
        new.iter().for_each(|&r| self.excess[r] += 1);
        let after: i64 = self.missing_among(&touched);
        old.iter().for_each(|&r| self.excess[r] += 1);
        new.iter().for_each(|&r| self.excess[r] -= 1);
        after - before
    }

    fn missing_among(&self, residues: &[usize; 4]) -> i64 {
        let mut total = 0;
        for (k, &r) in residues.iter().enumerate() {
            if !residues[..k].contains(&r) && self.excess[r] < 0 {
                total -= self.excess[r];
            }
        }
        total
    }

    fn swap(&mut self, i: usize, j: usize) {
        let d = self.delta(i, j);
        let (a, b) = (self.carried_at(i), self.carried_at(j));
        self.excess[a] -= 1;
        self.excess[b] -= 1;
        self.c.swap(i, j);
        self.owner[self.c[i]] = i;
        self.owner[self.c[j]] = j;
        let (a, b) = (self.carried_at(i), self.carried_at(j));
        self.excess[a] += 1;
        self.excess[b] += 1;
        self.missing += d;
    }

    fn run(&mut self, steps: u64, rng: &mut ChaCha8Rng) -> bool {
        let n = self.n;
        let mut short: Vec<usize> = Vec::new();
        for _ in 0..steps {
            if self.missing == 0 {
                return true;
            }
            let i = loop {
                let i = rng.gen_range(0..n);
                if self.excess[self.carried_at(i)] > 0 {
                    break i;
                }
            };
            short.clear();
            short.extend((0..n).filter(|&r| self.excess[r] < 0));
            let r = if rng.gen_bool(REPAIR_NOISE) {
                short[rng.gen_range(0..short.len())]
            } else {
                let mut best = (i64::MAX, 0u32, 0usize);
                for &r in &short {
                    let j = self.owner[(i + n - r) % n];
                    let key = (self.delta(i, j), rng.gen::<u32>());
                    if key < (best.0, best.1) {
                        best = (key.0, key.1, r);
                    }
                }
                best.2
            };
            let j = self.owner[(i + n - r) % n];
            self.swap(i, j);
        }
        self.missing == 0
    }
}

enum Outcome {
    Found,
    OutOfBudget,
    Exhausted,
}

#[derive(Clone, Copy)]
enum Branch {
    Position(usize),
    Value(usize),
}

/// One budgeted attempt.
///
/// Each position must carry one residue and each `c`-value must be hit
/// once; position `i` carrying residue `r` uses value `i - r`. The search
/// always branches on the position or value with the fewest live options,
/// and prunes when a residue has fewer free cells than copies left.
struct Search {
    n: usize,
    remaining: Vec<usize>,
    carried: Vec<Option<usize>>,
    value_used: Vec<bool>,
    nodes: u64,
    budget: u64,
    rng: ChaCha8Rng,
    // scratch, reused across nodes
    cells: Vec<usize>,
}

impl Search {
    fn new(e: &HalvedDifferences, budget: u64, seed: u64) -> Self {
        let n = e.modulus;
        Search {
            n,
            remaining: e.multiplicity.clone(),
            carried: vec![None; n],
            value_used: vec![false; n],
            nodes: 0,
            budget,
            rng: ChaCha8Rng::seed_from_u64(seed),
            cells: vec![0; n],
        }
    }

    fn carried(&self) -> Vec<usize> {
        self.carried
            .iter()
            .map(|r| r.expect("complete assignment"))
            .collect()
    }

    fn run(&mut self) -> Outcome {
        let n = self.n;
        self.dfs(n)
    }

    fn position_free(&self, i: usize) -> bool {
        self.carried[i].is_none()
    }

    /// Picks the most constrained branch point, or `None` at a dead end.
    fn select(&mut self, live: &[usize]) -> Option<Branch> {
        let n = self.n;
        self.cells.iter_mut().for_each(|c| *c = 0);
        let mut best: Option<(usize, u32, Branch)> = None;
        let mut consider = |count: usize, branch: Branch, rng: &mut ChaCha8Rng| {
            let key = rng.gen::<u32>();
            match best {
                Some((c, k, _)) if (c, k) <= (count, key) => {}
                _ => best = Some((count, key, branch)),
            }
        };

        for i in 0..n {
            if !self.position_free(i) {
                continue;
            }
            let mut count = 0;
            for &r in live {
                if !self.value_used[(i + n - r) % n] {
                    count += 1;
                    self.cells[r] += 1;
                }
            }
            if count == 0 {
                return None;
            }
            consider(count, Branch::Position(i), &mut self.rng);
        }
        for v in 0..n {
            if self.value_used[v] {
                continue;
            }
            let count = live
                .iter()
                .filter(|&&r| self.position_free((v + r) % n))
                .count();
            if count == 0 {
                return None;
            }
            consider(count, Branch::Value(v), &mut self.rng);
        }
        if live.iter().any(|&r| self.cells[r] < self.remaining[r]) {
            return None;
        }
        best.map(|(_, _, b)| b)
    }

    fn dfs(&mut self, left: usize) -> Outcome {
        if left == 0 {
            return Outcome::Found;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Outcome::OutOfBudget;
        }
        let n = self.n;
        let live: Vec<usize> = (0..n).filter(|&r| self.remaining[r] > 0).collect();
        let Some(branch) = self.select(&live) else {
            return Outcome::Exhausted;
        };

        // (position, residue) choices for the chosen branch point
        let mut options: Vec<(usize, usize, usize, u32)> = live
            .iter()
            .filter_map(|&r| {
                let (i, v) = match branch {
                    Branch::Position(i) => (i, (i + n - r) % n),
                    Branch::Value(v) => ((v + r) % n, v),
                };
                (self.position_free(i) && !self.value_used[v]).then_some((i, r, v, 0))
            })
            .collect();
        // tightest residues first, random among ties
        for o in options.iter_mut() {
            o.3 = self.rng.gen();
        }
        options.sort_by_key(|&(_, r, _, key)| (self.cells[r] - self.remaining[r], key));

        for (i, r, v, _) in options {
            self.carried[i] = Some(r);
            self.value_used[v] = true;
            self.remaining[r] -= 1;
            let out = self.dfs(left - 1);
            if let Outcome::Found = out {
                return out;
            }
            self.carried[i] = None;
            self.value_used[v] = false;
            self.remaining[r] += 1;
            if let Outcome::OutOfBudget = out {
                return out;
            }
        }
        Outcome::Exhausted
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hd(n: usize, values: &[usize]) -> HalvedDifferences {
        HalvedDifferences::new(n, values.to_vec()).unwrap()
    }

    /// 1-based `c` as written by hand, to 0-based.
    fn zero_based(c: &[usize]) -> Vec<usize> {
        c.iter().map(|x| x - 1).collect()
    }

    #[test]
    fn halving_examples() {
        assert_eq!(halved_differences(&[1], 2).unwrap().values(), &[0]);
        assert_eq!(
            halved_differences(&[1, 1, 1], 6).unwrap().values(),
            &[1, 1, 1]
        );
        assert_eq!(halved_differences(&[1, 1], 4).unwrap().values(), &[1, 1]);
        assert_eq!(
            halved_differences(&[5, 5, 5], 6).unwrap().values(),
            &[0, 0, 0]
        );
    }

    #[test]
    fn halving_rejects_even_values() {
        assert!(matches!(
            halved_differences(&[1, 2], 4),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn halving_detects_bad_sign_choice() {
        // 1 + 3 = 0 mod 4, not n = 2
        assert!(matches!(
            halved_differences(&[1, 3], 4),
            Err(Error::Internal { .. })
        ));
    }

    #[test]
    fn new_rejects_nonzero_sum() {
        assert!(HalvedDifferences::new(3, vec![1, 1, 0]).is_err());
        assert!(HalvedDifferences::new(3, vec![1, 2]).is_err());
        assert!(HalvedDifferences::new(0, vec![]).is_err());
    }

    #[test]
    fn constant_fast_path() {
        let e = hd(3, &[1, 1, 1]);
        let sol = hall_realize(&e, &SearchConfig::default()).unwrap();
        assert_eq!(sol.c, zero_based(&[3, 1, 2]));
        assert_eq!(sol.sigma, vec![0, 1, 2]);
    }

    #[test]
    fn trivial_group() {
        let sol = hall_realize(&hd(1, &[0]), &SearchConfig::default()).unwrap();
        assert_eq!(sol.c, vec![0]);
        assert_eq!(sol.sigma, vec![0]);
    }

    #[test]
    fn distinct_values_mod_three() {
        let e = hd(3, &[0, 1, 2]);
        let sol = hall_realize(&e, &SearchConfig::default()).unwrap();
        assert!(verify_hall(&e, &sol));
    }

    #[test]
    fn verify_examples() {
        let e = hd(3, &[1, 1, 1]);
        let ok = HallSolution {
            c: zero_based(&[3, 1, 2]),
            sigma: vec![0, 1, 2],
        };
        assert!(verify_hall(&e, &ok));
        let identity = HallSolution {
            c: vec![0, 1, 2],
            sigma: vec![0, 1, 2],
        };
        assert!(!verify_hall(&e, &identity));

        // c = (1,3,2) carries (0, 2, 1); sigma must point at those values
        let e = hd(3, &[0, 1, 2]);
        let c = zero_based(&[1, 3, 2]);
        assert!(verify_hall(
            &e,
            &HallSolution {
                c: c.clone(),
                sigma: vec![0, 2, 1]
            }
        ));
        assert!(!verify_hall(
            &e,
            &HallSolution {
                c,
                sigma: vec![0, 1, 2]
            }
        ));
    }

    #[test]
    fn verify_rejects_non_permutations() {
        let e = hd(2, &[1, 1]);
        let sol = HallSolution {
            c: vec![1, 1],
            sigma: vec![0, 1],
        };
        assert!(!verify_hall(&e, &sol));
        let sol = HallSolution {
            c: vec![1, 0],
            sigma: vec![0, 0],
        };
        assert!(!verify_hall(&e, &sol));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let e = hd(9, &[0, 1, 1, 2, 3, 5, 8, 4, 3]);
        let a = hall_realize(&e, &SearchConfig::with_seed(7)).unwrap();
        let b = hall_realize(&e, &SearchConfig::with_seed(7)).unwrap();
        assert_eq!(a, b);
        assert!(verify_hall(&e, &a));
    }

    #[test]
    fn tiny_budget_still_succeeds() {
        let e = hd(12, &[0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 11, 0]);
        let cfg = SearchConfig {
            seed: 3,
            restart_budget: 1,
            max_restarts: 1,
        };
        let sol = hall_realize(&e, &cfg).unwrap();
        assert!(verify_hall(&e, &sol));
    }

    fn zero_sum_sequences(n: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = vec![0usize; n];
        loop {
            if cur.iter().sum::<usize>() % n == 0 {
                out.push(cur.clone());
            }
            let Some(p) = (0..n).rev().find(|&p| cur[p] + 1 < n) else {
                return out;
            };
            let next = cur[p] + 1;
            cur[p..].iter_mut().for_each(|x| *x = next);
        }
    }

    fn finish(e: &HalvedDifferences, carried: Vec<usize>) -> HallSolution {
        let n = e.modulus();
        HallSolution {
            c: carried
                .iter()
                .enumerate()
                .map(|(i, &r)| (i + n - r) % n)
                .collect(),
            sigma: assign_sigma(e, &carried),
        }
    }

    #[test]
    fn backtracking_alone_is_complete_on_small_groups() {
        for n in 1..=6 {
            for values in zero_sum_sequences(n) {
                let e = hd(n, &values);
                let mut search = Search::new(&e, u64::MAX, 11);
                assert!(matches!(search.run(), Outcome::Found), "{values:?}");
                assert!(verify_hall(&e, &finish(&e, search.carried())));
            }
        }
    }

    #[test]
    fn repair_alone_fixes_near_constant_sequences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut values = vec![4usize; 40];
        values[3] = 5;
        values[30] = 3;
        let e = hd(40, &values);
        let mut repair = Repair::new(&e, &mut rng, true);
        assert!(repair.run(10_000, &mut rng));
        assert!(verify_hall(&e, &finish(&e, repair.carried())));
    }

    #[test]
    fn repair_cost_tracking_matches_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let e = hd(9, &[0, 1, 1, 2, 3, 5, 8, 4, 3]);
        let mut repair = Repair::new(&e, &mut rng, false);
        for _ in 0..200 {
            let i = rng.gen_range(0..9);
            let j = rng.gen_range(0..9);
            if i != j {
                repair.swap(i, j);
            }
            let recount: i64 = repair.excess.iter().filter(|&&x| x < 0).map(|&x| -x).sum();
            assert_eq!(repair.missing, recount);
        }
    }

    #[test]
    fn zero_config_rejected() {
        let cfg = SearchConfig {
            seed: 0,
            restart_budget: 0,
            max_restarts: 1,
        };
        assert!(hall_realize(&hd(1, &[0]), &cfg).is_err());
    }
}
