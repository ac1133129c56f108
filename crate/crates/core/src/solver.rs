//! The even-modulus pipeline: signs, halving, Hall realization, assembly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hall::{hall_realize, halved_differences, HallSolution, SearchConfig};
use crate::oracle::{self, OracleBounds};
use crate::signflip::{choose_signs, SignVector};
use crate::zmod::{verify_partition, Instance, Orientation, Pair, PairPartition, Parity};

/// Intermediate values of one solve, kept for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub target: usize,
    pub witness: Vec<usize>,
    pub halved: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignedPartition {
    pub partition: PairPartition,
    pub signs: SignVector,
    pub hall: HallSolution,
    pub trace: Trace,
}

fn require_even(inst: &Instance) -> Result<()> {
    if inst.parity() != Parity::Even {
        return Err(Error::WrongParity {
            expected: Parity::Even,
        });
    }
    Ok(())
}

/// Pairs position `i` (1-based) as `{2i, 2 c_i + 1} mod 2n`.
///
/// The pair realizes `d_{sigma(i)}` as even minus odd when that index has
/// sign `+1`, and as odd minus even otherwise.
pub fn assemble(
    inst: &Instance,
    signs: &SignVector,
    sol: &HallSolution,
) -> Result<AssignedPartition> {
    require_even(inst)?;
    let modulus = inst.modulus();
    let n = inst.n();
    if signs.signs.len() != n || sol.c.len() != n || sol.sigma.len() != n {
        return Err(Error::Precondition(format!(
            "signs and Hall solution must have length {n}"
        )));
    }

    let pairs = (0..n)
        .map(|p| {
            let even = 2 * (p as u64 + 1) % modulus;
            let odd = (2 * sol.c[p] as u64 + 3) % modulus;
            let index = sol.sigma[p];
            let orientation = if signs.signs[index] > 0 {
                Orientation::AMinusB
            } else {
                Orientation::BMinusA
            };
            Pair {
                a: even,
                b: odd,
                index,
                orientation,
            }
        })
        .collect();
    let partition = PairPartition {
        instance: inst.clone(),
        pairs,
    };
    let report = verify_partition(&partition);
    if !report.valid {
        return Err(Error::internal(
            "assembled partition failed verification",
            format!(
                "N={modulus} ds={:?} signs={:?} c={:?} sigma={:?} failures={:?}",
                inst.difference_values(),
                signs.signs,
                sol.c,
                sol.sigma,
                report.failures
            ),
        ));
    }

    Ok(AssignedPartition {
        partition,
        signs: signs.clone(),
        hall: sol.clone(),
        trace: Trace {
            target: signs.target,
            witness: signs.witness_set.clone(),
            halved: Vec::new(),
        },
    })
}

/// Solves an even instance. Deterministic for a fixed `cfg.seed`.
pub fn solve(inst: &Instance, cfg: &SearchConfig) -> Result<AssignedPartition> {
    require_even(inst)?;
    let signs = choose_signs(inst)?;
    let signed = signs.apply(&inst.difference_values(), inst.modulus());
    let halved = halved_differences(&signed, inst.modulus())?;
    let sol = hall_realize(&halved, cfg)?;
    let mut out = assemble(inst, &signs, &sol)?;
    out.trace.halved = halved.values().to_vec();
    Ok(out)
}

/// Odd moduli have no construction; this runs the exhaustive oracle.
///
/// `Ok(None)` means no partition exists, which would contradict the
/// conjecture for this `N`.
pub fn solve_odd(inst: &Instance, bounds: &OracleBounds) -> Result<Option<PairPartition>> {
    if inst.parity() != Parity::Odd {
        return Err(Error::WrongParity {
            expected: Parity::Odd,
        });
    }
    oracle::oracle_solve(inst, bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zmod::validate_instance;

    fn pairs_of(p: &AssignedPartition) -> Vec<(u64, u64, usize, Orientation)> {
        p.partition
            .pairs
            .iter()
            .map(|q| (q.a, q.b, q.index, q.orientation))
            .collect()
    }

    #[test]
    fn modulus_two() {
        let inst = validate_instance(2, &[1]).unwrap();
        let out = solve(&inst, &SearchConfig::default()).unwrap();
        assert_eq!(pairs_of(&out), vec![(0, 1, 0, Orientation::AMinusB)]);
    }

    #[test]
    fn assemble_by_hand_mod_four() {
        // signed differences (1, 1) with c = (2, 1)
        let inst = validate_instance(4, &[1, 1]).unwrap();
        let signs = SignVector {
            signs: vec![1, 1],
            witness_set: vec![0, 1],
            target: 0,
        };
        let sol = HallSolution {
            c: vec![1, 0],
            sigma: vec![0, 1],
        };
        let out = assemble(&inst, &signs, &sol).unwrap();
        assert_eq!(
            pairs_of(&out),
            vec![
                (2, 1, 0, Orientation::AMinusB),
                (0, 3, 1, Orientation::AMinusB)
            ]
        );
    }

    #[test]
    fn assemble_by_hand_mod_six() {
        let inst = validate_instance(6, &[1, 1, 1]).unwrap();
        let signs = SignVector {
            signs: vec![1, 1, 1],
            witness_set: vec![0, 1, 2],
            target: 0,
        };
        let sol = HallSolution {
            c: vec![2, 0, 1],
            sigma: vec![0, 1, 2],
        };
        let out = assemble(&inst, &signs, &sol).unwrap();
        let sets: Vec<_> = out
            .partition
            .pairs
            .iter()
            .map(|p| (p.a.min(p.b), p.a.max(p.b)))
            .collect();
        assert_eq!(sets, vec![(1, 2), (3, 4), (0, 5)]);
    }

    #[test]
    fn assemble_rejects_inconsistent_input() {
        let inst = validate_instance(4, &[1, 1]).unwrap();
        let signs = SignVector {
            signs: vec![1, 1],
            witness_set: vec![0, 1],
            target: 0,
        };
        let sol = HallSolution {
            c: vec![0, 1],
            sigma: vec![0, 1],
        };
        assert!(matches!(
            assemble(&inst, &signs, &sol),
            Err(Error::Internal { .. })
        ));
    }

    #[test]
    fn solve_mod_four() {
        let inst = validate_instance(4, &[1, 3]).unwrap();
        let out = solve(&inst, &SearchConfig::default()).unwrap();
        assert_eq!(
            pairs_of(&out),
            vec![
                (2, 1, 0, Orientation::AMinusB),
                (0, 3, 1, Orientation::BMinusA)
            ]
        );
    }

    #[test]
    fn solve_mod_six() {
        let inst = validate_instance(6, &[1, 5, 1]).unwrap();
        let out = solve(&inst, &SearchConfig::default()).unwrap();
        assert_eq!(out.trace.halved, vec![0, 0, 0]);
        assert_eq!(
            pairs_of(&out),
            vec![
                (2, 3, 0, Orientation::BMinusA),
                (4, 5, 1, Orientation::AMinusB),
                (0, 1, 2, Orientation::BMinusA),
            ]
        );
    }

    #[test]
    fn parity_is_enforced() {
        let odd = validate_instance(5, &[1, 2]).unwrap();
        assert_eq!(
            solve(&odd, &SearchConfig::default()).unwrap_err(),
            Error::WrongParity {
                expected: Parity::Even
            }
        );
        let even = validate_instance(4, &[1, 1]).unwrap();
        assert_eq!(
            solve_odd(&even, &OracleBounds::default()).unwrap_err(),
            Error::WrongParity {
                expected: Parity::Odd
            }
        );
    }

    #[test]
    fn odd_examples() {
        let bounds = OracleBounds::default();
        let inst = validate_instance(3, &[1]).unwrap();
        let p = solve_odd(&inst, &bounds).unwrap().unwrap();
        assert_eq!((p.pairs[0].a, p.pairs[0].b), (1, 2));

        for (m, ds) in [(5, vec![1, 2]), (9, vec![1, 2, 4, 8])] {
            let inst = validate_instance(m, &ds).unwrap();
            let p = solve_odd(&inst, &bounds)
                .unwrap()
                .expect("partition exists");
            assert!(verify_partition(&p).valid);
        }

        let big = validate_instance(33, &[1; 16]).unwrap();
        assert!(matches!(
            solve_odd(&big, &bounds),
            Err(Error::TooLarge { .. })
        ));
    }
}
