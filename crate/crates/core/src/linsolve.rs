//! Exact sparse linear systems over ℚ, solved by fraction-free row reduction.
//!
//! Rows are scaled to primitive integer vectors and eliminated by integer
//! cross-multiplication; rationals only appear in the final back substitution.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::{denominator_lcm, Rational};

/// `Σ coeffs[j] · x_j = rhs`, with a human-readable provenance tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseRow {
    pub coeffs: BTreeMap<usize, Rational>,
    pub rhs: Rational,
    pub origin: String,
}

impl SparseRow {
    pub fn is_trivial(&self) -> bool {
        self.coeffs.is_empty() && self.rhs.is_zero()
    }

    /// `Σ a_j x_j - rhs`.
    pub fn residual(&self, x: &[Rational]) -> Rational {
        let lhs: Rational = self.coeffs.iter().map(|(j, a)| a * &x[*j]).sum();
        lhs - &self.rhs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Unique(Vec<Rational>),
    /// Rank deficient: the listed unknowns are free, with one kernel vector per free unknown.
    NonUnique {
        rank: usize,
        free: Vec<usize>,
        kernel: Vec<Vec<Rational>>,
    },
    /// A row that reduces to `0 = c ≠ 0`.
    Inconsistent {
        origin: String,
    },
}

#[derive(Debug, Clone)]
struct PivotRow {
    pivot: usize,
    // length n + 1; last entry is the right-hand side
    values: Vec<BigInt>,
}

/// Incremental row-echelon form over ℤ.
#[derive(Debug, Clone)]
pub struct Echelon {
    n: usize,
    rows: Vec<PivotRow>,
    seen: HashSet<Vec<BigInt>>,
    inconsistent: Option<String>,
}

fn primitive(values: &mut [BigInt]) {
    let g = values.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if g.is_zero() || g.is_one() {
        normalize_sign(values);
        return;
    }
    for v in values.iter_mut() {
        *v = &*v / &g;
    }
    normalize_sign(values);
}

fn normalize_sign(values: &mut [BigInt]) {
    if let Some(first) = values.iter().find(|v| !v.is_zero()) {
        if first.is_negative() {
            for v in values.iter_mut() {
                *v = -&*v;
            }
        }
    }
}

impl Echelon {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            rows: Vec::new(),
            seen: HashSet::new(),
            inconsistent: None,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_inconsistent(&self) -> bool {
        self.inconsistent.is_some()
    }

    fn to_integer_row(&self, row: &SparseRow) -> Vec<BigInt> {
        let scale = denominator_lcm(row.coeffs.values().chain(std::iter::once(&row.rhs)));
        let mut values = vec![BigInt::zero(); self.n + 1];
        for (j, a) in &row.coeffs {
            values[*j] = (a * Rational::from_integer(scale.clone())).to_integer();
        }
        values[self.n] = (&row.rhs * Rational::from_integer(scale)).to_integer();
        primitive(&mut values);
        values
    }

    /// Reduces `row` against the basis; returns `true` if it increased the rank.
    pub fn insert(&mut self, row: &SparseRow) -> bool {
        let mut values = self.to_integer_row(row);
        if values.iter().all(Zero::is_zero) || !self.seen.insert(values.clone()) {
            return false;
        }
        for pr in &self.rows {
            let c = &values[pr.pivot];
            if c.is_zero() {
                continue;
            }
            let a = &pr.values[pr.pivot];
            let g = a.gcd(c);
            let (fa, fc) = (a / &g, c / &g);
            for (v, p) in values.iter_mut().zip(&pr.values) {
                *v = &*v * &fa - p * &fc;
            }
            primitive(&mut values);
        }
        match values[..self.n].iter().position(|v| !v.is_zero()) {
            Some(pivot) => {
                let at = self.rows.partition_point(|r| r.pivot < pivot);
                self.rows.insert(at, PivotRow { pivot, values });
                true
            }
            None => {
                if !values[self.n].is_zero() && self.inconsistent.is_none() {
                    self.inconsistent = Some(row.origin.clone());
                }
                false
            }
        }
    }

    /// Back substitution with the free unknowns set to zero.
    fn particular(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.n];
        for pr in self.rows.iter().rev() {
            let mut acc = Rational::from_integer(pr.values[self.n].clone());
            for j in pr.pivot + 1..self.n {
                if !pr.values[j].is_zero() {
                    acc -= Rational::from_integer(pr.values[j].clone()) * &x[j];
                }
            }
            x[pr.pivot] = acc / Rational::from_integer(pr.values[pr.pivot].clone());
        }
        x
    }

    fn kernel(&self, free: &[usize]) -> Vec<Vec<Rational>> {
        free.iter()
            .map(|&f| {
                let mut x = vec![Rational::zero(); self.n];
                x[f] = Rational::one();
                for pr in self.rows.iter().rev() {
                    let mut acc = Rational::zero();
                    for j in pr.pivot + 1..self.n {
                        if !pr.values[j].is_zero() {
                            acc -= Rational::from_integer(pr.values[j].clone()) * &x[j];
                        }
                    }
                    x[pr.pivot] = acc / Rational::from_integer(pr.values[pr.pivot].clone());
                }
                x
            })
            .collect()
    }

    pub fn outcome(&self) -> SolveOutcome {
        if let Some(origin) = &self.inconsistent {
            return SolveOutcome::Inconsistent {
                origin: origin.clone(),
            };
        }
        if self.rank() == self.n {
            return SolveOutcome::Unique(self.particular());
        }
        let pivots: HashSet<usize> = self.rows.iter().map(|r| r.pivot).collect();
        let free: Vec<usize> = (0..self.n).filter(|j| !pivots.contains(j)).collect();
        SolveOutcome::NonUnique {
            rank: self.rank(),
            kernel: self.kernel(&free),
            free,
        }
    }
}

/// Solves `rows` over `n` unknowns.
///
/// Rows are inserted until the basis has full rank; the remaining rows are then
/// checked by substitution, which is equivalent to reducing them but cheaper.
pub fn solve(n: usize, rows: &[SparseRow]) -> SolveOutcome {
    let mut ech = Echelon::new(n);
    let mut consumed = 0;
    for row in rows {
        consumed += 1;
        ech.insert(row);
        if ech.is_inconsistent() {
            return ech.outcome();
        }
        if ech.rank() == n {
            break;
        }
    }
    match ech.outcome() {
        SolveOutcome::Unique(x) => {
            if let Some(bad) = rows[consumed..].iter().find(|r| !r.residual(&x).is_zero()) {
                return SolveOutcome::Inconsistent {
                    origin: bad.origin.clone(),
                };
            }
            SolveOutcome::Unique(x)
        }
        other => other,
    }
}

/// Whether two systems over the same unknowns have the same solution set.
pub fn same_solution_set(n: usize, a: &[SparseRow], b: &[SparseRow]) -> bool {
    match (solve(n, a), solve(n, b)) {
        (SolveOutcome::Unique(x), SolveOutcome::Unique(y)) => x == y,
        (SolveOutcome::Inconsistent { .. }, SolveOutcome::Inconsistent { .. }) => true,
        (SolveOutcome::NonUnique { .. }, SolveOutcome::NonUnique { .. }) => {
            // Same affine space iff each system's rows hold on the other's solutions
            // and ranks agree.
            let rank = |rows: &[SparseRow]| {
                let mut e = Echelon::new(n);
                rows.iter().for_each(|r| {
                    e.insert(r);
                });
                (e.rank(), e)
            };
            let (ra, ea) = rank(a);
            let (rb, _) = rank(b);
            if ra != rb {
                return false;
            }
            let mut joint = ea;
            b.iter().for_each(|r| {
                joint.insert(r);
            });
            !joint.is_inconsistent() && joint.rank() == ra
        }
        _ => false,
    }
}
