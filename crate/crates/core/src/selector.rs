//! Degree selection: which graded pieces count as morphisms in the category at hand.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{integer_solutions, row_hermite};
use crate::polyhedron::LatticeProblem;

/// The selected degrees `δ ∈ ℤ^N` satisfy `F δ = t` and `r_k · δ ≡ t_k (mod m_k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WeightSelector {
    pub n: usize,
    pub free_rows: Vec<Vec<i64>>,
    pub target: Vec<i64>,
    /// `(row, residue, modulus)`
    pub mod_rows: Vec<(Vec<i64>, i64, i64)>,
}

/// Shape of the set of selected degrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fiber {
    Empty,
    Point(Vec<i64>),
    /// Positive-dimensional lattice coset.
    Lattice,
}

impl WeightSelector {
    pub fn new(n: usize, free_rows: Vec<Vec<i64>>, target: Vec<i64>, mod_rows: Vec<(Vec<i64>, i64, i64)>) -> Result<Self> {
        if free_rows.len() != target.len() {
            return Err(Error::Dimension(format!(
                "{} selector rows but {} targets",
                free_rows.len(),
                target.len()
            )));
        }
        if free_rows.iter().chain(mod_rows.iter().map(|(r, _, _)| r)).any(|r| r.len() != n) {
            return Err(Error::Dimension(format!("selector row length differs from N = {n}")));
        }
        if let Some((_, _, m)) = mod_rows.iter().find(|(_, _, m)| *m < 1) {
            return Err(Error::Dimension(format!("selector modulus {m} < 1")));
        }
        let mod_rows = mod_rows.into_iter().map(|(r, t, m)| (r, t.rem_euclid(m), m)).collect();
        Ok(WeightSelector { n, free_rows, target, mod_rows })
    }

    /// `δ = 0`: torus-equivariant morphisms on the fiber.
    pub fn equivariant(n: usize) -> Self {
        let rows = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        WeightSelector { n, free_rows: rows, target: vec![0; n], mod_rows: Vec::new() }
    }

    /// No condition at all: every degree counts.
    pub fn unrestricted(n: usize) -> Self {
        WeightSelector { n, free_rows: Vec::new(), target: Vec::new(), mod_rows: Vec::new() }
    }

    /// Invariants of a quotient group with the given weights and finite factors.
    pub fn invariant(n: usize, weights: &[Vec<i64>], torsion: &[(Vec<i64>, i64)]) -> Result<Self> {
        Self::new(
            n,
            weights.to_vec(),
            vec![0; weights.len()],
            torsion.iter().map(|(r, m)| (r.clone(), 0, *m)).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.free_rows.len() + self.mod_rows.len()
    }

    pub fn contains(&self, delta: &[i64]) -> bool {
        let dot = |r: &[i64]| r.iter().zip(delta).map(|(a, b)| a * b).sum::<i64>();
        self.free_rows.iter().zip(&self.target).all(|(r, t)| dot(r) == *t)
            && self.mod_rows.iter().all(|(r, t, m)| dot(r).rem_euclid(*m) == *t)
    }

    /// Lattice problem of the selector with no bounds yet.
    pub fn problem(&self) -> LatticeProblem {
        let mut p = LatticeProblem::unbounded(self.n);
        p.equalities = self.free_rows.iter().cloned().zip(self.target.iter().copied()).collect();
        p.congruences = self.mod_rows.clone();
        p
    }

    pub fn fiber(&self) -> Result<Fiber> {
        match self.problem().points() {
            Ok(points) => match points.len() {
                0 => Ok(Fiber::Empty),
                1 => Ok(Fiber::Point(points.into_iter().next().expect("one point"))),
                _ => unreachable!("an affine lattice with two points is unbounded"),
            },
            Err(Error::NonFinite { .. }) => Ok(Fiber::Lattice),
            Err(e) => Err(e),
        }
    }

    /// Selector on `A ⋈ B` imposing `self` on the first block and `other` on the second.
    pub fn product(&self, other: &WeightSelector) -> WeightSelector {
        let pad_left = |r: &Vec<i64>| {
            let mut v = vec![0; self.n];
            v.extend(r);
            v
        };
        let pad_right = |r: &Vec<i64>| {
            let mut v = r.clone();
            v.resize(self.n + other.n, 0);
            v
        };
        let mut free_rows: Vec<Vec<i64>> = self.free_rows.iter().map(pad_right).collect();
        free_rows.extend(other.free_rows.iter().map(pad_left));
        let mut target = self.target.clone();
        target.extend(&other.target);
        let mut mod_rows: Vec<_> = self.mod_rows.iter().map(|(r, t, m)| (pad_right(r), *t, *m)).collect();
        mod_rows.extend(other.mod_rows.iter().map(|(r, t, m)| (pad_left(r), *t, *m)));
        WeightSelector { n: self.n + other.n, free_rows, target, mod_rows }
    }
}

/// `ℤ^N / L` where `L` is the lattice of homogeneous selected degrees. Twisting by
/// an element of `L` does not change any Ext table, so weights are compared
/// through their canonical representatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientLattice {
    n: usize,
    /// Hermite basis of `L`, with pivot columns.
    rows: Vec<(usize, Vec<i64>)>,
}

impl QuotientLattice {
    pub fn of(sel: &WeightSelector) -> Result<Self> {
        let n = sel.n;
        let slack = sel.mod_rows.len();
        let mut a: Vec<Vec<i128>> = Vec::new();
        for r in &sel.free_rows {
            let mut row: Vec<i128> = r.iter().map(|&x| x as i128).collect();
            row.resize(n + slack, 0);
            a.push(row);
        }
        for (k, (r, _, m)) in sel.mod_rows.iter().enumerate() {
            let mut row: Vec<i128> = r.iter().map(|&x| x as i128).collect();
            row.resize(n + slack, 0);
            row[n + k] = -(*m as i128);
            a.push(row);
        }
        let basis: Vec<Vec<i128>> = if a.is_empty() {
            (0..n).map(|j| (0..n).map(|i| i128::from(i == j)).collect()).collect()
        } else {
            let zero = vec![0; a.len()];
            integer_solutions(&a, &zero, n + slack)?
                .expect("homogeneous systems are solvable")
                .basis
                .into_iter()
                .map(|v| v[..n].to_vec())
                .collect()
        };
        let rows = row_hermite(&basis, n)?
            .into_iter()
            .map(|r| {
                let pivot = r.iter().position(|&x| x != 0).expect("nonzero Hermite row");
                (pivot, r.into_iter().map(|x| x as i64).collect())
            })
            .collect();
        Ok(QuotientLattice { n, rows })
    }

    pub fn canonical(&self, v: &[i64]) -> Vec<i64> {
        let mut v = v.to_vec();
        for (p, row) in &self.rows {
            let q = v[*p].div_euclid(row[*p]);
            if q != 0 {
                v.iter_mut().zip(row).for_each(|(x, r)| *x -= q * r);
            }
        }
        v
    }

    /// Coordinates that are not Hermite pivots; boxes in these coordinates
    /// around a canonical weight enumerate distinct classes.
    pub fn free_coordinates(&self) -> Vec<usize> {
        (0..self.n).filter(|c| self.rows.iter().all(|(p, _)| p != c)).collect()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

impl fmt::Display for WeightSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .free_rows
            .iter()
            .zip(&self.target)
            .map(|(r, t)| format!("{r:?}·δ={t}"))
            .collect();
        parts.extend(self.mod_rows.iter().map(|(r, t, m)| format!("{r:?}·δ≡{t} mod {m}")));
        if parts.is_empty() {
            write!(f, "all degrees")
        } else {
            write!(f, "{}", parts.join(", "))
        }
    }
}
