//! Lattice points of a rational polyhedron given by integer equalities,
//! congruences and coordinate bounds.
//!
//! Equalities and congruences are solved over ℤ first, so the remaining
//! variables range over a full lattice. Bounds are then projected by
//! Fourier–Motzkin elimination; the elimination chain yields both the
//! recession-cone test (with an explicit integer ray) and the per-coordinate
//! bounds used for the lattice walk.

use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::exact::integer_solutions;

/// `Σ coef_j y_j + constant ≥ 0`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Row {
    coef: Vec<i128>,
    constant: i128,
}

impl Row {
    fn normalize(mut self) -> Self {
        let g = self.coef.iter().fold(self.constant.abs(), |g, x| g.gcd(x));
        if g > 1 {
            self.coef.iter_mut().for_each(|x| *x /= g);
            self.constant /= g;
        }
        self
    }
}

/// Integer points `x ∈ ℤ^dim` with `A x = b`, `r·x ≡ t (mod m)` and
/// `lower_i ≤ x_i ≤ upper_i` (absent bounds are infinite).
#[derive(Debug, Clone)]
pub struct LatticeProblem {
    pub dim: usize,
    pub equalities: Vec<(Vec<i64>, i64)>,
    pub congruences: Vec<(Vec<i64>, i64, i64)>,
    pub lower: Vec<Option<i64>>,
    pub upper: Vec<Option<i64>>,
}

/// Parametrized form `x = x0 + F y` together with the bound rows in `y`.
struct Parametrized {
    origin: Vec<i128>,
    directions: Vec<Vec<i128>>,
    rows: Vec<Row>,
    homogeneous: Vec<Row>,
}

impl LatticeProblem {
    pub fn unbounded(dim: usize) -> Self {
        LatticeProblem {
            dim,
            equalities: Vec::new(),
            congruences: Vec::new(),
            lower: vec![None; dim],
            upper: vec![None; dim],
        }
    }

    fn parametrize(&self) -> Result<Option<Parametrized>> {
        let nvars = self.dim + self.congruences.len();
        let mut a: Vec<Vec<i128>> = Vec::new();
        let mut b: Vec<i128> = Vec::new();
        for (row, t) in &self.equalities {
            let mut r: Vec<i128> = row.iter().map(|&x| x as i128).collect();
            r.resize(nvars, 0);
            a.push(r);
            b.push(*t as i128);
        }
        for (k, (row, t, m)) in self.congruences.iter().enumerate() {
            let mut r: Vec<i128> = row.iter().map(|&x| x as i128).collect();
            r.resize(nvars, 0);
            r[self.dim + k] = -(*m as i128);
            a.push(r);
            b.push(*t as i128);
        }
        let sol = if a.is_empty() {
            crate::exact::IntegerSolutions {
                particular: vec![0; nvars],
                basis: (0..nvars)
                    .map(|j| (0..nvars).map(|i| i128::from(i == j)).collect())
                    .collect(),
            }
        } else {
            match integer_solutions(&a, &b, nvars)? {
                Some(s) => s,
                None => return Ok(None),
            }
        };
        let k = sol.basis.len();
        let mut rows = Vec::new();
        let mut homogeneous = Vec::new();
        for i in 0..self.dim {
            let f: Vec<i128> = (0..k).map(|j| sol.basis[j][i]).collect();
            let x0 = sol.particular[i];
            if let Some(lo) = self.lower[i] {
                rows.push(Row { coef: f.clone(), constant: x0 - lo as i128 }.normalize());
                homogeneous.push(Row { coef: f.clone(), constant: 0 }.normalize());
            }
            if let Some(hi) = self.upper[i] {
                let neg: Vec<i128> = f.iter().map(|x| -x).collect();
                rows.push(Row { coef: neg.clone(), constant: hi as i128 - x0 }.normalize());
                homogeneous.push(Row { coef: neg, constant: 0 }.normalize());
            }
        }
        Ok(Some(Parametrized {
            origin: sol.particular[..self.dim].to_vec(),
            directions: sol.basis.iter().map(|v| v[..self.dim].to_vec()).collect(),
            rows,
            homogeneous,
        }))
    }

    /// All lattice points, or `NonFinite` with a certified recession ray.
    pub fn points(&self) -> Result<Vec<Vec<i64>>> {
        let Some(p) = self.parametrize()? else {
            return Ok(Vec::new());
        };
        let k = p.directions.len();
        let chain = elimination_chain(&p.rows, k);
        if !chain[0].iter().all(|r| r.constant >= 0) {
            return Ok(Vec::new());
        }
        if let Some(y) = recession_ray(&p.homogeneous, k) {
            let ray: Vec<i64> = (0..self.dim)
                .map(|i| (0..k).map(|j| p.directions[j][i] * y[j]).sum::<i128>() as i64)
                .collect();
            debug_assert!(self.certifies(&ray));
            return Err(Error::NonFinite { ray });
        }
        let mut out = Vec::new();
        let mut y = vec![0i128; k];
        walk(&chain, 0, &mut y, &mut |y| {
            let x: Vec<i64> = (0..self.dim)
                .map(|i| {
                    (p.origin[i] + (0..k).map(|j| p.directions[j][i] * y[j]).sum::<i128>()) as i64
                })
                .collect();
            out.push(x);
        })?;
        out.sort();
        Ok(out)
    }

    pub fn count(&self) -> Result<u64> {
        self.points().map(|p| p.len() as u64)
    }

    /// Checks that `ray` is a nonzero direction of the recession cone.
    pub fn certifies(&self, ray: &[i64]) -> bool {
        if ray.iter().all(|&x| x == 0) {
            return false;
        }
        let eq_ok = self
            .equalities
            .iter()
            .all(|(r, _)| r.iter().zip(ray).map(|(a, b)| a * b).sum::<i64>() == 0);
        let bounds_ok = (0..self.dim).all(|i| {
            (self.lower[i].is_none() || ray[i] >= 0) && (self.upper[i].is_none() || ray[i] <= 0)
        });
        eq_ok && bounds_ok
    }
}

/// `chain[j]` holds the constraints in the variables `y_0..y_j` (exclusive of
/// `y_j` for `j = 0`), i.e. `chain[k]` is the input and `chain[0]` is constant.
fn elimination_chain(rows: &[Row], k: usize) -> Vec<Vec<Row>> {
    let mut chain = vec![Vec::new(); k + 1];
    chain[k] = dedup(rows.to_vec());
    for v in (0..k).rev() {
        chain[v] = eliminate(&chain[v + 1], v);
    }
    chain
}

fn dedup(mut rows: Vec<Row>) -> Vec<Row> {
    rows.retain(|r| !(r.coef.iter().all(|&c| c == 0) && r.constant >= 0));
    rows.sort_by(|a, b| a.coef.cmp(&b.coef).then(a.constant.cmp(&b.constant)));
    // among rows with identical coefficients keep the tightest
    let mut out: Vec<Row> = Vec::new();
    for r in rows {
        if let Some(last) = out.last() {
            if last.coef == r.coef {
                continue;
            }
        }
        out.push(r);
    }
    out
}

fn eliminate(rows: &[Row], v: usize) -> Vec<Row> {
    let mut keep = Vec::new();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for r in rows {
        match r.coef[v].signum() {
            1 => pos.push(r),
            -1 => neg.push(r),
            _ => keep.push(r.clone()),
        }
    }
    for p in &pos {
        for n in &neg {
            let a = p.coef[v];
            let b = -n.coef[v];
            let coef = p.coef.iter().zip(&n.coef).map(|(x, y)| b * x + a * y).collect();
            keep.push(Row { coef, constant: b * p.constant + a * n.constant }.normalize());
        }
    }
    dedup(keep)
}

type Q = Ratio<i128>;

/// Rational interval for `y_v` given the already fixed prefix.
fn interval(rows: &[Row], v: usize, prefix: &[Q]) -> (Option<Q>, Option<Q>, bool) {
    let mut lo: Option<Q> = None;
    let mut hi: Option<Q> = None;
    let mut feasible = true;
    for r in rows {
        let rest = Q::from_integer(r.constant)
            + (0..v).map(|j| Q::from_integer(r.coef[j]) * prefix[j]).sum::<Q>();
        let c = r.coef[v];
        if c == 0 {
            if rest < Q::from_integer(0) {
                feasible = false;
            }
            continue;
        }
        let bound = -rest / Q::from_integer(c);
        if c > 0 {
            lo = Some(lo.map_or(bound, |l: Q| l.max(bound)));
        } else {
            hi = Some(hi.map_or(bound, |h: Q| h.min(bound)));
        }
    }
    (lo, hi, feasible)
}

/// A rational point of the system via back-substitution through the chain, if feasible.
fn rational_point(rows: &[Row], k: usize) -> Option<Vec<Q>> {
    let chain = elimination_chain(rows, k);
    if !chain[0].iter().all(|r| r.constant >= 0) {
        return None;
    }
    let mut y: Vec<Q> = Vec::with_capacity(k);
    for v in 0..k {
        let (lo, hi, ok) = interval(&chain[v + 1], v, &y);
        if !ok {
            return None;
        }
        let val = match (lo, hi) {
            (Some(l), Some(h)) if l > h => return None,
            (Some(l), _) => l,
            (None, Some(h)) => h,
            (None, None) => Q::from_integer(0),
        };
        y.push(val);
    }
    Some(y)
}

/// A nonzero integer point of the homogeneous cone, if one exists.
fn recession_ray(cone: &[Row], k: usize) -> Option<Vec<i128>> {
    for j in 0..k {
        for s in [1i128, -1] {
            let mut rows = cone.to_vec();
            let mut coef = vec![0; k];
            coef[j] = s;
            rows.push(Row { coef, constant: -1 });
            if let Some(y) = rational_point(&rows, k) {
                let l = y.iter().fold(1i128, |l, q| l.lcm(q.denom()));
                return Some(y.iter().map(|q| q.numer() * (l / q.denom())).collect());
            }
        }
    }
    None
}

fn walk(chain: &[Vec<Row>], v: usize, y: &mut Vec<i128>, emit: &mut dyn FnMut(&[i128])) -> Result<()> {
    let k = y.len();
    if v == k {
        emit(y);
        return Ok(());
    }
    let prefix: Vec<Q> = y[..v].iter().map(|&x| Q::from_integer(x)).collect();
    let (lo, hi, ok) = interval(&chain[v + 1], v, &prefix);
    if !ok {
        return Ok(());
    }
    let (Some(lo), Some(hi)) = (lo, hi) else {
        // bounded polytope projections are bounded; reaching this is a bug upstream
        return Err(Error::Overflow("unbounded lattice walk"));
    };
    let lo = lo.ceil().to_integer();
    let hi = hi.floor().to_integer();
    for val in lo..=hi {
        y[v] = val;
        walk(chain, v + 1, y, emit)?;
    }
    y[v] = 0;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_points() {
        let mut p = LatticeProblem::unbounded(2);
        p.lower = vec![Some(0), Some(-1)];
        p.upper = vec![Some(1), Some(1)];
        assert_eq!(p.count().unwrap(), 6);
    }

    #[test]
    fn equality_with_nonneg_bounds_is_a_simplex() {
        // x + y = 3, x,y >= 0
        let mut p = LatticeProblem::unbounded(2);
        p.equalities.push((vec![1, 1], 3));
        p.lower = vec![Some(0), Some(0)];
        assert_eq!(p.points().unwrap(), vec![vec![0, 3], vec![1, 2], vec![2, 1], vec![3, 0]]);
    }

    #[test]
    fn half_line_is_nonfinite_with_ray() {
        let mut p = LatticeProblem::unbounded(2);
        p.equalities.push((vec![1, 1], 0));
        p.lower = vec![Some(0), None];
        match p.points() {
            Err(Error::NonFinite { ray }) => {
                assert!(p.certifies(&ray));
                assert!(ray[0] > 0 && ray[1] < 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn congruences_filter_points() {
        // x + 2y = 4, x,y >= 0, y even
        let mut p = LatticeProblem::unbounded(2);
        p.equalities.push((vec![1, 2], 4));
        p.congruences.push((vec![0, 1], 0, 2));
        p.lower = vec![Some(0), Some(0)];
        assert_eq!(p.points().unwrap(), vec![vec![0, 2], vec![4, 0]]);
    }

    #[test]
    fn empty_rational_polytope_is_finite() {
        let mut p = LatticeProblem::unbounded(1);
        p.lower = vec![Some(1)];
        p.upper = vec![Some(0)];
        assert_eq!(p.count().unwrap(), 0);
        let mut q = LatticeProblem::unbounded(1);
        q.equalities.push((vec![2], 1));
        assert_eq!(q.count().unwrap(), 0);
    }
}
