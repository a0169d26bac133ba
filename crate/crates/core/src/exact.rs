//! Exact integer and rational linear algebra.
//!
//! Everything here is small and dense: Čech/Koszul differentials with entries in
//! {-1, 0, 1}, weight matrices of a few rows, and adjunction systems of a few
//! hundred rows. Ranks use fraction-free elimination on machine integers with a
//! big-integer fallback when a row combination overflows.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Rank over ℚ of an integer matrix given as rows.
pub fn rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i64>> = rows.iter().filter(|r| r.iter().any(|&x| x != 0)).cloned().collect();
    match rank_small(&mut m) {
        Some(r) => r,
        None => {
            let mut big: Vec<Vec<BigInt>> = rows
                .iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect();
            rank_big(&mut big)
        }
    }
}

fn gcd_row_i64(row: &mut [i64]) {
    let g = row.iter().fold(0i64, |g, &x| g.gcd(&x));
    if g > 1 {
        row.iter_mut().for_each(|x| *x /= g);
    }
}

/// Returns `None` on overflow.
fn rank_small(m: &mut [Vec<i64>]) -> Option<usize> {
    let nrows = m.len();
    if nrows == 0 {
        return Some(0);
    }
    let ncols = m[0].len();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, p);
        let (head, tail) = m.split_at_mut(r + 1);
        let pivot_row = &head[r];
        let pv = pivot_row[c];
        for row in tail.iter_mut() {
            let f = row[c];
            if f == 0 {
                continue;
            }
            for j in c..ncols {
                let a = row[j].checked_mul(pv)?;
                let b = pivot_row[j].checked_mul(f)?;
                row[j] = a.checked_sub(b)?;
            }
            gcd_row_i64(row);
        }
        r += 1;
    }
    Some(r)
}

fn rank_big(m: &mut [Vec<BigInt>]) -> usize {
    let nrows = m.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = m[0].len();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let (head, tail) = m.split_at_mut(r + 1);
        let pivot_row = &head[r];
        let pv = pivot_row[c].clone();
        for row in tail.iter_mut() {
            if row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for j in c..ncols {
                row[j] = &row[j] * &pv - &pivot_row[j] * &f;
            }
            let g = row.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
            if !g.is_zero() && !g.is_one() {
                row.iter_mut().for_each(|x| *x = &*x / &g);
            }
        }
        r += 1;
    }
    r
}

/// Solves `a x = b` over ℚ. Returns one solution (free variables set to zero) or
/// `None` if the system is inconsistent.
pub fn solve_rational(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    solve_rational_many(a, std::slice::from_ref(&b.to_vec())).pop().flatten()
}

/// [`solve_rational`] for several right-hand sides sharing one elimination.
pub fn solve_rational_many(a: &[Vec<BigRational>], bs: &[Vec<BigRational>]) -> Vec<Option<Vec<BigRational>>> {
    let nrows = a.len();
    let ncols = a.first().map_or(0, |r| r.len());
    let width = ncols + bs.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend(bs.iter().map(|b| b[i].clone()));
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for j in c..width {
            if !m[r][j].is_zero() {
                m[r][j] = &m[r][j] * &inv;
            }
        }
        let pivot_row = m[r].clone();
        let support: Vec<usize> = (c..width).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &support {
                let delta = &pivot_row[j] * &f;
                row[j] -= delta;
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..bs.len())
        .map(|k| {
            let col = ncols + k;
            if m[r..].iter().any(|row| !row[col].is_zero()) {
                return None;
            }
            let mut x = vec![BigRational::zero(); ncols];
            for (i, &c) in pivots.iter().enumerate() {
                x[c] = m[i][col].clone();
            }
            Some(x)
        })
        .collect()
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        // a = q b + r with r = a mod b (nonnegative)
        let q = a.div_euclid(b);
        (g, y, x - q * y)
    }
}

/// Column echelon form `a · u = h` with `u` unimodular.
///
/// `h` has its nonzero columns first; `rank` is their number and `pivot_rows[j]`
/// is the row of the leading entry of column `j`.
#[derive(Debug, Clone)]
pub struct ColumnEchelon {
    pub h: Vec<Vec<i128>>,
    pub u: Vec<Vec<i128>>,
    pub rank: usize,
    pub pivot_rows: Vec<usize>,
}

pub fn column_echelon(a: &[Vec<i128>], ncols: usize) -> Result<ColumnEchelon> {
    let nrows = a.len();
    let mut h: Vec<Vec<i128>> = a.to_vec();
    let mut u: Vec<Vec<i128>> = (0..ncols)
        .map(|i| (0..ncols).map(|j| i128::from(i == j)).collect())
        .collect();
    // column operation helpers on h and u simultaneously
    fn col_combine(
        m: &mut [Vec<i128>],
        c1: usize,
        c2: usize,
        (x, y, z, w): (i128, i128, i128, i128),
    ) -> Result<()> {
        // new c1 = x*c1 + y*c2, new c2 = z*c1 + w*c2
        for row in m.iter_mut() {
            let a = row[c1];
            let b = row[c2];
            let n1 = x
                .checked_mul(a)
                .and_then(|p| y.checked_mul(b).and_then(|q| p.checked_add(q)))
                .ok_or(Error::Overflow("column echelon"))?;
            let n2 = z
                .checked_mul(a)
                .and_then(|p| w.checked_mul(b).and_then(|q| p.checked_add(q)))
                .ok_or(Error::Overflow("column echelon"))?;
            row[c1] = n1;
            row[c2] = n2;
        }
        Ok(())
    }
    let mut col = 0;
    let mut pivot_rows = Vec::new();
    for r in 0..nrows {
        if col == ncols {
            break;
        }
        for c in col + 1..ncols {
            let a = h[r][col];
            let b = h[r][c];
            if b == 0 {
                continue;
            }
            let (g, x, y) = ext_gcd(a, b);
            // [col, c] <- [x*col + y*c, (-b/g)*col + (a/g)*c]
            let t = (x, y, -b / g, a / g);
            col_combine(&mut h, col, c, t)?;
            col_combine(&mut u, col, c, t)?;
        }
        if h[r][col] != 0 {
            if h[r][col] < 0 {
                for row in h.iter_mut() {
                    row[col] = -row[col];
                }
                for row in u.iter_mut() {
                    row[col] = -row[col];
                }
            }
            pivot_rows.push(r);
            col += 1;
        }
    }
    Ok(ColumnEchelon {
        h,
        u,
        rank: col,
        pivot_rows,
    })
}

/// Integer solutions of `a x = b`: `x = particular + Σ y_j basis[j]`, `y ∈ ℤ^k`.
#[derive(Debug, Clone)]
pub struct IntegerSolutions {
    pub particular: Vec<i128>,
    pub basis: Vec<Vec<i128>>,
}

/// Parametrizes the integer solution set of `a x = b`; `None` when it is empty.
pub fn integer_solutions(a: &[Vec<i128>], b: &[i128], ncols: usize) -> Result<Option<IntegerSolutions>> {
    let ech = column_echelon(a, ncols)?;
    let mut z = vec![0i128; ncols];
    for (j, &pr) in ech.pivot_rows.iter().enumerate() {
        let mut rhs = b[pr];
        for (l, zl) in z.iter().enumerate().take(j) {
            rhs = rhs
                .checked_sub(ech.h[pr][l].checked_mul(*zl).ok_or(Error::Overflow("solve"))?)
                .ok_or(Error::Overflow("solve"))?;
        }
        let p = ech.h[pr][j];
        if rhs % p != 0 {
            return Ok(None);
        }
        z[j] = rhs / p;
    }
    // consistency on every row
    for (r, row) in ech.h.iter().enumerate() {
        let v: i128 = row.iter().zip(&z).map(|(x, y)| x * y).sum();
        if v != b[r] {
            return Ok(None);
        }
    }
    let particular: Vec<i128> = (0..ncols)
        .map(|i| (0..ncols).map(|j| ech.u[i][j] * z[j]).sum())
        .collect();
    let basis = (ech.rank..ncols)
        .map(|j| (0..ncols).map(|i| ech.u[i][j]).collect())
        .collect();
    Ok(Some(IntegerSolutions { particular, basis }))
}

/// Invariant factors (nonzero diagonal of the Smith normal form).
pub fn smith_invariants(a: &[Vec<i128>], ncols: usize) -> Result<Vec<i128>> {
    let mut m: Vec<Vec<i128>> = a.to_vec();
    let nrows = m.len();
    let mut out = Vec::new();
    let mut t = 0;
    while t < nrows.min(ncols) {
        // pick the smallest nonzero entry in the trailing block as pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..nrows {
            for j in t..ncols {
                if m[i][j] != 0 && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let p = m[t][t];
            let mut done = true;
            for i in t + 1..nrows {
                let q = m[i][t] / p;
                if q != 0 {
                    for j in t..ncols {
                        m[i][j] = m[i][j]
                            .checked_sub(q.checked_mul(m[t][j]).ok_or(Error::Overflow("smith"))?)
                            .ok_or(Error::Overflow("smith"))?;
                    }
                }
                if m[i][t] != 0 {
                    done = false;
                }
            }
            for j in t + 1..ncols {
                let q = m[t][j] / p;
                if q != 0 {
                    for row in m.iter_mut().skip(t) {
                        row[j] = row[j]
                            .checked_sub(q.checked_mul(row[t]).ok_or(Error::Overflow("smith"))?)
                            .ok_or(Error::Overflow("smith"))?;
                    }
                }
                if m[t][j] != 0 {
                    done = false;
                }
            }
            if done {
                // divisibility condition
                let bad = (t + 1..nrows).flat_map(|i| (t + 1..ncols).map(move |j| (i, j))).find(|&(i, j)| m[i][j] % p != 0);
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in t..ncols {
                            m[t][j] += m[i][j];
                        }
                        continue;
                    }
                }
            }
            // move the smallest remaining entry of row/col t into the pivot
            let mut best = (t, t);
            for i in t..nrows {
                if m[i][t] != 0 && m[i][t].abs() < m[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..ncols {
                if m[t][j] != 0 && m[t][j].abs() < m[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            m.swap(t, best.0);
            for row in m.iter_mut() {
                row.swap(t, best.1);
            }
        }
        out.push(m[t][t].abs());
        t += 1;
    }
    Ok(out)
}

/// Row-style Hermite normal form of the lattice spanned by `rows`: nonzero rows
/// in echelon form with positive pivots and entries above each pivot reduced
/// into `[0, pivot)`.
pub fn row_hermite(rows: &[Vec<i128>], ncols: usize) -> Result<Vec<Vec<i128>>> {
    let mut m: Vec<Vec<i128>> = rows.to_vec();
    let mut out: Vec<Vec<i128>> = Vec::new();
    let mut top = 0;
    for c in 0..ncols {
        // gcd-combine every remaining row into row `top` at column c
        loop {
            let nonzero: Vec<usize> = (top..m.len()).filter(|&i| m[i][c] != 0).collect();
            if nonzero.len() <= 1 {
                if let Some(&i) = nonzero.first() {
                    m.swap(top, i);
                }
                break;
            }
            let i = *nonzero.iter().min_by_key(|&&i| m[i][c].abs()).expect("nonempty");
            m.swap(top, i);
            for k in (top + 1)..m.len() {
                if m[k][c] != 0 {
                    let q = m[k][c].div_euclid(m[top][c]);
                    for j in 0..ncols {
                        let t = m[top][j].checked_mul(q).ok_or(Error::Overflow("hermite form"))?;
                        m[k][j] = m[k][j].checked_sub(t).ok_or(Error::Overflow("hermite form"))?;
                    }
                }
            }
        }
        if top < m.len() && m[top][c] != 0 {
            if m[top][c] < 0 {
                m[top].iter_mut().for_each(|x| *x = -*x);
            }
            let pivot = m[top][c];
            for r in out.iter_mut() {
                let q = r[c].div_euclid(pivot);
                for j in 0..ncols {
                    r[j] -= q * m[top][j];
                }
            }
            out.push(m[top].clone());
            top += 1;
        }
    }
    Ok(out)
}

pub fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn is_integral(x: &BigRational) -> bool {
    x.denom().is_one() || x.denom().abs().is_one()
}
