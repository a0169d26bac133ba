//! Split toric stack bundles over a toric base.
//!
//! The total space is presented on `U_{Σ_B} × U_Σ` (join of the two complexes,
//! base coordinates first). A degree `δ = (δ_B, δ_F)` is selected when
//! `δ_F = 0` and `W_B δ_B + C δ_F = 0`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::cech::Engine;
use crate::error::{Error, Result};
use crate::exact::integer_solutions;
use crate::ext::{ext_checked, ext_formula, spot_checked, ExtTable};
use crate::fan::{SimplicialComplex, StackyPresentation};
use crate::objects::{compare_pairs, decode, ExceptionalObject, Label, PairOrder};
use crate::selector::WeightSelector;
use crate::sod::PairRecord;
use crate::space::Space;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BundleSpec {
    pub base: StackyPresentation,
    pub fiber: SimplicialComplex,
    /// `r_B × n`; column `j` is the base weight of the line bundle `L_j`.
    pub twist: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TotalSpace {
    pub spec: BundleSpec,
    pub space: Space,
    pub base_space: Space,
    pub n_base: usize,
    pub n_fiber: usize,
}

pub fn build(name: &str, spec: BundleSpec) -> Result<TotalSpace> {
    let n_base = spec.base.complex.ground_size();
    let n_fiber = spec.fiber.ground_size();
    let r = spec.base.weights.len();
    if spec.twist.len() != r {
        return Err(Error::Dimension(format!("twist has {} rows but the base group has {r}", spec.twist.len())));
    }
    if let Some(row) = spec.twist.iter().find(|row| row.len() != n_fiber) {
        return Err(Error::Dimension(format!("twist row of length {} for a fiber on {n_fiber}", row.len())));
    }
    if !spec.base.is_injective() {
        return Err(Error::Dimension("base presentation has a generic stabilizer".into()));
    }
    let complex = spec.base.complex.join(&spec.fiber)?;
    let n = n_base + n_fiber;
    let mut free_rows = Vec::with_capacity(r + n_fiber);
    for (w, c) in spec.base.weights.iter().zip(&spec.twist) {
        let mut row = w.clone();
        row.extend(c);
        free_rows.push(row);
    }
    for j in 0..n_fiber {
        free_rows.push((0..n).map(|i| i64::from(i == n_base + j)).collect());
    }
    let mod_rows = spec
        .base
        .torsion
        .iter()
        .map(|(row, m)| {
            let mut v = row.clone();
            v.resize(n, 0);
            (v, 0, *m)
        })
        .collect();
    let target = vec![0; free_rows.len()];
    let selector = WeightSelector::new(n, free_rows, target, mod_rows)?;
    let space = Space::new(name, complex, selector)?;
    let base_selector = WeightSelector::invariant(n_base, &spec.base.weights, &spec.base.torsion)?;
    let base_space = Space::new(format!("{name} base"), spec.base.complex.clone(), base_selector)?;
    Ok(TotalSpace { spec, space, base_space, n_base, n_fiber })
}

impl TotalSpace {
    /// `Ẽ`: the same stratum data placed in the fiber block, base twist zero.
    pub fn lift_object(&self, e: &ExceptionalObject) -> ExceptionalObject {
        let support = e.support.iter().map(|i| i + self.n_base).collect();
        let mut p = vec![0; self.n_base];
        p.extend(&e.p);
        ExceptionalObject::with_shift(support, p, e.shift)
    }

    /// Canonical representative of a base twist within its base-weight class,
    /// padded with zeros on the fiber block.
    pub fn base_twist(&self, d: &[i64]) -> Result<Vec<i64>> {
        if d.len() != self.n_base {
            return Err(Error::Dimension(format!("base twist of length {} for n_B = {}", d.len(), self.n_base)));
        }
        let mut e = canonical_base_twist(&self.spec.base.weights, d)?;
        e.resize(self.n_base + self.n_fiber, 0);
        Ok(e)
    }
}

/// The first coordinate subset (by size, then lexicographically) on which the
/// base weight of `d` has a unique integral preimage.
pub fn canonical_base_twist(weights: &[Vec<i64>], d: &[i64]) -> Result<Vec<i64>> {
    let n = d.len();
    let w: Vec<i128> = weights
        .iter()
        .map(|row| row.iter().zip(d).map(|(a, b)| (*a as i128) * (*b as i128)).sum())
        .collect();
    if weights.is_empty() {
        return Ok(vec![0; n]);
    }
    for size in 1..=n {
        for cols in crate::objects::subsets_by_size(&(0..n).collect::<Vec<_>>()).swap_remove(size) {
            let a: Vec<Vec<i128>> = weights.iter().map(|row| cols.iter().map(|&c| row[c] as i128).collect()).collect();
            if let Some(sol) = integer_solutions(&a, &w, cols.len())? {
                if sol.basis.is_empty() {
                    let mut out = vec![0; n];
                    for (k, &c) in cols.iter().enumerate() {
                        out[c] = sol.particular[k] as i64;
                    }
                    return Ok(out);
                }
            }
        }
    }
    Ok(d.to_vec())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockRecord {
    pub label: Label,
    pub first: Vec<i64>,
    pub second: Vec<i64>,
    pub total: ExtTable,
    pub base: ExtTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BundleReport {
    pub space: String,
    pub base_twists: Vec<Vec<i64>>,
    pub vanishing_checked: usize,
    pub vanishing_failures: Vec<(PairRecord, Vec<i64>)>,
    pub ties: Vec<(PairRecord, Vec<i64>)>,
    pub block_checked: usize,
    pub block_failures: Vec<BlockRecord>,
    /// Euler matrix of `(O_B, O_B(1))` on the base.
    pub base_euler: Vec<Vec<i64>>,
    /// Same matrix on the block of every nonzero window object.
    pub block_euler: Vec<(Label, Vec<Vec<i64>>)>,
    pub zero_objects: Vec<Label>,
    pub oracle_checked: usize,
}

impl BundleReport {
    pub fn passed(&self) -> bool {
        self.vanishing_failures.is_empty()
            && self.block_failures.is_empty()
            && self.block_euler.iter().all(|(_, m)| *m == self.base_euler)
    }
}

fn line_bundle(d: &[i64]) -> ExceptionalObject {
    ExceptionalObject::new(Vec::new(), d.iter().map(|x| -x).collect())
}

fn base_difference(a: &[i64], b: &[i64]) -> Vec<i64> {
    b.iter().zip(a).map(|(x, y)| x - y).collect()
}

/// `base_twists` are base degree vectors `d_B`; every pair `(L₁, L₂)` among them
/// is used for the block check and every difference for the vanishing check.
type TableOf<'a> = dyn Fn(&[i64], &[i64]) -> Result<ExtTable> + 'a;

pub fn verify_theorem(
    engine: &Engine,
    total: &TotalSpace,
    labels: &[Label],
    base_twists: &[Vec<i64>],
    oracle_fraction: f64,
) -> Result<BundleReport> {
    let space = &total.space;
    let objects: Vec<(Label, ExceptionalObject, bool)> = labels
        .iter()
        .map(|a| {
            let e = total.lift_object(&decode(a));
            let zero = !space.complex.is_face(&e.support);
            (a.clone(), e, zero)
        })
        .collect();
    let extras: Vec<Vec<i64>> = base_twists.iter().map(|d| total.base_twist(d)).collect::<Result<_>>()?;

    // vanishing: Ext(Ẽ_a, Ẽ_b ⊗ φ*L) for every a > b and every base twist L
    let mut jobs = Vec::new();
    for (i, (_, ei, _)) in objects.iter().enumerate() {
        for (j, (_, ej, _)) in objects.iter().enumerate() {
            let order = compare_pairs(&decode(&objects[i].0), &decode(&objects[j].0));
            if order == PairOrder::Greater || (order == PairOrder::Tie && objects[i].0 > objects[j].0) {
                for (k, x) in extras.iter().enumerate() {
                    jobs.push((i, j, k, order, ei, ej, x));
                }
            }
        }
    }
    let results = jobs
        .par_iter()
        .enumerate()
        .map(|(idx, &(i, j, k, order, ei, ej, x))| {
            let check = spot_checked(idx, k, oracle_fraction);
            let t = if check { ext_checked(engine, space, ei, ej, x)? } else { ext_formula(engine, space, ei, ej, x)? };
            Ok((i, j, k, order, t, check))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = BundleReport {
        space: space.name.clone(),
        base_twists: base_twists.to_vec(),
        vanishing_checked: 0,
        vanishing_failures: Vec::new(),
        ties: Vec::new(),
        block_checked: 0,
        block_failures: Vec::new(),
        base_euler: Vec::new(),
        block_euler: Vec::new(),
        zero_objects: objects.iter().filter(|o| o.2).map(|o| o.0.clone()).collect(),
        oracle_checked: 0,
    };
    for (i, j, k, order, table, check) in results {
        report.oracle_checked += usize::from(check);
        let rec = PairRecord { source: objects[i].0.clone(), target: objects[j].0.clone(), table };
        if order == PairOrder::Greater {
            report.vanishing_checked += 1;
            if !rec.table.is_zero() {
                report.vanishing_failures.push((rec, base_twists[k].clone()));
            }
        } else {
            report.ties.push((rec, base_twists[k].clone()));
        }
    }

    // blocks: Ext(φ*L₁ ⊗ Ẽ_a, φ*L₂ ⊗ Ẽ_a) against Ext_B(L₁, L₂)
    let base_zero = vec![0; total.n_base];
    let mut base_tables = BTreeMap::new();
    for l1 in base_twists {
        for l2 in base_twists {
            let t = ext_checked(engine, &total.base_space, &line_bundle(l1), &line_bundle(l2), &base_zero)?;
            base_tables.insert((l1.clone(), l2.clone()), t);
        }
    }
    let nonzero: Vec<&(Label, ExceptionalObject, bool)> = objects.iter().filter(|o| !o.2).collect();
    let mut block_jobs = Vec::new();
    for o in &nonzero {
        for l1 in base_twists {
            for l2 in base_twists {
                block_jobs.push((*o, l1, l2));
            }
        }
    }
    let blocks = block_jobs
        .par_iter()
        .map(|&(o, l1, l2)| {
            let x = total.base_twist(&base_difference(l1, l2))?;
            let t = ext_formula(engine, space, &o.1, &o.1, &x)?;
            Ok(BlockRecord {
                label: o.0.clone(),
                first: l1.clone(),
                second: l2.clone(),
                total: t,
                base: base_tables[&(l1.clone(), l2.clone())].clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    report.block_checked = blocks.len();
    report.block_failures = blocks.into_iter().filter(|b| b.total != b.base).collect();

    // Euler matrices of (O, O(1)) on the base and on every block
    let mut unit = vec![0; total.n_base];
    if let Some(first) = unit.first_mut() {
        *first = 1;
    }
    let pair = [vec![0; total.n_base], unit];
    let euler_of = |f: &TableOf| -> Result<Vec<Vec<i64>>> {
        pair.iter().map(|l1| pair.iter().map(|l2| Ok(f(l1, l2)?.euler())).collect()).collect()
    };
    report.base_euler = euler_of(&|l1, l2| ext_formula(engine, &total.base_space, &line_bundle(l1), &line_bundle(l2), &base_zero))?;
    for o in &nonzero {
        let m = euler_of(&|l1, l2| ext_formula(engine, space, &o.1, &o.1, &total.base_twist(&base_difference(l1, l2))?))?;
        report.block_euler.push((o.0.clone(), m));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sod::window;

    fn f1() -> TotalSpace {
        let p1 = SimplicialComplex::projective_space(2);
        let base = StackyPresentation::new(p1.clone(), vec![vec![1, 1]], vec![]).unwrap();
        build("F1", BundleSpec { base, fiber: p1, twist: vec![vec![0, -1]] }).unwrap()
    }

    #[test]
    fn build_examples() {
        let t = f1();
        assert_eq!(t.space.n(), 4);
        assert_eq!(t.space.complex.max_faces().len(), 4);
        assert_eq!(t.space.selector.free_rows[0], vec![1, 1, 0, -1]);
        // point base: the fiber space is unchanged
        let point = StackyPresentation::new(SimplicialComplex::torus(0), vec![], vec![]).unwrap();
        let p1 = SimplicialComplex::projective_space(2);
        let t = build("fiber", BundleSpec { base: point, fiber: p1.clone(), twist: vec![] }).unwrap();
        assert_eq!(t.space.complex, p1);
        assert_eq!(t.space.selector, WeightSelector::equivariant(2));
    }

    #[test]
    fn lift_and_base_twist_examples() {
        let t = f1();
        let e = ExceptionalObject::with_shift(vec![0], vec![0, 0], 2);
        assert_eq!(t.lift_object(&e), ExceptionalObject::with_shift(vec![2], vec![0, 0, 0, 0], 2));
        assert_eq!(t.base_twist(&[1, 0]).unwrap(), vec![1, 0, 0, 0]);
        assert_eq!(t.base_twist(&[0, -2]).unwrap(), vec![-2, 0, 0, 0]);
    }

    #[test]
    fn hirzebruch_surface_theorem() {
        let e = Engine::new();
        let t = f1();
        let twists: Vec<Vec<i64>> = (-2..=2).map(|k| vec![k, 0]).collect();
        let r = verify_theorem(&e, &t, &window(&[(-1, 1), (-1, 1)]), &twists, 0.2).unwrap();
        assert!(r.passed(), "{:?}", r.vanishing_failures);
        assert_eq!(r.base_euler, vec![vec![1, 2], vec![0, 1]]);
    }
}
