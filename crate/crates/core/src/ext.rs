//! Graded Ext tables between stratum sheaves.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cech::{cech_sign, Engine, TwistedStratumSheaf};
use crate::cochain::Cochain;
use crate::error::{Error, Result};
use crate::fan::{indices_of, mask_of, Mask};
use crate::grading::hom_twist;
use crate::objects::{subsets_by_size, ExceptionalObject};
use crate::selector::Fiber;
use crate::space::Space;
#[cfg(test)]
use crate::selector::WeightSelector;

/// Degree to dimension; zero entries are not stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExtTable(BTreeMap<i64, u64>);

impl ExtTable {
    pub fn get(&self, degree: i64) -> u64 {
        self.0.get(&degree).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.0.iter().map(|(&r, &d)| (r, d))
    }

    pub fn add(&mut self, degree: i64, dim: u64) {
        if dim > 0 {
            *self.0.entry(degree).or_insert(0) += dim;
        }
    }

    pub fn euler(&self) -> i64 {
        self.iter().map(|(r, d)| if r.rem_euclid(2) == 0 { d as i64 } else { -(d as i64) }).sum()
    }

    /// The table of `Ext(A[s], B[t])`, i.e. degrees moved by `t - s`.
    pub fn shifted(&self, by: i64) -> ExtTable {
        ExtTable(self.0.iter().map(|(&r, &d)| (r + by, d)).collect())
    }
}

impl fmt::Display for ExtTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (r, d)) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}: {d}")?;
        }
        write!(f, "}}")
    }
}

/// `Ext^•(A, B ⊗ O(extra))` by the closed-form sum over Koszul subsets:
/// `⊕_{I∖J ⊆ S ⊆ I} H^{r-|S|}(O_{I∪J}(p - q + extra + χ_S))`.
pub fn ext_formula(engine: &Engine, space: &Space, a: &ExceptionalObject, b: &ExceptionalObject, extra: &[i64]) -> Result<ExtTable> {
    check_dims(space, a, b, extra)?;
    let mut table = ExtTable::default();
    let union = mask_of(&a.support) | mask_of(&b.support);
    if !space.complex.is_face_mask(union) {
        return Ok(table);
    }
    let base = base_weight(a, b, extra);
    let j = mask_of(&b.support);
    for level in subsets_by_size(&a.support) {
        for s in level {
            let sm = mask_of(&s);
            // S must contain I ∖ J
            if a.support.iter().any(|&i| j >> i & 1 == 0 && sm >> i & 1 == 0) {
                continue;
            }
            let mut w = base.clone();
            s.iter().for_each(|&i| w[i] += 1);
            let sheaf = TwistedStratumSheaf {
                complex: space.complex.clone(),
                support: indices_of(union),
                twist: w,
            };
            for (h, d) in engine.cohomology(&sheaf, &space.selector)?.iter() {
                table.add(h as i64 + s.len() as i64, d);
            }
        }
    }
    Ok(table.shifted(a.shift - b.shift))
}

fn check_dims(space: &Space, a: &ExceptionalObject, b: &ExceptionalObject, extra: &[i64]) -> Result<()> {
    let n = space.n();
    for (what, len) in [("source", a.n()), ("target", b.n()), ("extra twist", extra.len())] {
        if len != n {
            return Err(Error::Dimension(format!("{what} of length {len} on a space with N = {n}")));
        }
    }
    if let Some(i) = a.support.iter().chain(&b.support).find(|&&i| i >= n) {
        return Err(Error::Dimension(format!("support index {} outside [1, {n}]", i + 1)));
    }
    Ok(())
}

/// `p - q + extra`, the twist of `Hom(O_I(-p), O_J(-q) ⊗ O(extra))` at `S = ∅`.
fn base_weight(a: &ExceptionalObject, b: &ExceptionalObject, extra: &[i64]) -> Vec<i64> {
    hom_twist(&a.twist(), &b.twist()).iter().zip(extra).map(|(w, e)| w + e).collect()
}

/// Possible values of `v_i = (p - q + extra + δ)_i` that can matter, grouped into
/// classes on which the degree-`δ` complex is constant.
#[derive(Debug, Clone, Copy)]
enum Class {
    Point(i64),
    AtMost(i64),
    AtLeast(i64),
    Any,
}

impl Class {
    fn representative(self) -> i64 {
        match self {
            Class::Point(v) | Class::AtMost(v) | Class::AtLeast(v) => v,
            Class::Any => 0,
        }
    }
}

fn coordinate_classes(in_i: bool, in_j: bool, used: bool) -> Vec<Class> {
    match (in_i, in_j) {
        (true, true) => vec![Class::Point(-1), Class::Point(0)],
        (false, true) => vec![Class::Point(0)],
        _ if !used => vec![Class::Any],
        (true, false) => vec![Class::AtMost(-2), Class::Point(-1), Class::AtLeast(0)],
        (false, false) => vec![Class::AtMost(-1), Class::AtLeast(0)],
    }
}

/// Total complex of `Čech(Hom(K_•(A), O_J(v)))` in one selected degree, where
/// `v = p - q + extra + δ`: slot `(S, s)` sits in degree `|S| + |s| - 1`.
fn koszul_cech(sets: &[Vec<(u64, Mask)>], support_a: &[usize], j: Mask, v: &[i64]) -> Cochain {
    let r = sets.len();
    let top = support_a.len() + r;
    let mut dims = vec![0usize; top];
    let mut index: HashMap<(u64, u64), usize> = HashMap::new();
    let subsets: Vec<u64> = (0u64..(1u64 << support_a.len()))
        .map(|bits| mask_of(&indices_of(bits).iter().map(|&k| support_a[k]).collect::<Vec<_>>()))
        .collect();
    let exponent = |sm: u64| -> Vec<i64> {
        v.iter().enumerate().map(|(i, &x)| x + i64::from(sm >> i & 1 == 1)).collect()
    };
    for &sm in &subsets {
        let m = exponent(sm);
        if indices_of(j).iter().any(|&i| m[i] != 0) {
            continue;
        }
        for (p, level) in sets.iter().enumerate() {
            for &(s, tau) in level {
                if tau & j == j && indices_of(tau & !j).iter().all(|&i| m[i] >= 0) {
                    let d = sm.count_ones() as usize + p;
                    index.insert((sm, s), dims[d]);
                    dims[d] += 1;
                }
            }
        }
    }
    let mut c = Cochain::with_dims(dims);
    for (&(sm, s), &src) in &index {
        let d = sm.count_ones() as usize + s.count_ones() as usize - 1;
        for &i in support_a {
            if sm >> i & 1 == 1 || j >> i & 1 == 1 {
                continue;
            }
            if let Some(&dst) = index.get(&(sm | 1 << i, s)) {
                let before = (sm & ((1u64 << i) - 1)).count_ones();
                c.push(d, dst, src, if before.is_multiple_of(2) { 1 } else { -1 });
            }
        }
        let sign = if sm.count_ones() % 2 == 0 { 1 } else { -1 };
        for k in (0..r).filter(|k| s >> k & 1 == 0) {
            if let Some(&dst) = index.get(&(sm, s | 1 << k)) {
                c.push(d, dst, src, sign * cech_sign(s, k));
            }
        }
    }
    c
}

/// `Ext^•(A, B ⊗ O(extra))` from the Koszul–Čech double complex, summed over
/// selected degrees region by region.
pub fn ext_koszul(engine: &Engine, space: &Space, a: &ExceptionalObject, b: &ExceptionalObject, extra: &[i64]) -> Result<ExtTable> {
    check_dims(space, a, b, extra)?;
    let mut table = ExtTable::default();
    if !space.complex.is_face(&b.support) {
        return Ok(table);
    }
    let n = space.n();
    let sets = engine.chart_sets(&space.complex);
    let base = base_weight(a, b, extra);
    let j = mask_of(&b.support);
    let mut add = |dims: &[u64], times: u64| {
        for (d, &h) in dims.iter().enumerate() {
            table.add(d as i64, h * times);
        }
    };
    match engine.fiber(&space.selector)? {
        Fiber::Empty => {}
        Fiber::Point(delta) => {
            let v: Vec<i64> = base.iter().zip(&delta).map(|(w, d)| w + d).collect();
            add(&koszul_cech(&sets, &a.support, j, &v).cohomology(), 1);
        }
        Fiber::Lattice => {
            let used = space.complex.used();
            let ia = mask_of(&a.support);
            let classes: Vec<Vec<Class>> = (0..n)
                .map(|i| coordinate_classes(ia >> i & 1 == 1, j >> i & 1 == 1, used >> i & 1 == 1))
                .collect();
            let mut choice = vec![0usize; n];
            loop {
                let region: Vec<Class> = (0..n).map(|i| classes[i][choice[i]]).collect();
                let v: Vec<i64> = region.iter().map(|c| c.representative()).collect();
                let h = koszul_cech(&sets, &a.support, j, &v).cohomology();
                if h.iter().any(|&x| x > 0) {
                    let mut p = space.selector.problem();
                    for (i, class) in region.iter().enumerate() {
                        match *class {
                            Class::Point(x) => {
                                p.lower[i] = Some(x - base[i]);
                                p.upper[i] = Some(x - base[i]);
                            }
                            Class::AtMost(x) => p.upper[i] = Some(x - base[i]),
                            Class::AtLeast(x) => p.lower[i] = Some(x - base[i]),
                            Class::Any => {}
                        }
                    }
                    add(&h, p.count()?);
                }
                // odometer over the class choices
                let Some(i) = (0..n).find(|&i| choice[i] + 1 < classes[i].len()) else { break };
                choice[i] += 1;
                choice[..i].iter_mut().for_each(|c| *c = 0);
            }
        }
    }
    Ok(table.shifted(a.shift - b.shift))
}

/// Both routes; disagreement is an error carrying both tables.
pub fn ext_checked(engine: &Engine, space: &Space, a: &ExceptionalObject, b: &ExceptionalObject, extra: &[i64]) -> Result<ExtTable> {
    let formula = ext_formula(engine, space, a, b, extra)?;
    let koszul = ext_koszul(engine, space, a, b, extra)?;
    if formula != koszul {
        return Err(Error::OracleDisagreement {
            context: format!("{} on {a} -> {b} twisted by {extra:?}", space.name),
            formula,
            koszul,
        });
    }
    Ok(formula)
}

/// Ext tables of an ordered object list against itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GramMatrix {
    pub objects: Vec<ExceptionalObject>,
    pub tables: Vec<Vec<ExtTable>>,
    /// Entries that were also computed by the Koszul route.
    pub checked: Vec<Vec<bool>>,
}

impl GramMatrix {
    pub fn euler(&self) -> Vec<Vec<i64>> {
        self.tables.iter().map(|row| row.iter().map(ExtTable::euler).collect()).collect()
    }

    pub fn checked_count(&self) -> usize {
        self.checked.iter().flatten().filter(|&&c| c).count()
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Deterministic choice of the entries spot-checked by the Koszul route.
pub fn spot_checked(row: usize, col: usize, fraction: f64) -> bool {
    if fraction >= 1.0 {
        return true;
    }
    let h = splitmix(((row as u64) << 32) ^ col as u64);
    (h as f64) < fraction * (u64::MAX as f64)
}

pub fn gram(engine: &Engine, space: &Space, objects: &[ExceptionalObject], oracle_fraction: f64) -> Result<GramMatrix> {
    let n = objects.len();
    let zero = vec![0; space.n()];
    let entries: Vec<(ExtTable, bool)> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n, k % n);
            let check = spot_checked(i, j, oracle_fraction);
            let table = if check {
                ext_checked(engine, space, &objects[i], &objects[j], &zero)?
            } else {
                ext_formula(engine, space, &objects[i], &objects[j], &zero)?
            };
            Ok((table, check))
        })
        .collect::<Result<_>>()?;
    let mut tables = vec![Vec::with_capacity(n); n];
    let mut checked = vec![Vec::with_capacity(n); n];
    for (k, (t, c)) in entries.into_iter().enumerate() {
        tables[k / n].push(t);
        checked[k / n].push(c);
    }
    Ok(GramMatrix { objects: objects.to_vec(), tables, checked })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::SimplicialComplex;

    fn p1() -> Space {
        Space::equivariant("P1", SimplicialComplex::projective_space(2))
    }

    fn obj(support: &[usize], p: &[i64]) -> ExceptionalObject {
        ExceptionalObject::new(support.to_vec(), p.to_vec())
    }

    #[test]
    fn projective_line_examples() {
        let e = Engine::new();
        let s = p1();
        let both = |a: &ExceptionalObject, b: &ExceptionalObject| ext_checked(&e, &s, a, b, &[0, 0]).unwrap().to_string();
        assert_eq!(both(&obj(&[], &[0, 0]), &obj(&[], &[0, 0])), "{0: 1}");
        assert_eq!(both(&obj(&[0], &[0, 0]), &obj(&[1], &[0, 0])), "{}");
        assert_eq!(both(&obj(&[0], &[0, 0]), &obj(&[0], &[0, 0])), "{0: 1}");
        assert_eq!(both(&obj(&[0], &[0, 0]), &obj(&[], &[0, 0])), "{}");
        assert_eq!(both(&obj(&[], &[0, 0]), &obj(&[0], &[0, 0])), "{0: 1}");
    }

    #[test]
    fn gram_examples() {
        let e = Engine::new();
        let objs = [obj(&[], &[0, 0]), obj(&[0], &[0, 0])];
        let g = gram(&e, &p1(), &objs, 1.0).unwrap();
        assert_eq!(g.euler(), vec![vec![1, 1], vec![0, 1]]);
        assert_eq!(g.checked_count(), 4);
        let g = gram(&e, &p1(), &objs[..1], 0.0).unwrap();
        assert_eq!(g.euler(), vec![vec![1]]);
    }

    #[test]
    fn shifts_translate_degrees() {
        let e = Engine::new();
        let a = ExceptionalObject::with_shift(vec![], vec![0, 0], 2);
        let b = obj(&[0], &[0, 0]);
        assert_eq!(ext_checked(&e, &p1(), &a, &b, &[0, 0]).unwrap().to_string(), "{2: 1}");
    }

    #[test]
    fn invariant_selector_routes_agree() {
        let e = Engine::new();
        let sel = WeightSelector::invariant(2, &[vec![1, 1]], &[]).unwrap();
        let s = Space::new("P1", SimplicialComplex::projective_space(2), sel).unwrap();
        // Hom(O, O(2)) = 3, Ext^1(O(2), O) = 1
        assert_eq!(ext_checked(&e, &s, &obj(&[], &[0, 0]), &obj(&[], &[-2, 0]), &[0, 0]).unwrap().to_string(), "{0: 3}");
        assert_eq!(ext_checked(&e, &s, &obj(&[], &[-2, 0]), &obj(&[], &[0, 0]), &[0, 0]).unwrap().to_string(), "{1: 1}");
        for a in -2..=2 {
            for b in -2..=2 {
                for (i, j) in [(vec![], vec![0]), (vec![0], vec![0]), (vec![1], vec![]), (vec![0], vec![1])] {
                    ext_checked(&e, &s, &obj(&i, &[a, 0]), &obj(&j, &[0, b]), &[0, 0]).unwrap();
                }
            }
        }
    }
}
