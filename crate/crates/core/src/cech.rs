//! Graded Čech cohomology of twisted stratum sheaves on `U_Σ`.
//!
//! Fix a selected degree `δ` and put `m = e + δ` (see [`crate::grading`]).
//! The degree-`δ` part of the Čech complex over the cover by maximal charts has
//! a one-dimensional slot for every set of charts whose intersection `τ`
//! contains `K` and avoids the negative coordinates of `m`, and nothing else.
//! Hence the cohomology only depends on the sign pattern
//! `N = {i : m_i < 0}`, and the full answer is
//! `Σ_N h^•(K, N) · #{selected δ with pattern N}`.
//! Only patterns with nonzero `h^•(K, N)` are ever counted, so a region of
//! infinitely many degrees is an error exactly when it contributes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use dashmap::DashMap;
use serde::{Deserialize, Serialize};

use crate::cache::Store;
use crate::cochain::Cochain;
use crate::error::{Error, Result};
use crate::fan::{indices_of, mask_of, Mask, SimplicialComplex};
use crate::grading::section_exponent;
use crate::selector::{Fiber, WeightSelector};

/// `O_K(e)` on `U_Σ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwistedStratumSheaf {
    pub complex: SimplicialComplex,
    pub support: Vec<usize>,
    pub twist: Vec<i64>,
}

impl TwistedStratumSheaf {
    pub fn new(complex: SimplicialComplex, support: Vec<usize>, twist: Vec<i64>) -> Result<Self> {
        let n = complex.ground_size();
        if twist.len() != n {
            return Err(Error::Dimension(format!("twist of length {} for N = {n}", twist.len())));
        }
        if let Some(i) = support.iter().find(|&&i| i >= n) {
            return Err(Error::Dimension(format!("support index {} outside [1, {n}]", i + 1)));
        }
        let mut support = support;
        support.sort_unstable();
        support.dedup();
        Ok(TwistedStratumSheaf { complex, support, twist })
    }

    /// Whether `{z_i = 0, i ∈ K} ∩ U_Σ` is empty.
    pub fn is_empty_stratum(&self) -> bool {
        !self.complex.is_face(&self.support)
    }
}

/// Cohomological degree to dimension; zero entries are not stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CohomologyTable(BTreeMap<usize, u64>);

impl CohomologyTable {
    pub fn from_dims(dims: &[u64]) -> Self {
        CohomologyTable(dims.iter().enumerate().filter(|(_, &d)| d > 0).map(|(i, &d)| (i, d)).collect())
    }

    pub fn get(&self, degree: usize) -> u64 {
        self.0.get(&degree).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.0.iter().map(|(&i, &d)| (i, d))
    }

    pub fn euler(&self) -> i64 {
        self.iter().map(|(i, d)| if i % 2 == 0 { d as i64 } else { -(d as i64) }).sum()
    }

    fn add_scaled(&mut self, dims: &[u64], times: u64) {
        for (i, &d) in dims.iter().enumerate() {
            if d > 0 && times > 0 {
                *self.0.entry(i).or_insert(0) += d * times;
            }
        }
    }
}

impl fmt::Display for CohomologyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (i, d)) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}: {d}")?;
        }
        write!(f, "}}")
    }
}

/// Nonempty sets of maximal charts, as `(chart set, intersection face)`,
/// grouped by size: `result[p]` holds the sets with `p + 1` charts.
pub(crate) type ChartSets = Vec<Vec<(u64, Mask)>>;

pub(crate) fn chart_sets(faces: &[Mask]) -> ChartSets {
    let r = faces.len();
    assert!(r < 64, "too many maximal faces");
    let mut by_size = vec![Vec::new(); r];
    for s in 1u64..(1u64 << r) {
        let tau = indices_of(s).iter().fold(!0u64, |acc, &j| acc & faces[j]);
        by_size[s.count_ones() as usize - 1].push((s, tau));
    }
    by_size
}

/// Sign of inserting chart `j` into the ordered chart set `s`.
pub(crate) fn cech_sign(s: u64, j: usize) -> i64 {
    if (s & ((1u64 << j) - 1)).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// The degree-`m` Čech complex, with slots where `valid(τ)` holds.
fn cech_complex(sets: &[Vec<(u64, Mask)>], valid: &dyn Fn(Mask) -> bool) -> Cochain {
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut dims = Vec::with_capacity(sets.len());
    for level in sets {
        let mut count = 0;
        for &(s, tau) in level {
            if valid(tau) {
                index.insert(s, count);
                count += 1;
            }
        }
        dims.push(count);
    }
    let mut c = Cochain::with_dims(dims);
    let r = sets.len();
    for (p, level) in sets.iter().enumerate().take(r.saturating_sub(1)) {
        for &(s, _) in level {
            let Some(&src) = index.get(&s) else { continue };
            for j in (0..r).filter(|j| s >> j & 1 == 0) {
                if let Some(&dst) = index.get(&(s | 1 << j)) {
                    c.push(p, dst, src, cech_sign(s, j));
                }
            }
        }
    }
    c
}

fn pattern_valid(k: Mask, negative: Mask) -> impl Fn(Mask) -> bool {
    move |tau| tau & k == k && tau & negative == 0
}

fn exponent_valid(k: Mask, m: &[i64]) -> impl Fn(Mask) -> bool + '_ {
    move |tau| tau & k == k && indices_of(tau & !k).iter().all(|&i| m[i] >= 0)
}

/// All degrees `δ` selected by `sel` for which the monomial of degree `δ` in `O_K(e)`
/// is a section over the chart of `face`.
pub fn selected_degrees(sheaf: &TwistedStratumSheaf, sel: &WeightSelector, face: &[usize]) -> Result<Vec<Vec<i64>>> {
    let k = mask_of(&sheaf.support);
    let sigma = mask_of(face);
    if sigma & k != k {
        return Ok(Vec::new());
    }
    let mut p = sel.problem();
    for i in 0..sheaf.twist.len() {
        let bound = -sheaf.twist[i];
        if k >> i & 1 == 1 {
            p.lower[i] = Some(bound);
            p.upper[i] = Some(bound);
        } else if sigma >> i & 1 == 1 {
            p.lower[i] = Some(bound);
        }
    }
    p.points()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
struct TableKey {
    complex: SimplicialComplex,
    support: Vec<usize>,
    twist: Vec<i64>,
    selector: WeightSelector,
}

/// Memoizing cohomology engine; safe to share across threads.
#[derive(Default)]
pub struct Engine {
    patterns: DashMap<(SimplicialComplex, Mask, Mask), Arc<Vec<u64>>>,
    charts: DashMap<SimplicialComplex, Arc<ChartSets>>,
    fibers: DashMap<WeightSelector, Fiber>,
    tables: DashMap<TableKey, CohomologyTable>,
    store: Option<Store>,
}

impl Engine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_store(store: Store) -> Self {
        Engine { store: Some(store), ..Self::default() }
    }

    pub fn store(&self) -> Option<&Store> {
        self.store.as_ref()
    }

    pub(crate) fn chart_sets(&self, complex: &SimplicialComplex) -> Arc<ChartSets> {
        if let Some(c) = self.charts.get(complex) {
            return c.clone();
        }
        let sets = Arc::new(chart_sets(&complex.max_face_masks()));
        self.charts.insert(complex.clone(), sets.clone());
        sets
    }

    pub(crate) fn fiber(&self, sel: &WeightSelector) -> Result<Fiber> {
        if let Some(f) = self.fibers.get(sel) {
            return Ok(f.clone());
        }
        let f = sel.fiber()?;
        self.fibers.insert(sel.clone(), f.clone());
        Ok(f)
    }

    /// `h^•(K, N)`: cohomology of the degree-`m` Čech complex for any `m`
    /// with `m_K = 0` and negative coordinates `N`.
    pub(crate) fn pattern(&self, complex: &SimplicialComplex, k: Mask, negative: Mask) -> Arc<Vec<u64>> {
        let key = (complex.clone(), k, negative);
        if let Some(h) = self.patterns.get(&key) {
            return h.clone();
        }
        let sets = self.chart_sets(complex);
        let h = Arc::new(cech_complex(&sets, &pattern_valid(k, negative)).cohomology());
        self.patterns.insert(key, h.clone());
        h
    }

    pub fn cohomology(&self, sheaf: &TwistedStratumSheaf, sel: &WeightSelector) -> Result<CohomologyTable> {
        if sel.n != sheaf.complex.ground_size() {
            return Err(Error::Dimension(format!(
                "selector on {} coordinates for N = {}",
                sel.n,
                sheaf.complex.ground_size()
            )));
        }
        let key = TableKey {
            complex: sheaf.complex.clone(),
            support: sheaf.support.clone(),
            twist: sheaf.twist.clone(),
            selector: sel.clone(),
        };
        if let Some(t) = self.tables.get(&key) {
            return Ok(t.clone());
        }
        let store_key = self.store.as_ref().map(|_| serde_json::to_string(&key).expect("serializable key"));
        if let (Some(store), Some(sk)) = (&self.store, &store_key) {
            if let Some(t) = store.get::<CohomologyTable>(sk) {
                self.tables.insert(key, t.clone());
                return Ok(t);
            }
        }
        let table = self.compute(sheaf, sel)?;
        if let (Some(store), Some(sk)) = (&self.store, &store_key) {
            store.put(sk, &table);
        }
        self.tables.insert(key, table.clone());
        Ok(table)
    }

    fn compute(&self, sheaf: &TwistedStratumSheaf, sel: &WeightSelector) -> Result<CohomologyTable> {
        let mut table = CohomologyTable::default();
        if sheaf.is_empty_stratum() {
            return Ok(table);
        }
        let complex = &sheaf.complex;
        let k = mask_of(&sheaf.support);
        let used = complex.used();
        match self.fiber(sel)? {
            Fiber::Empty => {}
            Fiber::Point(delta) => {
                let m = section_exponent(&sheaf.twist, &delta);
                if sheaf.support.iter().all(|&i| m[i] == 0) {
                    let negative = mask_of(&(0..m.len()).filter(|&i| m[i] < 0).collect::<Vec<_>>()) & used & !k;
                    table.add_scaled(&self.pattern(complex, k, negative), 1);
                }
            }
            Fiber::Lattice => {
                let free = used & !k;
                let mut negative = 0u64;
                loop {
                    let h = self.pattern(complex, k, negative);
                    if h.iter().any(|&d| d > 0) {
                        let mut p = sel.problem();
                        for i in 0..sheaf.twist.len() {
                            let bound = -sheaf.twist[i];
                            if k >> i & 1 == 1 {
                                p.lower[i] = Some(bound);
                                p.upper[i] = Some(bound);
                            } else if negative >> i & 1 == 1 {
                                p.upper[i] = Some(bound - 1);
                            } else if free >> i & 1 == 1 {
                                p.lower[i] = Some(bound);
                            }
                        }
                        table.add_scaled(&h, p.count()?);
                    }
                    // next submask of `free`
                    if negative == free {
                        break;
                    }
                    negative = (negative.wrapping_sub(free)) & free;
                }
            }
        }
        Ok(table)
    }

    pub fn euler_characteristic(&self, sheaf: &TwistedStratumSheaf, sel: &WeightSelector) -> Result<i64> {
        Ok(self.cohomology(sheaf, sel)?.euler())
    }
}

/// Cohomology table of `O_K(e)` on the degrees selected by `sel`.
pub fn graded_cohomology(sheaf: &TwistedStratumSheaf, sel: &WeightSelector) -> Result<CohomologyTable> {
    Engine::new().cohomology(sheaf, sel)
}

pub fn euler_characteristic(sheaf: &TwistedStratumSheaf, sel: &WeightSelector) -> Result<i64> {
    Engine::new().euler_characteristic(sheaf, sel)
}

/// Every selected degree carrying a section on some chart intersection.
/// Fails with `NonFinite` unless each intersection chart sees finitely many.
pub fn contributing_degrees(sheaf: &TwistedStratumSheaf, sel: &WeightSelector) -> Result<Vec<Vec<i64>>> {
    if sheaf.is_empty_stratum() {
        return Ok(Vec::new());
    }
    let faces: BTreeSet<Mask> = chart_sets(&sheaf.complex.max_face_masks())
        .into_iter()
        .flatten()
        .map(|(_, tau)| tau)
        .collect();
    let mut all = BTreeSet::new();
    for tau in faces {
        all.extend(selected_degrees(sheaf, sel, &indices_of(tau))?);
    }
    Ok(all.into_iter().collect())
}

fn degree_complex(sheaf: &TwistedStratumSheaf, sets: &[Vec<(u64, Mask)>], delta: &[i64]) -> Cochain {
    let m = section_exponent(&sheaf.twist, delta);
    let k = mask_of(&sheaf.support);
    if sheaf.support.iter().any(|&i| m[i] != 0) {
        return Cochain::with_dims(vec![0; sets.len()]);
    }
    let valid = exponent_valid(k, &m);
    cech_complex(sets, &valid)
}

/// Sum over selected degrees of the cohomology of each degree's own complex.
pub fn graded_cohomology_per_degree(sheaf: &TwistedStratumSheaf, sel: &WeightSelector) -> Result<CohomologyTable> {
    let sets = chart_sets(&sheaf.complex.max_face_masks());
    let mut table = CohomologyTable::default();
    for delta in contributing_degrees(sheaf, sel)? {
        table.add_scaled(&degree_complex(sheaf, &sets, &delta).cohomology(), 1);
    }
    Ok(table)
}

/// Cohomology of the single complex formed by all selected degrees at once.
pub fn graded_cohomology_assembled(sheaf: &TwistedStratumSheaf, sel: &WeightSelector) -> Result<CohomologyTable> {
    let sets = chart_sets(&sheaf.complex.max_face_masks());
    let mut big = Cochain::with_dims(vec![0; sets.len()]);
    for delta in contributing_degrees(sheaf, sel)? {
        let c = degree_complex(sheaf, &sets, &delta);
        for d in 0..sets.len() {
            let (row_off, col_off) = (big.dims.get(d + 1).copied().unwrap_or(0), big.dims[d]);
            for &(t, s, v) in &c.maps[d] {
                big.maps[d].push((t + row_off, s + col_off, v));
            }
        }
        for d in 0..sets.len() {
            big.dims[d] += c.dims[d];
        }
    }
    Ok(CohomologyTable::from_dims(&big.cohomology()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1() -> SimplicialComplex {
        SimplicialComplex::projective_space(2)
    }

    fn sheaf(support: Vec<usize>, twist: Vec<i64>) -> TwistedStratumSheaf {
        TwistedStratumSheaf::new(p1(), support, twist).unwrap()
    }

    #[test]
    fn selected_degrees_examples() {
        let eq = WeightSelector::equivariant(2);
        assert_eq!(selected_degrees(&sheaf(vec![], vec![0, 0]), &eq, &[0]).unwrap(), vec![vec![0, 0]]);
        let none = WeightSelector::unrestricted(2);
        assert!(matches!(
            selected_degrees(&sheaf(vec![], vec![0, 0]), &none, &[0]),
            Err(Error::NonFinite { .. })
        ));
        assert!(selected_degrees(&sheaf(vec![0], vec![1, 0]), &eq, &[0]).unwrap().is_empty());
    }

    #[test]
    fn cohomology_examples() {
        let eq = WeightSelector::equivariant(2);
        let t = |s: TwistedStratumSheaf| graded_cohomology(&s, &eq).unwrap().to_string();
        assert_eq!(t(sheaf(vec![], vec![0, 0])), "{0: 1}");
        assert_eq!(t(sheaf(vec![], vec![-1, -1])), "{1: 1}");
        assert_eq!(t(sheaf(vec![0], vec![0, 0])), "{0: 1}");
        assert_eq!(euler_characteristic(&sheaf(vec![], vec![-1, -1]), &eq).unwrap(), -1);
        assert_eq!(euler_characteristic(&sheaf(vec![0, 1], vec![0, 0]), &eq).unwrap(), 0);
    }

    #[test]
    fn invariant_sections_of_projective_line() {
        // H^0(O(d)) on P^1 has dimension d + 1, H^1(O(-d)) has dimension d - 1.
        let sel = WeightSelector::invariant(2, &[vec![1, 1]], &[]).unwrap();
        for d in -4i64..=4 {
            let t = graded_cohomology(&sheaf(vec![], vec![d, 0]), &sel).unwrap();
            assert_eq!(t.get(0) as i64, (d + 1).max(0));
            assert_eq!(t.get(1) as i64, (-d - 1).max(0));
        }
    }

    #[test]
    fn decomposition_variants_agree() {
        let eq = WeightSelector::equivariant(2);
        for a in -3..=3 {
            for b in -3..=3 {
                for k in [vec![], vec![0], vec![1]] {
                    let s = sheaf(k, vec![a, b]);
                    let t = graded_cohomology(&s, &eq).unwrap();
                    assert_eq!(t, graded_cohomology_per_degree(&s, &eq).unwrap());
                    assert_eq!(t, graded_cohomology_assembled(&s, &eq).unwrap());
                }
            }
        }
        // affine plane with positive weights: every chart sees finitely many degrees
        let plane = SimplicialComplex::new(2, vec![vec![0, 1]]).unwrap();
        let sel = WeightSelector::new(2, vec![vec![1, 2]], vec![5], vec![]).unwrap();
        let s = TwistedStratumSheaf::new(plane, vec![], vec![0, 0]).unwrap();
        let t = graded_cohomology(&s, &sel).unwrap();
        assert_eq!(t.to_string(), "{0: 3}");
        assert_eq!(t, graded_cohomology_assembled(&s, &sel).unwrap());
    }

    #[test]
    fn unrestricted_selector_is_nonfinite_only_when_it_contributes() {
        let none = WeightSelector::unrestricted(2);
        assert!(matches!(graded_cohomology(&sheaf(vec![], vec![0, 0]), &none), Err(Error::NonFinite { .. })));
        // the empty stratum contributes nothing at all
        assert!(graded_cohomology(&sheaf(vec![0, 1], vec![0, 0]), &none).unwrap().is_zero());
    }
}
