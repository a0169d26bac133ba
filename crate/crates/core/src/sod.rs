//! Window-scale verdicts: exceptionality, semi-orthogonality under the pair
//! order, and detection of nonzero probes by a spanning family.

use serde::Serialize;

use crate::cech::Engine;
use crate::error::Result;
use crate::ext::{gram, ExtTable};
use crate::objects::{compare_pairs, decode, ExceptionalObject, Label, PairOrder};
use crate::space::Space;

/// All labels in `∏ [lo_i, hi_i]`, lexicographically descending.
pub fn window(bounds: &[(i64, i64)]) -> Vec<Label> {
    if bounds.iter().any(|(lo, hi)| lo > hi) {
        return Vec::new();
    }
    let mut out = vec![Vec::new()];
    for &(lo, hi) in bounds {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<i64>| {
                (lo..=hi).rev().map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(Label).collect()
}

/// Which ordered pairs `(A, B)` are asserted to satisfy `Ext(A, B) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderRule {
    /// `A > B` in the pair order on decoded labels.
    Pair,
    /// `a > b` lexicographically on labels.
    LabelDescending,
    /// `a < b` lexicographically on labels (the reversed order).
    LabelAscending,
}

impl OrderRule {
    pub fn asserts(self, a: &Label, b: &Label, ea: &ExceptionalObject, eb: &ExceptionalObject) -> bool {
        match self {
            OrderRule::Pair => compare_pairs(ea, eb) == PairOrder::Greater,
            OrderRule::LabelDescending => a > b,
            OrderRule::LabelAscending => a < b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowObject {
    pub label: Label,
    pub object: ExceptionalObject,
    /// Supported on an empty stratum.
    pub zero: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairRecord {
    pub source: Label,
    pub target: Label,
    pub table: ExtTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SodReport {
    pub space: String,
    pub rule: OrderRule,
    pub objects: Vec<WindowObject>,
    /// Endomorphism tables of nonzero objects that differ from `{0: 1}`.
    pub exceptionality_failures: Vec<PairRecord>,
    pub exceptional_checked: usize,
    /// Asserted pairs with a nonzero table.
    pub vanishing_failures: Vec<PairRecord>,
    pub vanishing_checked: usize,
    /// Tie pairs with the lexicographically larger label as source, all reported.
    pub ties: Vec<PairRecord>,
    /// Pairs with `a > b` as labels that the pair order does not assert, with a nonzero table.
    pub label_only_nonzero: Vec<PairRecord>,
    /// `histogram[r]`: number of ordered pairs of nonzero objects with `Ext^r ≠ 0`.
    pub degree_histogram: Vec<(i64, usize)>,
    /// Euler matrix of the nonzero objects in ascending pair order.
    pub euler_ascending: Vec<Vec<i64>>,
    /// Whether that matrix is upper triangular with unit diagonal (necessary for fullness
    /// evidence, not a proof of it).
    pub unitriangular: bool,
    pub oracle_checked: usize,
}

impl SodReport {
    pub fn passed(&self) -> bool {
        self.exceptionality_failures.is_empty() && self.vanishing_failures.is_empty()
    }
}

fn unit_table() -> ExtTable {
    let mut t = ExtTable::default();
    t.add(0, 1);
    t
}

pub fn check_sod(engine: &Engine, space: &Space, labels: &[Label], rule: OrderRule, oracle_fraction: f64) -> Result<SodReport> {
    let objects: Vec<WindowObject> = labels
        .iter()
        .map(|a| {
            let object = decode(a);
            let zero = !space.complex.is_face(&object.support);
            WindowObject { label: a.clone(), object, zero }
        })
        .collect();
    let plain: Vec<ExceptionalObject> = objects.iter().map(|o| o.object.clone()).collect();
    let g = gram(engine, space, &plain, oracle_fraction)?;
    let record = |i: usize, j: usize| PairRecord {
        source: objects[i].label.clone(),
        target: objects[j].label.clone(),
        table: g.tables[i][j].clone(),
    };
    let unit = unit_table();
    let mut report = SodReport {
        space: space.name.clone(),
        rule,
        objects: objects.clone(),
        exceptionality_failures: Vec::new(),
        exceptional_checked: 0,
        vanishing_failures: Vec::new(),
        vanishing_checked: 0,
        ties: Vec::new(),
        label_only_nonzero: Vec::new(),
        degree_histogram: Vec::new(),
        euler_ascending: Vec::new(),
        unitriangular: true,
        oracle_checked: g.checked_count(),
    };
    let mut histogram = std::collections::BTreeMap::new();
    for (i, oi) in objects.iter().enumerate() {
        if !oi.zero {
            report.exceptional_checked += 1;
            if g.tables[i][i] != unit {
                report.exceptionality_failures.push(record(i, i));
            }
        }
        for (j, oj) in objects.iter().enumerate() {
            if i == j {
                continue;
            }
            let table = &g.tables[i][j];
            if !oi.zero && !oj.zero {
                for (r, _) in table.iter() {
                    *histogram.entry(r).or_insert(0usize) += 1;
                }
            }
            let asserted = rule.asserts(&oi.label, &oj.label, &oi.object, &oj.object);
            if asserted {
                report.vanishing_checked += 1;
                if !table.is_zero() {
                    report.vanishing_failures.push(record(i, j));
                }
            }
            if compare_pairs(&oi.object, &oj.object) == PairOrder::Tie && oi.label > oj.label {
                report.ties.push(record(i, j));
            } else if oi.label > oj.label
                && compare_pairs(&oi.object, &oj.object) != PairOrder::Greater
                && !table.is_zero()
            {
                report.label_only_nonzero.push(record(i, j));
            }
        }
    }
    report.degree_histogram = histogram.into_iter().collect();
    let mut order: Vec<usize> = (0..objects.len()).filter(|&i| !objects[i].zero).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (&objects[i].object, &objects[j].object);
        a.p.cmp(&b.p).then(a.support.len().cmp(&b.support.len())).then(a.support.cmp(&b.support))
    });
    let euler = g.euler();
    report.euler_ascending = order.iter().map(|&i| order.iter().map(|&j| euler[i][j]).collect()).collect();
    report.unitriangular = report.euler_ascending.iter().enumerate().all(|(r, row)| {
        row.iter().enumerate().all(|(c, &x)| match r.cmp(&c) {
            std::cmp::Ordering::Equal => x == 1,
            std::cmp::Ordering::Greater => x == 0,
            std::cmp::Ordering::Less => true,
        })
    });
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Detection {
    Detected { member: ExceptionalObject, table: ExtTable },
    Undetected,
    ZeroObject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeRecord {
    pub probe: ExceptionalObject,
    pub detection: Detection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpanReport {
    pub space: String,
    pub family_size: usize,
    pub probes: Vec<ProbeRecord>,
}

impl SpanReport {
    /// Every nonzero probe is detected.
    pub fn passed(&self) -> bool {
        self.probes.iter().all(|p| !matches!(p.detection, Detection::Undetected))
    }
}

/// Line bundles `O(d)` for `d` in the window, as objects.
pub fn line_bundle_family(bounds: &[(i64, i64)]) -> Vec<ExceptionalObject> {
    window(bounds)
        .into_iter()
        .map(|d| ExceptionalObject::new(Vec::new(), d.0.iter().map(|x| -x).collect()))
        .collect()
}

/// Stratum sheaves `O_{K,0}` for every subset `K` of the ground set.
pub fn stratum_probes(n: usize) -> Vec<ExceptionalObject> {
    (0u64..(1u64 << n))
        .map(|bits| ExceptionalObject::new(crate::fan::indices_of(bits), vec![0; n]))
        .collect()
}

pub fn spanning_detect(
    engine: &Engine,
    space: &Space,
    family: &[ExceptionalObject],
    probes: &[ExceptionalObject],
) -> Result<SpanReport> {
    use rayon::prelude::*;
    let zero = vec![0; space.n()];
    let records = probes
        .par_iter()
        .map(|probe| {
            if !space.complex.is_face(&probe.support) {
                return Ok(ProbeRecord { probe: probe.clone(), detection: Detection::ZeroObject });
            }
            for member in family {
                let table = crate::ext::ext_formula(engine, space, member, probe, &zero)?;
                if !table.is_zero() {
                    return Ok(ProbeRecord {
                        probe: probe.clone(),
                        detection: Detection::Detected { member: member.clone(), table },
                    });
                }
            }
            Ok(ProbeRecord { probe: probe.clone(), detection: Detection::Undetected })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpanReport { space: space.name.clone(), family_size: family.len(), probes: records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::SimplicialComplex;

    #[test]
    fn window_examples() {
        let w: Vec<Vec<i64>> = window(&[(-1, 1)]).into_iter().map(|l| l.0).collect();
        assert_eq!(w, vec![vec![1], vec![0], vec![-1]]);
        let w: Vec<Vec<i64>> = window(&[(0, 1), (0, 1)]).into_iter().map(|l| l.0).collect();
        assert_eq!(w, vec![vec![1, 1], vec![1, 0], vec![0, 1], vec![0, 0]]);
        assert!(window(&[(0, 1), (1, 0)]).is_empty());
    }

    #[test]
    fn projective_line_window() {
        let e = Engine::new();
        let s = Space::equivariant("P1", SimplicialComplex::projective_space(2));
        let r = check_sod(&e, &s, &window(&[(-1, 1), (-1, 1)]), OrderRule::Pair, 1.0).unwrap();
        assert!(r.passed(), "{r:?}");
        let r = check_sod(&e, &s, &window(&[(-1, 1), (-1, 1)]), OrderRule::LabelAscending, 0.0).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn detection_on_projective_line() {
        let e = Engine::new();
        let s = Space::equivariant("P1", SimplicialComplex::projective_space(2));
        let r = spanning_detect(&e, &s, &line_bundle_family(&[(-2, 2), (-2, 2)]), &stratum_probes(2)).unwrap();
        assert!(r.passed());
        let zero = r.probes.iter().filter(|p| p.detection == Detection::ZeroObject).count();
        assert_eq!(zero, 1);
    }
}
