//! Exceptional objects `E = O_{I,p}[shift]`, their integer labels, the pair
//! order and Koszul resolutions.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::fan::mask_of;
use crate::grading::pair_twist;

/// The stratum sheaf `O_I(-p)` placed in homological degree `-shift`.
/// `support` holds 0-based sorted indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExceptionalObject {
    pub support: Vec<usize>,
    pub p: Vec<i64>,
    #[serde(default)]
    pub shift: i64,
}

impl ExceptionalObject {
    pub fn new(support: Vec<usize>, p: Vec<i64>) -> Self {
        Self::with_shift(support, p, 0)
    }

    pub fn with_shift(mut support: Vec<usize>, p: Vec<i64>, shift: i64) -> Self {
        support.sort_unstable();
        support.dedup();
        ExceptionalObject { support, p, shift }
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    /// Twist `e` with `O_{I,p} = O_I(e)`.
    pub fn twist(&self) -> Vec<i64> {
        pair_twist(&self.p)
    }

    /// `E ⊗ O(e)`: the generator degree moves by `-e`.
    pub fn twisted(&self, e: &[i64]) -> Self {
        let p = self.p.iter().zip(e).map(|(p, e)| p - e).collect();
        ExceptionalObject { support: self.support.clone(), p, shift: self.shift }
    }
}

impl fmt::Display for ExceptionalObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one_based: Vec<usize> = self.support.iter().map(|i| i + 1).collect();
        write!(f, "({one_based:?}, {:?})", self.p)?;
        if self.shift != 0 {
            write!(f, "[{}]", self.shift)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub Vec<i64>);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Canonical pair of a label: `i ∈ I` iff `a_i ≠ 0`, with `p_i = a_i - 1`
/// for positive entries and `p_i = a_i` otherwise.
pub fn decode(a: &Label) -> ExceptionalObject {
    let support = (0..a.0.len()).filter(|&i| a.0[i] != 0).collect();
    let p = a.0.iter().map(|&x| if x >= 1 { x - 1 } else { x }).collect();
    ExceptionalObject::new(support, p)
}

/// `a_i = p_i + 1` when `p_i ≥ 0` and `i ∈ I`, otherwise `a_i = p_i`.
pub fn encode(support: &[usize], p: &[i64]) -> Label {
    let k = mask_of(support);
    Label(
        p.iter()
            .enumerate()
            .map(|(i, &x)| if x >= 0 && k >> i & 1 == 1 { x + 1 } else { x })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairOrder {
    Greater,
    Less,
    Equal,
    /// Same `p`, same `|I|`, different `I`.
    Tie,
}

/// `(p, I) > (q, J)` iff `p > q` lexicographically, or `p = q` and `|I| > |J|`.
pub fn compare_pairs(a: &ExceptionalObject, b: &ExceptionalObject) -> PairOrder {
    match a.p.cmp(&b.p).then(a.support.len().cmp(&b.support.len())) {
        Ordering::Greater => PairOrder::Greater,
        Ordering::Less => PairOrder::Less,
        Ordering::Equal if a.support == b.support => PairOrder::Equal,
        Ordering::Equal => PairOrder::Tie,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KoszulSummand {
    pub subset: Vec<usize>,
    pub twist: Vec<i64>,
}

/// `0 → K_{|I|} → ... → K_0 → O_{I,p} → 0` with `K_s = ⊕_{|S|=s} O(-p - χ_S)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KoszulResolution {
    pub terms: Vec<Vec<KoszulSummand>>,
}

impl KoszulResolution {
    /// Entries `(target index in term s-1, source index in term s, coordinate, sign)`
    /// of `d(e_S) = Σ_{i∈S} (-1)^{pos(i,S)} z_i e_{S∖i}`.
    pub fn differential(&self, s: usize) -> Vec<(usize, usize, usize, i64)> {
        let mut out = Vec::new();
        for (src, summand) in self.terms[s].iter().enumerate() {
            for (pos, &i) in summand.subset.iter().enumerate() {
                let smaller: Vec<usize> = summand.subset.iter().copied().filter(|&j| j != i).collect();
                let dst = self.terms[s - 1]
                    .iter()
                    .position(|t| t.subset == smaller)
                    .expect("face of a Koszul subset");
                out.push((dst, src, i, if pos % 2 == 0 { 1 } else { -1 }));
            }
        }
        out
    }
}

/// Subsets of `items` of every size, each in increasing order, grouped by size.
pub fn subsets_by_size(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let mut out = vec![Vec::new(); items.len() + 1];
    for bits in 0u64..(1u64 << items.len()) {
        let s: Vec<usize> = (0..items.len()).filter(|j| bits >> j & 1 == 1).map(|j| items[j]).collect();
        out[s.len()].push(s);
    }
    out.iter_mut().for_each(|level| level.sort());
    out
}

pub fn koszul(object: &ExceptionalObject) -> KoszulResolution {
    let base = object.twist();
    let terms = subsets_by_size(&object.support)
        .into_iter()
        .map(|level| {
            level
                .into_iter()
                .map(|subset| {
                    let mut twist = base.clone();
                    subset.iter().for_each(|&i| twist[i] -= 1);
                    KoszulSummand { subset, twist }
                })
                .collect()
        })
        .collect();
    KoszulResolution { terms }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj(support: &[usize], p: &[i64]) -> ExceptionalObject {
        ExceptionalObject::new(support.to_vec(), p.to_vec())
    }

    #[test]
    fn codec_examples() {
        assert_eq!(decode(&Label(vec![0, 0])), obj(&[], &[0, 0]));
        assert_eq!(decode(&Label(vec![2, 1])), obj(&[0, 1], &[1, 0]));
        assert_eq!(encode(&[], &[0, 0]), Label(vec![0, 0]));
        assert_eq!(encode(&[0], &[0, -2]), Label(vec![1, -2]));
        // the two branches of the encode rule collide on negative entries
        assert_eq!(encode(&[0], &[-1, 0]), encode(&[], &[-1, 0]));
    }

    #[test]
    fn order_examples() {
        assert_eq!(compare_pairs(&obj(&[], &[1, 0]), &obj(&[], &[0, 5])), PairOrder::Greater);
        assert_eq!(compare_pairs(&obj(&[0], &[0, 0]), &obj(&[], &[0, 0])), PairOrder::Greater);
        assert_eq!(compare_pairs(&obj(&[0], &[0, 0]), &obj(&[1], &[0, 0])), PairOrder::Tie);
        assert_eq!(compare_pairs(&obj(&[1], &[0, 0]), &obj(&[1], &[0, 0])), PairOrder::Equal);
    }

    #[test]
    fn koszul_examples() {
        let k = koszul(&obj(&[0, 1], &[1, 0]));
        let twists: Vec<Vec<Vec<i64>>> =
            k.terms.iter().map(|t| t.iter().map(|s| s.twist.clone()).collect()).collect();
        assert_eq!(
            twists,
            vec![vec![vec![-1, 0]], vec![vec![-2, 0], vec![-1, -1]], vec![vec![-2, -1]]]
        );
        assert_eq!(koszul(&obj(&[], &[3, 4])).terms.len(), 1);
        assert_eq!(k.differential(2), vec![(1, 0, 0, 1), (0, 0, 1, -1)]);
    }
}
