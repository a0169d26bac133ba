//! Irrelevant-locus complexes, stacky quotient data and simplicial fans.
//!
//! Ground elements are 0-based internally; the JSON schema uses 1-based indices.
//! A subset `σ` is a face when the coordinates `{z_i : i ∈ σ}` may vanish
//! simultaneously on `U_Σ`; the chart of a face `σ` inverts every coordinate
//! outside `σ`.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{rational, smith_invariants, solve_rational};

/// Bit mask of a subset of the ground set.
pub type Mask = u64;

pub fn mask_of(indices: &[usize]) -> Mask {
    indices.iter().fold(0, |m, &i| m | (1 << i))
}

pub fn indices_of(mask: Mask) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SimplicialComplex {
    n: usize,
    /// Sorted index lists, sorted lexicographically.
    max_faces: Vec<Vec<usize>>,
}

impl SimplicialComplex {
    /// Builds a complex from maximal faces, without validating the antichain property.
    pub fn new(n: usize, max_faces: Vec<Vec<usize>>) -> Result<Self> {
        if n > 63 {
            return Err(Error::InvalidComplex(format!("ground size {n} exceeds 63")));
        }
        let mut faces: Vec<Vec<usize>> = max_faces
            .into_iter()
            .map(|mut f| {
                f.sort_unstable();
                f.dedup();
                f
            })
            .collect();
        for f in &faces {
            if let Some(&i) = f.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidComplex(format!("index {} outside ground set of size {n}", i + 1)));
            }
        }
        faces.sort();
        faces.dedup();
        Ok(SimplicialComplex { n, max_faces: faces })
    }

    /// Validated construction.
    pub fn from_max_faces(n: usize, max_faces: Vec<Vec<usize>>) -> Result<Self> {
        let c = Self::new(n, max_faces)?;
        c.validate().map_err(|v| Error::InvalidComplex(v.to_string()))?;
        Ok(c)
    }

    /// The complex `{∅}`: every coordinate is inverted, `U_Σ` is the torus.
    pub fn torus(n: usize) -> Self {
        SimplicialComplex { n, max_faces: vec![vec![]] }
    }

    /// Complex of `ℙ^{n-1}`: all subsets of size `n - 1`.
    pub fn projective_space(n: usize) -> Self {
        let faces = (0..n).map(|skip| (0..n).filter(|&i| i != skip).collect()).collect();
        Self::new(n, faces).expect("projective space complex")
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn max_faces(&self) -> &[Vec<usize>] {
        &self.max_faces
    }

    pub fn max_face_masks(&self) -> Vec<Mask> {
        self.max_faces.iter().map(|f| mask_of(f)).collect()
    }

    pub fn is_face(&self, subset: &[usize]) -> bool {
        let m = mask_of(subset);
        self.is_face_mask(m)
    }

    pub fn is_face_mask(&self, m: Mask) -> bool {
        self.max_faces.iter().any(|f| mask_of(f) & m == m)
    }

    /// Every face, as masks, in increasing order.
    pub fn all_faces(&self) -> Vec<Mask> {
        let mut out = BTreeSet::new();
        for f in &self.max_faces {
            let fm = mask_of(f);
            // enumerate submasks
            let mut s = fm;
            loop {
                out.insert(s);
                if s == 0 {
                    break;
                }
                s = (s - 1) & fm;
            }
        }
        out.into_iter().collect()
    }

    /// Coordinates that lie in some face.
    pub fn used(&self) -> Mask {
        self.max_faces.iter().fold(0, |m, f| m | mask_of(f))
    }

    pub fn validate(&self) -> std::result::Result<(), Violation> {
        if self.max_faces.is_empty() {
            return Err(Violation::NoFaces);
        }
        for (a, fa) in self.max_faces.iter().enumerate() {
            for (b, fb) in self.max_faces.iter().enumerate() {
                if a != b && mask_of(fa) & mask_of(fb) == mask_of(fa) {
                    return Err(Violation::Contained {
                        smaller: fa.clone(),
                        larger: fb.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Join on disjoint ground sets; the second complex is shifted by `self.n`.
    pub fn join(&self, other: &SimplicialComplex) -> Result<SimplicialComplex> {
        let shift = self.n;
        let mut faces = Vec::with_capacity(self.max_faces.len() * other.max_faces.len());
        for a in &self.max_faces {
            for b in &other.max_faces {
                let mut f = a.clone();
                f.extend(b.iter().map(|i| i + shift));
                faces.push(f);
            }
        }
        SimplicialComplex::new(self.n + other.n, faces)
    }

    /// The closed stratum `{z_i = 0, i ∈ K} ∩ U_Σ` as a complex on the remaining coordinates.
    pub fn stratum(&self, k: &[usize]) -> Stratum {
        let km = mask_of(k);
        let labels: Vec<usize> = (0..self.n).filter(|i| km >> i & 1 == 0).collect();
        let position = |i: usize| labels.iter().position(|&l| l == i).expect("label");
        let faces: Vec<Vec<usize>> = self
            .max_faces
            .iter()
            .filter(|f| mask_of(f) & km == km)
            .map(|f| f.iter().filter(|&&i| km >> i & 1 == 0).map(|&i| position(i)).collect())
            .collect();
        if faces.is_empty() {
            return Stratum::Empty;
        }
        // faces σ∖K for maximal σ ⊇ K stay an antichain
        let complex = SimplicialComplex::new(labels.len(), faces).expect("stratum complex");
        Stratum::Complex { complex, labels }
    }
}

impl fmt::Display for SimplicialComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} [", self.n)?;
        for (k, face) in self.max_faces.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{")?;
            for (j, i) in face.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", i + 1)?;
            }
            write!(f, "}}")?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoFaces,
    Contained { smaller: Vec<usize>, larger: Vec<usize> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one_based = |v: &[usize]| v.iter().map(|i| i + 1).collect::<Vec<_>>();
        match self {
            Violation::NoFaces => write!(f, "complex has no faces"),
            Violation::Contained { smaller, larger } => write!(
                f,
                "maximal face {:?} is contained in maximal face {:?}",
                one_based(smaller),
                one_based(larger)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stratum {
    Empty,
    /// `labels[j]` is the original index of the `j`-th remaining coordinate.
    Complex { complex: SimplicialComplex, labels: Vec<usize> },
}

/// Quotient data of `[U_Σ / G]`: free weights and finite factors of `G`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackyPresentation {
    pub complex: SimplicialComplex,
    pub weights: Vec<Vec<i64>>,
    pub torsion: Vec<(Vec<i64>, i64)>,
}

impl StackyPresentation {
    pub fn new(complex: SimplicialComplex, weights: Vec<Vec<i64>>, torsion: Vec<(Vec<i64>, i64)>) -> Result<Self> {
        let n = complex.ground_size();
        if let Some(r) = weights.iter().find(|r| r.len() != n) {
            return Err(Error::Dimension(format!("weight row of length {} for n = {n}", r.len())));
        }
        for (row, m) in &torsion {
            if row.len() != n {
                return Err(Error::Dimension(format!("torsion row of length {} for n = {n}", row.len())));
            }
            if *m < 2 {
                return Err(Error::Dimension(format!("torsion modulus {m} < 2")));
            }
        }
        Ok(StackyPresentation { complex, weights, torsion })
    }

    /// `G → (ℂ*)^n` is injective iff the character map `ℤ^n → X(G)` is onto,
    /// i.e. every Smith invariant of `[W 0; T diag(m)]` equals one.
    pub fn is_injective(&self) -> bool {
        let n = self.complex.ground_size();
        let t = self.torsion.len();
        let rows = self.weights.len() + t;
        if rows == 0 {
            return true;
        }
        let mut m: Vec<Vec<i128>> = Vec::with_capacity(rows);
        for w in &self.weights {
            let mut r: Vec<i128> = w.iter().map(|&x| x as i128).collect();
            r.resize(n + t, 0);
            m.push(r);
        }
        for (k, (row, modulus)) in self.torsion.iter().enumerate() {
            let mut r: Vec<i128> = row.iter().map(|&x| x as i128).collect();
            r.resize(n + t, 0);
            r[n + k] = *modulus as i128;
            m.push(r);
        }
        match smith_invariants(&m, n + t) {
            Ok(inv) => inv.len() == rows && inv.iter().all(|&d| d == 1),
            Err(_) => false,
        }
    }
}

/// A simplicial fan: one ray per ground element, cones given by the complex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackyFan {
    pub rays: Vec<Vec<i64>>,
    pub complex: SimplicialComplex,
}

/// Result of locating a vector: the minimal face and the certificate
/// `v = Σ coefficients[j] · ray(face[j])` with positive coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeWitness {
    pub face: Vec<usize>,
    pub coefficients: Vec<BigRational>,
}

impl StackyFan {
    pub fn new(rays: Vec<Vec<i64>>, complex: SimplicialComplex) -> Result<Self> {
        if rays.len() != complex.ground_size() {
            return Err(Error::Dimension(format!(
                "{} rays for ground size {}",
                rays.len(),
                complex.ground_size()
            )));
        }
        let d = rays.first().map_or(0, |r| r.len());
        if rays.iter().any(|r| r.len() != d) {
            return Err(Error::Dimension("rays of different lengths".into()));
        }
        let fan = StackyFan { rays, complex };
        fan.validate()?;
        Ok(fan)
    }

    pub fn lattice_rank(&self) -> usize {
        self.rays.first().map_or(0, |r| r.len())
    }

    fn validate(&self) -> Result<()> {
        if let Some(i) = self.rays.iter().position(|r| r.iter().all(|&x| x == 0)) {
            return Err(Error::InvalidComplex(format!("ray {} is zero", i + 1)));
        }
        for face in self.complex.max_faces() {
            let m: Vec<Vec<i64>> = face.iter().map(|&i| self.rays[i].clone()).collect();
            if crate::exact::rank(&m) != face.len() {
                return Err(Error::InvalidComplex(format!(
                    "rays of face {:?} are linearly dependent",
                    face.iter().map(|i| i + 1).collect::<Vec<_>>()
                )));
            }
        }
        Ok(())
    }

    /// Coefficients of `v` in the rays of `face`, if `v` is in their rational span.
    fn coordinates_in(&self, face: &[usize], v: &[BigRational]) -> Option<Vec<BigRational>> {
        let d = self.lattice_rank();
        let a: Vec<Vec<BigRational>> = (0..d)
            .map(|row| face.iter().map(|&i| rational(self.rays[i][row])).collect())
            .collect();
        if face.is_empty() {
            return v.iter().all(|x| x.is_zero()).then(Vec::new);
        }
        let x = solve_rational(&a, v)?;
        // span membership must be exact, the solver only finds some solution
        let ok = (0..d).all(|row| {
            let s: BigRational = face.iter().zip(&x).map(|(&i, c)| rational(self.rays[i][row]) * c).sum();
            s == v[row]
        });
        ok.then_some(x)
    }

    /// Minimal face whose cone contains `v`.
    pub fn cone_containing(&self, v: &[BigRational]) -> Result<ConeWitness> {
        let show = || v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let mut found: Option<ConeWitness> = None;
        for face in self.complex.max_faces() {
            let Some(x) = self.coordinates_in(face, v) else { continue };
            if x.iter().any(|c| c.is_negative()) {
                continue;
            }
            let (minimal, coeffs): (Vec<usize>, Vec<BigRational>) =
                face.iter().zip(x).filter(|(_, c)| !c.is_zero()).map(|(&i, c)| (i, c)).unzip();
            let witness = ConeWitness { face: minimal, coefficients: coeffs };
            match &found {
                None => found = Some(witness),
                Some(w) if w.face == witness.face => {}
                Some(w) => {
                    return Err(Error::AmbiguousCone {
                        vector: show(),
                        first: w.face.clone(),
                        second: witness.face,
                    })
                }
            }
        }
        let w = found.ok_or_else(|| Error::NotCovered(show()))?;
        debug_assert!(self.certify(v, &w));
        Ok(w)
    }

    pub fn certify(&self, v: &[BigRational], w: &ConeWitness) -> bool {
        w.coefficients.iter().all(|c| c.is_positive())
            && (0..self.lattice_rank()).all(|row| {
                let s: BigRational =
                    w.face.iter().zip(&w.coefficients).map(|(&i, c)| rational(self.rays[i][row]) * c).sum();
                s == v[row]
            })
    }

    pub fn cone_containing_int(&self, v: &[i64]) -> Result<ConeWitness> {
        let q: Vec<BigRational> = v.iter().map(|&x| rational(x)).collect();
        self.cone_containing(&q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1() -> SimplicialComplex {
        SimplicialComplex::from_max_faces(2, vec![vec![0], vec![1]]).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(p1().validate().is_ok());
        let bad = SimplicialComplex::new(2, vec![vec![0, 1], vec![0]]).unwrap();
        assert_eq!(
            bad.validate(),
            Err(Violation::Contained { smaller: vec![0], larger: vec![0, 1] })
        );
        assert!(SimplicialComplex::torus(3).validate().is_ok());
        assert_eq!(SimplicialComplex::new(2, vec![]).unwrap().validate(), Err(Violation::NoFaces));
    }

    #[test]
    fn join_examples() {
        let j = p1().join(&p1()).unwrap();
        assert_eq!(j.max_faces(), &[vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3]]);
        let t = p1().join(&SimplicialComplex::torus(0)).unwrap();
        assert_eq!(t, p1());
        let p2 = SimplicialComplex::projective_space(3);
        let j = p1().join(&p2).unwrap();
        assert_eq!(j.max_faces().len(), 6);
        assert!(j.max_faces().iter().all(|f| f.len() == 3));
    }

    #[test]
    fn stratum_examples() {
        match p1().stratum(&[0]) {
            Stratum::Complex { complex, labels } => {
                assert_eq!(labels, vec![1]);
                assert_eq!(complex, SimplicialComplex::torus(1));
            }
            Stratum::Empty => panic!(),
        }
        assert_eq!(p1().stratum(&[0, 1]), Stratum::Empty);
        match SimplicialComplex::projective_space(3).stratum(&[2]) {
            Stratum::Complex { complex, labels } => {
                assert_eq!(labels, vec![0, 1]);
                assert_eq!(complex, p1());
            }
            Stratum::Empty => panic!(),
        }
    }

    #[test]
    fn membership_is_closed_under_subsets() {
        let p2 = SimplicialComplex::projective_space(3);
        for f in p2.max_faces() {
            for sub in 0..(1u64 << f.len()) {
                let s: Vec<usize> = f.iter().enumerate().filter(|(j, _)| sub >> j & 1 == 1).map(|(_, &i)| i).collect();
                assert!(p2.is_face(&s));
            }
        }
        assert!(!p2.is_face(&[0, 1, 2]));
    }

    #[test]
    fn cone_containing_examples() {
        let fan = StackyFan::new(vec![vec![1], vec![-1]], p1()).unwrap();
        assert_eq!(fan.cone_containing_int(&[3]).unwrap().face, vec![0]);
        assert_eq!(fan.cone_containing_int(&[0]).unwrap().face, Vec::<usize>::new());
        // F2 with rays (1,0), (-1,2), (0,1), (0,-1)
        let f2 = SimplicialComplex::from_max_faces(4, vec![vec![0, 2], vec![1, 2], vec![1, 3], vec![0, 3]]).unwrap();
        let fan = StackyFan::new(vec![vec![1, 0], vec![-1, 2], vec![0, 1], vec![0, -1]], f2).unwrap();
        let w = fan.cone_containing_int(&[0, 1]).unwrap();
        assert_eq!(w.face, vec![2]);
        assert!(fan.certify(&[rational(0), rational(1)], &w));
    }

    #[test]
    fn overlapping_cones_are_ambiguous() {
        // two maximal cones covering the same ray direction (not a fan)
        let c = SimplicialComplex::from_max_faces(3, vec![vec![0, 1], vec![0, 2]]).unwrap();
        let fan = StackyFan::new(vec![vec![1, 0], vec![0, 1], vec![1, 1]], c).unwrap();
        assert!(matches!(fan.cone_containing_int(&[2, 1]), Err(Error::AmbiguousCone { .. })));
    }

    #[test]
    fn injectivity_of_presentations() {
        let w = StackyPresentation::new(p1(), vec![vec![1, 2]], vec![]).unwrap();
        assert!(w.is_injective());
        let w = StackyPresentation::new(p1(), vec![vec![2, 2]], vec![]).unwrap();
        assert!(!w.is_injective());
        let w = StackyPresentation::new(p1(), vec![vec![1, 1]], vec![(vec![0, 1], 2)]).unwrap();
        assert!(w.is_injective());
    }
}
