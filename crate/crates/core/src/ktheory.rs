//! Equivariant K-classes, Euler pairings and the class-level Fourier–Mukai
//! transform across a crepant wall-crossing.
//!
//! A scenario consists of two fans `minus` and `plus` on the same `N` shared
//! rays and a common refinement `tilde` on `N + e` rays (the shared ones
//! first). Pulling a line bundle back to `tilde` evaluates its support
//! function on every ray that the side does not use. The transform of a class
//! is never pushed forward geometrically: it is the unique class on the plus
//! side, within a window of line bundles, whose pairings with plus-side probes
//! match the pairings of the pulled-back probes on `tilde`. Every solution is
//! validated on a held-out shell of probes before it is accepted.

use std::collections::BTreeMap;
use std::fmt;

use dashmap::DashMap;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::bundle::{self, BundleSpec, TotalSpace};
use crate::cech::{Engine, TwistedStratumSheaf};
use crate::error::{Error, Result};
use crate::exact::{is_integral, rational, solve_rational_many};
use crate::fan::{SimplicialComplex, StackyFan, StackyPresentation};
use crate::objects::{koszul, ExceptionalObject};
use crate::selector::QuotientLattice;
use crate::space::Space;

/// Finite formal sum `Σ c_d [O(d)]` with nonzero coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KClass(BTreeMap<Vec<i64>, i64>);

impl KClass {
    pub fn zero() -> Self {
        KClass::default()
    }

    pub fn line(d: Vec<i64>) -> Self {
        let mut k = KClass::zero();
        k.add_term(d, 1);
        k
    }

    pub fn add_term(&mut self, d: Vec<i64>, c: i64) {
        if c == 0 {
            return;
        }
        let entry = self.0.entry(d).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.0.retain(|_, c| *c != 0);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, i64)> + '_ {
        self.0.iter().map(|(d, c)| (d, *c))
    }

    /// Number of distinct weights.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn plus(&self, other: &KClass) -> KClass {
        let mut out = self.clone();
        other.terms().for_each(|(d, c)| out.add_term(d.clone(), c));
        out
    }

    pub fn scaled(&self, k: i64) -> KClass {
        let mut out = KClass::zero();
        self.terms().for_each(|(d, c)| out.add_term(d.clone(), c * k));
        out
    }

    /// `x ⊗ O(e)`.
    pub fn twisted(&self, e: &[i64]) -> KClass {
        self.map_weights(|d| d.iter().zip(e).map(|(a, b)| a + b).collect())
    }

    pub fn map_weights(&self, mut f: impl FnMut(&[i64]) -> Vec<i64>) -> KClass {
        let mut out = KClass::zero();
        self.terms().for_each(|(d, c)| out.add_term(f(d), c));
        out
    }

    pub fn try_map_weights(&self, mut f: impl FnMut(&[i64]) -> Result<Vec<i64>>) -> Result<KClass> {
        let mut out = KClass::zero();
        for (d, c) in self.terms() {
            out.add_term(f(d)?, c);
        }
        Ok(out)
    }
}

impl Serialize for KClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            weight: &'a [i64],
            coefficient: i64,
        }
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for (weight, &coefficient) in &self.0 {
            seq.serialize_element(&Term { weight, coefficient })?;
        }
        seq.end()
    }
}

impl fmt::Display for KClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (d, c)) in self.terms().enumerate() {
            match (k, c) {
                (0, 1) => {}
                (0, -1) => write!(f, "-")?,
                (_, 1) => write!(f, " + ")?,
                (_, -1) => write!(f, " - ")?,
                (0, c) => write!(f, "{c}")?,
                (_, c) if c < 0 => write!(f, " - {}", -c)?,
                (_, c) => write!(f, " + {c}")?,
            }
            write!(f, "[O{d:?}]")?;
        }
        Ok(())
    }
}

/// The Koszul expansion `Σ_{S⊆I} (-1)^{|S|} [O(-p - χ_S)]`, with a sign for odd shifts.
pub fn class_of(e: &ExceptionalObject) -> KClass {
    let sign = if e.shift.rem_euclid(2) == 0 { 1 } else { -1 };
    let mut out = KClass::zero();
    for (s, term) in koszul(e).terms.into_iter().enumerate() {
        let c = if s % 2 == 0 { sign } else { -sign };
        term.into_iter().for_each(|summand| out.add_term(summand.twist, c));
    }
    out
}

/// Memoized `χ(O(d))` on one space, bilinearly extended to classes.
pub struct Pairing<'a> {
    engine: &'a Engine,
    space: &'a Space,
    memo: DashMap<Vec<i64>, i64>,
}

impl<'a> Pairing<'a> {
    pub fn new(engine: &'a Engine, space: &'a Space) -> Self {
        Pairing { engine, space, memo: DashMap::new() }
    }

    pub fn space(&self) -> &Space {
        self.space
    }

    pub fn chi(&self, d: &[i64]) -> Result<i64> {
        if let Some(v) = self.memo.get(d) {
            return Ok(*v);
        }
        let sheaf = TwistedStratumSheaf::new(self.space.complex.clone(), Vec::new(), d.to_vec())?;
        let v = self.engine.euler_characteristic(&sheaf, &self.space.selector)?;
        self.memo.insert(d.to_vec(), v);
        Ok(v)
    }

    /// `⟨x, y⟩ = Σ c_x c_y χ(O(d_y - d_x))`.
    pub fn pair(&self, x: &KClass, y: &KClass) -> Result<i64> {
        let mut total = 0;
        for (dx, cx) in x.terms() {
            for (dy, cy) in y.terms() {
                let diff: Vec<i64> = dy.iter().zip(dx).map(|(b, a)| b - a).collect();
                total += cx * cy * self.chi(&diff)?;
            }
        }
        Ok(total)
    }
}

pub fn euler_pairing(engine: &Engine, space: &Space, x: &KClass, y: &KClass) -> Result<i64> {
    Pairing::new(engine, space).pair(x, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        })
    }
}

/// Base data for the relative version: every space becomes a bundle over
/// `base` with the same twist matrix; extra rays of `tilde` get zero twist.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioBundle {
    pub base: StackyPresentation,
    pub twist: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WallCrossingScenario {
    pub name: String,
    pub n: usize,
    pub minus: StackyFan,
    pub plus: StackyFan,
    /// Rays: the shared ones, then the extra ones.
    pub tilde: StackyFan,
    /// Canonical weights on the shared coordinates.
    pub canonical: Vec<i64>,
    pub bundle: Option<ScenarioBundle>,
    #[serde(skip)]
    spaces: [Space; 3],
    #[serde(skip)]
    totals: Option<[TotalSpace; 3]>,
}

impl WallCrossingScenario {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        rays: Vec<Vec<i64>>,
        complex_minus: SimplicialComplex,
        complex_plus: SimplicialComplex,
        extra_rays: Vec<Vec<i64>>,
        complex_tilde: SimplicialComplex,
        canonical: Option<Vec<i64>>,
        bundle: Option<ScenarioBundle>,
    ) -> Result<Self> {
        let n = rays.len();
        for (side, c) in [("minus", &complex_minus), ("plus", &complex_plus)] {
            if c.ground_size() != n {
                return Err(Error::Dimension(format!("{side} complex on {} coordinates, {n} shared rays", c.ground_size())));
            }
        }
        let mut tilde_rays = rays.clone();
        tilde_rays.extend(extra_rays);
        if complex_tilde.ground_size() != tilde_rays.len() {
            return Err(Error::Dimension(format!(
                "tilde complex on {} coordinates, {} rays",
                complex_tilde.ground_size(),
                tilde_rays.len()
            )));
        }
        let canonical = canonical.unwrap_or_else(|| vec![1; n]);
        if canonical.len() != n {
            return Err(Error::Dimension(format!("{} canonical weights for {n} coordinates", canonical.len())));
        }
        let minus = StackyFan::new(rays.clone(), complex_minus)?;
        let plus = StackyFan::new(rays, complex_plus)?;
        let tilde = StackyFan::new(tilde_rays, complex_tilde)?;
        let fans = [&minus, &plus, &tilde];
        let labels = ["minus", "plus", "tilde"];
        let (spaces, totals) = match &bundle {
            None => {
                let spaces = [0, 1, 2].map(|k| Space::equivariant(format!("{name} {}", labels[k]), fans[k].complex.clone()));
                (spaces, None)
            }
            Some(b) => {
                let mut built = Vec::with_capacity(3);
                for k in 0..3 {
                    let mut twist = b.twist.clone();
                    twist.iter_mut().for_each(|row| row.resize(fans[k].complex.ground_size(), 0));
                    let spec = BundleSpec { base: b.base.clone(), fiber: fans[k].complex.clone(), twist };
                    built.push(bundle::build(&format!("{name} {}", labels[k]), spec)?);
                }
                let totals: [TotalSpace; 3] = built.try_into().expect("three sides");
                (totals.clone().map(|t| t.space), Some(totals))
            }
        };
        let scenario = WallCrossingScenario {
            name: name.to_string(),
            n,
            minus,
            plus,
            tilde,
            canonical,
            bundle,
            spaces,
            totals,
        };
        scenario.check_refinement(Side::Minus)?;
        scenario.check_refinement(Side::Plus)?;
        Ok(scenario)
    }

    pub fn fan(&self, side: Side) -> &StackyFan {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }

    pub fn space(&self, side: Side) -> &Space {
        &self.spaces[side as usize]
    }

    pub fn tilde_space(&self) -> &Space {
        &self.spaces[2]
    }

    pub fn total(&self, side: Side) -> Option<&TotalSpace> {
        self.totals.as_ref().map(|t| &t[side as usize])
    }

    pub fn extra(&self) -> usize {
        self.tilde.rays.len() - self.n
    }

    fn n_base(&self) -> usize {
        self.bundle.as_ref().map_or(0, |b| b.base.complex.ground_size())
    }

    /// Every cone of `tilde` lies in a cone of the given side.
    fn check_refinement(&self, side: Side) -> Result<()> {
        let fan = self.fan(side);
        for face in self.tilde.complex.max_faces() {
            let mut union = Vec::new();
            for &i in face {
                union.extend(fan.cone_containing_int(&self.tilde.rays[i])?.face);
            }
            union.sort_unstable();
            union.dedup();
            if !fan.complex.is_face(&union) {
                let one_based: Vec<usize> = face.iter().map(|i| i + 1).collect();
                return Err(Error::InvalidComplex(format!(
                    "cone {one_based:?} of the refinement is not contained in a cone of the {side} fan"
                )));
            }
        }
        Ok(())
    }

    /// Pullback of a weight on the shared coordinates to the `tilde` coordinates.
    fn pullback_fiber(&self, side: Side, d: &[i64]) -> Result<Vec<i64>> {
        let fan = self.fan(side);
        let used = fan.complex.used();
        let n_base = self.n_base();
        (0..self.tilde.rays.len())
            .map(|i| {
                if i < self.n && used >> i & 1 == 1 {
                    return Ok(d[i]);
                }
                let w = fan.cone_containing_int(&self.tilde.rays[i])?;
                let value: BigRational = w.face.iter().zip(&w.coefficients).map(|(&j, c)| c * rational(d[j])).sum();
                if !is_integral(&value) {
                    return Err(Error::NonIntegralPullback {
                        weight: d.to_vec(),
                        coordinate: n_base + i + 1,
                        value: value.to_string(),
                    });
                }
                value.to_integer().try_into().map_err(|_| Error::Overflow("pullback"))
            })
            .collect()
    }

    /// Pullback of a weight on one side's space to the `tilde` space. Base
    /// coordinates of bundle scenarios are unchanged.
    pub fn pullback(&self, side: Side, d: &[i64]) -> Result<Vec<i64>> {
        let n_base = self.n_base();
        if d.len() != n_base + self.n {
            return Err(Error::Dimension(format!("weight of length {} for {} coordinates", d.len(), n_base + self.n)));
        }
        let mut out = d[..n_base].to_vec();
        out.extend(self.pullback_fiber(side, &d[n_base..])?);
        Ok(out)
    }

    pub fn pullback_class(&self, side: Side, x: &KClass) -> Result<KClass> {
        x.try_map_weights(|d| self.pullback(side, d))
    }

    pub fn check_crepant(&self) -> Result<CrepancyReport> {
        let minus = self.pullback_fiber(Side::Minus, &self.canonical)?;
        let plus = self.pullback_fiber(Side::Plus, &self.canonical)?;
        let differences = (0..minus.len())
            .filter(|&i| minus[i] != plus[i])
            .map(|i| Discrepancy { coordinate: i + 1, minus: minus[i], plus: plus[i] })
            .collect::<Vec<_>>();
        Ok(CrepancyReport { scenario: self.name.clone(), crepant: differences.is_empty(), minus, plus, differences })
    }

    /// Base twist `φ^*O(d)` on one side's space.
    pub fn base_twist(&self, side: Side, d: &[i64]) -> Result<Vec<i64>> {
        self.total(side)
            .ok_or_else(|| Error::Dimension("base twists need a bundle scenario".into()))?
            .base_twist(d)
    }

    /// Weights with every entry in `[lo, hi]` whose pullback from the minus side is integral.
    pub fn twist_window(&self, lo: i64, hi: i64) -> Vec<Vec<i64>> {
        let bounds = vec![(lo, hi); self.n_base() + self.n];
        crate::sod::window(&bounds)
            .into_iter()
            .map(|l| l.0)
            .filter(|d| self.pullback(Side::Minus, d).is_ok())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    /// 1-based `tilde` coordinate.
    pub coordinate: usize,
    pub minus: i64,
    pub plus: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrepancyReport {
    pub scenario: String,
    pub crepant: bool,
    pub minus: Vec<i64>,
    pub plus: Vec<i64>,
    pub differences: Vec<Discrepancy>,
}

/// Twist radii tried by the adjunction solve.
pub const RADIUS_SCHEDULE: [i64; 4] = [1, 2, 4, 6];
/// Largest number of unknowns attempted in one exact solve.
pub const MAX_UNKNOWNS: usize = 1500;

/// Offsets in `[-r, r]^free` (zero elsewhere), nearest to the origin first.
fn box_offsets(n: usize, free: &[usize], r: i64) -> Vec<Vec<i64>> {
    let bounds = vec![(-r, r); free.len()];
    let mut out: Vec<Vec<i64>> = crate::sod::window(&bounds)
        .into_iter()
        .map(|l| {
            let mut v = vec![0; n];
            free.iter().zip(&l.0).for_each(|(&c, &x)| v[c] = x);
            v
        })
        .collect();
    let key = |v: &Vec<i64>| {
        let max = v.iter().map(|x| x.abs()).max().unwrap_or(0);
        let l1: i64 = v.iter().map(|x| x.abs()).sum();
        (max, l1, v.clone())
    };
    out.sort_by_key(key);
    out
}

fn max_norm(v: &[i64]) -> i64 {
    v.iter().map(|x| x.abs()).max().unwrap_or(0)
}

/// Class-level transform from the minus side to the plus side.
pub struct FmSolver<'a> {
    scenario: &'a WallCrossingScenario,
    pub minus: Pairing<'a>,
    pub plus: Pairing<'a>,
    pub tilde: Pairing<'a>,
    quotient: QuotientLattice,
}

/// Images of the requested weights and the window that produced them.
#[derive(Debug, Clone, Serialize)]
pub struct FmSolution {
    pub radius: i64,
    pub unknowns: usize,
    pub held_out: usize,
    #[serde(skip)]
    pub images: BTreeMap<Vec<i64>, KClass>,
}

impl FmSolution {
    pub fn image(&self, x: &KClass) -> KClass {
        let mut out = KClass::zero();
        for (d, c) in x.terms() {
            out = out.plus(&self.images[d].scaled(c));
        }
        out
    }
}

impl<'a> FmSolver<'a> {
    pub fn new(engine: &'a Engine, scenario: &'a WallCrossingScenario) -> Result<Self> {
        Ok(FmSolver {
            scenario,
            minus: Pairing::new(engine, scenario.space(Side::Minus)),
            plus: Pairing::new(engine, scenario.space(Side::Plus)),
            tilde: Pairing::new(engine, scenario.tilde_space()),
            quotient: QuotientLattice::of(&scenario.space(Side::Plus).selector)?,
        })
    }

    pub fn scenario(&self) -> &WallCrossingScenario {
        self.scenario
    }

    /// Canonical representative of a plus-side class.
    pub fn canonical(&self, x: &KClass) -> KClass {
        x.map_weights(|d| self.quotient.canonical(d))
    }

    /// Solves for the images of all weights of all classes in one elimination.
    pub fn solve(&self, classes: &[KClass]) -> Result<FmSolution> {
        let mut weights: Vec<Vec<i64>> = classes.iter().flat_map(|x| x.terms().map(|(d, _)| d.clone())).collect();
        weights.sort();
        weights.dedup();
        let n_plus = self.scenario.space(Side::Plus).n();
        let targets: Vec<Vec<i64>> = weights
            .iter()
            .map(|d| self.scenario.pullback(Side::Minus, d))
            .collect::<Result<_>>()?;
        let centers: Vec<Vec<i64>> = targets.iter().map(|t| self.quotient.canonical(&t[..n_plus])).collect();
        let free = self.quotient.free_coordinates();
        let mut last: Option<Error> = None;
        for r in RADIUS_SCHEDULE {
            let offsets = box_offsets(n_plus, &free, r);
            if offsets.len() > MAX_UNKNOWNS {
                break;
            }
            match self.attempt(r, &offsets, &free, &weights, &targets, &centers)? {
                Ok(solution) => return Ok(solution),
                Err(e) => {
                    log::info!("adjunction window of radius {r} rejected: {e}");
                    last = Some(e);
                }
            }
        }
        Err(match last {
            Some(e @ Error::NonIntegralSolution { .. }) => e,
            Some(Error::WindowExhausted { radius }) => Error::WindowExhausted { radius },
            _ => Error::WindowExhausted { radius: 0 },
        })
    }

    /// The outer result carries engine errors; the inner one a rejected window.
    fn attempt(
        &self,
        r: i64,
        offsets: &[Vec<i64>],
        free: &[usize],
        weights: &[Vec<i64>],
        targets: &[Vec<i64>],
        centers: &[Vec<i64>],
    ) -> Result<std::result::Result<FmSolution, Error>> {
        let add = |a: &[i64], b: &[i64]| -> Vec<i64> { a.iter().zip(b).map(|(x, y)| x + y).collect() };
        let sub = |a: &[i64], b: &[i64]| -> Vec<i64> { a.iter().zip(b).map(|(x, y)| x - y).collect() };
        let gram: Vec<Vec<BigRational>> = offsets
            .par_iter()
            .map(|oa| offsets.iter().map(|ob| self.plus.chi(&sub(ob, oa)).map(rational)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        // ⟨π₊^*O(w), π₋^*O(d)⟩ on tilde
        let adjoint = |t: &[i64], w: &[i64]| -> Result<i64> {
            let pw = self.scenario.pullback(Side::Plus, w)?;
            self.tilde.chi(&sub(t, &pw))
        };
        let rhs: Vec<Vec<BigRational>> = targets
            .par_iter()
            .zip(centers)
            .map(|(t, c0)| offsets.iter().map(|o| adjoint(t, &add(c0, o)).map(rational)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let solutions = solve_rational_many(&gram, &rhs);
        let shell: Vec<Vec<i64>> = box_offsets(self.scenario.space(Side::Plus).n(), free, r + 1)
            .into_iter()
            .filter(|o| max_norm(o) == r + 1)
            .collect();
        let mut images = BTreeMap::new();
        for (k, solution) in solutions.into_iter().enumerate() {
            let Some(x) = solution else {
                return Ok(Err(Error::WindowExhausted { radius: r }));
            };
            if let Some(bad) = x.iter().find(|c| !is_integral(c)) {
                return Ok(Err(Error::NonIntegralSolution { residual: format!("coefficient {bad} for weight {:?}", weights[k]) }));
            }
            let coeffs: Vec<(usize, i64)> = x
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(b, c)| (b, i64::try_from(c.to_integer()).expect("small coefficient")))
                .collect();
            let residuals: Vec<i64> = shell
                .par_iter()
                .map(|h| {
                    let mut lhs = 0;
                    for &(b, c) in &coeffs {
                        lhs += c * self.plus.chi(&sub(&offsets[b], h))?;
                    }
                    Ok(lhs - adjoint(&targets[k], &add(&centers[k], h))?)
                })
                .collect::<Result<_>>()?;
            if let Some(res) = residuals.iter().find(|x| **x != 0) {
                log::debug!("held-out residual {res} for weight {:?}", weights[k]);
                return Ok(Err(Error::WindowExhausted { radius: r }));
            }
            let mut image = KClass::zero();
            coeffs.iter().for_each(|&(b, c)| image.add_term(add(&centers[k], &offsets[b]), c));
            images.insert(weights[k].clone(), self.canonical(&image));
        }
        Ok(Ok(FmSolution { radius: r, unknowns: offsets.len(), held_out: shell.len(), images }))
    }

    pub fn fm_class(&self, x: &KClass) -> Result<KClass> {
        Ok(self.solve(std::slice::from_ref(x))?.image(x))
    }
}

pub fn fm_class(engine: &Engine, scenario: &WallCrossingScenario, x: &KClass) -> Result<KClass> {
    FmSolver::new(engine, scenario)?.fm_class(x)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairingFailure {
    pub x: KClass,
    pub y: KClass,
    pub minus: i64,
    pub plus: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairingReport {
    pub scenario: String,
    pub solution: FmSolution,
    pub checked: usize,
    pub failures: Vec<PairingFailure>,
}

impl PairingReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `⟨fm x, fm y⟩₊ = ⟨x, y⟩₋` for every listed pair.
pub fn check_pairing_preservation(
    engine: &Engine,
    scenario: &WallCrossingScenario,
    pairs: &[(KClass, KClass)],
) -> Result<PairingReport> {
    let solver = FmSolver::new(engine, scenario)?;
    let classes: Vec<KClass> = pairs.iter().flat_map(|(x, y)| [x.clone(), y.clone()]).collect();
    let solution = solver.solve(&classes)?;
    let verdicts: Vec<Option<PairingFailure>> = pairs
        .par_iter()
        .map(|(x, y)| {
            let minus = solver.minus.pair(x, y)?;
            let plus = solver.plus.pair(&solution.image(x), &solution.image(y))?;
            Ok((minus != plus).then(|| PairingFailure { x: x.clone(), y: y.clone(), minus, plus }))
        })
        .collect::<Result<_>>()?;
    Ok(PairingReport {
        scenario: scenario.name.clone(),
        solution,
        checked: pairs.len(),
        failures: verdicts.into_iter().flatten().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwistFailure {
    pub x: KClass,
    pub twisted_image: KClass,
    pub image_twisted: KClass,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwistReport {
    pub scenario: String,
    pub base_twist: Vec<i64>,
    pub checked: usize,
    pub failures: Vec<TwistFailure>,
}

impl TwistReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `fm(x ⊗ φ₋^*O(d)) = fm(x) ⊗ φ₊^*O(d)` for every listed class.
pub fn check_base_twist(engine: &Engine, scenario: &WallCrossingScenario, classes: &[KClass], d: &[i64]) -> Result<TwistReport> {
    let solver = FmSolver::new(engine, scenario)?;
    let em = scenario.base_twist(Side::Minus, d)?;
    let ep = scenario.base_twist(Side::Plus, d)?;
    let twisted: Vec<KClass> = classes.iter().map(|x| x.twisted(&em)).collect();
    let mut all = classes.to_vec();
    all.extend(twisted.iter().cloned());
    let solution = solver.solve(&all)?;
    let failures = classes
        .iter()
        .zip(&twisted)
        .filter_map(|(x, xt)| {
            let twisted_image = solution.image(xt);
            let image_twisted = solver.canonical(&solution.image(x).twisted(&ep));
            (twisted_image != image_twisted).then(|| TwistFailure { x: x.clone(), twisted_image, image_twisted })
        })
        .collect();
    Ok(TwistReport { scenario: scenario.name.clone(), base_twist: d.to_vec(), checked: classes.len(), failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::ext::ext_formula;

    fn obj(support: &[usize], p: &[i64]) -> ExceptionalObject {
        ExceptionalObject::new(support.to_vec(), p.to_vec())
    }

    fn class(terms: &[(&[i64], i64)]) -> KClass {
        let mut k = KClass::zero();
        terms.iter().for_each(|(d, c)| k.add_term(d.to_vec(), *c));
        k
    }

    #[test]
    fn koszul_classes() {
        assert_eq!(class_of(&obj(&[], &[2, -1])), KClass::line(vec![-2, 1]));
        assert_eq!(class_of(&obj(&[0], &[0, 0])), class(&[(&[0, 0], 1), (&[-1, 0], -1)]));
        assert_eq!(
            class_of(&obj(&[0, 1], &[1, 0])),
            class(&[(&[-1, 0], 1), (&[-2, 0], -1), (&[-1, -1], -1), (&[-2, -1], 1)])
        );
        let shifted = ExceptionalObject::with_shift(vec![], vec![0, 0], 1);
        assert_eq!(class_of(&shifted), class(&[(&[0, 0], -1)]));
        assert!(class(&[(&[1], 1), (&[1], -1)]).is_zero());
    }

    #[test]
    fn pairing_examples() {
        let e = Engine::new();
        let p1 = catalog::p1();
        let o = KClass::line(vec![0, 0]);
        assert_eq!(euler_pairing(&e, &p1, &o, &o).unwrap(), 1);
        assert_eq!(euler_pairing(&e, &p1, &o, &KClass::line(vec![-1, -1])).unwrap(), -1);
        let x = class_of(&obj(&[0], &[0, 0]));
        assert_eq!(euler_pairing(&e, &p1, &x, &x).unwrap(), 1);
    }

    #[test]
    fn pairing_matches_ext_tables() {
        let e = Engine::new();
        for space in [catalog::p1(), catalog::p12()] {
            let objects: Vec<ExceptionalObject> = crate::sod::window(&[(-2, 2), (-2, 2)])
                .iter()
                .map(crate::objects::decode)
                .filter(|o| space.complex.is_face(&o.support))
                .collect();
            for a in &objects {
                for b in &objects {
                    let table = ext_formula(&e, &space, a, b, &[0, 0]).unwrap();
                    let pairing = euler_pairing(&e, &space, &class_of(a), &class_of(b)).unwrap();
                    assert_eq!(pairing, table.euler(), "{a} {b} on {}", space.name);
                }
            }
        }
    }

    /// Support function of `d` read off a chosen cone by solving `⟨m, v_j⟩ = -d_j`.
    fn support_on_cone(rays: &[Vec<i64>], cone: [usize; 2], d: &[i64], at: &[i64]) -> BigRational {
        let [i, j] = cone;
        let (a, b, c, dd) = (rays[i][0], rays[i][1], rays[j][0], rays[j][1]);
        let det = rational(a * dd - b * c);
        let m0 = (rational(-d[i] * dd) + rational(d[j] * b)) / &det;
        let m1 = (rational(-d[j] * a) + rational(d[i] * c)) / &det;
        -(m0 * rational(at[0]) + m1 * rational(at[1]))
    }

    #[test]
    fn pullback_examples() {
        let s = catalog::p112_f2().unwrap();
        assert_eq!(s.pullback(Side::Plus, &[3, -1, 2, 0]).unwrap(), vec![3, -1, 2, 0]);
        assert_eq!(s.pullback(Side::Minus, &[0, 0, 0, 0]).unwrap(), vec![0; 4]);
        assert!(matches!(
            s.pullback(Side::Minus, &[1, 0, 0, 0]),
            Err(Error::NonIntegralPullback { coordinate: 3, .. })
        ));
        let rays = p112_rays();
        for d in [[1, 1, 0, 0], [2, 0, 5, -1], [-3, 1, 0, 2]] {
            let value = support_on_cone(&rays, [0, 1], &d, &rays[2]);
            let pb = s.pullback(Side::Minus, &d).unwrap();
            assert_eq!(rational(pb[2]), value);
            assert_eq!((pb[0], pb[1], pb[3]), (d[0], d[1], d[3]));
        }
    }

    fn p112_rays() -> Vec<Vec<i64>> {
        vec![vec![1, 0], vec![-1, 2], vec![0, 1], vec![0, -1]]
    }

    #[test]
    fn crepancy() {
        let s = catalog::p112_f2().unwrap();
        let r = s.check_crepant().unwrap();
        assert!(r.crepant);
        let value = support_on_cone(&p112_rays(), [0, 1], &[1, 1, 1, 1], &[0, 1]);
        assert_eq!(rational(r.minus[2]), value);
        let r = catalog::blowup_p2().unwrap().check_crepant().unwrap();
        assert!(!r.crepant);
        assert_eq!(r.differences, vec![Discrepancy { coordinate: 4, minus: 2, plus: 1 }]);
        assert!(catalog::p2_refined().unwrap().check_crepant().unwrap().crepant);
    }

    #[test]
    fn refinement_is_checked() {
        let rays = vec![vec![1, 0], vec![0, 1], vec![-1, -1]];
        let p2 = SimplicialComplex::projective_space(3);
        let wrong = SimplicialComplex::from_max_faces(4, vec![vec![0, 3], vec![1, 3], vec![1, 2], vec![0, 2]]).unwrap();
        let r = WallCrossingScenario::new("bad", rays, p2.clone(), p2, vec![vec![-1, 1]], wrong, None, None);
        assert!(matches!(r, Err(Error::InvalidComplex(_)) | Err(Error::AmbiguousCone { .. })), "{r:?}");
    }

    #[test]
    fn transform_of_line_bundles() {
        let e = Engine::new();
        let s = catalog::p112_f2().unwrap();
        let solver = FmSolver::new(&e, &s).unwrap();
        let o = KClass::line(vec![0; 4]);
        assert_eq!(solver.fm_class(&o).unwrap(), o);
        let weights = s.twist_window(-1, 1);
        let classes: Vec<KClass> = weights.iter().map(|d| KClass::line(d.clone())).collect();
        let sol = solver.solve(&classes).unwrap();
        for d in &weights {
            let expected = KClass::line(s.pullback(Side::Minus, d).unwrap());
            assert_eq!(sol.image(&KClass::line(d.clone())), expected);
        }
        let x = classes[0].plus(&classes[3].scaled(-2));
        let y = classes[5].clone();
        assert_eq!(sol.image(&x.plus(&y)), sol.image(&x).plus(&sol.image(&y)));
    }

    #[test]
    fn refined_identity_is_recovered_by_adjunction() {
        let e = Engine::new();
        let s = catalog::p2_refined().unwrap();
        let solver = FmSolver::new(&e, &s).unwrap();
        for d in [[0, 0, 0], [1, 0, -2], [2, 1, 1]] {
            assert_eq!(solver.fm_class(&KClass::line(d.to_vec())).unwrap(), KClass::line(d.to_vec()));
        }
    }

    #[test]
    fn pairings_are_preserved() {
        let e = Engine::new();
        let s = catalog::p112_f2().unwrap();
        let lines: Vec<KClass> = s.twist_window(-1, 1).into_iter().map(KClass::line).collect();
        let pairs: Vec<(KClass, KClass)> =
            lines.iter().flat_map(|x| lines.iter().map(move |y| (x.clone(), y.clone()))).collect();
        let r = check_pairing_preservation(&e, &s, &pairs).unwrap();
        assert!(r.passed(), "{:?}", &r.failures[..r.failures.len().min(3)]);
        assert_eq!(r.checked, lines.len() * lines.len());
    }

    #[test]
    fn bundle_scenario() {
        let e = Engine::new();
        let s = catalog::p112_f2_bundle().unwrap();
        assert!(s.check_crepant().unwrap().crepant);
        assert_eq!(s.space(Side::Minus).n(), 6);
        let lines: Vec<KClass> = s.twist_window(-1, 1).into_iter().step_by(17).map(KClass::line).collect();
        let pairs: Vec<(KClass, KClass)> = lines.iter().zip(lines.iter().rev()).map(|(x, y)| (x.clone(), y.clone())).collect();
        let r = check_pairing_preservation(&e, &s, &pairs).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        let r = check_base_twist(&e, &s, &lines, &[1, 0]).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert!(check_base_twist(&e, &catalog::p112_f2().unwrap(), &lines, &[1, 0]).is_err());
    }
}
