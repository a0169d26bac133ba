//! Built-in spaces, bundles and wall-crossing scenarios.

use crate::bundle::{build, BundleSpec, TotalSpace};
use crate::error::Result;
use crate::fan::{SimplicialComplex, StackyPresentation};
use crate::ktheory::{ScenarioBundle, WallCrossingScenario};
use crate::selector::WeightSelector;
use crate::space::Space;

pub fn p1() -> Space {
    Space::equivariant("P1", SimplicialComplex::projective_space(2))
}

pub fn p2() -> Space {
    Space::equivariant("P2", SimplicialComplex::projective_space(3))
}

/// `ℙ(1,2)`: weight row `(1, 2)` and the order-2 row `(0, 1)`, under which only
/// degrees with `δ_1 + 2δ_2 = 0` and `δ_2` even are selected.
pub fn p12() -> Space {
    let sel = WeightSelector::new(2, vec![vec![1, 2]], vec![0], vec![(vec![0, 1], 0, 2)]).expect("valid selector");
    Space::new("P(1,2)", SimplicialComplex::projective_space(2), sel).expect("matching dimensions")
}

pub fn p1xp1() -> Space {
    let c = SimplicialComplex::from_max_faces(4, vec![vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3]]).expect("valid complex");
    Space::equivariant("P1xP1", c)
}

pub fn p1_base() -> StackyPresentation {
    StackyPresentation::new(SimplicialComplex::projective_space(2), vec![vec![1, 1]], vec![]).expect("valid base")
}

/// `F₁ = ℙ(O ⊕ O(-1))` over `ℙ¹`.
pub fn f1_bundle() -> TotalSpace {
    let spec = BundleSpec { base: p1_base(), fiber: SimplicialComplex::projective_space(2), twist: vec![vec![0, -1]] };
    build("F1", spec).expect("valid bundle")
}

/// Bundle over `ℙ¹` with fiber the irrelevant-locus complex of `ℙ(1,2)`.
pub fn p12_bundle() -> TotalSpace {
    let spec = BundleSpec { base: p1_base(), fiber: SimplicialComplex::projective_space(2), twist: vec![vec![0, -2]] };
    build("P(1,2)-bundle", spec).expect("valid bundle")
}

fn faces(n: usize, one_based: &[&[usize]]) -> SimplicialComplex {
    let f = one_based.iter().map(|f| f.iter().map(|i| i - 1).collect()).collect();
    SimplicialComplex::from_max_faces(n, f).expect("valid complex")
}

fn p112_rays() -> Vec<Vec<i64>> {
    vec![vec![1, 0], vec![-1, 2], vec![0, 1], vec![0, -1]]
}

fn p112_minus() -> SimplicialComplex {
    faces(4, &[&[1, 2], &[2, 4], &[1, 4]])
}

fn f2_complex() -> SimplicialComplex {
    faces(4, &[&[1, 3], &[2, 3], &[2, 4], &[1, 4]])
}

/// `ℙ(1,1,2)` against `F₂` on four shared coordinates; the refinement is `F₂`.
pub fn p112_f2() -> Result<WallCrossingScenario> {
    WallCrossingScenario::new("P(1,1,2)/F2", p112_rays(), p112_minus(), f2_complex(), vec![], f2_complex(), None, None)
}

/// The same wall-crossing in the fibers of bundles over `ℙ¹`.
pub fn p112_f2_bundle() -> Result<WallCrossingScenario> {
    let bundle = ScenarioBundle { base: p1_base(), twist: vec![vec![0, 0, 0, -1]] };
    WallCrossingScenario::new(
        "P(1,1,2)/F2 over P1",
        p112_rays(),
        p112_minus(),
        f2_complex(),
        vec![],
        f2_complex(),
        None,
        Some(bundle),
    )
}

/// `ℙ²` against its blowup at a torus-fixed point; not crepant.
pub fn blowup_p2() -> Result<WallCrossingScenario> {
    let rays = vec![vec![1, 0], vec![0, 1], vec![-1, -1], vec![1, 1]];
    let minus = faces(4, &[&[1, 2], &[2, 3], &[1, 3]]);
    let blowup = faces(4, &[&[1, 4], &[2, 4], &[2, 3], &[1, 3]]);
    WallCrossingScenario::new("P2/Bl", rays, minus, blowup.clone(), vec![], blowup, None, None)
}

/// `ℙ²` on both sides, refined by the blowup through an extra ray.
pub fn p2_refined() -> Result<WallCrossingScenario> {
    let rays = vec![vec![1, 0], vec![0, 1], vec![-1, -1]];
    let p2 = SimplicialComplex::projective_space(3);
    let tilde = faces(4, &[&[1, 4], &[2, 4], &[2, 3], &[1, 3]]);
    WallCrossingScenario::new("P2/P2", rays, p2.clone(), p2, vec![vec![1, 1]], tilde, None, None)
}
