use proptest::prelude::*;

use toricsod::bundle::TotalSpace;
use toricsod::cache::Store;
use toricsod::catalog;
use toricsod::cech::Engine;
use toricsod::ext::{ext_formula, ext_koszul};
use toricsod::fan::{SimplicialComplex, Stratum};
use toricsod::ktheory::{class_of, euler_pairing, FmSolver, KClass, Side, WallCrossingScenario};
use toricsod::objects::{decode, encode, ExceptionalObject, Label};
use toricsod::selector::{QuotientLattice, WeightSelector};
use toricsod::space::Space;

fn spaces() -> Vec<Space> {
    vec![catalog::p1(), catalog::p2(), catalog::p12(), catalog::p1xp1()]
}

fn label(n: usize, r: i64) -> impl Strategy<Value = Label> {
    prop::collection::vec(-r..=r, n).prop_map(Label)
}

/// A space index with two labels and a twist sized for it.
fn instance() -> impl Strategy<Value = (usize, Label, Label, Vec<i64>)> {
    (0..4usize).prop_flat_map(|k| {
        let n = spaces()[k].n();
        (Just(k), label(n, 3), label(n, 3), prop::collection::vec(-2..=2i64, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn codec_round_trip(a in (1..=4usize).prop_flat_map(|n| label(n, 6))) {
        let e = decode(&a);
        prop_assert_eq!(encode(&e.support, &e.p), a);
    }

    #[test]
    fn twisting_both_objects_changes_nothing((k, a, b, e) in instance()) {
        let engine = Engine::new();
        let space = &spaces()[k];
        let (a, b) = (decode(&a), decode(&b));
        let zero = vec![0; space.n()];
        let plain = ext_formula(&engine, space, &a, &b, &zero).unwrap();
        let twisted = ext_formula(&engine, space, &a.twisted(&e), &b.twisted(&e), &zero).unwrap();
        prop_assert_eq!(plain, twisted);
    }

    #[test]
    fn shifts_move_degrees((k, a, b, _) in instance(), s in -2..=2i64, t in -2..=2i64) {
        let engine = Engine::new();
        let space = &spaces()[k];
        let (a, b) = (decode(&a), decode(&b));
        let zero = vec![0; space.n()];
        let plain = ext_formula(&engine, space, &a, &b, &zero).unwrap();
        let sa = ExceptionalObject::with_shift(a.support.clone(), a.p.clone(), s);
        let tb = ExceptionalObject::with_shift(b.support.clone(), b.p.clone(), t);
        prop_assert_eq!(ext_formula(&engine, space, &sa, &tb, &zero).unwrap(), plain.shifted(s - t));
        prop_assert_eq!(ext_koszul(&engine, space, &sa, &tb, &zero).unwrap(), plain.shifted(s - t));
    }

    #[test]
    fn koszul_classes_reproduce_euler_characteristics((k, a, b, e) in instance()) {
        let engine = Engine::new();
        let space = &spaces()[k];
        let (a, b) = (decode(&a), decode(&b));
        prop_assume!(space.complex.is_face(&a.support) && space.complex.is_face(&b.support));
        let table = ext_formula(&engine, space, &a, &b, &e).unwrap();
        let x = class_of(&a);
        let y = class_of(&b).twisted(&e);
        prop_assert_eq!(euler_pairing(&engine, space, &x, &y).unwrap(), table.euler());
    }

    #[test]
    fn base_twists_keep_their_class(d in prop::collection::vec(-4..=4i64, 2)) {
        let totals: [TotalSpace; 2] = [catalog::f1_bundle(), catalog::p12_bundle()];
        for t in &totals {
            let e = t.base_twist(&d).unwrap();
            prop_assert_eq!(e.len(), t.space.n());
            prop_assert!(e[t.n_base..].iter().all(|&x| x == 0));
            for row in &t.spec.base.weights {
                let dot = |v: &[i64]| -> i64 { row.iter().zip(v).map(|(a, b)| a * b).sum() };
                prop_assert_eq!(dot(&e[..t.n_base]), dot(&d));
            }
            prop_assert_eq!(t.base_twist(&e[..t.n_base]).unwrap(), e.clone());
        }
    }

    #[test]
    fn join_faces_split(a in 0u64..4, b in 0u64..8) {
        let p1 = SimplicialComplex::projective_space(2);
        let p2 = SimplicialComplex::projective_space(3);
        let j = p1.join(&p2).unwrap();
        let mask = a | (b << 2);
        prop_assert_eq!(j.is_face_mask(mask), p1.is_face_mask(a) && p2.is_face_mask(b));
    }

    #[test]
    fn strata_exist_on_faces(bits in 0u64..16) {
        let c = catalog::p1xp1().complex;
        let k: Vec<usize> = (0..4).filter(|i| bits >> i & 1 == 1).collect();
        match c.stratum(&k) {
            Stratum::Empty => prop_assert!(!c.is_face(&k)),
            Stratum::Complex { labels, .. } => {
                prop_assert!(c.is_face(&k));
                prop_assert_eq!(labels.len(), 4 - k.len());
            }
        }
    }

    #[test]
    fn quotient_representatives(v in prop::collection::vec(-9..=9i64, 2), m in -3..=3i64) {
        let sel = WeightSelector::invariant(2, &[vec![1, 2]], &[(vec![0, 1], 2)]).unwrap();
        let q = QuotientLattice::of(&sel).unwrap();
        // (4, -2) has weight 0 and even second entry
        let moved = vec![v[0] + 4 * m, v[1] - 2 * m];
        prop_assert_eq!(q.canonical(&v), q.canonical(&moved));
        prop_assert_eq!(q.canonical(&q.canonical(&v)), q.canonical(&v));
    }

    #[test]
    fn cache_round_trip(key in "[a-z]{1,12}", value in prop::collection::vec(any::<i64>(), 0..6)) {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path());
        store.put(&key, &value);
        prop_assert_eq!(store.get::<Vec<i64>>(&key), Some(value.clone()));
        let reopened = Store::open(dir.path());
        prop_assert_eq!(reopened.get::<Vec<i64>>(&key), Some(value));
        prop_assert_eq!(reopened.get::<Vec<i64>>(&format!("{key}-other")), None);
    }

    #[test]
    fn pullbacks_are_additive(d in prop::collection::vec(-3..=3i64, 4), e in prop::collection::vec(-3..=3i64, 4)) {
        let s = catalog::p112_f2().unwrap();
        if let (Ok(pd), Ok(pe)) = (s.pullback(Side::Minus, &d), s.pullback(Side::Minus, &e)) {
            let sum: Vec<i64> = d.iter().zip(&e).map(|(a, b)| a + b).collect();
            let expected: Vec<i64> = pd.iter().zip(&pe).map(|(a, b)| a + b).collect();
            prop_assert_eq!(s.pullback(Side::Minus, &sum).unwrap(), expected);
        }
    }

    #[test]
    fn transform_is_linear(picks in prop::collection::vec((0..81usize, -2..=2i64), 1..5)) {
        let engine = Engine::new();
        let s = catalog::p112_f2().unwrap();
        let lines: Vec<KClass> = s.twist_window(-2, 2).into_iter().map(KClass::line).collect();
        let solver = FmSolver::new(&engine, &s).unwrap();
        let terms: Vec<KClass> = picks.iter().map(|&(i, c)| lines[i % lines.len()].scaled(c)).collect();
        let sum = terms.iter().fold(KClass::zero(), |acc, t| acc.plus(t));
        let sol = solver.solve(&terms).unwrap();
        let separately = terms.iter().fold(KClass::zero(), |acc, t| acc.plus(&sol.image(t)));
        prop_assert_eq!(solver.fm_class(&sum).unwrap(), separately);
    }
}

fn swapped(s: &WallCrossingScenario) -> WallCrossingScenario {
    let extra = s.tilde.rays[s.n..].to_vec();
    WallCrossingScenario::new(
        "swapped",
        s.minus.rays.clone(),
        s.plus.complex.clone(),
        s.minus.complex.clone(),
        extra,
        s.tilde.complex.clone(),
        Some(s.canonical.clone()),
        s.bundle.clone(),
    )
    .unwrap()
}

#[test]
fn crepancy_is_symmetric() {
    for s in [catalog::p112_f2(), catalog::blowup_p2(), catalog::p2_refined(), catalog::p112_f2_bundle()] {
        let s = s.unwrap();
        let forward = s.check_crepant().unwrap();
        let backward = swapped(&s).check_crepant().unwrap();
        assert_eq!(forward.crepant, backward.crepant, "{}", s.name);
        assert_eq!(forward.minus, backward.plus);
    }
}
