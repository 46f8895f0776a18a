//! Every seriation model, fed the assignment that encodes a pair of
//! permutations, is feasible and has the measure of the reordered matrix as
//! its objective.

use proptest::prelude::*;
use seriation::measures::total_stress;
use seriation::milp::{build_model, emit_lp, extract_permutations, BuildOptions, Formulation};
use seriation::{apply_permutations, normalize, DenseMatrix, Measure, Neighborhood, Permutation, StressParams};

fn instance() -> impl Strategy<Value = (DenseMatrix, Vec<usize>, Vec<usize>, bool)> {
    (2usize..=4, 2usize..=4, any::<bool>()).prop_flat_map(|(n, m, coord)| {
        let m = if coord { n } else { m };
        (
            proptest::collection::vec(0u8..=6, n * m),
            Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            Just((0..m).collect::<Vec<_>>()).prop_shuffle(),
            Just(coord),
        )
            .prop_map(move |(d, r, c, coord)| {
                let a = DenseMatrix::new(n, m, d.into_iter().map(f64::from).collect()).unwrap();
                let c = if coord { r.clone() } else { c };
                (a, r, c, coord)
            })
    })
}

fn check(a: &DenseMatrix, measure: &Measure, f: Formulation, r: &Permutation, c: &Permutation, coord: bool) {
    let model = build_model(a, measure, f, BuildOptions { coordinated: coord, symmetry_breaking: false }).unwrap();
    let w = model.witness(r, c).unwrap();
    if let Err(e) = model.check_feasible(&w, 1e-9) {
        panic!("{f} witness infeasible: {e}");
    }
    let expected = if f.is_pam() {
        let (unit, _) = normalize(a);
        measure.evaluate(&apply_permutations(&unit, r, c).unwrap())
    } else {
        measure.evaluate(&apply_permutations(a, r, c).unwrap())
    };
    let got = model.evaluate_objective(&w);
    assert!((got - expected).abs() <= 1e-9 * expected.abs().max(1.0), "{f} {}: model {got}, measure {expected}", measure.label());
    let names: std::collections::HashMap<String, f64> = model
        .variables()
        .iter()
        .zip(&w)
        .filter(|(_, &v)| v != 0.0)
        .map(|(var, &v)| (var.name.clone(), v))
        .collect();
    let (er, ec) = extract_permutations(&names, &model).unwrap();
    assert_eq!((&er, &ec), (r, c));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn witnesses_match_measures((a, ro, co, coord) in instance(), p in 1u32..=2) {
        let r = Permutation::from_order(&ro).unwrap();
        let c = Permutation::from_order(&co).unwrap();
        let stress = [
            Measure::von_neumann(p).unwrap(),
            Measure::moore(p).unwrap(),
            Measure::cross2(p).unwrap(),
            Measure::epsilon(2.0, p).unwrap(),
            Measure::Stress(StressParams::new(Neighborhood::custom([(1, 1), (0, 2)]).unwrap(), p).unwrap()),
        ];
        for m in &stress {
            check(&a, m, Formulation::PamL1, &r, &c, coord);
            check(&a, m, Formulation::PamL2, &r, &c, coord);
        }
        check(&a, &Measure::von_neumann(p).unwrap(), Formulation::Hpm, &r, &c, coord);
        check(&a, &Measure::Effectiveness, Formulation::Hpm, &r, &c, coord);
        check(&a, &Measure::moore(p).unwrap(), Formulation::HpmMoore, &r, &c, coord);
        check(&a, &Measure::cross2(p).unwrap(), Formulation::HpmCross2, &r, &c, coord);
    }

    #[test]
    fn lp_text_is_deterministic_and_distinguishes_models((a, _, _, coord) in instance()) {
        let vn = Measure::von_neumann(1).unwrap();
        let opts = BuildOptions { coordinated: coord, symmetry_breaking: true };
        let one = emit_lp(&build_model(&a, &vn, Formulation::Hpm, opts).unwrap());
        let two = emit_lp(&build_model(&a, &vn, Formulation::Hpm, opts).unwrap());
        prop_assert_eq!(&one, &two);
        let other = emit_lp(&build_model(&a, &vn, Formulation::PamL2, opts).unwrap());
        prop_assert_ne!(&one, &other);
        let shifted = a.map(|v| v + if v > 3.0 { 1.0 } else { 0.0 }).unwrap();
        let differs = emit_lp(&build_model(&shifted, &vn, Formulation::Hpm, opts).unwrap());
        prop_assert_eq!(shifted == a, differs == one);
    }
}

#[test]
fn pam_stress_scales_back_to_original() {
    let a = DenseMatrix::from_rows(&[[2.0, 6.0, 4.0], [10.0, 2.0, 8.0]]).unwrap();
    let (unit, info) = normalize(&a);
    for p in 1..=2 {
        let params = StressParams::von_neumann(p).unwrap();
        let scaled = seriation::matrix::denormalize_objective(total_stress(&unit, &params), &info, p);
        assert!((scaled - total_stress(&a, &params)).abs() < 1e-9);
    }
}

#[test]
fn cross2_last_node_pays_nothing() {
    let a = DenseMatrix::from_rows(&[[0.0, 3.0, 1.0], [3.0, 0.0, 2.0], [1.0, 2.0, 0.0]]).unwrap();
    let model = build_model(&a, &Measure::cross2(1).unwrap(), Formulation::HpmCross2, BuildOptions::default()).unwrap();
    let id = Permutation::identity(3);
    let w = model.witness(&id, &id).unwrap();
    model.check_feasible(&w, 1e-12).unwrap();
    for name in ["uN_2", "uN_3", "uM_2", "uM_3"] {
        assert_eq!(w[model.var(name).unwrap().0], 0.0, "{name}");
    }
    assert!(w[model.var("uN_1").unwrap().0] > 0.0);
}

#[test]
fn identical_rows_need_no_two_step_cost() {
    let a = DenseMatrix::from_rows(&[[1.0, 2.0, 0.0], [1.0, 2.0, 0.0], [1.0, 2.0, 0.0]]).unwrap();
    let model = build_model(&a, &Measure::cross2(2).unwrap(), Formulation::HpmCross2, BuildOptions::default()).unwrap();
    let id = Permutation::identity(3);
    let w = model.witness(&id, &id).unwrap();
    for r in 1..=3 {
        assert_eq!(w[model.var(&format!("uN_{r}")).unwrap().0], 0.0);
    }
}
