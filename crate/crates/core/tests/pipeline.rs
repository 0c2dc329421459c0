use cosserat_core::oracle::{elastica_tip_response, euler_buckling, BucklingSupport};
use cosserat_core::solvers::{run_analysis, AnalysisResult};
use cosserat_core::{
    parse_model, serialize_model, solve_buckling, solve_linear_static, AnalysisSpec, Load, Model,
    NonlinearSettings,
};
use proptest::prelude::*;

const CANTILEVER: &str = "\
# cantilever microbeam
material si E=1.69e11 rho=2330
section s1 rect w=2e-5 t=2e-6
node n1 0 0
node n2 5e-4 0
fix n1 ux uy rz
beam b1 n1 n2 mat=si sec=s1 n=8
force n2 fy=7.3e-4
analysis static
";

fn cantilever() -> Model {
    parse_model(CANTILEVER).unwrap()
}

fn ei() -> f64 {
    1.69e11 * 2e-5 * 8e-18 / 12.0
}

#[test]
fn dispatch_follows_analysis_line() {
    let m = cantilever();
    assert!(matches!(run_analysis(&m), Ok(AnalysisResult::Static(_))));
    let modal = m.clone().with_analysis(AnalysisSpec::Modal { modes: 2, order: 2 });
    match run_analysis(&modal).unwrap() {
        AnalysisResult::Modal(r) => assert_eq!(r.modes.len(), 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn serialized_model_solves_identically() {
    let m = cantilever();
    let again = parse_model(&serialize_model(&m)).unwrap();
    assert_eq!(solve_linear_static(&m).unwrap(), solve_linear_static(&again).unwrap());
}

#[test]
fn vertical_column_buckles_like_horizontal_one() {
    let text = CANTILEVER
        .replace("node n2 5e-4 0", "node n2 0 5e-4")
        .replace("force n2 fy=7.3e-4", "force n2 fy=-1e-6")
        .replace("analysis static", "analysis buckling");
    let r = solve_buckling(&parse_model(&text).unwrap()).unwrap();
    let exact = euler_buckling(1.69e11, 2e-5 * 8e-18 / 12.0, 5e-4, BucklingSupport::Cantilever);
    assert!((r.critical_load().unwrap() - exact) / exact < 1e-5);
}

#[test]
fn moderate_deflection_tracks_elastica() {
    let alpha = 2.0;
    let mut m = cantilever().with_subdivisions(10);
    m.loads = vec![Load { node: "n2".into(), fx: 0.0, fy: alpha * ei() / 25e-8, mz: 0.0 }];
    let path = cosserat_core::solve_nonlinear_static(&m, NonlinearSettings::default()).unwrap();
    let tip = path.last().unwrap().displacements.iter().find(|d| d.node == "n2").unwrap().clone();
    let want = elastica_tip_response(alpha).unwrap();
    assert!(((tip.uy / 5e-4 - want.deflection) / want.deflection).abs() < 5e-3);
    assert!(((-tip.ux / 5e-4 - want.shortening) / want.shortening).abs() < 2e-2);
    assert!(((tip.rz - want.rotation) / want.rotation).abs() < 5e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn static_response_is_linear_in_load(scale in -1e3f64..1e3, k in 1usize..6) {
        let base = cantilever().with_subdivisions(k);
        let mut scaled = base.clone();
        scaled.loads[0].fy *= scale;
        let (a, b) = (solve_linear_static(&base).unwrap(), solve_linear_static(&scaled).unwrap());
        for (da, db) in a.displacements.iter().zip(&b.displacements) {
            prop_assert!((db.uy - scale * da.uy).abs() <= 1e-10 * (scale * da.uy).abs().max(1e-30));
        }
    }

    #[test]
    fn critical_load_ignores_reference_magnitude(f in 1e-9f64..1e-2, k in 1usize..8) {
        let mut m = cantilever().with_subdivisions(k).with_analysis(AnalysisSpec::buckling());
        m.loads = vec![Load { node: "n2".into(), fx: -f, fy: 0.0, mz: 0.0 }];
        let mut unit = m.clone();
        unit.loads[0].fx = -1e-6;
        let (a, b) = (solve_buckling(&m).unwrap(), solve_buckling(&unit).unwrap());
        let (pa, pb) = (a.critical_load().unwrap(), b.critical_load().unwrap());
        prop_assert!(((pa - pb) / pb).abs() < 1e-9);
    }
}
