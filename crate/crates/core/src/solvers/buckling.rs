use crate::assembly::{assemble_matrix, element_series};
use crate::element::geometric_stiffness;
use crate::model::{AnalysisSpec, Model};
use crate::numerics::eig_gsym_smallest_positive;

use super::linear::linear_solve;
use super::{normalize_inf, prepare, NodalDisplacement, SolveError};

#[derive(Clone, Debug, PartialEq)]
pub struct BucklingMode {
    /// Multiplier `λ` of the reference load.
    pub load_factor: f64,
    /// `λ` times the reference load magnitude.
    pub critical_load: f64,
    /// Mode shape scaled to unit max-norm over the free DOFs.
    pub shape: Vec<NodalDisplacement>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BucklingResult {
    /// Euclidean norm of the applied nodal forces.
    pub reference_load: f64,
    /// Modes in ascending load factor.
    pub modes: Vec<BucklingMode>,
}

impl BucklingResult {
    pub fn critical_load(&self) -> Option<f64> {
        self.modes.first().map(|m| m.critical_load)
    }
}

/// Magnitude of the reference load: the norm of the per-node summed forces,
/// or of the moments when no force is applied.
fn reference_magnitude(model: &Model) -> f64 {
    let mut per_node: Vec<(&str, f64, f64, f64)> = Vec::new();
    for l in &model.loads {
        match per_node.iter_mut().find(|(n, ..)| *n == l.node) {
            Some(e) => {
                e.1 += l.fx;
                e.2 += l.fy;
                e.3 += l.mz;
            }
            None => per_node.push((&l.node, l.fx, l.fy, l.mz)),
        }
    }
    let forces = per_node.iter().map(|e| e.1 * e.1 + e.2 * e.2).sum::<f64>().sqrt();
    if forces > 0.0 {
        forces
    } else {
        per_node.iter().map(|e| e.3 * e.3).sum::<f64>().sqrt()
    }
}

/// Linearized buckling: solves `K·v = λ·(−Kg)·v` for the smallest positive
/// load factors, with `Kg` built from the element axial forces of a linear
/// pre-solve under the model's loads.
pub fn solve_buckling(model: &Model) -> Result<BucklingResult, SolveError> {
    let modes = match model.analysis {
        AnalysisSpec::Buckling { modes } => modes,
        _ => AnalysisSpec::DEFAULT_BUCKLING_MODES,
    };
    let prep = prepare(model)?;
    let pre = linear_solve(model, &prep)?;

    let n_max = pre.axial_forces.iter().fold(0.0f64, |m, n| m.max(n.abs()));
    if n_max == 0.0 || pre.axial_forces.iter().all(|&n| n >= -1e-12 * n_max) {
        return Err(SolveError::NoCompression);
    }

    let structure = &prep.structure;
    let series = element_series(structure, 0);
    let k = assemble_matrix(structure, &prep.dofmap, |e| *series[e].k0())?;
    let kg = assemble_matrix(structure, &prep.dofmap, |e| {
        geometric_stiffness(pre.axial_forces[e], structure.elements[e].length).matrix
    })?;
    let pairs = eig_gsym_smallest_positive(&k, &kg.scaled(-1.0), modes).map_err(|e| prep.map_numerics(e))?;
    if pairs.values.is_empty() {
        return Err(SolveError::NoCompression);
    }

    let reference_load = reference_magnitude(model);
    let modes = pairs
        .values
        .iter()
        .enumerate()
        .map(|(i, &lambda)| BucklingMode {
            load_factor: lambda,
            critical_load: lambda * reference_load,
            shape: prep.nodal(&prep.dofmap.expand(&normalize_inf(&pairs.vector(i)))),
        })
        .collect();
    Ok(BucklingResult {
        reference_load,
        modes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::cantilever;
    use crate::model::{Constraint, Dof, DofSet, Load};
    use crate::oracle::{euler_buckling, one_element_cantilever_buckling_factor, BucklingSupport};

    const L: f64 = 5e-4;

    fn compressed(k: usize, force: f64) -> Model {
        let mut m = cantilever().with_subdivisions(k).with_analysis(AnalysisSpec::buckling());
        m.loads = vec![Load { node: "n2".into(), fx: -force, fy: 0.0, mz: 0.0 }];
        m
    }

    fn ei() -> f64 {
        1.69e11 * 2e-5 * 8e-18 / 12.0
    }

    #[test]
    fn one_element_matches_determinant_oracle() {
        let r = solve_buckling(&compressed(1, 1e-3)).unwrap();
        let want = one_element_cantilever_buckling_factor() * ei() / (L * L);
        let got = r.critical_load().unwrap();
        assert!(((got - want) / want).abs() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn ten_elements_close_to_euler() {
        let r = solve_buckling(&compressed(10, 1e-3)).unwrap();
        let exact = euler_buckling(1.69e11, 2e-5 * 8e-18 / 12.0, L, BucklingSupport::Cantilever);
        let err = (r.critical_load().unwrap() - exact) / exact * 100.0;
        assert!(err > 0.0 && err <= 0.001, "{err}%");
    }

    #[test]
    fn load_scale_invariance() {
        let a = solve_buckling(&compressed(4, 1e-3)).unwrap();
        let b = solve_buckling(&compressed(4, 3.7e-2)).unwrap();
        let (pa, pb) = (a.critical_load().unwrap(), b.critical_load().unwrap());
        assert!(((pa - pb) / pa).abs() < 1e-10);
        let ratio = a.modes[0].load_factor / b.modes[0].load_factor;
        assert!((ratio - 37.0).abs() < 1e-8);
    }

    #[test]
    fn tension_does_not_buckle() {
        let m = compressed(2, -1e-3);
        assert_eq!(solve_buckling(&m), Err(SolveError::NoCompression));
        let mut transverse = cantilever().with_analysis(AnalysisSpec::buckling());
        transverse.loads[0].fy = 1e-3;
        assert_eq!(solve_buckling(&transverse), Err(SolveError::NoCompression));
    }

    #[test]
    fn modes_are_normalized_and_ordered() {
        let mut m = compressed(6, 1e-3);
        m.analysis = AnalysisSpec::Buckling { modes: 3 };
        let r = solve_buckling(&m).unwrap();
        assert_eq!(r.modes.len(), 3);
        assert!(r.modes.windows(2).all(|w| w[0].load_factor <= w[1].load_factor));
        // second cantilever mode is 9x the first
        let ratio = r.modes[1].load_factor / r.modes[0].load_factor;
        assert!((ratio - 9.0).abs() < 0.05, "{ratio}");
        for mode in &r.modes {
            let peak = mode
                .shape
                .iter()
                .flat_map(|d| [d.ux.abs(), d.uy.abs(), d.rz.abs()])
                .fold(0.0, f64::max);
            assert!((peak - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn clamped_clamped_strut() {
        let mut m = compressed(1, 1e-3);
        m.constraints.push(Constraint { node: "n2".into(), fixed: DofSet::of(&[Dof::Uy, Dof::Rz]) });
        let exact = euler_buckling(1.69e11, 2e-5 * 8e-18 / 12.0, L, BucklingSupport::ClampedClamped);
        let err = |k: usize| {
            let mut m = m.clone().with_subdivisions(k);
            m.analysis = AnalysisSpec::buckling();
            (solve_buckling(&m).unwrap().critical_load().unwrap() - exact) / exact
        };
        let (e10, e20) = (err(10), err(20));
        assert!(e10 > 0.0 && e10 < 3e-4, "{e10}");
        // fourth-order convergence
        assert!((e10 / e20 - 16.0).abs() < 1.0, "{}", e10 / e20);
    }
}
