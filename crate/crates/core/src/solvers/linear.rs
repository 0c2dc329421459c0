use nalgebra::DVector;

use crate::assembly::{assemble, element_series, full_load_vector};
use crate::element::{rotation_from_direction, to_global_direction, Vector6};
use crate::model::Model;
use crate::numerics::solve_spd;

use super::{prepare, NodalDisplacement, Prepared, SolveError};

/// Support reaction at a constrained node; components on free DOFs are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Reaction {
    pub node: String,
    pub fx: f64,
    pub fy: f64,
    pub mz: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StaticResult {
    pub displacements: Vec<NodalDisplacement>,
    /// Axial force per element, tension positive.
    pub axial_forces: Vec<f64>,
    pub reactions: Vec<Reaction>,
    /// `‖K·u − f‖ / ‖f‖` over the free DOFs (absolute when `f = 0`).
    pub residual: f64,
}

impl StaticResult {
    pub fn displacement(&self, node: &str) -> Option<&NodalDisplacement> {
        self.displacements.iter().find(|d| d.node == node)
    }
}

pub(crate) struct LinearSolution {
    pub axial_forces: Vec<f64>,
    pub result: StaticResult,
}

pub(crate) fn linear_solve(model: &Model, prep: &Prepared) -> Result<LinearSolution, SolveError> {
    let structure = &prep.structure;
    let series = element_series(structure, 0);
    let system = assemble(structure, &prep.dofmap, &series, &model.loads, None)?;
    let u = solve_spd(&system.k, &system.f).map_err(|e| prep.map_numerics(e))?;
    let f_norm = system.f.norm();
    let res = (system.k.mul_vec(&u) - &system.f).norm();
    let residual = if f_norm > 0.0 { res / f_norm } else { res };
    let full = prep.dofmap.expand(&u);

    // Element end forces give both the axial forces and the internal
    // nodal force vector used for the reactions.
    let mut internal = DVector::<f64>::zeros(structure.total_dofs());
    let mut axial_forces = Vec::with_capacity(structure.elements.len());
    for (e, el) in structure.elements.iter().enumerate() {
        let dofs = structure.element_dofs(e);
        let ue = Vector6::from_iterator(dofs.iter().map(|&d| full[d]));
        let fe = to_global_direction(series[e].k0(), el.direction) * ue;
        for (k, &d) in dofs.iter().enumerate() {
            internal[d] += fe[k];
        }
        let local = rotation_from_direction(el.direction) * ue;
        axial_forces.push(el.props.ea() / el.length * (local[3] - local[0]));
    }

    let applied = full_load_vector(structure, &model.loads)?;
    let mut reactions: Vec<Reaction> = Vec::new();
    for &(node, dof) in prep.dofmap.constrained() {
        let name = &structure.nodes[node].name;
        let value = internal[3 * node + dof.offset()] - applied[3 * node + dof.offset()];
        let slot = match reactions.last_mut() {
            Some(r) if &r.node == name => r,
            _ => {
                reactions.push(Reaction {
                    node: name.clone(),
                    fx: 0.0,
                    fy: 0.0,
                    mz: 0.0,
                });
                reactions.last_mut().expect("just pushed")
            }
        };
        match dof.offset() {
            0 => slot.fx = value,
            1 => slot.fy = value,
            _ => slot.mz = value,
        }
    }

    let result = StaticResult {
        displacements: prep.nodal(&full),
        axial_forces: axial_forces.clone(),
        reactions,
        residual,
    };
    Ok(LinearSolution {
        axial_forces,
        result,
    })
}

/// Solves `K·u = f` by Cholesky factorization and recovers element axial
/// forces and support reactions.
pub fn solve_linear_static(model: &Model) -> Result<StaticResult, SolveError> {
    let prep = prepare(model)?;
    Ok(linear_solve(model, &prep)?.result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::cantilever;
    use crate::model::{Beam, Constraint, DofSet, Load, Node};
    use crate::oracle::{cantilever_axial_deflection, cantilever_tip_deflection};

    const E: f64 = 1.69e11;
    const L: f64 = 5e-4;

    fn inertia() -> f64 {
        2e-5 * 8e-18 / 12.0
    }

    #[test]
    fn tip_deflection_matches_closed_form() {
        let want = cantilever_tip_deflection(7.3e-4, E, inertia(), L);
        for k in [1, 2, 4, 8] {
            let r = solve_linear_static(&cantilever().with_subdivisions(k)).unwrap();
            let tip = r.displacement("n2").unwrap();
            assert!(((tip.uy - want) / want).abs() < 1e-10, "k={k}");
            assert!(r.residual < 1e-10);
        }
    }

    #[test]
    fn axial_tip_displacement() {
        let mut m = cantilever();
        m.loads[0] = Load { node: "n2".into(), fx: 7.3e-4, fy: 0.0, mz: 0.0 };
        let want = cantilever_axial_deflection(7.3e-4, E, 4e-11, L);
        let r = solve_linear_static(&m).unwrap();
        let tip = r.displacement("n2").unwrap();
        assert!(((tip.ux - want) / want).abs() < 1e-12);
        for n in &r.axial_forces {
            assert!((n - 7.3e-4).abs() < 1e-12 * 7.3e-4);
        }
    }

    #[test]
    fn zero_load_gives_zero_displacement() {
        let mut m = cantilever();
        m.loads.clear();
        let r = solve_linear_static(&m).unwrap();
        assert!(r.displacements.iter().all(|d| d.ux == 0.0 && d.uy == 0.0 && d.rz == 0.0));
    }

    #[test]
    fn reactions_balance_loads() {
        let mut m = cantilever().with_subdivisions(3);
        m.loads.push(Load { node: "n2".into(), fx: -2e-4, fy: 0.0, mz: 3e-8 });
        let r = solve_linear_static(&m).unwrap();
        assert_eq!(r.reactions.len(), 1);
        let re = &r.reactions[0];
        let (fx, fy, mz) = (-2e-4, 7.3e-4, 3e-8);
        assert!((re.fx + fx).abs() <= 1e-9 * fy);
        assert!((re.fy + fy).abs() <= 1e-9 * fy);
        // moments about the root: reaction moment + load moment at x = L
        let moment = re.mz + mz + L * fy;
        assert!(moment.abs() <= 1e-9 * L * fy);
    }

    #[test]
    fn floating_node_is_rank_deficient() {
        let mut m = cantilever();
        m.nodes.push(Node { name: "lost".into(), x: 1.0, y: 1.0 });
        match solve_linear_static(&m) {
            Err(SolveError::RankDeficient { dof }) => assert!(dof.starts_with("lost."), "{dof}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unsupported_model_is_rank_deficient() {
        let mut m = cantilever();
        m.constraints.clear();
        assert!(matches!(solve_linear_static(&m), Err(SolveError::RankDeficient { .. })));
    }

    #[test]
    fn frame_rotation_rotates_displacements() {
        // L-shaped frame, then the same frame rotated by 90°.
        let build = |rot: bool| {
            let mut m = cantilever().with_subdivisions(2);
            m.nodes.push(Node { name: "n3".into(), x: 5e-4, y: 3e-4 });
            m.beams.push(Beam {
                name: "b2".into(),
                node_a: "n2".into(),
                node_b: "n3".into(),
                material: "si".into(),
                section: "s1".into(),
                subdivisions: 3,
            });
            m.loads = vec![Load { node: "n3".into(), fx: 1e-4, fy: -2e-4, mz: 1e-9 }];
            if rot {
                for n in &mut m.nodes {
                    (n.x, n.y) = (-n.y, n.x);
                }
                for l in &mut m.loads {
                    (l.fx, l.fy) = (-l.fy, l.fx);
                }
            }
            m.constraints = vec![Constraint { node: "n1".into(), fixed: DofSet::ALL }];
            m
        };
        let a = solve_linear_static(&build(false)).unwrap();
        let b = solve_linear_static(&build(true)).unwrap();
        let scale = a.displacements.iter().map(|d| d.ux.hypot(d.uy)).fold(0.0, f64::max);
        for (da, db) in a.displacements.iter().zip(&b.displacements) {
            assert!((db.ux + da.uy).abs() <= 1e-10 * scale);
            assert!((db.uy - da.ux).abs() <= 1e-10 * scale);
            assert!((db.rz - da.rz).abs() <= 1e-10 * da.rz.abs().max(1e-300) + 1e-10 * scale / L);
        }
    }
}
