//! Discretization of beams into rod elements, DOF numbering, and assembly
//! of the global matrices.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::element::{
    build_series_shape_functions, element_matrix_series, geometric_stiffness, to_global_direction,
    ElementMatrixSeries, Matrix6, SectionProps,
};
use crate::model::{Constraint, Dof, DofSet, Load, Model};
use crate::numerics::{NumericsError, SymMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssemblyError {
    #[error("undefined {kind} `{name}`")]
    UnresolvedReference { kind: &'static str, name: String },
    #[error("no free degrees of freedom: every DOF is constrained")]
    NoFreeDofs,
    #[error("expected {expected} {what}, got {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureNode {
    pub name: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureElement {
    /// Index of the originating beam in `Model::beams`.
    pub beam: usize,
    pub nodes: [usize; 2],
    pub props: SectionProps,
    /// Undeformed length `L0`.
    pub length: f64,
    /// Undeformed chord angle `β0`.
    pub angle: f64,
    /// Undeformed unit chord `(cos β0, sin β0)`.
    pub direction: [f64; 2],
}

/// Nodes and elements after splitting every beam into its rod elements.
///
/// Declared nodes keep their model order and come first; interior nodes
/// follow beam by beam and are named `<beam>::<i>`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedStructure {
    pub nodes: Vec<StructureNode>,
    pub elements: Vec<StructureElement>,
}

impl DiscretizedStructure {
    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    /// Global (unconstrained) DOF indices of an element.
    pub fn element_dofs(&self, e: usize) -> [usize; 6] {
        let [a, b] = self.elements[e].nodes;
        [3 * a, 3 * a + 1, 3 * a + 2, 3 * b, 3 * b + 1, 3 * b + 2]
    }

    pub fn total_dofs(&self) -> usize {
        3 * self.nodes.len()
    }
}

pub fn discretize(model: &Model) -> Result<DiscretizedStructure, AssemblyError> {
    let mut nodes: Vec<StructureNode> = model
        .nodes
        .iter()
        .map(|n| StructureNode {
            name: n.name.clone(),
            x: n.x,
            y: n.y,
        })
        .collect();
    let index: HashMap<&str, usize> = model
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.as_str(), i))
        .collect();
    let lookup = |name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| AssemblyError::UnresolvedReference {
                kind: "node",
                name: name.to_string(),
            })
    };

    let mut elements = Vec::new();
    for (bi, beam) in model.beams.iter().enumerate() {
        let a = lookup(&beam.node_a)?;
        let b = lookup(&beam.node_b)?;
        let material = model
            .material(&beam.material)
            .ok_or_else(|| AssemblyError::UnresolvedReference {
                kind: "material",
                name: beam.material.clone(),
            })?;
        let section = model
            .section(&beam.section)
            .ok_or_else(|| AssemblyError::UnresolvedReference {
                kind: "section",
                name: beam.section.clone(),
            })?;
        let props = SectionProps::new(material, section);
        let k = beam.subdivisions.max(1);
        let (xa, ya) = (nodes[a].x, nodes[a].y);
        let (xb, yb) = (nodes[b].x, nodes[b].y);

        let mut chain = Vec::with_capacity(k + 1);
        chain.push(a);
        for i in 1..k {
            let t = i as f64 / k as f64;
            nodes.push(StructureNode {
                name: format!("{}::{}", beam.name, i),
                x: xa + (xb - xa) * t,
                y: ya + (yb - ya) * t,
            });
            chain.push(nodes.len() - 1);
        }
        chain.push(b);

        for pair in chain.windows(2) {
            let (p, q) = (&nodes[pair[0]], &nodes[pair[1]]);
            let (dx, dy) = (q.x - p.x, q.y - p.y);
            elements.push(StructureElement {
                beam: bi,
                nodes: [pair[0], pair[1]],
                props,
                length: dx.hypot(dy),
                angle: dy.atan2(dx),
                direction: [dx / dx.hypot(dy), dy / dx.hypot(dy)],
            });
        }
    }
    Ok(DiscretizedStructure { nodes, elements })
}

/// Mapping from `(node, dof)` to equation numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    free: Vec<[Option<usize>; 3]>,
    constrained: Vec<(usize, Dof)>,
    n_free: usize,
}

impl DofMap {
    pub fn n_free(&self) -> usize {
        self.n_free
    }

    pub fn free_index(&self, node: usize, dof: Dof) -> Option<usize> {
        self.free[node][dof.offset()]
    }

    /// Free index of a global (unconstrained) DOF index.
    pub fn free_of_total(&self, total: usize) -> Option<usize> {
        self.free[total / 3][total % 3]
    }

    pub fn constrained(&self) -> &[(usize, Dof)] {
        &self.constrained
    }

    pub fn node_count(&self) -> usize {
        self.free.len()
    }

    /// `(node, dof)` owning each free equation, in equation order.
    pub fn free_dofs(&self) -> Vec<(usize, Dof)> {
        let mut out = vec![(0, Dof::Ux); self.n_free];
        for (node, slots) in self.free.iter().enumerate() {
            for dof in Dof::ALL {
                if let Some(i) = slots[dof.offset()] {
                    out[i] = (node, dof);
                }
            }
        }
        out
    }

    /// Expands a free-DOF vector to all nodes (constrained entries zero).
    pub fn expand(&self, free: &DVector<f64>) -> DVector<f64> {
        let mut full = DVector::zeros(3 * self.free.len());
        for (node, slots) in self.free.iter().enumerate() {
            for (k, slot) in slots.iter().enumerate() {
                if let Some(i) = slot {
                    full[3 * node + k] = free[*i];
                }
            }
        }
        full
    }

    /// Restricts a full vector to the free DOFs.
    pub fn restrict(&self, full: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n_free);
        for (node, slots) in self.free.iter().enumerate() {
            for (k, slot) in slots.iter().enumerate() {
                if let Some(i) = slot {
                    out[*i] = full[3 * node + k];
                }
            }
        }
        out
    }
}

/// Numbers free DOFs node by node in structure order, `ux, uy, rz` within
/// a node, skipping constrained ones. Repeated constraints on a node merge.
pub fn number_dofs(structure: &DiscretizedStructure, constraints: &[Constraint]) -> Result<DofMap, AssemblyError> {
    let mut fixed = vec![DofSet::EMPTY; structure.nodes.len()];
    for c in constraints {
        let i = structure
            .node_index(&c.node)
            .ok_or_else(|| AssemblyError::UnresolvedReference {
                kind: "node",
                name: c.node.clone(),
            })?;
        fixed[i] = fixed[i].union(c.fixed);
    }
    let mut free = Vec::with_capacity(fixed.len());
    let mut constrained = Vec::new();
    let mut n_free = 0;
    for (node, set) in fixed.iter().enumerate() {
        let mut slots = [None; 3];
        for dof in Dof::ALL {
            if set.contains(dof) {
                constrained.push((node, dof));
            } else {
                slots[dof.offset()] = Some(n_free);
                n_free += 1;
            }
        }
        free.push(slots);
    }
    if n_free == 0 {
        return Err(AssemblyError::NoFreeDofs);
    }
    Ok(DofMap {
        free,
        constrained,
        n_free,
    })
}

/// Element matrix series for every element, truncated at `order`.
pub fn element_series(structure: &DiscretizedStructure, order: usize) -> Vec<ElementMatrixSeries> {
    structure
        .elements
        .iter()
        .map(|e| {
            let shapes = build_series_shape_functions(&e.props, e.length, order);
            element_matrix_series(&shapes, &e.props)
        })
        .collect()
}

/// Free-DOF matrices and load vector.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalSystem {
    pub k: SymMatrix,
    pub m: SymMatrix,
    /// Present when per-element axial forces were supplied.
    pub kg: Option<SymMatrix>,
    pub f: DVector<f64>,
}

fn scatter(target: &mut DMatrix<f64>, dofs: &[Option<usize>; 6], local: &Matrix6) {
    for (p, gp) in dofs.iter().enumerate() {
        let Some(i) = gp else { continue };
        for (q, gq) in dofs.iter().enumerate() {
            if let Some(j) = gq {
                target[(*i, *j)] += local[(p, q)];
            }
        }
    }
}

fn free_element_dofs(structure: &DiscretizedStructure, dofmap: &DofMap, e: usize) -> [Option<usize>; 6] {
    structure.element_dofs(e).map(|t| dofmap.free_of_total(t))
}

/// Scatter-adds `local(e)` (in element coordinates) over the free DOFs.
pub fn assemble_matrix(
    structure: &DiscretizedStructure,
    dofmap: &DofMap,
    mut local: impl FnMut(usize) -> Matrix6,
) -> Result<SymMatrix, AssemblyError> {
    let n = dofmap.n_free();
    let mut target = DMatrix::zeros(n, n);
    for (e, el) in structure.elements.iter().enumerate() {
        let g = to_global_direction(&local(e), el.direction);
        scatter(&mut target, &free_element_dofs(structure, dofmap, e), &g);
    }
    Ok(SymMatrix::new(target)?)
}

/// Stiffness over all `3·nodes` DOFs, before constraints.
pub fn assemble_unconstrained_stiffness(structure: &DiscretizedStructure, series: &[ElementMatrixSeries]) -> SymMatrix {
    let n = structure.total_dofs();
    let mut target = DMatrix::zeros(n, n);
    for (e, el) in structure.elements.iter().enumerate() {
        let g = to_global_direction(series[e].k0(), el.direction);
        scatter(&mut target, &structure.element_dofs(e).map(Some), &g);
    }
    SymMatrix::symmetrize(target)
}

/// Applied loads summed per node over all `3·nodes` DOFs.
pub fn full_load_vector(structure: &DiscretizedStructure, loads: &[Load]) -> Result<DVector<f64>, AssemblyError> {
    let mut f = DVector::zeros(structure.total_dofs());
    for l in loads {
        let i = structure
            .node_index(&l.node)
            .ok_or_else(|| AssemblyError::UnresolvedReference {
                kind: "node",
                name: l.node.clone(),
            })?;
        f[3 * i] += l.fx;
        f[3 * i + 1] += l.fy;
        f[3 * i + 2] += l.mz;
    }
    Ok(f)
}

/// Assembles `K`, `M`, the load vector, and, when `axial_forces` is given
/// (tension positive, one per element), the geometric stiffness `Kg`.
/// Loads on constrained DOFs are dropped from `f`.
pub fn assemble(
    structure: &DiscretizedStructure,
    dofmap: &DofMap,
    series: &[ElementMatrixSeries],
    loads: &[Load],
    axial_forces: Option<&[f64]>,
) -> Result<GlobalSystem, AssemblyError> {
    let ne = structure.elements.len();
    if series.len() != ne {
        return Err(AssemblyError::DimensionMismatch {
            what: "element matrix series",
            expected: ne,
            found: series.len(),
        });
    }
    if let Some(n) = axial_forces {
        if n.len() != ne {
            return Err(AssemblyError::DimensionMismatch {
                what: "element axial forces",
                expected: ne,
                found: n.len(),
            });
        }
    }
    let k = assemble_matrix(structure, dofmap, |e| *series[e].k0())?;
    let m = assemble_matrix(structure, dofmap, |e| series[e].m0())?;
    let kg = match axial_forces {
        Some(n) => Some(assemble_matrix(structure, dofmap, |e| {
            geometric_stiffness(n[e], structure.elements[e].length).matrix
        })?),
        None => None,
    };
    let f = dofmap.restrict(&full_load_vector(structure, loads)?);
    Ok(GlobalSystem { k, m, kg, f })
}

/// Truncated dynamic stiffness `K(ω)` over the free DOFs.
pub fn assemble_dynamic_stiffness(
    structure: &DiscretizedStructure,
    dofmap: &DofMap,
    series: &[ElementMatrixSeries],
    omega: f64,
) -> Result<SymMatrix, AssemblyError> {
    assemble_matrix(structure, dofmap, |e| series[e].dynamic_stiffness(omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::classical_stiffness;
    use crate::model::tests::cantilever;
    use crate::model::{AnalysisSpec, Beam, Node};
    use nalgebra::SymmetricEigen;

    fn built(model: &Model) -> (DiscretizedStructure, DofMap, GlobalSystem) {
        let s = discretize(model).unwrap();
        let d = number_dofs(&s, &model.constraints).unwrap();
        let series = element_series(&s, 1);
        let g = assemble(&s, &d, &series, &model.loads, None).unwrap();
        (s, d, g)
    }

    #[test]
    fn single_element_has_no_interior_nodes() {
        let s = discretize(&cantilever().with_subdivisions(1)).unwrap();
        assert_eq!(s.elements.len(), 1);
        assert_eq!(s.nodes.len(), 2);
    }

    #[test]
    fn equal_spacing() {
        let s = discretize(&cantilever().with_subdivisions(4)).unwrap();
        assert_eq!(s.elements.len(), 4);
        assert_eq!(s.nodes.len(), 5);
        for e in &s.elements {
            assert!((e.length - 1.25e-4).abs() < 1e-18);
        }
        let names: Vec<_> = s.nodes.iter().map(|n| n.name.as_str()).collect();
        assert_eq!(names, ["n1", "n2", "b1::1", "b1::2", "b1::3"]);
    }

    #[test]
    fn shared_node_keeps_one_dof_set() {
        let mut m = cantilever().with_subdivisions(2);
        m.nodes.push(Node { name: "n3".into(), x: 5e-4, y: 5e-4 });
        m.beams.push(Beam {
            name: "b2".into(),
            node_a: "n2".into(),
            node_b: "n3".into(),
            material: "si".into(),
            section: "s1".into(),
            subdivisions: 2,
        });
        let s = discretize(&m).unwrap();
        assert_eq!(s.elements.len(), 4);
        assert_eq!(s.nodes.len(), 5);
        let n2 = s.node_index("n2").unwrap();
        let touching = s.elements.iter().filter(|e| e.nodes.contains(&n2)).count();
        assert_eq!(touching, 2);
        let d = number_dofs(&s, &m.constraints).unwrap();
        assert_eq!(d.n_free(), 12);
    }

    #[test]
    fn free_dof_counts() {
        let m = cantilever();
        for (k, want) in [(1, 3), (8, 24)] {
            let s = discretize(&m.clone().with_subdivisions(k)).unwrap();
            assert_eq!(number_dofs(&s, &m.constraints).unwrap().n_free(), want);
        }
        let mut bridge = cantilever().with_subdivisions(4);
        bridge.constraints.push(Constraint { node: "n2".into(), fixed: DofSet::ALL });
        let s = discretize(&bridge).unwrap();
        assert_eq!(number_dofs(&s, &bridge.constraints).unwrap().n_free(), 9);
    }

    #[test]
    fn fully_constrained_has_no_free_dofs() {
        let mut m = cantilever().with_subdivisions(1);
        m.constraints.push(Constraint { node: "n2".into(), fixed: DofSet::ALL });
        let s = discretize(&m).unwrap();
        assert_eq!(number_dofs(&s, &m.constraints), Err(AssemblyError::NoFreeDofs));
    }

    #[test]
    fn single_element_stiffness_is_tip_block() {
        let m = cantilever().with_subdivisions(1);
        let (s, _, g) = built(&m);
        let k0 = classical_stiffness(&s.elements[0].props, 5e-4);
        for i in 0..3 {
            for j in 0..3 {
                let want = k0[(3 + i, 3 + j)];
                assert!((g.k.get(i, j) - want).abs() <= 1e-12 * k0.amax());
            }
        }
        assert_eq!(g.f.as_slice(), &[0.0, 7.3e-4, 0.0]);
    }

    #[test]
    fn vertical_element_swaps_axes() {
        let m = cantilever().with_subdivisions(1);
        let mut v = m.clone();
        v.nodes[1] = Node { name: "n2".into(), x: 0.0, y: 5e-4 };
        let (_, _, gh) = built(&m);
        let (_, _, gv) = built(&v);
        // horizontal (ux, uy, rz) ↔ vertical (uy, -ux, rz)
        let scale = gh.k.norm_max();
        assert!((gv.k.get(1, 1) - gh.k.get(0, 0)).abs() <= 1e-10 * scale);
        assert!((gv.k.get(0, 0) - gh.k.get(1, 1)).abs() <= 1e-10 * scale);
        assert!((gv.k.get(0, 2) + gh.k.get(1, 2)).abs() <= 1e-10 * scale);
        assert!((gv.k.get(2, 2) - gh.k.get(2, 2)).abs() <= 1e-10 * scale);
    }

    #[test]
    fn two_collinear_elements_sum_at_the_shared_node() {
        let m = cantilever().with_subdivisions(2);
        let (s, d, g) = built(&m);
        let k0 = classical_stiffness(&s.elements[0].props, 2.5e-4);
        let mid = s.node_index("b1::1").unwrap();
        let tip = s.node_index("n2").unwrap();
        let scale = k0.amax();
        for a in Dof::ALL {
            for b in Dof::ALL {
                let (i, j) = (a.offset(), b.offset());
                let mid_mid = g.k.get(d.free_index(mid, a).unwrap(), d.free_index(mid, b).unwrap());
                assert!((mid_mid - (k0[(3 + i, 3 + j)] + k0[(i, j)])).abs() <= 1e-12 * scale);
                let mid_tip = g.k.get(d.free_index(mid, a).unwrap(), d.free_index(tip, b).unwrap());
                assert!((mid_tip - k0[(i, 3 + j)]).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn unconstrained_stiffness_has_three_rigid_modes() {
        let mut m = cantilever().with_subdivisions(3);
        m.nodes.push(Node { name: "n3".into(), x: 2e-4, y: 4e-4 });
        m.beams.push(Beam {
            name: "b2".into(),
            node_a: "n2".into(),
            node_b: "n3".into(),
            material: "si".into(),
            section: "s1".into(),
            subdivisions: 2,
        });
        let s = discretize(&m).unwrap();
        let k = assemble_unconstrained_stiffness(&s, &element_series(&s, 0));
        // scale rotations by a length so the eigenvalues are comparable
        let n = s.total_dofs();
        let l = 5e-4;
        let scaling = DMatrix::from_fn(n, n, |i, j| if i == j { if i % 3 == 2 { 1.0 / l } else { 1.0 } } else { 0.0 });
        let scaled = &scaling * k.as_matrix() * &scaling;
        let ev = SymmetricEigen::new(scaled).eigenvalues;
        let max = ev.amax();
        assert_eq!(ev.iter().filter(|v| v.abs() < 1e-10 * max).count(), 3);
    }

    #[test]
    fn load_scaling_is_linear() {
        let m = cantilever().with_subdivisions(3);
        let s = discretize(&m).unwrap();
        let d = number_dofs(&s, &m.constraints).unwrap();
        let series = element_series(&s, 0);
        let base = assemble(&s, &d, &series, &m.loads, None).unwrap();
        let mut scaled = m.loads.clone();
        for l in &mut scaled {
            l.fy *= 3.5;
        }
        let g = assemble(&s, &d, &series, &scaled, None).unwrap();
        assert_eq!(g.f, &base.f * 3.5);
    }

    #[test]
    fn assembly_is_deterministic() {
        let m = cantilever().with_analysis(AnalysisSpec::modal());
        let (_, _, a) = built(&m);
        let (_, _, b) = built(&m);
        assert_eq!(a, b);
    }

    #[test]
    fn mismatched_series_count_is_rejected() {
        let m = cantilever().with_subdivisions(2);
        let s = discretize(&m).unwrap();
        let d = number_dofs(&s, &m.constraints).unwrap();
        let series = element_series(&s, 0);
        let err = assemble(&s, &d, &series[..1], &m.loads, None).unwrap_err();
        assert!(matches!(err, AssemblyError::DimensionMismatch { .. }));
    }
}
