//! Convergence studies of a single straight beam against closed forms.

use std::fmt::Write as _;

use clap::ValueEnum;
use cosserat_core::oracle::{cantilever_frequencies, cantilever_tip_deflection, euler_buckling, BucklingSupport};
use cosserat_core::{solve_buckling, solve_linear_static, solve_modal, AnalysisSpec, Dof, Model, SolveError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    /// First critical load.
    Buckling,
    /// Transverse tip deflection.
    StaticTip,
    /// First natural frequency (rad/s).
    #[value(name = "modal-1")]
    Modal1,
}

#[derive(Debug)]
pub enum StudyError {
    NoReference(String),
    Solve(SolveError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub elements: usize,
    pub model_value: f64,
    pub analytical_value: f64,
    pub rel_error_percent: f64,
}

/// A single beam clamped at `root`, with the supports of the other end.
struct Topology {
    support: BucklingSupport,
    tip: String,
    length: f64,
    /// Unit axis from root to tip.
    axis: (f64, f64),
    e: f64,
    i: f64,
    rho: f64,
    area: f64,
}

fn no_ref(msg: impl Into<String>) -> StudyError {
    StudyError::NoReference(msg.into())
}

fn topology(model: &Model) -> Result<Topology, StudyError> {
    let [beam] = model.beams.as_slice() else {
        return Err(no_ref("studies need a model with exactly one beam"));
    };
    if model.nodes.len() != 2 {
        return Err(no_ref("studies need a model with exactly the two beam end nodes"));
    }
    let fixed = |node: &str| {
        model
            .constraints
            .iter()
            .filter(|c| c.node == node)
            .fold(cosserat_core::DofSet::EMPTY, |acc, c| acc.union(c.fixed))
    };
    let (a, b) = (fixed(&beam.node_a), fixed(&beam.node_b));
    let (root, tip, tip_fixed) = if a == cosserat_core::DofSet::ALL {
        (&beam.node_a, &beam.node_b, b)
    } else if b == cosserat_core::DofSet::ALL {
        (&beam.node_b, &beam.node_a, a)
    } else {
        return Err(no_ref("no reference solution: neither beam end is clamped"));
    };
    let (pr, pt) = (model.node(root).expect("validated"), model.node(tip).expect("validated"));
    let length = (pt.x - pr.x).hypot(pt.y - pr.y);
    let axis = ((pt.x - pr.x) / length, (pt.y - pr.y) / length);
    let support = if tip_fixed.is_empty() {
        BucklingSupport::Cantilever
    } else {
        // guided clamp: rotation and transverse motion fixed, axial free
        let transverse = if axis.1 == 0.0 {
            Dof::Uy
        } else if axis.0 == 0.0 {
            Dof::Ux
        } else {
            return Err(no_ref("no reference solution for an inclined clamped-clamped beam"));
        };
        let guided = cosserat_core::DofSet::of(&[transverse, Dof::Rz]);
        if tip_fixed != guided {
            return Err(no_ref("no reference solution for these end supports"));
        }
        BucklingSupport::ClampedClamped
    };
    let mat = model.material(&beam.material).expect("validated");
    let sec = model.section(&beam.section).expect("validated");
    Ok(Topology {
        support,
        tip: tip.clone(),
        length,
        axis,
        e: mat.youngs_modulus,
        i: sec.inertia,
        rho: mat.density,
        area: sec.area,
    })
}

/// Runs `quantity` once per subdivision count.
pub fn convergence_study(model: &Model, counts: &[usize], quantity: Quantity) -> Result<Vec<StudyRow>, StudyError> {
    let topo = topology(model)?;
    let (nx, ny) = (-topo.axis.1, topo.axis.0);
    let analytical = match quantity {
        Quantity::Buckling => euler_buckling(topo.e, topo.i, topo.length, topo.support),
        Quantity::StaticTip | Quantity::Modal1 if topo.support != BucklingSupport::Cantilever => {
            return Err(no_ref(format!("no {quantity:?} reference solution for a clamped-clamped beam")));
        }
        Quantity::StaticTip => {
            let force: f64 = model
                .loads
                .iter()
                .filter(|l| l.node == topo.tip)
                .map(|l| l.fx * nx + l.fy * ny)
                .sum();
            if model.loads.iter().any(|l| l.node != topo.tip || l.mz != 0.0) || force == 0.0 {
                return Err(no_ref("static-tip needs a transverse force at the free end only"));
            }
            cantilever_tip_deflection(force, topo.e, topo.i, topo.length)
        }
        Quantity::Modal1 => cantilever_frequencies(topo.e, topo.i, topo.rho, topo.area, topo.length, 1)
            .map_err(|e| no_ref(e.to_string()))?[0],
    };
    let order = match model.analysis {
        AnalysisSpec::Modal { order, .. } => order,
        _ => AnalysisSpec::DEFAULT_MODAL_ORDER,
    };

    counts
        .iter()
        .map(|&k| {
            let m = model.clone().with_subdivisions(k);
            let value = match quantity {
                Quantity::Buckling => {
                    let m = m.with_analysis(AnalysisSpec::Buckling { modes: 1 });
                    let r = solve_buckling(&m).map_err(StudyError::Solve)?;
                    r.critical_load().expect("at least one mode")
                }
                Quantity::StaticTip => {
                    let r = solve_linear_static(&m.with_analysis(AnalysisSpec::LinearStatic)).map_err(StudyError::Solve)?;
                    let d = r.displacement(&topo.tip).expect("tip node");
                    d.ux * nx + d.uy * ny
                }
                Quantity::Modal1 => {
                    let r = solve_modal(&m, 1, order).map_err(StudyError::Solve)?;
                    r.modes[0].omega
                }
            };
            Ok(StudyRow {
                elements: k,
                model_value: value,
                analytical_value: analytical,
                rel_error_percent: ((value - analytical) / analytical).abs() * 100.0,
            })
        })
        .collect()
}

pub fn to_csv(rows: &[StudyRow]) -> String {
    let mut out = String::from("elements,model_value,analytical_value,rel_error_percent\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.15e},{:.15e},{:.15e}",
            r.elements, r.model_value, r.analytical_value, r.rel_error_percent
        );
    }
    out
}
