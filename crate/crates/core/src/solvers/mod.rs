//! The four analyses: linear static, linearized buckling, modal analysis on
//! the truncated frequency series, and corotational nonlinear statics.

mod buckling;
mod linear;
mod modal;
mod nonlinear;

pub use buckling::{solve_buckling, BucklingMode, BucklingResult};
pub use linear::{solve_linear_static, Reaction, StaticResult};
pub use modal::{solve_modal, ModalResult, Mode};
pub use nonlinear::{solve_nonlinear_static, EquilibriumPath, PathFailure, PathPoint, PathStatus};

use nalgebra::DVector;
use thiserror::Error;

use crate::assembly::{discretize, number_dofs, AssemblyError, DiscretizedStructure, DofMap};
use crate::element::ElementError;
use crate::model::{validate_model, AnalysisSpec, DiagnosticKind, Model, ModelDiagnostic};
use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid model: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidModel(Vec<ModelDiagnostic>),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("stiffness is singular (mechanism or missing support): free direction at {dof}")]
    RankDeficient { dof: String },
    #[error("reference load puts no element in compression: no buckling under tension")]
    NoCompression,
    #[error("eigen-solve did not converge (scaled residual {residual:e})")]
    EigenNotConverged { residual: f64 },
    #[error("no root of det K(w) for mode {mode} in [{lo:e}, {hi:e}] rad/s; det sign pattern {signs}")]
    RootBracketing {
        mode: usize,
        lo: f64,
        hi: f64,
        signs: String,
    },
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error("numerical failure: {0}")]
    Numerics(NumericsError),
}

/// Displacements of one node.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalDisplacement {
    pub node: String,
    pub ux: f64,
    pub uy: f64,
    pub rz: f64,
}

/// Any analysis result, as dispatched by [`run_analysis`].
#[derive(Clone, Debug, PartialEq)]
pub enum AnalysisResult {
    Static(StaticResult),
    Buckling(BucklingResult),
    Modal(ModalResult),
    Nonlinear(EquilibriumPath),
}

/// Runs the analysis requested by `model.analysis`.
pub fn run_analysis(model: &Model) -> Result<AnalysisResult, SolveError> {
    Ok(match model.analysis {
        AnalysisSpec::LinearStatic => AnalysisResult::Static(solve_linear_static(model)?),
        AnalysisSpec::Buckling { .. } => AnalysisResult::Buckling(solve_buckling(model)?),
        AnalysisSpec::Modal { modes, order } => AnalysisResult::Modal(solve_modal(model, modes, order)?),
        AnalysisSpec::NonlinearStatic(s) => AnalysisResult::Nonlinear(solve_nonlinear_static(model, s)?),
    })
}

pub(crate) struct Prepared {
    pub structure: DiscretizedStructure,
    pub dofmap: DofMap,
}

/// Validates and discretizes `model`. A missing support is left for the
/// numerics to report as a singular stiffness.
pub(crate) fn prepare(model: &Model) -> Result<Prepared, SolveError> {
    let diags: Vec<_> = validate_model(model)
        .into_iter()
        .filter(|d| d.kind != DiagnosticKind::Unconstrained)
        .collect();
    if !diags.is_empty() {
        return Err(SolveError::InvalidModel(diags));
    }
    let structure = discretize(model)?;
    let dofmap = number_dofs(&structure, &model.constraints)?;
    Ok(Prepared { structure, dofmap })
}

impl Prepared {
    /// `node.dof` label of a free equation.
    pub fn dof_label(&self, equation: usize) -> String {
        match self.dofmap.free_dofs().get(equation) {
            Some(&(node, dof)) => format!("{}.{}", self.structure.nodes[node].name, dof),
            None => format!("equation {equation}"),
        }
    }

    pub fn map_numerics(&self, e: NumericsError) -> SolveError {
        match e {
            NumericsError::NonPositivePivot { index, .. } => SolveError::RankDeficient {
                dof: self.dof_label(index),
            },
            NumericsError::EigenNotConverged { residual } => SolveError::EigenNotConverged { residual },
            other => SolveError::Numerics(other),
        }
    }

    /// Per-node displacements from a full `3·nodes` vector.
    pub fn nodal(&self, full: &DVector<f64>) -> Vec<NodalDisplacement> {
        self.structure
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| NodalDisplacement {
                node: n.name.clone(),
                ux: full[3 * i],
                uy: full[3 * i + 1],
                rz: full[3 * i + 2],
            })
            .collect()
    }
}

/// Scales `v` so that its largest absolute entry is `1`, with a positive
/// sign on that entry.
pub(crate) fn normalize_inf(v: &DVector<f64>) -> DVector<f64> {
    let (imax, _) = v
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bi, bv), (i, x)| if x.abs() > bv { (i, x.abs()) } else { (bi, bv) });
    let peak = v[imax];
    if peak == 0.0 {
        v.clone()
    } else {
        v / peak
    }
}
