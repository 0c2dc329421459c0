//! Planar Cosserat rod element solver for slender beam structures such as
//! MEMS cantilevers, microbridges, and rod networks.
//!
//! A [`Model`] is read from a netlist ([`netlist::parse_model`]), split into
//! rod elements ([`assembly::discretize`]), and handed to one of the
//! analyses in [`solvers`]: linear static, linearized buckling, modal
//! analysis on the truncated frequency series, or corotational nonlinear
//! statics. [`oracle`] holds closed-form and independently integrated
//! reference solutions.

pub mod assembly;
pub mod element;
pub mod model;
pub mod netlist;
pub mod numerics;
pub mod oracle;
pub mod solvers;

pub use assembly::{DiscretizedStructure, DofMap, GlobalSystem};
pub use element::{ElementMatrixSeries, SectionProps, SeriesShapeFunctions};
pub use model::{
    rect_section, validate_model, AnalysisKind, AnalysisSpec, Beam, Constraint, Dof, DofSet, Load,
    Material, Model, ModelDiagnostic, Node, NonlinearSettings, Section,
};
pub use netlist::{parse_model, serialize_model, ParseDiagnostic};
pub use numerics::{Polynomial, SymMatrix};
pub use solvers::{
    solve_buckling, solve_linear_static, solve_modal, solve_nonlinear_static, BucklingResult,
    EquilibriumPath, ModalResult, SolveError, StaticResult,
};
