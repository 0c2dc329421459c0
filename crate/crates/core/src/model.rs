//! Structural data model shared by the parser, elements, assembly, and
//! solvers.
//!
//! All quantities are SI (m, N, Pa, kg/m³, rad). References between
//! entities are by name; [`validate_model`] checks that every reference
//! resolves and that the values are physically sensible.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct Material {
    pub name: String,
    /// Young's modulus `E` (Pa).
    pub youngs_modulus: f64,
    /// Mass density `ρ` (kg/m³).
    pub density: f64,
}

/// Width and thickness of a rectangular cross-section.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectDims {
    pub width: f64,
    pub thickness: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub name: String,
    /// Cross-section area `A` (m²).
    pub area: f64,
    /// Second moment of area `I` about the bending axis (m⁴).
    pub inertia: f64,
    /// Set when the section was built by [`rect_section`].
    pub rect: Option<RectDims>,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("section `{name}`: {dimension} must be positive, got {value}")]
pub struct SectionError {
    pub name: String,
    pub dimension: &'static str,
    pub value: f64,
}

/// Rectangular section of width `w` and thickness `t` bending about the
/// width axis: `A = w·t`, `I = w·t³/12`.
pub fn rect_section(name: impl Into<String>, w: f64, t: f64) -> Result<Section, SectionError> {
    let name = name.into();
    for (dimension, value) in [("w", w), ("t", t)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(SectionError {
                name,
                dimension,
                value,
            });
        }
    }
    Ok(Section {
        name,
        area: w * t,
        inertia: w * t * t * t / 12.0,
        rect: Some(RectDims {
            width: w,
            thickness: t,
        }),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub name: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Beam {
    pub name: String,
    pub node_a: String,
    pub node_b: String,
    pub material: String,
    pub section: String,
    /// Number of equal-length rod elements the beam is split into.
    pub subdivisions: usize,
}

/// Nodal degree of freedom in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dof {
    Ux,
    Uy,
    Rz,
}

impl Dof {
    pub const ALL: [Dof; 3] = [Dof::Ux, Dof::Uy, Dof::Rz];

    /// Offset of this DOF within a node's `(ux, uy, rz)` triple.
    pub fn offset(self) -> usize {
        match self {
            Dof::Ux => 0,
            Dof::Uy => 1,
            Dof::Rz => 2,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Dof::Ux => "ux",
            Dof::Uy => "uy",
            Dof::Rz => "rz",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Dof> {
        match s {
            "ux" => Some(Dof::Ux),
            "uy" => Some(Dof::Uy),
            "rz" => Some(Dof::Rz),
            _ => None,
        }
    }
}

impl fmt::Display for Dof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Subset of `{ux, uy, rz}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct DofSet(u8);

impl DofSet {
    pub const EMPTY: DofSet = DofSet(0);
    pub const ALL: DofSet = DofSet(0b111);

    pub fn of(dofs: &[Dof]) -> Self {
        dofs.iter().fold(Self::EMPTY, |s, &d| s.with(d))
    }

    pub fn with(self, dof: Dof) -> Self {
        DofSet(self.0 | (1 << dof.offset()))
    }

    pub fn contains(self, dof: Dof) -> bool {
        self.0 & (1 << dof.offset()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: DofSet) -> Self {
        DofSet(self.0 | other.0)
    }

    /// Members in `ux, uy, rz` order.
    pub fn iter(self) -> impl Iterator<Item = Dof> {
        Dof::ALL.into_iter().filter(move |&d| self.contains(d))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub node: String,
    pub fixed: DofSet,
}

/// Concentrated nodal load.
#[derive(Clone, Debug, PartialEq)]
pub struct Load {
    pub node: String,
    pub fx: f64,
    pub fy: f64,
    pub mz: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonlinearSettings {
    pub steps: usize,
    /// Relative residual tolerance.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NonlinearSettings {
    fn default() -> Self {
        Self {
            steps: 20,
            tol: 1e-10,
            max_iter: 50,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnalysisSpec {
    LinearStatic,
    Buckling { modes: usize },
    Modal { modes: usize, order: usize },
    NonlinearStatic(NonlinearSettings),
}

impl AnalysisSpec {
    pub const DEFAULT_BUCKLING_MODES: usize = 1;
    pub const DEFAULT_MODAL_MODES: usize = 3;
    pub const DEFAULT_MODAL_ORDER: usize = 1;

    pub fn buckling() -> Self {
        AnalysisSpec::Buckling {
            modes: Self::DEFAULT_BUCKLING_MODES,
        }
    }

    pub fn modal() -> Self {
        AnalysisSpec::Modal {
            modes: Self::DEFAULT_MODAL_MODES,
            order: Self::DEFAULT_MODAL_ORDER,
        }
    }

    pub fn nonlinear() -> Self {
        AnalysisSpec::NonlinearStatic(NonlinearSettings::default())
    }

    pub fn kind(&self) -> AnalysisKind {
        match self {
            AnalysisSpec::LinearStatic => AnalysisKind::LinearStatic,
            AnalysisSpec::Buckling { .. } => AnalysisKind::Buckling,
            AnalysisSpec::Modal { .. } => AnalysisKind::Modal,
            AnalysisSpec::NonlinearStatic(_) => AnalysisKind::NonlinearStatic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AnalysisKind {
    LinearStatic,
    Buckling,
    Modal,
    NonlinearStatic,
}

impl AnalysisKind {
    pub fn keyword(self) -> &'static str {
        match self {
            AnalysisKind::LinearStatic => "static",
            AnalysisKind::Buckling => "buckling",
            AnalysisKind::Modal => "modal",
            AnalysisKind::NonlinearStatic => "nonlinear",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "static" => Some(AnalysisKind::LinearStatic),
            "buckling" => Some(AnalysisKind::Buckling),
            "modal" => Some(AnalysisKind::Modal),
            "nonlinear" => Some(AnalysisKind::NonlinearStatic),
            _ => None,
        }
    }

    /// Default settings for this kind.
    pub fn default_spec(self) -> AnalysisSpec {
        match self {
            AnalysisKind::LinearStatic => AnalysisSpec::LinearStatic,
            AnalysisKind::Buckling => AnalysisSpec::buckling(),
            AnalysisKind::Modal => AnalysisSpec::modal(),
            AnalysisKind::NonlinearStatic => AnalysisSpec::nonlinear(),
        }
    }
}

impl fmt::Display for AnalysisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub materials: Vec<Material>,
    pub sections: Vec<Section>,
    pub nodes: Vec<Node>,
    pub beams: Vec<Beam>,
    pub constraints: Vec<Constraint>,
    pub loads: Vec<Load>,
    pub analysis: AnalysisSpec,
}

impl Model {
    pub fn new(analysis: AnalysisSpec) -> Self {
        Self {
            materials: Vec::new(),
            sections: Vec::new(),
            nodes: Vec::new(),
            beams: Vec::new(),
            constraints: Vec::new(),
            loads: Vec::new(),
            analysis,
        }
    }

    pub fn material(&self, name: &str) -> Option<&Material> {
        self.materials.iter().find(|m| m.name == name)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn node(&self, name: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    /// Chord length of a beam, if both its nodes resolve.
    pub fn beam_length(&self, beam: &Beam) -> Option<f64> {
        let a = self.node(&beam.node_a)?;
        let b = self.node(&beam.node_b)?;
        Some((b.x - a.x).hypot(b.y - a.y))
    }

    /// Same model with every beam split into `n` elements.
    pub fn with_subdivisions(mut self, n: usize) -> Self {
        for b in &mut self.beams {
            b.subdivisions = n;
        }
        self
    }

    pub fn with_analysis(mut self, analysis: AnalysisSpec) -> Self {
        self.analysis = analysis;
        self
    }
}

/// Kind of model entity a diagnostic points at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EntityKind {
    Material,
    Section,
    Node,
    Beam,
    Constraint,
    Load,
    Analysis,
    Model,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityKind::Material => "material",
            EntityKind::Section => "section",
            EntityKind::Node => "node",
            EntityKind::Beam => "beam",
            EntityKind::Constraint => "fix",
            EntityKind::Load => "force",
            EntityKind::Analysis => "analysis",
            EntityKind::Model => "model",
        })
    }
}

/// Position of the offending entity: its kind and index in the
/// corresponding `Model` collection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Location {
    pub entity: EntityKind,
    pub index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    DanglingReference,
    DuplicateName,
    ZeroLengthBeam,
    InvalidValue,
    EmptyConstraint,
    Unconstrained,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelDiagnostic {
    pub kind: DiagnosticKind,
    pub location: Location,
    pub message: String,
}

impl fmt::Display for ModelDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} #{}: {}",
            self.location.entity,
            self.location.index + 1,
            self.message
        )
    }
}

struct Diagnostics(Vec<ModelDiagnostic>);

impl Diagnostics {
    fn push(&mut self, kind: DiagnosticKind, entity: EntityKind, index: usize, message: String) {
        self.0.push(ModelDiagnostic {
            kind,
            location: Location { entity, index },
            message,
        });
    }

    fn positive(&mut self, entity: EntityKind, index: usize, owner: &str, field: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.push(
                DiagnosticKind::InvalidValue,
                entity,
                index,
                format!("{field} of `{owner}` must be positive, got {v}"),
            );
        }
    }

    fn finite(&mut self, entity: EntityKind, index: usize, owner: &str, field: &str, v: f64) {
        if !v.is_finite() {
            self.push(
                DiagnosticKind::InvalidValue,
                entity,
                index,
                format!("{field} of `{owner}` must be finite, got {v}"),
            );
        }
    }

    fn duplicates<'a>(&mut self, entity: EntityKind, names: impl Iterator<Item = &'a str>) {
        let mut seen = HashSet::new();
        for (i, name) in names.enumerate() {
            if !seen.insert(name) {
                self.push(
                    DiagnosticKind::DuplicateName,
                    entity,
                    i,
                    format!("duplicate {entity} name `{name}`"),
                );
            }
        }
    }

    fn reference(&mut self, entity: EntityKind, index: usize, target: EntityKind, name: &str, ok: bool) {
        if !ok {
            self.push(
                DiagnosticKind::DanglingReference,
                entity,
                index,
                format!("undefined {target} `{name}`"),
            );
        }
    }
}

/// Every validation problem of `model`, in a deterministic order.
/// An empty list means the model is valid.
pub fn validate_model(model: &Model) -> Vec<ModelDiagnostic> {
    use EntityKind as E;
    let mut d = Diagnostics(Vec::new());

    d.duplicates(E::Material, model.materials.iter().map(|m| m.name.as_str()));
    d.duplicates(E::Section, model.sections.iter().map(|s| s.name.as_str()));
    d.duplicates(E::Node, model.nodes.iter().map(|n| n.name.as_str()));
    d.duplicates(E::Beam, model.beams.iter().map(|b| b.name.as_str()));

    for (i, m) in model.materials.iter().enumerate() {
        d.positive(E::Material, i, &m.name, "E", m.youngs_modulus);
        d.positive(E::Material, i, &m.name, "rho", m.density);
    }
    for (i, s) in model.sections.iter().enumerate() {
        d.positive(E::Section, i, &s.name, "A", s.area);
        d.positive(E::Section, i, &s.name, "I", s.inertia);
        if let Some(r) = s.rect {
            d.positive(E::Section, i, &s.name, "w", r.width);
            d.positive(E::Section, i, &s.name, "t", r.thickness);
            let consistent = s.area == r.width * r.thickness
                && s.inertia == r.width * r.thickness * r.thickness * r.thickness / 12.0;
            if !consistent {
                d.push(
                    DiagnosticKind::InvalidValue,
                    E::Section,
                    i,
                    format!("A and I of `{}` do not match its rectangle", s.name),
                );
            }
        }
    }
    for (i, n) in model.nodes.iter().enumerate() {
        d.finite(E::Node, i, &n.name, "x", n.x);
        d.finite(E::Node, i, &n.name, "y", n.y);
    }
    for (i, b) in model.beams.iter().enumerate() {
        d.reference(E::Beam, i, E::Node, &b.node_a, model.node(&b.node_a).is_some());
        d.reference(E::Beam, i, E::Node, &b.node_b, model.node(&b.node_b).is_some());
        d.reference(E::Beam, i, E::Material, &b.material, model.material(&b.material).is_some());
        d.reference(E::Beam, i, E::Section, &b.section, model.section(&b.section).is_some());
        if b.node_a == b.node_b {
            d.push(
                DiagnosticKind::ZeroLengthBeam,
                E::Beam,
                i,
                format!("beam `{}` connects node `{}` to itself (zero length)", b.name, b.node_a),
            );
        } else if model.beam_length(b) == Some(0.0) {
            d.push(
                DiagnosticKind::ZeroLengthBeam,
                E::Beam,
                i,
                format!(
                    "beam `{}` has zero length: nodes `{}` and `{}` coincide",
                    b.name, b.node_a, b.node_b
                ),
            );
        }
        if b.subdivisions < 1 {
            d.push(
                DiagnosticKind::InvalidValue,
                E::Beam,
                i,
                format!("beam `{}` needs at least one subdivision", b.name),
            );
        }
    }
    for (i, c) in model.constraints.iter().enumerate() {
        d.reference(E::Constraint, i, E::Node, &c.node, model.node(&c.node).is_some());
        if c.fixed.is_empty() {
            d.push(
                DiagnosticKind::EmptyConstraint,
                E::Constraint,
                i,
                format!("constraint on `{}` fixes no degree of freedom", c.node),
            );
        }
    }
    for (i, l) in model.loads.iter().enumerate() {
        d.reference(E::Load, i, E::Node, &l.node, model.node(&l.node).is_some());
        d.finite(E::Load, i, &l.node, "fx", l.fx);
        d.finite(E::Load, i, &l.node, "fy", l.fy);
        d.finite(E::Load, i, &l.node, "mz", l.mz);
    }

    match model.analysis {
        AnalysisSpec::LinearStatic => {}
        AnalysisSpec::Buckling { modes } => {
            if modes < 1 {
                d.push(DiagnosticKind::InvalidValue, E::Analysis, 0, "buckling mode count must be at least 1".into());
            }
        }
        AnalysisSpec::Modal { modes, .. } => {
            if modes < 1 {
                d.push(DiagnosticKind::InvalidValue, E::Analysis, 0, "modal mode count must be at least 1".into());
            }
        }
        AnalysisSpec::NonlinearStatic(s) => {
            if s.steps < 1 {
                d.push(DiagnosticKind::InvalidValue, E::Analysis, 0, "nonlinear step count must be at least 1".into());
            }
            if !(s.tol > 0.0 && s.tol.is_finite()) {
                d.push(DiagnosticKind::InvalidValue, E::Analysis, 0, format!("tolerance must be positive, got {}", s.tol));
            }
            if s.max_iter < 1 {
                d.push(DiagnosticKind::InvalidValue, E::Analysis, 0, "maxiter must be at least 1".into());
            }
        }
    }

    let needs_support = !matches!(model.analysis, AnalysisSpec::NonlinearStatic(_));
    if needs_support && model.constraints.is_empty() {
        d.push(
            DiagnosticKind::Unconstrained,
            E::Model,
            0,
            format!("{} analysis needs at least one constraint", model.analysis.kind()),
        );
    }

    d.0
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn cantilever() -> Model {
        let mut m = Model::new(AnalysisSpec::LinearStatic);
        m.materials.push(Material {
            name: "si".into(),
            youngs_modulus: 1.69e11,
            density: 2330.0,
        });
        m.sections.push(rect_section("s1", 2e-5, 2e-6).unwrap());
        m.nodes.push(Node { name: "n1".into(), x: 0.0, y: 0.0 });
        m.nodes.push(Node { name: "n2".into(), x: 5e-4, y: 0.0 });
        m.constraints.push(Constraint { node: "n1".into(), fixed: DofSet::ALL });
        m.beams.push(Beam {
            name: "b1".into(),
            node_a: "n1".into(),
            node_b: "n2".into(),
            material: "si".into(),
            section: "s1".into(),
            subdivisions: 8,
        });
        m.loads.push(Load { node: "n2".into(), fx: 0.0, fy: 7.3e-4, mz: 0.0 });
        m
    }

    #[test]
    fn unit_square_section() {
        let s = rect_section("sq", 1.0, 1.0).unwrap();
        assert_eq!(s.area, 1.0);
        assert_eq!(s.inertia, 1.0 / 12.0);
    }

    #[test]
    fn microbeam_section() {
        let s = rect_section("s1", 2e-5, 2e-6).unwrap();
        assert!((s.area - 4e-11).abs() < 1e-24);
        assert!((s.inertia - 1.3333333333333333e-23).abs() < 1e-36);
    }

    #[test]
    fn degenerate_section_is_rejected() {
        let err = rect_section("bad", 1.0, 0.0).unwrap_err();
        assert_eq!(err.dimension, "t");
    }

    #[test]
    fn minimal_cantilever_is_valid() {
        assert!(validate_model(&cantilever()).is_empty());
    }

    #[test]
    fn undefined_material_is_named() {
        let mut m = cantilever();
        m.beams[0].material = "sx".into();
        let diags = validate_model(&m);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::DanglingReference);
        assert!(diags[0].message.contains("sx"));
    }

    #[test]
    fn self_connected_beam_is_zero_length() {
        let mut m = cantilever();
        m.beams[0].node_b = "n1".into();
        let diags = validate_model(&m);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::ZeroLengthBeam);
    }

    #[test]
    fn coincident_nodes_are_zero_length() {
        let mut m = cantilever();
        m.nodes[1].x = 0.0;
        let diags = validate_model(&m);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::ZeroLengthBeam);
    }

    #[test]
    fn reports_every_problem() {
        let mut m = cantilever();
        m.constraints.clear();
        m.materials[0].density = -1.0;
        m.beams[0].subdivisions = 0;
        m.nodes.push(Node { name: "n1".into(), x: 1.0, y: 1.0 });
        let kinds: Vec<_> = validate_model(&m).into_iter().map(|d| d.kind).collect();
        assert!(kinds.contains(&DiagnosticKind::Unconstrained));
        assert!(kinds.contains(&DiagnosticKind::DuplicateName));
        assert_eq!(kinds.iter().filter(|&&k| k == DiagnosticKind::InvalidValue).count(), 2);
    }

    #[test]
    fn nonlinear_analysis_may_be_unconstrained() {
        let mut m = cantilever().with_analysis(AnalysisSpec::nonlinear());
        m.constraints.clear();
        assert!(validate_model(&m).is_empty());
    }

    proptest! {
        #[test]
        fn rect_inertia_ratio(w in 1e-7f64..1.0, t in 1e-7f64..1.0) {
            let s = rect_section("r", w, t).unwrap();
            let ratio = s.inertia / s.area;
            prop_assert!((ratio - t * t / 12.0).abs() <= 1e-15 * ratio);
        }

        #[test]
        fn validation_is_pure(drop_fix in any::<bool>(), e in -1.0f64..1e12, n in 0usize..4) {
            let mut m = cantilever();
            if drop_fix { m.constraints.clear(); }
            m.materials[0].youngs_modulus = e;
            m.beams[0].subdivisions = n;
            prop_assert_eq!(validate_model(&m), validate_model(&m));
        }
    }
}
