//! The Cosserat rod element: frequency-series shape functions, element
//! matrices, geometric stiffness, and corotational kinematics.

mod corotational;
mod matrices;
mod series;

pub use corotational::{
    corotational_frame, internal_forces_and_tangent, local_forces, wrap_angle, CorotationalState,
    EndpointDofs,
};
pub use matrices::{
    classical_consistent_mass, classical_stiffness, element_matrix_series, geometric_stiffness,
    geometric_stiffness_by_integration, rotation, rotation_from_direction, to_global,
    to_global_direction, ElementMatrixSeries,
    GeometricStiffness, Matrix6, Vector6,
};
pub use series::{
    build_series_shape_functions, hermite_cubics, linear_interpolants, SeriesShapeFunctions,
};

use thiserror::Error;

use crate::model::{Material, Section};

/// Material and section constants an element needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectionProps {
    pub youngs_modulus: f64,
    pub density: f64,
    pub area: f64,
    pub inertia: f64,
}

impl SectionProps {
    pub fn new(material: &Material, section: &Section) -> Self {
        Self {
            youngs_modulus: material.youngs_modulus,
            density: material.density,
            area: section.area,
            inertia: section.inertia,
        }
    }

    pub fn ea(&self) -> f64 {
        self.youngs_modulus * self.area
    }

    pub fn ei(&self) -> f64 {
        self.youngs_modulus * self.inertia
    }

    pub fn rho_a(&self) -> f64 {
        self.density * self.area
    }

    /// `c⁴ = EI / (ρA)`
    pub fn bending_wave(&self) -> f64 {
        self.ei() / self.rho_a()
    }

    /// `c_a² = E / ρ`
    pub fn axial_wave(&self) -> f64 {
        self.youngs_modulus / self.density
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ElementError {
    #[error("singular element configuration: chord length {length:e}")]
    SingularConfiguration { length: f64 },
}
