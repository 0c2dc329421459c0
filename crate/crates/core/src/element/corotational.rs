//! Corotational kinematics of a planar rod element.
//!
//! The element's motion is split into a rigid motion of its chord and
//! small deformations measured in the chord frame: the elongation
//! `ū = Ln − L0` and the end rotations `θ̄i = φi − (β − β0)` relative to the
//! chord. The director `d3` is the unit chord and `d1` its in-plane normal.

use std::f64::consts::PI;

use super::matrices::{Matrix6, Vector6};
use super::{ElementError, SectionProps};

/// Wraps an angle to `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Current end positions and nodal rotations of an element:
/// `(x1, y1, φ1, x2, y2, φ2)`, where `φi` is the rotation of node `i` away
/// from its reference orientation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndpointDofs(pub [f64; 6]);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorotationalState {
    pub endpoints: EndpointDofs,
    /// Undeformed length `L0`.
    pub reference_length: f64,
    /// Undeformed chord angle `β0`.
    pub reference_angle: f64,
    /// Current chord length `Ln`.
    pub length: f64,
    /// Current chord angle `β`.
    pub angle: f64,
    /// Elongation `ū`.
    pub elongation: f64,
    /// End rotations `(θ̄1, θ̄2)` relative to the chord.
    pub end_rotations: [f64; 2],
}

impl CorotationalState {
    /// Unit chord `d3`.
    pub fn d3(&self) -> [f64; 2] {
        let (s, c) = self.angle.sin_cos();
        [c, s]
    }

    /// In-plane normal `d1`.
    pub fn d1(&self) -> [f64; 2] {
        let (s, c) = self.angle.sin_cos();
        [-s, c]
    }

    /// `(ū, θ̄1, θ̄2)`
    pub fn local_deformations(&self) -> [f64; 3] {
        [self.elongation, self.end_rotations[0], self.end_rotations[1]]
    }

    /// `r = ∂Ln/∂q` and `z = Ln·∂β/∂q`.
    fn chord_variations(&self) -> (Vector6, Vector6) {
        let (s, c) = self.angle.sin_cos();
        (
            Vector6::from_row_slice(&[-c, -s, 0.0, c, s, 0.0]),
            Vector6::from_row_slice(&[s, -c, 0.0, -s, c, 0.0]),
        )
    }

    /// Rows are the variations of `(ū, θ̄1, θ̄2)` with respect to the six
    /// global DOFs.
    pub fn b_matrix(&self) -> nalgebra::SMatrix<f64, 3, 6> {
        let (r, z) = self.chord_variations();
        let mut b = nalgebra::SMatrix::<f64, 3, 6>::zeros();
        b.set_row(0, &r.transpose());
        let zl = z / self.length;
        b.set_row(1, &(-zl).transpose());
        b.set_row(2, &(-zl).transpose());
        b[(1, 2)] += 1.0;
        b[(2, 5)] += 1.0;
        b
    }
}

pub fn corotational_frame(
    endpoints: EndpointDofs,
    reference_length: f64,
    reference_angle: f64,
) -> Result<CorotationalState, ElementError> {
    let [x1, y1, phi1, x2, y2, phi2] = endpoints.0;
    let (dx, dy) = (x2 - x1, y2 - y1);
    let length = dx.hypot(dy);
    if length.is_nan() || length <= f64::EPSILON * reference_length {
        return Err(ElementError::SingularConfiguration { length });
    }
    let angle = dy.atan2(dx);
    let chord_rotation = angle - reference_angle;
    Ok(CorotationalState {
        endpoints,
        reference_length,
        reference_angle,
        length,
        angle,
        elongation: length - reference_length,
        end_rotations: [wrap_angle(phi1 - chord_rotation), wrap_angle(phi2 - chord_rotation)],
    })
}

/// Local section forces `(N, M1, M2)` from the linear Euler–Bernoulli law.
pub fn local_forces(state: &CorotationalState, props: &SectionProps) -> [f64; 3] {
    let l0 = state.reference_length;
    let [t1, t2] = state.end_rotations;
    let k = props.ei() / l0;
    [
        props.ea() * state.elongation / l0,
        k * (4.0 * t1 + 2.0 * t2),
        k * (2.0 * t1 + 4.0 * t2),
    ]
}

/// Global internal force vector `Bᵀ·(N, M1, M2)` and the consistent tangent
///
/// ```text
/// Kt = Bᵀ·Kl·B + N/Ln·z·zᵀ + (M1 + M2)/Ln²·(r·zᵀ + z·rᵀ)
/// ```
pub fn internal_forces_and_tangent(state: &CorotationalState, props: &SectionProps) -> (Vector6, Matrix6) {
    let l0 = state.reference_length;
    let ln = state.length;
    let [n, m1, m2] = local_forces(state, props);
    let b = state.b_matrix();
    let force = b.transpose() * nalgebra::Vector3::new(n, m1, m2);

    let ea = props.ea() / l0;
    let ei = props.ei() / l0;
    let kl = nalgebra::Matrix3::new(
        ea, 0.0, 0.0, //
        0.0, 4.0 * ei, 2.0 * ei, //
        0.0, 2.0 * ei, 4.0 * ei,
    );
    let (r, z) = state.chord_variations();
    let material = b.transpose() * kl * b;
    let geometric = z * z.transpose() * (n / ln) + (r * z.transpose() + z * r.transpose()) * ((m1 + m2) / (ln * ln));
    let tangent = material + geometric;
    (force, (tangent + tangent.transpose()) * 0.5)
}
