//! Element matrices: the frequency series of the dynamic stiffness, the
//! closed-form static stiffness and consistent mass, and the consistent
//! geometric stiffness.
//!
//! Local DOF order is `(u1, v1, θ1, u2, v2, θ2)`.

use nalgebra::SMatrix;

use crate::numerics::integrate_product;

use super::series::{hermite_cubics, SeriesShapeFunctions};
use super::SectionProps;

pub type Matrix6 = SMatrix<f64, 6, 6>;
pub type Vector6 = SMatrix<f64, 6, 1>;

/// Dynamic stiffness `K(ω) ≈ Σ_k ω^(2k) C_k` truncated at `ω^(2m)`.
///
/// `C_0 = K0` is the static stiffness and `C_1 = −M0` the negated consistent
/// mass; `C_k` for `k ≥ 2` are the higher-order corrections.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementMatrixSeries {
    order: usize,
    coefficients: Vec<Matrix6>,
    max_asymmetry: f64,
}

impl ElementMatrixSeries {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn k0(&self) -> &Matrix6 {
        &self.coefficients[0]
    }

    pub fn m0(&self) -> Matrix6 {
        -self.coefficients[1]
    }

    /// Coefficient of `ω^(2k)`.
    pub fn coefficient(&self, k: usize) -> &Matrix6 {
        &self.coefficients[k]
    }

    /// Coefficients of `ω^4, ω^6, …, ω^(2m)`.
    pub fn higher(&self) -> &[Matrix6] {
        if self.coefficients.len() > 2 {
            &self.coefficients[2..]
        } else {
            &[]
        }
    }

    /// Largest relative asymmetry removed when symmetrizing the series.
    pub fn max_asymmetry(&self) -> f64 {
        self.max_asymmetry
    }

    /// Truncated dynamic stiffness at circular frequency `omega`.
    pub fn dynamic_stiffness(&self, omega: f64) -> Matrix6 {
        let w2 = omega * omega;
        let mut acc = Matrix6::zeros();
        let mut p = 1.0;
        for c in self.coefficients.iter().take(self.order.max(1) + 1) {
            acc += c * p;
            p *= w2;
        }
        acc
    }
}

fn outer_integral(rows_a: &[crate::numerics::Polynomial; 6], rows_b: &[crate::numerics::Polynomial; 6], len: f64) -> Matrix6 {
    Matrix6::from_fn(|i, j| {
        if rows_a[i].is_zero() || rows_b[j].is_zero() {
            0.0
        } else {
            integrate_product(&rows_a[i], &rows_b[j], 0.0, len)
        }
    })
}

/// Galerkin projection of the bar and beam energies on the series shape
/// functions:
///
/// ```text
/// K(ω) = ∫ EI a_y'' a_y''ᵀ + EA a_x' a_x'ᵀ ds − ω² ∫ ρA (a_y a_yᵀ + a_x a_xᵀ) ds
/// ```
///
/// with `a = Σ ω^(2i) a_(2i)`, expanded and truncated at `ω^(2m)`. The
/// coefficient list always reaches `ω²` so that `M0` is available at `m = 0`.
pub fn element_matrix_series(shapes: &SeriesShapeFunctions, props: &SectionProps) -> ElementMatrixSeries {
    let len = shapes.length();
    let order = shapes.order();
    let n_coeff = order.max(1) + 1;
    let terms = shapes.terms();

    let rows: Vec<_> = (0..terms).map(|k| shapes.dof_rows(k)).collect();
    let d1 = |r: &[crate::numerics::Polynomial; 6]| r.each_ref().map(|p| p.differentiate());
    let d2 = |r: &[crate::numerics::Polynomial; 6]| r.each_ref().map(|p| p.derivative(2));
    let axial_slope: Vec<_> = rows.iter().map(|(a, _)| d1(a)).collect();
    let curvature: Vec<_> = rows.iter().map(|(_, t)| d2(t)).collect();

    let ea = props.ea();
    let ei = props.ei();
    let rho_a = props.rho_a();

    let stiffness = |i: usize, j: usize| {
        outer_integral(&curvature[i], &curvature[j], len) * ei
            + outer_integral(&axial_slope[i], &axial_slope[j], len) * ea
    };
    let inertia = |i: usize, j: usize| {
        (outer_integral(&rows[i].1, &rows[j].1, len) + outer_integral(&rows[i].0, &rows[j].0, len))
            * rho_a
    };

    let mut coefficients = Vec::with_capacity(n_coeff);
    let mut max_asymmetry = 0.0f64;
    for k in 0..n_coeff {
        let mut c = Matrix6::zeros();
        for i in 0..=k {
            let j = k - i;
            if i < terms && j < terms {
                c += stiffness(i, j);
            }
        }
        if k >= 1 {
            for i in 0..k {
                let j = k - 1 - i;
                if i < terms && j < terms {
                    c -= inertia(i, j);
                }
            }
        }
        let scale = c.amax();
        if scale > 0.0 {
            max_asymmetry = max_asymmetry.max((c - c.transpose()).amax() / scale);
        }
        coefficients.push((c + c.transpose()) * 0.5);
    }

    ElementMatrixSeries {
        order,
        coefficients,
        max_asymmetry,
    }
}

/// Closed-form Euler–Bernoulli frame stiffness in local coordinates.
pub fn classical_stiffness(props: &SectionProps, len: f64) -> Matrix6 {
    let a = props.ea() / len;
    let ei = props.ei();
    let b = 12.0 * ei / len.powi(3);
    let c = 6.0 * ei / len.powi(2);
    let d = 4.0 * ei / len;
    let e = 2.0 * ei / len;
    Matrix6::from_row_slice(&[
        a, 0.0, 0.0, -a, 0.0, 0.0, //
        0.0, b, c, 0.0, -b, c, //
        0.0, c, d, 0.0, -c, e, //
        -a, 0.0, 0.0, a, 0.0, 0.0, //
        0.0, -b, -c, 0.0, b, -c, //
        0.0, c, e, 0.0, -c, d,
    ])
}

/// Closed-form consistent mass in local coordinates.
pub fn classical_consistent_mass(props: &SectionProps, len: f64) -> Matrix6 {
    let m = props.rho_a() * len;
    let l = len;
    let l2 = l * l;
    #[rustfmt::skip]
    let entries = [
        140.0, 0.0,        0.0,       70.0,  0.0,        0.0,
        0.0,   156.0,      22.0 * l,  0.0,   54.0,       -13.0 * l,
        0.0,   22.0 * l,   4.0 * l2,  0.0,   13.0 * l,   -3.0 * l2,
        70.0,  0.0,        0.0,       140.0, 0.0,        0.0,
        0.0,   54.0,       13.0 * l,  0.0,   156.0,      -22.0 * l,
        0.0,   -13.0 * l,  -3.0 * l2, 0.0,   -22.0 * l,  4.0 * l2,
    ];
    Matrix6::from_row_slice(&entries) * (m / 420.0)
}

/// Geometric stiffness for a given axial force (tension positive).
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricStiffness {
    pub axial_force: f64,
    pub matrix: Matrix6,
}

/// Consistent geometric stiffness `N·∫ a_0y' a_0y'ᵀ ds` from the cubic
/// transverse interpolants.
pub fn geometric_stiffness(axial_force: f64, len: f64) -> GeometricStiffness {
    let n = axial_force;
    let l = len;
    let a = 6.0 * n / (5.0 * l);
    let b = n / 10.0;
    let c = 2.0 * n * l / 15.0;
    let d = -n * l / 30.0;
    let matrix = Matrix6::from_row_slice(&[
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, //
        0.0, a, b, 0.0, -a, b, //
        0.0, b, c, 0.0, -b, d, //
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, //
        0.0, -a, -b, 0.0, a, -b, //
        0.0, b, d, 0.0, -b, c,
    ]);
    GeometricStiffness {
        axial_force,
        matrix,
    }
}

/// `N·∫ a_0y' a_0y'ᵀ ds` evaluated by polynomial integration; the
/// reference for [`geometric_stiffness`].
pub fn geometric_stiffness_by_integration(axial_force: f64, len: f64) -> Matrix6 {
    let slopes = hermite_cubics(len).map(|p| p.differentiate());
    let dofs = [1usize, 2, 4, 5];
    let mut m = Matrix6::zeros();
    for (a, &i) in dofs.iter().enumerate() {
        for (b, &j) in dofs.iter().enumerate() {
            m[(i, j)] = axial_force * integrate_product(&slopes[a], &slopes[b], 0.0, len);
        }
    }
    m
}

/// `T` mapping global element DOFs to local ones for a chord at `angle`.
pub fn rotation(angle: f64) -> Matrix6 {
    let (s, c) = angle.sin_cos();
    rotation_from_direction([c, s])
}

/// [`rotation`] from the unit chord `(cos β, sin β)`.
pub fn rotation_from_direction([c, s]: [f64; 2]) -> Matrix6 {
    let mut t = Matrix6::zeros();
    for b in [0, 3] {
        t[(b, b)] = c;
        t[(b, b + 1)] = s;
        t[(b + 1, b)] = -s;
        t[(b + 1, b + 1)] = c;
        t[(b + 2, b + 2)] = 1.0;
    }
    t
}

/// `Tᵀ · K · T`, symmetrized.
pub fn to_global(local: &Matrix6, angle: f64) -> Matrix6 {
    let (s, c) = angle.sin_cos();
    to_global_direction(local, [c, s])
}

/// [`to_global`] from the unit chord `(cos β, sin β)`.
pub fn to_global_direction(local: &Matrix6, direction: [f64; 2]) -> Matrix6 {
    let t = rotation_from_direction(direction);
    let g = t.transpose() * local * t;
    (g + g.transpose()) * 0.5
}
