//! Frequency power-series shape functions of a rod element.
//!
//! The transverse field is expanded as `u_y = Σ ω^r a_ry(s)·q` and the
//! axial field as `u_x = Σ ω^r a_rx(s)·q`. Substituting into the beam and
//! bar equations and matching powers of `ω` gives
//!
//! ```text
//! c⁴ · a_ry''''(s) =  a_(r-2)y(s)      c⁴   = EI / (ρA)
//! c_a² · a_rx''(s) = -a_(r-2)x(s)      c_a² = E / ρ
//! ```
//!
//! The zeroth terms are the static interpolants (cubic Hermite, linear).
//! Every correction `r ≥ 2` carries zero nodal data, so the nodal DOFs keep
//! their meaning at every frequency. Odd terms have homogeneous data and
//! vanish identically.

use crate::numerics::Polynomial;

use super::SectionProps;

/// Shape function tables for series indices `r = 0, 2, …, 2m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesShapeFunctions {
    length: f64,
    bending_wave: f64,
    axial_wave: f64,
    /// `transverse[k]` holds `a_(2k)y` for the DOFs `(v1, θ1, v2, θ2)`.
    transverse: Vec<[Polynomial; 4]>,
    /// `axial[k]` holds `a_(2k)x` for the DOFs `(u1, u2)`.
    axial: Vec<[Polynomial; 2]>,
}

/// Cubic Hermite interpolants on `[0, L]` for `(v1, θ1, v2, θ2)`.
pub fn hermite_cubics(len: f64) -> [Polynomial; 4] {
    let l2 = len * len;
    let l3 = l2 * len;
    [
        Polynomial::new(vec![1.0, 0.0, -3.0 / l2, 2.0 / l3]),
        Polynomial::new(vec![0.0, 1.0, -2.0 / len, 1.0 / l2]),
        Polynomial::new(vec![0.0, 0.0, 3.0 / l2, -2.0 / l3]),
        Polynomial::new(vec![0.0, 0.0, -1.0 / len, 1.0 / l2]),
    ]
}

/// Linear interpolants on `[0, L]` for `(u1, u2)`.
pub fn linear_interpolants(len: f64) -> [Polynomial; 2] {
    [
        Polynomial::new(vec![1.0, -1.0 / len]),
        Polynomial::new(vec![0.0, 1.0 / len]),
    ]
}

/// Next transverse term: four antiderivatives of `prev / c⁴` plus the cubic
/// that zeroes value and slope at `s = L`. Value and slope at `s = 0` are
/// already zero because the antiderivatives start at `s⁴`.
fn transverse_correction(prev: &Polynomial, bending_wave: f64, len: f64) -> Polynomial {
    let p = (0..4).fold(prev.scale(1.0 / bending_wave), |acc, _| acc.antidifferentiate());
    let (pv, ps) = (p.eval(len), p.differentiate().eval(len));
    // c2 L² + c3 L³ = -pv,  2 c2 L + 3 c3 L² = -ps
    let l2 = len * len;
    let c3 = (2.0 * pv - ps * len) / (l2 * len);
    let c2 = (-pv - c3 * l2 * len) / l2;
    &p + &Polynomial::new(vec![0.0, 0.0, c2, c3])
}

/// Next axial term: two antiderivatives of `-prev / c_a²` plus the linear
/// function that zeroes the value at `s = L`.
fn axial_correction(prev: &Polynomial, axial_wave: f64, len: f64) -> Polynomial {
    let p = prev
        .scale(-1.0 / axial_wave)
        .antidifferentiate()
        .antidifferentiate();
    let c1 = -p.eval(len) / len;
    &p + &Polynomial::new(vec![0.0, c1])
}

/// Builds the tables for `r = 0, 2, …, 2·order` on an element of length `len`.
pub fn build_series_shape_functions(
    props: &SectionProps,
    len: f64,
    order: usize,
) -> SeriesShapeFunctions {
    assert!(len > 0.0, "element length must be positive");
    let bending_wave = props.bending_wave();
    let axial_wave = props.axial_wave();

    let mut transverse = vec![hermite_cubics(len)];
    let mut axial = vec![linear_interpolants(len)];
    for k in 1..=order {
        let next_t = transverse[k - 1]
            .each_ref()
            .map(|p| transverse_correction(p, bending_wave, len));
        let next_a = axial[k - 1]
            .each_ref()
            .map(|p| axial_correction(p, axial_wave, len));
        transverse.push(next_t);
        axial.push(next_a);
    }

    SeriesShapeFunctions {
        length: len,
        bending_wave,
        axial_wave,
        transverse,
        axial,
    }
}

impl SeriesShapeFunctions {
    /// Truncation order `m`; the highest series index is `2m`.
    pub fn order(&self) -> usize {
        self.transverse.len() - 1
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// `c⁴ = EI / (ρA)`
    pub fn bending_wave(&self) -> f64 {
        self.bending_wave
    }

    /// `c_a² = E / ρ`
    pub fn axial_wave(&self) -> f64 {
        self.axial_wave
    }

    /// `a_ry` for `(v1, θ1, v2, θ2)`. Odd and out-of-range indices are zero.
    pub fn transverse(&self, r: usize) -> [Polynomial; 4] {
        if r % 2 == 1 {
            return Default::default();
        }
        self.transverse.get(r / 2).cloned().unwrap_or_default()
    }

    /// `a_rx` for `(u1, u2)`. Odd and out-of-range indices are zero.
    pub fn axial(&self, r: usize) -> [Polynomial; 2] {
        if r % 2 == 1 {
            return Default::default();
        }
        self.axial.get(r / 2).cloned().unwrap_or_default()
    }

    /// `a_(2k)` placed on the six element DOFs `(u1, v1, θ1, u2, v2, θ2)`:
    /// returns `(axial row, transverse row)`, each with zero entries where
    /// the DOF does not drive that field.
    pub fn dof_rows(&self, k: usize) -> ([Polynomial; 6], [Polynomial; 6]) {
        let t = &self.transverse[k];
        let a = &self.axial[k];
        let z = Polynomial::zero;
        (
            [a[0].clone(), z(), z(), a[1].clone(), z(), z()],
            [z(), t[0].clone(), t[1].clone(), z(), t[2].clone(), t[3].clone()],
        )
    }

    pub(crate) fn terms(&self) -> usize {
        self.transverse.len()
    }
}
