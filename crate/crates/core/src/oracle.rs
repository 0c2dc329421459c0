//! Closed-form and independently integrated reference solutions.
//!
//! Nothing here touches the element or solver code paths; tests and the
//! CLI `study` command compare model results against these values.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("elastica shooting did not converge (tip moment residual {residual:e})")]
    ShootingFailed { residual: f64 },
    #[error("integrator step size underflow at s = {at}")]
    StepUnderflow { at: f64 },
    #[error("oracle input out of range: {0}")]
    OutOfRange(String),
}

/// A reference value together with the inputs and formula that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleCase {
    pub name: &'static str,
    pub inputs: Vec<(&'static str, f64)>,
    pub reference: f64,
    pub formula: &'static str,
}

/// `F·L³ / (3·E·I)`
pub fn cantilever_tip_deflection(force: f64, e: f64, i: f64, len: f64) -> f64 {
    force * len.powi(3) / (3.0 * e * i)
}

/// `F·L / (E·A)`
pub fn cantilever_axial_deflection(force: f64, e: f64, area: f64, len: f64) -> f64 {
    force * len / (e * area)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BucklingSupport {
    /// Clamped at one end, free at the other.
    Cantilever,
    /// Pinned at both ends.
    Pinned,
    /// Clamped at both ends (microbridge).
    ClampedClamped,
}

impl fmt::Display for BucklingSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BucklingSupport::Cantilever => "cantilever",
            BucklingSupport::Pinned => "pinned",
            BucklingSupport::ClampedClamped => "clamped-clamped",
        })
    }
}

/// Euler critical load for the given support.
pub fn euler_buckling(e: f64, i: f64, len: f64, support: BucklingSupport) -> f64 {
    let base = PI * PI * e * i / (len * len);
    match support {
        BucklingSupport::Cantilever => base / 4.0,
        BucklingSupport::Pinned => base,
        BucklingSupport::ClampedClamped => 4.0 * base,
    }
}

pub fn euler_buckling_case(e: f64, i: f64, len: f64, support: BucklingSupport) -> OracleCase {
    OracleCase {
        name: "euler_buckling",
        inputs: vec![("E", e), ("I", i), ("L", len)],
        reference: euler_buckling(e, i, len, support),
        formula: match support {
            BucklingSupport::Cantilever => "pi^2 E I / (4 L^2)",
            BucklingSupport::Pinned => "pi^2 E I / L^2",
            BucklingSupport::ClampedClamped => "4 pi^2 E I / L^2",
        },
    }
}

/// Critical load factor `κ` in `P = κ·EI/L²` of a cantilever modelled with a
/// single cubic element and the consistent geometric stiffness.
///
/// The tip `(v, θ)` block gives `det(K − P·Kg) = 0`, which with `a = κ/30`
/// reduces to `135a² − 156a + 12 = 0`; the smaller root is critical.
pub fn one_element_cantilever_buckling_factor() -> f64 {
    let (qa, qb, qc) = (135.0f64, -156.0f64, 12.0f64);
    let a = (-qb - (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa);
    30.0 * a
}

fn frequency_equation(x: f64) -> f64 {
    x.cos() * x.cosh() + 1.0
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > tol * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The `k`-th root (1-based) of `cos(x)·cosh(x) = −1`.
///
/// Each root lies in `((k − ½)π − ½, (k − ½)π + ½)`, where the function
/// changes sign exactly once.
pub fn cantilever_frequency_root(k: usize) -> f64 {
    assert!(k >= 1, "roots are numbered from 1");
    let centre = (k as f64 - 0.5) * PI;
    bisect(frequency_equation, centre - 0.5, centre + 0.5, 1e-15)
}

/// First `n` (at most 5) natural circular frequencies of a uniform
/// cantilever: `ω_k = (β_k L)²·√(EI / (ρA·L⁴))`.
pub fn cantilever_frequencies(e: f64, i: f64, rho: f64, area: f64, len: f64, n: usize) -> Result<Vec<f64>, OracleError> {
    if n > 5 {
        return Err(OracleError::OutOfRange(format!("at most 5 frequencies, asked for {n}")));
    }
    let scale = (e * i / (rho * area * len.powi(4))).sqrt();
    Ok((1..=n)
        .map(|k| cantilever_frequency_root(k).powi(2) * scale)
        .collect())
}

/// Tip response of an inextensible cantilever under a transverse end load
/// of fixed direction, normalized by the length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElasticaTip {
    /// Transverse deflection `δ_y / L`.
    pub deflection: f64,
    /// Axial shortening `δ_x / L` (positive towards the root).
    pub shortening: f64,
    /// Tip rotation (rad).
    pub rotation: f64,
}

type State = [f64; 4];

/// `θ'' = −α·cos θ`, `x' = cos θ`, `y' = sin θ` in arc length over `[0, 1]`.
fn elastica_rhs(alpha: f64, y: &State) -> State {
    let (s, c) = y[0].sin_cos();
    [y[1], -alpha * c, c, s]
}

/// Dormand–Prince 5(4) with error-per-step control on `[0, 1]`. The system
/// is autonomous, so the stage abscissae are not needed.
fn integrate_elastica(alpha: f64, slope0: f64, tol: f64) -> Result<State, OracleError> {
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let mut y: State = [0.0, slope0, 0.0, 0.0];
    let mut s = 0.0;
    let mut h = 1e-3;
    while 1.0 - s > 1e-15 {
        if s + h > 1.0 {
            h = 1.0 - s;
        }
        let mut k = [[0.0; 4]; 7];
        for stage in 0..7 {
            let mut ys = y;
            for (prev, kp) in k.iter().enumerate().take(stage) {
                for d in 0..4 {
                    ys[d] += h * A[stage][prev] * kp[d];
                }
            }
            k[stage] = elastica_rhs(alpha, &ys);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for d in 0..4 {
            let mut hi = 0.0;
            let mut lo = 0.0;
            for stage in 0..7 {
                hi += B5[stage] * k[stage][d];
                lo += B4[stage] * k[stage][d];
            }
            y5[d] += h * hi;
            let scale = tol * (1.0 + y[d].abs().max(y5[d].abs()));
            err = err.max((h * (hi - lo)).abs() / scale);
        }
        if err <= 1.0 {
            s += h;
            y = y5;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 {
            return Err(OracleError::StepUnderflow { at: s });
        }
    }
    Ok(y)
}

/// Large-deflection tip response for load parameter `α = F·L²/(EI)`.
///
/// Shooting on the root curvature `θ'(0) ∈ [0, α]`: the free-end condition
/// `θ'(1) = 0` is negative at `0` and non-negative at `α`, and is bracketed
/// by bisection until it holds to `1e-10`.
pub fn elastica_tip_response(alpha: f64) -> Result<ElasticaTip, OracleError> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(OracleError::OutOfRange(format!("load parameter must be non-negative, got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(ElasticaTip {
            deflection: 0.0,
            shortening: 0.0,
            rotation: 0.0,
        });
    }
    const TOL: f64 = 1e-12;
    let end_moment = |k0: f64| integrate_elastica(alpha, k0, TOL).map(|y| y[1]);
    let (mut lo, mut hi) = (0.0, alpha);
    let mut g_lo = end_moment(lo)?;
    let mut best = (f64::INFINITY, 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g = end_moment(mid)?;
        if g.abs() < best.0 {
            best = (g.abs(), mid);
        }
        if g.abs() <= 1e-13 * alpha || hi - lo <= 1e-16 * alpha {
            break;
        }
        if g.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
        }
    }
    if best.0 > 1e-10 * alpha.max(1.0) {
        return Err(OracleError::ShootingFailed { residual: best.0 });
    }
    let y = integrate_elastica(alpha, best.1, TOL)?;
    Ok(ElasticaTip {
        deflection: y[3],
        shortening: 1.0 - y[2],
        rotation: y[0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tip_deflection_identities() {
        assert_eq!(cantilever_tip_deflection(3.0, 1.0, 1.0, 1.0), 1.0);
        assert!((cantilever_tip_deflection(1.0, 2.0, 3.0, 2.0) - 8.0 / 18.0).abs() < 1e-15);
        // EI/L³ chosen so that 7.3e-4 produces 2.296
        let ei_over_l3 = 7.3e-4 / (3.0 * 2.296);
        assert!((cantilever_tip_deflection(7.3e-4, ei_over_l3, 1.0, 1.0) - 2.296).abs() < 1e-12);
    }

    #[test]
    fn axial_deflection_identities() {
        assert_eq!(cantilever_axial_deflection(1.0, 1.0, 1.0, 1.0), 1.0);
        assert_eq!(cantilever_axial_deflection(2.0, 4.0, 1.0, 2.0), 1.0);
        let d = cantilever_axial_deflection(7.3e-4, 1.69e11, 4e-11, 5e-4);
        assert!((d - 5.399408284023669e-8).abs() < 1e-20);
    }

    #[test]
    fn euler_constants() {
        assert!((euler_buckling(1.0, 1.0, 1.0, BucklingSupport::Cantilever) - 2.4674011002723395).abs() < 1e-15);
        assert!((euler_buckling(1.0, 1.0, 1.0, BucklingSupport::Pinned) - 9.869604401089358).abs() < 1e-14);
        assert!((euler_buckling(1.0, 1.0, 2.0, BucklingSupport::ClampedClamped) - 9.869604401089358).abs() < 1e-14);
        let case = euler_buckling_case(1.0, 1.0, 1.0, BucklingSupport::Pinned);
        assert_eq!(case.reference, euler_buckling(1.0, 1.0, 1.0, BucklingSupport::Pinned));
    }

    #[test]
    fn one_element_buckling_error_band() {
        let kappa = one_element_cantilever_buckling_factor();
        assert!((kappa - 2.48600).abs() < 5e-5);
        let err = (kappa - PI * PI / 4.0) / (PI * PI / 4.0) * 100.0;
        assert!((err - 0.7522).abs() < 1e-3, "{err}");
    }

    #[test]
    fn frequency_roots() {
        let want = [1.87510407, 4.69409113, 7.85475744];
        for (k, w) in want.iter().enumerate() {
            let x = cantilever_frequency_root(k + 1);
            assert!((x - w).abs() < 1e-8, "root {}: {x}", k + 1);
            assert!(frequency_equation(x).abs() <= 1e-10 * x.cosh().max(1.0));
        }
    }

    #[test]
    fn unit_frequencies_and_scaling() {
        let w = cantilever_frequencies(1.0, 1.0, 1.0, 1.0, 1.0, 2).unwrap();
        assert!((w[0] - 3.51601527).abs() < 1e-7);
        assert!((w[1] - 22.0344916).abs() < 1e-6);
        let w4 = cantilever_frequencies(1.0, 1.0, 1.0, 1.0, 4.0, 2).unwrap();
        assert!((w4[0] * 16.0 - w[0]).abs() < 1e-12);
        assert!(cantilever_frequencies(1.0, 1.0, 1.0, 1.0, 1.0, 6).is_err());
    }

    #[test]
    fn elastica_unloaded() {
        let tip = elastica_tip_response(0.0).unwrap();
        assert_eq!((tip.deflection, tip.shortening, tip.rotation), (0.0, 0.0, 0.0));
    }

    #[test]
    fn elastica_small_load_is_linear() {
        for alpha in [1e-4, 1e-2, 0.05] {
            let tip = elastica_tip_response(alpha).unwrap();
            let lin = alpha / 3.0;
            assert!((tip.deflection - lin).abs() <= 5e-3 * lin, "α={alpha}");
            assert!((tip.rotation - alpha / 2.0).abs() <= 5e-3 * alpha / 2.0);
        }
    }

    #[test]
    fn elastica_is_deterministic() {
        assert_eq!(elastica_tip_response(2.0), elastica_tip_response(2.0));
    }

    #[test]
    fn negative_load_parameter_is_rejected() {
        assert!(elastica_tip_response(-1.0).is_err());
    }
}
