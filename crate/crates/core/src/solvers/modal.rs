use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::assembly::{assemble, assemble_dynamic_stiffness, element_series};
use crate::element::ElementMatrixSeries;
use crate::model::Model;
use crate::numerics::{eig_gsym, SymMatrix};

use super::{normalize_inf, prepare, NodalDisplacement, Prepared, SolveError};

/// Relative width to which each series root is bisected.
const ROOT_TOL: f64 = 1e-12;
/// Seeds from the `m = 1` eigenproblem are searched within ±25%.
const SEED_WINDOW: f64 = 0.25;
const SCAN_POINTS: usize = 65;

#[derive(Clone, Debug, PartialEq)]
pub struct Mode {
    /// Natural circular frequency (rad/s).
    pub omega: f64,
    /// Mode shape. Mass-normalized for `m ≤ 1`, unit max-norm otherwise.
    pub shape: Vec<NodalDisplacement>,
}

impl Mode {
    pub fn frequency_hz(&self) -> f64 {
        self.omega / (2.0 * std::f64::consts::PI)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModalResult {
    /// Series truncation order used.
    pub order: usize,
    /// Modes in ascending frequency.
    pub modes: Vec<Mode>,
}

impl ModalResult {
    pub fn omegas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.omega).collect()
    }
}

/// Natural frequencies from the truncated dynamic stiffness.
///
/// For `order ≤ 1` this is the generalized eigenproblem `K·φ = ω²·M·φ`. For
/// higher orders the lowest `modes` roots of `det K(ω) = 0` are bracketed
/// around the `order = 1` frequencies and refined by bisection.
pub fn solve_modal(model: &Model, modes: usize, order: usize) -> Result<ModalResult, SolveError> {
    let prep = prepare(model)?;
    let structure = &prep.structure;
    let series = element_series(structure, order);
    let system = assemble(structure, &prep.dofmap, &series, &model.loads, None)?;
    let pairs = eig_gsym(&system.k, &system.m, modes).map_err(|e| prep.map_numerics(e))?;
    let linear: Vec<Mode> = pairs
        .values
        .iter()
        .enumerate()
        .map(|(i, &lambda)| Mode {
            omega: lambda.max(0.0).sqrt(),
            shape: prep.nodal(&prep.dofmap.expand(&pairs.vector(i))),
        })
        .collect();
    if order <= 1 {
        return Ok(ModalResult { order, modes: linear });
    }

    let scaling = diagonal_scaling(&system.k, &system.m);
    let mut out = Vec::with_capacity(linear.len());
    for (i, seed) in linear.iter().enumerate() {
        if seed.omega <= 1e-8 * linear.last().map_or(1.0, |m| m.omega) {
            // rigid-body modes stay at zero
            out.push(seed.clone());
            continue;
        }
        out.push(series_root(&prep, &series, &scaling, seed.omega, i + 1)?);
    }
    out.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    Ok(ModalResult { order, modes: out })
}

/// `D^{-1/2}` with `D` the diagonal of `K` (or `M` where `K` vanishes). The
/// congruence keeps the inertia of `K(ω)` and evens out the unit mismatch
/// between translations and rotations.
fn diagonal_scaling(k: &SymMatrix, m: &SymMatrix) -> DVector<f64> {
    DVector::from_iterator(
        k.order(),
        (0..k.order()).map(|i| {
            let d = k.get(i, i).abs();
            let d = if d > 0.0 { d } else { m.get(i, i).abs() };
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        }),
    )
}

struct Inertia {
    negative: usize,
    /// Eigenvector of the scaled matrix for the eigenvalue nearest zero.
    nearest: DVector<f64>,
}

fn inertia(
    prep: &Prepared,
    series: &[ElementMatrixSeries],
    scaling: &DVector<f64>,
    omega: f64,
) -> Result<Inertia, SolveError> {
    let k = assemble_dynamic_stiffness(&prep.structure, &prep.dofmap, series, omega)?;
    let n = k.order();
    let scaled = DMatrix::from_fn(n, n, |i, j| scaling[i] * k.get(i, j) * scaling[j]);
    let eig = SymmetricEigen::new(scaled);
    let negative = eig.eigenvalues.iter().filter(|&&v| v < 0.0).count();
    let (imin, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, v)| if v.abs() < bv { (i, v.abs()) } else { (bi, bv) });
    Ok(Inertia {
        negative,
        nearest: eig.eigenvectors.column(imin).into_owned(),
    })
}

fn series_root(
    prep: &Prepared,
    series: &[ElementMatrixSeries],
    scaling: &DVector<f64>,
    seed: f64,
    mode: usize,
) -> Result<Mode, SolveError> {
    let lo = seed * (1.0 - SEED_WINDOW);
    let hi = seed * (1.0 + SEED_WINDOW);
    let ratio = (hi / lo).ln();
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| lo * (ratio * i as f64 / (SCAN_POINTS - 1) as f64).exp())
        .collect();
    let parity = grid
        .iter()
        .map(|&w| inertia(prep, series, scaling, w).map(|s| s.negative % 2))
        .collect::<Result<Vec<_>, _>>()?;

    // sign change of det K(ω) nearest to the seed
    let bracket = (0..SCAN_POINTS - 1)
        .filter(|&i| parity[i] != parity[i + 1])
        .min_by(|&a, &b| {
            let da = ((grid[a] * grid[a + 1]).sqrt() / seed).ln().abs();
            let db = ((grid[b] * grid[b + 1]).sqrt() / seed).ln().abs();
            da.total_cmp(&db)
        });
    let Some(i) = bracket else {
        let signs = parity.iter().map(|&p| if p == 0 { '+' } else { '-' }).collect();
        return Err(SolveError::RootBracketing { mode, lo, hi, signs });
    };

    let (mut a, mut b) = (grid[i], grid[i + 1]);
    let pa = parity[i];
    while b - a > ROOT_TOL * b {
        let mid = 0.5 * (a + b);
        if inertia(prep, series, scaling, mid)?.negative % 2 == pa {
            a = mid;
        } else {
            b = mid;
        }
    }
    let omega = 0.5 * (a + b);
    let nearest = inertia(prep, series, scaling, omega)?.nearest;
    let shape = nearest.component_mul(scaling);
    Ok(Mode {
        omega,
        shape: prep.nodal(&prep.dofmap.expand(&normalize_inf(&shape))),
    })
}
