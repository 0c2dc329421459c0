//! Dense symmetric kernels: Cholesky factorization and generalized
//! symmetric eigenproblems.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::NumericsError;

/// Relative asymmetry accepted by [`SymMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Pivot threshold relative to the original diagonal entry.
const PIVOT_TOL: f64 = 1e-11;

/// Dense symmetric matrix. The stored matrix is exactly symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Accepts `m` if its asymmetry is within [`SYMMETRY_TOL`] of its largest
    /// entry and stores the symmetric part.
    pub fn new(m: DMatrix<f64>) -> Result<Self, NumericsError> {
        if !m.is_square() {
            return Err(NumericsError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let scale = m.amax();
        let asym = max_asymmetry(&m);
        if asym > SYMMETRY_TOL * scale {
            return Err(NumericsError::NotSymmetric {
                asymmetry: asym,
                scale,
            });
        }
        Ok(Self::symmetrize(m))
    }

    /// Stores `½(m + mᵀ)` without checking the asymmetry.
    pub fn symmetrize(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        Self((m + t) * 0.5)
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Adds `v` at `(i, j)` and, off the diagonal, at `(j, i)`.
    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        self.0[(i, j)] += v;
        if i != j {
            self.0[(j, i)] += v;
        }
    }

    /// Largest absolute entry.
    pub fn norm_max(&self) -> f64 {
        self.0.amax()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.0 * x
    }
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Lower Cholesky factor `L` with `A = L·Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: DMatrix<f64>,
}

impl Cholesky {
    pub fn factor(a: &SymMatrix) -> Result<Self, NumericsError> {
        let a = a.as_matrix();
        let n = a.nrows();
        let mut l = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d <= PIVOT_TOL * a[(j, j)].abs() || !d.is_finite() {
                return Err(NumericsError::NonPositivePivot { index: j, pivot: d });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut v = a[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = v / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let y = self
            .l
            .solve_lower_triangular(b)
            .expect("cholesky factor has a positive diagonal");
        self.l
            .tr_solve_lower_triangular(&y)
            .expect("cholesky factor has a positive diagonal")
    }

    /// `L⁻¹ · B · L⁻ᵀ`, symmetrized.
    fn congruence(&self, b: &SymMatrix) -> DMatrix<f64> {
        let x = self
            .l
            .solve_lower_triangular(b.as_matrix())
            .expect("cholesky factor has a positive diagonal");
        let c = self
            .l
            .solve_lower_triangular(&x.transpose())
            .expect("cholesky factor has a positive diagonal");
        let ct = c.transpose();
        (c + ct) * 0.5
    }

    /// `L⁻ᵀ · y`
    fn back(&self, y: &DVector<f64>) -> DVector<f64> {
        self.l
            .tr_solve_lower_triangular(y)
            .expect("cholesky factor has a positive diagonal")
    }
}

/// Solves `A·x = b` for symmetric positive definite `A`.
pub fn solve_spd(a: &SymMatrix, b: &DVector<f64>) -> Result<DVector<f64>, NumericsError> {
    if b.len() != a.order() {
        return Err(NumericsError::DimensionMismatch {
            expected: a.order(),
            found: b.len(),
        });
    }
    let factor = Cholesky::factor(a)?;
    let mut x = factor.solve(b);
    for _ in 0..REFINEMENT_STEPS {
        let r = compensated_residual(a, &x, b);
        x += factor.solve(&r);
    }
    Ok(x)
}

/// Refinement passes after the first Cholesky solve.
const REFINEMENT_STEPS: usize = 2;

/// `b − A·x` accumulated in doubled precision (error-free products and
/// sums), so refinement recovers digits the factorization loses.
fn compensated_residual(a: &SymMatrix, x: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let m = a.as_matrix();
    DVector::from_iterator(
        b.len(),
        (0..b.len()).map(|i| {
            let (mut sum, mut err) = (b[i], 0.0);
            for j in 0..x.len() {
                let p = -m[(i, j)] * x[j];
                let pe = (-m[(i, j)]).mul_add(x[j], -p);
                let t = sum + p;
                let bp = t - sum;
                err += (sum - (t - bp)) + (p - bp) + pe;
                sum = t;
            }
            sum + err
        }),
    )
}

/// Eigenpairs of a generalized symmetric problem, sorted ascending.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// One column per eigenvalue.
    pub vectors: DMatrix<f64>,
}

impl EigenPairs {
    pub fn vector(&self, i: usize) -> DVector<f64> {
        self.vectors.column(i).into_owned()
    }
}

/// Residual bound accepted for every returned eigenpair.
pub const EIG_RESIDUAL_TOL: f64 = 1e-9;

/// The `k` smallest eigenpairs of `A·v = λ·B·v` with `B` positive definite.
///
/// Vectors are `B`-orthonormal. When `A` is positive definite as well, the
/// problem is reduced through `A`'s factor (`B·v = λ⁻¹·A·v`), which keeps the
/// smallest eigenvalues accurate for badly scaled systems; otherwise the
/// reduction goes through `B`.
pub fn eig_gsym(a: &SymMatrix, b: &SymMatrix, k: usize) -> Result<EigenPairs, NumericsError> {
    check_pair(a, b)?;
    let fb = Cholesky::factor(b)?;
    let k = k.min(a.order());

    let pairs = match Cholesky::factor(a) {
        Ok(fa) => {
            let c = fa.congruence(b);
            let eig = SymmetricEigen::new(c);
            let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
            // Largest μ first: λ = 1/μ ascending.
            order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
            let mut values = Vec::with_capacity(k);
            let mut vectors = DMatrix::zeros(a.order(), k);
            for (col, &i) in order.iter().take(k).enumerate() {
                let mu = eig.eigenvalues[i];
                let v = fa.back(&eig.eigenvectors.column(i).into_owned());
                // vᵀAv = 1 and vᵀBv = μ, rescale to vᵀBv = 1.
                vectors.set_column(col, &(v / mu.sqrt()));
                values.push(1.0 / mu);
            }
            EigenPairs { values, vectors }
        }
        Err(_) => {
            let c = fb.congruence(a);
            let eig = SymmetricEigen::new(c);
            let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
            let mut values = Vec::with_capacity(k);
            let mut vectors = DMatrix::zeros(a.order(), k);
            for (col, &i) in order.iter().take(k).enumerate() {
                let v = fb.back(&eig.eigenvectors.column(i).into_owned());
                vectors.set_column(col, &v);
                values.push(eig.eigenvalues[i]);
            }
            EigenPairs { values, vectors }
        }
    };
    check_residuals(a, b, &pairs)?;
    Ok(pairs)
}

/// The `k` smallest positive eigenvalues of `A·v = λ·B·v` where `A` is
/// positive definite and `B` is symmetric but possibly indefinite or
/// singular (the buckling problem `K·v = λ·(−Kg)·v`).
///
/// Directions on which `B` is zero or negative have no positive `λ` and are
/// skipped. Vectors are `A`-orthonormal.
pub fn eig_gsym_smallest_positive(
    a: &SymMatrix,
    b: &SymMatrix,
    k: usize,
) -> Result<EigenPairs, NumericsError> {
    check_pair(a, b)?;
    let fa = Cholesky::factor(a)?;
    let c = fa.congruence(b);
    let eig = SymmetricEigen::new(c);
    let mu_max = eig.eigenvalues.amax();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > 1e-12 * mu_max)
        .collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let k = k.min(order.len());
    let mut values = Vec::with_capacity(k);
    let mut vectors = DMatrix::zeros(a.order(), k);
    for (col, &i) in order.iter().take(k).enumerate() {
        let v = fa.back(&eig.eigenvectors.column(i).into_owned());
        vectors.set_column(col, &v);
        values.push(1.0 / eig.eigenvalues[i]);
    }
    let pairs = EigenPairs { values, vectors };
    check_residuals(a, b, &pairs)?;
    Ok(pairs)
}

fn check_pair(a: &SymMatrix, b: &SymMatrix) -> Result<(), NumericsError> {
    if a.order() != b.order() {
        return Err(NumericsError::DimensionMismatch {
            expected: a.order(),
            found: b.order(),
        });
    }
    Ok(())
}

/// Largest scaled residual `‖A·v − λ·B·v‖ / ((‖A‖ + |λ|·‖B‖)·‖v‖)`.
pub fn eigen_residual(a: &SymMatrix, b: &SymMatrix, lambda: f64, v: &DVector<f64>) -> f64 {
    let r = a.mul_vec(v) - b.mul_vec(v) * lambda;
    let scale = (a.as_matrix().norm() + lambda.abs() * b.as_matrix().norm()) * v.norm();
    if scale == 0.0 {
        r.norm()
    } else {
        r.norm() / scale
    }
}

fn check_residuals(a: &SymMatrix, b: &SymMatrix, pairs: &EigenPairs) -> Result<(), NumericsError> {
    let worst = pairs
        .values
        .iter()
        .enumerate()
        .map(|(i, &lambda)| eigen_residual(a, b, lambda, &pairs.vector(i)))
        .fold(0.0, f64::max);
    if worst > EIG_RESIDUAL_TOL {
        return Err(NumericsError::EigenNotConverged { residual: worst });
    }
    Ok(())
}
