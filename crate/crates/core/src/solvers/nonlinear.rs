use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};

use crate::assembly::{assemble_matrix, element_series, full_load_vector, DiscretizedStructure, DofMap};
use crate::element::{corotational_frame, internal_forces_and_tangent, rotation_from_direction, EndpointDofs};
use crate::model::{Model, NonlinearSettings};
use crate::numerics::{Cholesky, NumericsError, SymMatrix};

use super::{prepare, NodalDisplacement, Prepared, SolveError};

/// Increment halvings allowed within one load step.
const MAX_HALVINGS: usize = 10;

/// Accepted equilibrium point.
#[derive(Clone, Debug, PartialEq)]
pub struct PathPoint {
    pub load_factor: f64,
    pub displacements: Vec<NodalDisplacement>,
    /// Final residual norm `‖f_int − λ·f_ref‖`.
    pub residual: f64,
    /// Newton iterations (tangent solves) taken.
    pub iterations: usize,
    /// Residual norm before each iteration and after the last.
    pub residual_history: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PathFailure {
    /// Newton failed even after the allowed increment halvings.
    NotConverged { load_factor: f64, residual: f64 },
    /// The tangent became singular: a limit point, bifurcation, or mechanism.
    SingularTangent { load_factor: f64, dof: String },
}

impl std::fmt::Display for PathFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PathFailure::NotConverged { load_factor, residual } => write!(
                f,
                "Newton did not converge at load factor {load_factor} (residual {residual:e})"
            ),
            PathFailure::SingularTangent { load_factor, dof } => {
                write!(f, "singular tangent at load factor {load_factor}, free direction at {dof}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PathStatus {
    Complete,
    Failed(PathFailure),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumPath {
    /// Accepted points in increasing load factor, ending at 1 when complete.
    pub points: Vec<PathPoint>,
    pub status: PathStatus,
}

impl EquilibriumPath {
    pub fn is_complete(&self) -> bool {
        self.status == PathStatus::Complete
    }

    pub fn last(&self) -> Option<&PathPoint> {
        self.points.last()
    }
}

struct Evaluation {
    /// Internal force over all DOFs.
    internal: DVector<f64>,
    tangent: SymMatrix,
    max_end_rotation: f64,
}

fn evaluate(structure: &DiscretizedStructure, dofmap: &DofMap, u: &DVector<f64>) -> Result<Evaluation, SolveError> {
    let mut internal = DVector::<f64>::zeros(structure.total_dofs());
    let mut max_end_rotation = 0.0f64;
    let mut tangents = Vec::with_capacity(structure.elements.len());
    for (e, el) in structure.elements.iter().enumerate() {
        let [a, b] = el.nodes;
        let (na, nb) = (&structure.nodes[a], &structure.nodes[b]);
        let q = EndpointDofs([
            na.x + u[3 * a],
            na.y + u[3 * a + 1],
            u[3 * a + 2],
            nb.x + u[3 * b],
            nb.y + u[3 * b + 1],
            u[3 * b + 2],
        ]);
        let state = corotational_frame(q, el.length, el.angle)?;
        max_end_rotation = max_end_rotation.max(state.end_rotations[0].abs()).max(state.end_rotations[1].abs());
        let (f, kt) = internal_forces_and_tangent(&state, &el.props);
        for (k, &d) in structure.element_dofs(e).iter().enumerate() {
            internal[d] += f[k];
        }
        tangents.push(kt);
    }
    // tangents are already global; assemble_matrix rotates by the element
    // angle, so undo that rotation first
    let tangent = assemble_matrix(structure, dofmap, |e| {
        let t = rotation_from_direction(structure.elements[e].direction);
        t * tangents[e] * t.transpose()
    })?;
    Ok(Evaluation {
        internal,
        tangent,
        max_end_rotation,
    })
}

type ScaledSolve = dyn Fn(&DVector<f64>) -> Option<DVector<f64>>;

/// Solves `K·x = b` for a symmetric tangent that may be indefinite, on the
/// diagonally scaled matrix and with one step of iterative refinement.
/// Returns the offending equation when the matrix is singular.
fn solve_tangent(k: &SymMatrix, b: &DVector<f64>) -> Result<DVector<f64>, usize> {
    let n = k.order();
    let s = DVector::from_iterator(
        n,
        (0..n).map(|i| {
            let d = k.get(i, i).abs();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        }),
    );
    let scaled = DMatrix::from_fn(n, n, |i, j| s[i] * k.get(i, j) * s[j]);
    let solve: Box<ScaledSolve> =
        match Cholesky::factor(&SymMatrix::symmetrize(scaled.clone())) {
            Ok(f) => Box::new(move |r: &DVector<f64>| Some(f.solve(r))),
            Err(NumericsError::NonPositivePivot { .. }) => {
                let lu = scaled.lu();
                let u = lu.u();
                let dmax = u.diagonal().amax();
                if let Some(i) = (0..n).find(|&i| u[(i, i)].abs() <= 1e-12 * dmax) {
                    return Err(i);
                }
                Box::new(move |r: &DVector<f64>| lu.solve(r))
            }
            Err(_) => return Err(0),
        };
    let mut x = solve(&b.component_mul(&s)).ok_or(0usize)?.component_mul(&s);
    let r = b - k.mul_vec(&x);
    x += solve(&r.component_mul(&s)).ok_or(0usize)?.component_mul(&s);
    Ok(x)
}

enum StepOutcome {
    Converged { u: DVector<f64>, residual: f64, iterations: usize, history: Vec<f64> },
    Diverged { residual: f64 },
    Singular { equation: usize },
}

#[allow(clippy::too_many_arguments)]
fn newton(
    prep: &Prepared,
    f_ref: &DVector<f64>,
    start: &DVector<f64>,
    load_factor: f64,
    settings: &NonlinearSettings,
    floor: f64,
) -> Result<StepOutcome, SolveError> {
    let dofmap = &prep.dofmap;
    let target = dofmap.restrict(&(f_ref * load_factor));
    let limit = (settings.tol * target.norm()).max(floor);
    let mut u = start.clone();
    let mut history = Vec::new();
    for it in 0..=settings.max_iter {
        let eval = match evaluate(&prep.structure, dofmap, &u) {
            Ok(e) => e,
            Err(SolveError::Element(_)) => {
                return Ok(StepOutcome::Diverged {
                    residual: f64::INFINITY,
                })
            }
            Err(e) => return Err(e),
        };
        let r = dofmap.restrict(&eval.internal) - &target;
        let res = r.norm();
        history.push(res);
        if !res.is_finite() || eval.max_end_rotation >= FRAC_PI_2 {
            return Ok(StepOutcome::Diverged { residual: res });
        }
        if res <= limit {
            return Ok(StepOutcome::Converged {
                u,
                residual: res,
                iterations: it,
                history,
            });
        }
        if it == settings.max_iter {
            return Ok(StepOutcome::Diverged { residual: res });
        }
        let du = match solve_tangent(&eval.tangent, &(-r)) {
            Ok(du) => du,
            Err(equation) => return Ok(StepOutcome::Singular { equation }),
        };
        u += dofmap.expand(&du);
    }
    unreachable!("loop returns on its last iteration")
}

/// Corotational equilibrium under the model's loads, ramped from zero to
/// full load in `settings.steps` increments with Newton iterations on the
/// analytic tangent. A failed increment is halved up to ten times.
///
/// Solver breakdowns during stepping are reported in the returned path's
/// status together with every point accepted so far.
pub fn solve_nonlinear_static(model: &Model, settings: NonlinearSettings) -> Result<EquilibriumPath, SolveError> {
    let prep = prepare(model)?;
    let structure = &prep.structure;
    let f_ref = full_load_vector(structure, &model.loads)?;

    let series = element_series(structure, 0);
    let k0 = assemble_matrix(structure, &prep.dofmap, |e| *series[e].k0())?;
    let char_len = structure.elements.iter().map(|e| e.length).fold(0.0, f64::max)
        * model.beams.iter().map(|b| b.subdivisions).max().unwrap_or(1) as f64;
    let floor = 1e-14 * k0.norm_max() * char_len;

    let mut points = Vec::new();
    let mut u = DVector::zeros(structure.total_dofs());

    // a mechanism shows up before any load is applied
    let probe = DVector::zeros(prep.dofmap.n_free());
    if let Err(equation) = solve_tangent(&evaluate(structure, &prep.dofmap, &u)?.tangent, &probe) {
        return Ok(EquilibriumPath {
            points,
            status: PathStatus::Failed(PathFailure::SingularTangent {
                load_factor: 0.0,
                dof: prep.dof_label(equation),
            }),
        });
    }

    let steps = settings.steps.max(1);
    let nominal = 1.0 / steps as f64;
    let mut lambda = 0.0f64;
    let mut increment = nominal;
    let mut halvings = 0;
    let mut completed = 0usize;
    while completed < steps || lambda < 1.0 {
        let mut next = lambda + increment;
        if next > 1.0 || 1.0 - next < 1e-12 {
            next = 1.0;
        }
        match newton(&prep, &f_ref, &u, next, &settings, floor)? {
            StepOutcome::Converged {
                u: un,
                residual,
                iterations,
                history,
            } => {
                u = un;
                lambda = next;
                points.push(PathPoint {
                    load_factor: lambda,
                    displacements: prep.nodal(&u),
                    residual,
                    iterations,
                    residual_history: history,
                });
                halvings = 0;
                increment = (increment * 2.0).min(nominal);
                completed += 1;
                if lambda >= 1.0 {
                    break;
                }
            }
            StepOutcome::Diverged { residual } => {
                halvings += 1;
                if halvings > MAX_HALVINGS {
                    return Ok(EquilibriumPath {
                        points,
                        status: PathStatus::Failed(PathFailure::NotConverged {
                            load_factor: next,
                            residual,
                        }),
                    });
                }
                increment *= 0.5;
            }
            StepOutcome::Singular { equation } => {
                return Ok(EquilibriumPath {
                    points,
                    status: PathStatus::Failed(PathFailure::SingularTangent {
                        load_factor: next,
                        dof: prep.dof_label(equation),
                    }),
                });
            }
        }
    }
    Ok(EquilibriumPath {
        points,
        status: PathStatus::Complete,
    })
}
