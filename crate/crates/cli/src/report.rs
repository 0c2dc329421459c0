//! CSV output of `run`.

use std::fmt::Write as _;

use cosserat_core::solvers::{run_analysis, AnalysisResult, NodalDisplacement, PathStatus};
use cosserat_core::Model;

fn num(v: f64) -> String {
    format!("{v:.15e}")
}

fn displacement_row(out: &mut String, d: &NodalDisplacement) {
    let _ = writeln!(out, "{},{},{},{}", d.node, num(d.ux), num(d.uy), num(d.rz));
}

/// Results table for `model`'s analysis, and the failure message if the
/// solver did not complete. A failed nonlinear run still lists every
/// accepted step.
pub fn run_csv(model: &Model) -> (String, Option<String>) {
    let mut out = String::new();
    let result = match run_analysis(model) {
        Ok(r) => r,
        Err(e) => return (header(model), Some(e.to_string())),
    };
    let mut failure = None;
    match result {
        AnalysisResult::Static(r) => {
            out.push_str("node,ux,uy,rz\n");
            for d in &r.displacements {
                displacement_row(&mut out, d);
            }
            for re in &r.reactions {
                let _ = writeln!(out, "reaction:{},{},{},{}", re.node, num(re.fx), num(re.fy), num(re.mz));
            }
        }
        AnalysisResult::Buckling(r) => {
            out.push_str("mode,load_factor,critical_load\n");
            for (i, m) in r.modes.iter().enumerate() {
                let _ = writeln!(out, "{},{},{}", i + 1, num(m.load_factor), num(m.critical_load));
            }
        }
        AnalysisResult::Modal(r) => {
            out.push_str("mode,omega_rad_s,freq_hz\n");
            for (i, m) in r.modes.iter().enumerate() {
                let _ = writeln!(out, "{},{},{}", i + 1, num(m.omega), num(m.frequency_hz()));
            }
        }
        AnalysisResult::Nonlinear(path) => {
            out.push_str("load_factor,node,ux,uy,rz\n");
            for p in &path.points {
                for d in &p.displacements {
                    let _ = write!(out, "{},", num(p.load_factor));
                    displacement_row(&mut out, d);
                }
            }
            if let PathStatus::Failed(f) = path.status {
                failure = Some(format!("nonlinear solve stopped: {f}"));
            }
        }
    }
    (out, failure)
}

fn header(model: &Model) -> String {
    use cosserat_core::AnalysisSpec as A;
    match model.analysis {
        A::LinearStatic => "node,ux,uy,rz\n",
        A::Buckling { .. } => "mode,load_factor,critical_load\n",
        A::Modal { .. } => "mode,omega_rad_s,freq_hz\n",
        A::NonlinearStatic(_) => "load_factor,node,ux,uy,rz\n",
    }
    .to_string()
}
