use std::fmt::Write as _;

use serde_json::{json, Value};
use sphereum::{
    check_schrodinger_ur, circle_measures, combined_measures, gram_matrix, CircleState64,
    DiffOperator, GramReport64, GridSpec64, Observable64, PacketCenterResult, SphereState64,
};

use crate::format::{csv, estimate, matrix, num, vector};
use crate::state_file::{LoadedState, StateSpec};
use crate::CliError;

fn grid_json(spec: &GridSpec64) -> Value {
    json!({
        "n_theta": spec.n_theta,
        "n_phi": spec.n_phi,
        "max_refinements": spec.max_refinements,
        "rel_tol": num(spec.rel_tol),
    })
}

pub fn centers_json(c: &PacketCenterResult<f64>) -> Value {
    json!({
        "multiplicity": c.multiplicity,
        "degenerate": c.degenerate,
        "centroid_angle": c.centroid_angle.map_or(Value::Null, num),
        "centers": c.centers.iter().map(|x| json!({
            "phi_c": num(x.phi_c),
            "theta_c": num(x.theta_c),
            "objective": num(x.objective),
            "fixed_point_residual": num(x.fixed_point_residual),
            "antipode_density": num(x.antipode_density),
        })).collect::<Vec<_>>(),
    })
}

fn gram_json(rep: &GramReport64) -> Value {
    let re: Vec<Vec<f64>> = rep
        .g
        .iter()
        .map(|r| r.iter().map(|z| z.re).collect())
        .collect();
    let im: Vec<Vec<f64>> = rep
        .g
        .iter()
        .map(|r| r.iter().map(|z| z.im).collect())
        .collect();
    json!({
        "operators": rep.operators,
        "window_center": num(rep.window_center),
        "G": { "re": matrix(&re), "im": matrix(&im) },
        "S": matrix(&rep.s),
        "A": matrix(&rep.a),
        "char_S": vector(&rep.char_s),
        "char_A": vector(&rep.char_a),
        "min_eigenvalue": num(rep.min_eigenvalue),
        "verdicts": rep.verdicts.iter().map(|v| json!({
            "name": v.name,
            "lhs": num(v.lhs),
            "rhs": num(v.rhs),
            "margin": num(v.margin),
            "pass": v.pass,
        })).collect::<Vec<_>>(),
        "all_pass": rep.all_pass(),
    })
}

pub fn standard_operators() -> Vec<Observable64> {
    vec![
        Observable64::Phi,
        Observable64::Theta,
        DiffOperator::p_phi().into(),
        DiffOperator::p_theta(1).into(),
    ]
}

fn sphere_measure(state: &SphereState64, spec: &GridSpec64) -> Result<Value, CliError> {
    let m = combined_measures(state, spec)?;
    let gram = match gram_matrix(state, &standard_operators(), spec) {
        Ok(rep) => json!({
            "operators": rep.operators,
            "all_pass": rep.all_pass(),
            "min_eigenvalue": num(rep.min_eigenvalue),
        }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    Ok(json!({
        "kind": "sphere",
        "label": state.label(),
        "measures": {
            "c_var_phi": num(m.c_var_phi),
            "var_theta": num(m.var_theta),
            "mean_theta": num(m.mean_theta),
            "m_plus": num(m.m_plus),
            "m_dot": num(m.m_dot),
            "var_p_phi": num(m.var_p_phi),
            "var_p_theta": num(m.var_p_theta),
            "n_theta_index": m.n_theta_index,
        },
        "centers": centers_json(&m.centers),
        "gram": gram,
    }))
}

fn circle_measure(state: &CircleState64, spec: &GridSpec64) -> Result<Value, CliError> {
    let m = circle_measures(state, spec)?;
    Ok(json!({
        "kind": "circle",
        "label": state.label(),
        "measures": {
            "var_cos": num(m.var_cos),
            "var_sin": num(m.var_sin),
            "cov_cos_sin": num(m.cov_cos_sin),
            "mean_cos": num(m.mean_cos),
            "mean_sin": num(m.mean_sin),
            "centroid_measure": num(m.centroid_measure),
            "kr_phi": estimate(m.kr_phi),
            "kr_p": num(m.kr_p),
            "var_p_phi": num(m.var_p_phi),
        },
    }))
}

pub fn measure(state_spec: &StateSpec, spec: &GridSpec64) -> Result<Value, CliError> {
    let mut report = match state_spec.build(spec)? {
        LoadedState::Sphere(s) => sphere_measure(&s, spec)?,
        LoadedState::Circle(s) => circle_measure(&s, spec)?,
    };
    report["state"] = serde_json::to_value(state_spec).expect("state spec serializes");
    report["grid"] = grid_json(spec);
    Ok(report)
}

/// Parses `phi`, `theta`, `p_phi` and `p_theta_n<k>`.
pub fn parse_operator(label: &str) -> Result<Observable64, CliError> {
    match label.trim() {
        "phi" => Ok(Observable64::Phi),
        "theta" => Ok(Observable64::Theta),
        "p_phi" => Ok(DiffOperator::p_phi().into()),
        other => other
            .strip_prefix("p_theta_n")
            .and_then(|n| n.parse::<u32>().ok())
            .map(|n| DiffOperator::p_theta(n).into())
            .ok_or_else(|| CliError::input(format!("unknown operator label '{other}'"))),
    }
}

pub fn ur(
    state_spec: &StateSpec,
    ops: &[Observable64],
    spec: &GridSpec64,
) -> Result<Value, CliError> {
    let state = match state_spec.build(spec)? {
        LoadedState::Sphere(s) => s,
        LoadedState::Circle(_) => return Err(CliError::input("ur needs a sphere state")),
    };
    let rep = gram_matrix(&state, ops, spec)?;
    let mut out = gram_json(&rep);
    if let [x1, x2] = ops {
        let chk = check_schrodinger_ur(&state, x1, x2, spec)?;
        out["schrodinger"] = json!({
            "lhs": num(chk.verdict.lhs),
            "rhs": num(chk.verdict.rhs),
            "margin": num(chk.verdict.margin),
            "pass": chk.verdict.pass,
            "g_cov": num(chk.g_cov),
            "g_comm": num(chk.g_comm),
        });
    }
    out["state"] = serde_json::to_value(state_spec).expect("state spec serializes");
    out["label"] = Value::String(state.label().to_string());
    out["grid"] = grid_json(spec);
    Ok(out)
}

/// Plot grid as CSV. Sphere states are sampled at `φ_i = 2πi/n_phi` and cell
/// centres `θ_j = (j + ½)π/n_theta`, one `θ` row after another.
pub fn grid_csv(
    state_spec: &StateSpec,
    n_theta: usize,
    n_phi: usize,
    spec: &GridSpec64,
) -> Result<String, CliError> {
    if n_theta == 0 || n_phi == 0 {
        return Err(CliError::input("grid resolution must be positive"));
    }
    let mut out = String::new();
    let tau = std::f64::consts::TAU;
    let pi = std::f64::consts::PI;
    match state_spec.build(spec)? {
        LoadedState::Sphere(s) => {
            out.push_str("phi,theta,density,weighted_density\n");
            for j in 0..n_theta {
                let theta = (j as f64 + 0.5) * pi / n_theta as f64;
                for i in 0..n_phi {
                    let phi = tau * i as f64 / n_phi as f64;
                    let d = s.density(phi, theta);
                    writeln!(
                        out,
                        "{},{},{},{}",
                        csv(phi),
                        csv(theta),
                        csv(d),
                        csv(d * theta.sin())
                    )
                    .expect("write to string");
                }
            }
        }
        LoadedState::Circle(s) => {
            out.push_str("phi,density\n");
            for i in 0..n_phi {
                let phi = tau * i as f64 / n_phi as f64;
                writeln!(out, "{},{}", csv(phi), csv(s.density(phi))).expect("write to string");
            }
        }
    }
    Ok(out)
}
