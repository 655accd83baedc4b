use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sphereum::circle::{circle_uniform, psi_cos, psi_m, psi_sin, psi_sin2};
use sphereum::{
    make_cs_state, make_f_state, most_delocalized_state, uniform_state, CircleState64, GridSpec64,
    SphereState64, StateParams,
};

use crate::CliError;

/// State description read from a JSON file. Fields not used by a family are
/// ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub family: Family,
    #[serde(default = "default_u")]
    pub u: f64,
    #[serde(default = "default_v")]
    pub v: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "one")]
    pub tau: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_max: Option<usize>,
    #[serde(default)]
    pub m: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    F,
    Cs,
    Uniform,
    Psi0,
    CircleM,
    CircleCos,
    CircleSin,
    CircleSin2,
    CircleUniform,
}

fn default_u() -> f64 {
    PI
}

fn default_v() -> f64 {
    FRAC_PI_2
}

fn one() -> f64 {
    1.0
}

fn default_k() -> usize {
    1
}

pub enum LoadedState {
    Sphere(SphereState64),
    Circle(CircleState64),
}

impl StateSpec {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("invalid state file {}: {e}", path.display())))
    }

    pub fn build(&self, spec: &GridSpec64) -> Result<LoadedState, CliError> {
        let params = StateParams {
            u: self.u,
            v: self.v,
            gamma: self.gamma,
            k: self.k,
            tau: self.tau,
            alpha_phase: None,
            l_max: self.l_max,
        };
        Ok(match self.family {
            Family::F => LoadedState::Sphere(make_f_state(&params, spec)?),
            Family::Cs => LoadedState::Sphere(make_cs_state(&params, spec)?),
            Family::Uniform => LoadedState::Sphere(uniform_state()),
            Family::Psi0 => LoadedState::Sphere(most_delocalized_state(None)),
            Family::CircleM => LoadedState::Circle(psi_m(self.m)),
            Family::CircleCos => LoadedState::Circle(psi_cos()),
            Family::CircleSin => LoadedState::Circle(psi_sin()),
            Family::CircleSin2 => LoadedState::Circle(psi_sin2()),
            Family::CircleUniform => LoadedState::Circle(circle_uniform()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_fields() {
        let s: StateSpec = serde_json::from_str(r#"{"family": "cs", "tau": 0.2}"#).unwrap();
        assert_eq!(s.family, Family::Cs);
        assert_eq!(s.u, PI);
        assert_eq!(s.v, FRAC_PI_2);
        assert_eq!(s.tau, 0.2);
        assert_eq!(s.l_max, None);
    }

    #[test]
    fn unknown_fields_and_families_are_rejected() {
        assert!(serde_json::from_str::<StateSpec>(r#"{"family": "f", "gama": 2}"#).is_err());
        assert!(serde_json::from_str::<StateSpec>(r#"{"family": "gaussian"}"#).is_err());
    }

    #[test]
    fn invalid_parameters_map_to_input_errors() {
        let s: StateSpec = serde_json::from_str(r#"{"family": "f", "gamma": -1}"#).unwrap();
        let err = s.build(&GridSpec64::default()).err().unwrap();
        assert_eq!(err.code, crate::EXIT_INPUT);
    }
}
