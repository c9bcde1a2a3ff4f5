//! JSON MDP documents, indexed `[i][u][j]`.

use std::fs;
use std::path::Path;

use qrobot_core::planner::TabularMdp;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpFile {
    pub num_states: usize,
    pub num_actions: usize,
    pub absorbing: Vec<usize>,
    pub transitions: Vec<Vec<Vec<f64>>>,
    pub costs: Vec<Vec<Vec<f64>>>,
}

impl MdpFile {
    pub fn into_mdp(self) -> qrobot_core::Result<TabularMdp> {
        let transitions = flatten(self.transitions, self.num_states, self.num_actions, "transitions")?;
        let costs = flatten(self.costs, self.num_states, self.num_actions, "costs")?;
        TabularMdp::new(self.num_states, self.num_actions, transitions, costs, &self.absorbing)
    }
}

pub fn load_mdp(path: &Path) -> Result<TabularMdp> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let file: MdpFile = serde_json::from_str(&text).map_err(|e| HarnessError::config(path, e))?;
    Ok(file.into_mdp()?)
}

fn flatten(
    nested: Vec<Vec<Vec<f64>>>,
    num_states: usize,
    num_actions: usize,
    field: &str,
) -> qrobot_core::Result<Vec<f64>> {
    let shape_err = |what: String| qrobot_core::Error::Model(format!("{field}: {what}"));
    if nested.len() != num_states {
        return Err(shape_err(format!("expected {num_states} rows, found {}", nested.len())));
    }
    let mut flat = Vec::with_capacity(num_states * num_actions * num_states);
    for (i, per_action) in nested.into_iter().enumerate() {
        if per_action.len() != num_actions {
            return Err(shape_err(format!(
                "state {i}: expected {num_actions} actions, found {}",
                per_action.len()
            )));
        }
        for (u, row) in per_action.into_iter().enumerate() {
            if row.len() != num_states {
                return Err(shape_err(format!(
                    "state {i} action {u}: expected {num_states} entries, found {}",
                    row.len()
                )));
            }
            flat.extend(row);
        }
    }
    Ok(flat)
}
