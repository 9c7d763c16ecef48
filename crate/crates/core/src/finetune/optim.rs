use serde::{Deserialize, Serialize};

use crate::encoder::{Encoder, Gradients};
use crate::error::Result;

use super::schedule::LrSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamWConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        AdamWConfig {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.01,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct GroupState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

/// Adam with decoupled weight decay. Moments and step counts are kept per
/// group; a frozen group is not touched at all (no decay, no moment update).
#[derive(Debug, Clone)]
pub struct AdamW {
    config: AdamWConfig,
    state: Vec<GroupState>,
}

impl AdamW {
    pub fn new(config: AdamWConfig, n_groups: usize) -> Self {
        AdamW {
            config,
            state: vec![GroupState::default(); n_groups],
        }
    }

    /// Applies one update at global `step`; returns the realized (scaled)
    /// rate of every group that was updated.
    pub fn step(
        &mut self,
        model: &mut dyn Encoder,
        grads: &Gradients,
        schedule: &LrSchedule,
        step: usize,
    ) -> Result<Vec<(crate::encoder::Group, f64)>> {
        let c = self.config;
        let scale = model.rate_scale();
        let mut realized = Vec::new();
        for (i, group) in model.list_parameter_groups().into_iter().enumerate() {
            if !model.is_trainable(group) || grads.groups[i].is_empty() {
                continue;
            }
            let lr = schedule.rate(group, step)? * scale;
            let g = &grads.groups[i];
            let st = &mut self.state[i];
            if st.m.len() != g.len() {
                st.m = vec![0.0; g.len()];
                st.v = vec![0.0; g.len()];
            }
            st.t += 1;
            let bc1 = 1.0 - c.beta1.powi(st.t);
            let bc2 = 1.0 - c.beta2.powi(st.t);
            let params = model.group_params_mut(group)?;
            for k in 0..params.len() {
                params[k] *= 1.0 - lr * c.weight_decay;
                st.m[k] = c.beta1 * st.m[k] + (1.0 - c.beta1) * g[k];
                st.v[k] = c.beta2 * st.v[k] + (1.0 - c.beta2) * g[k] * g[k];
                let m_hat = st.m[k] / bc1;
                let v_hat = st.v[k] / bc2;
                params[k] -= lr * m_hat / (v_hat.sqrt() + c.eps);
            }
            realized.push((group, lr));
        }
        Ok(realized)
    }
}
