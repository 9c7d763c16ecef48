use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{cross_entropy, Encoder, EncoderSpec, Gradients, Group, Logits, PaddedBatch};
use crate::corpus::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct MockConfig {
    pub vocab_size: usize,
    pub dim: usize,
    pub n_layers: usize,
    pub rate_scale: f64,
}

impl Default for MockConfig {
    fn default() -> Self {
        MockConfig {
            vocab_size: 4096,
            dim: 16,
            n_layers: super::BASE_ENCODER_LAYERS,
            rate_scale: 1000.0,
        }
    }
}

/// Desk-scale stand-in for a pretrained encoder: seeded token embeddings,
/// `n_layers` residual feed-forward mixing layers `h ← h + tanh(W h + b)`
/// applied per token, mean pooling over non-pad tokens and a linear head.
#[derive(Debug, Clone, PartialEq)]
pub struct MockEncoder {
    config: MockConfig,
    spec: EncoderSpec,
    /// Aligned with `spec.groups()`.
    params: Vec<Vec<f64>>,
    trainable: Vec<bool>,
}

struct SequenceTrace {
    tokens: Vec<usize>,
    /// hidden[l][i]: state of token i entering layer l+1 (hidden[N] is the output).
    hidden: Vec<Vec<Vec<f64>>>,
    /// act[l][i]: tanh output of layer l+1 for token i.
    act: Vec<Vec<Vec<f64>>>,
    pooled: Vec<f64>,
}

impl MockEncoder {
    pub fn new(config: MockConfig, seed: u64) -> Result<Self> {
        if config.vocab_size == 0 || config.dim == 0 {
            return Err(Error::Config(
                "mock encoder needs nonzero vocab and dim".into(),
            ));
        }
        if !(config.rate_scale > 0.0 && config.rate_scale.is_finite()) {
            return Err(Error::Config("mock rate_scale must be positive".into()));
        }
        let spec = EncoderSpec::new(config.n_layers);
        let d = config.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut uniform = |n: usize, scale: f64| -> Vec<f64> {
            (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
        };
        let mut params = Vec::with_capacity(spec.n_groups());
        params.push(uniform(config.vocab_size * d, 0.5));
        let w_scale = 0.5 / (d as f64).sqrt();
        for _ in 0..config.n_layers {
            let mut p = uniform(d * d, w_scale);
            p.extend(std::iter::repeat_n(0.0, d));
            params.push(p);
        }
        let mut head = uniform(2 * d, 1.0 / (d as f64).sqrt());
        head.extend([0.0, 0.0]);
        params.push(head);
        let trainable = vec![true; spec.n_groups()];
        Ok(MockEncoder {
            config,
            spec,
            params,
            trainable,
        })
    }

    pub fn config(&self) -> &MockConfig {
        &self.config
    }

    fn d(&self) -> usize {
        self.config.dim
    }

    fn check_tokens(&self, batch: &PaddedBatch) -> Result<()> {
        for row in &batch.rows {
            if let Some(&id) = row
                .iter()
                .find(|&&id| id as usize >= self.config.vocab_size)
            {
                return Err(Error::TokenOutOfVocab {
                    id,
                    vocab: self.config.vocab_size,
                });
            }
        }
        Ok(())
    }

    fn trace(&self, row: &[u32], pad_id: u32) -> SequenceTrace {
        let d = self.d();
        let tokens: Vec<usize> = row
            .iter()
            .filter(|&&t| t != pad_id)
            .map(|&t| t as usize)
            .collect();
        let emb = &self.params[0];
        let mut hidden = Vec::with_capacity(self.config.n_layers + 1);
        let mut act = Vec::with_capacity(self.config.n_layers);
        hidden.push(
            tokens
                .iter()
                .map(|&t| emb[t * d..(t + 1) * d].to_vec())
                .collect::<Vec<_>>(),
        );
        for l in 0..self.config.n_layers {
            let p = &self.params[l + 1];
            let (w, b) = p.split_at(d * d);
            let prev = &hidden[l];
            let mut a_l = Vec::with_capacity(prev.len());
            let mut h_l = Vec::with_capacity(prev.len());
            for h in prev {
                let a: Vec<f64> = (0..d)
                    .map(|r| {
                        let z: f64 = w[r * d..(r + 1) * d]
                            .iter()
                            .zip(h)
                            .map(|(x, y)| x * y)
                            .sum();
                        (z + b[r]).tanh()
                    })
                    .collect();
                h_l.push(h.iter().zip(&a).map(|(x, y)| x + y).collect());
                a_l.push(a);
            }
            act.push(a_l);
            hidden.push(h_l);
        }
        let mut pooled = vec![0.0; d];
        let top = &hidden[self.config.n_layers];
        if !top.is_empty() {
            for h in top {
                for (p, x) in pooled.iter_mut().zip(h) {
                    *p += x;
                }
            }
            let n = top.len() as f64;
            pooled.iter_mut().for_each(|p| *p /= n);
        }
        SequenceTrace {
            tokens,
            hidden,
            act,
            pooled,
        }
    }

    fn head_logits(&self, pooled: &[f64]) -> [f64; 2] {
        let d = self.d();
        let head = &self.params[self.config.n_layers + 1];
        let mut z = [head[2 * d], head[2 * d + 1]];
        for (k, zk) in z.iter_mut().enumerate() {
            *zk += head[k * d..(k + 1) * d]
                .iter()
                .zip(pooled)
                .map(|(u, p)| u * p)
                .sum::<f64>();
        }
        z
    }

    fn index(&self, group: Group) -> Result<usize> {
        self.spec.index_of(group)
    }
}

impl Encoder for MockEncoder {
    fn spec(&self) -> &EncoderSpec {
        &self.spec
    }

    fn is_trainable(&self, group: Group) -> bool {
        self.spec
            .index_of(group)
            .map(|i| self.trainable[i])
            .unwrap_or(false)
    }

    fn set_trainable(&mut self, groups: &[Group], trainable: bool) -> Result<()> {
        let idx = groups
            .iter()
            .map(|g| self.index(*g))
            .collect::<Result<Vec<_>>>()?;
        for i in idx {
            self.trainable[i] = trainable;
        }
        Ok(())
    }

    fn forward(&self, batch: &PaddedBatch) -> Result<Logits> {
        self.check_tokens(batch)?;
        Ok(batch
            .rows
            .iter()
            .map(|row| self.head_logits(&self.trace(row, batch.pad_id).pooled))
            .collect())
    }

    fn loss_and_gradients(
        &self,
        batch: &PaddedBatch,
        labels: &[Label],
    ) -> Result<(f64, Gradients)> {
        if labels.len() != batch.len() {
            return Err(Error::LengthMismatch {
                left: batch.len(),
                right: labels.len(),
            });
        }
        self.check_tokens(batch)?;
        let d = self.d();
        let n_layers = self.config.n_layers;
        let head_idx = n_layers + 1;
        let mut grads: Vec<Vec<f64>> = self
            .params
            .iter()
            .zip(&self.trainable)
            .map(|(p, &t)| if t { vec![0.0; p.len()] } else { Vec::new() })
            .collect();
        // Backpropagation stops below the lowest trainable group.
        let lowest = self.trainable.iter().position(|&t| t);
        let traces: Vec<SequenceTrace> = batch
            .rows
            .iter()
            .map(|row| self.trace(row, batch.pad_id))
            .collect();
        let logits: Vec<[f64; 2]> = traces.iter().map(|t| self.head_logits(&t.pooled)).collect();
        let loss = cross_entropy(&logits, labels);
        let Some(lowest) = lowest else {
            return Ok((loss, Gradients { groups: grads }));
        };
        let scale = 1.0 / batch.len() as f64;
        let head = &self.params[head_idx];

        for ((trace, z), label) in traces.iter().zip(&logits).zip(labels) {
            let m = z[0].max(z[1]);
            let e0 = (z[0] - m).exp();
            let e1 = (z[1] - m).exp();
            let mut dz = [e0 / (e0 + e1), e1 / (e0 + e1)];
            dz[label.index()] -= 1.0;
            dz.iter_mut().for_each(|g| *g *= scale);

            if self.trainable[head_idx] {
                let g = &mut grads[head_idx];
                for k in 0..2 {
                    for j in 0..d {
                        g[k * d + j] += dz[k] * trace.pooled[j];
                    }
                    g[2 * d + k] += dz[k];
                }
            }
            if lowest == head_idx || trace.tokens.is_empty() {
                continue;
            }
            let n = trace.tokens.len() as f64;
            let dpool: Vec<f64> = (0..d)
                .map(|j| (dz[0] * head[j] + dz[1] * head[d + j]) / n)
                .collect();
            let mut dh: Vec<Vec<f64>> = vec![dpool; trace.tokens.len()];
            for l in (0..n_layers).rev() {
                let gi = l + 1;
                if gi < lowest {
                    break;
                }
                let w = &self.params[gi][..d * d];
                let learn = self.trainable[gi];
                for (i, dh_i) in dh.iter_mut().enumerate() {
                    let a = &trace.act[l][i];
                    let h_in = &trace.hidden[l][i];
                    let g: Vec<f64> = (0..d).map(|r| dh_i[r] * (1.0 - a[r] * a[r])).collect();
                    if learn {
                        let gw = &mut grads[gi];
                        for r in 0..d {
                            for c in 0..d {
                                gw[r * d + c] += g[r] * h_in[c];
                            }
                            gw[d * d + r] += g[r];
                        }
                    }
                    for c in 0..d {
                        let mut acc = 0.0;
                        for r in 0..d {
                            acc += w[r * d + c] * g[r];
                        }
                        dh_i[c] += acc;
                    }
                }
            }
            if lowest == 0 {
                let ge = &mut grads[0];
                for (t, dh_i) in trace.tokens.iter().zip(&dh) {
                    for j in 0..d {
                        ge[t * d + j] += dh_i[j];
                    }
                }
            }
        }
        Ok((loss, Gradients { groups: grads }))
    }

    fn group_params(&self, group: Group) -> Result<&[f64]> {
        let i = self.index(group)?;
        Ok(&self.params[i])
    }

    fn group_params_mut(&mut self, group: Group) -> Result<&mut [f64]> {
        let i = self.index(group)?;
        Ok(&mut self.params[i])
    }

    fn rate_scale(&self) -> f64 {
        self.config.rate_scale
    }
}
