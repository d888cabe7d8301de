//! Twin delayed deep deterministic policy gradient.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::mlp::Mlp;
use super::replay::{Batch, ReplayBuffer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Td3Config {
    pub gamma: f64,
    pub tau: f64,
    /// Exploration noise std added to actions while training.
    pub expl_noise: f64,
    /// Target policy smoothing noise std.
    pub policy_noise: f64,
    pub noise_clip: f64,
    pub policy_delay: u64,
    pub batch_size: usize,
    pub lr: f64,
    pub buffer_capacity: usize,
    /// Uniform random actions before the policy takes over.
    pub warmup_steps: u64,
}

impl Default for Td3Config {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            tau: 0.005,
            expl_noise: 0.1,
            policy_noise: 0.2,
            noise_clip: 0.5,
            policy_delay: 2,
            batch_size: 100,
            lr: 1e-3,
            buffer_capacity: 1_000_000,
            warmup_steps: 1000,
        }
    }
}

impl Td3Config {
    pub fn validate(&self) -> Result<()> {
        let ok = self.gamma > 0.0
            && self.gamma < 1.0
            && self.tau > 0.0
            && self.tau <= 1.0
            && self.policy_delay >= 1
            && self.batch_size >= 1
            && self.lr > 0.0
            && self.expl_noise >= 0.0
            && self.policy_noise >= 0.0
            && self.noise_clip >= 0.0
            && self.buffer_capacity >= self.batch_size;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid TD3 config {self:?}")))
        }
    }
}

/// Deterministic policy output plus optional Gaussian exploration noise,
/// clamped to [-1, 1].
pub fn select_action<R: Rng + ?Sized>(
    actor: &Mlp,
    obs: &[f64],
    noise_std: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut a = actor.forward(obs)?;
    if noise_std > 0.0 {
        for v in &mut a {
            let n: f64 = StandardNormal.sample(rng);
            *v = (*v + noise_std * n).clamp(-1.0, 1.0);
        }
    }
    Ok(a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateLosses {
    pub critic1: f64,
    pub critic2: f64,
    /// Present on delayed policy updates.
    pub actor: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Td3Agent {
    pub cfg: Td3Config,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub actor: Mlp,
    pub actor_target: Mlp,
    pub critic1: Mlp,
    pub critic2: Mlp,
    pub critic1_target: Mlp,
    pub critic2_target: Mlp,
    pub actor_opt: Adam,
    pub critic1_opt: Adam,
    pub critic2_opt: Adam,
    /// Number of `update` calls performed so far.
    pub updates: u64,
    pub(crate) grads: Scratch,
}

/// Reused gradient buffers; allocating them per update dominates system time.
#[derive(Debug, Clone, Default)]
pub(crate) struct Scratch {
    actor: Vec<f64>,
    critic: Vec<f64>,
}

fn zeroed(buf: &mut Vec<f64>, len: usize) -> &mut [f64] {
    buf.clear();
    buf.resize(len, 0.0);
    buf
}

fn concat_rows(a: &[f64], a_dim: usize, b: &[f64], b_dim: usize, rows: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * (a_dim + b_dim));
    for r in 0..rows {
        out.extend_from_slice(&a[r * a_dim..(r + 1) * a_dim]);
        out.extend_from_slice(&b[r * b_dim..(r + 1) * b_dim]);
    }
    out
}

impl Td3Agent {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, act_dim: usize, cfg: Td3Config, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let actor = Mlp::actor(obs_dim, act_dim, rng)?;
        let critic1 = Mlp::critic(obs_dim, act_dim, rng)?;
        let critic2 = Mlp::critic(obs_dim, act_dim, rng)?;
        Ok(Self::from_networks(cfg, actor, critic1, critic2))
    }

    /// Targets start as copies of the online networks.
    pub fn from_networks(cfg: Td3Config, actor: Mlp, critic1: Mlp, critic2: Mlp) -> Self {
        let obs_dim = actor.input_dim();
        let act_dim = actor.output_dim();
        Self {
            cfg,
            obs_dim,
            act_dim,
            actor_opt: Adam::new(actor.param_count(), cfg.lr),
            critic1_opt: Adam::new(critic1.param_count(), cfg.lr),
            critic2_opt: Adam::new(critic2.param_count(), cfg.lr),
            actor_target: actor.clone(),
            critic1_target: critic1.clone(),
            critic2_target: critic2.clone(),
            actor,
            critic1,
            critic2,
            updates: 0,
            grads: Scratch::default(),
        }
    }

    pub fn act<R: Rng + ?Sized>(&self, obs: &[f64], noise_std: f64, rng: &mut R) -> Result<Vec<f64>> {
        select_action(&self.actor, obs, noise_std, rng)
    }

    /// Samples a minibatch and performs one TD3 update.
    pub fn update<R: Rng + ?Sized>(&mut self, buffer: &ReplayBuffer, rng: &mut R) -> Result<UpdateLosses> {
        let batch = buffer.sample(self.cfg.batch_size, rng)?;
        self.update_on_batch(&batch, rng)
    }

    /// TD3 update on a given minibatch. Critics regress toward the clipped
    /// double-Q target every call; every `policy_delay`-th call the actor
    /// ascends critic 1 and all targets are Polyak-averaged.
    pub fn update_on_batch<R: Rng + ?Sized>(&mut self, batch: &Batch, rng: &mut R) -> Result<UpdateLosses> {
        self.updates += 1;
        let b = batch.size;
        let (od, ad) = (self.obs_dim, self.act_dim);
        let cfg = self.cfg;

        let targets = self.td_targets(batch, rng)?;

        let critic_in = concat_rows(&batch.obs, od, &batch.actions, ad, b);
        let g = &mut self.grads.critic;
        let critic1_loss = regress(&mut self.critic1, &mut self.critic1_opt, &critic_in, &targets, b, g)?;
        let critic2_loss = regress(&mut self.critic2, &mut self.critic2_opt, &critic_in, &targets, b, g)?;

        let mut actor_loss = None;
        if self.updates % cfg.policy_delay == 0 {
            let actor_cache = self.actor.forward_batch(&batch.obs, b)?;
            let q_in = concat_rows(&batch.obs, od, actor_cache.output(), ad, b);
            let q_cache = self.critic1.forward_batch(&q_in, b)?;
            let q_mean = q_cache.output().iter().sum::<f64>() / b as f64;
            actor_loss = Some(-q_mean);

            let upstream = vec![-1.0 / b as f64; b];
            let scratch = zeroed(&mut self.grads.critic, self.critic1.param_count());
            let q_input_grad = self
                .critic1
                .backward(&q_cache, &upstream, scratch, true)?
                .expect("input gradient requested");
            let mut action_grad = Vec::with_capacity(b * ad);
            for row in q_input_grad.chunks_exact(od + ad) {
                action_grad.extend_from_slice(&row[od..]);
            }
            let actor_grad = zeroed(&mut self.grads.actor, self.actor.param_count());
            self.actor.backward(&actor_cache, &action_grad, actor_grad, false)?;
            self.actor_opt.step(self.actor.params_mut(), actor_grad);

            self.critic1_target.soft_update_from(&self.critic1, cfg.tau);
            self.critic2_target.soft_update_from(&self.critic2, cfg.tau);
            self.actor_target.soft_update_from(&self.actor, cfg.tau);
        }

        Ok(UpdateLosses {
            critic1: critic1_loss,
            critic2: critic2_loss,
            actor: actor_loss,
        })
    }

    /// `y = r + gamma * (1 - done) * min(Q1', Q2')` at smoothed target actions.
    pub fn td_targets<R: Rng + ?Sized>(&self, batch: &Batch, rng: &mut R) -> Result<Vec<f64>> {
        let b = batch.size;
        let (od, ad) = (self.obs_dim, self.act_dim);
        let cfg = &self.cfg;
        let mut next_actions = self.actor_target.forward_batch(&batch.next_obs, b)?.output().to_vec();
        for a in &mut next_actions {
            let n: f64 = StandardNormal.sample(rng);
            let noise = (cfg.policy_noise * n).clamp(-cfg.noise_clip, cfg.noise_clip);
            *a = (*a + noise).clamp(-1.0, 1.0);
        }
        let q_in = concat_rows(&batch.next_obs, od, &next_actions, ad, b);
        let q1 = self.critic1_target.forward_batch(&q_in, b)?;
        let q2 = self.critic2_target.forward_batch(&q_in, b)?;
        Ok(twin_targets(
            &batch.rewards,
            &batch.dones,
            q1.output(),
            q2.output(),
            cfg.gamma,
        ))
    }

    /// Mean squared TD error of both critics on a batch with fixed targets.
    pub fn critic_losses(&self, batch: &Batch, targets: &[f64]) -> Result<(f64, f64)> {
        let b = batch.size;
        let critic_in = concat_rows(&batch.obs, self.obs_dim, &batch.actions, self.act_dim, b);
        let mse = |net: &Mlp| -> Result<f64> {
            let q = net.forward_batch(&critic_in, b)?;
            Ok(q.output()
                .iter()
                .zip(targets)
                .map(|(q, y)| (q - y).powi(2))
                .sum::<f64>()
                / b as f64)
        };
        Ok((mse(&self.critic1)?, mse(&self.critic2)?))
    }

    /// Critic-only regression step toward fixed targets.
    pub fn critic_step(&mut self, batch: &Batch, targets: &[f64]) -> Result<(f64, f64)> {
        let b = batch.size;
        let critic_in = concat_rows(&batch.obs, self.obs_dim, &batch.actions, self.act_dim, b);
        let g = &mut self.grads.critic;
        let l1 = regress(&mut self.critic1, &mut self.critic1_opt, &critic_in, targets, b, g)?;
        let l2 = regress(&mut self.critic2, &mut self.critic2_opt, &critic_in, targets, b, g)?;
        Ok((l1, l2))
    }
}

pub fn twin_targets(rewards: &[f64], dones: &[f64], q1: &[f64], q2: &[f64], gamma: f64) -> Vec<f64> {
    rewards
        .iter()
        .zip(dones)
        .zip(q1.iter().zip(q2))
        .map(|((r, d), (a, b))| r + gamma * (1.0 - d) * a.min(*b))
        .collect()
}

fn regress(
    net: &mut Mlp,
    opt: &mut Adam,
    input: &[f64],
    targets: &[f64],
    b: usize,
    grad_buf: &mut Vec<f64>,
) -> Result<f64> {
    let cache = net.forward_batch(input, b)?;
    let q = cache.output();
    let mut loss = 0.0;
    let upstream: Vec<f64> = q
        .iter()
        .zip(targets)
        .map(|(q, y)| {
            let e = q - y;
            loss += e * e;
            2.0 * e / b as f64
        })
        .collect();
    let grad = zeroed(grad_buf, net.param_count());
    net.backward(&cache, &upstream, grad, false)?;
    opt.step(net.params_mut(), grad);
    Ok(loss / b as f64)
}
