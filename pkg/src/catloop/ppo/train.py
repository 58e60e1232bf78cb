"""Vectorized rollout collection, the training loop, and checkpoints."""
from __future__ import annotations

import json
import os
import time
from collections import deque

import numpy as np

from ..env import EnvConfig, LoopEnv
from .adam import AdamOptimizer
from .agent import ActorCritic, PpoHyperparams, ppo_update
from .gae import compute_gae


class VectorEnvs:
    """Synchronous bundle of independent environments with private rng streams."""

    def __init__(self, config, n_envs, master_seed):
        seqs = np.random.SeedSequence(master_seed).spawn(n_envs)
        self.envs = [LoopEnv(config, np.random.default_rng(s)) for s in seqs]
        self.config = config

    def reset_all(self):
        return np.stack([env.reset() for env in self.envs])

    def step(self, actions):
        obs, rewards, dones, infos = [], [], [], []
        for env, act in zip(self.envs, actions):
            o, r, d, info = env.step(act)
            if d:
                info["episode"] = env.record.to_dict()
                o = env.reset()
            obs.append(o)
            rewards.append(r)
            dones.append(d)
            infos.append(info)
        return np.stack(obs), np.array(rewards), np.array(dones, dtype=bool), infos

    def snapshots(self):
        return [env.get_state() for env in self.envs]

    def restore(self, snaps):
        for env, snap in zip(self.envs, snaps):
            env.set_state(snap)


def save_checkpoint(path, agent, optimizer, hp, env_config, global_step,
                    sampler_rng, shuffle_rng, env_snaps=None):
    """Single-file npz checkpoint: weights, moments, hyperparams, rng states."""
    arrays = {}
    for i, p in enumerate(agent.parameters()):
        arrays[f"param_{i}"] = p
    opt = optimizer.state_dict()
    for i, m in enumerate(opt["m"]):
        arrays[f"adam_m_{i}"] = m
    for i, v in enumerate(opt["v"]):
        arrays[f"adam_v_{i}"] = v
    meta = {
        "version": 1,
        "global_step": int(global_step),
        "adam_t": opt["t"],
        "hyperparams": hp.to_dict(),
        "env_config": env_config.to_dict(),
        "action_low": list(map(float, agent.low)),
        "action_high": list(map(float, agent.high)),
        "obs_dim": agent.obs_dim,
        "sampler_rng": sampler_rng.bit_generator.state,
        "shuffle_rng": shuffle_rng.bit_generator.state,
    }
    if env_snaps is not None:
        meta["env_snaps"] = [_snap_to_json(s) for s in env_snaps]
        for i, s in enumerate(env_snaps):
            arrays[f"env_array_{i}"] = s["array"]
    arrays["meta_json"] = np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8)
    np.savez(path, **arrays)


def _snap_to_json(snap):
    out = dict(snap)
    out.pop("array")
    return out


def load_checkpoint(path):
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(bytes(data["meta_json"]).decode())
        if meta["version"] != 1:
            raise ValueError(f"unsupported checkpoint version {meta['version']}")
        hp = PpoHyperparams(**{**meta["hyperparams"],
                               "hidden_sizes": tuple(meta["hyperparams"]["hidden_sizes"])})
        env_config = EnvConfig(**meta["env_config"])
        rng = np.random.default_rng(0)
        agent = ActorCritic(meta["obs_dim"], meta["action_low"], meta["action_high"], hp, rng)
        params = []
        i = 0
        while f"param_{i}" in data:
            params.append(data[f"param_{i}"])
            i += 1
        agent.set_parameters(params)
        optimizer = AdamOptimizer(agent.parameters(), lr=hp.learning_rate)
        m, v, i = [], [], 0
        while f"adam_m_{i}" in data:
            m.append(data[f"adam_m_{i}"])
            v.append(data[f"adam_v_{i}"])
            i += 1
        optimizer.load_state_dict({"t": meta["adam_t"], "m": m, "v": v})
        sampler_rng = np.random.default_rng(0)
        sampler_rng.bit_generator.state = meta["sampler_rng"]
        shuffle_rng = np.random.default_rng(0)
        shuffle_rng.bit_generator.state = meta["shuffle_rng"]
        env_snaps = None
        if "env_snaps" in meta:
            env_snaps = []
            for i, s in enumerate(meta["env_snaps"]):
                s = dict(s)
                s["array"] = data[f"env_array_{i}"]
                env_snaps.append(s)
    return {"agent": agent, "optimizer": optimizer, "hp": hp, "env_config": env_config,
            "global_step": meta["global_step"], "sampler_rng": sampler_rng,
            "shuffle_rng": shuffle_rng, "env_snaps": env_snaps}


def collect_rollout(vec, agent, hp, sampler_rng, obs):
    """Gather hp.rollout_steps transitions from every env with the current policy."""
    t_len, n_env = hp.rollout_steps, len(vec.envs)
    buf = {
        "obs": np.zeros((t_len, n_env, agent.obs_dim)),
        "z": np.zeros((t_len, n_env, agent.action_dim)),
        "logp": np.zeros((t_len, n_env)),
        "values": np.zeros((t_len, n_env)),
        "rewards": np.zeros((t_len, n_env)),
        "dones": np.zeros((t_len, n_env)),
    }
    finished = []
    for t in range(t_len):
        action, z, logp, value = agent.sample(obs, sampler_rng)
        buf["obs"][t] = obs
        buf["z"][t] = z
        buf["logp"][t] = logp
        buf["values"][t] = value
        obs, rewards, dones, infos = vec.step(action)
        buf["rewards"][t] = rewards
        buf["dones"][t] = dones.astype(float)
        finished.extend(info["episode"] for info in infos if "episode" in info)
    last_values = agent.value.forward(obs)[:, 0]
    return buf, obs, last_values, finished


def train(env_config, hp, out_dir, master_seed=0, checkpoint_every=20,
          log_every=1, resume_from=None, on_iteration=None):
    """Train PPO on the loop environment; writes curve CSV and checkpoints.

    Returns a dict with the agent, the curve rows, and file paths. The curve
    CSV columns are (global_step, mean_reward, mean_fidelity, entropy,
    clip_fraction) where the means run over the trailing 100 finished
    episodes (total episode reward and best in-episode fidelity).
    """
    os.makedirs(out_dir, exist_ok=True)
    curve_path = os.path.join(out_dir, "training_curve.csv")

    if resume_from:
        state = load_checkpoint(resume_from)
        agent, optimizer, hp, env_config = (state["agent"], state["optimizer"],
                                            state["hp"], state["env_config"])
        sampler_rng, shuffle_rng = state["sampler_rng"], state["shuffle_rng"]
        global_step = state["global_step"]
        vec = VectorEnvs(env_config, hp.n_envs, master_seed)
        obs = vec.reset_all()
        if state["env_snaps"] is not None:
            vec.restore(state["env_snaps"])
            obs = np.stack([env.observation() for env in vec.envs])
        curve_mode = "a"
    else:
        ss = np.random.SeedSequence(master_seed)
        net_rng, sampler_rng, shuffle_rng = [np.random.default_rng(s) for s in ss.spawn(3)]
        vec = VectorEnvs(env_config, hp.n_envs, master_seed + 1)
        agent = ActorCritic(env_config.obs_dim, [env_config.r_min, env_config.tau_min],
                            [env_config.r_max, env_config.tau_max], hp, net_rng)
        optimizer = AdamOptimizer(agent.parameters(), lr=hp.learning_rate)
        global_step = 0
        obs = vec.reset_all()
        curve_mode = "w"

    ep_rewards = deque(maxlen=100)
    ep_fids = deque(maxlen=100)
    curve_rows = []
    t_start = time.time()
    iteration = 0
    with open(curve_path, curve_mode) as curve:
        if curve_mode == "w":
            curve.write("global_step,mean_reward,mean_fidelity,entropy,clip_fraction\n")
        while global_step < hp.total_steps:
            buf, obs, last_values, finished = collect_rollout(vec, agent, hp, sampler_rng, obs)
            for ep in finished:
                ep_rewards.append(sum(step[3] for step in ep["sequence"]))
                ep_fids.append(ep["best_fidelity"])
            adv, rets = compute_gae(buf["rewards"], buf["values"], buf["dones"],
                                    last_values, hp.gamma, hp.gae_lambda)
            batch = {
                "obs": buf["obs"].reshape(-1, agent.obs_dim),
                "z": buf["z"].reshape(-1, agent.action_dim),
                "logp": buf["logp"].reshape(-1),
                "advantages": adv.reshape(-1),
                "returns": rets.reshape(-1),
            }
            metrics = ppo_update(agent, optimizer, batch, hp, shuffle_rng)
            global_step += hp.rollout_steps * hp.n_envs
            iteration += 1
            if iteration % log_every == 0:
                row = (global_step,
                       float(np.mean(ep_rewards)) if ep_rewards else 0.0,
                       float(np.mean(ep_fids)) if ep_fids else 0.0,
                       metrics["entropy"], metrics["clip_fraction"])
                curve_rows.append(row)
                curve.write(",".join(repr(x) for x in row) + "\n")
                curve.flush()
            if checkpoint_every and iteration % checkpoint_every == 0:
                save_checkpoint(os.path.join(out_dir, f"checkpoint_{global_step:010d}.npz"),
                                agent, optimizer, hp, env_config, global_step,
                                sampler_rng, shuffle_rng, vec.snapshots())
            if on_iteration is not None:
                on_iteration(iteration, global_step, metrics)
    final_path = os.path.join(out_dir, "checkpoint_final.npz")
    save_checkpoint(final_path, agent, optimizer, hp, env_config, global_step,
                    sampler_rng, shuffle_rng, vec.snapshots())
    return {"agent": agent, "hp": hp, "env_config": env_config, "curve": curve_rows,
            "curve_path": curve_path, "final_checkpoint": final_path,
            "wall_seconds": time.time() - t_start}
