import numpy as np

from catloop.ppo.gae import compute_gae, normalize_advantages


def test_lambda_zero_is_one_step_td():
    rng = np.random.default_rng(0)
    t_len, n = 6, 2
    rewards = rng.random((t_len, n))
    values = rng.random((t_len, n))
    dones = np.zeros((t_len, n))
    last = rng.random(n)
    adv, rets = compute_gae(rewards, values, dones, last, gamma=0.9, lam=0.0)
    next_v = np.vstack([values[1:], last[None, :]])
    expected = rewards + 0.9 * next_v - values
    assert np.allclose(adv, expected)
    assert np.allclose(rets, adv + values)


def test_lambda_one_gamma_one_zero_values_is_reward_to_go():
    rewards = np.array([[1.0], [2.0], [3.0]])
    values = np.zeros((3, 1))
    dones = np.zeros((3, 1)); dones[-1] = 1.0
    adv, _ = compute_gae(rewards, values, dones, np.zeros(1), gamma=1.0, lam=1.0)
    assert np.allclose(adv[:, 0], [6.0, 5.0, 3.0])


def test_single_step_to_done():
    adv, rets = compute_gae(np.array([[1.0]]), np.zeros((1, 1)), np.array([[1.0]]),
                            np.array([123.0]), gamma=0.99, lam=0.95)
    assert abs(adv[0, 0] - 1.0) < 1e-12
    assert abs(rets[0, 0] - 1.0) < 1e-12


def test_done_masks_bootstrap():
    rewards = np.array([[1.0], [1.0]])
    values = np.array([[0.5], [0.5]])
    dones = np.array([[1.0], [0.0]])
    last = np.array([10.0])
    adv, _ = compute_gae(rewards, values, dones, last, gamma=0.9, lam=0.9)
    # step 0 episode ended: advantage ignores the later value/rewards
    assert abs(adv[0, 0] - (1.0 - 0.5)) < 1e-12


def test_normalize_advantages():
    rng = np.random.default_rng(1)
    adv = rng.random(100) * 5 + 3
    out = normalize_advantages(adv)
    assert abs(out.mean()) < 1e-12
    assert abs(out.std() - 1.0) < 1e-12
    # degenerate batch passes through unscaled
    flat = np.full(10, 0.7)
    out2 = normalize_advantages(flat)
    assert np.max(np.abs(out2)) < 1e-12 or np.allclose(out2, flat)
