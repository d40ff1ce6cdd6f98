"""Pure-Python kernels for the linear RL policies.

Reference implementation of the hot inner-loop math; the compiled
extension in ``_speedups.pyx`` mirrors these loops operation for
operation so both backends produce bit-identical float64 results.
"""

import math

BACKEND = "python"


def q_values(weights, active, out):
    """Per-action sums of the active weight columns (binary features)."""
    n_actions = weights.shape[0]
    for a in range(n_actions):
        row = weights[a]
        s = 0.0
        for i in active:
            s += row[i]
        out[a] = s
    return out


def greedy_index(values, n):
    """Argmax with ties broken toward the lowest index."""
    best = 0
    best_v = values[0]
    for i in range(1, n):
        if values[i] > best_v:
            best = i
            best_v = values[i]
    return best


def td_update(weights, active, action, reward, next_active, gamma, alpha, done):
    """One temporal-difference step on the chosen action's row.

    Returns the largest |weight| touched, for divergence checks.
    """
    q_sa = 0.0
    row = weights[action]
    for i in active:
        q_sa += row[i]
    target = reward
    if not done:
        best = -math.inf
        n_actions = weights.shape[0]
        for a in range(n_actions):
            other = weights[a]
            s = 0.0
            for i in next_active:
                s += other[i]
            if s > best:
                best = s
        target = reward + gamma * best
    step = alpha * (target - q_sa)
    max_abs = 0.0
    for i in active:
        row[i] += step
        v = row[i]
        if v < 0.0:
            v = -v
        if v > max_abs:
            max_abs = v
    return max_abs


def softmax_probs(weights, active, out):
    n_actions = weights.shape[0]
    m = -math.inf
    for a in range(n_actions):
        row = weights[a]
        s = 0.0
        for i in active:
            s += row[i]
        out[a] = s
        if s > m:
            m = s
    z = 0.0
    for a in range(n_actions):
        e = math.exp(out[a] - m)
        out[a] = e
        z += e
    for a in range(n_actions):
        out[a] = out[a] / z
    return out


def policy_grad_accumulate(weights, grad, active, action, advantage, scratch):
    """Add advantage * grad(log softmax(action)) to the gradient buffer."""
    softmax_probs(weights, active, scratch)
    n_actions = weights.shape[0]
    for a in range(n_actions):
        indicator = 1.0 if a == action else 0.0
        coef = advantage * (indicator - scratch[a])
        row = grad[a]
        for i in active:
            row[i] += coef
