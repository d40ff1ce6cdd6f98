# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the linear RL policies.

Loop-for-loop mirror of ``_kernels_py``; float64 operations run in the
same order so results are bit-identical to the pure-Python backend.
"""

from libc.math cimport exp, INFINITY

BACKEND = "cython"


def q_values(double[:, ::1] weights, Py_ssize_t[::1] active, double[::1] out):
    cdef Py_ssize_t a, k
    cdef double s
    cdef Py_ssize_t n_actions = weights.shape[0]
    cdef Py_ssize_t n_active = active.shape[0]
    for a in range(n_actions):
        s = 0.0
        for k in range(n_active):
            s += weights[a, active[k]]
        out[a] = s
    return out


def greedy_index(double[::1] values, Py_ssize_t n):
    cdef Py_ssize_t best = 0
    cdef double best_v = values[0]
    cdef Py_ssize_t i
    for i in range(1, n):
        if values[i] > best_v:
            best = i
            best_v = values[i]
    return best


def td_update(double[:, ::1] weights, Py_ssize_t[::1] active, Py_ssize_t action,
              double reward, Py_ssize_t[::1] next_active, double gamma,
              double alpha, bint done):
    cdef Py_ssize_t k, a
    cdef double q_sa = 0.0
    cdef Py_ssize_t n_active = active.shape[0]
    cdef Py_ssize_t n_next = next_active.shape[0]
    cdef Py_ssize_t n_actions = weights.shape[0]
    cdef double target, best, s, step, max_abs, v
    for k in range(n_active):
        q_sa += weights[action, active[k]]
    target = reward
    if not done:
        best = -INFINITY
        for a in range(n_actions):
            s = 0.0
            for k in range(n_next):
                s += weights[a, next_active[k]]
            if s > best:
                best = s
        target = reward + gamma * best
    step = alpha * (target - q_sa)
    max_abs = 0.0
    for k in range(n_active):
        weights[action, active[k]] += step
        v = weights[action, active[k]]
        if v < 0.0:
            v = -v
        if v > max_abs:
            max_abs = v
    return max_abs


def softmax_probs(double[:, ::1] weights, Py_ssize_t[::1] active, double[::1] out):
    cdef Py_ssize_t a, k
    cdef Py_ssize_t n_actions = weights.shape[0]
    cdef Py_ssize_t n_active = active.shape[0]
    cdef double s, m, z, e
    m = -INFINITY
    for a in range(n_actions):
        s = 0.0
        for k in range(n_active):
            s += weights[a, active[k]]
        out[a] = s
        if s > m:
            m = s
    z = 0.0
    for a in range(n_actions):
        e = exp(out[a] - m)
        out[a] = e
        z += e
    for a in range(n_actions):
        out[a] = out[a] / z
    return out


def policy_grad_accumulate(double[:, ::1] weights, double[:, ::1] grad,
                           Py_ssize_t[::1] active, Py_ssize_t action,
                           double advantage, double[::1] scratch):
    softmax_probs(weights, active, scratch)
    cdef Py_ssize_t a, k
    cdef Py_ssize_t n_actions = weights.shape[0]
    cdef Py_ssize_t n_active = active.shape[0]
    cdef double indicator, coef
    for a in range(n_actions):
        indicator = 1.0 if a == action else 0.0
        coef = advantage * (indicator - scratch[a])
        for k in range(n_active):
            grad[a, active[k]] += coef
