"""
Compiled kernels for the quadrotor / n-link chain model.

Flat state layout (length 12 + 6n):
    [r_q(3), v_q(3), q_1..q_n(3n), w_1..w_n(3n), euler(3), body_rates(3)]

Generalized velocity X = [v_q, w_1..w_n] has dimension d = 3 + 3n. Mass sums:
M_T = m_q + sum(m), M_qi = sum(m[i:]), M_cij = M_q[max(i, j)].
"""

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_ILL_CONDITIONED = 1
STATUS_NOT_POSITIVE = 2


@njit(cache=True)
def hat3(v):
    m = np.zeros((3, 3))
    m[0, 1] = -v[2]
    m[0, 2] = v[1]
    m[1, 0] = v[2]
    m[1, 2] = -v[0]
    m[2, 0] = -v[1]
    m[2, 1] = v[0]
    return m


@njit(cache=True)
def cross3(a, b):
    out = np.empty(3)
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


@njit(cache=True)
def dot3(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


@njit(cache=True)
def tail_masses(masses):
    n = masses.shape[0]
    tail = np.empty(n)
    acc = 0.0
    for i in range(n - 1, -1, -1):
        acc += masses[i]
        tail[i] = acc
    return tail


@njit(cache=True)
def assemble_mass_matrix(q, m_q, masses, lengths):
    n = q.shape[0]
    d = 3 + 3 * n
    M = np.zeros((d, d))
    tail = tail_masses(masses)
    total = m_q + tail[0]
    for k in range(3):
        M[k, k] = total
    for i in range(n):
        qi_hat = hat3(q[i])
        coupling = tail[i] * lengths[i]
        ri = 3 + 3 * i
        for a in range(3):
            for b in range(3):
                M[a, ri + b] = -coupling * qi_hat[a, b]
                M[ri + a, b] = coupling * qi_hat[a, b]
        for j in range(n):
            rj = 3 + 3 * j
            if i == j:
                for a in range(3):
                    M[ri + a, ri + a] = tail[i] * lengths[i] * lengths[i]
            else:
                weight = tail[max(i, j)] * lengths[i] * lengths[j]
                prod = np.dot(qi_hat, hat3(q[j]))
                for a in range(3):
                    for b in range(3):
                        M[ri + a, rj + b] = -weight * prod[a, b]
    return M


@njit(cache=True)
def coriolis_vector(q, w, m_q, masses, lengths, g):
    n = q.shape[0]
    d = 3 + 3 * n
    C = np.zeros(d)
    tail = tail_masses(masses)
    total = m_q + tail[0]
    e3 = np.zeros(3)
    e3[2] = 1.0
    sq = np.empty(n)
    for i in range(n):
        sq[i] = dot3(w[i], w[i])
        for k in range(3):
            C[k] -= tail[i] * lengths[i] * sq[i] * q[i, k]
    C[2] -= total * g
    for i in range(n):
        acc = np.zeros(3)
        for j in range(n):
            if j != i:
                cq = cross3(q[i], q[j])
                weight = tail[max(i, j)] * lengths[i] * lengths[j] * sq[j]
                for k in range(3):
                    acc[k] += weight * cq[k]
        ce = cross3(q[i], e3)
        for k in range(3):
            acc[k] += tail[i] * g * lengths[i] * ce[k]
        ri = 3 + 3 * i
        for k in range(3):
            C[ri + k] = -acc[k]
    return C


@njit(cache=True)
def cholesky_solve(A, b, cond_limit):
    """Solve A x = b for symmetric positive definite A.

    Returns (x, cond, status). cond is the 2-norm condition number, the ratio of
    the extreme eigenvalues of A.
    """
    x = np.zeros(b.shape[0])
    eig = np.linalg.eigvalsh(A)
    if not eig[0] > 0.0:
        return x, np.inf, STATUS_NOT_POSITIVE
    cond = eig[-1] / eig[0]
    if not np.isfinite(cond) or cond > cond_limit:
        return x, cond, STATUS_ILL_CONDITIONED
    L = np.linalg.cholesky(A)
    y = np.linalg.solve(L, b)
    x = np.linalg.solve(np.ascontiguousarray(L.T), y)
    return x, cond, STATUS_OK


@njit(cache=True)
def rotation_zyx(phi, theta, psi):
    cf, sf = np.cos(phi), np.sin(phi)
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(psi), np.sin(psi)
    R = np.empty((3, 3))
    R[0, 0] = cp * ct
    R[0, 1] = cp * st * sf - sp * cf
    R[0, 2] = cp * st * cf + sp * sf
    R[1, 0] = sp * ct
    R[1, 1] = sp * st * sf + cp * cf
    R[1, 2] = sp * st * cf - cp * sf
    R[2, 0] = -st
    R[2, 1] = ct * sf
    R[2, 2] = ct * cf
    return R


@njit(cache=True)
def euler_rates(phi, theta, rates):
    cf, sf = np.cos(phi), np.sin(phi)
    ct, tt = np.cos(theta), np.tan(theta)
    out = np.empty(3)
    out[0] = rates[0] + sf * tt * rates[1] + cf * tt * rates[2]
    out[1] = cf * rates[1] - sf * rates[2]
    out[2] = (sf * rates[1] + cf * rates[2]) / ct
    return out


@njit(cache=True)
def unpack_links(y, n):
    q = np.empty((n, 3))
    w = np.empty((n, 3))
    for i in range(n):
        for k in range(3):
            q[i, k] = y[6 + 3 * i + k]
            w[i, k] = y[6 + 3 * n + 3 * i + k]
    return q, w


@njit(cache=True)
def generalized_force(euler, thrust, f_dis, n):
    T = np.zeros(3 + 3 * n)
    R = rotation_zyx(euler[0], euler[1], euler[2])
    for k in range(3):
        T[k] = -thrust * R[k, 2] + f_dis[k]
    return T


@njit(cache=True)
def derivative(y, n, m_q, masses, lengths, g, J, J_inv, thrust, torque, f_dis, tau_dis, cond_limit):
    q, w = unpack_links(y, n)
    base = 6 + 6 * n
    euler = y[base:base + 3].copy()
    rates = y[base + 3:base + 6].copy()

    M = assemble_mass_matrix(q, m_q, masses, lengths)
    C = coriolis_vector(q, w, m_q, masses, lengths, g)
    T = generalized_force(euler, thrust, f_dis, n)
    xdot, cond, status = cholesky_solve(M, T - C, cond_limit)

    dy = np.zeros(y.shape[0])
    for k in range(3):
        dy[k] = y[3 + k]
        dy[3 + k] = xdot[k]
    for i in range(n):
        qdot = cross3(w[i], q[i])
        for k in range(3):
            dy[6 + 3 * i + k] = qdot[k]
            dy[6 + 3 * n + 3 * i + k] = xdot[3 + 3 * i + k]

    er = euler_rates(euler[0], euler[1], rates)
    gyro = cross3(rates, np.dot(J, rates))
    moment = np.empty(3)
    for k in range(3):
        moment[k] = torque[k] + tau_dis[k] - gyro[k]
    rdot = np.dot(J_inv, moment)
    for k in range(3):
        dy[base + k] = er[k]
        dy[base + 3 + k] = rdot[k]
    return dy, status, cond


@njit(cache=True)
def project_links(y, n):
    """Renormalize each q_i and remove the component of w_i along q_i"""
    for i in range(n):
        qi = 6 + 3 * i
        wi = 6 + 3 * n + 3 * i
        norm = np.sqrt(y[qi] ** 2 + y[qi + 1] ** 2 + y[qi + 2] ** 2)
        for k in range(3):
            y[qi + k] /= norm
        along = y[qi] * y[wi] + y[qi + 1] * y[wi + 1] + y[qi + 2] * y[wi + 2]
        for k in range(3):
            y[wi + k] -= along * y[qi + k]
    return y


@njit(cache=True)
def rk4_step(y, dt, n, m_q, masses, lengths, g, J, J_inv, thrust, torque, f_dis, tau_dis, cond_limit):
    k1, s1, c1 = derivative(y, n, m_q, masses, lengths, g, J, J_inv,
                            thrust, torque, f_dis, tau_dis, cond_limit)
    if s1 != STATUS_OK:
        return y.copy(), s1, c1
    k2, s2, c2 = derivative(y + 0.5 * dt * k1, n, m_q, masses, lengths, g, J, J_inv,
                            thrust, torque, f_dis, tau_dis, cond_limit)
    if s2 != STATUS_OK:
        return y.copy(), s2, c2
    k3, s3, c3 = derivative(y + 0.5 * dt * k2, n, m_q, masses, lengths, g, J, J_inv,
                            thrust, torque, f_dis, tau_dis, cond_limit)
    if s3 != STATUS_OK:
        return y.copy(), s3, c3
    k4, s4, c4 = derivative(y + dt * k3, n, m_q, masses, lengths, g, J, J_inv,
                            thrust, torque, f_dis, tau_dis, cond_limit)
    if s4 != STATUS_OK:
        return y.copy(), s4, c4
    out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return project_links(out, n), STATUS_OK, max(max(c1, c2), max(c3, c4))
