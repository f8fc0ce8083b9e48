"""Pure numpy ADMM iteration kernel (fallback when the compiled one is absent).

Operates on the canonical form  min 1/2 x'Px + q'x  s.t.  l <= Ax <= u.
The compiled kernel in ``_admm.pyx`` implements the same recurrence; both
must stay interchangeable.
"""

import numpy as np

STATUS_MAX_ITER = 0
STATUS_SOLVED = 1
STATUS_PRIMAL_INFEASIBLE = 2
STATUS_DUAL_INFEASIBLE = 3


def _support(bound_u, bound_l, dy):
    """sum u*max(dy,0) + l*min(dy,0) with the convention inf * 0 = 0."""
    pos = np.maximum(dy, 0.0)
    neg = np.minimum(dy, 0.0)
    total = 0.0
    for b, w in ((bound_u, pos), (bound_l, neg)):
        active = w != 0.0
        if np.any(np.isinf(b[active])):
            return np.inf
        total += float(b[active] @ w[active])
    return total


def run(kinv, p_mat, q, a_mat, l, u, rho, sigma, alpha, x, z, y,
        max_iter, check_every, eps_abs, eps_rel, eps_inf):
    """Run over-relaxed ADMM; returns (x, z, y, status, iters, r_prim, r_dual)."""
    at = a_mat.T
    x = x.copy()
    z = z.copy()
    y = y.copy()
    y_chk = y.copy()
    x_chk = x.copy()
    r_prim = np.inf
    r_dual = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        rhs = sigma * x - q + at @ (rho * z - y)
        x_t = kinv @ rhs
        ax_t = a_mat @ x_t
        x = alpha * x_t + (1.0 - alpha) * x
        z_bar = alpha * ax_t + (1.0 - alpha) * z
        z_new = np.clip(z_bar + y / rho, l, u)
        y = y + rho * (z_bar - z_new)
        z = z_new

        if it % check_every == 0 or it == max_iter:
            ax = a_mat @ x
            px = p_mat @ x
            aty = at @ y
            r_prim = float(np.max(np.abs(ax - z), initial=0.0))
            r_dual = float(np.max(np.abs(px + q + aty), initial=0.0))
            eps_p = eps_abs + eps_rel * max(
                np.max(np.abs(ax), initial=0.0), np.max(np.abs(z), initial=0.0)
            )
            eps_d = eps_abs + eps_rel * max(
                np.max(np.abs(px), initial=0.0),
                np.max(np.abs(q), initial=0.0),
                np.max(np.abs(aty), initial=0.0),
            )
            if not np.all(np.isfinite(x)):
                return x, z, y, STATUS_MAX_ITER, it, r_prim, r_dual
            if r_prim <= eps_p and r_dual <= eps_d:
                return x, z, y, STATUS_SOLVED, it, r_prim, r_dual

            dy = y - y_chk
            ndy = np.max(np.abs(dy), initial=0.0)
            if ndy > 1e-12:
                if (
                    np.max(np.abs(at @ dy), initial=0.0) <= eps_inf * ndy
                    and _support(u, l, dy) <= -eps_inf * ndy
                ):
                    return x, z, y, STATUS_PRIMAL_INFEASIBLE, it, r_prim, r_dual
            dx = x - x_chk
            ndx = np.max(np.abs(dx), initial=0.0)
            if ndx > 1e-12 and float(q @ dx) < -eps_inf * ndx:
                adx = a_mat @ dx
                if (
                    np.max(np.abs(p_mat @ dx), initial=0.0) <= eps_inf * ndx
                    and np.all((adx <= eps_inf * ndx) | np.isinf(u))
                    and np.all((adx >= -eps_inf * ndx) | np.isinf(l))
                ):
                    return x, z, y, STATUS_DUAL_INFEASIBLE, it, r_prim, r_dual
            y_chk = y.copy()
            x_chk = x.copy()
    return x, z, y, STATUS_MAX_ITER, it, r_prim, r_dual
