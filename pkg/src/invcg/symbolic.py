"""Turn sympy row expressions into vectorised numpy residuals and Jacobians."""

import numpy as np
import sympy as sp


def _filler(func, n_out):
    def evaluate(*args):
        shape = np.shape(args[0])
        out = np.empty((n_out,) + shape)
        for i, value in enumerate(func(*args)):
            out[i] = value
        return out

    return evaluate


def vectorize_exprs(args, exprs):
    """Lambdify ``exprs`` and return a callable producing an array of shape
    (len(exprs),) + shape(first argument); constant entries are broadcast."""
    exprs = [sp.sympify(e) for e in exprs]
    func = sp.lambdify(args, exprs, modules="numpy", cse=True)
    return _filler(func, len(exprs))


def rows_and_partials(t, u, ut, rows):
    """Residual callable and its closed-form partials w.r.t. u and u_t.

    Both callables take (t, U, Ut) with U, Ut of shape (n_eq, n_points).
    """
    u, ut = list(u), list(ut)
    n = len(rows)
    args = (t, *u, *ut)
    residual_fn = vectorize_exprs(args, rows)
    jac = sp.Matrix(rows).jacobian(u + ut)
    jac_fn = vectorize_exprs(args, list(jac))
    m = len(u)

    def residual(tt, uu, uut):
        return residual_fn(tt, *uu, *uut)

    def partials(tt, uu, uut):
        flat = jac_fn(tt, *uu, *uut).reshape((n, 2 * m) + np.shape(tt))
        return flat[:, :m], flat[:, m:]

    return residual, partials
