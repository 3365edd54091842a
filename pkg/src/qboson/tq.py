"""First-order functional-equation verification path.

Solves the first gamma-order of the polynomial relation

    T(x) Q(x) = e^{gamma N} Q(qx) + q^p (1-x)^N Q(x/q),   Q(1) = e^{gamma p},

around Q_0 = x^p, T_0 = q^p + (1-x)^N.  The degree-(p-1) polynomial B_1
is the truncation of -N (1-q)^p F(x/(1-q))^N / Z(N,p); its coefficients
determine Q_1 through b_i = (q^{p-i} - 1) q_i, and

    T_1(x) = N q^p + x^{-p} [ (1-x)^N B_1(x) - B_1(qx) ],

where the bracket is divisible by x^p exactly.  The checks are that the
first-order relation holds as an exact polynomial identity, that
Q_1(1) = p, and that the top coefficient q_{p-1} equals the mean current J.

Polynomials are dense coefficient vectors over backend scalars (degrees
stay below N + p, so sparsity is not worth anything here).
"""

from __future__ import annotations

from dataclasses import dataclass

from .numerics import Backend, InputError
from .stationary import ModelParams, compute_stationary


def poly_add(a: list, b: list, backend: Backend) -> list:
    n = max(len(a), len(b))
    zero = backend.integer(0)
    out = [zero] * n
    for i, c in enumerate(a):
        out[i] = out[i] + c
    for i, c in enumerate(b):
        out[i] = out[i] + c
    return out


def poly_scale(a: list, c) -> list:
    return [x * c for x in a]


def poly_mul(a: list, b: list, backend: Backend) -> list:
    zero = backend.integer(0)
    out = [zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def poly_scale_arg(a: list, c) -> list:
    """a(x) -> a(c x)."""
    out = []
    power = 1
    for k, coeff in enumerate(a):
        out.append(coeff * power if k else coeff)
        power = power * c
    return out


def poly_eval(a: list, x):
    acc = 0
    for coeff in reversed(a):
        acc = acc * x + coeff
    return acc


def one_minus_x_pow(N: int, backend: Backend) -> list:
    """(1 - x)^N as a coefficient vector."""
    from math import comb
    return [backend.integer((-1) ** k * comb(N, k)) for k in range(N + 1)]


@dataclass(frozen=True)
class TqFirstOrder:
    params: ModelParams
    Q0: tuple
    T0: tuple
    B1: tuple
    Q1: tuple
    T1: tuple
    lambda1: object
    J: object


def b1_polynomial(params: ModelParams, stat=None) -> list:
    """b_i = -N (1-q)^{p-i} C_i / Z(N,p), i = 0..p-1, C_i = [z^i] F^N."""
    params.q.require_series_regime("the first-order functional-equation step")
    backend = params.backend
    if stat is None:
        stat = compute_stationary(params)
    q = params.q.q
    N, p = params.N, params.p
    Zp = stat.Zvals[p]
    out = []
    for i in range(p):
        out.append(-N * (1 - q) ** (p - i) * stat.Fn.coeff(i) / Zp)
    return out


def q1_polynomial(b1: list, params: ModelParams) -> list:
    """q_i = b_i / (q^{p-i} - 1)."""
    q = params.q.q
    p = params.p
    out = []
    for i, b in enumerate(b1):
        denom = q ** (p - i) - 1
        if denom == 0:
            raise InputError(
                f"q^{p - i} = 1; the first-order construction is undefined "
                "at roots of unity")
        out.append(b / denom)
    return out


def t1_polynomial(b1: list, params: ModelParams) -> list:
    """T_1 = N q^p + x^{-p} [ (1-x)^N B_1(x) - B_1(qx) ].

    The bracket coefficients of x^0..x^{p-1} vanish identically; a nonzero
    one means the construction is broken, so it aborts rather than truncates.
    """
    backend = params.backend
    q = params.q.q
    N, p = params.N, params.p
    bracket = poly_add(poly_mul(one_minus_x_pow(N, backend), b1, backend),
                       poly_scale(poly_scale_arg(b1, q), backend.integer(-1)),
                       backend)
    for k in range(p):
        if not _is_negligible(bracket[k], backend):
            raise ArithmeticError(
                f"bracket coefficient of x^{k} is {bracket[k]}, expected 0; "
                "B_1 construction is inconsistent")
    t1 = [backend.integer(0)] * max(len(bracket) - p, 1)
    for k in range(p, len(bracket)):
        t1[k - p] = bracket[k]
    t1[0] = t1[0] + N * q ** p
    return t1


def _is_negligible(x, backend: Backend) -> bool:
    if backend.exact:
        return x == 0
    return abs(x) <= backend.integer(2) ** (-(backend.prec_bits // 2))


def build_first_order(params: ModelParams) -> TqFirstOrder:
    backend = params.backend
    with backend.workprec():
        stat = compute_stationary(params)
        N, p = params.N, params.p
        q = params.q.q
        b1 = b1_polynomial(params, stat)
        q1 = q1_polynomial(b1, params)
        t1 = t1_polynomial(b1, params)
        Q0 = [backend.integer(0)] * p + [backend.integer(1)]
        T0 = poly_add(one_minus_x_pow(N, backend), [q ** p], backend)
        lambda1 = q1[p - 1]
    return TqFirstOrder(params=params, Q0=tuple(Q0), T0=tuple(T0),
                        B1=tuple(b1), Q1=tuple(q1), T1=tuple(t1),
                        lambda1=lambda1, J=stat.J)


def verify_first_order(tq: TqFirstOrder) -> tuple[bool, list]:
    """Residual of T0 Q1 + T1 Q0 - Q1(qx) - N Q0(qx) - q^p (1-x)^N Q1(x/q).

    Returns (success, residual coefficients); success means an identically
    zero polynomial (exact backend) or all coefficients negligible (float).
    """
    params = tq.params
    backend = params.backend
    q = params.q.q
    N, p = params.N, params.p
    with backend.workprec():
        Q1 = list(tq.Q1)
        lhs = poly_add(poly_mul(list(tq.T0), Q1, backend),
                       poly_mul(list(tq.T1), list(tq.Q0), backend), backend)
        rhs = poly_scale_arg(Q1, q)
        rhs = poly_add(rhs, poly_scale(poly_scale_arg(list(tq.Q0), q),
                                       backend.integer(N)), backend)
        qinv = backend.integer(1) / q
        third = poly_mul(one_minus_x_pow(N, backend),
                         poly_scale_arg(Q1, qinv), backend)
        rhs = poly_add(rhs, poly_scale(third, q ** p), backend)
        residual = poly_add(lhs, poly_scale(rhs, backend.integer(-1)), backend)
        ok = all(_is_negligible(c, backend) for c in residual)
    return ok, residual
