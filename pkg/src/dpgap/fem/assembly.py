"""Energy, gradient, Hessian and linear-term assembly on the criss-cross mesh.

Conforming fields have a constant gradient per element, so their modular
terms collapse to one evaluation per element; enriched fields are integrated
at the quadrature points where the analytic enrichment gradient lives.
Summation orders are fixed (element order, then quadrature order) so repeated
runs are bit-identical.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..errors import EnergyOverflowError
from ..geometry import eval_b2
from .fields import DofField, EnrichedField, enrichment_quad_gradient

_GRAD_FLOOR = 1e-12

ANALYTIC = "analytic"
SOLENOIDAL_EXACT = "solenoidal_exact"


def _phase_weights(mesh, per_quad):
    return mesh.phase[mesh.qel] if per_quad else mesh.phase


def _field_parts(u):
    if isinstance(u, EnrichedField):
        return u.base, float(u.s)
    return u, None


def _split_pair(pair):
    """Accept a DoublePhase or a single phase-independent integrand."""
    if hasattr(pair, "phi") and hasattr(pair, "psi"):
        return pair.phi, pair.psi
    return pair, None


def _integrand_values(pair, t, a):
    phi, psi = _split_pair(pair)
    vals = np.asarray(phi(t))
    if psi is not None:
        vals = vals + a * np.asarray(psi(t))
    return vals


def _integrand_derivs(pair, t, a):
    """(kappa1, kappa2) = (Phi'', Phi'/t) with the small-t analytic limit."""
    phi, psi = _split_pair(pair)
    k2 = np.asarray(phi.deriv_ratio(t, floor=_GRAD_FLOOR))
    k1 = np.asarray(phi.second_deriv(t))
    if psi is not None:
        k2 = k2 + a * np.asarray(psi.deriv_ratio(t, floor=_GRAD_FLOOR))
        k1 = k1 + a * np.asarray(psi.second_deriv(t))
    return k1, k2


def modular_energy(u, pair, mesh=None):
    """Quadrature of phi(|grad u|) + a psi(|grad u|) over the mesh."""
    base, s = _field_parts(u)
    mesh = mesh or base.mesh
    if s is None:
        t = np.linalg.norm(base.element_gradients(), axis=1)
        vals = _integrand_values(pair, t, mesh.phase)
        total = float(np.sum(mesh.area * vals))
    else:
        g = base.quad_gradients() + s * enrichment_quad_gradient(mesh)
        t = np.linalg.norm(g, axis=1)
        vals = _integrand_values(pair, t, mesh.phase[mesh.qel])
        total = float(np.sum(mesh.qw * vals))
    if not np.isfinite(total):
        raise EnergyOverflowError("non-finite modular energy")
    return total


def modular_gradient(u, pair, mesh=None):
    """(nodal gradient (Nv,), d/ds or None) of the modular energy."""
    base, s = _field_parts(u)
    mesh = mesh or base.mesh
    nodal = np.zeros(mesh.n_vertices)
    if s is None:
        g = base.element_gradients()
        t = np.linalg.norm(g, axis=1)
        _, k2 = _integrand_derivs(pair, t, mesh.phase)
        m = (mesh.area * k2)[:, None] * g  # (Ne, 2)
        contrib = np.einsum("ejk,ek->ej", mesh.grad_basis, m)
        np.add.at(nodal, mesh.tris, contrib)
        return nodal, None
    ge = enrichment_quad_gradient(mesh)
    g = base.quad_gradients() + s * ge
    t = np.linalg.norm(g, axis=1)
    _, k2 = _integrand_derivs(pair, t, mesh.phase[mesh.qel])
    m = (mesh.qw * k2)[:, None] * g  # (Nq, 2)
    per_elem = np.zeros((mesh.n_elements, 2))
    np.add.at(per_elem, mesh.qel, m)
    contrib = np.einsum("ejk,ek->ej", mesh.grad_basis, per_elem)
    np.add.at(nodal, mesh.tris, contrib)
    s_grad = float(np.sum(m * ge))
    return nodal, s_grad


def modular_hessian(u, pair, mesh=None):
    """Sparse Hessian over nodal dofs (+ trailing s dof when enriched)."""
    base, s = _field_parts(u)
    mesh = mesh or base.mesh
    nv = mesh.n_vertices
    if s is None:
        g = base.element_gradients()
        t = np.linalg.norm(g, axis=1)
        k1, k2 = _integrand_derivs(pair, t, mesh.phase)
        w = mesh.area
        H = _pointwise_hessian(g, t, k1, k2)  # (Ne, 2, 2)
        B = mesh.grad_basis
        K = np.einsum("ejk,ekl,eml->ejm", B, H, B) * w[:, None, None]
        rows = np.repeat(mesh.tris, 3, axis=1).ravel()
        cols = np.tile(mesh.tris, (1, 3)).ravel()
        mat = sp.coo_matrix((K.ravel(), (rows, cols)), shape=(nv, nv))
        return mat.tocsr()
    ge = enrichment_quad_gradient(mesh)
    g = base.quad_gradients() + s * ge
    t = np.linalg.norm(g, axis=1)
    k1, k2 = _integrand_derivs(pair, t, mesh.phase[mesh.qel])
    H = _pointwise_hessian(g, t, k1, k2)  # (Nq, 2, 2)
    w = mesh.qw
    Hge = np.einsum("qkl,ql->qk", H, ge)
    # node-node block, accumulated per element in 2x2 form first
    M = np.zeros((mesh.n_elements, 2, 2))
    np.add.at(M, mesh.qel, H * w[:, None, None])
    B = mesh.grad_basis
    K = np.einsum("ejk,ekl,eml->ejm", B, M, B)
    rows = [np.repeat(mesh.tris, 3, axis=1).ravel()]
    cols = [np.tile(mesh.tris, (1, 3)).ravel()]
    vals = [K.ravel()]
    # node-s cross terms
    cross_e = np.zeros((mesh.n_elements, 2))
    np.add.at(cross_e, mesh.qel, w[:, None] * Hge)
    cross = np.einsum("ejk,ek->ej", B, cross_e)  # (Ne, 3)
    rows.append(mesh.tris.ravel())
    cols.append(np.full(mesh.tris.size, nv, dtype=np.int64))
    vals.append(cross.ravel())
    rows.append(np.full(mesh.tris.size, nv, dtype=np.int64))
    cols.append(mesh.tris.ravel())
    vals.append(cross.ravel())
    # s-s entry
    ss = float(np.sum(w * np.einsum("qk,qk->q", ge, Hge)))
    rows.append(np.array([nv]))
    cols.append(np.array([nv]))
    vals.append(np.array([ss]))
    mat = sp.coo_matrix((np.concatenate(vals),
                         (np.concatenate(rows), np.concatenate(cols))),
                        shape=(nv + 1, nv + 1))
    return mat.tocsr()


def _pointwise_hessian(g, t, k1, k2):
    """kappa2 I + (kappa1 - kappa2) ghat ghat^T, with ghat = 0 below the floor."""
    n = len(t)
    H = np.zeros((n, 2, 2))
    H[:, 0, 0] = k2
    H[:, 1, 1] = k2
    big = t > _GRAD_FLOOR
    ghat = np.zeros_like(g)
    ghat[big] = g[big] / t[big, None]
    d = (k1 - k2)
    H[:, 0, 0] += d * ghat[:, 0] ** 2
    H[:, 0, 1] += d * ghat[:, 0] * ghat[:, 1]
    H[:, 1, 0] = H[:, 0, 1]
    H[:, 1, 1] += d * ghat[:, 1] ** 2
    return H


def linear_term_vector(mesh, mode=ANALYTIC):
    """(L, L_s) with int b2 . grad u = L . values + L_s s for every field.

    ``analytic`` evaluates the solenoidal field b2 at the quadrature points.
    ``solenoidal_exact`` uses the identity int b2 . grad u = 0, valid for
    every continuous piecewise-linear u with zero boundary values (b2 is the
    perpendicular gradient of a bounded W^{1,1} stream function, hence
    distributionally divergence free, and such u are Lipschitz); only the
    enrichment pairing L_s is left to quadrature.
    """
    cache = getattr(mesh, "_linear_cache", None)
    if cache is None:
        cache = {}
        object.__setattr__(mesh, "_linear_cache", cache)
    if mode in cache:
        return cache[mode]
    ge = enrichment_quad_gradient(mesh)
    b = eval_b2(mesh.qpts[:, 0], mesh.qpts[:, 1]).T  # (Nq, 2)
    L_s = float(np.sum(mesh.qw * np.einsum("qk,qk->q", b, ge)))
    L = np.zeros(mesh.n_vertices)
    if mode == ANALYTIC:
        per_elem = np.zeros((mesh.n_elements, 2))
        np.add.at(per_elem, mesh.qel, mesh.qw[:, None] * b)
        contrib = np.einsum("ejk,ek->ej", mesh.grad_basis, per_elem)
        np.add.at(L, mesh.tris, contrib)
    elif mode != SOLENOIDAL_EXACT:
        raise ValueError(f"unknown linear-term mode: {mode}")
    cache[mode] = (L, L_s)
    return L, L_s


def linear_term(u, mesh=None, mode=ANALYTIC):
    base, s = _field_parts(u)
    mesh = mesh or base.mesh
    L, L_s = linear_term_vector(mesh, mode)
    val = float(L @ base.values)
    if s is not None:
        val += s * L_s
    return val


def functional_G(u, pair, mesh=None, mode=ANALYTIC):
    """G(u) = modular energy + int b2 . grad u."""
    base, _ = _field_parts(u)
    mesh = mesh or base.mesh
    return modular_energy(u, pair, mesh) + linear_term(u, mesh, mode)


def separating_functional(u, mesh=None, mode=ANALYTIC):
    """u -> int b2 . grad u; vanishes on conforming fields under refinement."""
    base, _ = _field_parts(u)
    mesh = mesh or base.mesh
    return linear_term(u, mesh, mode)
