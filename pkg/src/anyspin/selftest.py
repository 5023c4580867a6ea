"""Randomized residual suite for the group-theory layer."""
from __future__ import annotations

import numpy as np

from .angular import HalfInt, cg_matrix, wigner_d
from .lorentz import (
    METRIC,
    MassiveMomentum,
    MasslessMomentum,
    covering_map,
    random_sl2c,
    random_su2,
    shell_residual,
)

SPIN_TWICE = (1, 2, 3, 4, 5)


def representation_suite(n: int = 200, seed: int = 0) -> dict[str, float]:
    """Max residual of each property over n random draws."""
    rng = np.random.default_rng(seed)
    r = {k: 0.0 for k in ("wigner_hom", "covering_hom", "metric", "sign", "shell_canonical",
                          "shell_helicity", "shell_massless_helicity", "shell_wightman")}
    for i in range(n):
        j = HalfInt(SPIN_TWICE[i % len(SPIN_TWICE)])
        u1, u2 = random_su2(rng), random_su2(rng)
        r["wigner_hom"] = max(r["wigner_hom"], float(np.abs(wigner_d(j, u1 @ u2) - wigner_d(j, u1) @ wigner_d(j, u2)).max()))
        a, b = random_sl2c(rng), random_sl2c(rng)
        la, lb = covering_map(a), covering_map(b)
        r["covering_hom"] = max(r["covering_hom"], float(np.abs(covering_map(a @ b) - la @ lb).max() / max(1, np.abs(la @ lb).max())))
        r["metric"] = max(r["metric"], float(np.abs(la.T @ METRIC @ la - METRIC).max() / max(1, np.abs(la).max() ** 2)))
        r["sign"] = max(r["sign"], float(np.abs(covering_map(-a) - la).max()))
        p = rng.normal(size=3) * rng.uniform(0.1, 3)
        m = rng.uniform(0.3, 2)
        q = MassiveMomentum(m, p)
        scale = max(1.0, q.omega)
        r["shell_canonical"] = max(r["shell_canonical"], shell_residual(q, "canonical") / scale)
        r["shell_helicity"] = max(r["shell_helicity"], shell_residual(q, "helicity") / scale)
        k = MasslessMomentum(p if p[2] > -0.9 * np.linalg.norm(p) else -p)
        ks = max(1.0, k.omega)
        r["shell_massless_helicity"] = max(r["shell_massless_helicity"], shell_residual(k, "helicity") / ks)
        r["shell_wightman"] = max(r["shell_wightman"], shell_residual(k, "wightman") / ks)
    return r


def cg_suite(max_twice: int = 5) -> dict[str, float]:
    """Orthogonality of the CG transformation and the m-selection rule."""
    orth, sel = 0.0, 0.0
    for t1 in range(max_twice + 1):
        for t2 in range(max_twice + 1):
            j1, j2 = HalfInt(t1), HalfInt(t2)
            cols = []
            for tj in range(abs(t1 - t2), t1 + t2 + 1, 2):
                c = cg_matrix(j1, j2, HalfInt(tj))
                for a, m1 in enumerate(j1.projections()):
                    for b, m2 in enumerate(j2.projections()):
                        for k, m in enumerate(HalfInt(tj).projections()):
                            if m1.twice + m2.twice != m.twice:
                                sel = max(sel, abs(c[a, b, k]))
                cols.append(c.reshape(j1.dim() * j2.dim(), -1))
            U = np.concatenate(cols, axis=1)
            orth = max(orth, float(np.abs(U.T @ U - np.eye(U.shape[1])).max()),
                       float(np.abs(U @ U.T - np.eye(U.shape[0])).max()))
    return {"cg_orthogonality": orth, "cg_selection": sel}
