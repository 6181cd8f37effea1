"""Thresholding: connection matrices to binary or weighted networks.

Three binary families: a fixed cutoff (by value, edgewise significance, or
the minimum-connections-while-connected rule), a fixed average degree, and a
fixed edge density (directly or through a path-length exponent). Weighted
retention policies live here too.

Conventions shared by all selectors: the negative-entry policy is applied
first ("drop" ignores negatives, "absolute" ranks by magnitude); ties at a
cutoff break lexicographically by (i, j); "round" means half-up,
floor(x + 0.5).
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from .estimators import CORRELATION_MEASURES, ConnectionMatrix
from .networks import BinaryNetwork, WeightedNetwork


def _round_half_up(x):
    return int(np.floor(x + 0.5))


def _policy_values(cm, negatives):
    if negatives not in ("drop", "absolute"):
        raise ValueError(f"unknown negative policy {negatives!r}")
    vals = cm.values.copy()
    if negatives == "absolute":
        vals = np.abs(vals)
    return vals


def _ranked_pairs(vals, n):
    """All i<j pairs sorted by value desc, ties by (i, j) lexicographic."""
    iu, ju = np.triu_indices(n, 1)
    w = vals[iu, ju]
    order = np.lexsort((ju, iu, -w))
    return iu[order], ju[order], w[order]


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.groups = n

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb
            self.groups -= 1
            return True
        return False


def _correlation_pvalues(cm, series_length):
    if cm.measure not in CORRELATION_MEASURES:
        raise ValueError(
            f"significance thresholding needs a correlation-family matrix, got {cm.measure!r}"
        )
    if series_length is None or series_length <= 3:
        raise ValueError("significance thresholding needs series_length > 3")
    r = np.clip(cm.values, -1 + 1e-15, 1 - 1e-15)
    t = r * np.sqrt((series_length - 2) / (1.0 - r**2))
    return 2.0 * stats.t.sf(np.abs(t), series_length - 2)


def _bh_adjust(p):
    """Benjamini-Hochberg step-up adjusted p-values (monotone in p-rank)."""
    p = np.asarray(p, dtype=float)
    m = p.size
    order = np.argsort(p, kind="stable")
    scaled = p[order] * m / np.arange(1, m + 1)
    q = np.minimum.accumulate(scaled[::-1])[::-1]
    out = np.empty(m)
    out[order] = np.minimum(q, 1.0)
    return out


def apply_fixed_threshold(
    cm,
    criterion="value",
    tau=None,
    alpha=0.05,
    correction="bonferroni",
    series_length=None,
    negatives="drop",
):
    """Binary network from a single cutoff rule.

    criterion "value": edge iff entry > tau.
    criterion "significance": edge iff corrected p < alpha, with the entry
    treated as a correlation from series_length samples and tested through
    the t transform r * sqrt((T - 2) / (1 - r^2)); correction is
    "bonferroni" or "bh-fdr".
    criterion "min_connected": the sparsest value cutoff keeping all n nodes
    in one connected component; edges are all entries >= the connecting
    weight.
    """
    n = cm.n
    vals = _policy_values(cm, negatives)
    iu, ju = np.triu_indices(n, 1)

    if criterion == "value":
        if tau is None:
            raise ValueError("criterion 'value' needs tau")
        mask = vals[iu, ju] > tau
        meta = {"threshold": {"criterion": "value", "tau": tau, "negatives": negatives}}
    elif criterion == "significance":
        pv = _correlation_pvalues(cm, series_length)[iu, ju]
        if negatives == "drop":
            sign_ok = cm.values[iu, ju] > 0
        else:
            sign_ok = np.ones(pv.size, dtype=bool)
        if correction == "bonferroni":
            q = np.minimum(pv * pv.size, 1.0)
        elif correction == "bh-fdr":
            q = _bh_adjust(pv)
        elif correction in (None, "none"):
            q = pv
        else:
            raise ValueError(f"unknown correction {correction!r}")
        mask = (q < alpha) & sign_ok
        meta = {
            "threshold": {
                "criterion": "significance",
                "alpha": alpha,
                "correction": correction or "none",
                "series_length": series_length,
                "negatives": negatives,
            }
        }
    elif criterion == "min_connected":
        ii, jj, w = _ranked_pairs(vals, n)
        usable = w > 0 if negatives == "drop" else np.ones(w.size, dtype=bool)
        uf = _UnionFind(n)
        w_connect = None
        for a, b, wt, ok in zip(ii, jj, w, usable):
            if not ok:
                break
            uf.union(int(a), int(b))
            if uf.groups == 1:
                w_connect = wt
                break
        if w_connect is None:
            raise ValueError(
                "min_connected impossible: graph cannot be connected under the "
                f"'{negatives}' negative policy"
            )
        mask = vals[iu, ju] >= w_connect
        if negatives == "drop":
            mask &= vals[iu, ju] > 0
        meta = {
            "threshold": {
                "criterion": "min_connected",
                "connecting_weight": float(w_connect),
                "negatives": negatives,
            }
        }
    else:
        raise ValueError(f"unknown criterion {criterion!r}")

    edges = list(zip(iu[mask].tolist(), ju[mask].tolist()))
    return BinaryNetwork(n, edges, meta)


def apply_fixed_degree(cm, k_target, negatives="drop"):
    """Keep exactly round(n * k_target / 2) top-ranked entries.

    k_target is the desired mean degree and may be fractional.
    """
    n = cm.n
    E = _round_half_up(n * k_target / 2.0)
    max_edges = n * (n - 1) // 2
    if E > max_edges:
        raise ValueError(f"target edge count {E} exceeds possible {max_edges}")
    ii, jj, w = _ranked_pairs(_policy_values(cm, negatives), n)
    edges = list(zip(ii[:E].tolist(), jj[:E].tolist()))
    return BinaryNetwork(
        n,
        edges,
        {"threshold": {"criterion": "fixed_degree", "k_target": k_target, "negatives": negatives}},
    )


def apply_fixed_density(cm, density=None, path_exponent=None, negatives="drop"):
    """Keep a fixed fraction of possible edges, or match a path-length exponent.

    With path_exponent S, the implied mean degree is k = n**(1/S) (from
    n = k**S) and the fixed-degree rule applies.
    """
    n = cm.n
    if (density is None) == (path_exponent is None):
        raise ValueError("give exactly one of density or path_exponent")
    if density is not None:
        if not 0 < density <= 1:
            raise ValueError("density must be in (0, 1]")
        E = _round_half_up(density * n * (n - 1) / 2.0)
        ii, jj, _ = _ranked_pairs(_policy_values(cm, negatives), n)
        edges = list(zip(ii[:E].tolist(), jj[:E].tolist()))
        return BinaryNetwork(
            n,
            edges,
            {"threshold": {"criterion": "fixed_density", "density": density, "negatives": negatives}},
        )
    S = float(path_exponent)
    if S <= 1:
        raise ValueError("path_exponent must be > 1")
    k = n ** (1.0 / S)
    if k >= n:
        raise ValueError(f"implied mean degree {k:.3g} not below n={n}")
    net = apply_fixed_degree(cm, k, negatives=negatives)
    net.meta = {
        "threshold": {
            "criterion": "fixed_density",
            "path_exponent": S,
            "implied_k": k,
            "negatives": negatives,
        }
    }
    return net


def weighted_network(cm, policy="keep_positive", tau=None):
    """Weighted network retaining connection strengths.

    policy "keep_positive" drops non-positive entries, "absolute" keeps
    magnitudes, "threshold_then_keep" keeps original weights above tau.
    """
    n = cm.n
    iu, ju = np.triu_indices(n, 1)
    w = cm.values[iu, ju]
    if policy == "keep_positive":
        mask = w > 0
        kept = w
    elif policy == "absolute":
        kept = np.abs(w)
        mask = kept > 0
    elif policy == "threshold_then_keep":
        if tau is None:
            raise ValueError("threshold_then_keep needs tau")
        mask = w > tau
        kept = w
        if np.any(mask & (kept <= 0)):
            raise ValueError("threshold_then_keep with tau <= 0 would retain non-positive weights")
    else:
        raise ValueError(f"unknown policy {policy!r}")
    if not np.any(mask):
        raise ValueError(f"policy {policy!r} eliminated every weight")
    triples = list(zip(iu[mask].tolist(), ju[mask].tolist(), kept[mask].tolist()))
    return WeightedNetwork(n, triples, {"weights": {"policy": policy, "tau": tau}})


THRESHOLD_METHODS = ("fixed_threshold", "fixed_degree", "fixed_density", "weighted")


def apply_spec(cm, spec):
    """Dispatch a thresholding spec dict {"method": ..., **kwargs}."""
    spec = dict(spec)
    method = spec.pop("method", None)
    if method == "fixed_threshold":
        return apply_fixed_threshold(cm, **spec)
    if method == "fixed_degree":
        return apply_fixed_degree(cm, **spec)
    if method == "fixed_density":
        return apply_fixed_density(cm, **spec)
    if method == "weighted":
        return weighted_network(cm, **spec)
    raise ValueError(f"unknown threshold method {method!r}; choose from {THRESHOLD_METHODS}")
