"""Fast exact-oracle checks run by ``parkfun selftest``."""

from __future__ import annotations

import numpy as np

from . import walks
from .cayley import CayleyTree, enumerate_trees, prufer_decode, prufer_encode, bfs_ranks, tree_to_parking
from .parking import enumerate_parking, oracle_joint_pmf

FIGURE1_PARENTS = {1: 3, 2: 3, 3: 0, 4: 0, 5: 3, 6: 0, 7: 8, 8: 6, 9: 8}
FIGURE1_CODE = (8, 8, 6, 0, 3, 0, 3, 3)
FIGURE1_PLACES = (2, 2, 1, 1, 2, 1, 8, 4, 8)


def check_figure1() -> tuple[bool, str]:
    t = CayleyTree.from_parent_map(FIGURE1_PARENTS)
    code = prufer_encode(t).code
    ok = (
        code == FIGURE1_CODE
        and prufer_decode(code) == t
        and bfs_ranks(t).parent_rank[5] == 2
        and tree_to_parking(t).places == FIGURE1_PLACES
    )
    return ok, f"code={code}"


def check_bijection(max_n: int = 4) -> tuple[bool, str]:
    for n in range(1, max_n + 1):
        image = [tree_to_parking(t).places for t in enumerate_trees(n)]
        expected = [p.places for p in enumerate_parking(n)]
        if len(set(image)) != len(image) or sorted(image) != expected:
            return False, f"n={n}"
        for t in enumerate_trees(n):
            if prufer_decode(prufer_encode(t)) != t:
                return False, f"roundtrip n={n}"
    return True, f"n<={max_n}"


def check_dp_vs_enumeration(max_n: int = 5, max_k: int = 2, tol: float = 1e-10) -> tuple[bool, str]:
    worst = 0.0
    for n in range(1, max_n + 1):
        for k in range(1, min(n, max_k) + 1):
            for key, p in oracle_joint_pmf(n, k).table.items():
                worst = max(worst, abs(walks.joint_pmf(n, key) - float(p)))
    return worst <= tol, f"max_abs_err={worst:.3g}"


def check_cycle_lemma(max_n: int = 4) -> tuple[bool, str]:
    for n in range(1, max_n + 1):
        for x in walks.multinomial_outcomes(n):
            valid = [r for r in range(n + 1) if walks.is_excursion(walks.rotate(x, r))]
            if valid != [walks.cycle_rotation(x)]:
                return False, f"x={x}"
    return True, f"n<={max_n}"


def check_excursion_law(max_n: int = 5, tol: float = 1e-12) -> tuple[bool, str]:
    worst = 0.0
    for n in range(1, max_n + 1):
        laws = walks.increment_laws(n)
        exact = np.zeros_like(laws)
        for x, p in walks.enumerate_excursions(n):
            for i, v in enumerate(x):
                exact[i, v] += float(p)
        worst = max(worst, float(np.abs(laws - exact).max()))
    return worst <= tol, f"max_abs_err={worst:.3g}"


CHECKS = {
    "figure1": check_figure1,
    "bijection": check_bijection,
    "dp-vs-enumeration": check_dp_vs_enumeration,
    "cycle-lemma": check_cycle_lemma,
    "excursion-law": check_excursion_law,
}


def run_selftest() -> list[dict]:
    rows = []
    for name, fn in CHECKS.items():
        ok, detail = fn()
        rows.append({"check": name, "passed": bool(ok), "detail": detail})
    return rows
