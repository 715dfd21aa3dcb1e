#!/usr/bin/env python3
"""Regenerates fixtures/worlds.json.

Worlds are drawn at random and kept only when the observed prompt and steps
satisfy the uniform-prior / bounded-ambiguity / shrinking-ambiguity checks.
Two hand-built worlds are pinned with exact rational gaps, and two worlds that
break the checks are kept to exercise filtering.
"""
import json
import random
from fractions import Fraction as F


def normalise(row):
    s = sum(row)
    out = [x / s for x in row]
    out[-1] = 1.0 - sum(out[:-1])
    return out


def posterior_true(prior, rows, obs, true_c):
    w = []
    for c in range(len(prior)):
        p = prior[c]
        for table, sym in obs:
            p *= table[c][sym]
        w.append(p)
    return w[true_c] / sum(w)


def satisfies(world):
    prior, c0 = world["prior"], world["true_context"]
    n = len(prior)
    if any(abs(p - 1.0 / n) > 1e-12 for p in prior):
        return False
    if 1 - posterior_true(prior, None, [(world["input_table"], world["input"])], c0) > 0.5:
        return False
    for path in world["paths"]:
        prev = 1.0
        for y, s in enumerate(path):
            if 1 - posterior_true(prior, None, [(world["step_table"], s)], c0) > 0.5:
                return False
            e = 1 - posterior_true(prior, None, [(world["step_table"], t) for t in path[: y + 1]], c0)
            if e > prev + 1e-15:
                return False
            prev = e
    return True


def exact_gap(world):
    # Exact only for worlds whose entries are small-denominator rationals.
    q = lambda x: F(x).limit_denominator(1000)
    prior = [q(p) for p in world["prior"]]
    it = [[q(x) for x in r] for r in world["input_table"]]
    st = [[q(x) for x in r] for r in world["step_table"]]
    at = [[q(x) for x in r] for r in world["answer_table"]]
    w = []
    for c in range(len(prior)):
        p = prior[c] * it[c][world["input"]]
        for path in world["paths"]:
            for s in path:
                p *= st[c][s]
        w.append(p)
    tot = sum(w)
    gap = F(0)
    for d in range(len(at[0])):
        pred = sum(w[c] / tot * at[c][d] for c in range(len(prior)))
        gap = max(gap, abs(pred - at[world["true_context"]][d]))
    return gap


def random_world(rng, idx):
    n = rng.randint(2, 6)
    syms = rng.randint(2, 4)
    answers = rng.randint(2, 4)
    c0 = rng.randrange(n)

    def table(k, favour):
        rows = []
        for c in range(n):
            row = [rng.uniform(0.05, 1.0) for _ in range(k)]
            if c == c0:
                row[favour] += favour_boost
            rows.append(normalise(row))
        return rows

    favour_boost = rng.uniform(2.0, 8.0)
    d0 = rng.randrange(syms)
    step_sym = rng.randrange(syms)
    world = {
        "name": f"random-{idx:02d}",
        "true_context": c0,
        "prior": [1.0 / n] * n,
        "input_table": table(syms, d0),
        "step_table": table(syms, step_sym),
        "answer_table": [normalise([rng.uniform(0.05, 1.0) for _ in range(answers)]) for _ in range(n)],
        "consensus": round(rng.uniform(0.5, 2.0), 3),
        "input": d0,
    }
    paths = []
    for _ in range(rng.randint(1, 3)):
        length = rng.randint(1, 4)
        paths.append([step_sym if rng.random() < 0.8 else rng.randrange(syms) for _ in range(length)])
    world["paths"] = paths
    return world


def main():
    rng = random.Random(20240611)
    worlds = []

    pinned = {
        "name": "pinned-two-context",
        "true_context": 0,
        "prior": [0.5, 0.5],
        "input_table": [[0.75, 0.25], [0.25, 0.75]],
        "step_table": [[2 / 3, 1 / 3], [1 / 3, 2 / 3]],
        "answer_table": [[0.8, 0.2], [0.2, 0.8]],
        "consensus": 1.0,
        "input": 0,
        "paths": [[0, 0]],
    }
    worlds.append(pinned)

    single = {
        "name": "single-context",
        "true_context": 0,
        "prior": [1.0],
        "input_table": [[0.5, 0.5]],
        "step_table": [[0.25, 0.75]],
        "answer_table": [[0.3, 0.7]],
        "consensus": 1.0,
        "input": 1,
        "paths": [[1, 0, 1]],
    }
    worlds.append(single)

    idx = 0
    attempts = 0
    while sum(1 for w in worlds if w["name"].startswith("random")) < 24:
        attempts += 1
        w = random_world(rng, idx)
        if satisfies(w):
            worlds.append(w)
            idx += 1

    skewed = dict(pinned, name="skewed-prior", prior=[0.7, 0.3])
    ambiguous = dict(pinned, name="ambiguous-step", paths=[[0, 1]])
    worlds.append(skewed)
    worlds.append(ambiguous)

    for w in worlds:
        w["expect_assumptions"] = satisfies(w)
    pinned["pinned_gap"] = float(exact_gap(pinned))
    pinned["pinned_gap_rational"] = str(exact_gap(pinned))

    with open("worlds.json", "w") as f:
        json.dump({"worlds": worlds}, f, indent=1)
    print(f"{len(worlds)} worlds ({attempts} random draws), pinned gap = {exact_gap(pinned)}")


if __name__ == "__main__":
    main()
