"""Reference step-through of the double Dutch auction clocks.

Writes auction.json with the outcomes the C++ implementation must reproduce.
Exact rational arithmetic keeps the oracle free of rounding questions.
"""
import json
from fractions import Fraction as F
from pathlib import Path


def dda(bids, asks, p_max, p_min, theta, omega):
    cb, cs = F(p_max), F(p_min)
    buyers, sellers = set(), set()
    rounds = adjustments = 0
    trace = []
    while True:
        new_b = {i for i, b in enumerate(bids) if i not in buyers and b >= cb}
        new_s = {j for j, a in enumerate(asks) if j not in sellers and a <= cs}
        buyers |= new_b
        sellers |= new_s
        if new_b or new_s:
            rounds += 1
            trace.append({"event": "pause", "C_B": float(cb), "C_S": float(cs),
                          "admitted_buy": sorted(new_b), "admitted_sell": sorted(new_s)})
            continue
        if cb - theta < cs + theta:
            break
        cb -= theta
        cs += theta
        adjustments += 1
        rounds += 1
        trace.append({"event": "adjust", "C_B": float(cb), "C_S": float(cs)})
    price = omega * cb + (1 - omega) * cs
    rb = sorted(buyers, key=lambda i: (-bids[i], i))
    rs = sorted(sellers, key=lambda j: (asks[j], j))
    q = min(len(rb), len(rs))
    wb, ws, ub, us = [], [], [], []
    for i, j in zip(rb[:q], rs[:q]):
        if bids[i] - price < 0 or price - asks[j] < 0:
            continue
        wb.append(i)
        ws.append(j)
        ub.append(float(bids[i] - price))
        us.append(float(price - asks[j]))
    return {
        "price": float(price), "winners_buy": wb, "winners_sell": ws,
        "buyer_utility": ub, "seller_utility": us,
        "social_welfare": float(sum(F(u) for u in ub) + sum(F(u) for u in us)),
        "rounds": rounds, "adjustments": adjustments,
        "final_buyer_clock": float(cb), "final_seller_clock": float(cs),
        "admitted_buy": len(buyers), "admitted_sell": len(sellers), "trace": trace,
    }


def case(name, bids, asks, p_max=12, p_min=0, theta=1, omega=F(1, 2)):
    return {"name": name, "bids": bids, "asks": asks, "p_max": p_max, "p_min": p_min,
            "theta": float(theta), "omega": float(omega),
            "expected": dda([F(b) for b in bids], [F(a) for a in asks], F(p_max), F(p_min), F(theta), F(omega))}


def main():
    cases = [
        case("three_by_three", [10, 8, 6], [3, 5, 9]),
        case("single_pair_no_cross", [10], [11]),
        case("wide_step", [10, 8, 6], [3, 5, 9], theta=6),
        case("skewed_weight", [10, 8, 6], [3, 5, 9], p_max=13, omega=F(1, 4)),
        case("buyer_side_trimmed", [11, 10, 9, 8, 7], [2, 4], theta=F(1, 2)),
        case("ties", [9, 9, 9], [3, 3], theta=1),
    ]
    out = Path(__file__).with_name("auction.json")
    out.write_text(json.dumps({"cases": cases}, indent=1) + "\n")


if __name__ == "__main__":
    main()
