"""Independent reference values for the frozen constants in the C++ tests.

Uses mpmath at 50 digits, per-peer best responses and bisection only; shares
no code with the C++ solver. Run: python3 tests/oracle/derive_values.py
"""
import mpmath as mp

mp.mp.dps = 50
LN2 = mp.log(2)


def best_response(c, d, mu):
    return min(max(c / (mu * LN2) - d, mp.mpf(0)), mp.mpf(d))


def demand(peers, mu):
    return sum(best_response(c, d, mu) for c, d in peers)


def clearing_price(peers, u):
    """Largest price with demand == u (demand is nonincreasing in price)."""
    lo, hi = mp.mpf("1e-12"), max(mp.mpf(c) / (d * LN2) for c, d in peers if c > 0)
    for _ in range(400):
        mid = (lo + hi) / 2
        if demand(peers, mid) >= u:
            lo = mid
        else:
            hi = mid
    return lo


def revenue_optimum(peers, u, points=200000):
    """Max of mu * D(mu) subject to D(mu) <= u, dense scan plus golden refinement."""
    top = max(mp.mpf(c) / (d * LN2) for c, d in peers)
    bottom = min(mp.mpf(c) / (2 * d * LN2) for c, d in peers) / 2
    best = (mp.mpf(0), mp.mpf(0))
    step = (top - bottom) / points
    for k in range(points + 1):
        mu = bottom + step * k
        dem = demand(peers, mu)
        if dem <= u and mu * dem > best[0]:
            best = (mu * dem, mu)
    return best


def show(label, value, digits=10):
    print(f"{label}: {mp.nstr(value, digits)}")


ex4 = [(400, 2), (300, 1.5), (200, 1), (100, 0.5)]
mu = clearing_price(ex4, 2)
show("ex4 price", mu)
print("ex4 x:", [mp.nstr(best_response(c, d, mu), 10) for c, d in ex4])
print("ex4 debits:", [mp.nstr(mu * best_response(c, d, mu), 10) for c, d in ex4])
show("ex4 revenue", mu * 2)
show("single peer price", clearing_price([(400, 2)], 2))
show("ex4 cutoff max", max(mp.mpf(c) / (d * LN2) for c, d in ex4))

for n in range(1, 5):
    peers = ex4[:n]
    m = clearing_price(peers, 2)
    print(f"epoch with {n} peers: price", mp.nstr(m, 10), "x", [mp.nstr(best_response(c, d, m), 8) for c, d in peers])

case1 = [(200, 100), (150, 100)]
for u in (30, 100, 180):
    m = clearing_price(case1, u)
    print(f"case I u={u}: price", mp.nstr(m, 12), "x", [mp.nstr(best_response(c, d, m), 8) for c, d in case1])

case2 = [(400, 100), (100, 100)]
m = clearing_price(case2, 150)
print("case II u=150: price", mp.nstr(m, 12), "x", [mp.nstr(best_response(c, d, m), 8) for c, d in case2],
      "revenue", mp.nstr(m * 150, 10))
rev, arg = revenue_optimum(case2, 150, 20000)
print("case II u=150 revenue optimum under D<=u:", mp.nstr(rev, 10), "at price", mp.nstr(arg, 10),
      "demand", mp.nstr(demand(case2, arg), 10))

show("satisfaction d=150 x=75", mp.log(1.5, 2))
show("utility c=400 d=2 x=2 mu=144.2695", 400 - 2 * mp.mpf("144.2695"))
ex1 = [(100, 150), (150, 150), (200, 150), (250, 150)]
for u in (500, 550, 600):
    m = clearing_price(ex1, u) if u < 600 else min(mp.mpf(c) / (2 * d * LN2) for c, d in ex1)
    rev, arg = revenue_optimum(ex1, u, 20000)
    print(f"example1 peers u={u}: capacity-exhausting revenue", mp.nstr(m * min(u, demand(ex1, m)), 10),
          "best admissible revenue", mp.nstr(rev, 10))
