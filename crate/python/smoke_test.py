"""Smoke test for the hawkes_py extension module."""

import math

import hawkes_py as hp


def main():
    p = hp.HawkesParams([0.1, 0.2], [[0.5, 0.0], [0.4, 0.3]], [[0.3, 1.0], [0.2, 0.2]])
    assert abs(p.spectral_radius() - 0.5) < 1e-9

    s = hp.simulate(p, seed=7, horizon=3000.0)
    assert s.dims == 2 and len(s) == sum(s.counts())
    assert s.counts() == hp.simulate(p, seed=7, horizon=3000.0).counts()

    value = hp.nll(p, s)
    assert math.isfinite(value)

    fit = hp.fit(s)
    assert fit["nll"] <= value + 1e-6
    q = fit["params"]
    print("fitted", q)

    for r in hp.rescale(p, s):
        stat, pval = hp.ks_exp1(r)
        assert 0.0 < stat < 1.0 and 0.0 <= pval <= 1.0

    cal = hp.TradingCalendar.regular(5, 3600.0, 3600.0)
    d = hp.simulate(p, seed=1, calendar=cal)
    assert all(any(a <= t < b for a, b in cal.intervals) for ts in d.times for t in ts)
    assert math.isfinite(hp.nll(p, d, cal))

    b = hp.BowsherParams(0.05, 0.5, 0.01, 0.06, 0.1)
    bs = hp.simulate_bowsher(b, cal, seed=3)
    assert math.isfinite(hp.nll_bowsher(b, bs, cal))

    try:
        hp.HawkesParams([0.1], [[1.5]], [[1.0]])
        hp.simulate(hp.HawkesParams([0.1], [[1.5]], [[1.0]]), seed=0, horizon=10.0)
    except ValueError as e:
        print("rejected:", e)
    else:
        raise AssertionError("unstable parameters were accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
