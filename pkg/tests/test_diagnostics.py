import csv
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from arcbench import diagnostics as dx
from arcbench.circuit import ArcOptions, build_arc
from arcbench.decoding_graph import build
from arcbench.layouts import generate_heavy_hex, linear_links
from arcbench.simulator import NoiseModel, sample_bits


# -- naive estimator ----------------------------------------------------------


def test_estimate_edge_cases():
    assert dx._estimate(10000, 0) == (0.0, 0.0, False)
    p, se, sat = dx._estimate(500, 500)
    assert p == 0.5 and se > 0 and not sat
    p, se, sat = dx._estimate(0, 7)
    assert p == 1.0 and math.isinf(se) and sat
    r = 30 / 970
    assert dx._estimate(970, 30)[0] == pytest.approx(r / (1 + r))


SMALL = build_arc(linear_links(3), options=ArcOptions(T=3, basis="xz", run_202=False))["xz"]
SMALL_G = build(SMALL)


def direct_counts(E, a, b):
    n00 = n11 = 0
    for row in E:
        if a == b:
            n11 += bool(row[a])
            n00 += not row[a]
        else:
            n11 += bool(row[a] and row[b])
            n00 += bool(not row[a] and not row[b])
    return n00, n11


def test_naive_estimate_counts_against_loop():
    E = SMALL_G.detectors.evaluate(sample_bits(SMALL, NoiseModel.uniform(0.05), 300, seed=2))
    for est in dx.naive_estimate(E, SMALL_G):
        assert (est.n00, est.n11) == direct_counts(E, *est.edge.nodes)


matrices = st.integers(1, 40).flatmap(
    lambda n: st.lists(st.lists(st.booleans(), min_size=len(SMALL_G.nodes), max_size=len(SMALL_G.nodes)), min_size=n, max_size=n)
)


@settings(max_examples=40, deadline=None)
@given(matrices, st.randoms())
def test_naive_estimate_permutation_invariant_and_monotone(rows, rnd):
    E = np.array(rows, dtype=bool)
    base = dx.naive_estimate(E, SMALL_G)
    perm = E[rnd.sample(range(len(E)), len(E))]
    assert [e.p_hat for e in dx.naive_estimate(perm, SMALL_G)] == [e.p_hat for e in base]
    for k, est in enumerate(base):
        a, b = est.edge.nodes
        extra = np.zeros((1, E.shape[1]), dtype=bool)
        extra[0, [a, b]] = True
        more = dx.naive_estimate(np.vstack([E, extra]), SMALL_G)[k]
        assert more.p_hat >= est.p_hat


def test_naive_estimate_needs_shots():
    with pytest.raises(ValueError):
        dx.naive_estimate(np.zeros((0, len(SMALL_G.nodes)), dtype=bool), SMALL_G)


def test_noiseless_diagnostics_zero():
    E = np.zeros((50, len(SMALL_G.nodes)), dtype=bool)
    est = dx.naive_estimate(E, SMALL_G)
    assert all(e.p_hat == 0 for e in est)
    assert all(v == 0 for v in dx.qubit_averages(est).values())
    assert all(v == 0 for _, _, v in dx.time_series(est, SMALL_G))


def test_targeted_idle_noise_shows_up():
    # a closed ring: on a line the end qubits' self-edges soak up every
    # firing of their node and would dominate the averages
    g = generate_heavy_hex(12)
    circuits = build_arc(g, options=ArcOptions(T=6, basis="xz", run_202=False, delay=1.0))
    noise = NoiseModel(p1=0.003, p2=0.003, p_meas=0.003, idle=0.003, idle_qubits={4: 0.03})
    est = []
    for k, c in enumerate(circuits.values()):
        dg = build(c)
        E = dg.detectors.evaluate(sample_bits(c, noise, 6000, seed=k))
        est += dx.naive_estimate(E, dg)
    avg = dx.qubit_averages(est)
    assert max(avg, key=avg.get) == 4
    assert all(avg[4] > v for q, v in avg.items() if q != 4)


def test_time_series_filters_bad_qubits():
    E = SMALL_G.detectors.evaluate(sample_bits(SMALL, NoiseModel.uniform(0.02), 2000, seed=3))
    est = dx.naive_estimate(E, SMALL_G)
    series = dx.time_series(est, SMALL_G)
    assert series and all(cls in ("aux-flip", "code-bitflip", "code-phaseflip") for _, cls, _ in series)
    assert dx.time_series(est, SMALL_G, threshold=0.0) == []
    times = {t for t, _, _ in series}
    assert all(abs(2 * t - round(2 * t)) < 1e-9 for t in times)


# -- estimator error curve -----------------------------------------------------


def enumerate_curve(p, q, degree):
    """Exact P11/P00 by enumerating every configuration of the 2*degree-1 edges."""
    others = degree - 1
    p11 = p00 = 0.0
    for main in (0, 1):
        for left in itertools.product((0, 1), repeat=others):
            for right in itertools.product((0, 1), repeat=others):
                w = (p if main else 1 - p)
                k = sum(left) + sum(right)
                w *= q**k * (1 - q) ** (2 * others - k)
                a = (main + sum(left)) % 2
                b = (main + sum(right)) % 2
                if a and b:
                    p11 += w
                elif not a and not b:
                    p00 += w
    p_hat = p11 / (p00 + p11)
    return abs(p_hat - p) / p


def binomial_odd(q, n):
    return sum(stats.binom.pmf(k, n, q) for k in range(1, n + 1, 2))


@pytest.mark.parametrize("p, q, degree", [(0.01, 0.01, 3), (0.05, 0.002, 4), (0.02, 0.2, 5), (0.3, 0.1, 2)])
def test_curve_matches_enumeration(p, q, degree):
    assert dx.estimator_error_curve(p, q, degree) == pytest.approx(enumerate_curve(p, q, degree), rel=1e-9)


@pytest.mark.parametrize("q", [0.0, 0.003, 0.05, 0.3])
def test_node_flip_probability_binomial(q):
    assert dx.node_flip_probability(q, 9) == pytest.approx(binomial_odd(q, 9), abs=1e-12)


def test_curve_regimes():
    for p in (0.001, 0.01, 0.1):
        assert dx.estimator_error_curve(p, 0.0) == pytest.approx(0.0, abs=1e-12)
    for p in (0.002, 0.01, 0.02):
        assert dx.estimator_error_curve(p, p / 10) < 0.1
        # with q = 10p the estimate follows q rather than p
        assert dx.estimator_error_curve(p, 10 * p, against="q") < dx.estimator_error_curve(p, 10 * p)
    with pytest.raises(ValueError):
        dx.estimator_error_curve(0.6, 0.1)


# -- decay fit -----------------------------------------------------------------


def test_fit_exact_geometric():
    hist = {n: 0.3**n for n in range(1, 9)}
    fit = dx.fit_decay(hist)
    assert fit.ln_rho == pytest.approx(math.log(0.3), abs=1e-12)
    assert fit.rho == pytest.approx(0.3)
    assert fit.residual_ss == pytest.approx(0.0, abs=1e-20)
    assert fit.sizes == tuple(range(1, 9))


def test_fit_cutoffs_and_errors():
    hist = {0: 0.5, 1: 0.1, 2: 0.01, 3: 0.001, 4: 1e-5}
    counts = {0: 5000, 1: 1000, 2: 100, 3: 10, 4: 1}
    fit = dx.fit_decay(hist, counts, min_count=5)
    assert fit.sizes == (1, 2, 3)
    assert fit.ln_rho == pytest.approx(math.log(0.1))
    with pytest.raises(ValueError):
        dx.fit_decay({1: 0.2})
    with pytest.raises(ValueError):
        dx.fit_decay({1: 0.2, 2: 0.1}, {1: 4, 2: 4})


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.9), st.floats(1e-3, 10.0), st.integers(2, 12))
def test_fit_recovers_any_geometric(rho, scale, n):
    fit = dx.fit_decay({k: scale * rho**k for k in range(1, n + 1)})
    assert fit.ln_rho == pytest.approx(math.log(rho), rel=1e-9, abs=1e-9)


# -- outputs -------------------------------------------------------------------


def test_csv_and_svg_outputs(tmp_path):
    E = SMALL_G.detectors.evaluate(sample_bits(SMALL, NoiseModel.uniform(0.02), 500, seed=1))
    est = dx.naive_estimate(E, SMALL_G)
    dx.write_estimates_csv(tmp_path / "e.csv", [("xz_0", SMALL_G, est)])
    rows = list(csv.DictReader(open(tmp_path / "e.csv")))
    assert len(rows) == len(est) and tuple(rows[0]) == dx.ESTIMATE_COLUMNS
    fit = dx.fit_decay({1: 0.1, 2: 0.01, 3: 0.001})
    dx.write_histogram_csv(tmp_path / "h.csv", {1: 100, 2: 10}, 1000)
    dx.write_fit_csv(tmp_path / "f.csv", fit)
    dx.write_fit_csv(tmp_path / "none.csv", None)
    dx.plot_histogram(tmp_path / "h.svg", {1: 100, 2: 10}, 1000, fit)
    dx.plot_qubits(tmp_path / "q.svg", SMALL.graph, dx.qubit_averages(est))
    dx.plot_time_series(tmp_path / "t.svg", dx.time_series(est, SMALL_G))
    first = (tmp_path / "h.svg").read_bytes()
    dx.plot_histogram(tmp_path / "h.svg", {1: 100, 2: 10}, 1000, fit)
    assert (tmp_path / "h.svg").read_bytes() == first
    assert b"<svg" in first


def test_block_202_estimates_pick_the_block_nodes():
    from arcbench.code_graph import LinkGraph
    from arcbench.experiment import DEMO_202_LINKS

    c = build_arc(LinkGraph(DEMO_202_LINKS), options=ArcOptions(T=10, basis="xy", links_202=(1,)))["xy"]
    g = build(c)
    label = {n.label(): k for k, n in enumerate(g.nodes)}
    E = np.zeros((4, len(g.nodes)), dtype=bool)
    E[0, label["c5:L1"]] = True
    E[1, label["s4:L1"]] = True
    E[:, label["c3:L1"]] = True  # not the central comparison, ignored
    E[2, label["s2:L1"]] = True  # compares with a measurement made alongside the neighbours
    (row,) = dx.block_202_estimates(E, g)
    assert row["link"] == 1
    assert row["conjugate"] == 0.25
    assert row["standard"] == 0.125
    ff = [e for e in g.edges if e.cls == "feedforward"]
    assert ff and row["feedforward"] == 0.0
    a, b = ff[0].nodes
    E[3, [a, b]] = True
    assert dx.block_202_estimates(E, g)[0]["feedforward"] > 0
    quiet = sample_bits(c, NoiseModel(), 50, seed=1)
    assert dx.block_202_estimates(g.detectors.evaluate(quiet), g)[0] == {
        "link": 1, "conjugate": 0.0, "standard": 0.0, "feedforward": 0.0}
