import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import admissible_time_sequences, count_recursive, product_of_time_sequence, spectral_norm_oracle

from dwellcert.certificate import SubsystemFamily, certify, find_m
from dwellcert.errors import DwellCertError
from dwellcert.switching_sim import (ENUM_GUARD_ENV, SwitchingSignal, brute_force_bound_check,
                                     compute_basis_c, count_admissible_words, enumerate_admissible_words,
                                     generate_signal, monte_carlo, signal_is_admissible, simulate,
                                     write_trajectory_csv)


# --- signals ----------------------------------------------------------------------

def test_signal_exact_dwell():
    sig = generate_signal(2, 3, 30, seed=5, max_extra=0)
    runs = sig.runs()
    assert all(p == 3 for _, p in runs)
    assert all(a != b for (a, _), (b, _) in zip(runs, runs[1:]))
    assert sig.switching_instants == list(range(0, 30, 3))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 60), st.integers(0, 2**31))
def test_generated_signals_admissible(N, delta, horizon, seed):
    sig = generate_signal(N, delta, horizon, seed)
    assert len(sig) == horizon
    assert set(sig.indices) <= set(range(1, N + 1))
    assert signal_is_admissible(sig)


def test_signal_deterministic():
    assert generate_signal(3, 2, 50, 11) == generate_signal(3, 2, 50, 11)
    assert generate_signal(3, 2, 50, 11) != generate_signal(3, 2, 50, 12)


def test_signal_word_is_product_order():
    sig = SwitchingSignal((1, 1, 2, 2, 2), 2)
    assert sig.word().runs == ((2, 3), (1, 2))
    assert sig.word(3).runs == ((2, 1), (1, 2))


def test_bad_signal_args():
    with pytest.raises(DwellCertError):
        generate_signal(0, 1, 10, 0)


# --- simulation -----------------------------------------------------------------------

def test_zero_state_stays_zero(ex1):
    rec = simulate(ex1, generate_signal(2, 2, 20, 0), [0.0, 0.0])
    assert np.all(rec.norms == 0.0)


def test_constant_signal_contracts_after_m(ex1):
    m, rho = find_m(ex1, 2)
    for i in (1, 2):
        sig = SwitchingSignal((i,) * m, 2)
        rec = simulate(ex1, sig, [3.0, -4.0])
        assert rec.norms[m] <= rho * rec.norms[0] * (1 + 1e-12)


def test_trajectory_decays(ex1):
    for seed in range(20):
        rec = simulate(ex1, generate_signal(2, 2, 100, seed), [1.0, 1.0])
        assert rec.norms[-1] <= 1e-6 * rec.norms[0]


def test_simulate_matches_product(ex1):
    sig = generate_signal(2, 2, 15, 3)
    x0 = np.array([0.3, -1.1])
    rec = simulate(ex1, sig, x0)
    mats = [ex1[1], ex1[2]]
    for t in range(16):
        ref = product_of_time_sequence(mats, sig.indices[:t]) @ x0
        assert rec.norms[t] == pytest.approx(np.linalg.norm(ref), rel=1e-12, abs=1e-300)


def test_simulate_errors(ex1):
    with pytest.raises(DwellCertError):
        simulate(ex1, generate_signal(2, 2, 5, 0), [1.0, 2.0, 3.0])
    with pytest.raises(DwellCertError):
        simulate(ex1, generate_signal(2, 2, 5, 0), [1.0, 2.0], T=6)


# --- enumeration -------------------------------------------------------------------------

@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("delta", [1, 2, 3])
@pytest.mark.parametrize("max_len", [1, 4, 7])
def test_enumeration_matches_brute_force(N, delta, max_len):
    brute = admissible_time_sequences(N, delta, max_len)
    words = list(enumerate_admissible_words(N, delta, max_len))
    assert count_admissible_words(N, delta, max_len) == len(brute) == len(words)
    assert count_recursive(N, delta, max_len) == len(brute)
    got = {tuple(reversed(w.letters())) for w in words}
    assert got == set(brute)


@pytest.mark.parametrize("N, delta, max_len", [(2, 2, 10), (3, 3, 10), (3, 1, 7)])
def test_counts_larger(N, delta, max_len):
    assert count_admissible_words(N, delta, max_len) == count_recursive(N, delta, max_len)


def test_enumeration_order():
    got = [str(w) for w in enumerate_admissible_words(2, 1, 2)]
    assert got == ["A1", "A2", "A1^2", "A1 A2", "A2 A1", "A2^2"]
    got = [str(w) for w in enumerate_admissible_words(2, 2, 3)]
    assert got == ["A1", "A2", "A1^2", "A2^2", "A1^3", "A1 A2^2", "A2 A1^2", "A2^3"]


def test_enumeration_guard(monkeypatch):
    monkeypatch.setenv(ENUM_GUARD_ENV, "100")
    with pytest.raises(DwellCertError) as exc:
        list(enumerate_admissible_words(2, 1, 10))
    assert exc.value.code == "enumeration-too-large"
    assert len(list(enumerate_admissible_words(2, 1, 5))) == 62


# --- constants and bound checks ------------------------------------------------------------

def test_basis_c_trivial_families():
    assert compute_basis_c(SubsystemFamily([np.zeros((2, 2))] * 2), 2, 0.5, 3) == 1.0
    assert compute_basis_c(SubsystemFamily([np.eye(2)] * 2), 2, 0.0, 3) == 1.0


def test_basis_c_matches_oracle(ex1):
    lam, m = 0.01, 3
    c = compute_basis_c(ex1, 2, lam, m)
    mats = [ex1[1], ex1[2]]
    ref = max(1.0, max(spectral_norm_oracle(product_of_time_sequence(mats, s)) * math.exp(lam * len(s))
                       for s in admissible_time_sequences(2, 2, 2 * (m - 1) + 1)))
    assert c == pytest.approx(ref, rel=1e-12)


def test_bound_check_certified(ex1):
    cert = certify(ex1, 2)
    c = compute_basis_c(ex1, 2, cert.lam, cert.m)
    rep = brute_force_bound_check(ex1, 2, cert.lam, c, 12)
    assert rep.words_checked == count_admissible_words(2, 2, 12)
    assert rep.passed and rep.max_violation <= 1e-12 * c


def test_bound_check_rejects_too_fast_rate(ex1):
    c = compute_basis_c(ex1, 2, 10.0, 3)
    rep = brute_force_bound_check(ex1, 2, 10.0, c, 12)
    assert not rep.passed
    assert rep.worst_word is not None


def test_bound_check_huge_c(ex1):
    assert brute_force_bound_check(ex1, 2, 0.0, 1e300, 8).passed


# --- Monte Carlo -------------------------------------------------------------------------

def test_monte_carlo_zero_start_is_vacuous(ex1):
    s = monte_carlo(ex1, 2, 5, 20, 0, x0=[0.0, 0.0], c=1.0, lam=0.0)
    assert s.violations == 0 and s.all_pass
    assert np.all(s.max_ratio == 0.0)


def test_monte_carlo_detects_violation(ex1):
    s = monte_carlo(ex1, 2, 20, 30, 0, c=1.0, lam=1.0)
    assert s.violations > 0 and not s.all_pass


def test_monte_carlo_csv_reproducible(ex1, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_trajectory_csv(monte_carlo(ex1, 2, 10, 25, 7, c=2.0, lam=0.02).records, a)
    write_trajectory_csv(monte_carlo(ex1, 2, 10, 25, 7, c=2.0, lam=0.02).records, b)
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "trial,t,norm" and len(lines) == 1 + 10 * 26
    assert not list(tmp_path.glob(".traj-*"))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 12))
def test_state_ratio_bounded_by_product_norm(seed, T):
    rng = np.random.default_rng(seed)
    fam = SubsystemFamily([rng.uniform(-1, 1, (2, 2)) for _ in range(2)])
    sig = generate_signal(2, 2, T, seed)
    prod = product_of_time_sequence([fam[1], fam[2]], sig.indices)
    x0 = rng.normal(size=2)
    rec = simulate(fam, sig, x0)
    nrm = spectral_norm_oracle(prod)
    assert rec.norms[-1] <= nrm * rec.norms[0] * (1 + 1e-9) + 1e-300
    # top right singular vector attains the norm
    _, _, vt = np.linalg.svd(prod)
    assert simulate(fam, sig, vt[0]).norms[-1] == pytest.approx(nrm, rel=1e-9, abs=1e-300)
