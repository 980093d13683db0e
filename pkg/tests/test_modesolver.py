import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import rel
from zitterguide import medium, modesolver as ms, specfun
from zitterguide.errors import DomainError, InconsistentRootError, NotGuidedError, ValidationError
from zitterguide.modesolver import ModeIndex, ModeSolution

HENE = dict(n0=1.46, lambda0_vacuum=632.8e-9)
GRID_R = (1.0, 2.0, 3.0, 5.0, 8.0, 10.0)


def all_modes(cfg, m_max=3):
    return ms.guided_modes(cfg, m_max)


def test_mode_index_validation():
    with pytest.raises(ValidationError):
        ModeIndex(0, 1)
    with pytest.raises(ValidationError):
        ModeIndex(1, 1, 0)
    i = ModeIndex(2, -3, -1)
    assert (i.m_abs, i.mu, i.sigma_m_sign) == (3, -1, 1)
    assert ModeIndex(1, 0).sigma_m_sign == 0


def test_lp_labels():
    assert ms.lp_label(ModeIndex(1, 0)) == "LP01"
    assert ms.lp_label(ModeIndex(1, 2, 1)) == "LP21+"
    assert ms.lp_label(ModeIndex(1, 2, -1)) == "LP21-"
    assert ms.lp_label(ModeIndex(2, -1, -1)) == "LP12+"


def test_residual_near_origin_is_finite_and_negative():
    for r in (0.5, 3.0, 9.0):
        f = ms.char_residual(1e-9, r, 0)
        assert math.isfinite(f) and f < 0


def test_residual_domain():
    with pytest.raises(DomainError):
        ms.char_residual(5.0, 5.0, 0)
    with pytest.raises(DomainError):
        ms.char_residual(0.0, 5.0, 0)


def test_two_sign_changes_at_r5_m0():
    x = np.linspace(1e-6, 5 - 1e-6, 10_000)
    f = np.array([ms.char_residual(v, 5.0, 0) for v in x])
    assert np.count_nonzero(np.sign(f[:-1]) != np.sign(f[1:])) == 2
    assert len(ms.solve_modes(5.0, 0)) == 2


def test_known_counts():
    assert len(ms.solve_modes(1.0, 0)) == 1
    assert ms.solve_modes(2.0, 1) == []
    assert len(ms.solve_modes(3.0, 1)) == 1


def test_lp11_cutoff_at_first_j0_zero():
    j01 = 2.404825557695773
    assert ms.solve_modes(j01 - 1e-3, 1) == []
    assert len(ms.solve_modes(j01 + 1e-3, 1)) == 1


def test_fundamental_approaches_j0_zero():
    vals = [ms.solve_modes(r, 0)[0] for r in (5, 10, 20, 50)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 2.404825557695773


@pytest.mark.parametrize("r", GRID_R)
@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_roots_match_independent_oracle(r, m):
    ours = ms.solve_modes(r, m)
    ref = oracles.char_roots(r, m, samples=120)
    assert len(ours) == len(ref)
    for a, b in zip(ours, ref):
        assert abs(a - b) < 1e-10


@pytest.mark.parametrize("r", np.linspace(0.3, 12.0, 25))
def test_counts_match_dense_scan(r):
    # any root the dense x-scan sees must be found; the solver may add roots hugging x = R
    for m in range(8):
        x = np.linspace(1e-9, r - 1e-9, 20_000)
        with np.errstate(all="ignore"):
            f = ms._residual_array(x, r, m)
        dense = int(np.count_nonzero((np.sign(f[:-1]) * np.sign(f[1:]) < 0)))
        found = ms.solve_modes(r, m)
        assert len(found) >= dense
        for extra in found[dense:]:
            assert r - extra < 1e-6


def test_weakly_bound_fundamental_keeps_decay_constant():
    pairs = ms.solve_pairs(0.2, 0)
    assert len(pairs) == 1
    x, w = pairs[0]
    # small-R asymptote: w ~ 2 exp(-gamma) exp(-2/R^2)
    assert w == pytest.approx(2 * math.exp(-np.euler_gamma) * math.exp(-2 / 0.04), rel=0.05)
    # x rounds to R here, so the residual is checked in its w form
    terms = x * specfun.bessel_j(1, x) * specfun.bessel_k(0, w)
    assert abs(ms._f_of_w(w, 0.2, 0)) < 1e-12 * terms
    assert ms.norm_brace(x, w, 0) > 0


def test_root_count_non_decreasing_in_r():
    rs = np.linspace(0.1, 12, 120)
    for m in range(5):
        counts = [len(ms.solve_modes(r, m)) for r in rs]
        assert all(b >= a for a, b in zip(counts, counts[1:]))


@pytest.mark.parametrize("r", [5.0, 10.0])
def test_roots_interlace_with_j_zeros(r):
    for m in range(4):
        roots = ms.solve_modes(r, m)
        for a, b in zip(roots, roots[1:]):
            xs = np.linspace(a, b, 2000)
            j = specfun.bessel_j(m, xs)
            assert np.any(np.sign(j[:-1]) != np.sign(j[1:]))


def test_beta0_values():
    lam = 632.8e-9 / (2 * math.pi * 1.46)
    a = 10 * lam
    cfg = medium.ParticleConfig.photon(0.01, a, **HENE)
    assert ms.beta0(cfg, 6.0) == pytest.approx(8.0 / a, rel=1e-14)
    assert ms.beta0(cfg, 0.0) == pytest.approx(1 / lam, rel=1e-15)
    with pytest.raises(NotGuidedError):
        ms.beta0(cfg, 10.5)


@pytest.mark.parametrize("r", GRID_R)
def test_modes_solution_invariants(hene, r):
    for kind in ("photon", "electron"):
        cfg = hene.config(kind, r)
        prev = None
        for mode in all_modes(cfg):
            assert 0 < mode.kappa0_a < r
            assert mode.kappa_tilde0_a == pytest.approx(math.sqrt(r * r - mode.kappa0_a ** 2), rel=1e-12)
            assert abs(mode.residual()) <= 1e-10
            assert cfg.k_clad < mode.beta0 < cfg.k0
            assert mode.norm_n != 0
            if prev is not None and prev.m_abs == mode.m_abs:
                assert mode.beta0 < prev.beta0
            prev = mode


def test_matched_beta_scaling(hene):
    ph, el = hene.photon(8.0), hene.electron(8.0)
    for p, e in zip(all_modes(ph), all_modes(el)):
        assert p.kappa0_a == e.kappa0_a
        assert rel(e.beta0, ph.radius_a / el.radius_a * p.beta0) < 1e-12


@pytest.mark.parametrize("r", [2.0, 5.0, 8.0])
def test_normalization_sign_convention(r):
    cfg = medium.photon_for_r(r, 0.014, **HENE)
    for mode in ms.guided_modes(cfg, 2):
        # N carries the sign of 1/J_m(x) so psi(1) > 0
        assert mode.norm_n * specfun.bessel_j(mode.m_abs, mode.kappa0_a) > 0
        assert mode.psi(1.0) > 0


@pytest.mark.parametrize("r", GRID_R)
def test_unit_plane_norm(r):
    cfg = medium.photon_for_r(r, 0.014, **HENE)
    for mode in all_modes(cfg):
        assert abs(oracles.plane_norm(mode) - 1.0) < 1e-8


def test_brace_matches_bessel_integral_identity(photon5):
    from scipy import integrate
    for mode in all_modes(photon5):
        jm = specfun.bessel_j(mode.m_abs, mode.kappa0_a)
        f = lambda r: (mode.psi(r) / (mode.norm_n * jm)) ** 2 * r
        val = integrate.quad(f, 0, 1, epsabs=1e-14, epsrel=1e-12)[0] + integrate.quad(
            f, 1, 1 + 60 / mode.kappa_tilde0_a, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
        brace = ms.norm_brace(mode.kappa0_a, mode.kappa_tilde0_a, mode.m_abs)
        assert rel(2 * val, brace) < 1e-8


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 8), st.floats(0.01, 30.0), st.floats(1e-3, 30.0))
def test_brace_positive_everywhere(m, x, w):
    # J_m^2 - J_{m-1}J_{m+1} > 0 and K_{m-1}K_{m+1} > K_m^2, so the filter is a safety net
    if abs(specfun.bessel_j(m, x)) < 1e-6:
        return
    assert ms.norm_brace(x, w, m) > 0


def test_normalization_guard(monkeypatch):
    monkeypatch.setattr(ms, "norm_brace", lambda *a: -1.0)
    with pytest.raises(InconsistentRootError):
        ms.normalization(1.0, 1.0, 0)


def test_psi_boundary_behaviour(photon5):
    for mode in all_modes(photon5):
        inside = mode.norm_n * specfun.bessel_j(mode.m_abs, mode.kappa0_a)
        assert rel(mode.psi(1.0), inside) < 1e-12
        assert rel(mode.psi(1.0 + 1e-12), mode.psi(1.0)) < 1e-9
        if mode.m_abs:
            assert mode.psi(0.0) == 0.0
        # derivative continuity is exactly the matching condition
        assert rel(mode.psi_prime_inside(), mode.psi_prime_outside()) < 1e-9
        assert mode.psi_prime_inside() == pytest.approx(
            mode.norm_n * mode.kappa0_a * specfun.bessel_j_prime(mode.m_abs, mode.kappa0_a), rel=1e-15)


def test_psi_prime_matches_finite_difference(photon5):
    for mode in all_modes(photon5):
        for r in (0.3, 0.8, 1.4, 2.5):
            fd = oracles.richardson_derivative(mode.psi, r, h=1e-4)
            assert mode.psi_prime(r) == pytest.approx(fd, abs=1e-8)


def test_psi_decay_rate(photon5):
    mode = all_modes(photon5)[0]
    w = mode.kappa_tilde0_a
    rho = np.linspace(4.0, 8.0, 50)
    # log(psi sqrt(rho)) has slope -w asymptotically
    slope = np.polyfit(rho, np.log(mode.psi(rho) * np.sqrt(rho)), 1)[0]
    assert abs(slope + w) < 0.05 * w


def test_psi_prime_rejects_negative_radius(photon5):
    mode = all_modes(photon5)[0]
    with pytest.raises(DomainError):
        mode.psi(-1.0)


def test_solve_mode_and_not_guided(photon5):
    m = ms.solve_mode(photon5, ModeIndex(1, -2, -1))
    assert m.index == ModeIndex(1, -2, -1) and m.m_abs == 2
    with pytest.raises(NotGuidedError):
        ms.solve_mode(photon5, ModeIndex(1, 3, 1))
    with pytest.raises(NotGuidedError):
        ms.solve_mode(photon5, ModeIndex(3, 0, 1))


def test_json_round_trip(electron5):
    mode = ms.solve_mode(electron5, ModeIndex(2, 0, 1))
    doc = json.loads(json.dumps(mode.to_dict()))
    assert set(doc) == {"particle", "R", "n", "m_ell", "sigma", "kappa0_a", "kappa_tilde0_a", "beta0", "N"}
    back = ModeSolution.from_dict(doc)
    assert back.index == mode.index and back.kappa0_a == mode.kappa0_a
    assert abs(back.residual()) <= 1e-10
    assert back.psi(0.7) == mode.psi(0.7)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 15.0), st.integers(0, 4))
def test_every_root_is_physical(r, m):
    for x, w in ms.solve_pairs(r, m):
        assert ms.norm_brace(x, w, m) > 0
        assert abs(ms.char_residual(x, r, m)) <= 1e-10
