import math

import numpy as np
import pytest

import oracle
from floquet_otoc.algebra import DenseOperator, reflection_operator, reverse_bits
from floquet_otoc.evolution import ChainParams
from floquet_otoc.schedules import QuenchProtocol
from floquet_otoc.spectral import (
    MIN_SPACINGS,
    NnsdScore,
    SpacingEnsemble,
    SymmetryError,
    Verdict,
    eigenphase_spacings,
    nnsd_at_kicks,
    palindrome_projector,
    poisson_pdf,
    project_unitary,
    score_nnsd,
    wigner_dyson_pdf,
)

LINEAR = QuenchProtocol.linear(h_x0=0.7, h_z0=1.0, gamma=0.1)


def dense_unitary(params: ChainParams, n: int) -> np.ndarray:
    return oracle.cumulative_unitary(
        "linear",
        params.N,
        n,
        J=params.J,
        tau=params.tau,
        h_x0=LINEAR.h_x0,
        h_z0=LINEAR.h_z0,
        gamma=LINEAR.gamma,
    )


@pytest.mark.parametrize("N", [2, 4, 6, 8, 12])
def test_palindrome_projector_dimensions(N):
    proj = palindrome_projector(N)
    assert proj.d_even == (2**N + 2 ** (N // 2)) // 2
    assert proj.d_even + proj.d_odd == 2**N
    # every listed palindrome really is one, every pair is lo < reverse(lo)
    assert all(reverse_bits(int(b), N) == int(b) for b in proj.pal)
    assert all(
        reverse_bits(int(lo), N) == int(hi)
        for lo, hi in zip(proj.pair_lo, proj.pair_hi)
    )
    assert (proj.pair_lo < proj.pair_hi).all()


def test_palindrome_projector_even_sector_dim_2080_at_n12():
    assert palindrome_projector(12).d_even == 2080


@pytest.mark.parametrize("N", [1, 3, 5])
def test_palindrome_projector_rejects_odd_n(N):
    with pytest.raises(ValueError, match="even"):
        palindrome_projector(N)


@pytest.mark.parametrize("N", [2, 4, 6])
def test_dense_isometry_properties(N):
    proj = palindrome_projector(N)
    p = proj.dense()
    assert p.shape == (2**N, proj.d_even)
    assert np.allclose(p.conj().T @ p, np.eye(proj.d_even), atol=1e-12)
    # columns live in the reflection-even subspace: R P = P
    r = reflection_operator(N).entries
    assert np.allclose(r @ p, p, atol=1e-12)


@pytest.mark.parametrize("sector", ["even", "odd"])
def test_project_unitary_matches_dense_isometry(sector):
    params = ChainParams(N=4, J=1.0, tau=math.pi / 6)
    u = dense_unitary(params, 5)
    proj = palindrome_projector(4)
    if sector == "even":
        p = proj.dense()
    else:
        p = np.zeros((16, proj.d_odd), dtype=np.complex128)
        w = 1.0 / math.sqrt(2.0)
        for j, (lo, hi) in enumerate(zip(proj.pair_lo, proj.pair_hi)):
            p[lo, j] = w
            p[hi, j] = -w
    block = project_unitary(DenseOperator(u), proj, sector=sector)
    want = p.conj().T @ u @ p
    assert np.max(np.abs(block.entries - want)) < 1e-12


def test_project_identity_and_reflection_act_trivially_on_even_sector():
    proj = palindrome_projector(4)
    eye = project_unitary(DenseOperator(np.eye(16, dtype=complex)), proj)
    assert np.allclose(eye.entries, np.eye(proj.d_even), atol=1e-12)
    r = reflection_operator(4)
    r_even = project_unitary(r, proj)
    assert np.allclose(r_even.entries, np.eye(proj.d_even), atol=1e-12)
    r_odd = project_unitary(r, proj, sector="odd")
    assert np.allclose(r_odd.entries, -np.eye(proj.d_odd), atol=1e-12)


@pytest.mark.parametrize("N", [2, 4, 6])
def test_full_spectrum_is_union_of_sector_spectra(N):
    params = ChainParams(N=N, J=1.0, tau=math.pi / 6)
    u = dense_unitary(params, 1)
    proj = palindrome_projector(N)
    full = np.sort(np.mod(np.angle(np.linalg.eigvals(u)), 2.0 * math.pi))
    sectors = [
        np.angle(np.linalg.eigvals(project_unitary(DenseOperator(u), proj, sector=s).entries))
        for s in ("even", "odd")
    ]
    union = np.sort(np.mod(np.concatenate(sectors), 2.0 * math.pi))
    assert np.max(np.abs(full - union)) < 1e-8


def test_project_unitary_rejects_unknown_sector():
    proj = palindrome_projector(4)
    with pytest.raises(ValueError, match="sector"):
        project_unitary(DenseOperator(np.eye(16, dtype=complex)), proj, sector="all")


def test_project_unitary_rejects_reflection_breaking_operator():
    # Z on site 1 maps to Z on site N under reflection, so it cannot commute
    u = np.diag(np.exp(1j * oracle.op_on_site(oracle.SZ, 1, 4).diagonal().real))
    with pytest.raises(SymmetryError, match=r"\[U, R\]"):
        project_unitary(DenseOperator(u), palindrome_projector(4))


def test_project_unitary_rejects_non_unitary_block():
    u = 0.5 * np.eye(16, dtype=complex)  # commutes with R, block not unitary
    with pytest.raises(ValueError, match="not unitary"):
        project_unitary(DenseOperator(u), palindrome_projector(4))


def test_eigenphase_spacings_include_wraparound():
    phases = np.array([0.3, 1.0, 2.5, 5.0])
    ens = eigenphase_spacings(DenseOperator(np.diag(np.exp(1j * phases))))
    raw = np.array([0.7, 1.5, 2.5, 2.0 * math.pi - 5.0 + 0.3])
    assert ens.count == 4
    assert np.allclose(ens.phases, phases, atol=1e-12)
    assert np.allclose(ens.s, raw / raw.mean(), atol=1e-12)
    assert math.isclose(ens.s.mean(), 1.0, rel_tol=1e-12)


def test_eigenphase_spacings_reject_non_unitary():
    with pytest.raises(ValueError, match="unit circle"):
        eigenphase_spacings(DenseOperator(1.01 * np.eye(4, dtype=complex)))


def test_model_pdfs_integrate_to_their_cdfs():
    s = np.linspace(0.0, 8.0, 200_001)
    for pdf, cdf in [
        (wigner_dyson_pdf, lambda x: 1.0 - np.exp(-math.pi * x * x / 4.0)),
        (poisson_pdf, lambda x: 1.0 - np.exp(-x)),
    ]:
        # cumulative trapezoid against the closed-form CDF
        y = pdf(s)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(s))])
        assert np.max(np.abs(cum - cdf(s))) < 1e-8
        # both model densities have unit mass and unit mean spacing
        tail = np.linspace(0.0, 40.0, 400_001)
        assert math.isclose(np.trapezoid(pdf(tail), tail), 1.0, abs_tol=1e-6)
        assert math.isclose(np.trapezoid(tail * pdf(tail), tail), 1.0, abs_tol=1e-6)


def synthetic_ensemble(kind: str, size: int, seed: int) -> SpacingEnsemble:
    u = np.random.default_rng(seed).random(size)
    if kind == "poisson":
        s = -np.log1p(-u)
    else:  # Wigner-Dyson surmise via inverse CDF
        s = np.sqrt(-4.0 * np.log1p(-u) / math.pi)
    s /= s.mean()
    return SpacingEnsemble(kick=None, phases=np.array([]), s=s)


def test_score_nnsd_identifies_poisson_sample():
    score = score_nnsd(synthetic_ensemble("poisson", 4000, seed=7))
    assert score.verdict is Verdict.POISSON_LIKE
    assert score.d_poisson < score.d_wigner
    assert score.count == 4000


def test_score_nnsd_identifies_wigner_dyson_sample():
    score = score_nnsd(synthetic_ensemble("wigner", 4000, seed=7))
    assert score.verdict is Verdict.WIGNER_DYSON_LIKE
    assert score.d_wigner < score.d_poisson


def test_score_nnsd_small_ensembles_are_inconclusive():
    ens = synthetic_ensemble("wigner", MIN_SPACINGS - 1, seed=3)
    assert score_nnsd(ens).verdict is Verdict.INCONCLUSIVE


def test_score_nnsd_respects_margin():
    # equidistant from both models by construction: empirical mass set to the
    # average of the two model masses in every bin via a fake dense sample
    ens = synthetic_ensemble("poisson", 4000, seed=11)
    base = score_nnsd(ens, margin=0.0)
    assert base.verdict is Verdict.POISSON_LIKE
    tight = score_nnsd(ens, margin=0.999)
    assert tight.verdict is Verdict.INCONCLUSIVE


def test_score_nnsd_histogram_is_density():
    ens = synthetic_ensemble("poisson", 2000, seed=5)
    score = score_nnsd(ens, bins=20)
    width = score.bin_edges[1] - score.bin_edges[0]
    # density normalizes the in-range mass to one
    assert math.isclose(float(score.density.sum() * width), 1.0, rel_tol=1e-12)
    assert len(score.bin_centers) == 20
    assert isinstance(score, NnsdScore)


def test_score_nnsd_rejects_bad_bins():
    with pytest.raises(ValueError, match="bins"):
        score_nnsd(synthetic_ensemble("poisson", 100, seed=1), bins=0)


def test_nnsd_at_kicks_matches_dense_oracle():
    params = ChainParams(N=4, J=1.0, tau=math.pi / 6)
    proj = palindrome_projector(4)
    p = proj.dense()
    out = nnsd_at_kicks(params, LINEAR, [1, 3], backend="numpy")
    assert [k for k, _, _ in out] == [1, 3]
    for k, ens, score in out:
        block = p.conj().T @ dense_unitary(params, k) @ p
        lam = np.linalg.eigvals(block)
        want = np.sort(np.mod(np.angle(lam), 2.0 * math.pi))
        assert ens.kick == k
        assert np.max(np.abs(ens.phases - want)) < 1e-9
        # 10 even-sector phases at N=4: far below the verdict floor
        assert ens.count == proj.d_even == 10
        assert score.verdict is Verdict.INCONCLUSIVE


def test_nnsd_at_kicks_validates_kick_list():
    params = ChainParams(N=4, J=1.0, tau=0.5)
    with pytest.raises(ValueError, match="empty"):
        nnsd_at_kicks(params, LINEAR, [])
    with pytest.raises(ValueError, match="start at 1"):
        nnsd_at_kicks(params, LINEAR, [0, 2])
    with pytest.raises(ValueError, match="sorted"):
        nnsd_at_kicks(params, LINEAR, [3, 1])
