import math

import numpy as np
import pytest

import oracle
from floquet_otoc.algebra import DenseOperator
from floquet_otoc.evolution import ChainParams, HeisenbergConvention
from floquet_otoc.otoc import (
    ObservableFamily,
    ObservableSpec,
    c_infinity,
    make_observables,
    otoc_point,
    run_otoc,
)
from floquet_otoc.schedules import QuenchProtocol

FAMILIES = list(ObservableFamily)
LINEAR = QuenchProtocol.linear(h_x0=1.0, h_z0=1.0, gamma=0.1)
PERIODIC = QuenchProtocol.periodic(h_x0=1.0, h_z0=4.0, t_max=16 * math.pi)


def oracle_kwargs(protocol: QuenchProtocol, params: ChainParams) -> tuple[str, dict]:
    kw = dict(J=params.J, tau=params.tau, h_x0=protocol.h_x0, h_z0=protocol.h_z0)
    if protocol.t_max:
        return "periodic", {**kw, "t_max": protocol.t_max}
    return "linear", {**kw, "gamma": protocol.gamma}


@pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.value)
@pytest.mark.parametrize("N", [4, 6])
def test_make_observables_matches_oracle(family, N):
    W0, V0 = make_observables(ObservableSpec(family), N)
    wref, vref = oracle.observables(family.value, N)
    assert np.array_equal(W0.entries, wref)
    assert np.array_equal(V0.entries, vref)


def test_block_w_and_v_cover_complementary_halves():
    W0, V0 = make_observables(ObservableSpec(ObservableFamily.BLOCK_X), 4)
    # W acts on sites 1..2 only, V on sites 3..4 only, so they commute
    comm = W0.entries @ V0.entries - V0.entries @ W0.entries
    assert np.max(np.abs(comm)) == 0.0
    assert np.max(np.abs(W0.entries - V0.entries)) > 0.1


def test_local_default_sites():
    spec = ObservableSpec(ObservableFamily.LOCAL_PAULI_X)
    assert spec.resolved_sites(8) == (1, 4)
    W0, _ = make_observables(spec, 4)
    assert np.array_equal(W0.entries, oracle.op_on_site(oracle.SX, 1, 4))
    custom = ObservableSpec(ObservableFamily.LOCAL_PAULI_Z, sites=(2, 3))
    _, V0 = make_observables(custom, 4)
    assert np.array_equal(V0.entries, oracle.op_on_site(oracle.SZ, 3, 4))


def test_make_observables_validation():
    with pytest.raises(ValueError, match="N must be an integer"):
        make_observables(ObservableSpec(ObservableFamily.BLOCK_X), 1)
    with pytest.raises(ValueError, match="even"):
        make_observables(ObservableSpec(ObservableFamily.BLOCK_X), 3)
    with pytest.raises(ValueError, match="even"):
        make_observables(ObservableSpec(ObservableFamily.LOCAL_PAULI_X), 3)
    # odd N works once sites are explicit
    W0, _ = make_observables(
        ObservableSpec(ObservableFamily.LOCAL_PAULI_X, sites=(1, 2)), 3
    )
    assert W0.dim == 8
    with pytest.raises(ValueError, match="no explicit sites"):
        make_observables(ObservableSpec(ObservableFamily.BLOCK_X, sites=(1, 2)), 4)
    with pytest.raises(ValueError, match="out of range"):
        make_observables(
            ObservableSpec(ObservableFamily.LOCAL_PAULI_X, sites=(1, 5)), 4
        )


@pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.value)
def test_c_infinity(family):
    spec = ObservableSpec(family)
    want = 4.0 / 36.0 if family.is_block else 1.0
    assert c_infinity(spec, 6) == want


def test_otoc_point_matches_naive_traces():
    N = 3
    rng = np.random.default_rng(5)
    m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    W = DenseOperator(m + m.conj().T)
    spec = ObservableSpec(ObservableFamily.LOCAL_PAULI_Z, sites=(1, 2))
    V = DenseOperator(oracle.op_on_site(oracle.SZ, 2, N))
    c2, c4, c = otoc_point(W, V, spec)
    wn = W.entries
    v = V.entries
    assert c2 == pytest.approx(np.trace(wn @ wn @ v @ v).real / 8, abs=1e-12)
    assert c4 == pytest.approx(np.trace(wn @ v @ wn @ v).real / 8, abs=1e-12)
    assert c == pytest.approx(c2 - c4, abs=1e-12)


def test_otoc_point_rejects_non_hermitian_w():
    spec = ObservableSpec(ObservableFamily.LOCAL_PAULI_X, sites=(1, 2))
    bad = DenseOperator(np.array([[0, 1], [0, 0]], dtype=complex))
    v = DenseOperator(np.eye(2, dtype=complex))
    with pytest.raises(ValueError, match="not Hermitian"):
        otoc_point(bad, v, spec)


@pytest.mark.parametrize("protocol", [LINEAR, PERIODIC], ids=["linear", "periodic"])
@pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.value)
def test_run_otoc_matches_oracle(protocol, family):
    params = ChainParams(N=4, J=1.0, tau=math.pi / 6)
    tag, kw = oracle_kwargs(protocol, params)
    series = run_otoc(params, protocol, ObservableSpec(family), 8, backend="numpy")
    c2_ref, c4_ref = oracle.otoc_series(tag, family.value, 4, 8, **kw)
    assert np.max(np.abs(series.C2 - c2_ref)) < 1e-11
    assert np.max(np.abs(series.C4 - c4_ref)) < 1e-11
    assert np.array_equal(series.n, np.arange(9))
    assert np.max(np.abs(series.C - (series.C2 - series.C4))) == 0.0


def test_run_otoc_appendix_convention_matches_oracle():
    params = ChainParams(N=4, J=1.0, tau=0.5)
    spec = ObservableSpec(ObservableFamily.BLOCK_X)
    series = run_otoc(
        params, LINEAR, spec, 5,
        convention=HeisenbergConvention.UDAG_W_U, backend="numpy",
    )
    c2_ref, c4_ref = oracle.otoc_series(
        "linear", "block-x", 4, 5,
        convention="Udag_W_U", J=1.0, tau=0.5, h_x0=1.0, h_z0=1.0, gamma=0.1,
    )
    assert np.max(np.abs(series.C2 - c2_ref)) < 1e-11
    assert np.max(np.abs(series.C4 - c4_ref)) < 1e-11


@pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.value)
def test_c_zero_is_exactly_zero(family):
    params = ChainParams(N=4, J=1.0, tau=math.pi / 4)
    series = run_otoc(params, LINEAR, ObservableSpec(family), 1, backend="numpy")
    assert series.C[0] == 0.0


@pytest.mark.parametrize("family",
    [ObservableFamily.LOCAL_PAULI_X, ObservableFamily.LOCAL_PAULI_Z],
    ids=lambda f: f.value)
def test_local_families_have_unit_c2(family):
    # W_n and V0 are unitary, so Tr(W_n^2 V0^2)/D = 1 identically
    params = ChainParams(N=6, J=1.0, tau=math.pi / 4)
    series = run_otoc(params, LINEAR, ObservableSpec(family), 12, backend="numpy")
    assert np.max(np.abs(series.C2 - 1.0)) < 1e-10
    assert series.C_inf == 1.0


def test_block_series_normalization_fields():
    params = ChainParams(N=6, J=1.0, tau=math.pi / 4)
    series = run_otoc(
        params, LINEAR, ObservableSpec(ObservableFamily.BLOCK_X), 10, backend="numpy"
    )
    assert series.C_inf == pytest.approx(4.0 / 36.0)
    assert np.array_equal(series.C_norm, series.C / series.C_inf)
    assert series.d_A == series.d_B == 8
    assert np.min(series.C_norm) > -0.05 and np.max(series.C_norm) < 2.05


def test_stop_at_norm_truncates_after_first_crossing():
    params = ChainParams(N=6, J=1.0, tau=math.pi / 4)
    spec = ObservableSpec(ObservableFamily.BLOCK_X)
    full = run_otoc(params, LINEAR, spec, 60, backend="numpy")
    cut = run_otoc(params, LINEAR, spec, 60, stop_at_norm=0.5, backend="numpy")
    crossings = np.nonzero(full.C_norm > 0.5)[0]
    assert len(crossings) > 0
    first = crossings[0]
    assert len(cut.n) == first + 1
    assert cut.C_norm[-1] > 0.5
    assert np.all(cut.C_norm[:-1] <= 0.5)
    assert np.array_equal(cut.C2, full.C2[: first + 1])


def test_run_otoc_validates_n_max():
    params = ChainParams(N=2, J=1.0, tau=0.5)
    spec = ObservableSpec(ObservableFamily.LOCAL_PAULI_X, sites=(1, 2))
    with pytest.raises(ValueError, match="n_max"):
        run_otoc(params, LINEAR, spec, 0, backend="numpy")
