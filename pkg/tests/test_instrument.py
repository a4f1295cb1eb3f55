import numpy as np
import pytest

from conftest import random_jones
from tetrapol.errors import DegenerateFrame, Singular, Unphysical
from tetrapol.instrument import (PolarimeterModel, TetrahedronFrame, det_b, detection_operators,
                                 detector_intensities, effective_frame, expected_counts,
                                 instrument_matrix, instrument_matrix_from_frame,
                                 maximize_determinant, optimal_splitting_ratio, povm_sum,
                                 simulate_counts, stokes_response, throughputs)
from tetrapol.optics import AnalyzerSpec, PpbsSpec
from tetrapol.stokes import JonesVector, StokesVector, jones_to_stokes, stokes_to_jones

X_SQ, Y_SQ = optimal_splitting_ratio()
IDEAL = PolarimeterModel.optimal()
H = StokesVector(1, 1, 0, 0)
LO, HI = (1 - 1 / np.sqrt(3)) / 4, (1 + 1 / np.sqrt(3)) / 4


def literal_intensities(alpha, beta, x, y):
    """Detector intensities written out term by term for the diagonal/circular analyzers.

    Vectorized over arrays; independent of the package's forward model.
    """
    c = s = np.sqrt(0.5)
    i1 = np.abs(alpha * y * c + beta * x * s) ** 2
    i2 = np.abs(-alpha * y * s + beta * x * c) ** 2
    e = np.exp(1j * np.pi / 2)
    i3 = np.abs(alpha * x * c + beta * y * np.conj(e) * s) ** 2
    i4 = np.abs(-alpha * x * e * s + beta * y * c) ** 2
    return np.stack([i1, i2, i3, i4], axis=-1)


def grid_det_oracle(x_sq):
    """|det B| from intensities of H, V, D and R inputs (B columns by linearity)."""
    x, y = np.sqrt(x_sq), np.sqrt(1 - x_sq)
    r2 = np.sqrt(0.5)
    ih = literal_intensities(1, 0, x, y)
    iv = literal_intensities(0, 1, x, y)
    idg = literal_intensities(r2, r2, x, y)
    ir = literal_intensities(r2, 1j * r2, x, y)
    c0 = (ih + iv) / 2
    b = np.stack([c0, (ih - iv) / 2, idg - c0, ir - c0], axis=-1)
    return np.abs(np.linalg.det(b))


class TestOptimalRatio:
    def test_values(self):
        assert X_SQ == pytest.approx(0.7886751, abs=1e-7)
        assert Y_SQ == pytest.approx(0.2113249, abs=1e-7)
        assert X_SQ + Y_SQ == 1.0

    def test_grid_oracle_peak(self):
        grid = np.linspace(0.5, 1, 100_000, endpoint=False)
        d = grid_det_oracle(grid)
        assert abs(grid[np.argmax(d)] - X_SQ) <= grid[1] - grid[0]

    def test_oracle_agrees_with_det_b(self):
        for x_sq in (0.55, 0.7, X_SQ, 0.95):
            assert det_b(x_sq, AnalyzerSpec.diagonal(), AnalyzerSpec.circular()) == pytest.approx(
                grid_det_oracle(np.array([x_sq]))[0], rel=1e-10)

    def test_golden_section(self):
        assert maximize_determinant(tolerance=1e-6) == pytest.approx(X_SQ, abs=1e-6)

    def test_det_vanishes_at_ends(self):
        args = (AnalyzerSpec.diagonal(), AnalyzerSpec.circular())
        assert det_b(0.5, *args) == pytest.approx(0, abs=1e-15)
        assert det_b(1.0, *args) == pytest.approx(0, abs=1e-15)

    def test_bad_tolerance(self):
        with pytest.raises(ValueError):
            maximize_determinant(tolerance=0)


class TestDetectorIntensities:
    def test_h_input(self):
        i = detector_intensities(JonesVector(1, 0), IDEAL)
        np.testing.assert_allclose(i, [Y_SQ / 2, Y_SQ / 2, X_SQ / 2, X_SQ / 2], atol=1e-12)
        np.testing.assert_allclose(i, [LO, LO, HI, HI], atol=1e-12)
        np.testing.assert_allclose(i, [0.105662, 0.105662, 0.394338, 0.394338], atol=1e-6)

    @pytest.mark.parametrize("j", range(4))
    def test_frame_states(self, j):
        b = effective_frame(IDEAL).as_array()
        v = stokes_to_jones(StokesVector.from_reduced(b[j]))
        i = detector_intensities(v, IDEAL)
        expected = np.full(4, 1 / 6)
        expected[j] = 1 / 2
        np.testing.assert_allclose(i / i.sum(), expected, atol=1e-12)
        w = stokes_to_jones(StokesVector.from_reduced(-b[j]))
        i = detector_intensities(w, IDEAL)
        expected = np.full(4, 1 / 3)
        expected[j] = 0
        np.testing.assert_allclose(i / i.sum(), expected, atol=1e-12)

    def test_matches_literal_equations(self, rng):
        x, y = np.sqrt(X_SQ), np.sqrt(Y_SQ)
        for v in random_jones(rng, 200):
            np.testing.assert_allclose(detector_intensities(v, IDEAL),
                                       literal_intensities(v.alpha, v.beta, x, y), atol=1e-12)

    def test_efficiency_and_dark(self):
        m = PolarimeterModel.optimal(efficiencies=(0.5, 1, 1, 0.8), dark_rate=(0.1, 0, 0, 0))
        i = detector_intensities(JonesVector(1, 0), m)
        np.testing.assert_allclose(i, [0.5 * LO + 0.1, LO, HI, 0.8 * HI], atol=1e-12)

    def test_energy_and_povm(self, rng):
        for v in random_jones(rng, 1000):
            assert detector_intensities(v, IDEAL).sum() == pytest.approx(v.intensity, abs=1e-12)
        np.testing.assert_allclose(povm_sum(IDEAL), np.eye(2), atol=1e-10)

    def test_povm_complete_off_optimum(self):
        m = PolarimeterModel(PpbsSpec.from_ratio(0.6, 0.3, -0.2), AnalyzerSpec(0.3, 1.0), AnalyzerSpec(1.1, -2.0))
        np.testing.assert_allclose(povm_sum(m), np.eye(2), atol=1e-12)
        assert np.all(np.linalg.eigvalsh(detection_operators(m)) >= -1e-15)


class TestEffectiveFrame:
    def test_regular_at_optimum(self):
        f = effective_frame(IDEAL)
        np.testing.assert_allclose(f.pairwise_dots(), -1 / 3, atol=1e-9)
        assert np.linalg.norm(f.as_array().sum(axis=0)) < 1e-9
        assert f.is_regular()

    def test_polarizing_limit_is_degenerate(self):
        f = effective_frame(PolarimeterModel(PpbsSpec(1.0, 0.0)))
        assert not f.is_regular()
        assert f.is_coplanar()

    def test_non_optimal_ratio(self):
        # detection states (y, +-x)/sqrt2 and (x, +-i y)/sqrt2 give b = (y^2-x^2, +-2xy, 0) and (x^2-y^2, 0, +-2xy)
        x_sq = 0.7
        c, s = 2 * x_sq - 1, 2 * np.sqrt(x_sq * (1 - x_sq))
        expected = [[-c, s, 0], [-c, -s, 0], [c, 0, s], [c, 0, -s]]
        f = effective_frame(PolarimeterModel.with_ratio(x_sq))
        np.testing.assert_allclose(f.as_array(), expected, atol=1e-12)
        assert not f.is_regular()
        # with both analyzers at theta = 45 deg the vector sum still vanishes
        assert np.linalg.norm(f.as_array().sum(axis=0)) < 1e-12

    def test_zero_amplitude_detector(self):
        m = PolarimeterModel(PpbsSpec(1.0, 0.0), AnalyzerSpec(0, 0), AnalyzerSpec.circular())
        with pytest.raises(DegenerateFrame):
            effective_frame(m)


class TestInstrumentMatrix:
    def test_h_response(self):
        im = instrument_matrix_from_frame(effective_frame(IDEAL))
        np.testing.assert_allclose(im.apply(H), [LO, LO, HI, HI], atol=1e-12)
        np.testing.assert_allclose(im.apply(H), detector_intensities(JonesVector(1, 0), IDEAL), atol=1e-12)

    def test_first_column(self):
        k = -np.sqrt(1 / 3)
        f = TetrahedronFrame.from_array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [k, k, k]])
        t = np.array([1.0, 0.5, 2.0, 0.25])
        im = instrument_matrix_from_frame(f, t)
        np.testing.assert_allclose(im.b[:, 0], t / 4)

    def test_coplanar_frame_is_singular(self):
        f = TetrahedronFrame.from_array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]])
        with pytest.raises(Singular):
            instrument_matrix_from_frame(f)

    def test_regular_frame_condition_number(self):
        # B^T B = diag(1/4, 1/12, 1/12, 1/12) for a regular frame, so cond = sqrt(3)
        assert instrument_matrix(IDEAL).cond == pytest.approx(np.sqrt(3), rel=1e-12)

    def test_inverse(self):
        im = instrument_matrix(IDEAL)
        np.testing.assert_allclose(im.b @ im.b_inv, np.eye(4), atol=1e-8 * im.cond)

    def test_two_forward_models_agree(self, rng):
        b = instrument_matrix(IDEAL).b
        for v in random_jones(rng, 1000):
            np.testing.assert_allclose(detector_intensities(v, IDEAL), b @ jones_to_stokes(v).as_array(), atol=1e-10)

    def test_lossy_model_throughputs(self, rng):
        m = PolarimeterModel(PpbsSpec.from_ratio(0.72, 0.1, 0.05), efficiencies=(0.9, 0.7, 1.0, 0.6))
        b = instrument_matrix(m).b
        np.testing.assert_allclose(b, stokes_response(m), atol=1e-12)
        np.testing.assert_allclose(throughputs(IDEAL), 1.0, atol=1e-12)
        for v in random_jones(rng, 100):
            np.testing.assert_allclose(detector_intensities(v, m), b @ jones_to_stokes(v).as_array(), atol=1e-12)


class TestSimulateCounts:
    def test_deterministic(self):
        assert np.array_equal(simulate_counts(H, IDEAL, 1e5, 42), simulate_counts(H, IDEAL, 1e5, 42))

    def test_rejects_zero_mean(self):
        with pytest.raises(ValueError):
            simulate_counts(H, IDEAL, 0, 1)

    def test_rejects_unphysical(self):
        with pytest.raises(Unphysical):
            simulate_counts(StokesVector(1, 1, 1, 0), IDEAL, 10, 1)

    def test_mixed_state_by_linearity(self):
        lam = expected_counts(StokesVector(1, 0, 0, 0), IDEAL, 100)
        np.testing.assert_allclose(lam, 25, atol=1e-12)

    def test_h_fraction(self):
        # binomial standard error of the detector-1 fraction over 1000 acquisitions
        n = simulate_counts(H, IDEAL, 1e5, 7, size=1000)
        frac = n[:, 0] / n.sum(axis=1)
        se = np.sqrt(LO * (1 - LO) / 1e5) / np.sqrt(1000)
        assert abs(frac.mean() - LO) < 3 * se

    @pytest.mark.parametrize("lam", [0.1, 1.0, 10.0, 1e4])
    def test_poisson_moments(self, lam):
        n = simulate_counts(H, IDEAL, lam / LO, 11, size=100_000)[:, 0]
        draws = len(n)
        assert abs(n.mean() - lam) < 5 * np.sqrt(lam / draws)
        assert abs(n.var(ddof=1) - lam) < 5 * np.sqrt((lam + 2 * lam**2) / draws)

    def test_dark_counts_added(self):
        m = PolarimeterModel.optimal(dark_rate=(3, 3, 3, 3))
        np.testing.assert_allclose(expected_counts(H, m, 100), 100 * np.array([LO, LO, HI, HI]) + 3)
