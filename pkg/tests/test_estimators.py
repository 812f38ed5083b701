import numpy as np
import pytest

from arraycal import GainPhaseCalibrator, cosine_similarity_db, impairment_gain_matrix
from arraycal.errors import ValidationError


class TestGainPhaseCalibrator:
    def test_fit_recovers_gains(self, small_bundle):
        b = small_bundle
        cal = GainPhaseCalibrator(algorithm="iterative", seed=1).fit(b.measurements,
                                                                     b.ideal)
        truth = impairment_gain_matrix(b.profile, b.config)
        for n in range(b.config.num_subcarriers):
            assert cosine_similarity_db(cal.gains_[n], truth[n]) >= -0.01

    def test_transform_flattens(self, small_bundle):
        b = small_bundle
        cal = GainPhaseCalibrator(algorithm="eigenvector").fit(b.measurements, b.ideal)
        out = cal.transform(b.measurements)
        # calibrated measurements match the ideal model up to the per-subcarrier gauge
        expected = b.ideal * b.transmit_phases.values[None, None, :]
        ratio = out / expected
        # constant complex factor per subcarrier
        spread = np.abs(ratio - ratio[:, :1, :1])
        assert np.max(spread) < 1e-6

    def test_offsets_attributes(self, small_bundle):
        b = small_bundle
        cal = GainPhaseCalibrator(algorithm="eigenvector",
                                  radio_config=b.config).fit(b.measurements, b.ideal)
        assert cal.phase_offsets_.shape == (b.shape[1],)
        assert cal.time_offsets_.shape == (b.shape[1],)
        assert np.all(cal.offsets_.fit_residual_rad < 1e-6)

    def test_single_matrix_input(self, small_bundle):
        b = small_bundle
        cal = GainPhaseCalibrator(algorithm="eigenvector").fit(b.measurements[0],
                                                               b.ideal[0])
        assert cal.gains_.shape == (1, b.shape[1])

    def test_sklearn_params(self):
        cal = GainPhaseCalibrator(max_iterations=10, seed=3)
        params = cal.get_params()
        assert params["max_iterations"] == 10
        cal.set_params(algorithm="eigenvector")
        assert cal.algorithm == "eigenvector"

    def test_requires_ideal(self, small_bundle):
        with pytest.raises(ValidationError):
            GainPhaseCalibrator().fit(small_bundle.measurements)

    def test_shape_mismatch(self, small_bundle):
        b = small_bundle
        with pytest.raises(ValidationError):
            GainPhaseCalibrator().fit(b.measurements, b.ideal[:, :4])

    def test_transform_before_fit(self, small_bundle):
        with pytest.raises(ValidationError):
            GainPhaseCalibrator().transform(small_bundle.measurements)
