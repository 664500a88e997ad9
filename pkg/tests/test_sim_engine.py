import math

import numpy as np
import pytest

from algred import sim_engine as se


def _cfg(**kw):
    base = dict(alphabet=4, schemes=("ar-zf",), snr_grid_db=(6.0,),
                frames_per_point=2000, seed=3, min_errors=10 ** 9, chunk=1000)
    base.update(kw)
    return se.SimConfig(**base)


class TestConfig:
    def test_valid(self):
        _cfg().validate()
        _cfg(schemes=("ar-zfdfe+mmse", "ml")).validate()

    @pytest.mark.parametrize("kw", [
        dict(alphabet=8),
        dict(schemes=()),
        dict(schemes=("zf",)),
        dict(schemes=("ar-zf+gdfe",)),
        dict(snr_grid_db=()),
        dict(snr_grid_db=(4.0, 4.0)),
        dict(snr_grid_db=(4.0, 2.0)),
        dict(frames_per_point=100),
        dict(min_errors=0),
    ])
    def test_invalid(self, kw):
        with pytest.raises(se.ConfigError):
            _cfg(**kw).validate()


def test_channel_moments():
    rng = np.random.default_rng(0)
    h = se.sample_channel(rng, 100_000)
    power = np.mean(np.abs(h) ** 2)
    assert power == pytest.approx(1.0, rel=0.01)
    assert np.mean(np.sum(np.abs(h) ** 2, axis=(1, 2))) == pytest.approx(4.0, rel=0.02)


def test_reproducibility_and_thread_independence():
    cfg = _cfg(schemes=("ar-zf", "ml"), snr_grid_db=(4.0, 8.0))
    a = se.run_sweep(cfg)
    b = se.run_sweep(cfg)
    c = se.run_sweep(cfg, threads=2)
    assert a == b == c


def test_early_stopping_is_unbiased():
    full = se.run_point(_cfg(snr_grid_db=(4.0,), frames_per_point=60_000,
                             seed=9), "ar-zf", 0, 0)
    stopped = se.run_point(_cfg(snr_grid_db=(4.0,), frames_per_point=60_000,
                                seed=9, min_errors=300), "ar-zf", 0, 0)
    sigma = math.sqrt(full.fer * (1 - full.fer) / stopped.frames)
    assert stopped.frames < full.frames
    assert abs(stopped.fer - full.fer) <= 3 * sigma


def test_noise_off_gives_zero_errors():
    cfg = _cfg(schemes=("ar-zf", "ar-zfdfe", "lll-zf", "ml"),
               snr_grid_db=(200.0,), frames_per_point=1000, chunk=500)
    for r in se.run_sweep(cfg):
        assert r.frame_errors == 0


def test_ml_dominates_all_schemes():
    cfg = _cfg(schemes=("ml", "ar-zf", "ar-zfdfe", "lll-zf", "lll-zfdfe"),
               snr_grid_db=(8.0,), frames_per_point=20_000, chunk=4096, seed=5)
    recs = {r.scheme: r for r in se.run_sweep(cfg)}
    ml = recs["ml"]
    for name, r in recs.items():
        if name == "ml":
            continue
        sigma = math.sqrt(max(r.fer * (1 - r.fer), ml.fer) / r.frames)
        assert ml.fer <= r.fer + 2 * sigma, name


def test_zfdfe_dominates_zf():
    cfg = _cfg(schemes=("ar-zf", "ar-zfdfe"), snr_grid_db=(4.0, 8.0, 12.0),
               frames_per_point=10_000, seed=6)
    recs = se.run_sweep(cfg)
    for snr in cfg.snr_grid_db:
        zf = next(r for r in recs if r.scheme == "ar-zf" and r.snr_db == snr)
        dfe = next(r for r in recs if r.scheme == "ar-zfdfe" and r.snr_db == snr)
        sigma = math.sqrt(zf.fer * (1 - zf.fer) / zf.frames)
        assert dfe.fer <= zf.fer + 2 * sigma


def test_step_statistics_small():
    hist, mean = se.step_stats(30_000, seed=1)
    total = hist.sum()
    assert mean == pytest.approx(1.923, abs=0.05)
    assert hist[1] / total == pytest.approx(0.382, abs=0.015)
    assert hist[2] / total == pytest.approx(0.394, abs=0.015)
    assert hist[12:].sum() == 0


def test_step_stats_independent_of_snr():
    # the walk statistics come from H alone; two sweeps at different SNR
    # with the same seed see identical histograms
    cfg_lo = _cfg(snr_grid_db=(0.0,), frames_per_point=5000)
    cfg_hi = _cfg(snr_grid_db=(18.0,), frames_per_point=5000)
    lo = se.run_sweep(cfg_lo)[0]
    hi = se.run_sweep(cfg_hi)[0]
    assert lo.step_histogram == hi.step_histogram


def test_ar_and_lll_within_one_db_16qam():
    # with MMSE-GDFE + ZF at 16-QAM the two reductions perform alike
    cfg = se.SimConfig(alphabet=16, schemes=("ar-zf+mmse", "lll-zf+mmse"),
                       snr_grid_db=(16.0, 18.0, 20.0, 22.0, 24.0),
                       frames_per_point=100_000, seed=77, min_errors=300)
    recs = se.run_sweep(cfg)
    gap = abs(se.snr_at_fer(recs, "ar-zf+mmse", 1e-2)
              - se.snr_at_fer(recs, "lll-zf+mmse", 1e-2))
    assert math.isfinite(gap)
    assert gap <= 1.0


def test_distribution_checks_pass():
    rep = se.distribution_checks(100_000, seed=4)
    assert rep.t_chi2_p > 0.01
    assert rep.z_chi2_p > 0.01
    assert rep.t_norm_quadrature == pytest.approx(1.0, abs=1e-8)
    assert rep.z_norm_quadrature == pytest.approx(1.0, abs=1e-8)
    assert 0.030 <= rep.p_tail_rmin <= 0.046
    assert rep.tail_5rmin_count == 0
    assert rep.t_mean_empirical == pytest.approx(rep.t_mean_quadrature, rel=0.02)
    assert rep.passed


def test_t_cdf_properties():
    assert se.t_cdf(2.0) == 0.0
    assert se.t_cdf(50.0) > 0.99
    # K1 integral form agrees with the library Bessel evaluation
    for z in (0.3, 1.0, 2.5, 6.0):
        assert se.z_density_integral(z) == pytest.approx(float(se.z_density(z)),
                                                         rel=1e-8)


class TestDiversitySlope:
    def test_exact_power_law(self):
        recs = [se.FERRecord("x", snr, 10 ** 6, 1000, 0.3 / (10 ** (snr / 10)) ** 2,
                             0.0) for snr in (10.0, 14.0, 18.0)]
        assert se.diversity_slope(recs, "x") == pytest.approx(2.0, abs=1e-6)

    def test_insufficient_points(self):
        recs = [se.FERRecord("x", 10.0, 1000, 5, 0.005, 0.0)]
        with pytest.raises(se.SlopeError):
            se.diversity_slope(recs, "x")


def test_snr_at_fer_interpolation():
    recs = [se.FERRecord("x", 0.0, 1000, 100, 1e-1, 0.0),
            se.FERRecord("x", 10.0, 1000, 10, 1e-3, 0.0)]
    assert se.snr_at_fer(recs, "x", 1e-2) == pytest.approx(5.0)
    assert math.isnan(se.snr_at_fer(recs, "x", 1e-5))


def test_csv_formats(tmp_path):
    cfg = _cfg(schemes=("ar-zf",), snr_grid_db=(6.0,), frames_per_point=1000)
    recs = se.run_sweep(cfg)
    import io
    buf = io.StringIO()
    se.write_fer_csv(recs, buf)
    lines = buf.getvalue().strip().split("\n")
    assert lines[0] == "scheme,snr_db,frames,frame_errors,fer,mean_steps"
    assert lines[1].startswith("ar-zf,6,1000,")
    sbuf = io.StringIO()
    se.write_steps_csv(recs, sbuf)
    slines = sbuf.getvalue().strip().split("\n")
    assert slines[0] == "steps,count"
    assert sum(int(l.split(",")[1]) for l in slines[1:]) == 1000
