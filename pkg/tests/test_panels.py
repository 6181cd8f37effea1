import json

import numpy as np
import pytest

from fcnets.panels import (
    BandSpec,
    TimeSeriesPanel,
    bandpass_filter,
    fisher_z,
    inverse_fisher_z,
    load_manifest,
    load_timeseries,
    save_timeseries,
)


def _panel(rng, n=4, t=64, subjects=2):
    return TimeSeriesPanel(
        subjects=[rng.standard_normal((n, t)) for _ in range(subjects)],
        node_labels=[f"r{i}" for i in range(n)],
        coordinates=rng.standard_normal((n, 3)),
        sampling_interval=2.0,
    )


def test_roundtrip_both_layouts(tmp_path, rng):
    panel = _panel(rng)
    for layout in ("rows-are-time", "rows-are-nodes"):
        p = tmp_path / f"{layout}.csv"
        save_timeseries(p, panel, subject=0, layout=layout)
        back = load_timeseries(p, layout=layout, sampling_interval=2.0)
        assert np.allclose(back.subjects[0], panel.subjects[0], atol=1e-10)


def test_load_rejects_ragged(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1.0,2.0\n3.0\n")
    with pytest.raises(ValueError, match="row"):
        load_timeseries(p)


def test_panel_validation():
    with pytest.raises(ValueError):
        TimeSeriesPanel(subjects=[np.zeros((3, 2))], node_labels=None, coordinates=None, sampling_interval=1.0)
    with pytest.raises(ValueError):
        TimeSeriesPanel(
            subjects=[np.full((2, 10), np.nan)],
            node_labels=None,
            coordinates=None,
            sampling_interval=1.0,
        )


def test_manifest_roundtrip(tmp_path, rng):
    panel = _panel(rng, subjects=3)
    files = []
    for s in range(3):
        f = f"s{s}.csv"
        save_timeseries(tmp_path / f, panel, subject=s)
        files.append(f)
    doc = {
        "subject_files": files,
        "layout": "rows-are-time",
        "sampling_interval": 2.0,
        "node_labels": panel.node_labels,
        "coordinates": panel.coordinates.tolist(),
    }
    mpath = tmp_path / "manifest.json"
    mpath.write_text(json.dumps(doc))
    back = load_manifest(mpath)
    assert back.subject_count == 3
    assert back.sampling_interval == 2.0
    assert np.allclose(back.subjects[1], panel.subjects[1], atol=1e-10)
    assert np.allclose(back.coordinates, panel.coordinates)


def test_bandpass_keeps_band_kills_rest(rng):
    t = 512
    dt = 1.0
    time = np.arange(t) * dt
    low_sine = np.sin(2 * np.pi * 0.01 * time)   # below band
    mid_sine = np.sin(2 * np.pi * 0.10 * time)   # inside band
    high_sine = np.sin(2 * np.pi * 0.40 * time)  # above band
    x = (low_sine + mid_sine + high_sine)[None, :]
    panel = TimeSeriesPanel([x], None, None, sampling_interval=dt)
    out = bandpass_filter(panel, BandSpec(0.05, 0.2)).subjects[0][0]
    # Remaining signal correlates with the in-band sine, not the others.
    assert abs(np.corrcoef(out, mid_sine)[0, 1]) > 0.99
    assert abs(np.corrcoef(out, low_sine)[0, 1]) < 0.05
    assert abs(np.corrcoef(out, high_sine)[0, 1]) < 0.05


def test_band_validation():
    with pytest.raises(ValueError):
        BandSpec(0.2, 0.1)
    with pytest.raises(ValueError):
        BandSpec(-0.1, 0.2)
    band = BandSpec(0.01, 0.4)
    with pytest.raises(ValueError, match="Nyquist"):
        band.validate_for(sampling_interval=2.0)  # Nyquist 0.25 < 0.4


def test_fisher_z_inverse_pair():
    r = np.array([-0.9, -0.25, 0.0, 0.5, 0.99])
    assert np.allclose(inverse_fisher_z(fisher_z(r)), r, atol=1e-12)
    assert np.isclose(fisher_z(0.5), np.arctanh(0.5))
    with pytest.raises(ValueError):
        fisher_z(1.0)
