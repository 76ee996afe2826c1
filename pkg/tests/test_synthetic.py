import numpy as np

from sprm.bench import ingest_csv
from sprm.synthetic import (BUNDLED, bundled_path, outlier_synthetic, outlier_truth,
                            series_synthetic)


def test_bundled_csvs_match_generators():
    for key, gen in (("outliers", outlier_synthetic), ("series", series_synthetic)):
        fname, features, target = BUNDLED[key]
        disk = ingest_csv(bundled_path(fname), target, features)
        ref = gen().data
        assert np.array_equal(disk.X, ref.X) and np.array_equal(disk.y, ref.y)


def test_outlier_set_shape():
    s = outlier_synthetic()
    X, y = s.data.X, s.data.y
    assert X.shape == (20, 2)
    assert np.all(X.min(axis=0) == 0) and np.all(X.max(axis=0) == 1)
    clean = np.abs(y - outlier_truth(X)) < 1e-12
    assert tuple(np.flatnonzero(~clean)) == s.anomalies


def test_series_shape():
    s = series_synthetic()
    assert s.data.N == 720 and len(s.anomalies) == 24 and max(s.anomalies) < 698
