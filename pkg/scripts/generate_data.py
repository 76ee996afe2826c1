"""Regenerate the bundled synthetic CSVs and the benchmark config."""
import os
import sys

from sprm.synthetic import outlier_synthetic, series_synthetic, write_csv

CONFIG = """\
[outliers]
path = outliers.csv
target = y
features = x1, x2
degree = 2
lm = 3
anomalies = 2
splits = odd-even, head-tail

[series]
path = series.csv
target = load
features = daily, weekly, trend
degree = 2
lm = 4
anomalies = 24
splits = odd-even, head-tail
"""


def main(out_dir):
    os.makedirs(out_dir, exist_ok=True)
    write_csv(outlier_synthetic().data, os.path.join(out_dir, "outliers.csv"))
    write_csv(series_synthetic().data, os.path.join(out_dir, "series.csv"))
    with open(os.path.join(out_dir, "synthetic.ini"), "w") as fh:
        fh.write(CONFIG)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else
         os.path.join(os.path.dirname(__file__), "..", "src", "sprm", "data"))
