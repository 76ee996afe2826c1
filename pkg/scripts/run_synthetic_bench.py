"""Run the benchmark harness on the bundled synthetic suite."""
import argparse

from sprm.bench import run_benchmark
from sprm.synthetic import bundled_path


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="bench_out")
    ap.add_argument("--jobs", type=int, default=None)
    args = ap.parse_args()
    summary = run_benchmark(bundled_path("synthetic.ini"), args.out, args.jobs)
    for ds in summary["datasets"]:
        if "error" in ds:
            print(f"{ds['name']}: FAILED {ds['error']}")
            continue
        for row in ds["metrics"]:
            print(f"{ds['name']:10s} {row['model']:11s} {row['split']:14s} mse={row['mse']:.6g}")


if __name__ == "__main__":
    main()
