"""CSV writers for run traces and benchmark reports."""
import csv
from pathlib import Path

TRACE_COLUMNS = ["iteration", "seller_id", "price", "demand", "supply", "state", "welfare"]
SUMMARY_COLUMNS = ["seller_id", "final_price", "final_demand", "supply", "iterations", "converged"]
BENCH_COLUMNS = ["n_sellers", "n_buyers", "n", "plain_mean_s", "plain_std_s", "enc_mean_s",
                 "enc_std_s", "ct_mults", "expected_ct_mults"]


def _num(x):
    return "" if x is None else repr(float(x))


def write_trace(path, trace, scenario):
    """One row per (iteration, seller): the price/state a round started from and its demand."""
    ids = [s.id for s in scenario.sellers]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in trace.reports:
            for j, sid in enumerate(ids):
                welfare = None if r.welfares is None else r.welfares[j]
                w.writerow([r.iteration, sid, _num(r.prices[j]), _num(r.demands[j]),
                            _num(scenario.sellers[j].supply), _num(r.states[j]), _num(welfare)])


def write_summary(path, trace, scenario):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for j, s in enumerate(scenario.sellers):
            w.writerow([s.id, _num(trace.final_prices[j]), _num(trace.final_demands[j]),
                        _num(s.supply), trace.iterations, int(trace.converged)])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_bench(out_dir, report):
    out_dir = Path(out_dir)
    with open(out_dir / "bench.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_COLUMNS)
        for r in report.rows:
            w.writerow([r.n_sellers, r.n_buyers, repr(r.n), repr(r.plain_mean), repr(r.plain_std),
                        repr(r.enc_mean), repr(r.enc_std), r.ct_mults, r.expected_ct_mults])
    with open(out_dir / "bench_fit.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["a", "b", "c", "r2", "seed"])
        if report.coeffs is None:
            w.writerow(["", "", "", "", report.seed])
        else:
            w.writerow([*map(repr, report.coeffs), repr(report.r2), report.seed])
