"""
Convergence on random points
============================

Shrink a random configuration by sigma, estimate a derivative at the centre
and watch the error fall like a power of sigma.  A handful of trials is
enough to see the rates; the full tables use 32.
"""

from mlsorth.harness import (
    StudyConfig,
    format_summary_table,
    report_header,
    run_convergence_study,
    run_detail_study,
)

for fn in ("f1", "f2", "f3"):
    cfg = StudyConfig(dim=2, function=fn, beta=(1, 0), trials=8, seed=7)
    rep = run_convergence_study(cfg)
    print(report_header(cfg))
    print(format_summary_table(rep))

# one configuration, growing N: rejected monomials and second-derivative errors
det = run_detail_study(seed=7)
for row in det.rows:
    errs = " ".join(f"{row.log2_error(b):7.1f}" for b in ((2, 0), (1, 1), (0, 2)))
    print(f"N={row.n:2d} rejected={row.n_rejected:2d} log2|err| {errs}")
