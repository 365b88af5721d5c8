"""
Benchmarking ResNet-50 layers
=============================

The built-in suite holds the 26 distinct convolution shapes of ResNet-50.
Gigaflops use the direct flop count for every algorithm, so Winograd's
saved work shows up as a higher rate.

The full suite takes under a minute on one core. This script times a few
layers only.
"""

from convprims.bench import fastest_by_config, resnet50_configs, run_suite
from convprims.report import ReportFormat, write_report

configs = resnet50_configs(batch=1)
print(len(configs), "configs; first:", configs[0].label)

picked = [c for c in configs if c.params.input.rows == 14][:4]
results = run_suite(picked, reps=3, warmups=1)
print(write_report(results, ReportFormat.MARKDOWN).decode())

for label, alg in fastest_by_config(results).items():
    print(f"{label:<24} fastest: {alg.value}")
