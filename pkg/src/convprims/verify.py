"""Oracle-equivalence checks for every algorithm against :func:`conv2d_ref`."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .algorithms import Algorithm, compatible_algorithms, convolve
from .bench import ConvConfig, default_label, resnet50_configs
from .reference import conv2d_ref
from .tensor import ConvParams, Padding, Shape4D, max_relative_error, random_tensor

TOLERANCE = 1e-5
WINOGRAD_TOLERANCE = 1e-4
FAULT_SIZE = 1e-2

FUZZ_WINDOWS = (1, 3, 5, 7)
FUZZ_STRIDES = (1, 2)


def tolerance(alg: Algorithm) -> float:
    return WINOGRAD_TOLERANCE if alg is Algorithm.WINOGRAD else TOLERANCE


def random_params(rng: np.random.Generator) -> ConvParams:
    """One valid config: spatial 1..20, channels 1..32, K in {1,3,5,7}, S in {1,2}, batch 1..3."""
    k = int(rng.choice(FUZZ_WINDOWS))
    s = int(rng.choice(FUZZ_STRIDES))
    padding = Padding.SAME if rng.random() < 0.5 else Padding.VALID
    low = k if padding is Padding.VALID else 1
    rows, cols = (int(v) for v in rng.integers(low, 21, size=2))
    c, f = (int(v) for v in rng.integers(1, 33, size=2))
    batch = int(rng.integers(1, 4))
    return ConvParams(k, k, s, s, padding, Shape4D(batch, rows, cols, c), f)


def fuzz_configs(count: int = 200, seed: int = 0) -> list[ConvParams]:
    rng = np.random.default_rng(seed)
    return [random_params(rng) for _ in range(count)]


def reduced_resnet50(factor: int = 8) -> list[ConvConfig]:
    """The ResNet-50 suite with spatial extents divided by ``factor`` (at least 1)."""
    out = []
    for cfg in resnet50_configs(1):
        k, s, h, w, cin, cout = cfg.tuple
        params = ConvParams.square(k, s, max(1, h // factor), max(1, w // factor), cin, cout)
        out.append(ConvConfig(f"{cfg.label} (/{factor})", params))
    return out


@dataclass
class Failure:
    label: str
    algorithm: Algorithm
    error: float


@dataclass
class VerifyReport:
    worst: dict = field(default_factory=dict)  # Algorithm -> max relative error seen
    failures: list = field(default_factory=list)
    checks: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures


def check_config(params: ConvParams, algorithms: Iterable[Algorithm], seed: int = 0,
                 fault: Optional[Algorithm] = None) -> dict:
    """Max relative error vs the oracle for each compatible algorithm in ``algorithms``.

    ``fault`` perturbs one output element of that algorithm by 1e-2; it
    exists to prove the check can fail.
    """
    x = random_tensor(params.input, seed)
    w = random_tensor(params.filter_shape, seed + 1)
    ref = conv2d_ref(x, w, params)
    errors = {}
    for alg in compatible_algorithms(params):
        if alg not in algorithms:
            continue
        y = convolve(alg, x, w, params)
        if alg is fault:
            y = y.copy()
            y.flat[0] += FAULT_SIZE
        errors[alg] = max_relative_error(y, ref)
    return errors


def run_verify(algorithms: Optional[Iterable[Algorithm]] = None, count: int = 200, seed: int = 0,
               include_resnet: bool = True, fault: Optional[Algorithm] = None,
               log: Optional[Callable[[str], None]] = None) -> VerifyReport:
    """Fuzzed configs plus the reduced ResNet-50 suite, each algorithm checked against the oracle.

    The oracle itself (``direct``) is skipped.  Only configs compatible with
    at least one requested algorithm are run.
    """
    wanted = set(Algorithm if algorithms is None else algorithms) - {Algorithm.DIRECT}
    cases = [(default_label(p), p) for p in fuzz_configs(count, seed)]
    if include_resnet:
        cases += [(c.label, c.params) for c in reduced_resnet50()]
    report = VerifyReport()
    for i, (label, params) in enumerate(cases):
        if not wanted.intersection(compatible_algorithms(params)):
            continue
        errors = check_config(params, wanted, seed + 2 * i, fault)
        report.checks += len(errors)
        for alg, err in errors.items():
            report.worst[alg] = max(report.worst.get(alg, 0.0), err)
            if err > tolerance(alg):
                report.failures.append(Failure(f"{label} batch {params.input.batch} "
                                               f"{params.padding.value}", alg, err))
                if log:
                    log(f"FAIL {alg.value} on {label} ({params.padding.value}, batch "
                        f"{params.input.batch}): max relative error {err:.3e} > {tolerance(alg):.0e}")
    return report
