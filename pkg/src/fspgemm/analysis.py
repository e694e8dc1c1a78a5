"""Analytical models: memory-traffic reduction, runtime, and board sizing.

Three small models close the loop between the simulator and hardware
reasoning: the off-chip memory access reduction of the vector-major
format, a runtime estimate R = N_Ops / (F * SW * NUM_PE * U), and a
three-step procedure that sizes SW from memory bandwidth and NUM_PE
from the logic budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from fspgemm.csv_format import count_vectors, csr_to_csv
from fspgemm.matrices import CsrMatrix

BITS_PER_GBPS = 8e9  # decimal GB/s to bits/s


@dataclass(frozen=True)
class BoardSpec:
    """Budgets of a target board: bandwidth (bits/s), logic units, clock (Hz)."""

    mem_bandwidth_c1: float
    logic_budget_c2: float
    freq_f: float
    word_bits: int = 32

    def __post_init__(self):
        for name in ("mem_bandwidth_c1", "logic_budget_c2", "freq_f", "word_bits"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class PerfInputs:
    """Inputs of the runtime model, with the lumped ratio alpha = N_Ops/(F*U)."""

    n_ops: float
    freq_f: float
    parallelism_p: float
    stuf_u: float

    def __post_init__(self):
        _require_positive(n_ops=self.n_ops, freq_f=self.freq_f, parallelism_p=self.parallelism_p)
        if not 0.0 < self.stuf_u <= 1.0:
            raise ValueError(f"stuf_u must lie in (0, 1], got {self.stuf_u}")

    @property
    def alpha(self) -> float:
        return self.n_ops / (self.freq_f * self.stuf_u)


@dataclass(frozen=True)
class OptimizerResult:
    """Chosen SW and NUM_PE plus the fitted beta and both constraint usages.

    f1 = word_bits * sw * freq may overshoot the bandwidth budget because
    sw is a ceiling; the slack fields report that rather than hiding it.
    """

    sw: int
    num_pe: int
    beta: float
    f1_used: float
    f1_budget: float
    f2_used: float
    f2_budget: float

    @property
    def f1_slack(self) -> float:
        return self.f1_budget - self.f1_used

    @property
    def f2_slack(self) -> float:
        return self.f2_budget - self.f2_used

    def to_dict(self) -> dict:
        return {
            "sw": self.sw,
            "num_pe": self.num_pe,
            "beta": self.beta,
            "constraints": {
                "f1": {"used": self.f1_used, "budget": self.f1_budget, "slack": self.f1_slack},
                "f2": {"used": self.f2_used, "budget": self.f2_budget, "slack": self.f2_slack},
            },
        }


def _require_positive(**kwargs) -> None:
    for name, value in kwargs.items():
        if value <= 0:
            raise ValueError(f"{name} must be positive, got {value}")


def omar(a: CsrMatrix, num_pe: int) -> float:
    """Off-chip memory access reduction percentage at a given PE count.

    One B-row load is shared by all members of a vector, so the saving
    per vector is (members - 1) loads: 100 * (nnz - vectors) / nnz.
    """
    if num_pe < 1:
        raise ValueError("num_pe must be at least 1")
    if a.nnz == 0:
        raise ValueError("empty matrix: reduction is undefined with no accesses")
    vectors = count_vectors(csr_to_csv(a, num_pe))
    return 100.0 * (a.nnz - vectors) / a.nnz


def runtime_model(n_ops: float, freq_f: float, sw: int, num_pe: int, stuf_u: float) -> float:
    """Estimated seconds: R = N_Ops / (F * SW * NUM_PE * U)."""
    _require_positive(n_ops=n_ops, freq_f=freq_f, sw=sw, num_pe=num_pe)
    if not 0.0 < stuf_u <= 1.0:
        raise ValueError(f"stuf_u must lie in (0, 1], got {stuf_u}")
    return n_ops / (freq_f * sw * num_pe * stuf_u)


def stuf_from_runtime(n_ops: float, freq_f: float, parallelism_p: float, runtime_r: float) -> float:
    """Utilisation U = N_Ops / (F * P * R); exact inverse of runtime_model.

    For cross-platform comparison P counts hardware lanes (for the FPGA
    board, twice the DSP count); for the model's own round trip P is
    sw * num_pe.
    """
    _require_positive(n_ops=n_ops, freq_f=freq_f, parallelism_p=parallelism_p, runtime_r=runtime_r)
    return n_ops / (freq_f * parallelism_p * runtime_r)


def optimize_params(
    board: BoardSpec,
    logic_usage_probe: Callable[[int, int], float],
) -> OptimizerResult:
    """Size the architecture in three steps.

    1. sw = ceil(C1 / (word_bits * F)): the widest fetch the memory
       bandwidth can feed every cycle.
    2. beta = probe(sw, 1) / sw: logic units per unit of parallelism,
       fitted from a single-PE build report (the probe stands in for the
       offline compiler).
    3. num_pe = ceil(C2 / (beta * sw)): fill the logic budget.
    """
    sw = math.ceil(board.mem_bandwidth_c1 / (board.word_bits * board.freq_f))
    f2_probe = logic_usage_probe(sw, 1)
    if f2_probe is None or f2_probe <= 0:
        raise ValueError(f"probe returned non-positive logic usage {f2_probe!r} at sw={sw}, num_pe=1")
    beta = f2_probe / sw
    num_pe = math.ceil(board.logic_budget_c2 / (beta * sw))
    return OptimizerResult(
        sw=sw,
        num_pe=num_pe,
        beta=beta,
        f1_used=board.word_bits * sw * board.freq_f,
        f1_budget=board.mem_bandwidth_c1,
        f2_used=beta * sw * num_pe,
        f2_budget=board.logic_budget_c2,
    )


def gbps_to_bits_per_s(gbps: float) -> float:
    return gbps * BITS_PER_GBPS
