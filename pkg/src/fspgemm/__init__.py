"""Sparse matrix-matrix multiplication toolkit.

Subsystems:
  matrices    COO/CSR containers, conversions, validation
  mmio        Matrix Market coordinate reader/writer
  csv_format  vector-major compressed sparse vector format and FCSV files
  gustavson   row-wise product engine, oracle, FLOP counting
  pipeline    functional simulation of the load / PE / store dataflow
  analysis    memory-access reduction, runtime, and sizing models
  cli         command-line interface producing JSON reports
"""

from fspgemm.matrices import (
    CooMatrix,
    CsrMatrix,
    MatrixFormatError,
    MatrixMeta,
    SparseRow,
    coo_to_csr,
    csr_bitwise_equal,
    csr_identity,
    csr_row,
    csr_to_coo,
    random_csr,
    validate_csr,
)

__version__ = "0.1.0"

__all__ = [
    "CooMatrix",
    "CsrMatrix",
    "MatrixFormatError",
    "MatrixMeta",
    "SparseRow",
    "coo_to_csr",
    "csr_bitwise_equal",
    "csr_identity",
    "csr_row",
    "csr_to_coo",
    "random_csr",
    "validate_csr",
    "__version__",
]
