"""apfree: construct, verify and benchmark 3-AP-free subsets of {1..N}.

Everything correctness-critical runs over exact rational arithmetic on a
shared coordinate grid; hot loops are served by a compiled kernel backend
with a bit-identical pure-Python fallback (see apfree.kernels.BACKEND).
"""

__version__ = "0.1.0"

from .blocks import BlockSpec, BlockVariant, in_block, measure_exact
from .constructor import (ConstructionConfig, ProgressionFreeSet, construct,
                          derive_params, recommended_D, theoretical_bound)
from .behrend import BehrendParams, behrend_construct, bound_table
from .verifier import (APWitness, count_aps_bruteforce,
                       count_aps_convolution, is_3ap_free)

__all__ = [
    "__version__",
    "BlockSpec",
    "BlockVariant",
    "in_block",
    "measure_exact",
    "ConstructionConfig",
    "ProgressionFreeSet",
    "construct",
    "derive_params",
    "recommended_D",
    "theoretical_bound",
    "BehrendParams",
    "behrend_construct",
    "bound_table",
    "APWitness",
    "count_aps_bruteforce",
    "count_aps_convolution",
    "is_3ap_free",
]
