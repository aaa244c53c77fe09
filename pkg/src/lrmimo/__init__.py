"""Lattice-reduction-aided MIMO detection with a shifted-start LLL and flop accounting."""
__version__ = "0.1.0"

from .flops import Event, FlopLedger, OpKind, event_cost, weight
from .lattice import (
    IterationCapExceeded,
    ReductionOutput,
    ReductionParams,
    check_unimodular,
    is_reduced,
    lll_reduce,
    unimodular_inverse,
)
from .linalg import (
    RankDeficient,
    SingularTriangular,
    back_substitute,
    embed_channel,
    embed_vector,
    qr_decompose,
    unembed_vector,
    zf_equalize,
)
from .mimo import Constellation, draw_channel, lr_zf_detect, qam_modulate, qam_slice, zf_detect
