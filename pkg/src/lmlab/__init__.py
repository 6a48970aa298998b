"""lmlab: a desk-scale laboratory for the math inside language models.

Modules:
    numkit      order-pinned dense linear algebra + seedable counter RNG
    activations logit/sigmoid/softmax/temperature and amplitude encodings
    micrograd   one-hidden-layer net with analytic + finite-difference grads
    attention   causal self-attention, multi-head blocks, sampling generation
    bpe         byte-level byte-pair encoding
    capacity    quasi-orthogonal packing, random projection, analogy arithmetic
    contexts    orthonormal-basis contexts, observables, Born probabilities
    uattention  unitary pipelines with one terminal measurement
    floatlab    reduction-order experiments and a batch-invariant mode
    cli         `lmlab` command line entry point
"""

from ._kernels import get_backend

__version__ = "0.1.0"

__all__ = ["get_backend", "__version__"]
