"""Algebraic lattice reduction for 2×2 quaternion space-time codes.

Library layout:

- `exact_order`: exact arithmetic in the Golden Code's maximal order and
  its norm-one unit group (generators, relations, norm-ball enumeration).
- `hyperbolic`: upper half-space model of H³ and the SL2(C) action.
- `unit_search`: channel normalization and the greedy tile walk that
  approximates a channel by a unit, with the unimodular lattice transform.
- `golden_code`: encoder, lattice basis, ZF / ZF-DFE / ML detectors and
  MMSE-GDFE left preprocessing.
- `lll`: complex LLL over Z[i] (baseline right preprocessor).
- `fundamental_domain`: Dirichlet polyhedron reconstruction and verifier.
- `sim_engine`: Monte-Carlo FER sweeps and distribution diagnostics.
- `cli`: the `algred` command (simulate, reduce, verify-domain, step-stats,
  dist-checks, dump-generators).

Hot kernels run from a compiled extension when built, with a pure-numpy
fallback (`algred._backend` selects at import; `python -m algred.benchmark`
compares the two).
"""

from ._backend import backend_name, HAVE_COMPILED

__version__ = "0.1.0"
__all__ = ["backend_name", "HAVE_COMPILED", "__version__"]
