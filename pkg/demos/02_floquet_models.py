"""Building Floquet operators and computing their eigenphases.

Run with ``python3 demos/02_floquet_models.py``.
"""

import numpy as np

from rmte_sff import (
    BlochPhases,
    KickedRotorParams,
    RmteParams,
    build_kicked_rotor_pair,
    build_rmte,
    eigenphases,
)
from rmte_sff.models import unitarity_residual

rng = np.random.default_rng(3)

# %% Random matrix transition ensemble
# Two independent CUE(N) blocks, U1 x U2, multiplied by a diagonal of random
# phases exp(i eps xi).  eps = 0 is the uncoupled product.
for eps in (0.0, 0.1):
    op = build_rmte(RmteParams(N=12, L=2, eps=eps), rng)
    es = eigenphases(op)
    print(f"eps={eps}: dim {op.dim}, residual {unitarity_residual(op.matrix):.1e}, solver '{es.method}'")

# With no coupling the eigenphases are sums of the subsystem eigenphases.
op = build_rmte(RmteParams(N=5, L=2, eps=0.0), rng)
sub = [np.angle(np.linalg.eigvals(f)) for f in op.factors]
pairs = np.sort(np.angle(np.exp(1j * (sub[0][:, None] + sub[1][None, :]))).ravel())
print("uncoupled phases are pair sums:", np.allclose(np.sort(eigenphases(op).phases), pairs, atol=1e-10))

# %% More than two subsystems
op = build_rmte(RmteParams(N=4, L=3, eps=0.2), rng)
print("three subsystems:", op.dim, "levels")

# %% Coupled kicked rotors
# Two quantized kicked rotors on the torus coupled through cos(2 pi (qA + qB)) with
# strength gamma.  Generic Bloch phases remove the antiunitary symmetries.
bloch = BlochPhases.random(rng)
op = build_kicked_rotor_pair(KickedRotorParams(N=16, gamma=0.02), bloch)
es = eigenphases(op)
print(f"rotor pair: dim {op.dim}, residual {unitarity_residual(op.matrix):.1e}, "
      f"phases in [{es.phases.min():.3f}, {es.phases.max():.3f}]")
