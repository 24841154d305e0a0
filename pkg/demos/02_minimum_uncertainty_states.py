# # Minimum-uncertainty packets
#
# A packet that saturates the unitary uncertainty relation for U and V obeys
# a two-term recurrence. Its parameters (mu, lambda) live on the curve
# mu^N - lambda^N = 1, so each mu comes with N admissible lambdas.

# In[1]:

import numpy as np

from torusqm.states import MusSpec, expectations, lambda_roots, mus_state, solve_mus_for_targets
from torusqm.uncertainty import unitary_uncertainty

# In[2]:

roots = lambda_roots(100, 1.5)
idx = int(np.argmin(np.abs(roots - (-1.497 + 0.094j))))
spec = MusSpec.from_mu(100, 1.5, idx)
psi = mus_state(spec)
print("root", idx, spec.lam)
print("peak site", int(np.argmax(psi.probs)))
print("saturation gap", unitary_uncertainty(psi).saturation_gap)

# In[3]:

# the other roots give other packets, all saturating
gaps = [unitary_uncertainty(mus_state(MusSpec.from_mu(100, 1.5, r))).saturation_gap for r in range(0, 100, 11)]
print(np.max(np.abs(gaps)))

# In[4]:

# asking for given <U>, <V>. Round trip from a known packet first.
e = expectations(psi)
back = solve_mus_for_targets(100, e.exp_u, e.exp_v)
print(abs(back.mu - spec.mu), abs(back.lam - spec.lam))

# In[5]:

# <U> = <V> = 0.5 at N=8 has no exact packet; the closest one is still single-peaked
best = solve_mus_for_targets(8, 0.5, 0.5, strict=False)
e8 = expectations(mus_state(best))
print(best.mu, abs(e8.exp_u - 0.5), abs(e8.exp_v - 0.5))
print(np.round(mus_state(best).probs, 4))
