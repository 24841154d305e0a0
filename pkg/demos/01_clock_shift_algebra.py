# # Clock and shift on a finite torus
#
# The phase space here is an N x N grid. Position steps are generated by the
# clock U and momentum steps by the shift V. This script builds them, checks
# the commutation phase, and shows the Fourier map that swaps the two.

# In[1]:

import numpy as np

from torusqm.algebra import PhaseSpaceParams, check_identities, clock, schwinger, shift
from torusqm.linalg import dft

np.set_printoptions(precision=3, suppress=True)

# In[2]:

p = PhaseSpaceParams(6)
u, v = clock(p), shift(p)
omega = np.exp(2j * np.pi / p.n)

# V U = omega U V, one phase per step
print(np.max(np.abs(v @ u - omega * u @ v)))

# In[3]:

# the Schwinger basis is orthogonal under the trace form
s12, s31 = schwinger(p, 1, 2), schwinger(p, 3, 1)
print(abs(np.trace(s12.conj().T @ s31)), abs(np.trace(s12.conj().T @ s12)) / p.n)

# In[4]:

# every identity in the suite for a handful of sizes
for n in (2, 3, 8, 17):
    rep = check_identities(n)
    print(n, rep.all_passed, max(r.residual for r in rep.identities))

# In[5]:

# a site-localised state is flat in momentum
e = np.zeros(p.n, dtype=complex)
e[2] = 1
print(np.abs(dft(e)) ** 2)
