# %% [markdown]
# # Decay of correlations
#
# A spectral gap of size `delta` means `A^n f` shrinks like `(lambda (1 - delta))^n`
# on functions with zero `nu`-mean, and correlations decay at the same rate.

# %%
import numpy as np

from gapcert.suite import SHIPPED_CASES, run_case
from gapcert.transfer_op import correlation_sequence, decay_envelope_rate, gap_decay_check

for case in SHIPPED_CASES[:3]:
    run = run_case(case, m=256)
    delta = run.certificate.certified_delta
    rep = gap_decay_check(run.operator, run.spectral, delta, n_max=40, trials=10)
    seq = correlation_sequence(run.operator, run.spectral, lambda x: x, lambda x: x, 30)
    print(
        f"{case.name:12} certified delta {delta:.4f}  sup constant {rep.sup_constant:.3f}"
        f"  correlation rate {decay_envelope_rate(seq):.3f}  observed gap ratio {run.spectral.gap_ratio:.3f}"
    )

# %% [markdown]
# For the interval doubling map, `cos(2 pi x)` is killed in one step, so its
# correlations vanish for `n >= 1`.

# %%
from gapcert import assemble, eigendata, make_doubling

op = assemble(make_doubling("interval"), None, 256)
sd = eigendata(op)
cos = lambda x: np.cos(2 * np.pi * x)
print(np.round(correlation_sequence(op, sd, cos, cos, 5), 6))
