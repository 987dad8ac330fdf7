"""Find the largest normalisation for each library kernel shape that passes verify_cz."""

import math

from nilradon.kernels import kernel, verify_cz

for name in ("hilbert", "oscillating"):
    rep = verify_cz(kernel(name, 1.0))
    bound = max(rep.size_max, rep.cancel_max)
    c = math.floor(1e6 / bound) / 1e6
    print(f"{name}: unit size sup {rep.size_max:.12f} at t={rep.size_argmax:.6f}, "
          f"cancellation sup {rep.cancel_max:.12f} at N={rep.cancel_argmax:.6g} -> c = {c}")
