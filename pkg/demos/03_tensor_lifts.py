"""Why one letter is enough: the spectrum of a lifted channel is the
products of single-letter singular values, so the second-largest value
never grows with the block length.
"""

import numpy as np

from infocoupling import (
    build_dtm,
    instances,
    lifted_spectrum,
    product_form_projector,
    second_singular_of_power,
)

dtm = build_dtm(
    instances.nested_ternary_channel(0.2, 0.1),
    instances.nested_ternary_operating_point(),
)

print("single-letter singular values:", dtm.singular_values.round(6))
for n in (1, 2, 3):
    print(f"  {n}-letter second singular value: {second_singular_of_power(dtm, n):.12f}")

spec2 = lifted_spectrum(dtm, 2)
s = dtm.singular_values
products = np.sort(np.outer(s, s).ravel())[::-1]
print("\ntwo-letter spectrum:", spec2.singular_values.round(6))
print("pairwise products:  ", products.round(6))

psi = spec2.right_vectors[:, 1]
dec = product_form_projector(psi, dtm.right_vector(0))
print(
    "\nbest two-letter direction decomposes into single active letters, "
    f"residual {dec.residual:.2e}"
)
print(
    "a doubly-active direction does not:",
    f"residual {product_form_projector(np.kron(dtm.right_vector(1), dtm.right_vector(1)), dtm.right_vector(0)).residual:.3f}",
)
