"""Walk through the expansion polynomials of the bundled 2-state chain.

Builds the order-3 expansion for the integer-reward Markov chain and
prints every polynomial family next to the quantities it feeds: the
frequency-side A_k, the density-side R_p, the CDF-side P_p, the
weak-local P_{p,l}, and the centered-moment coefficient table a_{k,j}.
"""

import math

from edgeworth import bundled_model, exact_moments, expansion_for_model


def show_poly(name, poly):
    terms = [
        f"{c:+.6g} x^{m}" if m else f"{c:+.6g}"
        for m, c in enumerate(poly.coeffs)
        if c != 0.0
    ]
    print(f"  {name} = {' '.join(terms) if terms else '0'}")


def main():
    model = bundled_model("two_state")
    exp_set = expansion_for_model(model, 3)
    params = exp_set.params

    print("2-state integer chain")
    print(f"  drift A        = {params.A:.12f}")
    print(f"  variance sigma2 = {params.sigma2:.12f}")
    print()

    print("frequency polynomials (coefficients of it):")
    for k in range(4):
        show_poly(f"A_{k}", exp_set.A(k))
    print("density-side corrections:")
    for p in range(4):
        show_poly(f"R_{p}", exp_set.R(p))
    print("CDF-side corrections:")
    for p in range(1, 4):
        show_poly(f"P_{p}", exp_set.P(p))
    print("weak-local polynomials:")
    for p in range(2):
        show_poly(f"P_{p},l", exp_set.weak_local(p))
    print()

    n = 30
    # the table covers k <= r + 2 = 5 at this build order
    print(f"centered moments at n = {n}: coefficient table vs dynamic program")
    exact = exact_moments(model, n, 5)
    print("   k   exact            sum_j a(k,j) n^j   rel gap")
    for k in range(1, 6):
        approx = sum(exp_set.a(k, j) * n ** j for j in range(k // 2 + 1))
        rel = abs(exact[k] - approx) / max(1.0, abs(exact[k]))
        print(f"   {k}   {exact[k]:+.8e}  {approx:+.8e}  {rel:.2e}")


if __name__ == "__main__":
    main()
