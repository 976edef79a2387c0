// Run the chain Z -> 1/(Z + a e^{i alpha}) and compare its mean with the
// closed form and the exponent with the product of matrices.
#include <cstdio>

#include "rmprod/invariant_measure.hpp"
#include "rmprod/lyapunov.hpp"
#include "rmprod/simulate.hpp"

int main()
{
    using namespace rmprod;
    ModelParams q{2, 0.5, pi / 3};
    RngStream rng(2024, 0);

    auto m = chain_moments(q, 1000000, rng);
    ComplexValue mean = mean_closed_form(q);
    std::printf("mean   %.5f%+.5fi  (chain %.5f%+.5fi +- %.1e)\n", mean.real(),
                mean.imag(), m.mean_re.value, m.mean_im.value,
                m.mean_re.std_error);

    auto lam = furstenberg_estimate(q, 1000000, rng);
    std::printf("lambda %.6f  (products %.6f +- %.1e)\n",
                lyapunov_exact(q).value, lam.value, lam.std_error);
}
