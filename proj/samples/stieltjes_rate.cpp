// Convergents of a random Stieltjes fraction approach the limit at the
// rate e^{-2 lambda n}.
#include <cmath>
#include <cstdio>

#include "rmprod/pade_stieltjes.hpp"

int main()
{
    using namespace rmprod;
    RngStream rng(7, 0);
    ComplexValue const t(0, 1);
    auto draw = make_stieltjes_draw(1, 1, 400, rng);
    auto le = log_truncation_errors(draw, t);
    double rate = -2 * lyapunov_exact(stieltjes_chain_params(1, 1, t)).value;
    for (int n = 25; n <= 300; n += 25)
        std::printf("n=%3d  ln|F - F_n| = %9.3f   n * rate = %9.3f\n", n, le[n],
                    n * rate);
}
