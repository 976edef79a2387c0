// Lyapunov exponent on the imaginary axis as the disorder grows, next to
// the small-s series and its resummation.
#include <cstdio>

#include "rmprod/lyapunov.hpp"

int main()
{
    using namespace rmprod;
    double const p = 1.5;
    auto series = asympt_small_s({p, 1, half_pi}, 16).series;
    std::printf("%6s %12s %12s %12s\n", "s", "exact", "series", "pade[8/8]");
    for (double s = 0.1; s < 2.05; s += 0.1)
    {
        double ex = lyapunov_exact({p, s, half_pi}).value;
        double pd = pade_resum(series, s, 8, 8).value;
        std::printf("%6.2f %12.8f %12.8f %12.8f\n", s, ex, series.evaluate(s),
                    pd);
    }
}
