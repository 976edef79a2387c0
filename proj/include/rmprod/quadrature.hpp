// Thin wrappers over Boost double-exponential rules.
#pragma once

#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "core.hpp"

namespace rmprod::quad
{
namespace detail
{
// One integrator object per (rule, nesting level) keeps nested calls from
// sharing a table while it is being extended.
template<int Level>
inline boost::math::quadrature::tanh_sinh<double>& tanh_sinh_rule()
{
    static boost::math::quadrature::tanh_sinh<double> rule(15);
    return rule;
}

template<int Level>
inline boost::math::quadrature::exp_sinh<double>& exp_sinh_rule()
{
    static boost::math::quadrature::exp_sinh<double> rule(12);
    return rule;
}

template<int Level>
inline boost::math::quadrature::sinh_sinh<double>& sinh_sinh_rule()
{
    static boost::math::quadrature::sinh_sinh<double> rule(12);
    return rule;
}

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(ComplexValue x) { return std::abs(x); }

template<class T>
T checked(T value, double err, double l1, double tol, double abs_tol,
          char const* what)
{
    if (!std::isfinite(magnitude(value)))
        throw QuadratureError(std::string(what) + ": non-finite result");
    if (err > std::max(abs_tol, 100 * tol * l1))
    {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "%s: no convergence (error %.3g, L1 %.3g)", what, err,
                      l1);
        throw QuadratureError(buf,
                              ComplexValue(value) + err, ComplexValue(value));
    }
    return value;
}
}  // namespace detail

//! Integral over a finite interval [a, b]; endpoint singularities allowed.
template<int Level = 0, class F>
auto finite(F&& f, double a, double b, double tol = 1e-10,
            double abs_tol = 1e-300)
{
    double err = 0, l1 = 0;
    try
    {
        auto v = detail::tanh_sinh_rule<Level>().integrate(
            [&](double x) { return f(x); }, a, b, tol, &err, &l1);
        return detail::checked(v, err, l1, tol, abs_tol, "tanh-sinh");
    }
    catch (QuadratureError const&)
    {
        throw;
    }
    catch (std::exception const& e)
    {
        throw QuadratureError(std::string("tanh-sinh: ") + e.what());
    }
}

//! Integral over [a, infinity).
template<int Level = 0, class F>
auto upper(F&& f, double a, double tol = 1e-10, double abs_tol = 1e-300)
{
    double err = 0, l1 = 0;
    try
    {
        auto v = detail::exp_sinh_rule<Level>().integrate(
            [&](double x) { return f(x); }, a,
            std::numeric_limits<double>::infinity(), tol, &err, &l1);
        return detail::checked(v, err, l1, tol, abs_tol, "exp-sinh");
    }
    catch (QuadratureError const&)
    {
        throw;
    }
    catch (std::exception const& e)
    {
        throw QuadratureError(std::string("exp-sinh: ") + e.what());
    }
}

//! Integral over the whole real line.
template<int Level = 0, class F>
auto whole_line(F&& f, double tol = 1e-10, double abs_tol = 1e-300)
{
    double err = 0, l1 = 0;
    try
    {
        auto v = detail::sinh_sinh_rule<Level>().integrate(
            [&](double x) { return f(x); }, tol, &err, &l1);
        return detail::checked(v, err, l1, tol, abs_tol, "sinh-sinh");
    }
    catch (QuadratureError const&)
    {
        throw;
    }
    catch (std::exception const& e)
    {
        throw QuadratureError(std::string("sinh-sinh: ") + e.what());
    }
}

}  // namespace rmprod::quad
