// Shared types, constants and error classes.
#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rmprod
{
using ComplexValue = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double half_pi = std::numbers::pi / 2;

//---------------------------------------------------------------------------//
// Errors
//---------------------------------------------------------------------------//
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error
{
  public:
    using Error::Error;
};

//! Quadrature did not converge; carries the last two estimates.
class QuadratureError : public Error
{
  public:
    QuadratureError(std::string const& what,
                    ComplexValue previous = {},
                    ComplexValue last = {})
        : Error(what), previous_(previous), last_(last)
    {
    }
    ComplexValue previous() const { return previous_; }
    ComplexValue last() const { return last_; }

  private:
    ComplexValue previous_;
    ComplexValue last_;
};

class ConsistencyError : public Error
{
  public:
    using Error::Error;
};

class DegenerateRecurrenceError : public Error
{
  public:
    using Error::Error;
};

class UnsupportedError : public Error
{
  public:
    using Error::Error;
};

class PoleError : public Error
{
  public:
    using Error::Error;
};

class DegenerateTableError : public Error
{
  public:
    using Error::Error;
};

class PreconditionError : public Error
{
  public:
    using Error::Error;
};

//---------------------------------------------------------------------------//
struct QuadratureConfig
{
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_refinements = 12;

    void validate() const
    {
        if (!(abs_tol > 0) || !(rel_tol > 0) || max_refinements < 1)
            throw PreconditionError("invalid quadrature configuration");
    }

    //! Default tolerances, overridden by RMPROD_DEFAULT_TOL when set.
    static QuadratureConfig from_environment()
    {
        QuadratureConfig cfg;
        if (char const* env = std::getenv("RMPROD_DEFAULT_TOL"))
        {
            char* end = nullptr;
            double tol = std::strtod(env, &end);
            if (end == env || !(tol > 0) || !std::isfinite(tol))
                throw PreconditionError(
                    std::string("RMPROD_DEFAULT_TOL is not a positive number: ")
                    + env);
            cfg.abs_tol = cfg.rel_tol = tol;
        }
        return cfg;
    }
};

//! Ensemble parameters: gamma shape p, gamma scale s, ray angle alpha.
struct ModelParams
{
    double p = 1;
    double s = 1;
    double alpha = 0;

    void validate() const
    {
        if (!(p > 0) || !std::isfinite(p))
            throw DomainError("p must be positive");
        if (!(s > 0) || !std::isfinite(s))
            throw DomainError("s must be positive");
        if (!(std::abs(alpha) <= half_pi) )
            throw DomainError("alpha must lie in [-pi/2, pi/2]");
    }
    bool on_axis() const { return std::abs(alpha) == half_pi; }
    bool on_half_line() const { return alpha == 0; }
};

//! Polar point z = r e^{i theta}.
struct ConePoint
{
    double r = 1;
    double theta = 0;

    ComplexValue value() const { return std::polar(r, theta); }
    bool in_cone(double alpha) const
    {
        return std::abs(theta) <= std::abs(alpha);
    }
    bool strictly_inside(double alpha) const
    {
        return r > 0 && std::abs(theta) < std::abs(alpha);
    }
};

//! 2 e^{i alpha} / s, the Bessel argument attached to a parameter triple.
inline ComplexValue bessel_argument(double s, double alpha)
{
    return std::polar(2.0 / s, alpha);
}

inline void require_finite(ComplexValue z, char const* what)
{
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw DomainError(std::string(what) + ": non-finite value");
}

}  // namespace rmprod
