#include "nep/scalar_family.hpp"

#include <cmath>
#include <sstream>

namespace nep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool on_branch_cut(Complex c)
{
  return c.imag() == 0.0 && c.real() <= 0.0;
}

std::string fmt(Complex z)
{
  std::ostringstream s;
  s << z;
  return s.str();
}

}  // namespace

void ShiftScale::validate() const
{
  if (scale == Complex(0.0, 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "shift/scale: scale must be nonzero");
  }
}

ScalarFamily ScalarFamily::polynomial(std::vector<Complex> coeffs)
{
  if (coeffs.empty()) {
    coeffs.push_back(Complex(0.0, 0.0));
  }
  return ScalarFamily(Polynomial{std::move(coeffs)});
}

ScalarFamily ScalarFamily::exp_scaled(Complex a, Complex b)
{
  return ScalarFamily(ScaledExp{a, b});
}

ScalarFamily ScalarFamily::sqrt_shifted(Complex a, Complex b, Complex c)
{
  if (on_branch_cut(c)) {
    throw Error(ErrorCode::BranchCut,
                "sqrt(c + b*lambda) is not analytic at lambda = 0 for c = " + fmt(c));
  }
  return ScalarFamily(ShiftedSqrt{a, b, c});
}

double ScalarFamily::radius() const
{
  return std::visit(overloaded{
                        [](const Polynomial &) { return kInf; },
                        [](const ScaledExp &) { return kInf; },
                        [](const ShiftedSqrt &f) {
                          return f.b == Complex(0.0, 0.0) ? kInf : std::abs(f.c) / std::abs(f.b);
                        },
                    },
                    kind_);
}

void ScalarFamily::check_radius(Complex lambda) const
{
  const double rho = radius();
  if (std::isfinite(rho) && std::abs(lambda) >= rho) {
    std::ostringstream msg;
    msg << "|lambda| = " << std::abs(lambda) << " >= radius " << rho << " of " << describe();
    throw Error(ErrorCode::OutsideRadius, msg.str());
  }
}

Complex ScalarFamily::eval(Complex lambda) const
{
  check_radius(lambda);
  return std::visit(overloaded{
                        [&](const Polynomial &f) {
                          Complex acc(0.0, 0.0);
                          for (auto it = f.coeffs.rbegin(); it != f.coeffs.rend(); ++it) {
                            acc = acc * lambda + *it;
                          }
                          return acc;
                        },
                        [&](const ScaledExp &f) { return f.a * std::exp(f.b * lambda); },
                        [&](const ShiftedSqrt &f) {
                          // sqrt(c) * sqrt(1 + (b/c) lambda): the second factor has
                          // positive real part inside the radius.
                          return f.a * std::sqrt(f.c) * std::sqrt(1.0 + f.b / f.c * lambda);
                        },
                    },
                    kind_);
}

Complex ScalarFamily::derivative(Complex lambda) const
{
  check_radius(lambda);
  return std::visit(overloaded{
                        [&](const Polynomial &f) {
                          Complex acc(0.0, 0.0);
                          for (std::size_t j = f.coeffs.size(); j-- > 1;) {
                            acc = acc * lambda + double(j) * f.coeffs[j];
                          }
                          return acc;
                        },
                        [&](const ScaledExp &f) { return f.a * f.b * std::exp(f.b * lambda); },
                        [&](const ShiftedSqrt &f) {
                          return f.a * f.b /
                                 (2.0 * std::sqrt(f.c) * std::sqrt(1.0 + f.b / f.c * lambda));
                        },
                    },
                    kind_);
}

std::vector<Complex> ScalarFamily::taylor_series(Index jmax) const
{
  std::vector<Complex> c(static_cast<std::size_t>(jmax + 1), Complex(0.0, 0.0));
  std::visit(overloaded{
                 [&](const Polynomial &f) {
                   for (std::size_t j = 0; j < c.size() && j < f.coeffs.size(); ++j) {
                     c[j] = f.coeffs[j];
                   }
                 },
                 [&](const ScaledExp &f) {
                   // a b^j / j!
                   Complex t = f.a;
                   c[0] = t;
                   for (std::size_t j = 1; j < c.size(); ++j) {
                     t *= f.b / double(j);
                     c[j] = t;
                   }
                 },
                 [&](const ShiftedSqrt &f) {
                   // a sqrt(c) binom(1/2, j) (b/c)^j
                   const Complex ratio = f.b / f.c;
                   Complex t = f.a * std::sqrt(f.c);
                   c[0] = t;
                   for (std::size_t j = 1; j < c.size(); ++j) {
                     t *= ratio * (0.5 - double(j) + 1.0) / double(j);
                     c[j] = t;
                   }
                 },
             },
             kind_);
  return c;
}

Complex ScalarFamily::taylor(Index j) const
{
  if (j < 0) {
    throw Error(ErrorCode::InvalidArgument, "taylor: negative order");
  }
  if (const auto *p = std::get_if<Polynomial>(&kind_)) {
    return static_cast<std::size_t>(j) < p->coeffs.size() ? p->coeffs[static_cast<std::size_t>(j)]
                                                          : Complex(0.0, 0.0);
  }
  return taylor_series(j).back();
}

std::vector<Complex> ScalarFamily::derivative_over_order(Index jmax) const
{
  std::vector<Complex> d(static_cast<std::size_t>(jmax + 1), Complex(0.0, 0.0));
  std::visit(overloaded{
                 [&](const Polynomial &f) {
                   // (j-1)! a_j
                   double fact = 1.0;
                   for (std::size_t j = 1; j < d.size() && j < f.coeffs.size(); ++j) {
                     if (j > 1) fact *= double(j - 1);
                     d[j] = fact * f.coeffs[j];
                   }
                 },
                 [&](const ScaledExp &f) {
                   // a b^j / j
                   Complex pow_b = f.a;
                   for (std::size_t j = 1; j < d.size(); ++j) {
                     pow_b *= f.b;
                     d[j] = pow_b / double(j);
                   }
                 },
                 [&](const ShiftedSqrt &f) {
                   // a sqrt(c) (j-1)! binom(1/2, j) (b/c)^j
                   const Complex ratio = f.b / f.c;
                   Complex t = f.a * std::sqrt(f.c) * 0.5 * ratio;
                   if (d.size() > 1) d[1] = t;
                   for (std::size_t j = 2; j < d.size(); ++j) {
                     t *= ratio * double(j - 1) * (1.5 - double(j)) / double(j);
                     d[j] = t;
                   }
                 },
             },
             kind_);
  return d;
}

ScalarFamily ScalarFamily::shifted(const ShiftScale &ss) const
{
  ss.validate();
  return std::visit(
      overloaded{
          [&](const Polynomial &f) {
            // Expand sum_j a_j (s + t x)^j in powers of x.
            const std::size_t deg = f.coeffs.size();
            std::vector<Complex> out(deg, Complex(0.0, 0.0));
            std::vector<Complex> binom_row;  // coefficients of (s + t x)^j
            binom_row.push_back(Complex(1.0, 0.0));
            for (std::size_t j = 0; j < deg; ++j) {
              if (j > 0) {
                std::vector<Complex> next(j + 1, Complex(0.0, 0.0));
                for (std::size_t i = 0; i < j; ++i) {
                  next[i] += binom_row[i] * ss.shift;
                  next[i + 1] += binom_row[i] * ss.scale;
                }
                binom_row = std::move(next);
              }
              for (std::size_t i = 0; i <= j; ++i) {
                out[i] += f.coeffs[j] * binom_row[i];
              }
            }
            return ScalarFamily::polynomial(std::move(out));
          },
          [&](const ScaledExp &f) {
            return ScalarFamily::exp_scaled(f.a * std::exp(f.b * ss.shift), f.b * ss.scale);
          },
          [&](const ShiftedSqrt &f) {
            return ScalarFamily::sqrt_shifted(f.a, f.b * ss.scale, f.c + f.b * ss.shift);
          },
      },
      kind_);
}

std::string ScalarFamily::describe() const
{
  std::ostringstream s;
  std::visit(overloaded{
                 [&](const Polynomial &f) {
                   s << "poly[";
                   for (std::size_t j = 0; j < f.coeffs.size(); ++j) {
                     s << (j ? ", " : "") << f.coeffs[j];
                   }
                   s << "]";
                 },
                 [&](const ScaledExp &f) { s << f.a << "*exp(" << f.b << "*l)"; },
                 [&](const ShiftedSqrt &f) { s << f.a << "*sqrt(" << f.c << " + " << f.b << "*l)"; },
             },
             kind_);
  return s.str();
}

}  // namespace nep
