// SPDX-FileCopyrightText: 2026 The bpve authors
// SPDX-License-Identifier: Apache-2.0

//! \file bpve/param_function.hpp
//! Total parameter functions n -> value used by formula schedules, witness
//! sequences and comparison functions.
//!
//! Every function is evaluated in log-space first; `value(n)` is just
//! `exp(log_value(n))`. Doubling towers such as base^(2^(n-1)) overflow a
//! double near n = 10 but their logarithm stays finite until n ~ 1000.

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace bpve {

//! Raised when a quantity cannot be represented even in log-space.
class OverflowError : public std::overflow_error
{
  public:
    using std::overflow_error::overflow_error;
};

class ParamFunction
{
  public:
    struct Constant
    {
        double value;
    };
    //! scale * (n + shift)^exponent
    struct Power
    {
        double scale;
        double exponent;
        double shift;
    };
    //! scale * base^n
    struct Exponential
    {
        double scale;
        double base;
    };
    //! sum_k coefficients[k] * n^k
    struct Polynomial
    {
        std::vector<double> coefficients;
    };
    //! base at n = 0, base^(2^(n-1)) for n >= 1
    struct Doubling
    {
        double base;
    };
    //! at_power(k) when n = 2^k, otherwise(n)
    struct Dyadic
    {
        std::shared_ptr<ParamFunction const> at_power;
        std::shared_ptr<ParamFunction const> otherwise;
    };
    //! Arbitrary user function, given by its logarithm.
    struct Custom
    {
        std::function<double(std::size_t)> log_value;
        std::string label;
    };

    using Variant =
        std::variant<Constant, Power, Exponential, Polynomial, Doubling, Dyadic, Custom>;

    static ParamFunction constant(double value) { return ParamFunction{Constant{value}}; }
    static ParamFunction power(double scale, double exponent, double shift)
    {
        return ParamFunction{Power{scale, exponent, shift}};
    }
    static ParamFunction exponential(double scale, double base)
    {
        return ParamFunction{Exponential{scale, base}};
    }
    static ParamFunction polynomial(std::vector<double> coefficients)
    {
        if (coefficients.empty()) {
            throw std::invalid_argument("polynomial needs at least one coefficient");
        }
        return ParamFunction{Polynomial{std::move(coefficients)}};
    }
    static ParamFunction doubling(double base)
    {
        if (!(base > 0.0)) {
            throw std::invalid_argument("doubling base must be positive");
        }
        return ParamFunction{Doubling{base}};
    }
    static ParamFunction dyadic(ParamFunction at_power, ParamFunction otherwise)
    {
        return ParamFunction{
            Dyadic{std::make_shared<ParamFunction const>(std::move(at_power)),
                   std::make_shared<ParamFunction const>(std::move(otherwise))}};
    }
    static ParamFunction custom(std::function<double(std::size_t)> log_value,
                                std::string label = "custom")
    {
        return ParamFunction{Custom{std::move(log_value), std::move(label)}};
    }

    //! log f(n); -inf for f(n) = 0. Throws std::domain_error for f(n) < 0 and
    //! OverflowError when the logarithm itself is not finite.
    [[nodiscard]] double log_value(std::size_t n) const
    {
        double const r = std::visit([n](auto const& f) { return eval_log(f, n); }, rep_);
        if (std::isnan(r)) {
            throw std::domain_error("parameter function is negative or undefined at n = "
                                    + std::to_string(n));
        }
        if (r == std::numeric_limits<double>::infinity()) {
            throw OverflowError("parameter function overflows log-space at n = "
                                + std::to_string(n));
        }
        return r;
    }

    [[nodiscard]] double operator()(std::size_t n) const { return std::exp(log_value(n)); }

    [[nodiscard]] bool is_constant() const noexcept
    {
        return std::holds_alternative<Constant>(rep_);
    }

    [[nodiscard]] Variant const& variant() const noexcept { return rep_; }

  private:
    explicit ParamFunction(Variant v) : rep_{std::move(v)} {}

    static double log_of(double x)
    {
        if (x < 0.0 || std::isnan(x)) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        return std::log(x);
    }

    static double eval_log(Constant const& f, std::size_t) { return log_of(f.value); }

    static double eval_log(Power const& f, std::size_t n)
    {
        double const base = static_cast<double>(n) + f.shift;
        if (f.scale < 0.0 || base < 0.0) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        return std::log(f.scale) + f.exponent * std::log(base);
    }

    static double eval_log(Exponential const& f, std::size_t n)
    {
        if (f.scale < 0.0 || f.base < 0.0) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        return std::log(f.scale) + static_cast<double>(n) * std::log(f.base);
    }

    static double eval_log(Polynomial const& f, std::size_t n)
    {
        double const x = static_cast<double>(n);
        double acc = 0.0;
        for (auto it = f.coefficients.rbegin(); it != f.coefficients.rend(); ++it) {
            acc = acc * x + *it;
        }
        return log_of(acc);
    }

    static double eval_log(Doubling const& f, std::size_t n)
    {
        if (n == 0) {
            return std::log(f.base);
        }
        // 2^(n-1) * log(base)
        return std::ldexp(std::log(f.base), static_cast<int>(std::min<std::size_t>(n - 1, 4096)));
    }

    static double eval_log(Dyadic const& f, std::size_t n)
    {
        if (n != 0 && (n & (n - 1)) == 0) {
            std::size_t k = 0;
            while ((std::size_t{1} << k) != n) {
                ++k;
            }
            return f.at_power->log_value(k);
        }
        return f.otherwise->log_value(n);
    }

    static double eval_log(Custom const& f, std::size_t n) { return f.log_value(n); }

    Variant rep_;
};

}  // namespace bpve
