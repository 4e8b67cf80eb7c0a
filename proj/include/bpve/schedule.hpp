// SPDX-FileCopyrightText: 2026 The bpve authors
// SPDX-License-Identifier: Apache-2.0

//! \file bpve/schedule.hpp
//! Generation-indexed offspring laws n -> rho_n, queryable at any n.

#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "laws.hpp"
#include "param_function.hpp"

namespace bpve {

class Schedule
{
  public:
    enum class Family { geometric, poisson, binomial, bernoulli, twopoint };

    //! How the first parameter of a formula is interpreted.
    enum class Param {
        mean,          // geometric, poisson, twopoint: the mean
        success_prob,  // binomial, bernoulli, twopoint: the success probability
        failure_prob,  // bernoulli: a_n = 1 - p_n
    };

    struct Constant
    {
        OffspringLaw law;
    };
    struct Table
    {
        std::vector<OffspringLaw> prefix;
        std::shared_ptr<Schedule const> tail;  // evaluated at the absolute index
    };
    struct Formula
    {
        Family family;
        Param param;
        ParamFunction first;
        //! binomial: trials; twopoint: atom k
        std::optional<ParamFunction> second;
    };

    using Variant = std::variant<Constant, Table, Formula>;

    static Schedule constant(OffspringLaw law) { return Schedule{Constant{std::move(law)}}; }

    static Schedule table(std::vector<OffspringLaw> prefix, Schedule tail)
    {
        return Schedule{
            Table{std::move(prefix), std::make_shared<Schedule const>(std::move(tail))}};
    }

    static Schedule geometric(ParamFunction mean)
    {
        return formula(Family::geometric, Param::mean, std::move(mean), std::nullopt);
    }
    static Schedule poisson(ParamFunction mean)
    {
        return formula(Family::poisson, Param::mean, std::move(mean), std::nullopt);
    }
    static Schedule binomial(ParamFunction trials, ParamFunction success_prob)
    {
        return formula(Family::binomial, Param::success_prob, std::move(success_prob),
                       std::move(trials));
    }
    static Schedule bernoulli(ParamFunction success_prob)
    {
        return formula(Family::bernoulli, Param::success_prob, std::move(success_prob),
                       std::nullopt);
    }
    //! Bernoulli with success probability 1 - a_n.
    static Schedule bernoulli_failure(ParamFunction a)
    {
        return formula(Family::bernoulli, Param::failure_prob, std::move(a), std::nullopt);
    }
    //! Two-point law with atom k_n and mean m_n, i.e. p_n = m_n / k_n.
    static Schedule two_point_mean(ParamFunction mean, ParamFunction atom)
    {
        return formula(Family::twopoint, Param::mean, std::move(mean), std::move(atom));
    }
    static Schedule two_point_prob(ParamFunction prob, ParamFunction atom)
    {
        return formula(Family::twopoint, Param::success_prob, std::move(prob), std::move(atom));
    }

    //! rho_n. Throws LawError when the parameters at n are invalid and
    //! OverflowError when they are not representable.
    [[nodiscard]] OffspringLaw law(std::size_t n) const
    {
        if (auto const* c = std::get_if<Constant>(&rep_)) {
            return c->law;
        }
        if (auto const* t = std::get_if<Table>(&rep_)) {
            return n < t->prefix.size() ? t->prefix[n] : t->tail->law(n);
        }
        return formula_law(std::get<Formula>(rep_), n);
    }

    [[nodiscard]] OffspringLaw operator()(std::size_t n) const { return law(n); }

    [[nodiscard]] bool is_constant() const noexcept
    {
        return std::holds_alternative<Constant>(rep_);
    }

    [[nodiscard]] OffspringLaw const* constant_law() const noexcept
    {
        auto const* c = std::get_if<Constant>(&rep_);
        return c != nullptr ? &c->law : nullptr;
    }

    [[nodiscard]] Variant const& variant() const noexcept { return rep_; }

    [[nodiscard]] static char const* family_name(Family f) noexcept
    {
        switch (f) {
        case Family::geometric: return "geometric";
        case Family::poisson: return "poisson";
        case Family::binomial: return "binomial";
        case Family::bernoulli: return "bernoulli";
        case Family::twopoint: return "twopoint";
        }
        return "?";
    }

  private:
    explicit Schedule(Variant v) : rep_{std::move(v)} {}

    static Schedule formula(Family family, Param param, ParamFunction first,
                            std::optional<ParamFunction> second)
    {
        Formula f{family, param, std::move(first), std::move(second)};
        bool const fixed = f.first.is_constant() && (!f.second || f.second->is_constant());
        if (fixed) {
            return Schedule{Constant{formula_law(f, 0)}};
        }
        return Schedule{std::move(f)};
    }

    static OffspringLaw formula_law(Formula const& f, std::size_t n)
    {
        double const v = f.first.log_value(n);
        switch (f.family) {
        case Family::geometric: return OffspringLaw::geometric(std::exp(v));
        case Family::poisson: return OffspringLaw::poisson(std::exp(v));
        case Family::binomial: {
            double const trials = std::nearbyint((*f.second)(n));
            if (!(trials >= 1.0 && trials < 1.8e19)) {
                throw LawError("binomial trials out of range at n = " + std::to_string(n));
            }
            return OffspringLaw::binomial(static_cast<Count>(trials), std::exp(v));
        }
        case Family::bernoulli:
            if (f.param == Param::failure_prob) {
                return OffspringLaw::bernoulli(1.0 - std::exp(v));
            }
            return OffspringLaw::bernoulli(std::exp(v));
        case Family::twopoint: {
            double const log_k = f.second->log_value(n);
            double const log_p = f.param == Param::mean ? v - log_k : v;
            return OffspringLaw::two_point_log(log_k, log_p);
        }
        }
        throw LawError("unknown family");
    }

    Variant rep_;
};

}  // namespace bpve
