// SPDX-FileCopyrightText: 2026 The bpve authors
// SPDX-License-Identifier: Apache-2.0

//! \file bpve/laws.hpp
//! Offspring laws: exact pgf, pmf, first two moments and samplers.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "param_function.hpp"
#include "rng.hpp"
#include "variates.hpp"

namespace bpve {

//! Invalid law parameters.
class LawError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

class OffspringLaw
{
  public:
    //! rho(i) = m^i / (1+m)^(i+1)
    struct Geometric
    {
        double mean;
    };
    struct Poisson
    {
        double mean;
    };
    struct Binomial
    {
        Count trials;
        double success_prob;
    };
    //! P(W=1) = p, P(W=0) = 1-p
    struct Bernoulli
    {
        double success_prob;
    };
    //! P(W=k) = p, P(W=0) = 1-p. Stored as logarithms so that atoms beyond
    //! the double range (k = 4^(2^(n-1)) for n > 9) stay usable.
    struct TwoPoint
    {
        double log_atom;
        double log_prob;

        [[nodiscard]] double atom() const { return std::exp(log_atom); }
        [[nodiscard]] double prob() const { return std::exp(log_prob); }
    };
    struct Explicit
    {
        //! (i, rho(i)) sorted by i, no duplicates, finite support
        std::vector<std::pair<Count, double>> pmf;
    };

    using Variant = std::variant<Geometric, Poisson, Binomial, Bernoulli, TwoPoint, Explicit>;

    static OffspringLaw geometric(double mean)
    {
        require(std::isfinite(mean) && mean > 0.0, "geometric mean must be positive and finite");
        return OffspringLaw{Geometric{mean}};
    }

    static OffspringLaw poisson(double mean)
    {
        require(std::isfinite(mean) && mean > 0.0, "poisson mean must be positive and finite");
        return OffspringLaw{Poisson{mean}};
    }

    static OffspringLaw binomial(Count trials, double success_prob)
    {
        require(trials >= 1, "binomial trials must be at least 1");
        require(success_prob > 0.0 && success_prob <= 1.0,
                "binomial success_prob must lie in (0,1]");
        return OffspringLaw{Binomial{trials, success_prob}};
    }

    static OffspringLaw bernoulli(double success_prob)
    {
        require(success_prob > 0.0 && success_prob < 1.0,
                "bernoulli success_prob must lie in (0,1)");
        return OffspringLaw{Bernoulli{success_prob}};
    }

    static OffspringLaw two_point(double atom, double prob)
    {
        require(std::isfinite(atom) && atom >= 1.0 && atom == std::floor(atom),
                "twopoint atom must be a positive integer");
        require(prob > 0.0 && prob <= 1.0, "twopoint prob must lie in (0,1]");
        return OffspringLaw{TwoPoint{std::log(atom), std::log(prob)}};
    }

    //! Two-point law given by log k and log p. The atom is rounded to the
    //! nearest integer whenever it is representable.
    static OffspringLaw two_point_log(double log_atom, double log_prob)
    {
        require(std::isfinite(log_atom) && log_atom >= 0.0, "twopoint atom must be at least 1");
        require(!std::isnan(log_prob) && log_prob <= 0.0
                    && log_prob > -std::numeric_limits<double>::infinity(),
                "twopoint prob must lie in (0,1]");
        if (log_atom < 700.0) {
            double const k = std::max(1.0, std::nearbyint(std::exp(log_atom)));
            log_atom = std::log(k);
        }
        return OffspringLaw{TwoPoint{log_atom, log_prob}};
    }

    static OffspringLaw explicit_pmf(std::vector<std::pair<Count, double>> pmf)
    {
        require(!pmf.empty(), "explicit pmf must not be empty");
        std::sort(pmf.begin(), pmf.end());
        double total = 0.0;
        for (std::size_t j = 0; j < pmf.size(); ++j) {
            require(std::isfinite(pmf[j].second) && pmf[j].second >= 0.0,
                    "explicit pmf masses must be nonnegative");
            require(j == 0 || pmf[j].first != pmf[j - 1].first,
                    "explicit pmf has duplicate support points");
            total += pmf[j].second;
        }
        require(std::fabs(total - 1.0) <= 1e-12, "explicit pmf must sum to 1 within 1e-12");
        double const p0 = pmf.front().first == 0 ? pmf.front().second : 0.0;
        require(p0 < 1.0, "offspring law must satisfy rho(0) < 1");
        return OffspringLaw{Explicit{std::move(pmf)}};
    }

    [[nodiscard]] Variant const& variant() const noexcept { return rep_; }

    [[nodiscard]] std::string family() const
    {
        struct V
        {
            std::string operator()(Geometric const&) const { return "geometric"; }
            std::string operator()(Poisson const&) const { return "poisson"; }
            std::string operator()(Binomial const&) const { return "binomial"; }
            std::string operator()(Bernoulli const&) const { return "bernoulli"; }
            std::string operator()(TwoPoint const&) const { return "twopoint"; }
            std::string operator()(Explicit const&) const { return "explicit"; }
        };
        return std::visit(V{}, rep_);
    }

    //! Phi(z) for z in [0,1]; Phi(1) = 1 exactly.
    [[nodiscard]] double pgf(double z) const
    {
        if (!(z >= 0.0 && z <= 1.0)) {
            throw std::domain_error("pgf argument must lie in [0,1]");
        }
        if (z == 1.0) {
            return 1.0;
        }
        struct V
        {
            double z;
            double operator()(Geometric const& g) const { return 1.0 / (1.0 + g.mean * (1.0 - z)); }
            double operator()(Poisson const& p) const { return std::exp(-p.mean * (1.0 - z)); }
            double operator()(Binomial const& b) const
            {
                return std::exp(static_cast<double>(b.trials) * std::log1p(-b.success_prob * (1.0 - z)));
            }
            double operator()(Bernoulli const& b) const
            {
                return 1.0 - b.success_prob + b.success_prob * z;
            }
            double operator()(TwoPoint const& t) const
            {
                double const zk = z == 0.0 ? 0.0 : std::exp(atom_value(t) * std::log(z));
                return -std::expm1(t.log_prob) + t.prob() * zk;
            }
            double operator()(Explicit const& e) const
            {
                double acc = 0.0;
                for (auto const& [i, r] : e.pmf) {
                    acc += r * std::pow(z, static_cast<double>(i));
                }
                return std::min(acc, 1.0);
            }
        };
        return std::visit(V{z}, rep_);
    }

    //! rho(i)
    [[nodiscard]] double pmf(Count i) const
    {
        double const x = static_cast<double>(i);
        struct V
        {
            Count i;
            double x;
            double operator()(Geometric const& g) const
            {
                return std::exp(-x * std::log1p(1.0 / g.mean) - std::log1p(g.mean));
            }
            double operator()(Poisson const& p) const
            {
                if (p.mean < 700.0 && i < 100000) {
                    double r = std::exp(-p.mean);
                    for (Count k = 1; k <= i; ++k) {
                        r *= p.mean / static_cast<double>(k);
                    }
                    return r;
                }
                return std::exp(-p.mean + x * std::log(p.mean) - std::lgamma(x + 1.0));
            }
            double operator()(Binomial const& b) const
            {
                if (i > b.trials) {
                    return 0.0;
                }
                double const n = static_cast<double>(b.trials);
                double const p = b.success_prob;
                if (p == 1.0) {
                    return i == b.trials ? 1.0 : 0.0;
                }
                return std::exp(std::lgamma(n + 1.0) - std::lgamma(x + 1.0) - std::lgamma(n - x + 1.0)
                                + x * std::log(p) + (n - x) * std::log1p(-p));
            }
            double operator()(Bernoulli const& b) const
            {
                return i == 0 ? 1.0 - b.success_prob : (i == 1 ? b.success_prob : 0.0);
            }
            double operator()(TwoPoint const& t) const
            {
                bool const at_atom = t.log_atom < 44.0 && static_cast<double>(i) == atom_value(t);
                if (i == 0) {
                    return at_atom ? 1.0 : -std::expm1(t.log_prob);
                }
                return at_atom ? t.prob() : 0.0;
            }
            double operator()(Explicit const& e) const
            {
                for (auto const& [k, r] : e.pmf) {
                    if (k == i) {
                        return r;
                    }
                }
                return 0.0;
            }
        };
        return std::visit(V{i, x}, rep_);
    }

    [[nodiscard]] double log_mean() const
    {
        struct V
        {
            double operator()(Geometric const& g) const { return std::log(g.mean); }
            double operator()(Poisson const& p) const { return std::log(p.mean); }
            double operator()(Binomial const& b) const
            {
                return std::log(static_cast<double>(b.trials)) + std::log(b.success_prob);
            }
            double operator()(Bernoulli const& b) const { return std::log(b.success_prob); }
            double operator()(TwoPoint const& t) const { return t.log_atom + t.log_prob; }
            double operator()(Explicit const& e) const { return std::log(explicit_moment(e, 1)); }
        };
        return std::visit(V{}, rep_);
    }

    //! log((m2 - m) / m^2), -inf when m2 = m.
    [[nodiscard]] double log_excess() const
    {
        constexpr double neg_inf = -std::numeric_limits<double>::infinity();
        struct V
        {
            double operator()(Geometric const&) const { return std::log(2.0); }
            double operator()(Poisson const&) const { return 0.0; }
            double operator()(Binomial const& b) const
            {
                return b.trials == 1 ? neg_inf
                                     : std::log1p(-1.0 / static_cast<double>(b.trials));
            }
            double operator()(Bernoulli const&) const { return neg_inf; }
            double operator()(TwoPoint const& t) const
            {
                if (t.log_atom == 0.0) {
                    return neg_inf;
                }
                return std::log(-std::expm1(-t.log_atom)) - t.log_prob;
            }
            double operator()(Explicit const& e) const
            {
                double const m = explicit_moment(e, 1);
                double const m2 = explicit_moment(e, 2);
                double const d = m2 - m;
                return d > 0.0 ? std::log(d) - 2.0 * std::log(m) : neg_inf;
            }
        };
        return std::visit(V{}, rep_);
    }

    //! log(m2 / m^2) = log(1/m + (m2 - m)/m^2)
    [[nodiscard]] double log_second_ratio() const
    {
        double const a = -log_mean();
        double const b = log_excess();
        return log_add(a, b);
    }

    [[nodiscard]] double log_second_moment() const
    {
        return log_second_ratio() + 2.0 * log_mean();
    }

    [[nodiscard]] double mean() const { return std::exp(log_mean()); }

    //! E[W^2]; +inf when it exceeds the double range (huge two-point atoms).
    [[nodiscard]] double second_moment() const
    {
        struct V
        {
            double operator()(Geometric const& g) const { return 2.0 * g.mean * g.mean + g.mean; }
            double operator()(Poisson const& p) const { return p.mean * p.mean + p.mean; }
            double operator()(Binomial const& b) const
            {
                double const n = static_cast<double>(b.trials);
                double const p = b.success_prob;
                return n * p * (1.0 - p) + n * n * p * p;
            }
            double operator()(Bernoulli const& b) const { return b.success_prob; }
            double operator()(TwoPoint const& t) const
            {
                return std::exp(2.0 * t.log_atom + t.log_prob);
            }
            double operator()(Explicit const& e) const { return explicit_moment(e, 2); }
        };
        return std::visit(V{}, rep_);
    }

    //! One offspring count.
    [[nodiscard]] Count sample(Stream& s) const
    {
        struct V
        {
            Stream& s;
            Count operator()(Geometric const& g) const { return geometric_variate(g.mean, s); }
            Count operator()(Poisson const& p) const { return poisson_variate(p.mean, s); }
            Count operator()(Binomial const& b) const
            {
                return binomial_variate(b.trials, b.success_prob, s);
            }
            Count operator()(Bernoulli const& b) const
            {
                return s.uniform() < b.success_prob ? 1 : 0;
            }
            Count operator()(TwoPoint const& t) const
            {
                return s.uniform() < t.prob() ? atom_count(t) : 0;
            }
            Count operator()(Explicit const& e) const
            {
                double u = s.uniform();
                for (auto const& [i, r] : e.pmf) {
                    if (u < r) {
                        return i;
                    }
                    u -= r;
                }
                return e.pmf.back().first;
            }
        };
        return std::visit(V{s}, rep_);
    }

    //! Sum of `z` independent offspring counts, drawn exactly from the law of
    //! the sum. Saturates at count_max.
    [[nodiscard]] Count sample_sum(Count z, Stream& s) const
    {
        if (z == 0) {
            return 0;
        }
        struct V
        {
            Count z;
            Stream& s;
            Count operator()(Geometric const& g) const
            {
                if (z <= 16) {
                    Count acc = 0;
                    for (Count j = 0; j < z; ++j) {
                        acc = detail::saturating_add(acc, geometric_variate(g.mean, s));
                    }
                    return acc;
                }
                // Negative binomial as a gamma-mixed Poisson.
                double const lambda = gamma_variate(static_cast<double>(z), s) * g.mean;
                return poisson_variate(lambda, s);
            }
            Count operator()(Poisson const& p) const
            {
                return poisson_variate(static_cast<double>(z) * p.mean, s);
            }
            Count operator()(Binomial const& b) const
            {
                return binomial_variate(detail::saturating_mul(z, b.trials), b.success_prob, s);
            }
            Count operator()(Bernoulli const& b) const
            {
                return binomial_variate(z, b.success_prob, s);
            }
            Count operator()(TwoPoint const& t) const
            {
                Count const hits = binomial_variate(z, t.prob(), s);
                return detail::saturating_mul(hits, atom_count(t));
            }
            Count operator()(Explicit const& e) const
            {
                // Multinomial cell counts by sequential conditional binomials.
                Count remaining = z;
                double mass_left = 1.0;
                Count acc = 0;
                for (std::size_t j = 0; j < e.pmf.size() && remaining > 0; ++j) {
                    auto const [i, r] = e.pmf[j];
                    Count cell = 0;
                    if (j + 1 == e.pmf.size() || r >= mass_left) {
                        cell = remaining;
                    } else {
                        cell = binomial_variate(remaining, std::clamp(r / mass_left, 0.0, 1.0), s);
                    }
                    acc = detail::saturating_add(acc, detail::saturating_mul(cell, i));
                    remaining -= cell;
                    mass_left -= r;
                }
                return acc;
            }
        };
        return std::visit(V{z, s}, rep_);
    }

    //! log(exp(a) + exp(b))
    [[nodiscard]] static double log_add(double a, double b) noexcept
    {
        if (a == -std::numeric_limits<double>::infinity()) {
            return b;
        }
        if (b == -std::numeric_limits<double>::infinity()) {
            return a;
        }
        double const hi = std::max(a, b);
        return hi + std::log1p(std::exp(std::min(a, b) - hi));
    }

  private:
    explicit OffspringLaw(Variant v) : rep_{std::move(v)} {}

    static void require(bool ok, char const* what)
    {
        if (!ok) {
            throw LawError(what);
        }
    }

    static double explicit_moment(Explicit const& e, int order)
    {
        double acc = 0.0;
        for (auto const& [i, r] : e.pmf) {
            double const x = static_cast<double>(i);
            acc += r * (order == 1 ? x : x * x);
        }
        return acc;
    }

    //! The atom as an exact integer while it fits in a double mantissa.
    static double atom_value(TwoPoint const& t)
    {
        return t.log_atom < 36.0 ? std::nearbyint(t.atom()) : t.atom();
    }

    static Count atom_count(TwoPoint const& t)
    {
        return t.log_atom >= 44.3 ? count_max : detail::saturate(std::nearbyint(t.atom()));
    }

    Variant rep_;
};

}  // namespace bpve
