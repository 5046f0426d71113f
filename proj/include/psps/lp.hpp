#pragma once

#include "psps/csv.hpp"
#include "psps/error.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace psps::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Variable {
    std::string name;
    double lower = 0.0;
    double upper = kInf;
    double cost = 0.0;
    bool integer = false;
};

struct Term {
    std::size_t var = 0;
    double coef = 0.0;
};

/// lower <= sum(terms) <= upper; equal bounds make an equality row.
struct Constraint {
    std::string name;
    std::vector<Term> terms;
    double lower = -kInf;
    double upper = kInf;
};

/// Backend-neutral description of a minimisation problem with optional
/// integrality and per-variable start hints. Immutable once handed to a solver.
class Model {
public:
    std::size_t add_variable(std::string name, double lower, double upper, double cost = 0.0, bool integer = false) {
        if (lower > upper) throw InconsistencyError("variable " + name + ": lower bound above upper bound");
        vars_.push_back({std::move(name), lower, upper, cost, integer});
        hints_.emplace_back();
        return vars_.size() - 1;
    }

    std::size_t add_constraint(std::string name, std::vector<Term> terms, double lower, double upper) {
        if (lower > upper) throw InconsistencyError("constraint " + name + ": lower bound above upper bound");
        for (const auto& t : terms)
            if (t.var >= vars_.size()) throw InconsistencyError("constraint " + name + ": unknown variable");
        rows_.push_back({std::move(name), std::move(terms), lower, upper});
        return rows_.size() - 1;
    }

    void set_hint(std::size_t var, double value) { hints_.at(var) = value; }
    void set_objective_offset(double v) { offset_ = v; }

    const std::vector<Variable>& variables() const { return vars_; }
    const std::vector<Constraint>& constraints() const { return rows_; }
    const std::vector<std::optional<double>>& hints() const { return hints_; }
    double objective_offset() const { return offset_; }
    std::size_t num_integer() const {
        std::size_t n = 0;
        for (const auto& v : vars_) n += v.integer;
        return n;
    }

    double objective(const std::vector<double>& x) const {
        double obj = offset_;
        for (std::size_t j = 0; j < vars_.size(); ++j) obj += vars_[j].cost * x[j];
        return obj;
    }

    /// Largest bound or row violation of `x`.
    double max_violation(const std::vector<double>& x) const {
        double worst = 0.0;
        for (std::size_t j = 0; j < vars_.size(); ++j) {
            worst = std::max(worst, vars_[j].lower - x[j]);
            worst = std::max(worst, x[j] - vars_[j].upper);
        }
        for (const auto& r : rows_) {
            double act = 0.0;
            for (const auto& t : r.terms) act += t.coef * x[t.var];
            worst = std::max(worst, r.lower - act);
            worst = std::max(worst, act - r.upper);
        }
        return worst;
    }

    /// CPLEX LP text, for inspecting a model with an external solver.
    void write_lp(std::ostream& out) const {
        auto name = [&](std::size_t j) { return vars_[j].name.empty() ? "x" + std::to_string(j) : vars_[j].name; };
        auto term = [&](double c, std::size_t j, bool first) {
            std::string s = c < 0 ? "- " : (first ? "" : "+ ");
            s += csv::format_double(std::abs(c)) + " " + name(j);
            return s;
        };
        auto expr = [&](const std::vector<Term>& terms) {
            std::string s;
            bool first = true;
            for (const auto& t : terms) {
                if (t.coef == 0.0) continue;
                s += (first ? "" : " ") + term(t.coef, t.var, first);
                first = false;
            }
            return s.empty() ? std::string("0 ") + name(0) : s;
        };
        out << "\\ objective offset " << csv::format_double(offset_) << "\nMinimize\n obj: ";
        std::vector<Term> obj;
        for (std::size_t j = 0; j < vars_.size(); ++j)
            if (vars_[j].cost != 0.0) obj.push_back({j, vars_[j].cost});
        out << (obj.empty() ? std::string("0 ") + name(0) : expr(obj)) << "\nSubject To\n";
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const auto& r = rows_[i];
            auto rn = r.name.empty() ? "c" + std::to_string(i) : r.name;
            auto e = expr(r.terms);
            if (r.lower == r.upper) out << ' ' << rn << ": " << e << " = " << csv::format_double(r.lower) << '\n';
            else {
                if (r.lower > -kInf) out << ' ' << rn << "_lo: " << e << " >= " << csv::format_double(r.lower) << '\n';
                if (r.upper < kInf) out << ' ' << rn << "_hi: " << e << " <= " << csv::format_double(r.upper) << '\n';
            }
        }
        out << "Bounds\n";
        for (std::size_t j = 0; j < vars_.size(); ++j) {
            const auto& v = vars_[j];
            if (v.lower == -kInf && v.upper == kInf) out << ' ' << name(j) << " free\n";
            else {
                out << ' ' << (v.lower == -kInf ? std::string("-inf") : csv::format_double(v.lower)) << " <= "
                    << name(j) << " <= " << (v.upper == kInf ? std::string("+inf") : csv::format_double(v.upper))
                    << '\n';
            }
        }
        bool any = false;
        for (std::size_t j = 0; j < vars_.size(); ++j)
            if (vars_[j].integer) {
                if (!any) out << "General\n";
                any = true;
                out << ' ' << name(j) << '\n';
            }
        out << "End\n";
    }

private:
    std::vector<Variable> vars_;
    std::vector<Constraint> rows_;
    std::vector<std::optional<double>> hints_;
    double offset_ = 0.0;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit, TimeLimit };

inline const char* to_string(Status s) {
    switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration_limit";
    case Status::TimeLimit: return "time_limit";
    }
    return "?";
}

} // namespace psps::lp
