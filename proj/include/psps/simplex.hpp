#pragma once

#include "psps/error.hpp"
#include "psps/lp.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

namespace psps::lp {

struct SimplexOptions {
    double primal_tol = 1e-9;
    double dual_tol = 1e-9;
    double pivot_tol = 1e-9;
    double feasibility_tol = 1e-7;    // basic infeasibility accepted when no pivot can repair it
    std::size_t reinvert_every = 64;  // pivots between full tableau rebuilds
    std::size_t max_iterations = 0;   // 0 = 50 * (rows + columns)
    double box = 1e7;                 // stand-in for infinite bounds that would block a dual-feasible start
};

/// Dense bounded-variable simplex on the computational form
///   A x - s = 0,  l <= (x, s) <= u,
/// starting from the all-slack basis. The start is made dual feasible by
/// parking each structural on the bound its cost points to, so the dual
/// simplex alone reaches optimality in the usual case; a primal pass cleans up
/// any dual infeasibility left by round-off. Copies are cheap enough to serve
/// as branch-and-bound node states, and `set_bounds` keeps dual feasibility so
/// a child node re-optimises in a few dual pivots.
class DualSimplex {
public:
    explicit DualSimplex(const Model& model, SimplexOptions opt = {}) : opt_(opt) {
        const auto& vars = model.variables();
        const auto& rows = model.constraints();
        n_ = vars.size();
        m_ = rows.size();
        cols_ = n_ + m_;
        auto a = std::make_shared<std::vector<double>>(m_ * cols_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            for (const auto& t : rows[i].terms) (*a)[i * cols_ + t.var] += t.coef;
            (*a)[i * cols_ + n_ + i] = -1.0;
        }
        a_ = a;
        lo_.resize(cols_);
        hi_.resize(cols_);
        cost_.assign(cols_, 0.0);
        x_.assign(cols_, 0.0);
        d_.assign(cols_, 0.0);
        state_.assign(cols_, State::AtLower);
        boxed_.assign(cols_, false);
        head_.resize(m_);
        for (std::size_t j = 0; j < n_; ++j) {
            lo_[j] = vars[j].lower;
            hi_[j] = vars[j].upper;
            cost_[j] = vars[j].cost;
            if (cost_[j] > 0.0 && lo_[j] == -kInf) lo_[j] = -opt_.box, boxed_[j] = true;
            if (cost_[j] < 0.0 && hi_[j] == kInf) hi_[j] = opt_.box, boxed_[j] = true;
            park(j, cost_[j]);
        }
        for (std::size_t i = 0; i < m_; ++i) {
            lo_[n_ + i] = rows[i].lower;
            hi_[n_ + i] = rows[i].upper;
            head_[i] = n_ + i;
            state_[n_ + i] = State::Basic;
        }
        t_.assign(m_ * cols_, 0.0);
        for (std::size_t k = 0; k < m_ * cols_; ++k) t_[k] = -(*a_)[k];
        for (std::size_t i = 0; i < m_; ++i) {
            double act = 0.0;
            for (std::size_t j = 0; j < n_; ++j) act += (*a_)[i * cols_ + j] * x_[j];
            x_[n_ + i] = act;
        }
        d_ = cost_;
        offset_ = model.objective_offset();
    }

    std::size_t num_variables() const { return n_; }
    std::size_t num_rows() const { return m_; }
    std::size_t iterations() const { return iterations_; }
    double lower(std::size_t j) const { return lo_[j]; }
    double upper(std::size_t j) const { return hi_[j]; }
    double value(std::size_t j) const { return x_[j]; }

    std::vector<double> solution() const { return {x_.begin(), x_.begin() + std::ptrdiff_t(n_)}; }

    double objective() const {
        double obj = offset_;
        for (std::size_t j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
        return obj;
    }

    /// Changes a structural's bounds; the basis stays dual feasible.
    void set_bounds(std::size_t j, double lo, double hi) {
        lo_[j] = lo;
        hi_[j] = hi;
        boxed_[j] = false;
        if (state_[j] == State::Basic) return;
        double old = x_[j];
        park(j, d_[j]);
        shift_nonbasic(j, x_[j] - old);
    }

    Status solve() {
        for (int round = 0; round < 8; ++round) {
            auto s = dual_phase();
            if (!shift_.empty()) {
                // drop the anti-cycling perturbation; the primal pass repairs what it leaves
                shift_.clear();
                reinvert();
            }
            if (s != Status::Optimal) return s;
            if (!dual_feasible()) {
                s = primal_phase();
                if (s != Status::Optimal) return s;
            }
            if (primal_feasible() && dual_feasible()) {
                for (std::size_t j = 0; j < n_; ++j)
                    if (boxed_[j] && std::abs(x_[j]) >= opt_.box * (1.0 - 1e-9)) return Status::Unbounded;
                return Status::Optimal;
            }
            reinvert();
        }
        return Status::IterationLimit;
    }

    /// Rebuilds the tableau, basic values and reduced costs from the original
    /// matrix and the current basis.
    void reinvert() {
        t_ = *a_;
        std::vector<std::size_t> new_head(m_, cols_);
        std::vector<bool> done(m_, false);
        for (std::size_t k = 0; k < m_; ++k) {
            std::size_t col = head_[k];
            std::size_t p = m_;
            double best = 0.0;
            for (std::size_t i = 0; i < m_; ++i)
                if (!done[i] && std::abs(t_[i * cols_ + col]) > best) best = std::abs(t_[i * cols_ + col]), p = i;
            if (p == m_ || best < 1e-12) throw SolverError("simplex: basis became singular during reinversion");
            eliminate(p, col);
            done[p] = true;
            new_head[p] = col;
        }
        head_ = new_head;
        for (std::size_t i = 0; i < m_; ++i) {
            double v = 0.0;
            const double* row = &t_[i * cols_];
            for (std::size_t j = 0; j < cols_; ++j)
                if (state_[j] != State::Basic && x_[j] != 0.0) v -= row[j] * x_[j];
            x_[head_[i]] = v;
        }
        d_ = cost_;
        if (!shift_.empty())
            for (std::size_t j = 0; j < cols_; ++j) d_[j] += shift_[j];
        for (std::size_t i = 0; i < m_; ++i) {
            double cb = cost_[head_[i]] + (shift_.empty() ? 0.0 : shift_[head_[i]]);
            if (cb == 0.0) continue;
            const double* row = &t_[i * cols_];
            for (std::size_t j = 0; j < cols_; ++j) d_[j] -= cb * row[j];
        }
        for (std::size_t i = 0; i < m_; ++i) d_[head_[i]] = 0.0;
        since_reinvert_ = 0;
    }

private:
    enum class State : unsigned char { Basic, AtLower, AtUpper, Free, Fixed };

    bool can_increase(std::size_t j) const { return state_[j] == State::AtLower || state_[j] == State::Free; }
    bool can_decrease(std::size_t j) const { return state_[j] == State::AtUpper || state_[j] == State::Free; }

    /// Puts nonbasic j on the bound that keeps its reduced cost dual feasible.
    void park(std::size_t j, double reduced_cost) {
        if (lo_[j] == hi_[j]) {
            state_[j] = State::Fixed;
            x_[j] = lo_[j];
        } else if (reduced_cost > 0.0) {
            if (lo_[j] == -kInf) throw SolverError("simplex: cannot park variable on an infinite bound");
            state_[j] = State::AtLower, x_[j] = lo_[j];
        } else if (reduced_cost < 0.0) {
            if (hi_[j] == kInf) throw SolverError("simplex: cannot park variable on an infinite bound");
            state_[j] = State::AtUpper, x_[j] = hi_[j];
        } else if (lo_[j] > -kInf) {
            state_[j] = State::AtLower, x_[j] = lo_[j];
        } else if (hi_[j] < kInf) {
            state_[j] = State::AtUpper, x_[j] = hi_[j];
        } else {
            state_[j] = State::Free, x_[j] = 0.0;
        }
    }

    /// Pushes every nonbasic reduced cost a little further into its feasible
    /// direction, which breaks the dual degeneracy that lets the dual simplex cycle.
    void perturb_costs() {
        shift_.assign(cols_, 0.0);
        for (std::size_t j = 0; j < cols_; ++j) {
            if (state_[j] != State::AtLower && state_[j] != State::AtUpper) continue;
            // deterministic spread in [1, 2)
            double spread = 1.0 + double((j * 2654435761u) % 1000u) / 1000.0;
            double delta = 1e-7 * (1.0 + std::abs(cost_[j])) * spread;
            shift_[j] = state_[j] == State::AtLower ? delta : -delta;
            d_[j] += shift_[j];
        }
    }

    void shift_nonbasic(std::size_t j, double delta) {
        if (delta == 0.0) return;
        for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] -= t_[i * cols_ + j] * delta;
    }

    double infeasibility(std::size_t j) const {
        double v = x_[j];
        if (v < lo_[j]) return lo_[j] - v;
        if (v > hi_[j]) return v - hi_[j];
        return 0.0;
    }

    bool primal_feasible() const {
        for (std::size_t i = 0; i < m_; ++i)
            if (infeasibility(head_[i]) > opt_.feasibility_tol) return false;
        return true;
    }

    bool dual_feasible() const {
        for (std::size_t j = 0; j < cols_; ++j) {
            if ((can_increase(j) && d_[j] < -opt_.dual_tol) || (can_decrease(j) && d_[j] > opt_.dual_tol))
                return false;
        }
        return true;
    }

    std::size_t iteration_cap() const {
        return opt_.max_iterations ? opt_.max_iterations : 50 * (m_ + cols_) + 1000;
    }

    /// Gauss-Jordan step on (r, q) over the tableau only.
    void eliminate(std::size_t r, std::size_t q) {
        double* pr = &t_[r * cols_];
        double inv = 1.0 / pr[q];
        for (std::size_t k = 0; k < cols_; ++k) pr[k] *= inv;
        pr[q] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            double* pi = &t_[i * cols_];
            double f = pi[q];
            if (f == 0.0) continue;
            for (std::size_t k = 0; k < cols_; ++k) pi[k] -= f * pr[k];
            pi[q] = 0.0;
        }
    }

    /// Basis exchange: column q enters in row r, the old basic leaves to a bound.
    void pivot(std::size_t r, std::size_t q, bool leave_at_lower) {
        eliminate(r, q);
        const double* pr = &t_[r * cols_];
        double dq = d_[q];
        if (dq != 0.0)
            for (std::size_t k = 0; k < cols_; ++k) d_[k] -= dq * pr[k];
        d_[q] = 0.0;
        std::size_t leaving = head_[r];
        head_[r] = q;
        state_[q] = State::Basic;
        settle(leaving, leave_at_lower);
        ++iterations_;
        if (++since_reinvert_ >= opt_.reinvert_every) reinvert();
    }

    void settle(std::size_t j, bool at_lower) {
        x_[j] = at_lower ? lo_[j] : hi_[j];
        state_[j] = lo_[j] == hi_[j] ? State::Fixed : (at_lower ? State::AtLower : State::AtUpper);
    }

    Status dual_phase() {
        std::size_t cap = iteration_cap(), it = 0;
        std::vector<bool> tolerated(m_, false); // rows whose round-off infeasibility no pivot can repair
        bool fresh = false;                     // tableau rebuilt since the last pivot
        std::size_t stalled = 0;                // consecutive pivots without dual progress
        while (true) {
            if (++it > cap) return Status::IterationLimit;
            std::size_t r = m_;
            double worst = opt_.primal_tol;
            for (std::size_t i = 0; i < m_; ++i) {
                if (tolerated[i]) continue;
                double inf = infeasibility(head_[i]);
                if (inf > worst) worst = inf, r = i;
            }
            if (r == m_) return Status::Optimal;

            std::size_t leave = head_[r];
            bool increase = x_[leave] < lo_[leave];
            double target = increase ? lo_[leave] : hi_[leave];
            const double* tr = &t_[r * cols_];

            auto eligible = [&](std::size_t k, double a) {
                if (state_[k] == State::Basic || state_[k] == State::Fixed) return false;
                if (std::abs(a) <= opt_.pivot_tol) return false;
                bool need_neg = increase; // increasing x_leave needs a < 0 for an increasing entering var
                if (can_increase(k) && ((a < 0) == need_neg)) return true;
                if (can_decrease(k) && ((a > 0) == need_neg)) return true;
                return false;
            };
            // Harris two-pass ratio test
            double bound = kInf;
            for (std::size_t k = 0; k < cols_; ++k) {
                double a = tr[k];
                if (!eligible(k, a)) continue;
                bound = std::min(bound, (std::abs(d_[k]) + opt_.dual_tol) / std::abs(a));
            }
            if (bound == kInf) {
                if (!fresh) {
                    reinvert();
                    fresh = true;
                    continue;
                }
                if (worst <= opt_.feasibility_tol) {
                    tolerated[r] = true;
                    continue;
                }
                return Status::Infeasible;
            }
            std::size_t q = cols_;
            double best = 0.0;
            for (std::size_t k = 0; k < cols_; ++k) {
                double a = tr[k];
                if (!eligible(k, a)) continue;
                if (std::abs(d_[k]) / std::abs(a) <= bound && std::abs(a) > best) best = std::abs(a), q = k;
            }
            double alpha = tr[q];
            if (std::abs(d_[q]) / std::abs(alpha) > 1e-11) stalled = 0;
            else if (++stalled > 50 && shift_.empty()) perturb_costs();
            double step = (x_[leave] - target) / alpha;
            for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] -= t_[i * cols_ + q] * step;
            x_[q] += step;
            pivot(r, q, increase);
            std::fill(tolerated.begin(), tolerated.end(), false);
            fresh = false;
        }
    }

    Status primal_phase() {
        std::size_t cap = iteration_cap(), it = 0;
        while (true) {
            if (++it > cap) return Status::IterationLimit;
            std::size_t q = cols_;
            double score = opt_.dual_tol;
            double dir = 0.0;
            for (std::size_t k = 0; k < cols_; ++k) {
                if (can_increase(k) && -d_[k] > score) score = -d_[k], q = k, dir = 1.0;
                if (can_decrease(k) && d_[k] > score) score = d_[k], q = k, dir = -1.0;
            }
            if (q == cols_) return Status::Optimal;

            double step = (lo_[q] > -kInf && hi_[q] < kInf) ? hi_[q] - lo_[q] : kInf;
            std::size_t r = m_;
            double best_a = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                double a = t_[i * cols_ + q] * dir;
                if (std::abs(a) <= opt_.pivot_tol) continue;
                std::size_t j = head_[i];
                double limit;
                if (a > 0) {
                    if (lo_[j] == -kInf) continue;
                    limit = (x_[j] - lo_[j]) / a;
                } else {
                    if (hi_[j] == kInf) continue;
                    limit = (hi_[j] - x_[j]) / -a;
                }
                limit = std::max(limit, 0.0);
                if (limit < step || (limit == step && r != m_ && std::abs(a) > best_a)) {
                    step = limit, r = i, best_a = std::abs(a);
                }
            }
            if (step == kInf) return Status::Unbounded;
            for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] -= t_[i * cols_ + q] * dir * step;
            x_[q] += dir * step;
            if (r == m_) {
                settle(q, dir < 0);
                continue;
            }
            pivot(r, q, t_[r * cols_ + q] * dir > 0);
        }
    }

    SimplexOptions opt_;
    std::size_t n_ = 0, m_ = 0, cols_ = 0;
    std::shared_ptr<const std::vector<double>> a_;
    std::vector<double> t_;
    std::vector<double> lo_, hi_, cost_, x_, d_;
    std::vector<double> shift_; // cost perturbation while the dual phase is stalling, else empty
    std::vector<State> state_;
    std::vector<bool> boxed_;
    std::vector<std::size_t> head_;
    double offset_ = 0.0;
    std::size_t iterations_ = 0;
    std::size_t since_reinvert_ = 0;
};

struct LpResult {
    Status status = Status::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
    std::size_t iterations = 0;
};

/// Solves the continuous relaxation of `model`.
inline LpResult solve_lp(const Model& model, SimplexOptions opt = {}) {
    DualSimplex s(model, opt);
    LpResult r;
    r.status = s.solve();
    r.iterations = s.iterations();
    if (r.status == Status::Optimal) {
        r.x = s.solution();
        r.objective = s.objective();
    }
    return r;
}

} // namespace psps::lp
