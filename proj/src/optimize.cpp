#include "hawkmit/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hawkmit {

void FeasibleSet::validate() const {
    if (caps.size() != prices.size()) {
        throw std::invalid_argument("FeasibleSet: prices/caps size mismatch");
    }
    if (budget < 0.0) throw std::invalid_argument("FeasibleSet: budget must be >= 0");
    if ((caps.array() < 0.0).any()) throw std::invalid_argument("FeasibleSet: caps must be >= 0");
    for (int i : mitigators) {
        if (i < 0 || i >= n()) throw std::invalid_argument("FeasibleSet: mitigator index out of range");
        if (!(prices[i] > 0.0)) {
            throw std::invalid_argument("FeasibleSet: prices must be > 0 on mitigators");
        }
    }
}

bool FeasibleSet::contains(const Vector& u, double tol) const {
    if (u.size() != prices.size()) return false;
    std::vector<char> allowed(static_cast<std::size_t>(n()), 0);
    for (int i : mitigators) allowed[static_cast<std::size_t>(i)] = 1;
    for (int i = 0; i < n(); ++i) {
        if (u[i] < -tol || u[i] > caps[i] + tol) return false;
        if (!allowed[static_cast<std::size_t>(i)] && std::abs(u[i]) > tol) return false;
    }
    return prices.dot(u) <= budget + tol;
}

namespace opt {

namespace {

Vector clip_to_box(const Vector& u_raw, const FeasibleSet& feasible) {
    Vector u = Vector::Zero(feasible.n());
    for (int i : feasible.mitigators) {
        u[i] = std::clamp(u_raw[i], 0.0, feasible.caps[i]);
    }
    return u;
}

}  // namespace

Vector project_feasible(const Vector& u_raw, const FeasibleSet& feasible) {
    if (u_raw.size() != feasible.prices.size()) {
        throw std::invalid_argument("project_feasible: size mismatch");
    }
    Vector boxed = clip_to_box(u_raw, feasible);
    const double cost = feasible.prices.dot(boxed);
    if (cost <= feasible.budget) return boxed;

    double lo = 0.0;
    double hi = 0.0;
    for (int i : feasible.mitigators) {
        hi = std::max(hi, boxed[i] / feasible.prices[i]);
    }
    const auto shifted = [&](double theta) {
        Vector u = Vector::Zero(feasible.n());
        for (int i : feasible.mitigators) {
            u[i] = std::clamp(boxed[i] - theta * feasible.prices[i], 0.0, feasible.caps[i]);
        }
        return u;
    };
    Vector u = shifted(hi);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Vector candidate = shifted(mid);
        if (feasible.prices.dot(candidate) > feasible.budget) {
            lo = mid;
        } else {
            hi = mid;
            u = candidate;
        }
    }
    return u;
}

Vector solve_linear(const Vector& g, const FeasibleSet& feasible) {
    if (g.size() != feasible.prices.size()) {
        throw std::invalid_argument("solve_linear: size mismatch");
    }
    std::vector<int> order;
    for (int i : feasible.mitigators) {
        if (g[i] > 0.0) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double ra = g[a] / feasible.prices[a];
        const double rb = g[b] / feasible.prices[b];
        if (ra != rb) return ra > rb;
        return a < b;
    });

    Vector u = Vector::Zero(feasible.n());
    double remaining = feasible.budget;
    for (int i : order) {
        if (remaining <= 0.0) break;
        const double take = std::min(feasible.caps[i], remaining / feasible.prices[i]);
        u[i] = take;
        remaining -= take * feasible.prices[i];
    }
    return u;
}

QpResult solve_concave_qp(const Vector& g, const Matrix& q, const FeasibleSet& feasible) {
    if (q.rows() != g.size() || q.cols() != g.size()) {
        throw std::invalid_argument("solve_concave_qp: dimension mismatch");
    }
    if ((q - q.transpose()).lpNorm<Eigen::Infinity>() > 1e-9 * (1.0 + q.norm())) {
        throw std::invalid_argument("solve_concave_qp: Q must be symmetric");
    }
    if (q.lpNorm<Eigen::Infinity>() == 0.0) {
        return QpResult{solve_linear(g, feasible), true, 0};
    }

    const auto objective = [&](const Vector& u) { return g.dot(u) + u.dot(q * u); };

    Vector u = Vector::Zero(feasible.n());
    double value = objective(u);
    double step = 1.0 / std::max(2.0 * q.norm(), 1e-12);
    const int max_iterations = 10000;
    QpResult result;
    for (int it = 0; it < max_iterations; ++it) {
        result.iterations = it + 1;
        const Vector grad = g + 2.0 * (q * u);
        Vector next;
        double next_value = 0.0;
        bool accepted = false;
        double s = step;
        for (int ls = 0; ls < 60; ++ls) {
            next = project_feasible(u + s * grad, feasible);
            next_value = objective(next);
            const double move = (next - u).squaredNorm();
            if (next_value >= value + 1e-4 * move / std::max(s, 1e-300)) {
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) {
            result.u = u;
            result.converged = true;  // no admissible ascent step: stationary
            return result;
        }
        const double pg_norm = (next - u).norm() / s;
        u = next;
        value = next_value;
        step = std::min(s * 2.0, 1.0 / std::max(2.0 * q.norm(), 1e-12) * 1024.0);
        if (pg_norm < 1e-6) {
            result.u = u;
            result.converged = true;
            return result;
        }
    }
    result.u = u;
    result.converged = false;
    return result;
}

QpResult solve(const AllocationProblem& problem) {
    if (problem.q.has_value()) {
        return solve_concave_qp(problem.g, *problem.q, problem.feasible);
    }
    return QpResult{solve_linear(problem.g, problem.feasible), true, 0};
}

}  // namespace opt
}  // namespace hawkmit
