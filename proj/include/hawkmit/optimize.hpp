#pragma once

#include "hawkmit/common.hpp"

#include <optional>
#include <vector>

namespace hawkmit {

/// Per-stage action space {u : c'u <= C, 0 <= u <= alpha, u_i = 0 off the
/// mitigator set}.
struct FeasibleSet {
    Vector prices;                 // c
    double budget = 0.0;           // C
    Vector caps;                   // alpha
    std::vector<int> mitigators;   // indices allowed u_i > 0

    int n() const { return static_cast<int>(prices.size()); }
    void validate() const;
    bool contains(const Vector& u, double tol = 1e-9) const;
};

namespace opt {

/// Clip to the box (zero off the mitigator set), then if the budget is
/// violated bisect the multiplier theta in clip(u - theta c) until
/// c'u = C. Idempotent.
Vector project_feasible(const Vector& u_raw, const FeasibleSet& feasible);

/// argmax g'u over the feasible set by benefit/cost greedy fill; only
/// coordinates with g_i > 0 receive budget, ties by node index.
Vector solve_linear(const Vector& g, const FeasibleSet& feasible);

struct QpResult {
    Vector u;
    bool converged = true;
    int iterations = 0;
};

/// argmax g'u + u'Qu (Q symmetric NSD) by projected gradient ascent with
/// backtracking; stops when the projected-gradient norm drops below 1e-6 or
/// after 10^4 iterations (best iterate returned, flagged). An exactly zero Q
/// dispatches to the greedy LP solve.
QpResult solve_concave_qp(const Vector& g, const Matrix& q, const FeasibleSet& feasible);

struct AllocationProblem {
    Vector g;
    std::optional<Matrix> q;  // concave quadratic term, when present
    FeasibleSet feasible;
};

QpResult solve(const AllocationProblem& problem);

}  // namespace opt
}  // namespace hawkmit
