#include "hawkmit/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>

namespace hawkmit::baselines {

CentralityCache::CentralityCache(const Matrix& follow) : n_(static_cast<int>(follow.rows())) {
    distances_.assign(static_cast<std::size_t>(n_) * n_, n_);
    std::vector<std::vector<int>> out_edges(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) {
            if (i != j && follow(j, i) != 0.0) out_edges[static_cast<std::size_t>(i)].push_back(j);
        }
    }
    std::deque<int> queue;
    for (int src = 0; src < n_; ++src) {
        auto dist = [&](int j) -> int& { return distances_[static_cast<std::size_t>(src) * n_ + j]; };
        dist(src) = 0;
        queue.clear();
        queue.push_back(src);
        while (!queue.empty()) {
            const int cur = queue.front();
            queue.pop_front();
            for (int next : out_edges[static_cast<std::size_t>(cur)]) {
                if (dist(next) == n_) {
                    dist(next) = dist(cur) + 1;
                    queue.push_back(next);
                }
            }
        }
    }
    closeness_ = Vector::Zero(n_);
    for (int i = 0; i < n_; ++i) {
        double total = 0.0;
        for (int j = 0; j < n_; ++j) total += distance(i, j);
        closeness_[i] = total > 0.0 ? 1.0 / total : 0.0;
    }
}

Vector rnd_policy(const FeasibleSet& feasible, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Vector u = Vector::Zero(feasible.n());
    for (int i : feasible.mitigators) {
        const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        u[i] = unit * feasible.caps[i];
    }
    return opt::project_feasible(u, feasible);
}

namespace {

/// u_i = min(alpha_i, s * weight_i) with s chosen by bisection so that
/// c'u = min(C, spend at full caps). Proportionality holds except at
/// saturated caps.
Vector water_fill(const Vector& weights, const FeasibleSet& feasible) {
    Vector u = Vector::Zero(feasible.n());
    double cap_spend = 0.0;
    double s_hi = 0.0;
    bool any_positive = false;
    for (int i : feasible.mitigators) {
        if (weights[i] > 0.0) {
            any_positive = true;
            cap_spend += feasible.prices[i] * feasible.caps[i];
            s_hi = std::max(s_hi, feasible.caps[i] / weights[i]);
        }
    }
    if (!any_positive) return u;
    const double target = std::min(feasible.budget, cap_spend);
    if (target <= 0.0) return u;

    const auto filled = [&](double s) {
        Vector v = Vector::Zero(feasible.n());
        for (int i : feasible.mitigators) {
            if (weights[i] > 0.0) v[i] = std::min(feasible.caps[i], s * weights[i]);
        }
        return v;
    };
    double lo = 0.0;
    double hi = s_hi;
    u = filled(hi);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Vector candidate = filled(mid);
        if (feasible.prices.dot(candidate) < target) {
            lo = mid;
        } else {
            hi = mid;
            u = candidate;
        }
    }
    return u;
}

}  // namespace

Vector cls_policy(const CentralityCache& cache, const FeasibleSet& feasible) {
    return water_fill(cache.closeness(), feasible);
}

Vector exp_policy(const CentralityCache& cache, const mdp::StageState& state,
                  const FeasibleSet& feasible, const Matrix& follow) {
    const int n = state.n();
    Vector fake_counts = Vector::Zero(n);
    for (int l = 0; l < state.intervals(); ++l) {
        fake_counts += state.z_f.segment(static_cast<Eigen::Index>(l) * n, n);
    }
    const Vector exposures = follow * fake_counts;
    if (exposures.maxCoeff() <= 0.0) return cls_policy(cache, feasible);

    Vector cent = Vector::Zero(n);
    for (int i : feasible.mitigators) {
        double total = 0.0;
        for (int j = 0; j < n; ++j) {
            // dis(i, i) = 0; weight the self term like a unit-distance hop.
            total += exposures[j] / std::max(1, cache.distance(i, j));
        }
        cent[i] = total;
    }
    return water_fill(cent, feasible);
}

// D_0 = Gamma, D_d = Upsilon (e^{C Delta})^{d-1} (K(Delta) - I), with the
// expected-carry sensitivity alongside.
PlanWorkspace build_plan_workspace(const mdp::ExpectedRewardModel& erm, int horizon) {
    PlanWorkspace ws;
    const int n = erm.model().n();
    ws.count_sens.reserve(static_cast<std::size_t>(horizon));
    ws.carry_sens.reserve(static_cast<std::size_t>(horizon));
    ws.count_sens.push_back(erm.gamma());
    ws.carry_sens.push_back(Matrix::Zero(n, n));
    Matrix carry = erm.carry_input_map();  // d y_{k+1} / d u_k
    for (int d = 1; d < horizon; ++d) {
        ws.carry_sens.push_back(carry);
        ws.count_sens.push_back(erm.upsilon() * carry);
        carry = erm.carry_decay_map() * carry;
    }
    for (const Matrix& sens : ws.count_sens) {
        ws.w_count_sens.push_back(erm.exposure_gram() * sens);
    }
    for (std::size_t d = 0; d < ws.count_sens.size(); ++d) {
        ws.hessian.push_back(ws.count_sens[d].transpose() * ws.w_count_sens[d]);
    }
    return ws;
}

namespace {

struct PlanTrajectory {
    std::vector<Vector> carry_m;   // expected carries y_M at each stage
    std::vector<Vector> mean_m;    // E[z_M] per stage
    std::vector<Vector> carry_f;
    std::vector<Vector> mean_f;
};

PlanTrajectory roll_means(const mdp::ExpectedRewardModel& erm, const std::vector<Vector>& controls,
                          const Vector& y_m0, const Vector& y_f0) {
    const int horizon = static_cast<int>(controls.size());
    const NetworkModel& model = erm.model();
    PlanTrajectory traj;
    Vector ym = y_m0;
    Vector yf = y_f0;
    for (int k = 0; k < horizon; ++k) {
        traj.carry_m.push_back(ym);
        traj.carry_f.push_back(yf);
        const Vector mu_m = model.mu_m() + controls[static_cast<std::size_t>(k)];
        traj.mean_m.push_back(erm.gamma() * mu_m + erm.upsilon() * ym);
        traj.mean_f.push_back(erm.gamma() * model.mu_f() + erm.upsilon() * yf);
        ym = erm.carry_input_map() * mu_m + erm.carry_decay_map() * ym;
        yf = erm.carry_input_map() * model.mu_f() + erm.carry_decay_map() * yf;
    }
    return traj;
}

double plan_objective(const mdp::ExpectedRewardModel& erm, mdp::RewardKind kind, double gamma,
                      const std::vector<Vector>& controls, const PlanTrajectory& traj) {
    const NetworkModel& model = erm.model();
    const double n = static_cast<double>(model.n());
    const Matrix& w = erm.exposure_gram();
    double total = 0.0;
    double discount = 1.0;
    for (std::size_t k = 0; k < controls.size(); ++k) {
        const Vector& m = traj.mean_m[k];
        const Vector& f = traj.mean_f[k];
        double reward;
        if (kind == mdp::RewardKind::Correlation) {
            reward = m.dot(w * f) / n;
        } else {
            const Vector mu_m = model.mu_m() + controls[k];
            const double second_m = erm.variance_mu_coeff().dot(mu_m) +
                                    erm.variance_carry_coeff().dot(traj.carry_m[k]) +
                                    m.dot(w * m) + erm.exposure_gram_diag().dot(m);
            const double second_f = erm.variance_mu_coeff().dot(model.mu_f()) +
                                    erm.variance_carry_coeff().dot(traj.carry_f[k]) +
                                    f.dot(w * f) + erm.exposure_gram_diag().dot(f);
            reward = (-second_m - second_f + 2.0 * m.dot(w * f)) / n;
        }
        total += discount * reward;
        discount *= gamma;
    }
    return total;
}

}  // namespace

PlanResult opl_policy(const mdp::ExpectedRewardModel& erm, mdp::RewardKind kind, double gamma,
                      const Vector& y_m0, const Vector& y_f0,
                      const std::vector<FeasibleSet>& stage_feasible, const PlanOptions& options,
                      const PlanWorkspace* workspace) {
    const int horizon = static_cast<int>(stage_feasible.size());
    if (horizon < 1) throw std::invalid_argument("opl_policy: need at least one stage");
    const int n = erm.model().n();
    const double nd = static_cast<double>(n);
    PlanWorkspace local;
    if (workspace == nullptr ||
        workspace->count_sens.size() < static_cast<std::size_t>(horizon)) {
        local = build_plan_workspace(erm, horizon);
        workspace = &local;
    }
    const PlanWorkspace& ws = *workspace;

    PlanResult result;
    result.controls.assign(static_cast<std::size_t>(horizon), Vector::Zero(n));
    PlanTrajectory traj = roll_means(erm, result.controls, y_m0, y_f0);
    result.objective = plan_objective(erm, kind, gamma, result.controls, traj);

    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        result.sweeps = sweep + 1;
        for (int k = 0; k < horizon; ++k) {
            // Expand the objective in u^k around u^k = 0, other blocks fixed.
            result.controls[static_cast<std::size_t>(k)].setZero();
            traj = roll_means(erm, result.controls, y_m0, y_f0);

            Vector g = Vector::Zero(n);
            Matrix q;
            if (kind == mdp::RewardKind::Difference) q = Matrix::Zero(n, n);
            double discount = std::pow(gamma, k);
            for (int j = k; j < horizon; ++j) {
                const std::size_t d = static_cast<std::size_t>(j - k);
                const Vector& f = traj.mean_f[static_cast<std::size_t>(j)];
                if (kind == mdp::RewardKind::Correlation) {
                    g += discount * (ws.count_sens[d].transpose() * (erm.exposure_gram() * f)) / nd;
                } else {
                    const Vector& m = traj.mean_m[static_cast<std::size_t>(j)];
                    Vector grad = 2.0 * (ws.w_count_sens[d].transpose() * (f - m)) -
                                  ws.count_sens[d].transpose() * erm.exposure_gram_diag() -
                                  ws.carry_sens[d].transpose() * erm.variance_carry_coeff();
                    if (j == k) grad -= erm.variance_mu_coeff();
                    g += discount * grad / nd;
                    q -= (discount / nd) * ws.hessian[d];
                }
                discount *= gamma;
            }

            const FeasibleSet& fs = stage_feasible[static_cast<std::size_t>(k)];
            Vector u_next;
            if (kind == mdp::RewardKind::Correlation) {
                u_next = opt::solve_linear(g, fs);
            } else {
                u_next = opt::solve_concave_qp(g, q, fs).u;
            }
            result.controls[static_cast<std::size_t>(k)] = u_next;
        }
        traj = roll_means(erm, result.controls, y_m0, y_f0);
        const double objective = plan_objective(erm, kind, gamma, result.controls, traj);
        const double gain = objective - result.objective;
        result.objective = objective;
        if (gain < options.objective_tolerance) {
            result.converged = true;
            break;
        }
    }
    return result;
}

Vector cec_policy(const mdp::ExpectedRewardModel& erm, mdp::RewardKind kind, double gamma,
                  const mdp::StageState& state, const std::vector<FeasibleSet>& stage_feasible,
                  const PlanOptions& options, const PlanWorkspace* workspace) {
    const PlanResult plan =
        opl_policy(erm, kind, gamma, state.y_m, state.y_f, stage_feasible, options, workspace);
    return plan.controls.front();
}

}  // namespace hawkmit::baselines
