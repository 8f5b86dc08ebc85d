#pragma once

#include "hawkmit/common.hpp"
#include "hawkmit/mdp.hpp"
#include "hawkmit/optimize.hpp"

#include <cstdint>
#include <vector>

namespace hawkmit::baselines {

/// All-pairs shortest-path distances along influence direction: edge i -> j
/// iff b_ji = 1 (j follows i), unit weights, unreachable pairs carry the
/// sentinel n. Closeness cent_i = 1 / sum_j dis(i, j).
class CentralityCache {
  public:
    explicit CentralityCache(const Matrix& follow);

    int n() const { return n_; }
    int distance(int i, int j) const { return distances_[static_cast<std::size_t>(i) * n_ + j]; }
    const Vector& closeness() const { return closeness_; }

  private:
    int n_;
    std::vector<int> distances_;
    Vector closeness_;
};

/// Uniform draw u_i ~ U[0, alpha_i] on mitigators, projected to the budget.
Vector rnd_policy(const FeasibleSet& feasible, std::uint64_t seed);

/// Budget proportional to closeness centrality, water-filled against the
/// caps so that c'u = min(C, c'alpha).
Vector cls_policy(const CentralityCache& cache, const FeasibleSet& feasible);

/// Exposure-weighted closeness: cent_i = sum_j exposures(j) / dis(i, j) with
/// the fake-news exposures aggregated over the stored feature intervals.
/// Falls back to cls_policy when there is no fake activity.
Vector exp_policy(const CentralityCache& cache, const mdp::StageState& state,
                  const FeasibleSet& feasible, const Matrix& follow);

struct PlanOptions {
    double objective_tolerance = 1e-6;
    int max_sweeps = 50;
};

/// Sensitivities of stage-j expected quantities to the stage-k control,
/// depending only on d = j - k; shared by every block solve of a plan and
/// reusable across plans of the same horizon.
struct PlanWorkspace {
    std::vector<Matrix> count_sens;    // d E[z_j] / d u_k
    std::vector<Matrix> carry_sens;    // d y_j / d u_k (zero at d = 0)
    std::vector<Matrix> w_count_sens;  // W times count_sens
    std::vector<Matrix> hessian;       // count_sens' W count_sens
};

PlanWorkspace build_plan_workspace(const mdp::ExpectedRewardModel& erm, int horizon);

struct PlanResult {
    std::vector<Vector> controls;
    double objective = 0.0;
    bool converged = false;
    int sweeps = 0;
};

/// Open-loop multistage program: maximize sum_k gamma^k E[R(x^k, u^k)] under
/// deterministic expected dynamics (stage means chained through Gamma and
/// Upsilon, carries propagated in expectation), by block-coordinate ascent
/// over stages.
PlanResult opl_policy(const mdp::ExpectedRewardModel& erm, mdp::RewardKind kind, double gamma,
                      const Vector& y_m0, const Vector& y_f0,
                      const std::vector<FeasibleSet>& stage_feasible,
                      const PlanOptions& options = {}, const PlanWorkspace* workspace = nullptr);

/// Certainty-equivalence control: solve the open-loop program over the next
/// H stages from the observed carries, apply only the first stage's action.
Vector cec_policy(const mdp::ExpectedRewardModel& erm, mdp::RewardKind kind, double gamma,
                  const mdp::StageState& state, const std::vector<FeasibleSet>& stage_feasible,
                  const PlanOptions& options = {}, const PlanWorkspace* workspace = nullptr);

}  // namespace hawkmit::baselines
