#pragma once

#include "hawkmit/common.hpp"
#include "hawkmit/mdp.hpp"
#include "hawkmit/optimize.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hawkmit::lstd {

/// Linear value-function policy: V(x) = psi(x)' w with the one-step-lookahead
/// argmax as the implied control rule.
struct Policy {
    Vector w;
    double gamma = 0.7;
    mdp::RewardKind kind = mdp::RewardKind::Correlation;
    FeasibleSet feasible;  // prices, caps and mitigator set; budget is the nominal stage budget
    int intervals = 2;
    std::uint64_t model_hash = 0;

    std::string to_json() const;
    static Policy from_json(const std::string& text);
};

struct Sample {
    mdp::StageState state;
    double budget = 0.0;  // stage budget in force when the state was visited
};

struct SampleSet {
    std::vector<Sample> samples;
};

/// Rolls trajectories of `horizon` stages under the uniform-random behavior
/// policy from the zero state, harvesting the pre-action state of every
/// stage until `count` samples are collected. stage_budgets[k] is the budget
/// in force at stage k of every trajectory.
SampleSet collect_samples(const NetworkModel& model, const FeasibleSet& base,
                          const std::vector<double>& stage_budgets, int count, int horizon,
                          int intervals, double delta, std::uint64_t seed);

/// Expected next feature vector E[psi(x') | x, u]: the newest blocks are the
/// expected stage counts, the older blocks shift in deterministically.
Vector expected_next_features(const mdp::ExpectedRewardModel& erm, const mdp::StageState& state,
                              const Vector& u);

double expected_next_value(const Policy& policy, const mdp::ExpectedRewardModel& erm,
                           const mdp::StageState& state, const Vector& u);

/// One-step-lookahead argmax of E[R(x,u)] + gamma E[V(x')|u] over the
/// feasible set with the given stage budget.
Vector policy_improvement(const Policy& policy, const mdp::ExpectedRewardModel& erm,
                          const mdp::StageState& state, double budget);

struct EvaluationResult {
    Vector w;
    bool ridge_used = false;
    double condition_estimate = 0.0;
};

/// Solves Psi' (Psi - gamma Psi_next) w = Psi' r. A condition estimate above
/// 1e12 (or an exactly singular system) adds ridge 1e-8 I, flagged.
EvaluationResult policy_evaluation(const Matrix& psi, const Matrix& psi_next,
                                   const Vector& rewards, double gamma);

struct TrainConfig {
    int samples = 1000;
    int horizon = 10;
    double gamma = 0.7;
    mdp::RewardKind kind = mdp::RewardKind::Correlation;
    FeasibleSet feasible;
    std::vector<double> stage_budgets;
    int intervals = 2;
    double delta = 1.0;
    std::uint64_t seed = 0;
    int max_iterations = 50;
    double tolerance = 0.1;
};

struct TrainResult {
    Policy policy;
    std::vector<double> weight_deltas;  // ||w_t - w_{t-1}|| per iteration
    bool converged = false;
    bool ridge_used = false;
};

/// Alternates model-based LSTD(0) evaluation with one-step-lookahead
/// improvement until ||delta w|| < tolerance (default 0.1) or max_iterations.
TrainResult policy_iteration(const NetworkModel& model, const mdp::ExpectedRewardModel& erm,
                             const TrainConfig& config);

/// A controller maps (observed state, stage feasible set, stage seed) to a
/// feasible intervention. Baselines and the LSTD policy share this shape.
using Controller =
    std::function<Vector(const mdp::StageState&, const FeasibleSet&, std::uint64_t)>;

struct RolloutResult {
    double total_reward = 0.0;  // sum_k gamma^k R^k for the configured kind
    std::vector<mdp::StageRecord> stages;
    std::vector<EventLog> logs_m;
    std::vector<EventLog> logs_f;
};

/// Closed-loop rollout against the simulator: observe the state, apply the
/// controller, step both processes, accumulate the discounted realized
/// reward. Environment and budget seed streams depend only on (seed, stage),
/// so different controllers under the same seed face common random numbers.
RolloutResult run_mitigation(const NetworkModel& model, const Controller& controller,
                             mdp::RewardKind kind, double gamma, int stages, double delta,
                             int intervals, const FeasibleSet& base,
                             const std::vector<double>& stage_budgets, std::uint64_t seed);

Controller make_policy_controller(const Policy& policy, const mdp::ExpectedRewardModel& erm);

}  // namespace hawkmit::lstd
