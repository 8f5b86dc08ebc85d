#include "hawkmit/lstd.hpp"

#include "hawkmit/baselines.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>

namespace hawkmit::lstd {

std::string Policy::to_json() const {
    nlohmann::json j;
    j["w"] = std::vector<double>(w.data(), w.data() + w.size());
    j["gamma"] = gamma;
    j["kind"] = mdp::to_string(kind);
    j["feasible"]["c"] =
        std::vector<double>(feasible.prices.data(), feasible.prices.data() + feasible.prices.size());
    j["feasible"]["C"] = feasible.budget;
    j["feasible"]["alpha"] =
        std::vector<double>(feasible.caps.data(), feasible.caps.data() + feasible.caps.size());
    j["feasible"]["mitigators"] = feasible.mitigators;
    j["L"] = intervals;
    j["model_hash"] = model_hash;
    return j.dump();
}

Policy Policy::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    Policy p;
    const auto wv = j.at("w").get<std::vector<double>>();
    p.w = Eigen::Map<const Vector>(wv.data(), static_cast<Eigen::Index>(wv.size()));
    p.gamma = j.at("gamma").get<double>();
    p.kind = mdp::reward_kind_from_string(j.at("kind").get<std::string>());
    const auto c = j.at("feasible").at("c").get<std::vector<double>>();
    const auto alpha = j.at("feasible").at("alpha").get<std::vector<double>>();
    p.feasible.prices = Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size()));
    p.feasible.caps =
        Eigen::Map<const Vector>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
    p.feasible.budget = j.at("feasible").at("C").get<double>();
    p.feasible.mitigators = j.at("feasible").at("mitigators").get<std::vector<int>>();
    p.intervals = j.at("L").get<int>();
    p.model_hash = j.at("model_hash").get<std::uint64_t>();
    return p;
}

SampleSet collect_samples(const NetworkModel& model, const FeasibleSet& base,
                          const std::vector<double>& stage_budgets, int count, int horizon,
                          int intervals, double delta, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("collect_samples: count must be >= 1");
    if (horizon < 1) throw std::invalid_argument("collect_samples: horizon must be >= 1");
    if (stage_budgets.size() < static_cast<std::size_t>(horizon)) {
        throw std::invalid_argument("collect_samples: need a budget per stage");
    }
    SampleSet set;
    set.samples.reserve(static_cast<std::size_t>(count));
    std::uint64_t trajectory = 0;
    while (static_cast<int>(set.samples.size()) < count) {
        mdp::StageState state = mdp::zero_state(model.n(), intervals);
        for (int k = 0; k < horizon && static_cast<int>(set.samples.size()) < count; ++k) {
            FeasibleSet stage = base;
            stage.budget = stage_budgets[static_cast<std::size_t>(k)];
            set.samples.push_back(Sample{state, stage.budget});
            const Vector u = baselines::rnd_policy(
                stage, derive_seed(seed, trajectory * 1000 + static_cast<std::uint64_t>(k)));
            state = mdp::step(model, state, u, delta,
                              derive_seed(seed ^ 0x5bd1e995u,
                                          trajectory * 1000 + static_cast<std::uint64_t>(k)))
                        .next;
        }
        ++trajectory;
    }
    return set;
}

Vector expected_next_features(const mdp::ExpectedRewardModel& erm, const mdp::StageState& state,
                              const Vector& u) {
    const int n = state.n();
    const Eigen::Index block = state.z_m.size();
    Vector psi(2 * block + 1);
    psi.head(n) = erm.expected_counts_m(state, u);
    psi.segment(block, n) = erm.expected_counts_f(state);
    if (state.intervals() > 1) {
        const Eigen::Index rest = block - n;
        psi.segment(n, rest) = state.z_m.head(rest);
        psi.segment(block + n, rest) = state.z_f.head(rest);
    }
    psi[2 * block] = 1.0;
    return psi;
}

double expected_next_value(const Policy& policy, const mdp::ExpectedRewardModel& erm,
                           const mdp::StageState& state, const Vector& u) {
    return policy.w.dot(expected_next_features(erm, state, u));
}

Vector policy_improvement(const Policy& policy, const mdp::ExpectedRewardModel& erm,
                          const mdp::StageState& state, double budget) {
    const int n = state.n();
    const mdp::ExpectedRewardModel::Expansion expansion =
        erm.reward_expansion(policy.kind, state);
    // gamma E[V(x')] is affine in u through the newest mitigation block.
    const Vector g =
        expansion.g + policy.gamma * (erm.gamma().transpose() * policy.w.head(n));
    FeasibleSet stage = policy.feasible;
    stage.budget = budget;
    if (policy.kind == mdp::RewardKind::Correlation) {
        return opt::solve_linear(g, stage);
    }
    return opt::solve_concave_qp(g, expansion.q, stage).u;
}

EvaluationResult policy_evaluation(const Matrix& psi, const Matrix& psi_next,
                                   const Vector& rewards, double gamma) {
    if (psi.rows() != psi_next.rows() || psi.rows() != rewards.size() ||
        psi.cols() != psi_next.cols()) {
        throw std::invalid_argument("policy_evaluation: shape mismatch");
    }
    const Matrix a = psi.transpose() * (psi - gamma * psi_next);
    const Vector b = psi.transpose() * rewards;

    EvaluationResult result;
    const Eigen::ColPivHouseholderQR<Matrix> qr(a);
    const Vector diag = qr.matrixR().diagonal().cwiseAbs();
    const double dmax = diag.maxCoeff();
    const double dmin = diag.minCoeff();
    result.condition_estimate = dmin > 0.0 ? dmax / dmin : std::numeric_limits<double>::infinity();
    if (qr.isInvertible() && result.condition_estimate <= 1e12) {
        result.w = qr.solve(b);
        return result;
    }
    result.ridge_used = true;
    const Matrix ridged = a + 1e-8 * Matrix::Identity(a.rows(), a.cols());
    const Eigen::FullPivLU<Matrix> lu(ridged);
    if (!lu.isInvertible()) {
        throw std::runtime_error("policy_evaluation: singular system even after ridge");
    }
    result.w = lu.solve(b);
    return result;
}

TrainResult policy_iteration(const NetworkModel& model, const mdp::ExpectedRewardModel& erm,
                             const TrainConfig& config) {
    const int n = model.n();
    const int d = 2 * n * config.intervals + 1;
    const SampleSet set =
        collect_samples(model, config.feasible, config.stage_budgets, config.samples,
                        config.horizon, config.intervals, config.delta, config.seed);
    const int s = static_cast<int>(set.samples.size());

    Matrix psi(s, d);
    for (int i = 0; i < s; ++i) psi.row(i) = mdp::features(set.samples[i].state).transpose();

    TrainResult result;
    result.policy.w = Vector::Zero(d);
    result.policy.gamma = config.gamma;
    result.policy.kind = config.kind;
    result.policy.feasible = config.feasible;
    result.policy.intervals = config.intervals;
    result.policy.model_hash = model.hash();

    Matrix psi_next(s, d);
    Vector rewards(s);
    for (int it = 0; it < config.max_iterations; ++it) {
        for (int i = 0; i < s; ++i) {
            const Sample& sample = set.samples[i];
            const Vector u =
                policy_improvement(result.policy, erm, sample.state, sample.budget);
            rewards[i] = erm.expected_reward(config.kind, sample.state, u);
            psi_next.row(i) = expected_next_features(erm, sample.state, u).transpose();
        }
        const EvaluationResult eval = policy_evaluation(psi, psi_next, rewards, config.gamma);
        result.ridge_used = result.ridge_used || eval.ridge_used;
        const double delta_w = (eval.w - result.policy.w).norm();
        result.weight_deltas.push_back(delta_w);
        result.policy.w = eval.w;
        if (delta_w < config.tolerance) {
            result.converged = true;
            break;
        }
    }
    return result;
}

RolloutResult run_mitigation(const NetworkModel& model, const Controller& controller,
                             mdp::RewardKind kind, double gamma, int stages, double delta,
                             int intervals, const FeasibleSet& base,
                             const std::vector<double>& stage_budgets, std::uint64_t seed) {
    if (stage_budgets.size() < static_cast<std::size_t>(stages)) {
        throw std::invalid_argument("run_mitigation: need a budget per stage");
    }
    RolloutResult result;
    mdp::StageState state = mdp::zero_state(model.n(), intervals);
    double discount = 1.0;
    for (int k = 0; k < stages; ++k) {
        FeasibleSet stage_feasible = base;
        stage_feasible.budget = stage_budgets[static_cast<std::size_t>(k)];
        const std::uint64_t policy_seed = derive_seed(seed, 2 * static_cast<std::uint64_t>(k) + 1);
        const Vector u = controller(state, stage_feasible, policy_seed);
        if (!stage_feasible.contains(u, 1e-7)) {
            throw std::runtime_error("run_mitigation: controller produced infeasible action");
        }
        const std::uint64_t env_seed = derive_seed(seed, 2 * static_cast<std::uint64_t>(k));
        mdp::StepResult step = mdp::step(model, state, u, delta, env_seed);
        result.total_reward +=
            discount * (kind == mdp::RewardKind::Correlation ? step.reward_corr : step.reward_diff);
        discount *= gamma;

        mdp::StageRecord record;
        record.k = k;
        record.u = u;
        record.r_corr = step.reward_corr;
        record.r_diff = step.reward_diff;
        record.z_m = step.next.z_m.head(model.n());
        record.z_f = step.next.z_f.head(model.n());
        result.stages.push_back(std::move(record));
        result.logs_m.push_back(std::move(step.log_m));
        result.logs_f.push_back(std::move(step.log_f));
        state = std::move(step.next);
    }
    return result;
}

Controller make_policy_controller(const Policy& policy, const mdp::ExpectedRewardModel& erm) {
    return [&policy, &erm](const mdp::StageState& state, const FeasibleSet& stage_feasible,
                           std::uint64_t) {
        return policy_improvement(policy, erm, state, stage_feasible.budget);
    };
}

}  // namespace hawkmit::lstd
