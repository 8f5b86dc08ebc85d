#include "hawkmit/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace hawkmit::harness {

double Law::draw(std::mt19937_64& rng) const {
    if (kind == Kind::Constant) return a;
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return a + (b - a) * unit;
}

namespace {

nlohmann::json law_to_json(const Law& law) {
    nlohmann::json j;
    if (law.kind == Law::Kind::Constant) {
        j["const"] = law.a;
    } else {
        j["uniform"] = {law.a, law.b};
    }
    return j;
}

Law law_from_json(const nlohmann::json& j) {
    if (j.contains("const")) return Law::constant(j.at("const").get<double>());
    const auto bounds = j.at("uniform").get<std::vector<double>>();
    if (bounds.size() != 2) throw std::invalid_argument("law: uniform needs [lo, hi]");
    return Law::uniform(bounds[0], bounds[1]);
}

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void read_law_if(const nlohmann::json& j, const char* key, Law& out) {
    if (j.contains(key)) out = law_from_json(j.at(key));
}

}  // namespace

std::string ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["sparsity"] = sparsity;
    j["omega"] = omega;
    j["delta_t"] = delta_t;
    j["delta_f"] = delta_f;
    j["L"] = intervals;
    j["gamma"] = gamma;
    j["stages"] = stages;
    j["eval_runs"] = eval_runs;
    j["fake_sources"] = fake_sources;
    j["mitigators"] = mitigators;
    j["cap_law"] = law_to_json(cap_law);
    j["price_law"] = law_to_json(price_law);
    j["budget_per_node_law"] = law_to_json(budget_per_node_law);
    j["mu_law"] = law_to_json(mu_law);
    j["rho_law"] = law_to_json(rho_law);
    j["lstd_samples"] = lstd_samples;
    j["replicates"] = replicates;
    j["reward"] = mdp::to_string(reward);
    j["methods"] = methods;
    j["moment_grid"] = moment_grid;
    j["cec_horizon"] = cec_horizon;
    j["threads"] = threads;
    j["vm_nodes"] = vm_nodes;
    j["vm_sparsity"] = vm_sparsity;
    j["vm_mu_law"] = law_to_json(vm_mu_law);
    j["vm_rho_law"] = law_to_json(vm_rho_law);
    j["vm_pairs"] = vm_pairs;
    j["vm_sims"] = vm_sims;
    j["vm_bins"] = vm_bins;
    j["vm_t_max"] = vm_t_max;
    j["conv_sample_counts"] = conv_sample_counts;
    j["conv_rollouts"] = conv_rollouts;
    j["conv_replicates"] = conv_replicates;
    j["rank_trajectories"] = rank_trajectories;
    j["rank_replicates"] = rank_replicates;
    j["sweep_n"] = sweep_n;
    j["sweep_campaign"] = sweep_campaign;
    j["sweep_sparsity"] = sweep_sparsity;
    j["sweep_stage_len"] = sweep_stage_len;
    return j.dump();
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    ExperimentConfig c;
    read_if(j, "n", c.n);
    read_if(j, "sparsity", c.sparsity);
    read_if(j, "omega", c.omega);
    read_if(j, "delta_t", c.delta_t);
    c.delta_f = c.delta_t;
    read_if(j, "delta_f", c.delta_f);
    read_if(j, "L", c.intervals);
    read_if(j, "gamma", c.gamma);
    read_if(j, "stages", c.stages);
    read_if(j, "eval_runs", c.eval_runs);
    read_if(j, "fake_sources", c.fake_sources);
    read_if(j, "mitigators", c.mitigators);
    read_law_if(j, "cap_law", c.cap_law);
    read_law_if(j, "price_law", c.price_law);
    read_law_if(j, "budget_per_node_law", c.budget_per_node_law);
    read_law_if(j, "mu_law", c.mu_law);
    read_law_if(j, "rho_law", c.rho_law);
    read_if(j, "lstd_samples", c.lstd_samples);
    read_if(j, "replicates", c.replicates);
    if (j.contains("reward")) c.reward = mdp::reward_kind_from_string(j.at("reward"));
    read_if(j, "methods", c.methods);
    read_if(j, "moment_grid", c.moment_grid);
    read_if(j, "cec_horizon", c.cec_horizon);
    read_if(j, "threads", c.threads);
    read_if(j, "vm_nodes", c.vm_nodes);
    read_if(j, "vm_sparsity", c.vm_sparsity);
    read_law_if(j, "vm_mu_law", c.vm_mu_law);
    read_law_if(j, "vm_rho_law", c.vm_rho_law);
    read_if(j, "vm_pairs", c.vm_pairs);
    read_if(j, "vm_sims", c.vm_sims);
    read_if(j, "vm_bins", c.vm_bins);
    read_if(j, "vm_t_max", c.vm_t_max);
    read_if(j, "conv_sample_counts", c.conv_sample_counts);
    read_if(j, "conv_rollouts", c.conv_rollouts);
    read_if(j, "conv_replicates", c.conv_replicates);
    read_if(j, "rank_trajectories", c.rank_trajectories);
    read_if(j, "rank_replicates", c.rank_replicates);
    read_if(j, "sweep_n", c.sweep_n);
    read_if(j, "sweep_campaign", c.sweep_campaign);
    read_if(j, "sweep_sparsity", c.sweep_sparsity);
    read_if(j, "sweep_stage_len", c.sweep_stage_len);
    c.validate();
    return c;
}

void ExperimentConfig::validate() const {
    if (n < 1) throw std::invalid_argument("config: n must be >= 1");
    if (sparsity < 0.0 || sparsity > 1.0) throw std::invalid_argument("config: bad sparsity");
    if (!(omega > 0.0)) throw std::invalid_argument("config: omega must be > 0");
    if (!(delta_t > 0.0)) throw std::invalid_argument("config: delta_t must be > 0");
    if (delta_f != delta_t) {
        throw std::invalid_argument(
            "config: delta_f must equal delta_t (feature blocks are stage counts)");
    }
    if (intervals < 1) throw std::invalid_argument("config: L must be >= 1");
    if (gamma <= 0.0 || gamma > 1.0) throw std::invalid_argument("config: gamma must be in (0, 1]");
    if (stages < 1) throw std::invalid_argument("config: stages must be >= 1");
    if (mitigators < 1) throw std::invalid_argument("config: need at least one mitigator");
    if (fake_sources < 1) throw std::invalid_argument("config: need at least one fake source");
    if (fake_sources + mitigators > n) {
        throw std::invalid_argument("config: fake_sources + mitigators exceeds n");
    }
    if (eval_runs < 1 || replicates < 1) throw std::invalid_argument("config: bad run counts");
    if (lstd_samples < 1) throw std::invalid_argument("config: lstd_samples must be >= 1");
}

std::string GeneratedNetwork::to_json() const {
    nlohmann::json j;
    j["model"] = nlohmann::json::parse(model.to_json());
    j["fake_sources"] = fake_sources;
    j["mitigators"] = base.mitigators;
    j["caps"] = std::vector<double>(base.caps.data(), base.caps.data() + base.caps.size());
    j["prices"] = std::vector<double>(base.prices.data(), base.prices.data() + base.prices.size());
    j["nominal_budget"] = base.budget;
    return j.dump();
}

GeneratedNetwork GeneratedNetwork::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    NetworkModel model = NetworkModel::from_json(j.at("model").dump());
    FeasibleSet base;
    const auto caps = j.at("caps").get<std::vector<double>>();
    const auto prices = j.at("prices").get<std::vector<double>>();
    base.caps = Eigen::Map<const Vector>(caps.data(), static_cast<Eigen::Index>(caps.size()));
    base.prices = Eigen::Map<const Vector>(prices.data(), static_cast<Eigen::Index>(prices.size()));
    base.mitigators = j.at("mitigators").get<std::vector<int>>();
    base.budget = j.at("nominal_budget").get<double>();
    base.validate();
    return GeneratedNetwork{std::move(model), std::move(base),
                            j.at("fake_sources").get<std::vector<int>>()};
}

GeneratedNetwork generate_network(const ExperimentConfig& config, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int n = config.n;
    const auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (unit() < config.sparsity) a(i, j) = 0.5 * unit();
        }
    }
    const double target_rho = config.rho_law.draw(rng);
    const double rho0 = spectral_radius(a, config.omega);
    if (rho0 > 0.0) a *= target_rho * config.omega / (rho0 * config.omega);

    Matrix follow = Matrix::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (a(j, i) > 0.0) follow(i, j) = 1.0;
        }
    }

    // Disjoint role draw: partial Fisher-Yates over the node indices.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const int picks = config.fake_sources + config.mitigators;
    for (int i = 0; i < picks; ++i) {
        const int j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(n - i));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    std::vector<int> fake(order.begin(), order.begin() + config.fake_sources);
    std::vector<int> mitigating(order.begin() + config.fake_sources, order.begin() + picks);
    std::sort(fake.begin(), fake.end());
    std::sort(mitigating.begin(), mitigating.end());

    Vector mu_f = Vector::Zero(n);
    for (int i : fake) mu_f[i] = config.mu_law.draw(rng);
    Vector mu_m = Vector::Zero(n);
    for (int i : mitigating) mu_m[i] = config.mu_law.draw(rng);

    FeasibleSet base;
    base.caps = Vector::Zero(n);
    base.prices = Vector::Ones(n);
    for (int i : mitigating) {
        base.caps[i] = config.cap_law.draw(rng);
        base.prices[i] = config.price_law.draw(rng);
    }
    base.mitigators = mitigating;
    base.budget = 0.5 * (config.budget_per_node_law.a + config.budget_per_node_law.b) * n;
    base.validate();

    NetworkModel model(std::move(a), config.omega, std::move(mu_f), std::move(mu_m),
                       std::move(follow));
    return GeneratedNetwork{std::move(model), std::move(base), std::move(fake)};
}

std::vector<double> draw_stage_budgets(const ExperimentConfig& config, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> budgets(static_cast<std::size_t>(config.stages));
    for (double& b : budgets) {
        b = static_cast<double>(config.n) * config.budget_per_node_law.draw(rng);
    }
    return budgets;
}

}  // namespace hawkmit::harness
