#pragma once

#include "hawkmit/common.hpp"
#include "hawkmit/mdp.hpp"
#include "hawkmit/network.hpp"
#include "hawkmit/optimize.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace hawkmit::harness {

/// Scalar sampling law used for the randomized experiment parameters.
struct Law {
    enum class Kind { Constant, Uniform };
    Kind kind = Kind::Constant;
    double a = 0.0;  // value, or lower bound
    double b = 0.0;  // upper bound

    static Law constant(double v) { return Law{Kind::Constant, v, v}; }
    static Law uniform(double lo, double hi) { return Law{Kind::Uniform, lo, hi}; }
    double draw(std::mt19937_64& rng) const;
};

/// Full description of one synthetic experiment. Defaults reproduce the
/// reference synthetic setup: n = 300, sparsity 0.02, omega = 1, unit
/// stages, gamma = 0.7, L = 2, 20 fake-source and 20 mitigator nodes,
/// caps ~ U[0, 0.5], unit prices, per-stage budget n * U[0, 0.5], 1000 LSTD
/// samples, 50 evaluation runs, 10 stages.
struct ExperimentConfig {
    int n = 300;
    double sparsity = 0.02;
    double omega = 1.0;
    double delta_t = 1.0;
    double delta_f = 1.0;  // must equal delta_t; the feature blocks are stage counts
    int intervals = 2;     // L
    double gamma = 0.7;
    int stages = 10;
    int eval_runs = 50;
    int fake_sources = 20;
    int mitigators = 20;
    Law cap_law = Law::uniform(0.0, 0.5);
    Law price_law = Law::constant(1.0);
    Law budget_per_node_law = Law::uniform(0.0, 0.5);  // C_k = n * draw
    Law mu_law = Law::uniform(0.0, 0.1);               // exogenous rate on campaign sources
    Law rho_law = Law::uniform(0.3, 0.9);              // target spectral radius
    int lstd_samples = 1000;
    int replicates = 10;
    mdp::RewardKind reward = mdp::RewardKind::Correlation;
    std::vector<std::string> methods = {"ltd", "cec", "opl", "cls", "exp", "rnd"};
    int moment_grid = 64;
    int cec_horizon = 2;
    int threads = 0;  // 0: hardware concurrency

    // validate-moments protocol
    int vm_nodes = 10;
    double vm_sparsity = 0.3;
    Law vm_mu_law = Law::uniform(0.3, 0.6);
    Law vm_rho_law = Law::uniform(0.5, 0.8);
    int vm_pairs = 4;
    int vm_sims = 100;
    int vm_bins = 20;
    double vm_t_max = 2.0;

    // convergence study
    std::vector<int> conv_sample_counts = {250, 500, 1000, 2000, 4000, 8000};
    int conv_rollouts = 100;
    int conv_replicates = 8;

    // prediction rank protocol
    int rank_trajectories = 12;
    int rank_replicates = 10;

    // sweep axes (benchmark): values substituted per sweep point
    std::vector<int> sweep_n = {100, 200, 300, 400};
    std::vector<int> sweep_campaign = {10, 20, 30, 40};
    std::vector<double> sweep_sparsity = {0.01, 0.02, 0.04, 0.08};
    std::vector<double> sweep_stage_len = {0.5, 1.0, 2.0, 4.0};

    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
    void validate() const;
    std::uint64_t hash() const { return fnv1a64(to_json()); }
};

/// A generated network plus the campaign roles and intervention pricing.
/// The feasible set's budget field holds the nominal (mean) stage budget;
/// per-stage budgets are drawn separately.
struct GeneratedNetwork {
    NetworkModel model;
    FeasibleSet base;
    std::vector<int> fake_sources;

    std::string to_json() const;
    static GeneratedNetwork from_json(const std::string& text);
};

/// Directed Erdos-Renyi influence mask at the configured sparsity with
/// kept weights from U[0, 0.5], rescaled so rho(A/omega) hits a target drawn
/// from the rho law; followers along influence edges (b_ij = 1 iff a_ji > 0)
/// plus self-loops; disjoint fake-source and mitigator sets; exogenous rates
/// from the mu law on the respective campaign's sources, zero elsewhere.
GeneratedNetwork generate_network(const ExperimentConfig& config, std::uint64_t seed);

/// Per-stage budgets C_k = n * draw(budget law), one draw per stage shared
/// by every evaluation run of a replicate.
std::vector<double> draw_stage_budgets(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace hawkmit::harness
