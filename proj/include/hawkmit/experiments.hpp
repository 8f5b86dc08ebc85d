#pragma once

#include "hawkmit/harness.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hawkmit::harness {

/// Runs fn(0..count-1) on a small worker pool. Tasks must only touch their
/// own output slots; results are independent of scheduling.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

std::string format_double(double v);

// ---- computation cores (also driven directly by the acceptance suite) ----

struct MomentValidation {
    struct Row {
        int pair_i = 0;
        int pair_j = 0;
        double t_bin = 0.0;
        double theory = 0.0;
        double emp_mean = 0.0;
        double emp_sd = 0.0;
        bool within_band = false;
    };
    std::vector<Row> rows;
    double pass_fraction = 0.0;
};

/// Binned empirical vs. theoretical E[dN_i(t) dN_j(0)] on a small random
/// stable model, fixed base window, t scanned over (0, t_max].
MomentValidation validate_moments(const ExperimentConfig& config, std::uint64_t seed);

struct BenchmarkResults {
    struct Run {
        double sweep_value = 0.0;
        int replicate = 0;
        int run = 0;
        std::string method;
        double total = 0.0;
        bool ok = true;
        std::uint64_t seed = 0;
    };
    std::vector<Run> runs;
};

/// Trains the LSTD policy per replicate network and evaluates every
/// requested method on shared environment seed streams.
/// sweep_axis: "" | "n" | "campaign" | "sparsity" | "stage_len".
BenchmarkResults run_benchmark(const ExperimentConfig& config, std::uint64_t seed,
                               const std::string& sweep_axis);

struct ConvergenceResults {
    struct Row {
        int replicate = 0;
        int samples = 0;
        double estimate = 0.0;
        double emp_mean = 0.0;
        double emp_sd = 0.0;
    };
    std::vector<Row> rows;
};

/// Value estimate at the zero state vs. empirical rollouts, per LSTD sample
/// count.
ConvergenceResults run_convergence(const ExperimentConfig& config, std::uint64_t seed);

struct RankResults {
    struct Row {
        int replicate = 0;
        std::string method;
        double rank_correlation = 0.0;
    };
    std::vector<Row> rows;
};

/// Simulated prediction-evaluation protocol: random-policy trajectories
/// ranked by realized objective vs. by closeness of each method's
/// prescription to the MLE-inferred exogenous intensity.
RankResults run_predict_rank(const ExperimentConfig& config, std::uint64_t seed);

// ---- CLI commands: compute + deterministic file emission, return exit code ----

int cmd_gen_network(const ExperimentConfig& config, std::uint64_t seed, const std::string& out_dir);
int cmd_simulate(const ExperimentConfig& config, std::uint64_t seed, const std::string& out_dir,
                 const std::string& method);
int cmd_train(const ExperimentConfig& config, std::uint64_t seed, const std::string& out_dir,
              const std::string& network_path = "");
int cmd_validate_moments(const ExperimentConfig& config, std::uint64_t seed,
                         const std::string& out_dir);
int cmd_benchmark(const ExperimentConfig& config, std::uint64_t seed, const std::string& out_dir,
                  const std::string& sweep_axis);
int cmd_convergence(const ExperimentConfig& config, std::uint64_t seed, const std::string& out_dir);
int cmd_predict_rank(const ExperimentConfig& config, std::uint64_t seed,
                     const std::string& out_dir);

}  // namespace hawkmit::harness
