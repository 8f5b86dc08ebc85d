#include "hawkmit/experiments.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <string>

namespace {

hawkmit::harness::ExperimentConfig load_config(const std::string& path) {
    if (path.empty()) return hawkmit::harness::ExperimentConfig{};
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return hawkmit::harness::ExperimentConfig::from_json(text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Competing-campaign Hawkes simulator and budgeted mitigation policies"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::string methods;
    std::string objective;
    std::string sweep;
    std::string network_path;

    app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--methods", methods, "comma-separated method list (ltd,cec,opl,cls,exp,rnd)");
    app.add_option("--objective", objective, "reward objective: corr|diff");
    app.add_option("--sweep", sweep, "benchmark sweep axis: n|campaign|sparsity|stage_len");
    app.add_option("--network", network_path, "pre-generated network.json (train)");

    auto* gen = app.add_subcommand("gen-network", "generate a synthetic network");
    auto* validate = app.add_subcommand("validate-moments",
                                        "empirical vs. theoretical second-order statistics");
    auto* train = app.add_subcommand("train", "fit the LSTD mitigation policy");
    auto* bench = app.add_subcommand("benchmark", "compare mitigation methods");
    auto* conv = app.add_subcommand("convergence", "value-approximation accuracy vs. sample count");
    auto* rank = app.add_subcommand("predict-rank", "trajectory rank-correlation protocol");
    auto* sim = app.add_subcommand("simulate", "roll one mitigation episode");

    CLI11_PARSE(app, argc, argv);

    try {
        hawkmit::harness::ExperimentConfig config = load_config(config_path);
        if (!objective.empty()) config.reward = hawkmit::mdp::reward_kind_from_string(objective);
        if (!methods.empty()) {
            config.methods.clear();
            std::string token;
            for (char c : methods + ",") {
                if (c == ',') {
                    if (!token.empty()) config.methods.push_back(token);
                    token.clear();
                } else {
                    token += c;
                }
            }
        }
        config.validate();

        using namespace hawkmit::harness;
        if (gen->parsed()) return cmd_gen_network(config, seed, out_dir);
        if (validate->parsed()) return cmd_validate_moments(config, seed, out_dir);
        if (train->parsed()) return cmd_train(config, seed, out_dir, network_path);
        if (bench->parsed()) return cmd_benchmark(config, seed, out_dir, sweep);
        if (conv->parsed()) return cmd_convergence(config, seed, out_dir);
        if (rank->parsed()) return cmd_predict_rank(config, seed, out_dir);
        if (sim->parsed()) {
            return cmd_simulate(config, seed, out_dir,
                                config.methods.empty() ? "rnd" : config.methods.front());
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    }
    return 0;
}
