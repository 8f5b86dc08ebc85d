#include "hawkmit/experiments.hpp"

#include "hawkmit/baselines.hpp"
#include "hawkmit/lstd.hpp"
#include "hawkmit/stats.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>
#include <utility>

namespace hawkmit::harness {

namespace fs = std::filesystem;

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, count));
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::string format_double(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.12g", v);
    return buffer;
}

namespace {

using Row = std::vector<std::string>;

void write_csv(const fs::path& path, const Row& header, const std::vector<Row>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
    }
    for (const Row& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << row[i] << (i + 1 < row.size() ? "," : "\n");
        }
    }
}

void write_run_meta(const fs::path& dir, const std::string& command,
                    const ExperimentConfig& config, std::uint64_t seed) {
    write_csv(dir / "run_meta.csv", {"command", "version", "config_hash", "seed"},
              {{command, kVersion, std::to_string(config.hash()), std::to_string(seed)}});
}

fs::path prepare_out_dir(const std::string& out_dir) {
    fs::path dir(out_dir.empty() ? "." : out_dir);
    fs::create_directories(dir);
    return dir;
}

FeasibleSet with_budget(FeasibleSet base, double budget) {
    base.budget = budget;
    return base;
}

std::vector<FeasibleSet> stage_feasibles(const FeasibleSet& base,
                                         const std::vector<double>& budgets) {
    std::vector<FeasibleSet> out;
    out.reserve(budgets.size());
    for (double b : budgets) out.push_back(with_budget(base, b));
    return out;
}

}  // namespace

// --------------------------------------------------------------------------
// validate-moments
// --------------------------------------------------------------------------

namespace {

NetworkModel make_validation_model(const ExperimentConfig& config, std::mt19937_64& rng) {
    const int n = config.vm_nodes;
    const auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j && unit() < config.vm_sparsity) a(i, j) = 0.5 * unit();
        }
    }
    const double target = config.vm_rho_law.draw(rng);
    const double rho0 = spectral_radius(a, config.omega);
    if (rho0 > 0.0) a *= target / rho0;
    Matrix follow = Matrix::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (a(j, i) > 0.0) follow(i, j) = 1.0;
        }
    }
    Vector mu(n);
    for (int i = 0; i < n; ++i) mu[i] = config.vm_mu_law.draw(rng);
    return NetworkModel(std::move(a), config.omega, std::move(mu), Vector::Zero(n),
                        std::move(follow));
}

}  // namespace

MomentValidation validate_moments(const ExperimentConfig& config, std::uint64_t seed) {
    std::mt19937_64 rng(derive_seed(seed, 11));
    const NetworkModel model = make_validation_model(config, rng);
    const int n = model.n();
    const int bins = config.vm_bins;
    const double width = config.vm_t_max / bins;

    std::vector<std::pair<int, int>> pairs;
    {
        std::set<std::pair<int, int>> seen;
        while (static_cast<int>(pairs.size()) < config.vm_pairs) {
            const int i = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
            const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
            if (seen.insert({i, j}).second) pairs.emplace_back(i, j);
        }
    }

    // Theory on a sub-bin grid: eta and the response function share the grid.
    const int sub = 16;
    const double h = width / sub;
    const moments::MomentContext ctx(model.excitation(), model.omega(), width);
    const int points = bins * sub;
    std::vector<Matrix> response(static_cast<std::size_t>(points) + 1);
    std::vector<Vector> eta(static_cast<std::size_t>(points) + 1);
    {
        const Matrix step = ctx.exp_generator(h);
        Matrix e = Matrix::Identity(n, n);
        for (int k = 0; k <= points; ++k) {
            if (k > 0) e = e * step;
            response[static_cast<std::size_t>(k)] = ctx.acting() * e;
            eta[static_cast<std::size_t>(k)] =
                (e + model.omega() * (ctx.generator_inverse() * (e - Matrix::Identity(n, n)))) *
                model.mu_f();
        }
    }
    const Matrix first_bin = moments::stage_second_moment(ctx, model.mu_f(), Vector::Zero(n));

    const auto rectangle_theory = [&](int b, int i, int j) {
        // t in [(b-1)W, bW], t' in [0, W], t > t' throughout for b >= 2.
        double total = 0.0;
        for (int s = 0; s <= sub; ++s) {
            const double ws = (s == 0 || s == sub) ? 0.5 : 1.0;
            const int ti = (b - 1) * sub + s;
            for (int r = 0; r <= sub; ++r) {
                const double wr = (r == 0 || r == sub) ? 0.5 : 1.0;
                const std::size_t lag = static_cast<std::size_t>(ti - r);
                const double density =
                    response[lag](i, j) * eta[static_cast<std::size_t>(r)][j] +
                    eta[static_cast<std::size_t>(ti)][i] * eta[static_cast<std::size_t>(r)][j];
                total += ws * wr * density;
            }
        }
        return total * h * h;
    };

    // Empirical products per simulation.
    const int sims = config.vm_sims;
    std::vector<std::vector<std::vector<double>>> products(
        pairs.size(), std::vector<std::vector<double>>(static_cast<std::size_t>(bins)));
    const Vector zero = Vector::Zero(n);
    for (int sim = 0; sim < sims; ++sim) {
        const StageSample sample = simulate_stage(model, EventTag::F, zero, zero, 0.0,
                                                  config.vm_t_max, derive_seed(seed, 100000 + sim));
        Matrix counts = Matrix::Zero(n, bins);
        for (const Event& e : sample.log.events) {
            int b = static_cast<int>(e.t / width);
            b = std::min(b, bins - 1);
            counts(e.node, b) += 1.0;
        }
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const auto [i, j] = pairs[p];
            const double base = counts(j, 0);
            for (int b = 0; b < bins; ++b) {
                products[p][static_cast<std::size_t>(b)].push_back(base * counts(i, b));
            }
        }
    }

    MomentValidation out;
    int pass = 0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [i, j] = pairs[p];
        for (int b = 1; b <= bins; ++b) {
            MomentValidation::Row row;
            row.pair_i = i;
            row.pair_j = j;
            row.t_bin = (b - 0.5) * width;
            row.theory = (b == 1) ? first_bin(i, j) : rectangle_theory(b, i, j);
            const auto& samples = products[p][static_cast<std::size_t>(b - 1)];
            row.emp_mean = stats::mean(samples);
            row.emp_sd = samples.size() > 1 ? stats::sample_sd(samples) : 0.0;
            const double se = row.emp_sd / std::sqrt(static_cast<double>(samples.size()));
            row.within_band = se > 0.0 ? std::abs(row.theory - row.emp_mean) <= 3.0 * se
                                       : std::abs(row.theory - row.emp_mean) <= 1e-9;
            pass += row.within_band ? 1 : 0;
            out.rows.push_back(row);
        }
    }
    out.pass_fraction = static_cast<double>(pass) / static_cast<double>(out.rows.size());
    return out;
}

// --------------------------------------------------------------------------
// benchmark
// --------------------------------------------------------------------------

namespace {

struct ReplicateContext {
    const ExperimentConfig& config;
    const GeneratedNetwork& net;
    const std::vector<double>& budgets;
    const mdp::ExpectedRewardModel& erm;
    const baselines::CentralityCache* cache = nullptr;
    const lstd::Policy* policy = nullptr;
    const std::vector<Vector>* opl_controls = nullptr;
    const baselines::PlanWorkspace* cec_workspace = nullptr;
};

lstd::Controller make_method_controller(const std::string& method, const ReplicateContext& ctx) {
    const int n = ctx.net.model.n();
    if (method == "rnd") {
        return [](const mdp::StageState&, const FeasibleSet& stage, std::uint64_t seed) {
            return baselines::rnd_policy(stage, seed);
        };
    }
    if (method == "zero") {
        return [n](const mdp::StageState&, const FeasibleSet&, std::uint64_t) {
            return Vector(Vector::Zero(n));
        };
    }
    if (method == "cls") {
        const baselines::CentralityCache* cache = ctx.cache;
        return [cache](const mdp::StageState&, const FeasibleSet& stage, std::uint64_t) {
            return baselines::cls_policy(*cache, stage);
        };
    }
    if (method == "exp") {
        const baselines::CentralityCache* cache = ctx.cache;
        const Matrix& follow = ctx.net.model.follow();
        return [cache, &follow](const mdp::StageState& state, const FeasibleSet& stage,
                                std::uint64_t) {
            return baselines::exp_policy(*cache, state, stage, follow);
        };
    }
    if (method == "ltd") {
        return lstd::make_policy_controller(*ctx.policy, ctx.erm);
    }
    if (method == "opl") {
        const std::vector<Vector>* controls = ctx.opl_controls;
        return [controls, n](const mdp::StageState& state, const FeasibleSet&, std::uint64_t) {
            if (state.k < static_cast<int>(controls->size())) {
                return (*controls)[static_cast<std::size_t>(state.k)];
            }
            return Vector(Vector::Zero(n));
        };
    }
    if (method == "cec") {
        const mdp::ExpectedRewardModel& erm = ctx.erm;
        const mdp::RewardKind kind = ctx.config.reward;
        const double gamma = ctx.config.gamma;
        const FeasibleSet base = ctx.net.base;
        const std::vector<double> budgets = ctx.budgets;
        const int horizon = ctx.config.cec_horizon;
        const baselines::PlanWorkspace* ws = ctx.cec_workspace;
        return [&erm, kind, gamma, base, budgets, horizon, ws](const mdp::StageState& state,
                                                               const FeasibleSet& stage,
                                                               std::uint64_t) {
            std::vector<FeasibleSet> window;
            window.reserve(static_cast<std::size_t>(horizon));
            window.push_back(stage);
            for (int h = 1; h < horizon; ++h) {
                const std::size_t k = static_cast<std::size_t>(state.k + h);
                window.push_back(
                    with_budget(base, k < budgets.size() ? budgets[k] : base.budget));
            }
            return baselines::cec_policy(erm, kind, gamma, state, window, {}, ws);
        };
    }
    throw std::invalid_argument("unknown method: " + method);
}

ExperimentConfig apply_sweep(const ExperimentConfig& base, const std::string& axis, double value) {
    ExperimentConfig cfg = base;
    if (axis == "n") {
        cfg.n = static_cast<int>(value);
    } else if (axis == "campaign") {
        cfg.mitigators = static_cast<int>(value);
    } else if (axis == "sparsity") {
        cfg.sparsity = value;
    } else if (axis == "stage_len") {
        cfg.delta_t = value;
        cfg.delta_f = value;
    } else if (!axis.empty()) {
        throw std::invalid_argument("unknown sweep axis: " + axis);
    }
    cfg.validate();
    return cfg;
}

std::vector<double> sweep_values(const ExperimentConfig& config, const std::string& axis) {
    if (axis.empty()) return {0.0};
    std::vector<double> values;
    if (axis == "n") {
        for (int v : config.sweep_n) values.push_back(v);
    } else if (axis == "campaign") {
        for (int v : config.sweep_campaign) values.push_back(v);
    } else if (axis == "sparsity") {
        values = config.sweep_sparsity;
    } else if (axis == "stage_len") {
        values = config.sweep_stage_len;
    } else {
        throw std::invalid_argument("unknown sweep axis: " + axis);
    }
    return values;
}

std::vector<BenchmarkResults::Run> run_benchmark_replicate(const ExperimentConfig& cfg,
                                                           double sweep_value, int replicate,
                                                           std::uint64_t rep_seed) {
    const GeneratedNetwork net = generate_network(cfg, derive_seed(rep_seed, 1));
    const std::vector<double> budgets = draw_stage_budgets(cfg, derive_seed(rep_seed, 2));
    const mdp::ExpectedRewardModel erm(net.model, cfg.delta_t, cfg.moment_grid);

    bool needs_cache = false;
    bool needs_ltd = false;
    bool needs_opl = false;
    bool needs_cec = false;
    for (const std::string& m : cfg.methods) {
        needs_cache = needs_cache || m == "cls" || m == "exp";
        needs_ltd = needs_ltd || m == "ltd";
        needs_opl = needs_opl || m == "opl";
        needs_cec = needs_cec || m == "cec";
    }

    std::optional<baselines::CentralityCache> cache;
    if (needs_cache) cache.emplace(net.model.follow());

    std::optional<lstd::Policy> policy;
    if (needs_ltd) {
        lstd::TrainConfig train;
        train.samples = cfg.lstd_samples;
        train.horizon = cfg.stages;
        train.gamma = cfg.gamma;
        train.kind = cfg.reward;
        train.feasible = net.base;
        train.stage_budgets = budgets;
        train.intervals = cfg.intervals;
        train.delta = cfg.delta_t;
        train.seed = derive_seed(rep_seed, 3);
        policy = lstd::policy_iteration(net.model, erm, train).policy;
    }

    std::optional<baselines::PlanWorkspace> plan_ws;
    std::vector<Vector> opl_controls;
    if (needs_opl || needs_cec) {
        plan_ws = baselines::build_plan_workspace(
            erm, std::max(cfg.stages, cfg.cec_horizon));
    }
    if (needs_opl) {
        const int n = net.model.n();
        opl_controls = baselines::opl_policy(erm, cfg.reward, cfg.gamma, Vector::Zero(n),
                                             Vector::Zero(n), stage_feasibles(net.base, budgets),
                                             {}, &*plan_ws)
                           .controls;
    }

    ReplicateContext ctx{cfg,    net,
                         budgets, erm,
                         cache ? &*cache : nullptr,
                         policy ? &*policy : nullptr,
                         needs_opl ? &opl_controls : nullptr,
                         plan_ws ? &*plan_ws : nullptr};

    std::vector<std::pair<std::string, lstd::Controller>> controllers;
    for (const std::string& m : cfg.methods) {
        controllers.emplace_back(m, make_method_controller(m, ctx));
    }

    std::vector<BenchmarkResults::Run> rows;
    for (int r = 0; r < cfg.eval_runs; ++r) {
        const std::uint64_t run_seed = derive_seed(rep_seed, 1000 + static_cast<std::uint64_t>(r));
        for (const auto& [name, controller] : controllers) {
            BenchmarkResults::Run row;
            row.sweep_value = sweep_value;
            row.replicate = replicate;
            row.run = r;
            row.method = name;
            row.seed = run_seed;
            try {
                row.total = lstd::run_mitigation(net.model, controller, cfg.reward, cfg.gamma,
                                                 cfg.stages, cfg.delta_t, cfg.intervals, net.base,
                                                 budgets, run_seed)
                                .total_reward;
            } catch (const std::exception&) {
                row.ok = false;
                row.total = std::numeric_limits<double>::quiet_NaN();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace

BenchmarkResults run_benchmark(const ExperimentConfig& config, std::uint64_t seed,
                               const std::string& sweep_axis) {
    const std::vector<double> values = sweep_values(config, sweep_axis);
    struct Task {
        ExperimentConfig cfg;
        double value;
        int replicate;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (std::size_t v = 0; v < values.size(); ++v) {
        const ExperimentConfig cfg = apply_sweep(config, sweep_axis, values[v]);
        for (int rep = 0; rep < config.replicates; ++rep) {
            tasks.push_back(Task{cfg, values[v], rep,
                                 derive_seed(seed, 7919 * (v + 1) + static_cast<std::uint64_t>(rep))});
        }
    }
    std::vector<std::vector<BenchmarkResults::Run>> slots(tasks.size());
    parallel_for(static_cast<int>(tasks.size()), config.threads, [&](int i) {
        const Task& t = tasks[static_cast<std::size_t>(i)];
        slots[static_cast<std::size_t>(i)] =
            run_benchmark_replicate(t.cfg, t.value, t.replicate, t.seed);
    });
    BenchmarkResults out;
    for (const auto& slot : slots) {
        out.runs.insert(out.runs.end(), slot.begin(), slot.end());
    }
    return out;
}

// --------------------------------------------------------------------------
// convergence
// --------------------------------------------------------------------------

ConvergenceResults run_convergence(const ExperimentConfig& config, std::uint64_t seed) {
    std::vector<std::vector<ConvergenceResults::Row>> slots(
        static_cast<std::size_t>(config.conv_replicates));
    parallel_for(config.conv_replicates, config.threads, [&](int rep) {
        const std::uint64_t rep_seed = derive_seed(seed, 131 + static_cast<std::uint64_t>(rep));
        const GeneratedNetwork net = generate_network(config, derive_seed(rep_seed, 1));
        const std::vector<double> budgets = draw_stage_budgets(config, derive_seed(rep_seed, 2));
        const mdp::ExpectedRewardModel erm(net.model, config.delta_t, config.moment_grid);
        std::vector<ConvergenceResults::Row> rows;
        for (std::size_t si = 0; si < config.conv_sample_counts.size(); ++si) {
            const int samples = config.conv_sample_counts[si];
            lstd::TrainConfig train;
            train.samples = samples;
            train.horizon = config.stages;
            train.gamma = config.gamma;
            train.kind = config.reward;
            train.feasible = net.base;
            train.stage_budgets = budgets;
            train.intervals = config.intervals;
            train.delta = config.delta_t;
            train.seed = derive_seed(rep_seed, 10 + si);
            const lstd::Policy policy = lstd::policy_iteration(net.model, erm, train).policy;
            const lstd::Controller controller = lstd::make_policy_controller(policy, erm);

            std::vector<double> totals;
            totals.reserve(static_cast<std::size_t>(config.conv_rollouts));
            for (int r = 0; r < config.conv_rollouts; ++r) {
                totals.push_back(lstd::run_mitigation(net.model, controller, config.reward,
                                                      config.gamma, config.stages, config.delta_t,
                                                      config.intervals, net.base, budgets,
                                                      derive_seed(rep_seed, 100000 + 1000 * si +
                                                                                static_cast<std::uint64_t>(r)))
                                     .total_reward);
            }
            ConvergenceResults::Row row;
            row.replicate = rep;
            row.samples = samples;
            row.estimate = policy.w[policy.w.size() - 1];
            row.emp_mean = stats::mean(totals);
            row.emp_sd = stats::sample_sd(totals);
            rows.push_back(row);
        }
        slots[static_cast<std::size_t>(rep)] = std::move(rows);
    });
    ConvergenceResults out;
    for (const auto& slot : slots) out.rows.insert(out.rows.end(), slot.begin(), slot.end());
    return out;
}

// --------------------------------------------------------------------------
// predict-rank
// --------------------------------------------------------------------------

namespace {

/// One-dimensional MLE of a constant exogenous rate over a stage given the
/// endogenous intensity at each event of the node: the score
/// sum_l 1/(b + e_l) - Delta is decreasing in b, so bisection applies.
double fit_stage_exogenous(const std::vector<double>& endo_at_events, double delta) {
    if (endo_at_events.empty()) return 0.0;
    const auto score = [&](double b) {
        double s = 0.0;
        for (double e : endo_at_events) s += 1.0 / (b + e);
        return s - delta;
    };
    if (score(0.0) <= 0.0) return 0.0;
    double lo = 0.0;
    double hi = static_cast<double>(endo_at_events.size()) / delta;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (score(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

RankResults run_predict_rank(const ExperimentConfig& config, std::uint64_t seed) {
    std::vector<std::vector<RankResults::Row>> slots(
        static_cast<std::size_t>(config.rank_replicates));
    parallel_for(config.rank_replicates, config.threads, [&](int rep) {
        const std::uint64_t rep_seed = derive_seed(seed, 977 + static_cast<std::uint64_t>(rep));
        const GeneratedNetwork net = generate_network(config, derive_seed(rep_seed, 1));
        const std::vector<double> budgets = draw_stage_budgets(config, derive_seed(rep_seed, 2));
        const mdp::ExpectedRewardModel erm(net.model, config.delta_t, config.moment_grid);
        const baselines::CentralityCache cache(net.model.follow());
        const int n = net.model.n();

        lstd::TrainConfig train;
        train.samples = config.lstd_samples;
        train.horizon = config.stages;
        train.gamma = config.gamma;
        train.kind = config.reward;
        train.feasible = net.base;
        train.stage_budgets = budgets;
        train.intervals = config.intervals;
        train.delta = config.delta_t;
        train.seed = derive_seed(rep_seed, 3);
        const lstd::Policy policy = lstd::policy_iteration(net.model, erm, train).policy;

        const baselines::PlanWorkspace plan_ws = baselines::build_plan_workspace(
            erm, std::max(config.stages, config.cec_horizon));
        const std::vector<Vector> opl_controls =
            baselines::opl_policy(erm, config.reward, config.gamma, Vector::Zero(n),
                                  Vector::Zero(n), stage_feasibles(net.base, budgets), {},
                                  &plan_ws)
                .controls;

        // Roll the random-policy trajectories, keeping states and logs.
        struct Trajectory {
            double objective = 0.0;
            std::vector<mdp::StageState> states;
            std::vector<Vector> inferred_u;
        };
        std::vector<Trajectory> trajectories;
        for (int t = 0; t < config.rank_trajectories; ++t) {
            const std::uint64_t traj_seed = derive_seed(rep_seed, 5000 + static_cast<std::uint64_t>(t));
            Trajectory traj;
            mdp::StageState state = mdp::zero_state(n, config.intervals);
            double discount = 1.0;
            for (int k = 0; k < config.stages; ++k) {
                traj.states.push_back(state);
                const FeasibleSet stage = with_budget(net.base, budgets[static_cast<std::size_t>(k)]);
                const Vector u = baselines::rnd_policy(
                    stage, derive_seed(traj_seed, 2 * static_cast<std::uint64_t>(k) + 1));
                mdp::StepResult step = mdp::step(net.model, state, u, config.delta_t,
                                                 derive_seed(traj_seed, 2 * static_cast<std::uint64_t>(k)));
                traj.objective +=
                    discount * (config.reward == mdp::RewardKind::Correlation ? step.reward_corr
                                                                              : step.reward_diff);
                discount *= config.gamma;

                // Infer the implied intervention from the stage's mitigation log.
                Vector inferred = Vector::Zero(n);
                for (int node : net.base.mitigators) {
                    std::vector<double> endo;
                    for (const Event& e : step.log_m.events) {
                        if (e.node != node) continue;
                        const Vector lambda = conditional_intensity(
                            net.model, step.log_m, EventTag::M, state.y_m, Vector::Zero(n), e.t);
                        endo.push_back(std::max(0.0, lambda[node] - net.model.mu_m()[node]));
                    }
                    const double rate = fit_stage_exogenous(endo, config.delta_t);
                    inferred[node] = std::max(0.0, rate - net.model.mu_m()[node]);
                }
                traj.inferred_u.push_back(std::move(inferred));
                state = std::move(step.next);
            }
            trajectories.push_back(std::move(traj));
        }

        std::vector<double> objectives;
        for (const Trajectory& t : trajectories) objectives.push_back(t.objective);

        std::vector<RankResults::Row> rows;
        for (const std::string& method : config.methods) {
            std::vector<double> neg_mse;
            for (std::size_t t = 0; t < trajectories.size(); ++t) {
                const Trajectory& traj = trajectories[t];
                double sse = 0.0;
                int terms = 0;
                for (int k = 0; k < config.stages; ++k) {
                    const FeasibleSet stage =
                        with_budget(net.base, budgets[static_cast<std::size_t>(k)]);
                    const mdp::StageState& state = traj.states[static_cast<std::size_t>(k)];
                    Vector prescribed;
                    if (method == "ltd") {
                        prescribed = lstd::policy_improvement(policy, erm, state, stage.budget);
                    } else if (method == "cec") {
                        std::vector<FeasibleSet> window;
                        window.push_back(stage);
                        for (int hh = 1; hh < config.cec_horizon; ++hh) {
                            const std::size_t idx = static_cast<std::size_t>(k + hh);
                            window.push_back(with_budget(
                                net.base, idx < budgets.size() ? budgets[idx] : net.base.budget));
                        }
                        prescribed = baselines::cec_policy(erm, config.reward, config.gamma, state,
                                                           window, {}, &plan_ws);
                    } else if (method == "opl") {
                        prescribed = opl_controls[static_cast<std::size_t>(k)];
                    } else if (method == "cls") {
                        prescribed = baselines::cls_policy(cache, stage);
                    } else if (method == "exp") {
                        prescribed = baselines::exp_policy(cache, state, stage, net.model.follow());
                    } else if (method == "rnd") {
                        prescribed = baselines::rnd_policy(
                            stage, derive_seed(rep_seed, 900000 + 100 * t + static_cast<std::uint64_t>(k)));
                    } else {
                        throw std::invalid_argument("unknown method: " + method);
                    }
                    const Vector& inferred = traj.inferred_u[static_cast<std::size_t>(k)];
                    for (int node : net.base.mitigators) {
                        const double d = prescribed[node] - inferred[node];
                        sse += d * d;
                        ++terms;
                    }
                }
                neg_mse.push_back(-sse / std::max(1, terms));
            }
            RankResults::Row row;
            row.replicate = rep;
            row.method = method;
            row.rank_correlation = stats::spearman(objectives, neg_mse);
            rows.push_back(std::move(row));
        }
        slots[static_cast<std::size_t>(rep)] = std::move(rows);
    });
    RankResults out;
    for (const auto& slot : slots) out.rows.insert(out.rows.end(), slot.begin(), slot.end());
    return out;
}

// --------------------------------------------------------------------------
// CLI commands
// --------------------------------------------------------------------------

int cmd_gen_network(const ExperimentConfig& config, std::uint64_t seed,
                    const std::string& out_dir) {
    const fs::path dir = prepare_out_dir(out_dir);
    const GeneratedNetwork net = generate_network(config, derive_seed(seed, 1));
    std::ofstream out(dir / "network.json");
    out << net.to_json() << '\n';
    write_run_meta(dir, "gen-network", config, seed);
    return 0;
}

int cmd_simulate(const ExperimentConfig& config, std::uint64_t seed, const std::string& out_dir,
                 const std::string& method) {
    const fs::path dir = prepare_out_dir(out_dir);
    ExperimentConfig cfg = config;
    cfg.methods = {method.empty() ? std::string("rnd") : method};
    const std::uint64_t rep_seed = derive_seed(seed, 7919);
    const std::vector<BenchmarkResults::Run> probe =
        run_benchmark_replicate(cfg, 0.0, 0, rep_seed);  // validates the method name
    (void)probe;

    // Re-run one rollout with retained logs for the serialized trajectory.
    const GeneratedNetwork net = generate_network(cfg, derive_seed(rep_seed, 1));
    const std::vector<double> budgets = draw_stage_budgets(cfg, derive_seed(rep_seed, 2));
    const mdp::ExpectedRewardModel erm(net.model, cfg.delta_t, cfg.moment_grid);
    std::optional<baselines::CentralityCache> cache;
    std::optional<lstd::Policy> policy;
    std::optional<baselines::PlanWorkspace> plan_ws;
    std::vector<Vector> opl_controls;
    const std::string name = cfg.methods.front();
    if (name == "cls" || name == "exp") cache.emplace(net.model.follow());
    if (name == "ltd") {
        lstd::TrainConfig train;
        train.samples = cfg.lstd_samples;
        train.horizon = cfg.stages;
        train.gamma = cfg.gamma;
        train.kind = cfg.reward;
        train.feasible = net.base;
        train.stage_budgets = budgets;
        train.intervals = cfg.intervals;
        train.delta = cfg.delta_t;
        train.seed = derive_seed(rep_seed, 3);
        policy = lstd::policy_iteration(net.model, erm, train).policy;
    }
    if (name == "opl" || name == "cec") {
        plan_ws = baselines::build_plan_workspace(erm, std::max(cfg.stages, cfg.cec_horizon));
    }
    if (name == "opl") {
        opl_controls = baselines::opl_policy(erm, cfg.reward, cfg.gamma,
                                             Vector::Zero(net.model.n()), Vector::Zero(net.model.n()),
                                             stage_feasibles(net.base, budgets), {}, &*plan_ws)
                           .controls;
    }
    ReplicateContext ctx{cfg,    net,
                         budgets, erm,
                         cache ? &*cache : nullptr,
                         policy ? &*policy : nullptr,
                         name == "opl" ? &opl_controls : nullptr,
                         plan_ws ? &*plan_ws : nullptr};
    const lstd::Controller controller = make_method_controller(name, ctx);
    const lstd::RolloutResult rollout =
        lstd::run_mitigation(net.model, controller, cfg.reward, cfg.gamma, cfg.stages, cfg.delta_t,
                             cfg.intervals, net.base, budgets, derive_seed(rep_seed, 1000));

    {
        std::ofstream out(dir / "trajectory.jsonl");
        mdp::write_trajectory_jsonl(rollout.stages, out);
    }
    for (const auto& [file, logs] :
         {std::pair{"events_m.jsonl", &rollout.logs_m}, std::pair{"events_f.jsonl", &rollout.logs_f}}) {
        EventLog merged;
        merged.t_start = 0.0;
        merged.t_end = cfg.stages * cfg.delta_t;
        for (const EventLog& log : *logs) {
            for (const Event& e : log.events) merged.events.push_back(e);
        }
        std::ofstream out(dir / file);
        write_jsonl(merged, out);
    }
    std::vector<Row> rows;
    for (const mdp::StageRecord& r : rollout.stages) {
        rows.push_back({std::to_string(r.k), format_double(r.r_corr), format_double(r.r_diff)});
    }
    write_csv(dir / "stages.csv", {"stage", "R_corr", "R_diff"}, rows);
    write_run_meta(dir, "simulate", config, seed);
    return 0;
}

int cmd_train(const ExperimentConfig& config, std::uint64_t seed, const std::string& out_dir,
              const std::string& network_path) {
    const fs::path dir = prepare_out_dir(out_dir);
    const std::uint64_t rep_seed = derive_seed(seed, 7919);
    GeneratedNetwork net = [&] {
        if (!network_path.empty()) {
            std::ifstream in(network_path);
            if (!in) throw std::runtime_error("cannot read " + network_path);
            std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            return GeneratedNetwork::from_json(text);
        }
        return generate_network(config, derive_seed(rep_seed, 1));
    }();
    const std::vector<double> budgets = draw_stage_budgets(config, derive_seed(rep_seed, 2));
    const mdp::ExpectedRewardModel erm(net.model, config.delta_t, config.moment_grid);
    lstd::TrainConfig train;
    train.samples = config.lstd_samples;
    train.horizon = config.stages;
    train.gamma = config.gamma;
    train.kind = config.reward;
    train.feasible = net.base;
    train.stage_budgets = budgets;
    train.intervals = config.intervals;
    train.delta = config.delta_t;
    train.seed = derive_seed(rep_seed, 3);
    const lstd::TrainResult result = lstd::policy_iteration(net.model, erm, train);

    {
        std::ofstream out(dir / "network.json");
        out << net.to_json() << '\n';
    }
    {
        std::ofstream out(dir / "policy.json");
        out << result.policy.to_json() << '\n';
    }
    std::vector<Row> rows;
    for (std::size_t i = 0; i < result.weight_deltas.size(); ++i) {
        rows.push_back({std::to_string(i), format_double(result.weight_deltas[i]),
                        result.converged ? "1" : "0"});
    }
    write_csv(dir / "training.csv", {"iteration", "delta_w", "converged"}, rows);
    write_run_meta(dir, "train", config, seed);
    return result.converged ? 0 : 3;
}

int cmd_validate_moments(const ExperimentConfig& config, std::uint64_t seed,
                         const std::string& out_dir) {
    const fs::path dir = prepare_out_dir(out_dir);
    const MomentValidation result = validate_moments(config, seed);
    std::vector<Row> rows;
    for (const MomentValidation::Row& r : result.rows) {
        rows.push_back({std::to_string(r.pair_i) + "-" + std::to_string(r.pair_j),
                        format_double(r.t_bin), format_double(r.theory), format_double(r.emp_mean),
                        format_double(r.emp_sd)});
    }
    write_csv(dir / "moments.csv", {"pair", "t_bin", "theory", "emp_mean", "emp_sd"}, rows);
    write_run_meta(dir, "validate-moments", config, seed);
    std::cout << "band pass fraction: " << format_double(result.pass_fraction) << '\n';
    return result.pass_fraction >= 0.95 ? 0 : 1;
}

int cmd_benchmark(const ExperimentConfig& config, std::uint64_t seed, const std::string& out_dir,
                  const std::string& sweep_axis) {
    const fs::path dir = prepare_out_dir(out_dir);
    const BenchmarkResults results = run_benchmark(config, seed, sweep_axis);
    const std::string hash = std::to_string(config.hash());

    std::vector<Row> rows;
    for (const BenchmarkResults::Run& r : results.runs) {
        rows.push_back({sweep_axis.empty() ? "none" : sweep_axis, format_double(r.sweep_value),
                        std::to_string(r.replicate), std::to_string(r.run), r.method,
                        r.ok ? format_double(r.total) : "", r.ok ? "ok" : "error",
                        hash, kVersion, std::to_string(r.seed)});
    }
    write_csv(dir / "results.csv",
              {"sweep_axis", "sweep_value", "replicate", "run", "method", "total", "status",
               "config_hash", "version", "seed"},
              rows);

    // Per-(sweep value, method) means and the ratio against the random policy.
    std::map<std::pair<double, std::string>, std::vector<double>> totals;
    for (const BenchmarkResults::Run& r : results.runs) {
        if (r.ok) totals[{r.sweep_value, r.method}].push_back(r.total);
    }
    std::vector<Row> summary;
    for (const auto& [key, values] : totals) {
        const double m = stats::mean(values);
        const auto rnd_it = totals.find({key.first, "rnd"});
        std::string ratio;
        if (rnd_it != totals.end()) {
            const double rnd_mean = stats::mean(rnd_it->second);
            if (rnd_mean != 0.0) ratio = format_double(m / rnd_mean);
        }
        summary.push_back({format_double(key.first), key.second, format_double(m), ratio, hash,
                           kVersion, std::to_string(seed)});
    }
    write_csv(dir / "summary.csv",
              {"sweep_value", "method", "mean_total", "ratio_vs_rnd", "config_hash", "version",
               "seed"},
              summary);
    write_run_meta(dir, "benchmark", config, seed);
    return 0;
}

int cmd_convergence(const ExperimentConfig& config, std::uint64_t seed,
                    const std::string& out_dir) {
    const fs::path dir = prepare_out_dir(out_dir);
    const ConvergenceResults results = run_convergence(config, seed);
    const std::string hash = std::to_string(config.hash());
    std::vector<Row> rows;
    for (const ConvergenceResults::Row& r : results.rows) {
        rows.push_back({std::to_string(r.replicate), std::to_string(r.samples),
                        format_double(r.estimate), format_double(r.emp_mean),
                        format_double(r.emp_sd),
                        format_double(std::abs(r.estimate - r.emp_mean)), hash, kVersion,
                        std::to_string(seed)});
    }
    write_csv(dir / "convergence.csv",
              {"replicate", "samples", "estimate", "emp_mean", "emp_sd", "abs_error",
               "config_hash", "version", "seed"},
              rows);
    write_run_meta(dir, "convergence", config, seed);
    return 0;
}

int cmd_predict_rank(const ExperimentConfig& config, std::uint64_t seed,
                     const std::string& out_dir) {
    const fs::path dir = prepare_out_dir(out_dir);
    const RankResults results = run_predict_rank(config, seed);
    const std::string hash = std::to_string(config.hash());
    std::vector<Row> rows;
    for (const RankResults::Row& r : results.rows) {
        rows.push_back({std::to_string(r.replicate), r.method,
                        format_double(r.rank_correlation), hash, kVersion, std::to_string(seed)});
    }
    write_csv(dir / "rank_correlation.csv",
              {"replicate", "method", "rank_correlation", "config_hash", "version", "seed"}, rows);
    write_run_meta(dir, "predict-rank", config, seed);
    return 0;
}

}  // namespace hawkmit::harness
