#include "hawkmit/baselines.hpp"
#include "hawkmit/events.hpp"
#include "hawkmit/experiments.hpp"
#include "hawkmit/harness.hpp"
#include "hawkmit/hawkes.hpp"
#include "hawkmit/lstd.hpp"
#include "hawkmit/mdp.hpp"
#include "hawkmit/moments.hpp"
#include "hawkmit/network.hpp"
#include "hawkmit/optimize.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace hawkmit;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Competing-campaign Hawkes processes with budgeted mitigation policies";
    m.attr("__version__") = kVersion;

    py::enum_<EventTag>(m, "EventTag").value("F", EventTag::F).value("M", EventTag::M);

    py::class_<Event>(m, "Event")
        .def(py::init<>())
        .def_readwrite("t", &Event::t)
        .def_readwrite("node", &Event::node)
        .def_readwrite("tag", &Event::tag);

    py::class_<EventLog>(m, "EventLog")
        .def(py::init<>())
        .def_readwrite("events", &EventLog::events)
        .def_readwrite("t_start", &EventLog::t_start)
        .def_readwrite("t_end", &EventLog::t_end)
        .def("append", &EventLog::append)
        .def("__len__", &EventLog::size)
        .def("counts", py::overload_cast<int, EventTag>(&EventLog::counts, py::const_))
        .def("counts", py::overload_cast<int>(&EventLog::counts, py::const_))
        .def("to_jsonl", [](const EventLog& log) { return to_jsonl(log); })
        .def_static("from_jsonl", [](const std::string& text) { return from_jsonl(text); });

    py::class_<NetworkModel>(m, "NetworkModel")
        .def(py::init<Matrix, double, Vector, Vector, Matrix>(), py::arg("excitation"),
             py::arg("omega"), py::arg("mu_f"), py::arg("mu_m"), py::arg("follow"))
        .def_property_readonly("n", &NetworkModel::n)
        .def_property_readonly("excitation", &NetworkModel::excitation)
        .def_property_readonly("omega", &NetworkModel::omega)
        .def_property_readonly("mu_f", &NetworkModel::mu_f)
        .def_property_readonly("mu_m", &NetworkModel::mu_m)
        .def_property_readonly("follow", &NetworkModel::follow)
        .def_property_readonly("stability_radius", &NetworkModel::stability_radius)
        .def("hash", &NetworkModel::hash)
        .def("to_json", &NetworkModel::to_json)
        .def_static("from_json", &NetworkModel::from_json);

    m.def("spectral_radius", &spectral_radius, py::arg("excitation"), py::arg("omega"));

    py::class_<StageSample>(m, "StageSample")
        .def_readonly("log", &StageSample::log)
        .def_readonly("carry_end", &StageSample::carry_end);

    m.def("simulate_stage", &simulate_stage, py::arg("model"), py::arg("tag"), py::arg("carry"),
          py::arg("u"), py::arg("t0"), py::arg("t1"), py::arg("seed"));
    m.def("conditional_intensity", &conditional_intensity);
    m.def("propagate_carry", &propagate_carry);
    m.def("compensator", &compensator);
    m.def("log_likelihood", &log_likelihood);
    m.def(
        "fit_mle",
        [](const std::vector<EventLog>& logs, int n, double omega, int max_iterations) {
            MleOptions options;
            options.max_iterations = max_iterations;
            const MleResult r = fit_mle(logs, n, omega, options);
            return py::make_tuple(r.excitation, r.mu, r.log_likelihood, r.converged);
        },
        py::arg("logs"), py::arg("n"), py::arg("omega"), py::arg("max_iterations") = 500);

    py::class_<moments::MomentContext>(m, "MomentContext")
        .def(py::init<const Matrix&, double, double>(), py::arg("excitation"), py::arg("omega"),
             py::arg("delta"))
        .def(py::init<const NetworkModel&, double>(), py::arg("model"), py::arg("delta"))
        .def_property_readonly("upsilon", &moments::MomentContext::upsilon)
        .def_property_readonly("gamma_op", &moments::MomentContext::gamma)
        .def("mean_kernel", &moments::MomentContext::mean_kernel);
    m.def("mean_intensity", &moments::mean_intensity);
    m.def("stage_mean_intensity", &moments::stage_mean_intensity);
    m.def("stage_mean_counts", &moments::stage_mean_counts);
    m.def("response_function", &moments::response_function);
    m.def("volterra_response", &moments::volterra_response);
    m.def("second_order_density", [](const moments::MomentContext& ctx, const Vector& eta_t,
                                     const Vector& eta_tp, double t, double tp) {
        const moments::SecondOrderDensity d = moments::second_order_density(ctx, eta_t, eta_tp, t, tp);
        return py::make_tuple(d.continuous, d.atom);
    });
    m.def(
        "stage_second_moment",
        [](const moments::MomentContext& ctx, const Vector& mu_eff, const Vector& y, int grid) {
            moments::StageMomentOptions options;
            options.grid = grid;
            return moments::stage_second_moment(ctx, mu_eff, y, options);
        },
        py::arg("ctx"), py::arg("mu_eff"), py::arg("y"), py::arg("grid") = 64);

    py::class_<FeasibleSet>(m, "FeasibleSet")
        .def(py::init<>())
        .def_readwrite("prices", &FeasibleSet::prices)
        .def_readwrite("budget", &FeasibleSet::budget)
        .def_readwrite("caps", &FeasibleSet::caps)
        .def_readwrite("mitigators", &FeasibleSet::mitigators)
        .def("validate", &FeasibleSet::validate)
        .def("contains", &FeasibleSet::contains, py::arg("u"), py::arg("tol") = 1e-9);
    m.def("project_feasible", &opt::project_feasible);
    m.def("solve_linear", &opt::solve_linear);
    m.def("solve_concave_qp", [](const Vector& g, const Matrix& q, const FeasibleSet& feasible) {
        return opt::solve_concave_qp(g, q, feasible).u;
    });

    py::enum_<mdp::RewardKind>(m, "RewardKind")
        .value("Correlation", mdp::RewardKind::Correlation)
        .value("Difference", mdp::RewardKind::Difference);

    py::class_<mdp::StageState>(m, "StageState")
        .def(py::init<>())
        .def_readwrite("k", &mdp::StageState::k)
        .def_readwrite("clock", &mdp::StageState::clock)
        .def_readwrite("y_m", &mdp::StageState::y_m)
        .def_readwrite("y_f", &mdp::StageState::y_f)
        .def_readwrite("z_m", &mdp::StageState::z_m)
        .def_readwrite("z_f", &mdp::StageState::z_f)
        .def("validate", &mdp::StageState::validate);
    m.def("zero_state", &mdp::zero_state, py::arg("n"), py::arg("intervals"));
    m.def("features", &mdp::features);
    m.def("realized_reward",
          py::overload_cast<mdp::RewardKind, const Vector&, const Vector&, const Matrix&>(
              &mdp::realized_reward));

    py::class_<mdp::ExpectedRewardModel>(m, "ExpectedRewardModel")
        .def(py::init<const NetworkModel&, double, int>(), py::arg("model"), py::arg("delta"),
             py::arg("grid") = 64)
        .def("expected_counts_m", &mdp::ExpectedRewardModel::expected_counts_m)
        .def("expected_counts_f", &mdp::ExpectedRewardModel::expected_counts_f)
        .def("expected_reward", &mdp::ExpectedRewardModel::expected_reward);

    py::class_<mdp::StepResult>(m, "StepResult")
        .def_readonly("next", &mdp::StepResult::next)
        .def_readonly("reward_corr", &mdp::StepResult::reward_corr)
        .def_readonly("reward_diff", &mdp::StepResult::reward_diff)
        .def_readonly("log_m", &mdp::StepResult::log_m)
        .def_readonly("log_f", &mdp::StepResult::log_f);
    m.def("step", &mdp::step, py::arg("model"), py::arg("state"), py::arg("u"), py::arg("delta"),
          py::arg("seed"));

    py::class_<lstd::Policy>(m, "Policy")
        .def(py::init<>())
        .def_readwrite("w", &lstd::Policy::w)
        .def_readwrite("gamma", &lstd::Policy::gamma)
        .def_readwrite("kind", &lstd::Policy::kind)
        .def_readwrite("feasible", &lstd::Policy::feasible)
        .def_readwrite("intervals", &lstd::Policy::intervals)
        .def("to_json", &lstd::Policy::to_json)
        .def_static("from_json", &lstd::Policy::from_json);

    m.def("expected_next_features", &lstd::expected_next_features);
    m.def("expected_next_value", &lstd::expected_next_value);
    m.def("policy_improvement", &lstd::policy_improvement);
    m.def(
        "policy_iteration",
        [](const NetworkModel& model, const mdp::ExpectedRewardModel& erm, int samples, int horizon,
           double gamma, mdp::RewardKind kind, const FeasibleSet& feasible,
           const std::vector<double>& stage_budgets, int intervals, double delta,
           std::uint64_t seed) {
            lstd::TrainConfig config;
            config.samples = samples;
            config.horizon = horizon;
            config.gamma = gamma;
            config.kind = kind;
            config.feasible = feasible;
            config.stage_budgets = stage_budgets;
            config.intervals = intervals;
            config.delta = delta;
            config.seed = seed;
            const lstd::TrainResult r = lstd::policy_iteration(model, erm, config);
            return py::make_tuple(r.policy, r.weight_deltas, r.converged);
        },
        py::arg("model"), py::arg("erm"), py::arg("samples"), py::arg("horizon"), py::arg("gamma"),
        py::arg("kind"), py::arg("feasible"), py::arg("stage_budgets"), py::arg("intervals"),
        py::arg("delta"), py::arg("seed"));
    m.def(
        "run_mitigation",
        [](const NetworkModel& model, const lstd::Controller& controller, mdp::RewardKind kind,
           double gamma, int stages, double delta, int intervals, const FeasibleSet& base,
           const std::vector<double>& stage_budgets, std::uint64_t seed) {
            const lstd::RolloutResult r = lstd::run_mitigation(
                model, controller, kind, gamma, stages, delta, intervals, base, stage_budgets, seed);
            return py::make_tuple(r.total_reward, r.logs_m, r.logs_f);
        },
        py::arg("model"), py::arg("controller"), py::arg("kind"), py::arg("gamma"),
        py::arg("stages"), py::arg("delta"), py::arg("intervals"), py::arg("base"),
        py::arg("stage_budgets"), py::arg("seed"));

    py::class_<baselines::CentralityCache>(m, "CentralityCache")
        .def(py::init<const Matrix&>(), py::arg("follow"))
        .def("distance", &baselines::CentralityCache::distance)
        .def_property_readonly("closeness", &baselines::CentralityCache::closeness);
    m.def("rnd_policy", &baselines::rnd_policy);
    m.def("cls_policy", &baselines::cls_policy);
    m.def("exp_policy", &baselines::exp_policy);
    m.def(
        "opl_policy",
        [](const mdp::ExpectedRewardModel& erm, mdp::RewardKind kind, double gamma,
           const Vector& y_m0, const Vector& y_f0, const std::vector<FeasibleSet>& stage_feasible) {
            return baselines::opl_policy(erm, kind, gamma, y_m0, y_f0, stage_feasible).controls;
        });
    m.def("cec_policy",
          [](const mdp::ExpectedRewardModel& erm, mdp::RewardKind kind, double gamma,
             const mdp::StageState& state, const std::vector<FeasibleSet>& stage_feasible) {
              return baselines::cec_policy(erm, kind, gamma, state, stage_feasible);
          });

    m.def("generate_network", [](const std::string& config_json, std::uint64_t seed) {
        const harness::ExperimentConfig config =
            config_json.empty() ? harness::ExperimentConfig{}
                                : harness::ExperimentConfig::from_json(config_json);
        const harness::GeneratedNetwork net = harness::generate_network(config, seed);
        return py::make_tuple(net.model, net.base, net.fake_sources);
    });
    m.def("default_config_json",
          [] { return harness::ExperimentConfig{}.to_json(); });
}
