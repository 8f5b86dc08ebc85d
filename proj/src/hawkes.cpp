#include "hawkmit/hawkes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace hawkmit {

namespace {

// Uniform in [0, 1) from the top 53 bits; keeps draws independent of the
// standard library's distribution implementation.
double canonical_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Vector endogenous_intensity(const NetworkModel& model, const EventLog& log, EventTag tag,
                            const Vector& carry, double t) {
    const double omega = model.omega();
    Vector endo = carry * std::exp(-omega * (t - log.t_start));
    for (const Event& e : log.events) {
        if (e.tag != tag || e.t >= t) continue;
        endo += model.excitation().row(e.node).transpose() * std::exp(-omega * (t - e.t));
    }
    return endo;
}

void check_vectors(const NetworkModel& model, const Vector& carry, const Vector& u) {
    if (carry.size() != model.n() || u.size() != model.n()) {
        throw std::invalid_argument("carry/u size mismatch with model");
    }
    if ((carry.array() < 0.0).any()) throw std::invalid_argument("carry must be >= 0");
    if ((u.array() < 0.0).any()) throw std::invalid_argument("intervention must be >= 0");
}

}  // namespace

Vector conditional_intensity(const NetworkModel& model, const EventLog& log, EventTag tag,
                             const Vector& carry, const Vector& u, double t) {
    check_vectors(model, carry, u);
    if (t < log.t_start || t > log.t_end) {
        throw std::domain_error("conditional_intensity: t outside the log window");
    }
    return model.mu(tag) + u + endogenous_intensity(model, log, tag, carry, t);
}

Vector propagate_carry(const NetworkModel& model, const EventLog& log, EventTag tag,
                       const Vector& carry) {
    return endogenous_intensity(model, log, tag, carry, log.t_end);
}

StageSample simulate_stage(const NetworkModel& model, EventTag tag, const Vector& carry,
                           const Vector& u, double t0, double t1, std::uint64_t seed) {
    check_vectors(model, carry, u);
    if (!(t1 > t0)) throw std::invalid_argument("simulate_stage: empty window");

    const int n = model.n();
    const double omega = model.omega();
    const Vector base = model.mu(tag) + u;
    const double base_total = base.sum();

    StageSample out;
    out.log.t_start = t0;
    out.log.t_end = t1;

    std::mt19937_64 rng(seed);
    Vector endo = carry;  // endogenous intensity, valid at t_cur
    double t_cur = t0;

    for (;;) {
        const double bound = base_total + endo.sum();
        if (bound <= 0.0) break;
        const double wait = -std::log1p(-canonical_uniform(rng)) / bound;
        const double t_cand = t_cur + wait;
        if (t_cand >= t1) break;

        endo *= std::exp(-omega * (t_cand - t_cur));
        t_cur = t_cand;

        const double total = base_total + endo.sum();
        if (canonical_uniform(rng) * bound <= total) {
            // Pick the node by cumulative scan in index order.
            const double target = canonical_uniform(rng) * total;
            double cum = 0.0;
            int node = n - 1;
            for (int j = 0; j < n; ++j) {
                cum += base[j] + endo[j];
                if (target < cum) {
                    node = j;
                    break;
                }
            }
            out.log.append(t_cur, node, tag);
            endo += model.excitation().row(node).transpose();
        }
    }

    endo *= std::exp(-omega * (t1 - t_cur));
    out.carry_end = endo;
    return out;
}

Vector compensator(const NetworkModel& model, const EventLog& log, EventTag tag,
                   const Vector& carry, const Vector& u) {
    check_vectors(model, carry, u);
    const double omega = model.omega();
    const double horizon = log.t_end - log.t_start;
    Vector total = (model.mu(tag) + u) * horizon;
    total += carry * ((1.0 - std::exp(-omega * horizon)) / omega);
    for (const Event& e : log.events) {
        if (e.tag != tag) continue;
        const double mass = (1.0 - std::exp(-omega * (log.t_end - e.t))) / omega;
        total += model.excitation().row(e.node).transpose() * mass;
    }
    return total;
}

double log_likelihood(const NetworkModel& model, const EventLog& log, EventTag tag,
                      const Vector& carry, const Vector& u) {
    check_vectors(model, carry, u);
    const double omega = model.omega();
    const Vector base = model.mu(tag) + u;

    double ll = 0.0;
    Vector endo = carry;
    double t_prev = log.t_start;
    for (const Event& e : log.events) {
        if (e.tag != tag) continue;
        endo *= std::exp(-omega * (e.t - t_prev));
        t_prev = e.t;
        const double rate = base[e.node] + endo[e.node];
        if (!(rate > 0.0)) return -std::numeric_limits<double>::infinity();
        ll += std::log(rate);
        endo += model.excitation().row(e.node).transpose();
    }
    ll -= compensator(model, log, tag, carry, u).sum();
    return ll;
}

namespace {

struct Objective {
    double value;
    Vector grad_mu;
    Matrix grad_a;
};

double evaluate_loglik(const std::vector<EventLog>& logs, const Matrix& a, const Vector& mu,
                       double omega) {
    double ll = 0.0;
    const int n = static_cast<int>(mu.size());
    for (const EventLog& log : logs) {
        const double horizon = log.t_end - log.t_start;
        Vector decayed = Vector::Zero(n);  // per-source decayed event counts
        double t_prev = log.t_start;
        for (const Event& e : log.events) {
            decayed *= std::exp(-omega * (e.t - t_prev));
            t_prev = e.t;
            const double rate = mu[e.node] + a.col(e.node).dot(decayed);
            if (!(rate > 0.0)) return -std::numeric_limits<double>::infinity();
            ll += std::log(rate);
            decayed[e.node] += 1.0;
        }
        ll -= mu.sum() * horizon;
        for (const Event& e : log.events) {
            ll -= a.row(e.node).sum() * (1.0 - std::exp(-omega * (log.t_end - e.t))) / omega;
        }
    }
    return ll;
}

Objective evaluate_with_gradient(const std::vector<EventLog>& logs, const Matrix& a,
                                 const Vector& mu, double omega) {
    const int n = static_cast<int>(mu.size());
    Objective obj{0.0, Vector::Zero(n), Matrix::Zero(n, n)};
    for (const EventLog& log : logs) {
        const double horizon = log.t_end - log.t_start;
        Vector decayed = Vector::Zero(n);
        double t_prev = log.t_start;
        for (const Event& e : log.events) {
            decayed *= std::exp(-omega * (e.t - t_prev));
            t_prev = e.t;
            const double rate = mu[e.node] + a.col(e.node).dot(decayed);
            if (!(rate > 0.0)) {
                obj.value = -std::numeric_limits<double>::infinity();
                return obj;
            }
            obj.value += std::log(rate);
            obj.grad_mu[e.node] += 1.0 / rate;
            obj.grad_a.col(e.node) += decayed / rate;
            decayed[e.node] += 1.0;
        }
        obj.value -= mu.sum() * horizon;
        obj.grad_mu.array() -= horizon;
        Vector kernel_mass = Vector::Zero(n);
        for (const Event& e : log.events) {
            kernel_mass[e.node] += (1.0 - std::exp(-omega * (log.t_end - e.t))) / omega;
        }
        obj.value -= kernel_mass.dot(a.rowwise().sum());
        obj.grad_a.colwise() -= kernel_mass;
    }
    return obj;
}

}  // namespace

MleResult fit_mle(const std::vector<EventLog>& logs, int n, double omega,
                  const MleOptions& options) {
    if (logs.empty()) throw std::invalid_argument("fit_mle: need at least one log");
    if (!(omega > 0.0)) throw std::invalid_argument("fit_mle: omega must be > 0");

    double total_time = 0.0;
    Vector counts = Vector::Zero(n);
    for (const EventLog& log : logs) {
        total_time += log.t_end - log.t_start;
        for (const Event& e : log.events) counts[e.node] += 1.0;
    }

    MleResult result;
    result.mu = total_time > 0.0 ? Vector(counts / total_time) : Vector(Vector::Zero(n));
    result.excitation = Matrix::Zero(n, n);

    double step = options.initial_step;
    double value = evaluate_loglik(logs, result.excitation, result.mu, omega);
    for (int it = 0; it < options.max_iterations; ++it) {
        result.iterations = it + 1;
        const Objective obj = evaluate_with_gradient(logs, result.excitation, result.mu, omega);
        value = obj.value;

        // Projected-gradient stationarity at unit step.
        const double stat = std::max(
            ((result.mu + obj.grad_mu).cwiseMax(0.0) - result.mu).lpNorm<Eigen::Infinity>(),
            ((result.excitation + obj.grad_a).cwiseMax(0.0) - result.excitation)
                .lpNorm<Eigen::Infinity>());
        if (stat <= options.gradient_tolerance) {
            result.converged = true;
            break;
        }

        bool improved = false;
        for (int ls = 0; ls < options.max_line_search_steps; ++ls) {
            const Vector mu_next = (result.mu + step * obj.grad_mu).cwiseMax(0.0);
            const Matrix a_next = (result.excitation + step * obj.grad_a).cwiseMax(0.0);
            const double next = evaluate_loglik(logs, a_next, mu_next, omega);
            if (next > value) {
                result.mu = mu_next;
                result.excitation = a_next;
                value = next;
                improved = true;
                step *= 1.5;
                break;
            }
            step *= options.backtracking_shrink;
        }
        if (!improved) {
            // No ascent direction at the smallest step; treat as stationary.
            result.converged = true;
            break;
        }
    }
    result.log_likelihood = value;
    return result;
}

}  // namespace hawkmit
