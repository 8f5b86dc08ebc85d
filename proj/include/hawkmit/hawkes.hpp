#pragma once

#include "hawkmit/common.hpp"
#include "hawkmit/events.hpp"
#include "hawkmit/network.hpp"

#include <cstdint>
#include <vector>

namespace hawkmit {

/// lambda_j(t) = mu_j + u_j + y_j e^{-omega (t - t_start)}
///             + sum over events (s, i) with s < t of a_ij e^{-omega (t - s)}.
/// Direct summation over the log; the simulator maintains the same quantity
/// recursively.
Vector conditional_intensity(const NetworkModel& model, const EventLog& log, EventTag tag,
                             const Vector& carry, const Vector& u, double t);

struct StageSample {
    EventLog log;
    /// Residual endogenous intensity at the window end; the carry for the
    /// next stage.
    Vector carry_end;
};

/// Exact sampling on [t0, t1) by Ogata thinning. The dominating rate is the
/// current total intensity, refreshed after every candidate; valid because
/// the exponential kernel is nonincreasing between events. Candidate node
/// selection scans nodes in index order, so zero-probability ties resolve
/// deterministically.
StageSample simulate_stage(const NetworkModel& model, EventTag tag, const Vector& carry,
                           const Vector& u, double t0, double t1, std::uint64_t seed);

/// Carry decay-and-accumulate across a window: y(t1) = y e^{-omega (t1 - t0)}
/// + sum_(s,i) a_i. e^{-omega (t1 - s)}. Summed in log order, which makes it
/// bit-identical to conditional_intensity(t1) - mu - u.
Vector propagate_carry(const NetworkModel& model, const EventLog& log, EventTag tag,
                       const Vector& carry);

/// Per-node compensator integral_{t_start}^{t_end} lambda_j dt, in closed form.
Vector compensator(const NetworkModel& model, const EventLog& log, EventTag tag,
                   const Vector& carry, const Vector& u);

/// sum_l log lambda_{i_l}(t_l) - sum_j Lambda_j over the log's window.
/// A zero intensity at any event time yields -infinity.
double log_likelihood(const NetworkModel& model, const EventLog& log, EventTag tag,
                      const Vector& carry, const Vector& u);

struct MleOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-6;
    double initial_step = 1.0;
    double backtracking_shrink = 0.5;
    int max_line_search_steps = 40;
};

struct MleResult {
    Matrix excitation;
    Vector mu;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Maximum-likelihood fit of (A, mu) with omega held fixed, by projected
/// gradient ascent with backtracking. Each log is one independent window
/// starting from zero carry; all events in every log are used regardless of
/// tag. Initialization: mu = empirical rate, A = 0.
MleResult fit_mle(const std::vector<EventLog>& logs, int n, double omega,
                  const MleOptions& options = {});

}  // namespace hawkmit
