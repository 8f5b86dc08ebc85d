#pragma once

#include "hawkmit/common.hpp"
#include "hawkmit/events.hpp"
#include "hawkmit/hawkes.hpp"
#include "hawkmit/moments.hpp"
#include "hawkmit/network.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace hawkmit::mdp {

enum class RewardKind { Correlation, Difference };

const char* to_string(RewardKind kind);
RewardKind reward_kind_from_string(const std::string& name);

/// MDP state at a stage boundary: carries of both processes plus per-node
/// counts of the L most recent stage intervals, newest block first
/// (z[(l-1)n + i] = count of node i in the l-th interval back).
struct StageState {
    int k = 0;
    double clock = 0.0;
    Vector y_m;
    Vector y_f;
    Vector z_m;
    Vector z_f;

    int n() const { return static_cast<int>(y_m.size()); }
    int intervals() const { return n() == 0 ? 0 : static_cast<int>(z_m.size()) / n(); }
    void validate() const;
};

StageState zero_state(int n, int intervals);

/// psi = [z_M; z_F; 1], dimension 2 n L + 1.
Vector features(const StageState& state);

/// Realized stage reward from integer count vectors; exposures are B times
/// counts.
double realized_reward(RewardKind kind, const Vector& counts_m, const Vector& counts_f,
                       const Matrix& follow);
double realized_reward(RewardKind kind, const EventLog& stage_m, const EventLog& stage_f,
                       const Matrix& follow);

/// Closed-form expected stage rewards and their exact dependence on the
/// intervention, precomputed once per (model, stage length).
///
/// For either process with input (mu_eff, y), the exposure-weighted second
/// moment splits as
///   E[z' W z] = p' mu_eff + q' y + m1' W m1 + diag(W)' m1,
/// with m1 = Gamma mu_eff + Upsilon y and W = B'B. The vectors p and q carry
/// the response-function variance contribution and are state-independent, so
/// per-state reward evaluation is O(n^2) and the control dependence is an
/// explicit affine (correlation) or concave quadratic (difference) form.
class ExpectedRewardModel {
  public:
    ExpectedRewardModel(const NetworkModel& model, double delta, int grid = 64);

    const NetworkModel& model() const { return model_; }
    const moments::MomentContext& context() const { return ctx_; }

    Vector expected_counts_m(const StageState& state, const Vector& u) const;
    Vector expected_counts_f(const StageState& state) const;

    /// E[z' W z] for one process.
    double exposure_second_moment(const Vector& mu_eff, const Vector& y) const;

    double expected_reward(RewardKind kind, const StageState& state, const Vector& u) const;

    /// E[R(x, u)] = constant + g'u + u'Q u (Q empty for correlation).
    struct Expansion {
        double constant = 0.0;
        Vector g;
        Matrix q;  // 0 x 0 when the objective is affine
    };
    Expansion reward_expansion(RewardKind kind, const StageState& state) const;

    const Matrix& exposure_gram() const { return w_; }          // B'B
    const Vector& exposure_gram_diag() const { return w_diag_; }
    const Matrix& gamma() const { return ctx_.gamma(); }
    const Matrix& upsilon() const { return ctx_.upsilon(); }
    const Matrix& gamma_t_w() const { return gamma_t_w_; }      // Gamma' W
    const Matrix& control_hessian() const { return control_hessian_; }  // -(1/n) Gamma' W Gamma
    const Vector& variance_mu_coeff() const { return variance_mu_; }     // p
    const Vector& variance_carry_coeff() const { return variance_carry_; }  // q
    /// Expected-carry recursion y at next boundary:
    /// y' = (K(delta) - I) mu_eff + e^{C delta} y.
    const Matrix& carry_input_map() const { return carry_input_map_; }
    const Matrix& carry_decay_map() const { return carry_decay_map_; }

  private:
    NetworkModel model_;
    moments::MomentContext ctx_;
    Matrix w_;
    Vector w_diag_;
    Matrix gamma_t_w_;
    Matrix control_hessian_;
    Vector variance_mu_;
    Vector variance_carry_;
    Matrix carry_input_map_;
    Matrix carry_decay_map_;
};

struct StepResult {
    StageState next;
    double reward_corr = 0.0;
    double reward_diff = 0.0;
    EventLog log_m;
    EventLog log_f;
};

/// Simulates both processes independently over one stage (fake with u = 0),
/// updates carries by the kernel decay recursion and shifts the z-blocks by
/// one interval.
StepResult step(const NetworkModel& model, const StageState& state, const Vector& u, double delta,
                std::uint64_t seed);

struct StageRecord {
    int k = 0;
    Vector u;
    double r_corr = 0.0;
    double r_diff = 0.0;
    Vector z_m;
    Vector z_f;
};

/// JSON Lines, one record per stage: {k, u, R_corr, R_diff, z_M, z_F}.
void write_trajectory_jsonl(const std::vector<StageRecord>& records, std::ostream& out);

}  // namespace hawkmit::mdp
