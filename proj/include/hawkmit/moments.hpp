#pragma once

#include "hawkmit/common.hpp"
#include "hawkmit/network.hpp"

#include <vector>

namespace hawkmit::moments {

/// Precomputed operators for transient first/second-order statistics of one
/// process over stages of fixed length.
///
/// This is the project's single orientation conversion point: NetworkModel
/// stores a_ij as "an event at i excites node j", while every moment formula
/// uses the matrix acting on intensity vectors, which is the transpose.
class MomentContext {
  public:
    MomentContext(const Matrix& excitation, double omega, double delta);
    MomentContext(const NetworkModel& model, double delta);

    int n() const { return static_cast<int>(acting_.rows()); }
    double omega() const { return omega_; }
    double delta() const { return delta_; }

    /// A' = A^T, the excitation matrix in the orientation acting on intensities.
    const Matrix& acting() const { return acting_; }
    /// C = A' - omega I; invertible whenever rho(A/omega) < 1.
    const Matrix& generator() const { return generator_; }
    const Matrix& generator_inverse() const { return generator_inverse_; }
    /// e^{C delta} (scaling-and-squaring Pade).
    const Matrix& exp_generator_delta() const { return exp_delta_; }
    /// Upsilon = C^{-1} (e^{C delta} - I); maps carries to expected stage counts.
    const Matrix& upsilon() const { return upsilon_; }
    /// Gamma = Upsilon + omega C^{-1} (Upsilon - delta I); maps constant
    /// exogenous input to expected stage counts. The omega enters as a factor
    /// rather than a divisor: that is the variant that reduces to delta I in
    /// the A = 0 limit.
    const Matrix& gamma() const { return gamma_; }

    Matrix exp_generator(double t) const;
    /// K(t) = e^{Ct} + omega C^{-1} (e^{Ct} - I); eta(t) = K(t) mu for
    /// constant input.
    Matrix mean_kernel(double t) const;

  private:
    double omega_;
    double delta_;
    Matrix acting_;
    Matrix generator_;
    Matrix generator_inverse_;
    Matrix exp_delta_;
    Matrix upsilon_;
    Matrix gamma_;
};

/// Mean intensity at time t for constant exogenous input, eta(t) = K(t) mu_eff.
Vector mean_intensity(const MomentContext& ctx, const Vector& mu_eff, double t);

/// Mean intensity including a decaying carry: eta(t) = K(t) mu_eff + e^{Ct} y.
Vector stage_mean_intensity(const MomentContext& ctx, const Vector& mu_eff, const Vector& y,
                            double t);

/// Expected per-node counts over one stage: E[z] = Gamma mu_eff + Upsilon y.
Vector stage_mean_counts(const MomentContext& ctx, const Vector& mu_eff, const Vector& y);

/// Response function at lag tau > 0, closed form R(tau) = A' e^{(A'-omega I) tau}.
/// Entry (i, j) is the expected extra event density at node i, lag tau after
/// an event at node j. Certified against the Volterra backend below.
Matrix response_function(const MomentContext& ctx, double tau);

/// Numeric backend: solves R = Phi + Phi * R on the uniform grid
/// {0, h, ..., steps*h} by trapezoidal discretization of the convolution,
/// with Phi(tau) = A' e^{-omega tau}. Returns R at each grid point.
std::vector<Matrix> volterra_response(const Matrix& excitation, double omega, double h, int steps);

/// Trapezoidal solve of the mean Volterra equation
///   eta(t) = mu_eff + y e^{-omega t} + (Phi * eta)(t)
/// on the uniform grid {0, h, ..., grid*h} with h = delta / grid. The carry
/// is a deterministic time-varying input here.
std::vector<Vector> volterra_mean(const MomentContext& ctx, const Vector& mu_eff, const Vector& y,
                                  int grid);

struct SecondOrderDensity {
    /// Continuous part of E[dN(t) dN(t')^T] / (dt dt').
    Matrix continuous;
    /// Diagonal atom Sigma(t') = diag(eta(t')); contributes only at t = t'.
    Vector atom;
};

/// Theorem-style density: for t > t' the continuous part is
/// R(t - t') Sigma(t') + eta(t) eta(t')^T; for t < t' the symmetry relation
/// G(t',t)^T Sigma(t') = Sigma(t) G(t,t') gives the transpose of the swapped
/// evaluation; at t = t' the two one-sided limits are averaged.
SecondOrderDensity second_order_density(const MomentContext& ctx, const Vector& eta_t,
                                        const Vector& eta_tp, double t, double tp);

struct StageMomentOptions {
    int grid = 64;
    /// Re-evaluate at twice the grid and record the relative change.
    bool refine_check = false;
};

struct StageMomentResult {
    Matrix second_moment;
    double refine_relative_change = 0.0;
};

/// E[z z^T] over one stage: tensor-product trapezoid quadrature of the
/// continuous density over the t > t' triangle (doubled by symmetry) plus
/// diag(E[z]), with the stage mean on the grid from the Volterra solver.
StageMomentResult stage_second_moment_detailed(const MomentContext& ctx, const Vector& mu_eff,
                                               const Vector& y,
                                               const StageMomentOptions& options = {});

Matrix stage_second_moment(const MomentContext& ctx, const Vector& mu_eff, const Vector& y,
                           const StageMomentOptions& options = {});

}  // namespace hawkmit::moments
