#pragma once

#include "hawkmit/common.hpp"

#include <cstdint>
#include <string>

namespace hawkmit {

/// Directed influence network shared by the fake-news and mitigation processes.
///
/// Conventions, fixed project-wide:
///   - a_ij is the excitation an event at node i adds to node j's intensity
///     (kernel a_ij * exp(-omega * lag)), so row i of A is the footprint of
///     an event at i.
///   - b_ij = 1 iff user i follows user j, with b_ii = 1; exposures are B
///     times event counts.
class NetworkModel {
  public:
    NetworkModel(Matrix excitation, double omega, Vector mu_f, Vector mu_m, Matrix follow);

    int n() const { return static_cast<int>(mu_f_.size()); }
    const Matrix& excitation() const { return excitation_; }
    double omega() const { return omega_; }
    const Vector& mu(EventTag tag) const { return tag == EventTag::F ? mu_f_ : mu_m_; }
    const Vector& mu_f() const { return mu_f_; }
    const Vector& mu_m() const { return mu_m_; }
    const Matrix& follow() const { return follow_; }

    /// rho(A / omega); < 1 by construction.
    double stability_radius() const { return stability_radius_; }

    /// Fingerprint of all parameters; stored in persisted policies so a
    /// policy file can be matched to the network it was trained on.
    std::uint64_t hash() const;

    std::string to_json() const;
    static NetworkModel from_json(const std::string& text);

  private:
    Matrix excitation_;
    double omega_;
    Vector mu_f_;
    Vector mu_m_;
    Matrix follow_;
    double stability_radius_;
};

/// Spectral radius of A / omega via shifted power iteration (relative
/// tolerance 1e-8). The +I shift keeps the iteration convergent for
/// reducible or periodic nonnegative matrices.
double spectral_radius(const Matrix& excitation, double omega);

}  // namespace hawkmit
