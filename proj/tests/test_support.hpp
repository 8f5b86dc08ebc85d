#pragma once

#include "hawkmit/network.hpp"

#include <random>

namespace hawkmit::testing {

inline double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Dense-ish random stable model with every node active in both processes.
inline NetworkModel random_stable_model(int n, std::mt19937_64& rng, double density = 0.5,
                                        double target_rho = 0.6, double mu_lo = 0.1,
                                        double mu_hi = 0.4, double omega = 1.0) {
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j && unit_draw(rng) < density) a(i, j) = 0.5 * unit_draw(rng);
        }
    }
    const double rho0 = spectral_radius(a, omega);
    if (rho0 > 0.0) a *= target_rho * omega / (rho0 * omega);
    Matrix follow = Matrix::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (a(j, i) > 0.0) follow(i, j) = 1.0;
        }
    }
    Vector mu_f(n), mu_m(n);
    for (int i = 0; i < n; ++i) {
        mu_f[i] = mu_lo + (mu_hi - mu_lo) * unit_draw(rng);
        mu_m[i] = mu_lo + (mu_hi - mu_lo) * unit_draw(rng);
    }
    return NetworkModel(std::move(a), omega, std::move(mu_f), std::move(mu_m), std::move(follow));
}

}  // namespace hawkmit::testing
