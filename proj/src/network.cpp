#include "hawkmit/network.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace hawkmit {

namespace {

void require_nonnegative(const Vector& v, const char* label) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]) || v[i] < 0.0) {
            throw std::invalid_argument(std::string(label) + " entries must be finite and >= 0");
        }
    }
}

}  // namespace

double spectral_radius(const Matrix& excitation, double omega) {
    if (excitation.rows() != excitation.cols()) {
        throw std::invalid_argument("spectral_radius: matrix must be square");
    }
    if (omega <= 0.0) {
        throw std::invalid_argument("spectral_radius: omega must be > 0");
    }
    const Eigen::Index n = excitation.rows();
    if (n == 0) return 0.0;
    if (excitation.lpNorm<Eigen::Infinity>() == 0.0) return 0.0;

    // Iterate on A/omega + I: spectrum shifts by one, so the Perron root has
    // a strict modulus gap even when A is periodic.
    const Matrix shifted = excitation / omega + Matrix::Identity(n, n);
    Vector x = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
    double estimate = 0.0;
    const int max_iters = 200000;
    for (int it = 0; it < max_iters; ++it) {
        Vector y = shifted * x;
        const double norm = y.norm();
        if (norm == 0.0) return 0.0;
        x = y / norm;
        const double next = norm;
        if (it > 0 && std::abs(next - estimate) <= 1e-8 * std::max(1.0, std::abs(next))) {
            estimate = next;
            break;
        }
        estimate = next;
    }
    return std::max(0.0, estimate - 1.0);
}

NetworkModel::NetworkModel(Matrix excitation, double omega, Vector mu_f, Vector mu_m, Matrix follow)
    : excitation_(std::move(excitation)),
      omega_(omega),
      mu_f_(std::move(mu_f)),
      mu_m_(std::move(mu_m)),
      follow_(std::move(follow)) {
    const Eigen::Index n = mu_f_.size();
    if (n == 0) throw std::invalid_argument("NetworkModel: empty node set");
    if (mu_m_.size() != n) throw std::invalid_argument("NetworkModel: mu_F/mu_M size mismatch");
    if (excitation_.rows() != n || excitation_.cols() != n) {
        throw std::invalid_argument("NetworkModel: excitation matrix must be n x n");
    }
    if (follow_.rows() != n || follow_.cols() != n) {
        throw std::invalid_argument("NetworkModel: follower matrix must be n x n");
    }
    if (!(omega_ > 0.0) || !std::isfinite(omega_)) {
        throw std::invalid_argument("NetworkModel: omega must be finite and > 0");
    }
    require_nonnegative(mu_f_, "mu_F");
    require_nonnegative(mu_m_, "mu_M");
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double a = excitation_(i, j);
            if (!std::isfinite(a) || a < 0.0) {
                throw std::invalid_argument("NetworkModel: excitation entries must be finite and >= 0");
            }
            const double b = follow_(i, j);
            if (b != 0.0 && b != 1.0) {
                throw std::invalid_argument("NetworkModel: follower matrix must be binary");
            }
        }
        if (follow_(i, i) != 1.0) {
            throw std::invalid_argument("NetworkModel: follower matrix needs unit diagonal");
        }
    }
    stability_radius_ = spectral_radius(excitation_, omega_);
    if (!(stability_radius_ < 1.0)) {
        std::ostringstream msg;
        msg << "NetworkModel: unstable parameters, rho(A/omega) = " << stability_radius_;
        throw std::invalid_argument(msg.str());
    }
}

std::uint64_t NetworkModel::hash() const { return fnv1a64(to_json()); }

std::string NetworkModel::to_json() const {
    nlohmann::json j;
    const int n = this->n();
    j["n"] = n;
    j["omega"] = omega_;
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) a[i][k] = excitation_(i, k);
    }
    j["A"] = a;
    j["mu_F"] = std::vector<double>(mu_f_.data(), mu_f_.data() + n);
    j["mu_M"] = std::vector<double>(mu_m_.data(), mu_m_.data() + n);
    std::vector<std::vector<int>> adjacency(n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            if (follow_(i, k) != 0.0) adjacency[i].push_back(k);
        }
    }
    j["B"] = adjacency;
    return j.dump();
}

NetworkModel NetworkModel::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    const int n = j.at("n").get<int>();
    Matrix a(n, n);
    const auto& rows = j.at("A");
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) a(i, k) = rows.at(i).at(k).get<double>();
    }
    Vector mu_f(n), mu_m(n);
    for (int i = 0; i < n; ++i) {
        mu_f[i] = j.at("mu_F").at(i).get<double>();
        mu_m[i] = j.at("mu_M").at(i).get<double>();
    }
    Matrix follow = Matrix::Zero(n, n);
    const auto& adjacency = j.at("B");
    for (int i = 0; i < n; ++i) {
        for (const auto& k : adjacency.at(i)) follow(i, k.get<int>()) = 1.0;
    }
    return NetworkModel(std::move(a), j.at("omega").get<double>(), std::move(mu_f), std::move(mu_m),
                        std::move(follow));
}

}  // namespace hawkmit
