#include "hawkmit/moments.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

namespace hawkmit::moments {

MomentContext::MomentContext(const Matrix& excitation, double omega, double delta)
    : omega_(omega), delta_(delta) {
    if (excitation.rows() != excitation.cols()) {
        throw std::invalid_argument("MomentContext: excitation must be square");
    }
    if (!(omega > 0.0)) throw std::invalid_argument("MomentContext: omega must be > 0");
    if (!(delta > 0.0)) throw std::invalid_argument("MomentContext: delta must be > 0");
    if (!(spectral_radius(excitation, omega) < 1.0)) {
        throw std::invalid_argument("MomentContext: rho(A/omega) must be < 1");
    }
    const Eigen::Index n = excitation.rows();
    acting_ = excitation.transpose();
    generator_ = acting_ - omega * Matrix::Identity(n, n);
    generator_inverse_ = generator_.partialPivLu().solve(Matrix::Identity(n, n));
    exp_delta_ = (generator_ * delta).exp();
    upsilon_ = generator_inverse_ * (exp_delta_ - Matrix::Identity(n, n));
    gamma_ = upsilon_ + omega * (generator_inverse_ * (upsilon_ - delta * Matrix::Identity(n, n)));
}

MomentContext::MomentContext(const NetworkModel& model, double delta)
    : MomentContext(model.excitation(), model.omega(), delta) {}

Matrix MomentContext::exp_generator(double t) const { return (generator_ * t).exp(); }

Matrix MomentContext::mean_kernel(double t) const {
    const Matrix e = exp_generator(t);
    return e + omega_ * (generator_inverse_ * (e - Matrix::Identity(n(), n())));
}

Vector mean_intensity(const MomentContext& ctx, const Vector& mu_eff, double t) {
    if (t < 0.0) throw std::domain_error("mean_intensity: t must be >= 0");
    return ctx.mean_kernel(t) * mu_eff;
}

Vector stage_mean_intensity(const MomentContext& ctx, const Vector& mu_eff, const Vector& y,
                            double t) {
    if (t < 0.0) throw std::domain_error("stage_mean_intensity: t must be >= 0");
    return ctx.mean_kernel(t) * mu_eff + ctx.exp_generator(t) * y;
}

Vector stage_mean_counts(const MomentContext& ctx, const Vector& mu_eff, const Vector& y) {
    return ctx.gamma() * mu_eff + ctx.upsilon() * y;
}

Matrix response_function(const MomentContext& ctx, double tau) {
    if (!(tau > 0.0)) {
        throw std::domain_error("response_function: tau must be > 0; use the symmetry relation");
    }
    return ctx.acting() * ctx.exp_generator(tau);
}

std::vector<Matrix> volterra_response(const Matrix& excitation, double omega, double h,
                                      int steps) {
    if (!(h > 0.0) || steps < 0) throw std::invalid_argument("volterra_response: bad grid");
    const Eigen::Index n = excitation.rows();
    const Matrix acting = excitation.transpose();
    const Eigen::PartialPivLU<Matrix> lhs(Matrix::Identity(n, n) - (h / 2.0) * acting);

    std::vector<Matrix> r;
    r.reserve(static_cast<std::size_t>(steps) + 1);
    r.push_back(acting);  // R(0+) = Phi(0) = A'
    for (int k = 1; k <= steps; ++k) {
        // (I - h/2 A') R_k = Phi_k + h (1/2 Phi_k R_0 + sum_{l=1}^{k-1} Phi_{k-l} R_l)
        Matrix weighted = 0.5 * std::exp(-omega * k * h) * r[0];
        for (int l = 1; l < k; ++l) {
            weighted += std::exp(-omega * (k - l) * h) * r[l];
        }
        const Matrix rhs = std::exp(-omega * k * h) * acting + h * (acting * weighted);
        r.push_back(lhs.solve(rhs));
    }
    return r;
}

std::vector<Vector> volterra_mean(const MomentContext& ctx, const Vector& mu_eff, const Vector& y,
                                  int grid) {
    if (grid < 1) throw std::invalid_argument("volterra_mean: grid must be >= 1");
    const double h = ctx.delta() / grid;
    const double omega = ctx.omega();
    const Matrix& acting = ctx.acting();
    const Eigen::PartialPivLU<Matrix> lhs(Matrix::Identity(ctx.n(), ctx.n()) -
                                          (h / 2.0) * acting);

    std::vector<Vector> eta;
    eta.reserve(static_cast<std::size_t>(grid) + 1);
    eta.push_back(mu_eff + y);
    for (int k = 1; k <= grid; ++k) {
        Vector weighted = 0.5 * std::exp(-omega * k * h) * eta[0];
        for (int l = 1; l < k; ++l) {
            weighted += std::exp(-omega * (k - l) * h) * eta[l];
        }
        const Vector rhs = mu_eff + std::exp(-omega * k * h) * y + h * (acting * weighted);
        eta.push_back(lhs.solve(rhs));
    }
    return eta;
}

SecondOrderDensity second_order_density(const MomentContext& ctx, const Vector& eta_t,
                                        const Vector& eta_tp, double t, double tp) {
    if (t < 0.0 || tp < 0.0) throw std::domain_error("second_order_density: times must be >= 0");
    SecondOrderDensity out;
    out.atom = eta_tp;
    if (t > tp) {
        out.continuous =
            response_function(ctx, t - tp) * eta_tp.asDiagonal() + eta_t * eta_tp.transpose();
    } else if (t < tp) {
        const Matrix swapped =
            response_function(ctx, tp - t) * eta_t.asDiagonal() + eta_tp * eta_t.transpose();
        out.continuous = swapped.transpose();
    } else {
        const Matrix one_sided = ctx.acting() * eta_t.asDiagonal();
        out.continuous =
            0.5 * (one_sided + one_sided.transpose()) + eta_t * eta_tp.transpose();
    }
    return out;
}

namespace {

Matrix quadrature_second_moment(const MomentContext& ctx, const Vector& mu_eff, const Vector& y,
                                int grid) {
    const int n = ctx.n();
    const double h = ctx.delta() / grid;
    const std::vector<Vector> eta = volterra_mean(ctx, mu_eff, y, grid);

    // Q = iint_{t > t'} R(t - t') diag(eta(t')) dt dt', iterated trapezoid.
    // T_j = trapezoid cumulative of R over lags [0, j h]; built alongside the
    // incremental powers R_j = A' (e^{C h})^j.
    const Matrix step = ctx.exp_generator(h);
    Matrix r_prev = ctx.acting();
    Matrix cumulative = Matrix::Zero(n, n);
    Matrix q = Matrix::Zero(n, n);
    for (int j = 1; j <= grid; ++j) {
        const Matrix r_cur = r_prev * step;
        cumulative += (h / 2.0) * (r_prev + r_cur);
        r_prev = r_cur;
        const int b = grid - j;  // outer node t' = b h
        const double w = (b == 0) ? 0.5 : 1.0;
        q += w * (cumulative * eta[b].asDiagonal());
    }
    q *= h;

    const Vector mean = stage_mean_counts(ctx, mu_eff, y);
    Matrix second = q + q.transpose() + mean * mean.transpose();
    second += Matrix(mean.asDiagonal());
    return second;
}

}  // namespace

StageMomentResult stage_second_moment_detailed(const MomentContext& ctx, const Vector& mu_eff,
                                               const Vector& y, const StageMomentOptions& options) {
    if (options.grid < 2) throw std::invalid_argument("stage_second_moment: grid must be >= 2");
    StageMomentResult result;
    result.second_moment = quadrature_second_moment(ctx, mu_eff, y, options.grid);
    if (options.refine_check) {
        const Matrix refined = quadrature_second_moment(ctx, mu_eff, y, 2 * options.grid);
        const double scale = std::max(1.0, refined.norm());
        result.refine_relative_change = (refined - result.second_moment).norm() / scale;
        result.second_moment = refined;
    }
    return result;
}

Matrix stage_second_moment(const MomentContext& ctx, const Vector& mu_eff, const Vector& y,
                           const StageMomentOptions& options) {
    return stage_second_moment_detailed(ctx, mu_eff, y, options).second_moment;
}

}  // namespace hawkmit::moments
