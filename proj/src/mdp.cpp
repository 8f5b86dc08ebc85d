#include "hawkmit/mdp.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace hawkmit::mdp {

const char* to_string(RewardKind kind) {
    return kind == RewardKind::Correlation ? "correlation" : "difference";
}

RewardKind reward_kind_from_string(const std::string& name) {
    if (name == "correlation" || name == "corr") return RewardKind::Correlation;
    if (name == "difference" || name == "diff") return RewardKind::Difference;
    throw std::invalid_argument("unknown reward kind: " + name);
}

void StageState::validate() const {
    const int nn = n();
    if (y_f.size() != nn) throw std::invalid_argument("StageState: carry size mismatch");
    if (z_m.size() != z_f.size()) throw std::invalid_argument("StageState: z size mismatch");
    if (nn > 0 && z_m.size() % nn != 0) {
        throw std::invalid_argument("StageState: z size must be a multiple of n");
    }
    if ((y_m.array() < 0.0).any() || (y_f.array() < 0.0).any()) {
        throw std::invalid_argument("StageState: carries must be >= 0");
    }
    for (const Vector* z : {&z_m, &z_f}) {
        for (Eigen::Index i = 0; i < z->size(); ++i) {
            const double v = (*z)[i];
            if (v < 0.0 || v != std::floor(v)) {
                throw std::invalid_argument("StageState: z entries must be nonnegative integers");
            }
        }
    }
}

StageState zero_state(int n, int intervals) {
    StageState s;
    s.y_m = Vector::Zero(n);
    s.y_f = Vector::Zero(n);
    s.z_m = Vector::Zero(static_cast<Eigen::Index>(n) * intervals);
    s.z_f = Vector::Zero(static_cast<Eigen::Index>(n) * intervals);
    return s;
}

Vector features(const StageState& state) {
    const Eigen::Index block = state.z_m.size();
    Vector psi(2 * block + 1);
    psi.head(block) = state.z_m;
    psi.segment(block, block) = state.z_f;
    psi[2 * block] = 1.0;
    return psi;
}

double realized_reward(RewardKind kind, const Vector& counts_m, const Vector& counts_f,
                       const Matrix& follow) {
    const double n = static_cast<double>(follow.rows());
    const Vector exposure_m = follow * counts_m;
    const Vector exposure_f = follow * counts_f;
    if (kind == RewardKind::Correlation) {
        return exposure_m.dot(exposure_f) / n;
    }
    return -(exposure_m - exposure_f).squaredNorm() / n;
}

double realized_reward(RewardKind kind, const EventLog& stage_m, const EventLog& stage_f,
                       const Matrix& follow) {
    const int n = static_cast<int>(follow.rows());
    return realized_reward(kind, stage_m.counts(n, EventTag::M), stage_f.counts(n, EventTag::F),
                           follow);
}

ExpectedRewardModel::ExpectedRewardModel(const NetworkModel& model, double delta, int grid)
    : model_(model), ctx_(model, delta) {
    const int n = model_.n();
    w_ = model_.follow().transpose() * model_.follow();
    w_diag_ = w_.diagonal();
    gamma_t_w_ = ctx_.gamma().transpose() * w_;
    control_hessian_ = -(gamma_t_w_ * ctx_.gamma()) / static_cast<double>(n);

    // p and q: the response-function part of E[z' W z], reduced to the lag
    // integral D(s) = int_0^s diagvec(W R(tau)) dtau paired with the mean
    // kernels at the outer time. Same trapezoid grid as stage_second_moment.
    const double h = delta / grid;
    const Matrix step = ctx_.exp_generator(h);
    const Matrix wa = w_ * ctx_.acting();  // diagvec(W R_k) = rows of WA' dotted with cols of E_k

    std::vector<Vector> lag_integral;  // D_j, j = 0..grid
    lag_integral.reserve(static_cast<std::size_t>(grid) + 1);
    {
        Matrix e = Matrix::Identity(n, n);
        Vector d_prev(n);
        for (int j = 0; j < n; ++j) d_prev[j] = wa.row(j).dot(e.col(j));
        Vector cumulative = Vector::Zero(n);
        lag_integral.push_back(cumulative);
        for (int k = 1; k <= grid; ++k) {
            e = e * step;
            Vector d_cur(n);
            for (int j = 0; j < n; ++j) d_cur[j] = wa.row(j).dot(e.col(j));
            cumulative += (h / 2.0) * (d_prev + d_cur);
            lag_integral.push_back(cumulative);
            d_prev = d_cur;
        }
    }

    Vector p = Vector::Zero(n);
    Vector q = Vector::Zero(n);
    {
        Matrix e = Matrix::Identity(n, n);
        const Matrix cinv_t = ctx_.generator_inverse().transpose();
        for (int b = 0; b <= grid; ++b) {
            if (b > 0) e = e * step;
            const double w = (b == 0 || b == grid) ? 0.5 : 1.0;
            const Vector& d = lag_integral[static_cast<std::size_t>(grid - b)];
            const Vector et_d = e.transpose() * d;
            const Vector cinv_d = cinv_t * d;
            // K(t_b)' d = E' d + omega (E' - I)(C^-T d)
            q += w * et_d;
            p += w * (et_d + ctx_.omega() * (e.transpose() * cinv_d - cinv_d));
        }
    }
    variance_mu_ = 2.0 * h * p;
    variance_carry_ = 2.0 * h * q;

    carry_decay_map_ = ctx_.exp_generator_delta();
    carry_input_map_ = ctx_.mean_kernel(delta) - Matrix::Identity(n, n);
}

Vector ExpectedRewardModel::expected_counts_m(const StageState& state, const Vector& u) const {
    return ctx_.gamma() * (model_.mu_m() + u) + ctx_.upsilon() * state.y_m;
}

Vector ExpectedRewardModel::expected_counts_f(const StageState& state) const {
    return ctx_.gamma() * model_.mu_f() + ctx_.upsilon() * state.y_f;
}

double ExpectedRewardModel::exposure_second_moment(const Vector& mu_eff, const Vector& y) const {
    const Vector m1 = ctx_.gamma() * mu_eff + ctx_.upsilon() * y;
    return variance_mu_.dot(mu_eff) + variance_carry_.dot(y) + m1.dot(w_ * m1) + w_diag_.dot(m1);
}

ExpectedRewardModel::Expansion ExpectedRewardModel::reward_expansion(RewardKind kind,
                                                                     const StageState& state) const {
    const double n = static_cast<double>(model_.n());
    const Vector m0 = expected_counts_m(state, Vector::Zero(model_.n()));
    const Vector f1 = expected_counts_f(state);
    const Vector wf = w_ * f1;

    Expansion e;
    if (kind == RewardKind::Correlation) {
        e.constant = m0.dot(wf) / n;
        e.g = (gamma_t_w_ * f1) / n;
        return e;
    }
    const double second_m = exposure_second_moment(model_.mu_m(), state.y_m);
    const double second_f = exposure_second_moment(model_.mu_f(), state.y_f);
    e.constant = -(second_m + second_f) / n + 2.0 * m0.dot(wf) / n;
    e.g = -(variance_mu_ + 2.0 * (gamma_t_w_ * m0) + ctx_.gamma().transpose() * w_diag_) / n +
          2.0 * (gamma_t_w_ * f1) / n;
    e.q = control_hessian_;
    return e;
}

double ExpectedRewardModel::expected_reward(RewardKind kind, const StageState& state,
                                            const Vector& u) const {
    if (u.size() != model_.n()) throw std::domain_error("expected_reward: u size mismatch");
    if ((u.array() < 0.0).any()) throw std::domain_error("expected_reward: u must be >= 0");
    const Expansion e = reward_expansion(kind, state);
    double value = e.constant + e.g.dot(u);
    if (e.q.size() > 0) value += u.dot(e.q * u);
    return value;
}

StepResult step(const NetworkModel& model, const StageState& state, const Vector& u, double delta,
                std::uint64_t seed) {
    const int n = model.n();
    const int intervals = state.intervals();
    const double t0 = state.clock;
    const double t1 = t0 + delta;

    StepResult out;
    {
        StageSample sample =
            simulate_stage(model, EventTag::M, state.y_m, u, t0, t1, derive_seed(seed, 0));
        out.log_m = std::move(sample.log);
        out.next.y_m = std::move(sample.carry_end);
    }
    {
        StageSample sample = simulate_stage(model, EventTag::F, state.y_f, Vector::Zero(n), t0, t1,
                                            derive_seed(seed, 1));
        out.log_f = std::move(sample.log);
        out.next.y_f = std::move(sample.carry_end);
    }

    const Vector counts_m = out.log_m.counts(n, EventTag::M);
    const Vector counts_f = out.log_f.counts(n, EventTag::F);
    out.reward_corr = realized_reward(RewardKind::Correlation, counts_m, counts_f, model.follow());
    out.reward_diff = realized_reward(RewardKind::Difference, counts_m, counts_f, model.follow());

    out.next.k = state.k + 1;
    out.next.clock = t1;
    out.next.z_m = Vector::Zero(state.z_m.size());
    out.next.z_f = Vector::Zero(state.z_f.size());
    out.next.z_m.head(n) = counts_m;
    out.next.z_f.head(n) = counts_f;
    if (intervals > 1) {
        const Eigen::Index rest = static_cast<Eigen::Index>(n) * (intervals - 1);
        out.next.z_m.segment(n, rest) = state.z_m.head(rest);
        out.next.z_f.segment(n, rest) = state.z_f.head(rest);
    }
    return out;
}

void write_trajectory_jsonl(const std::vector<StageRecord>& records, std::ostream& out) {
    for (const StageRecord& r : records) {
        nlohmann::json j;
        j["k"] = r.k;
        j["u"] = std::vector<double>(r.u.data(), r.u.data() + r.u.size());
        j["R_corr"] = r.r_corr;
        j["R_diff"] = r.r_diff;
        j["z_M"] = std::vector<double>(r.z_m.data(), r.z_m.data() + r.z_m.size());
        j["z_F"] = std::vector<double>(r.z_f.data(), r.z_f.data() + r.z_f.size());
        out << j.dump() << '\n';
    }
}

}  // namespace hawkmit::mdp
