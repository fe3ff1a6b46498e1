#include "airfl/errors.hpp"
#include "airfl/kernels.hpp"
#include "airfl/learning.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace airfl::learning {

const char* to_string(BoundKind kind) {
    switch (kind) {
    case BoundKind::GlobalCsit:
        return "global_csit";
    case BoundKind::Wafel:
        return "wafel";
    case BoundKind::WafelHeterogeneous:
        return "wafel_het";
    case BoundKind::PartialPhase:
        return "partial_phase";
    }
    return "?";
}

double step_size_margin(double L, double mu, std::size_t tau) {
    const double t = static_cast<double>(tau);
    return 1.0 - 0.5 * L * L * mu * mu * t * (t - 1.0) - L * mu * t;
}

namespace {

double fedavg_bound(BoundKind kind, const BoundConstants& c, const TrainingConfig& cfg,
                    std::span<const BoundRound> rounds, std::span<const double> inv_batch) {
    if (cfg.schedule != LrSchedule::Constant)
        throw PreconditionError(std::string(to_string(kind)) + " bound: needs a constant step size");
    const double mu = cfg.mu;
    const double tau = static_cast<double>(cfg.tau);
    const double T = static_cast<double>(rounds.size());
    const double margin = step_size_margin(c.L, mu, cfg.tau);
    if (margin < 0.0)
        throw PreconditionError(std::string(to_string(kind)) + " bound: step-size condition violated (margin " +
                                std::to_string(margin) + ")");
    const double noise = c.sigma_g2 / static_cast<double>(cfg.batch);

    double sum_I = 0.0;
    for (const auto& r : rounds) {
        switch (kind) {
        case BoundKind::GlobalCsit:
            if (r.active == 0)
                return std::numeric_limits<double>::infinity();
            sum_I += mu * mu * noise * tau / static_cast<double>(r.active) + r.mse;
            break;
        case BoundKind::Wafel: {
            const double a2 = std::inner_product(r.alpha.begin(), r.alpha.end(), r.alpha.begin(), 0.0);
            sum_I += mu * mu * noise * tau * a2 + r.mse;
            break;
        }
        case BoundKind::WafelHeterogeneous: {
            if (r.alpha.size() != inv_batch.size())
                throw ArgumentError("wafel_het bound: alpha and inverse batch sizes differ in length");
            double lin = 0.0;
            double quad = 0.0;
            for (std::size_t k = 0; k < inv_batch.size(); ++k) {
                lin += r.alpha[k] * inv_batch[k];
                quad += r.alpha[k] * r.alpha[k] * inv_batch[k];
            }
            sum_I += c.L * mu * mu * mu * 0.5 * tau * (tau - 1.0) * c.sigma_g2 * lin +
                     mu * mu * c.sigma_g2 * tau * quad + r.mse;
            break;
        }
        case BoundKind::PartialPhase:
            break;
        }
    }
    double value = 2.0 * c.loss_gap / (mu * tau * T) + c.L / (mu * tau * T) * sum_I;
    if (kind != BoundKind::WafelHeterogeneous)
        value += 0.5 * c.L * c.L * mu * mu * (tau - 1.0) * noise;
    return value;
}

std::vector<double> tail_envelope(const BoundConstants& c, const TrainingConfig& cfg, std::size_t T) {
    if (cfg.schedule != LrSchedule::Diminishing)
        throw PreconditionError("partial_phase bound: needs the diminishing step size");
    const double a = c.tail_alpha;
    if (!(a > 0.0 && a <= 2.0))
        throw ArgumentError("partial_phase bound: tail index must lie in (0, 2]");
    const double theta = cfg.lr_theta;
    const double slack = c.omega * theta * c.L - a + 1.0;
    if (!(slack > 0.0))
        throw PreconditionError("partial_phase bound: lr_theta must exceed (alpha - 1)/(omega L)");
    const double s = static_cast<double>(c.model_size);
    const double K = static_cast<double>(c.devices);
    const double spread = std::pow(c.sigma2_h_comp, a / 2.0) * std::pow(c.G, a) * std::pow(s, 1.0 - 1.0 / a) /
                          std::pow(K, a / 2.0);
    const double lead = 4.0 * std::pow(theta, a) * (c.C + spread) / slack;
    std::vector<double> series(T);
    for (std::size_t t = 1; t <= T; ++t)
        series[t - 1] = lead / std::pow(static_cast<double>(t), a - 1.0);
    return series;
}

} // namespace

BoundValue eval_convergence_bound(BoundKind kind, const BoundConstants& constants,
                                  const TrainingConfig& cfg, std::span<const BoundRound> rounds,
                                  std::span<const double> inverse_batches) {
    if (rounds.empty())
        throw ArgumentError("eval_convergence_bound: need at least one round");
    if (!(constants.L > 0.0))
        throw ArgumentError("eval_convergence_bound: L must be > 0");
    BoundValue out;
    if (kind == BoundKind::PartialPhase) {
        out.series = tail_envelope(constants, cfg, rounds.size());
        out.value = out.series.back();
        return out;
    }
    if (kind == BoundKind::WafelHeterogeneous && inverse_batches.empty())
        throw ArgumentError("wafel_het bound: inverse batch sizes required");
    out.value = fedavg_bound(kind, constants, cfg, rounds, inverse_batches);
    return out;
}

namespace {

void require_least_squares(const FederatedTask& task, const char* who) {
    if (task.shape.loss != LossKind::LeastSquares)
        throw ArgumentError(std::string(who) + ": defined for the least-squares task only");
}

/// (1/N) sum x~ x~' over the training union, x~ = [x; 1].
Eigen::MatrixXd augmented_gram(const FederatedTask& task) {
    const auto d = static_cast<Eigen::Index>(task.shape.dim);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d + 1, d + 1);
    Eigen::VectorXd x(d + 1);
    for (const auto& dev : task.devices)
        for (std::size_t i = 0; i < dev.size(); ++i) {
            const auto row = dev.x(i);
            for (Eigen::Index j = 0; j < d; ++j)
                x(j) = row[static_cast<std::size_t>(j)];
            x(d) = 1.0;
            A.selfadjointView<Eigen::Lower>().rankUpdate(x);
        }
    A.triangularView<Eigen::StrictlyUpper>() = A.transpose();
    return A / static_cast<double>(task.total_samples());
}

} // namespace

double measure_smoothness(const FederatedTask& task) {
    require_least_squares(task, "measure_smoothness");
    // The Hessian is I_C kron A, so its top eigenvalue is that of A.
    const Eigen::MatrixXd A = augmented_gram(task);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(A.rows()).normalized();
    double lambda = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Eigen::VectorXd next = A * v;
        const double est = v.dot(next);
        v = next.normalized();
        if (std::abs(est - lambda) <= 1e-13 * std::abs(est)) {
            lambda = est;
            break;
        }
        lambda = est;
    }
    return lambda;
}

ModelVector optimal_least_squares_model(const FederatedTask& task) {
    require_least_squares(task, "optimal_least_squares_model");
    const auto d = static_cast<Eigen::Index>(task.shape.dim);
    const auto C = static_cast<Eigen::Index>(task.shape.classes);
    const Eigen::MatrixXd A = augmented_gram(task);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(d + 1, C);
    for (const auto& dev : task.devices)
        for (std::size_t i = 0; i < dev.size(); ++i) {
            const auto row = dev.x(i);
            const auto c = static_cast<Eigen::Index>(dev.labels[i]);
            for (Eigen::Index j = 0; j < d; ++j)
                rhs(j, c) += row[static_cast<std::size_t>(j)];
            rhs(d, c) += 1.0;
        }
    rhs /= static_cast<double>(task.total_samples());
    const Eigen::MatrixXd sol = A.ldlt().solve(rhs); // (d+1) x C

    ModelVector w(task.shape.parameter_count());
    for (Eigen::Index c = 0; c < C; ++c) {
        for (Eigen::Index j = 0; j < d; ++j)
            w[static_cast<std::size_t>(c * d + j)] = sol(j, c);
        w[static_cast<std::size_t>(C * d + c)] = sol(d, c);
    }
    return w;
}

double optimal_least_squares_loss(const FederatedTask& task) {
    return global_loss(task, optimal_least_squares_model(task));
}

double measure_gradient_variance(const FederatedTask& task, std::span<const ModelVector> points,
                                 std::size_t batch, std::size_t draws, numerics::RngStream rng) {
    if (points.empty() || batch < 1 || draws < 1)
        throw ArgumentError("measure_gradient_variance: need points, batch >= 1 and draws >= 1");
    double worst = 0.0;
    ModelVector g(task.shape.parameter_count());
    for (std::size_t p = 0; p < points.size(); ++p) {
        const ModelVector full = global_gradient(task, points[p]);
        for (std::size_t k = 0; k < task.device_count(); ++k) {
            const Dataset& data = task.devices[k];
            const std::size_t b = std::min(batch, data.size());
            std::vector<std::size_t> perm(data.size());
            std::iota(perm.begin(), perm.end(), 0);
            auto r = rng.child(p).child(k);
            double acc = 0.0;
            for (std::size_t n = 0; n < draws; ++n) {
                std::shuffle(perm.begin(), perm.end(), r.engine());
                batch_loss(task.shape, points[p], data, std::span(perm).first(b), g);
                acc += kernels::sq_dist(g, full);
            }
            worst = std::max(worst, acc / static_cast<double>(draws));
        }
    }
    return worst * static_cast<double>(batch);
}

} // namespace airfl::learning
