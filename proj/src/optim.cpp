#include "airfl/optim.hpp"

#include "airfl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace airfl::optim {

double WeightVector::squared_norm() const {
    return std::inner_product(alpha.begin(), alpha.end(), alpha.begin(), 0.0);
}

WeightVector WeightVector::uniform(std::size_t devices) {
    if (devices == 0)
        throw ArgumentError("WeightVector::uniform: no devices");
    return {std::vector<double>(devices, 1.0 / static_cast<double>(devices))};
}

void WeightVector::validate(double tol) const {
    if (alpha.empty())
        throw ArgumentError("WeightVector: empty");
    double sum = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        if (!std::isfinite(alpha[k]) || alpha[k] < 0.0)
            throw ArgumentError("WeightVector: entry " + std::to_string(k) + " is negative or not finite");
        sum += alpha[k];
    }
    if (std::abs(sum - 1.0) > tol)
        throw ArgumentError("WeightVector: weights sum to " + std::to_string(sum) + ", expected 1");
}

const char* to_string(WeightStatus status) {
    switch (status) {
    case WeightStatus::Slack:
        return "slack";
    case WeightStatus::Active:
        return "active";
    case WeightStatus::InfeasibleFallback:
        return "infeasible_fallback";
    }
    return "?";
}

namespace {

constexpr double kPsdTol = 1e-8;

void require_psd(const Eigen::MatrixXd& Q, const char* who) {
    if (Q.rows() != Q.cols() || Q.rows() == 0)
        throw ArgumentError(std::string(who) + ": matrix must be square and nonempty");
    if (!Q.allFinite())
        throw ArgumentError(std::string(who) + ": matrix has non-finite entries");
    const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > kPsdTol * scale)
        throw ArgumentError(std::string(who) + ": matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Q, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -kPsdTol * scale)
        throw ArgumentError(std::string(who) + ": matrix is not positive semidefinite");
}

Eigen::VectorXd project(const Eigen::VectorXd& v) {
    const auto w = project_to_simplex(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
    return Eigen::Map<const Eigen::VectorXd>(w.alpha.data(), static_cast<Eigen::Index>(w.alpha.size()));
}

// Exact minimizer of a'Aa over {a_S >= 0, 1'a = 1, a_{not S} = 0} if the
// support S found by the first-order method is correct; empty on failure.
bool polish_on_support(const Eigen::MatrixXd& A, Eigen::VectorXd& alpha) {
    const Eigen::Index n = A.rows();
    std::vector<Eigen::Index> support;
    for (Eigen::Index k = 0; k < n; ++k)
        if (alpha(k) > 1e-10)
            support.push_back(k);
    // A few add/drop passes around the detected support.
    for (int pass = 0; pass < 2 * static_cast<int>(n) + 2 && !support.empty(); ++pass) {
        const auto m = static_cast<Eigen::Index>(support.size());
        Eigen::MatrixXd As(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j)
                As(i, j) = A(support[i], support[j]);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(As);
        if (ldlt.info() != Eigen::Success)
            return false;
        const Eigen::VectorXd x = ldlt.solve(Eigen::VectorXd::Ones(m));
        const double denom = x.sum();
        if (!x.allFinite() || !(denom > 0.0))
            return false;
        if (((As * x) - Eigen::VectorXd::Ones(m)).cwiseAbs().maxCoeff() > 1e-8)
            return false;
        Eigen::VectorXd candidate = Eigen::VectorXd::Zero(n);
        bool negative = false;
        for (Eigen::Index i = 0; i < m; ++i) {
            candidate(support[i]) = x(i) / denom;
            negative = negative || candidate(support[i]) < 0.0;
        }
        if (negative) {
            std::erase_if(support, [&](Eigen::Index k) { return candidate(k) < 0.0; });
            continue;
        }
        // KKT: (A a)_k is equal on the support and no smaller off it.
        const Eigen::VectorXd grad = A * candidate;
        const double level = 1.0 / denom;
        Eigen::Index worst = -1;
        double worst_gap = -1e-10 * std::max(1.0, std::abs(level));
        for (Eigen::Index k = 0; k < n; ++k) {
            if (candidate(k) > 0.0)
                continue;
            const double gap = grad(k) - level;
            if (gap < worst_gap) {
                worst_gap = gap;
                worst = k;
            }
        }
        if (worst < 0) {
            alpha = candidate;
            return true;
        }
        support.push_back(worst);
        std::sort(support.begin(), support.end());
    }
    return false;
}

} // namespace

void WeightProblem::validate() const {
    require_psd(Q, "WeightProblem");
    if (d.size() != Q.rows())
        throw ArgumentError("WeightProblem: objective diagonal has wrong length");
    if (!(d.array() > 0.0).all() || !d.allFinite())
        throw ArgumentError("WeightProblem: objective diagonal must be positive");
    if (!(theta > 0.0))
        throw ArgumentError("WeightProblem: theta must be > 0");
}

WeightVector project_to_simplex(std::span<const double> v) {
    if (v.empty())
        throw ArgumentError("project_to_simplex: empty vector");
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double threshold = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        cumulative += sorted[i];
        const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (sorted[i] - t > 0.0)
            threshold = t;
    }
    WeightVector out{std::vector<double>(v.size())};
    for (std::size_t i = 0; i < v.size(); ++i)
        out.alpha[i] = std::max(v[i] - threshold, 0.0);
    return out;
}

SimplexQpResult min_diagonal_quadratic_over_simplex(const Eigen::VectorXd& d) {
    if (d.size() == 0 || !(d.array() > 0.0).all())
        throw ArgumentError("min_diagonal_quadratic_over_simplex: entries must be positive");
    const Eigen::VectorXd inv = d.cwiseInverse();
    const double total = inv.sum();
    Eigen::VectorXd alpha = inv / total;
    return {alpha, 1.0 / total, 0};
}

SimplexQpResult min_quadratic_over_simplex(const Eigen::MatrixXd& Q) {
    require_psd(Q, "min_quadratic_over_simplex");
    const Eigen::Index n = Q.rows();
    const Eigen::MatrixXd A = 0.5 * (Q + Q.transpose());

    // f(a) = a'Aa, grad = 2Aa. FISTA with backtracking and gradient restart.
    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    Eigen::VectorXd y = x;
    double t = 1.0;
    double lipschitz = std::max(2.0 * A.diagonal().maxCoeff(), 1e-12);
    int iter = 0;
    constexpr int kMaxIter = 5000;
    for (; iter < kMaxIter; ++iter) {
        const Eigen::VectorXd grad = 2.0 * (A * y);
        const double fy = y.dot(A * y);
        Eigen::VectorXd next;
        for (int bt = 0; bt < 60; ++bt) {
            next = project(y - grad / lipschitz);
            const Eigen::VectorXd step = next - y;
            const double fn = next.dot(A * next);
            if (fn <= fy + grad.dot(step) + 0.5 * lipschitz * step.squaredNorm() + 1e-15)
                break;
            lipschitz *= 2.0;
        }
        const double change = (next - x).lpNorm<Eigen::Infinity>();
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        Eigen::VectorXd y_next = next + ((t - 1.0) / t_next) * (next - x);
        if ((y - next).dot(next - x) > 0.0) { // restart on non-monotone momentum
            y_next = next;
            t = 1.0;
        } else {
            t = t_next;
        }
        x = std::move(next);
        y = std::move(y_next);
        if (change < 1e-13)
            break;
    }
    polish_on_support(A, x);
    return {x, x.dot(A * x), iter};
}

WeightSolution solve_weight_selection(const WeightProblem& problem) {
    problem.validate();
    const Eigen::MatrixXd& Q = problem.Q;
    const Eigen::VectorXd& d = problem.d;
    const double theta = problem.theta;

    auto to_weights = [](const Eigen::VectorXd& a) {
        // Clean the projection's round-off so the simplex invariant holds tightly.
        std::vector<double> w(static_cast<std::size_t>(a.size()));
        double sum = 0.0;
        for (Eigen::Index k = 0; k < a.size(); ++k) {
            w[static_cast<std::size_t>(k)] = std::max(a(k), 0.0);
            sum += w[static_cast<std::size_t>(k)];
        }
        for (auto& v : w)
            v /= sum;
        return WeightVector{std::move(w)};
    };
    auto finish = [&](const Eigen::VectorXd& a, WeightStatus status, double lambda,
                      std::vector<BisectionStep> trace) {
        WeightVector w = to_weights(a);
        const Eigen::Map<const Eigen::VectorXd> wa(w.alpha.data(), a.size());
        return WeightSolution{std::move(w), status, wa.dot(d.asDiagonal() * wa), wa.dot(Q * wa),
                              lambda, std::move(trace)};
    };

    std::vector<BisectionStep> trace;
    const auto unconstrained = min_diagonal_quadratic_over_simplex(d);
    const double g0 = unconstrained.alpha.dot(Q * unconstrained.alpha);
    trace.push_back({0.0, g0});
    if (g0 <= theta)
        return finish(unconstrained.alpha, WeightStatus::Slack, 0.0, std::move(trace));

    const auto min_mse = min_quadratic_over_simplex(Q);
    if (min_mse.value > theta)
        return finish(min_mse.alpha, WeightStatus::InfeasibleFallback,
                      std::numeric_limits<double>::infinity(), std::move(trace));

    const Eigen::MatrixXd D = d.asDiagonal();
    auto inner = [&](double lambda) {
        Eigen::MatrixXd A = D + lambda * Q;
        auto r = min_quadratic_over_simplex(A);
        const double g = r.alpha.dot(Q * r.alpha);
        trace.push_back({lambda, g});
        return std::pair{r.alpha, g};
    };

    // Bracket: grow the multiplier until the constraint holds.
    double lo = 0.0;
    double hi = 1.0 / std::max(Q.diagonal().maxCoeff(), 1e-300) * d.maxCoeff();
    auto [alpha_hi, g_hi] = inner(hi);
    int grow = 0;
    while (g_hi > theta && grow < 200) {
        lo = hi;
        hi *= 4.0;
        std::tie(alpha_hi, g_hi) = inner(hi);
        ++grow;
    }
    if (g_hi > theta) // budget only reachable in the limit; the min-MSE point is feasible
        return finish(min_mse.alpha, WeightStatus::Active, std::numeric_limits<double>::infinity(),
                      std::move(trace));

    constexpr int kMaxBisections = 200;
    constexpr double kActiveTol = 1e-6;
    for (int i = 0; i < kMaxBisections; ++i) {
        if (theta - g_hi <= kActiveTol * theta)
            break;
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi))
            break;
        auto [alpha_mid, g_mid] = inner(mid);
        if (g_mid > theta) {
            lo = mid;
        } else {
            hi = mid;
            alpha_hi = std::move(alpha_mid);
            g_hi = g_mid;
        }
    }
    return finish(alpha_hi, WeightStatus::Active, hi, std::move(trace));
}

Eigen::VectorXcd dominant_equalizer(const channel::ChannelRealization& channel,
                                    std::span<const std::size_t> subset) {
    const auto M = static_cast<Eigen::Index>(channel.antennas());
    if (subset.empty())
        throw ArgumentError("dominant_equalizer: empty subset");
    Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(M, M);
    Eigen::VectorXcd direction_sum = Eigen::VectorXcd::Zero(M);
    for (std::size_t k : subset) {
        const auto row = channel.row(k);
        const Eigen::Map<const Eigen::VectorXcd> h(row.data(), M);
        R.noalias() += h * h.adjoint();
        const double norm = h.norm();
        if (norm > 0.0)
            direction_sum += h / norm;
    }
    Eigen::VectorXcd b;
    if (M == 1) {
        b = Eigen::VectorXcd::Ones(1);
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(R);
        const Eigen::VectorXd& values = eig.eigenvalues();
        const double top = values(M - 1);
        Eigen::Index first = M - 1;
        while (first > 0 && values(first - 1) >= top * (1.0 - 1e-9))
            --first;
        if (first == M - 1) {
            b = eig.eigenvectors().col(M - 1);
        } else {
            const Eigen::MatrixXcd U = eig.eigenvectors().rightCols(M - first);
            b = U * (U.adjoint() * direction_sum);
            if (b.norm() < 1e-12)
                b = U.col(U.cols() - 1);
        }
    }
    b /= b.norm();
    for (Eigen::Index m = 0; m < M; ++m) {
        if (std::abs(b(m)) > 1e-12) {
            b *= std::conj(b(m)) / std::abs(b(m));
            break;
        }
    }
    return b;
}

double selection_constraint(const Eigen::VectorXcd& b, const channel::ChannelRealization& channel,
                            std::span<const std::size_t> subset) {
    const auto M = static_cast<Eigen::Index>(channel.antennas());
    const double bnorm2 = b.squaredNorm();
    double worst = 0.0;
    for (std::size_t k : subset) {
        const auto row = channel.row(k);
        const Eigen::Map<const Eigen::VectorXcd> h(row.data(), M);
        const double gain = std::norm(b.dot(h)); // |b^H h|^2
        if (gain == 0.0)
            return std::numeric_limits<double>::infinity();
        worst = std::max(worst, bnorm2 / gain);
    }
    return worst;
}

namespace {

void validate_selection_args(double power, double sigma_z2, double theta, const char* who) {
    if (!(power > 0.0))
        throw ArgumentError(std::string(who) + ": P must be > 0");
    if (!(sigma_z2 >= 0.0))
        throw ArgumentError(std::string(who) + ": sigma_z2 must be >= 0");
    if (!(theta > 0.0))
        throw ArgumentError(std::string(who) + ": theta must be > 0");
}

SelectionResult make_result(std::vector<std::size_t> active, Eigen::VectorXcd b, double constraint,
                            double power, double sigma_z2) {
    SelectionResult r;
    r.empty = active.empty();
    r.active = std::move(active);
    r.equalizer = std::move(b);
    r.achieved_constraint = r.empty ? 0.0 : constraint;
    r.predicted_mse = r.empty ? 0.0 : sigma_z2 / power * constraint;
    return r;
}

} // namespace

SelectionResult mp_greedy_selection(const channel::ChannelRealization& channel, double power,
                                    double sigma_z2, double theta) {
    validate_selection_args(power, sigma_z2, theta, "mp_greedy_selection");
    const std::size_t K = channel.devices();
    std::vector<std::size_t> selected;
    std::vector<bool> in_set(K, false);
    Eigen::VectorXcd best_b;
    double best_constraint = 0.0;
    while (selected.size() < K) {
        std::size_t pick = K;
        double pick_constraint = std::numeric_limits<double>::infinity();
        Eigen::VectorXcd pick_b;
        for (std::size_t k = 0; k < K; ++k) {
            if (in_set[k])
                continue;
            std::vector<std::size_t> trial = selected;
            trial.insert(std::upper_bound(trial.begin(), trial.end(), k), k);
            Eigen::VectorXcd b = dominant_equalizer(channel, trial);
            const double c = selection_constraint(b, channel, trial);
            if (c < pick_constraint) {
                pick = k;
                pick_constraint = c;
                pick_b = std::move(b);
            }
        }
        if (pick == K || !(pick_constraint <= theta))
            break;
        selected.insert(std::upper_bound(selected.begin(), selected.end(), pick), pick);
        in_set[pick] = true;
        best_b = std::move(pick_b);
        best_constraint = pick_constraint;
    }
    return make_result(std::move(selected), std::move(best_b), best_constraint, power, sigma_z2);
}

SelectionResult brute_force_selection_oracle(const channel::ChannelRealization& channel,
                                             double power, double sigma_z2, double theta,
                                             std::size_t max_devices) {
    validate_selection_args(power, sigma_z2, theta, "brute_force_selection_oracle");
    const std::size_t K = channel.devices();
    if (K > max_devices || K > 20)
        throw ArgumentError("brute_force_selection_oracle: K = " + std::to_string(K) +
                            " exceeds the enumeration limit");
    std::vector<std::size_t> best;
    Eigen::VectorXcd best_b;
    double best_c = std::numeric_limits<double>::infinity();
    const std::uint32_t limit = 1u << K;
    std::vector<std::size_t> subset;
    for (std::uint32_t mask = 1; mask < limit; ++mask) {
        subset.clear();
        for (std::size_t k = 0; k < K; ++k)
            if (mask & (1u << k))
                subset.push_back(k);
        if (subset.size() < best.size())
            continue;
        Eigen::VectorXcd b = dominant_equalizer(channel, subset);
        const double c = selection_constraint(b, channel, subset);
        if (!(c <= theta))
            continue;
        const bool larger = subset.size() > best.size();
        const bool tighter = subset.size() == best.size() && c < best_c;
        const bool tie_lower = subset.size() == best.size() && c == best_c && subset < best;
        if (larger || tighter || tie_lower) {
            best = subset;
            best_b = std::move(b);
            best_c = c;
        }
    }
    return make_result(std::move(best), std::move(best_b), best_c, power, sigma_z2);
}

} // namespace airfl::optim
