#pragma once

#include "airfl/channel.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace airfl::optim {

/// Aggregation weights: nonnegative and summing to one.
struct WeightVector {
    std::vector<double> alpha;

    std::size_t size() const { return alpha.size(); }
    double operator[](std::size_t k) const { return alpha[k]; }
    double squared_norm() const;

    static WeightVector uniform(std::size_t devices);
    /// Throws ArgumentError unless alpha >= 0 and |1'alpha - 1| <= tol.
    void validate(double tol = 1e-9) const;
};

/// min alpha' diag(d) alpha  s.t.  alpha' Q alpha <= theta,  alpha on the simplex.
struct WeightProblem {
    Eigen::MatrixXd Q;  // PSD MSE quadratic form (without the model-size factor)
    Eigen::VectorXd d;  // objective diagonal: ones, or 1/B_k for heterogeneous batches
    double theta = 0.0; // MSE budget

    void validate() const;
};

enum class WeightStatus {
    Slack,              // the budget does not bind; alpha minimizes the objective alone
    Active,             // the MSE constraint is active at the solution
    InfeasibleFallback, // min over the simplex of alpha'Q alpha exceeds theta
};

const char* to_string(WeightStatus status);

struct BisectionStep {
    double multiplier;
    double constraint;
};

struct WeightSolution {
    WeightVector weights;
    WeightStatus status;
    double objective;  // alpha' diag(d) alpha
    double constraint; // alpha' Q alpha
    double multiplier; // Lagrange multiplier of the MSE constraint
    std::vector<BisectionStep> trace;
};

/// Euclidean projection onto {alpha >= 0, 1'alpha = 1} (sort and threshold).
WeightVector project_to_simplex(std::span<const double> v);

struct SimplexQpResult {
    Eigen::VectorXd alpha;
    double value;
    int iterations;
};

/// argmin over the simplex of alpha' Q alpha for PSD Q. Accelerated projected
/// gradient with backtracking, then an exact solve on the detected support
/// when it satisfies the KKT conditions.
SimplexQpResult min_quadratic_over_simplex(const Eigen::MatrixXd& Q);

/// Closed form for diagonal Q = diag(d), d > 0: alpha_k proportional to 1/d_k.
SimplexQpResult min_diagonal_quadratic_over_simplex(const Eigen::VectorXd& d);

/// Lagrangian bisection on the MSE multiplier with the simplex QP as inner solve.
WeightSolution solve_weight_selection(const WeightProblem& problem);

/// Outcome of joint device selection and receive equalization.
struct SelectionResult {
    std::vector<std::size_t> active;  // ascending device indices
    Eigen::VectorXcd equalizer;       // b, unit norm (empty if no device feasible)
    double achieved_constraint = 0.0; // max_{k in S} ||b||^2 / |b^H h_k|^2
    double predicted_mse = 0.0;       // (sigma_z^2 / P) * achieved_constraint
    bool empty = true;
};

/// Equalizer for a device subset: dominant eigenvector of sum_{k in S} h_k h_k^H.
/// When the top eigenvalue is degenerate the sum of normalized channels is
/// projected onto the dominant eigenspace. Phase normalized so the first
/// nonzero entry is real positive.
Eigen::VectorXcd dominant_equalizer(const channel::ChannelRealization& channel,
                                    std::span<const std::size_t> subset);

/// max_{k in S} ||b||^2 / |b^H h_k|^2 (infinity if some b^H h_k vanishes).
double selection_constraint(const Eigen::VectorXcd& b, const channel::ChannelRealization& channel,
                            std::span<const std::size_t> subset);

/// Greedy matching-pursuit scheduling: grow S one device at a time, adding the
/// device whose inclusion leaves the smallest constraint, while it stays <= theta.
SelectionResult mp_greedy_selection(const channel::ChannelRealization& channel, double power,
                                    double sigma_z2, double theta);

/// Exhaustive search over all nonempty subsets with the same equalizer rule.
/// Largest feasible set wins, then the smallest constraint. Refuses K > max_devices.
SelectionResult brute_force_selection_oracle(const channel::ChannelRealization& channel,
                                             double power, double sigma_z2, double theta,
                                             std::size_t max_devices = 10);

} // namespace airfl::optim
