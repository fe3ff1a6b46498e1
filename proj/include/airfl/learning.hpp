#pragma once

#include "airfl/channel.hpp"
#include "airfl/numerics.hpp"
#include "airfl/optim.hpp"
#include "airfl/schemes.hpp"

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace airfl::learning {

enum class LossKind { LeastSquares, Logistic, Perceptron };

const char* to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

/// Row-major features with integer class labels.
struct Dataset {
    std::size_t dim = 0;
    std::vector<double> features;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    std::span<const double> x(std::size_t i) const { return {features.data() + i * dim, dim}; }
};

/// Parameter layout of the model family. Linear models store W (C x dim)
/// then b (C); the perceptron stores W1 (H x dim), b1 (H), W2 (C x H), b2 (C).
struct ModelShape {
    LossKind loss = LossKind::Logistic;
    std::size_t classes = 2;
    std::size_t dim = 1;
    std::size_t hidden = 16;

    std::size_t parameter_count() const;
};

struct FederatedTask {
    ModelShape shape;
    std::vector<Dataset> devices;
    Dataset test;
    std::size_t classes_per_device = 2;

    std::size_t device_count() const { return devices.size(); }
    std::size_t total_samples() const;
};

struct TaskSpec {
    std::size_t devices = 30;
    std::size_t classes = 10;
    std::size_t dim = 20;
    std::size_t samples_per_device = 100; // geometric center of the 4x size range
    std::size_t classes_per_device = 2;
    std::size_t test_samples = 2000;
    double separation = 0.5; // class-mean scale
    double noise_std = 1.0;  // within-class spread
    LossKind loss = LossKind::Logistic;
    std::size_t hidden = 16;
};

/// Gaussian class clusters; each device holds exactly classes_per_device
/// classes (assigned greedily to the least-represented classes so global
/// class frequencies stay balanced) and a size drawn log-uniformly over
/// [n/2, 2n].
FederatedTask generate_synthetic_task(numerics::RngStream rng, const TaskSpec& spec);

/// Loss of one sample; accumulates its gradient into grad when non-empty.
double sample_loss(const ModelShape& shape, std::span<const double> params, std::span<const double> x,
                   int label, std::span<double> grad);

/// Mean loss over the given sample indices; grad (if nonempty) receives the
/// mean gradient (overwritten).
double batch_loss(const ModelShape& shape, std::span<const double> params, const Dataset& data,
                  std::span<const std::size_t> indices, std::span<double> grad);

double dataset_loss(const ModelShape& shape, std::span<const double> params, const Dataset& data);
double accuracy(const ModelShape& shape, std::span<const double> params, const Dataset& data);

/// F(w) over the union of all device datasets, and its gradient.
double global_loss(const FederatedTask& task, std::span<const double> params);
ModelVector global_gradient(const FederatedTask& task, std::span<const double> params);

/// Zeros for linear models; U(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and
/// zero biases for the perceptron.
ModelVector initial_model(const ModelShape& shape, numerics::RngStream rng);

/// tau mini-batch SGD steps; batches drawn without replacement from a
/// per-device permutation that is reshuffled when exhausted.
ModelVector local_sgd(const ModelShape& shape, const ModelVector& model, const Dataset& data,
                      double mu, std::size_t tau, std::size_t batch, numerics::RngStream rng);

enum class LrSchedule { Constant, Diminishing };

struct TrainingConfig {
    double mu = 0.1;
    std::size_t tau = 3;
    std::size_t rounds = 100;
    std::size_t batch = 16;
    LrSchedule schedule = LrSchedule::Constant;
    double lr_theta = 1.0; // mu_t = lr_theta / t for the diminishing schedule

    void validate() const;
    /// Step size in round t (0-based); the diminishing schedule uses t + 1.
    double step_size(std::size_t round) const;
};

struct HeterogeneityProfile {
    std::vector<double> speeds;
    std::vector<std::size_t> batch_sizes;
    std::vector<double> weight_target; // b_w = B_k / B_tot
    std::vector<double> noise_scale;   // b_s = 1 / B_k
};

/// B_k = max(1, round(B_ref f_min / f_k)): the slowest device keeps B_ref.
HeterogeneityProfile assign_heterogeneous_batches(std::span<const double> speeds, std::size_t batch_ref);

/// Exact sum_k alpha_k w_k.
ModelVector ideal_orthogonal_aggregate(std::span<const ModelVector> local_models,
                                       const optim::WeightVector& weights);

struct RadioSettings {
    double power = 10.0;
    double sigma_z2 = 1.0;
    double sigma_h2 = 1.0;
};

struct RoundStats {
    std::size_t round = 0;
    double loss = 0.0;     // F(w_G^{t+1}) on the training union
    double accuracy = 0.0; // on the held-out test set
    double agg_error = 0.0; // ||w_G - target||
    std::optional<double> predicted_mse;
    std::size_t active_set = 0;
    double weight_norm = 0.0; // ||alpha||_2 of the weights actually applied
    bool empty_active_set = false;
    bool solver_fallback = false;
    double grad_sq_norm = 0.0; // ||grad F(w_G^t)||^2 at the start of the round
    std::vector<double> weights; // alpha used this round
};

struct RunOptions {
    std::optional<HeterogeneityProfile> heterogeneity;
    /// Called with each round's channel before aggregation.
    std::function<void(std::size_t, const channel::ChannelRealization&)> channel_observer;
    bool keep_global_models = false;
    bool unit_channels = false; // h_{k,m} = 1 every round instead of Rayleigh draws
};

struct TrainingTrace {
    std::vector<RoundStats> rounds;
    std::vector<ModelVector> global_models; // w_G^0 .. w_G^T when kept
};

/// Scheme failure mid-run; carries the rounds completed before it.
class TrainingAborted : public std::runtime_error {
public:
    TrainingAborted(const std::string& what, std::vector<RoundStats> completed)
        : std::runtime_error(what), completed_(std::move(completed)) {}

    const std::vector<RoundStats>& completed() const { return completed_; }

private:
    std::vector<RoundStats> completed_;
};

/// FedAvg with the aggregation step replaced by the given scheme. Stream
/// layout under rng: child(kInitStream) initial model; child(kRoundStream)
/// .child(t) per round, with channel, noise, phase and per-device SGD
/// substreams, so every scheme sees the same draws.
TrainingTrace run_federated_training(const FederatedTask& task, const schemes::SchemeConfig& scheme,
                                     const TrainingConfig& cfg, const RadioSettings& radio,
                                     const numerics::RngStream& rng, const RunOptions& options = {});

inline constexpr std::uint64_t kTaskStream = 1;
inline constexpr std::uint64_t kInitStream = 2;
inline constexpr std::uint64_t kRoundStream = 3;

// ---------------------------------------------------------------------------
// Convergence bounds.

enum class BoundKind { GlobalCsit, Wafel, WafelHeterogeneous, PartialPhase };

const char* to_string(BoundKind kind);

struct BoundConstants {
    double L = 1.0;            // smoothness
    double sigma_g2 = 0.0;     // stochastic-gradient variance bound (per sample)
    double gamma = 0.0;        // strong convexity
    double G = 0.0;            // per-device gradient bound
    double C = 0.0;            // alpha-moment bound of the interference
    double omega = 0.0;        // mean compensated channel
    double sigma2_h_comp = 0.0; // variance of the compensated channel
    double gamma_n = 1.0;      // fully-blind constant
    double loss_gap = 0.0;     // F(w_G^0) - F(w*)
    double tail_alpha = 2.0;   // interference tail index
    std::size_t model_size = 1;
    std::size_t devices = 1;
};

struct BoundRound {
    double mse = 0.0;
    std::size_t active = 0;    // |S_t| (global CSIT)
    std::vector<double> alpha; // alpha_t (weighted kinds)
};

struct BoundValue {
    double value = 0.0;          // averaged-gradient bound (FedAvg-style kinds)
    std::vector<double> series;  // per-round envelope (partial-phase), t = 1..T
};

/// Throws PreconditionError when the step-size condition (or, for the
/// partial-phase kind, lr_theta > (alpha - 1)/(omega L)) does not hold.
BoundValue eval_convergence_bound(BoundKind kind, const BoundConstants& constants,
                                  const TrainingConfig& cfg, std::span<const BoundRound> rounds,
                                  std::span<const double> inverse_batches = {});

/// 1 - (L^2 mu^2 / 2) tau (tau - 1) - L mu tau
double step_size_margin(double L, double mu, std::size_t tau);

/// Largest eigenvalue of the least-squares Hessian, by power iteration.
double measure_smoothness(const FederatedTask& task);

/// argmin_w F(w) for the least-squares task, from the normal equations.
ModelVector optimal_least_squares_model(const FederatedTask& task);
double optimal_least_squares_loss(const FederatedTask& task);

/// B * max over devices and points of E||grad F_k(w, xi_B) - grad F(w)||^2,
/// estimated with `draws` mini-batches per (device, point).
double measure_gradient_variance(const FederatedTask& task, std::span<const ModelVector> points,
                                 std::size_t batch, std::size_t draws, numerics::RngStream rng);

} // namespace airfl::learning
