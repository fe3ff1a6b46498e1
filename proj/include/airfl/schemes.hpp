#pragma once

#include "airfl/channel.hpp"
#include "airfl/numerics.hpp"
#include "airfl/optim.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace airfl::schemes {

/// Everything the air interface sees in one round.
struct AggregationInput {
    std::span<const ModelVector> local_models; // w_k, k = 0..K-1
    const channel::ChannelRealization& channel; // the physical channel
    const channel::CsiView& csi;                // what the scheme may know
    const channel::RoundNoise& noise;
    double power;    // per-device transmit budget P
    double sigma_z2; // AWGN variance E|z|^2, known to the server

    std::size_t devices() const { return local_models.size(); }
    std::size_t model_size() const { return local_models.empty() ? 0 : local_models[0].size(); }
    void validate(std::size_t required_antennas) const;
};

struct AggregationOutcome {
    ModelVector global_model;
    std::vector<std::size_t> active_set;
    std::optional<optim::WeightVector> weights; // nullopt: uniform over active_set
    std::optional<double> predicted_mse;
    bool empty_active_set = false;
    bool solver_fallback = false;
    /// What the scheme is trying to reproduce this round: the mean over the
    /// active set, the weighted sum, or the plain mean for the blind schemes.
    ModelVector target;
};

/// Per-device mean and population standard deviation of the model entries.
struct NormalizationStats {
    std::vector<double> eta;
    std::vector<double> sigma; // clamped to at least kSigmaFloor
    std::vector<bool> degenerate; // sigma was below the floor; transmit zeros

    static constexpr double kSigmaFloor = 1e-12;
};

NormalizationStats normalization_stats(std::span<const ModelVector> models);

/// (w - eta 1) / sigma, or zeros for a degenerate (constant) vector.
ModelVector normalize(const ModelVector& w, double eta, double sigma, bool degenerate);

// ---------------------------------------------------------------------------
// Local CSIT: truncated channel inversion, single-antenna server.

/// rho = P / E1(theta): the largest scale meeting E|p_k|^2 = P under Rayleigh
/// fading with unit mean gain.
double truncated_inversion_rho(double theta, double power);

/// p_k from device k's own channel only: sqrt(rho)/|h| e^{-j angle h} when
/// |h|^2 >= theta, else 0.
Complex truncated_inversion_precoder(Complex own_channel, double theta, double rho);

AggregationOutcome local_csit_aggregate(const AggregationInput& input, double theta,
                                        const ModelVector& prev_global);

/// Monte-Carlo average transmit power of truncated inversion over Rayleigh
/// draws with |h|^2 ~ Exp(1). Silent rounds count as zero power, which is the
/// average that rho = P / E1(theta) pins to P.
double expected_power_check(double theta, double power, std::size_t trials,
                            numerics::RngStream rng);

// ---------------------------------------------------------------------------
// Global CSIT: normalized transmission with MSE-optimal power control.

struct GlobalSelection {
    std::vector<std::size_t> active;
    Eigen::VectorXcd equalizer;
};

AggregationOutcome global_csit_aggregate(const AggregationInput& input,
                                         const GlobalSelection& selection,
                                         const ModelVector& prev_global);

/// (sigma_z^2 / P) max_{k in S} ||b||^2 / |b^H h_k|^2; +inf if some b^H h_k = 0.
double predicted_mse_global(const Eigen::VectorXcd& b, std::span<const std::size_t> active,
                            const channel::ChannelRealization& channel, double power,
                            double sigma_z2);

// ---------------------------------------------------------------------------
// Fully blind: constant power, massive-array matched combining.

AggregationOutcome fully_blind_aggregate(const AggregationInput& input,
                                         const ModelVector& prev_global);

/// Smallest M with M >= 8 gamma_n^2 K^2 / (eps^2 c_n^2) ln(6K/delta),
/// c_n = 1/gamma_n + sigma_h/sigma_z.
std::size_t min_antennas_bound(double epsilon, double prob_delta, std::size_t devices,
                               double gamma_n, double sigma_h, double sigma_z);

// ---------------------------------------------------------------------------
// Partial-phase-aware blind: quadrant phase compensation, no receiver processing.

AggregationOutcome partial_phase_blind_aggregate(const AggregationInput& input,
                                                 const ModelVector& prev_global);

/// Compensated real channel gains |h_k| cos(angle h_k - phase estimate_k).
std::vector<double> compensated_gains(const channel::CsiView& view);

// ---------------------------------------------------------------------------
// Weighted aggregation (single-antenna server).

/// Real-stacked effective channel H = [Re h~'; Im h~'] with
/// h~_k = h_k e^{-j phase estimate_k}.
Eigen::Matrix<double, 2, Eigen::Dynamic> stacked_channel(const channel::CsiView& view);

/// diag(sigma) (I + (P/N) H'H)^{-1} diag(sigma), N the noise variance per real
/// dimension. N = 0 gives diag(sigma)(I - H^+ H)diag(sigma).
Eigen::MatrixXd wafel_mse_matrix(std::span<const double> sigma,
                                 const Eigen::Matrix<double, 2, Eigen::Dynamic>& H, double power,
                                 double noise_var_real);

/// b' = (alpha . sigma)' H' ((N/P) I + H H')^{-1}
Eigen::Vector2d wafel_equalizer(std::span<const double> alpha, std::span<const double> sigma,
                                const Eigen::Matrix<double, 2, Eigen::Dynamic>& H, double power,
                                double noise_var_real);

/// s alpha' diag(sigma)(I + (P/N) H'H)^{-1} diag(sigma) alpha
double wafel_predicted_mse(std::span<const double> alpha, std::span<const double> sigma,
                           const Eigen::Matrix<double, 2, Eigen::Dynamic>& H, double power,
                           double noise_var_real, std::size_t model_size);

AggregationOutcome wafel_aggregate(const AggregationInput& input, const optim::WeightVector& alpha,
                                   const ModelVector& prev_global);

// ---------------------------------------------------------------------------
// Scheme selection.

struct IdealConfig {};
struct LocalCsitConfig {
    double threshold = 0.2; // gain threshold theta on |h_k|^2
};
struct GlobalCsitConfig {
    std::size_t antennas = 4;
    double threshold = 1.0; // bound on max ||b||^2/|b^H h_k|^2
};
struct FullyBlindConfig {
    std::size_t antennas = 64;
};
struct PartialPhaseConfig {
    double phase_error_bound = 0.7853981633974483;
    std::optional<channel::Interference> interference;
};
struct WafelConfig {
    double mse_budget = 1e-6; // absolute, in the units of the normalized-model MSE per entry
    double phase_error_bound = 0.7853981633974483;
    bool fixed_uniform = false; // skip weight selection (noiseless-collapse checks)
};

using SchemeConfig = std::variant<IdealConfig, LocalCsitConfig, GlobalCsitConfig, FullyBlindConfig,
                                  PartialPhaseConfig, WafelConfig>;

std::string scheme_id(const SchemeConfig& cfg);
std::size_t scheme_antennas(const SchemeConfig& cfg);
channel::CsiKind scheme_csi_kind(const SchemeConfig& cfg);
/// Throws ArgumentError on out-of-range parameters.
void validate_scheme(const SchemeConfig& cfg);

} // namespace airfl::schemes
