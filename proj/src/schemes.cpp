#include "airfl/schemes.hpp"

#include "airfl/errors.hpp"
#include "airfl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace airfl::schemes {

using channel::ChannelRealization;
using channel::CsiKind;
using Stacked = Eigen::Matrix<double, 2, Eigen::Dynamic>;

void AggregationInput::validate(std::size_t required_antennas) const {
    if (local_models.empty())
        throw ArgumentError("aggregation: no local models");
    const std::size_t s = local_models[0].size();
    for (const auto& w : local_models)
        if (w.size() != s)
            throw ArgumentError("aggregation: local models differ in dimension");
    if (channel.devices() != local_models.size())
        throw ArgumentError("aggregation: channel has " + std::to_string(channel.devices()) +
                            " devices, got " + std::to_string(local_models.size()) + " models");
    if (required_antennas != 0 && channel.antennas() != required_antennas)
        throw UnsupportedConfiguration("aggregation: scheme requires M = " +
                                       std::to_string(required_antennas) + ", channel has M = " +
                                       std::to_string(channel.antennas()));
    if (noise.awgn.rows != channel.antennas() || noise.awgn.cols != s)
        throw ArgumentError("aggregation: noise block must be M x s");
    if (!(power > 0.0))
        throw ArgumentError("aggregation: power budget must be > 0");
    if (!(sigma_z2 >= 0.0))
        throw ArgumentError("aggregation: sigma_z2 must be >= 0");
}

namespace {

ModelVector mean_over(std::span<const ModelVector> models, std::span<const std::size_t> subset) {
    ModelVector out(models[0].size(), 0.0);
    for (std::size_t k : subset)
        kernels::axpy(1.0, models[k], out);
    const double inv = 1.0 / static_cast<double>(subset.size());
    for (auto& v : out)
        v *= inv;
    return out;
}

std::vector<std::size_t> all_devices(std::size_t K) {
    std::vector<std::size_t> idx(K);
    for (std::size_t k = 0; k < K; ++k)
        idx[k] = k;
    return idx;
}

void require_csi(const channel::CsiView& view, CsiKind kind, const char* who) {
    if (view.kind() != kind)
        throw ArgumentError(std::string(who) + ": expects a " + channel::to_string(kind) +
                            " view, got " + channel::to_string(view.kind()));
}

AggregationOutcome carry_forward(const ModelVector& prev_global, ModelVector target) {
    AggregationOutcome out;
    out.global_model = prev_global;
    out.empty_active_set = true;
    out.target = std::move(target);
    return out;
}

} // namespace

NormalizationStats normalization_stats(std::span<const ModelVector> models) {
    NormalizationStats stats;
    stats.eta.reserve(models.size());
    stats.sigma.reserve(models.size());
    stats.degenerate.reserve(models.size());
    for (const auto& w : models) {
        if (w.empty())
            throw ArgumentError("normalization_stats: empty model vector");
        const double n = static_cast<double>(w.size());
        double mean = 0.0;
        for (double v : w)
            mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : w)
            var += (v - mean) * (v - mean);
        var /= n;
        const double sd = std::sqrt(var);
        const bool degenerate = !(sd >= NormalizationStats::kSigmaFloor);
        stats.eta.push_back(mean);
        stats.sigma.push_back(degenerate ? NormalizationStats::kSigmaFloor : sd);
        stats.degenerate.push_back(degenerate);
    }
    return stats;
}

ModelVector normalize(const ModelVector& w, double eta, double sigma, bool degenerate) {
    ModelVector out(w.size(), 0.0);
    if (!degenerate)
        kernels::affine(1.0 / sigma, -eta / sigma, w, out);
    return out;
}

// ---------------------------------------------------------------------------

double truncated_inversion_rho(double theta, double power) {
    if (!(theta > 0.0))
        throw ArgumentError("truncated inversion: theta must be > 0");
    if (!(power > 0.0))
        throw ArgumentError("truncated inversion: P must be > 0");
    return power / numerics::exp_integral_upper(theta);
}

Complex truncated_inversion_precoder(Complex own_channel, double theta, double rho) {
    const double gain = std::norm(own_channel);
    if (!(gain >= theta) || gain == 0.0)
        return {0.0, 0.0};
    return std::sqrt(rho) / std::abs(own_channel) * std::polar(1.0, -std::arg(own_channel));
}

AggregationOutcome local_csit_aggregate(const AggregationInput& input, double theta,
                                        const ModelVector& prev_global) {
    input.validate(1);
    require_csi(input.csi, CsiKind::LocalCsit, "local_csit_aggregate");
    const std::size_t K = input.devices();
    const std::size_t s = input.model_size();
    const double rho = truncated_inversion_rho(theta, input.power);

    std::vector<std::size_t> active;
    channel::ComplexBlock y(1, s);
    for (std::size_t k = 0; k < K; ++k) {
        const Complex p = truncated_inversion_precoder(input.csi.own_channel(k)[0], theta, rho);
        if (p == Complex(0.0, 0.0))
            continue;
        active.push_back(k);
        const Complex gain = input.channel(k, 0) * p;
        kernels::caxpy(gain.real(), gain.imag(), input.local_models[k], y.re_row(0), y.im_row(0));
    }
    if (active.empty())
        return carry_forward(prev_global, mean_over(input.local_models, all_devices(K)));

    AggregationOutcome out;
    out.global_model.assign(s, 0.0);
    const double scale = 1.0 / (std::sqrt(rho) * static_cast<double>(active.size()));
    const auto z = input.noise.awgn.re_row(0);
    for (std::size_t i = 0; i < s; ++i)
        out.global_model[i] = scale * (y.re[i] + z[i]);
    out.target = mean_over(input.local_models, active);
    // Real part of z / (sqrt(rho)|S|), summed over the s entries.
    out.predicted_mse = static_cast<double>(s) * 0.5 * input.sigma_z2 /
                        (rho * static_cast<double>(active.size() * active.size()));
    out.active_set = std::move(active);
    return out;
}

double expected_power_check(double theta, double power, std::size_t trials,
                            numerics::RngStream rng) {
    const double rho = truncated_inversion_rho(theta, power);
    double total = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto h = numerics::sample_complex_gaussian(rng, 1, 1.0)[0];
        total += std::norm(truncated_inversion_precoder(h, theta, rho));
    }
    return total / static_cast<double>(trials);
}

// ---------------------------------------------------------------------------

double predicted_mse_global(const Eigen::VectorXcd& b, std::span<const std::size_t> active,
                            const ChannelRealization& channel, double power, double sigma_z2) {
    if (active.empty())
        throw ArgumentError("predicted_mse_global: empty active set");
    if (!(power > 0.0))
        throw ArgumentError("predicted_mse_global: P must be > 0");
    const double worst = optim::selection_constraint(b, channel, active);
    if (std::isinf(worst))
        return std::numeric_limits<double>::infinity();
    return sigma_z2 / power * worst;
}

AggregationOutcome global_csit_aggregate(const AggregationInput& input,
                                         const GlobalSelection& selection,
                                         const ModelVector& prev_global) {
    input.validate(0);
    require_csi(input.csi, CsiKind::GlobalCsit, "global_csit_aggregate");
    const auto& channel = input.csi.global();
    const std::size_t M = channel.antennas();
    const std::size_t s = input.model_size();
    const auto& S = selection.active;
    if (S.empty())
        return carry_forward(prev_global, mean_over(input.local_models, all_devices(input.devices())));
    if (static_cast<std::size_t>(selection.equalizer.size()) != M || !selection.equalizer.allFinite())
        throw ArgumentError("global_csit_aggregate: equalizer must be a finite M-vector");
    const Eigen::VectorXcd& b = selection.equalizer;

    std::vector<ModelVector> chosen;
    chosen.reserve(S.size());
    for (std::size_t k : S)
        chosen.push_back(input.local_models[k]);
    const auto stats = normalization_stats(chosen);
    double sigma_bar = 0.0;
    double eta_bar = 0.0;
    for (std::size_t i = 0; i < S.size(); ++i) {
        sigma_bar += stats.sigma[i];
        eta_bar += stats.eta[i];
    }
    sigma_bar /= static_cast<double>(S.size());
    eta_bar /= static_cast<double>(S.size());

    // b^H h_k, and the amplitude share sigma_k / sigma_bar each device carries.
    std::vector<Complex> effective(S.size());
    std::vector<double> share(S.size());
    double rho = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < S.size(); ++i) {
        const auto row = channel.row(S[i]);
        const Eigen::Map<const Eigen::VectorXcd> h(row.data(), static_cast<Eigen::Index>(M));
        effective[i] = b.dot(h);
        if (std::norm(effective[i]) == 0.0)
            throw DegenerateEqualizer("global_csit_aggregate: b^H h_k = 0 for device " +
                                      std::to_string(S[i]));
        share[i] = stats.degenerate[i] ? 0.0 : stats.sigma[i] / sigma_bar;
        if (share[i] > 0.0)
            rho = std::min(rho, input.power * std::norm(effective[i]) / (share[i] * share[i]));
    }
    if (std::isinf(rho)) // every model is constant: nothing rides the air
        rho = input.power;

    channel::ComplexBlock y(M, s);
    for (std::size_t i = 0; i < S.size(); ++i) {
        if (share[i] == 0.0)
            continue;
        const Complex p = std::sqrt(rho) * share[i] * std::conj(effective[i]) / std::norm(effective[i]);
        const ModelVector xbar = normalize(chosen[i], stats.eta[i], stats.sigma[i], false);
        for (std::size_t m = 0; m < M; ++m) {
            const Complex g = channel(S[i], m) * p;
            kernels::caxpy(g.real(), g.imag(), xbar, y.re_row(m), y.im_row(m));
        }
    }
    ModelVector combined(s, 0.0);
    for (std::size_t m = 0; m < M; ++m) {
        kernels::axpy(1.0, input.noise.awgn.re_row(m), y.re_row(m));
        kernels::axpy(1.0, input.noise.awgn.im_row(m), y.im_row(m));
        const Complex g = std::conj(b(static_cast<Eigen::Index>(m)));
        kernels::real_cmul_acc(g.real(), g.imag(), y.re_row(m), y.im_row(m), combined);
    }

    AggregationOutcome out;
    out.global_model.resize(s);
    kernels::affine(sigma_bar / (std::sqrt(rho) * static_cast<double>(S.size())), eta_bar, combined,
                    out.global_model);
    out.active_set = S;
    // Normalized-symbol MSE sigma_z^2 ||b||^2 / rho; equals predicted_mse_global
    // when every sigma_k matches sigma_bar.
    out.predicted_mse = input.sigma_z2 * b.squaredNorm() / rho;
    out.target = mean_over(input.local_models, S);
    return out;
}

// ---------------------------------------------------------------------------

AggregationOutcome fully_blind_aggregate(const AggregationInput& input,
                                         const ModelVector& prev_global) {
    (void)prev_global;
    input.validate(0);
    require_csi(input.csi, CsiKind::CsirOnly, "fully_blind_aggregate");
    const auto& channel = input.csi.server();
    const std::size_t K = input.devices();
    const std::size_t M = channel.antennas();
    const std::size_t s = input.model_size();
    const double amp = std::sqrt(input.power);

    ModelVector combined(s, 0.0);
    std::vector<double> y_re(s);
    std::vector<double> y_im(s);
    for (std::size_t m = 0; m < M; ++m) {
        const auto z_re = input.noise.awgn.re_row(m);
        const auto z_im = input.noise.awgn.im_row(m);
        std::copy(z_re.begin(), z_re.end(), y_re.begin());
        std::copy(z_im.begin(), z_im.end(), y_im.begin());
        Complex column_sum(0.0, 0.0);
        for (std::size_t k = 0; k < K; ++k) {
            const Complex h = input.channel(k, m);
            kernels::caxpy(amp * h.real(), amp * h.imag(), input.local_models[k], y_re, y_im);
            column_sum += channel(k, m);
        }
        const Complex g = std::conj(column_sum);
        kernels::real_cmul_acc(g.real(), g.imag(), y_re, y_im, combined);
    }
    AggregationOutcome out;
    out.global_model.resize(s);
    const double denom = amp * static_cast<double>(K) * static_cast<double>(M) * channel.sigma_h2();
    kernels::affine(1.0 / denom, 0.0, combined, out.global_model);
    out.active_set = all_devices(K);
    out.target = mean_over(input.local_models, out.active_set);
    return out;
}

std::size_t min_antennas_bound(double epsilon, double prob_delta, std::size_t devices,
                               double gamma_n, double sigma_h, double sigma_z) {
    if (!(epsilon > 0.0) || !(gamma_n > 0.0) || !(sigma_h > 0.0) || !(sigma_z > 0.0) || devices == 0)
        throw ArgumentError("min_antennas_bound: parameters must be positive");
    if (!(prob_delta > 0.0 && prob_delta < 1.0))
        throw ArgumentError("min_antennas_bound: delta must lie in (0, 1)");
    const double K = static_cast<double>(devices);
    const double c_n = 1.0 / gamma_n + sigma_h / sigma_z;
    const double bound =
        8.0 * gamma_n * gamma_n * K * K / (epsilon * epsilon * c_n * c_n) * std::log(6.0 * K / prob_delta);
    // Absorb round-off just above an integer (e.g. 1280.0000000000002).
    const double rounded = std::round(bound);
    if (std::abs(bound - rounded) <= 1e-9 * std::max(1.0, rounded))
        return static_cast<std::size_t>(rounded);
    return static_cast<std::size_t>(std::ceil(bound));
}

// ---------------------------------------------------------------------------

std::vector<double> compensated_gains(const channel::CsiView& view) {
    require_csi(view, CsiKind::PartialPhase, "compensated_gains");
    const auto& channel = view.server();
    std::vector<double> out(channel.devices());
    for (std::size_t k = 0; k < channel.devices(); ++k) {
        const Complex h = channel(k, 0);
        out[k] = std::abs(h) * std::cos(std::arg(h) - view.phase_estimate(k));
    }
    return out;
}

AggregationOutcome partial_phase_blind_aggregate(const AggregationInput& input,
                                                 const ModelVector& prev_global) {
    (void)prev_global;
    input.validate(1);
    require_csi(input.csi, CsiKind::PartialPhase, "partial_phase_blind_aggregate");
    const std::size_t K = input.devices();
    const std::size_t s = input.model_size();
    const double amp = std::sqrt(input.power);

    channel::ComplexBlock y(1, s);
    for (std::size_t k = 0; k < K; ++k) {
        const Complex g = input.channel(k, 0) * std::polar(amp, -input.csi.phase_estimate(k));
        kernels::caxpy(g.real(), g.imag(), input.local_models[k], y.re_row(0), y.im_row(0));
    }
    // Real-part model: interference replaces the AWGN when configured.
    const std::span<const double> impairment =
        input.noise.interference ? std::span<const double>(*input.noise.interference)
                                 : input.noise.awgn.re_row(0);
    if (impairment.size() != s)
        throw ArgumentError("partial_phase_blind_aggregate: interference length must equal s");
    kernels::axpy(1.0, impairment, y.re_row(0));

    AggregationOutcome out;
    out.global_model.resize(s);
    kernels::affine(1.0 / (amp * static_cast<double>(K)), 0.0, y.re_row(0), out.global_model);
    out.active_set = all_devices(K);
    out.target = mean_over(input.local_models, out.active_set);
    return out;
}

// ---------------------------------------------------------------------------

Stacked stacked_channel(const channel::CsiView& view) {
    require_csi(view, CsiKind::PartialPhase, "stacked_channel");
    const auto& channel = view.server();
    if (channel.antennas() != 1)
        throw UnsupportedConfiguration("stacked_channel: single-antenna server only");
    const auto K = static_cast<Eigen::Index>(channel.devices());
    Stacked H(2, K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const Complex eff = channel(static_cast<std::size_t>(k), 0) *
                            std::polar(1.0, -view.phase_estimate(static_cast<std::size_t>(k)));
        H(0, k) = eff.real();
        H(1, k) = eff.imag();
    }
    return H;
}

namespace {

void check_wafel_dims(std::span<const double> sigma, const Stacked& H, double power,
                      double noise_var_real, const char* who) {
    if (static_cast<Eigen::Index>(sigma.size()) != H.cols())
        throw ArgumentError(std::string(who) + ": sigma length must equal K");
    if (!(power > 0.0))
        throw ArgumentError(std::string(who) + ": P must be > 0");
    if (!(noise_var_real >= 0.0))
        throw ArgumentError(std::string(who) + ": noise variance must be >= 0");
}

} // namespace

Eigen::MatrixXd wafel_mse_matrix(std::span<const double> sigma, const Stacked& H, double power,
                                 double noise_var_real) {
    check_wafel_dims(sigma, H, power, noise_var_real, "wafel_mse_matrix");
    const Eigen::Index K = H.cols();
    const Eigen::Map<const Eigen::VectorXd> sig(sigma.data(), K);
    Eigen::MatrixXd inner;
    if (noise_var_real == 0.0) {
        const Eigen::MatrixXd pinv = H.completeOrthogonalDecomposition().pseudoInverse();
        inner = Eigen::MatrixXd::Identity(K, K) - pinv * H;
    } else {
        // Push-through identity keeps the inverse 2x2:
        // (I + c H'H)^{-1} = I - c H' (I_2 + c H H')^{-1} H
        const double c = power / noise_var_real;
        const Eigen::Matrix2d small = Eigen::Matrix2d::Identity() + c * H * H.transpose();
        inner = Eigen::MatrixXd::Identity(K, K) - c * H.transpose() * small.inverse() * H;
    }
    Eigen::MatrixXd Q = sig.asDiagonal() * inner * sig.asDiagonal();
    return 0.5 * (Q + Q.transpose());
}

Eigen::Vector2d wafel_equalizer(std::span<const double> alpha, std::span<const double> sigma,
                                const Stacked& H, double power, double noise_var_real) {
    check_wafel_dims(sigma, H, power, noise_var_real, "wafel_equalizer");
    if (alpha.size() != sigma.size())
        throw ArgumentError("wafel_equalizer: alpha length must equal K");
    Eigen::VectorXd c(H.cols());
    for (Eigen::Index k = 0; k < H.cols(); ++k)
        c(k) = alpha[static_cast<std::size_t>(k)] * sigma[static_cast<std::size_t>(k)];
    const Eigen::Vector2d Hc = H * c;
    if (noise_var_real == 0.0) {
        const Eigen::Matrix2d gram = H * H.transpose();
        return gram.completeOrthogonalDecomposition().pseudoInverse() * Hc;
    }
    const Eigen::Matrix2d A = (noise_var_real / power) * Eigen::Matrix2d::Identity() + H * H.transpose();
    return A.inverse() * Hc; // A symmetric, so b = A^{-1} H c
}

double wafel_predicted_mse(std::span<const double> alpha, std::span<const double> sigma,
                           const Stacked& H, double power, double noise_var_real,
                           std::size_t model_size) {
    if (alpha.size() != sigma.size())
        throw ArgumentError("wafel_predicted_mse: alpha length must equal K");
    optim::WeightVector{std::vector<double>(alpha.begin(), alpha.end())}.validate(1e-9);
    const Eigen::MatrixXd Q = wafel_mse_matrix(sigma, H, power, noise_var_real);
    const Eigen::Map<const Eigen::VectorXd> a(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
    return static_cast<double>(model_size) * a.dot(Q * a);
}

AggregationOutcome wafel_aggregate(const AggregationInput& input, const optim::WeightVector& alpha,
                                   const ModelVector& prev_global) {
    (void)prev_global;
    input.validate(1);
    require_csi(input.csi, CsiKind::PartialPhase, "wafel_aggregate");
    alpha.validate(1e-9);
    const std::size_t K = input.devices();
    const std::size_t s = input.model_size();
    if (alpha.size() != K)
        throw ArgumentError("wafel_aggregate: weight vector length must equal K");
    const double amp = std::sqrt(input.power);
    const auto stats = normalization_stats(input.local_models);

    channel::ComplexBlock y(1, s);
    for (std::size_t k = 0; k < K; ++k) {
        if (stats.degenerate[k])
            continue;
        const ModelVector xbar = normalize(input.local_models[k], stats.eta[k], stats.sigma[k], false);
        const Complex g = input.channel(k, 0) * std::polar(amp, -input.csi.phase_estimate(k));
        kernels::caxpy(g.real(), g.imag(), xbar, y.re_row(0), y.im_row(0));
    }
    kernels::axpy(1.0, input.noise.awgn.re_row(0), y.re_row(0));
    kernels::axpy(1.0, input.noise.awgn.im_row(0), y.im_row(0));

    const double noise_var_real = 0.5 * input.sigma_z2; // per real dimension of CN(0, sigma_z^2)
    const Stacked H = stacked_channel(input.csi);
    const Eigen::Vector2d b = wafel_equalizer(alpha.alpha, stats.sigma, H, input.power, noise_var_real);

    double mean_shift = 0.0;
    for (std::size_t k = 0; k < K; ++k)
        mean_shift += alpha[k] * stats.eta[k];

    ModelVector combined(s, 0.0);
    kernels::real_cmul_acc(b(0), -b(1), y.re_row(0), y.im_row(0), combined);
    AggregationOutcome out;
    out.global_model.resize(s);
    kernels::affine(1.0 / amp, mean_shift, combined, out.global_model);
    out.active_set = all_devices(K);
    out.weights = alpha;
    out.predicted_mse = wafel_predicted_mse(alpha.alpha, stats.sigma, H, input.power, noise_var_real, s);
    out.target.assign(s, 0.0);
    for (std::size_t k = 0; k < K; ++k)
        kernels::axpy(alpha[k], input.local_models[k], out.target);
    return out;
}

// ---------------------------------------------------------------------------

std::string scheme_id(const SchemeConfig& cfg) {
    struct Visitor {
        std::string operator()(const IdealConfig&) const { return "ideal"; }
        std::string operator()(const LocalCsitConfig&) const { return "local_csit"; }
        std::string operator()(const GlobalCsitConfig&) const { return "global_csit"; }
        std::string operator()(const FullyBlindConfig&) const { return "fully_blind"; }
        std::string operator()(const PartialPhaseConfig&) const { return "partial_phase"; }
        std::string operator()(const WafelConfig&) const { return "wafel"; }
    };
    return std::visit(Visitor{}, cfg);
}

std::size_t scheme_antennas(const SchemeConfig& cfg) {
    if (const auto* g = std::get_if<GlobalCsitConfig>(&cfg))
        return g->antennas;
    if (const auto* b = std::get_if<FullyBlindConfig>(&cfg))
        return b->antennas;
    return 1;
}

CsiKind scheme_csi_kind(const SchemeConfig& cfg) {
    struct Visitor {
        CsiKind operator()(const IdealConfig&) const { return CsiKind::CsirOnly; }
        CsiKind operator()(const LocalCsitConfig&) const { return CsiKind::LocalCsit; }
        CsiKind operator()(const GlobalCsitConfig&) const { return CsiKind::GlobalCsit; }
        CsiKind operator()(const FullyBlindConfig&) const { return CsiKind::CsirOnly; }
        CsiKind operator()(const PartialPhaseConfig&) const { return CsiKind::PartialPhase; }
        CsiKind operator()(const WafelConfig&) const { return CsiKind::PartialPhase; }
    };
    return std::visit(Visitor{}, cfg);
}

void validate_scheme(const SchemeConfig& cfg) {
    const auto id = scheme_id(cfg);
    auto fail = [&](const std::string& what) { throw ArgumentError(id + ": " + what); };
    constexpr double half_pi = std::numbers::pi / 2.0;
    if (const auto* c = std::get_if<LocalCsitConfig>(&cfg)) {
        if (!(c->threshold > 0.0))
            fail("threshold must be > 0");
    } else if (const auto* c = std::get_if<GlobalCsitConfig>(&cfg)) {
        if (c->antennas < 1)
            fail("antennas must be >= 1");
        if (!(c->threshold > 0.0))
            fail("threshold must be > 0");
    } else if (const auto* c = std::get_if<FullyBlindConfig>(&cfg)) {
        if (c->antennas < 1)
            fail("antennas must be >= 1");
    } else if (const auto* c = std::get_if<PartialPhaseConfig>(&cfg)) {
        if (!(c->phase_error_bound >= 0.0 && c->phase_error_bound < half_pi))
            fail("phase_error_bound must lie in [0, pi/2)");
        if (c->interference)
            channel::NoiseConfig{1.0, c->interference}.validate();
    } else if (const auto* c = std::get_if<WafelConfig>(&cfg)) {
        if (!(c->mse_budget > 0.0))
            fail("mse_budget must be > 0");
        if (!(c->phase_error_bound >= 0.0 && c->phase_error_bound < half_pi))
            fail("phase_error_bound must lie in [0, pi/2)");
    }
}

} // namespace airfl::schemes
