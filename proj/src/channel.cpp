#include "airfl/channel.hpp"

#include "airfl/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace airfl::channel {

namespace {
constexpr std::uint64_t kInterferenceStream = 0xA1FA'57AB'1EULL;
}

ChannelRealization::ChannelRealization(std::size_t devices, std::size_t antennas, double sigma_h2)
    : ChannelRealization(devices, antennas, sigma_h2,
                         std::vector<Complex>(devices * antennas, Complex(1.0, 0.0))) {}

ChannelRealization::ChannelRealization(std::size_t devices, std::size_t antennas, double sigma_h2,
                                       std::vector<Complex> coefficients)
    : devices_(devices), antennas_(antennas), sigma_h2_(sigma_h2), h_(std::move(coefficients)) {
    if (devices == 0 || antennas == 0)
        throw ArgumentError("ChannelRealization: K and M must be >= 1");
    if (!(sigma_h2 > 0.0))
        throw ArgumentError("ChannelRealization: sigma_h2 must be > 0");
    if (h_.size() != devices * antennas)
        throw ArgumentError("ChannelRealization: coefficient count does not match K x M");
}

void NoiseConfig::validate() const {
    if (!(sigma_z2 >= 0.0))
        throw ArgumentError("NoiseConfig: sigma_z2 must be >= 0");
    if (interference) {
        if (!(interference->alpha > 0.0 && interference->alpha <= 2.0))
            throw ArgumentError("NoiseConfig: interference alpha must lie in (0, 2]");
        if (!(interference->delta > 0.0))
            throw ArgumentError("NoiseConfig: interference delta must be > 0");
    }
}

const char* to_string(CsiKind kind) {
    switch (kind) {
    case CsiKind::CsirOnly:
        return "csir-only";
    case CsiKind::LocalCsit:
        return "local-csit";
    case CsiKind::GlobalCsit:
        return "global-csit";
    case CsiKind::PartialPhase:
        return "partial-phase";
    }
    return "?";
}

CsiView::CsiView(CsiKind kind, ChannelRealization channel)
    : kind_(kind), channel_(std::move(channel)) {
    if (kind == CsiKind::PartialPhase)
        throw ArgumentError("CsiView: partial-phase views are built by make_partial_phase_view");
}

CsiView::CsiView(ChannelRealization channel, std::vector<double> phase_estimates, double bound)
    : kind_(CsiKind::PartialPhase), channel_(std::move(channel)),
      phase_estimates_(std::move(phase_estimates)), bound_(bound) {
    if (phase_estimates_.size() != channel_.devices())
        throw ArgumentError("CsiView: one phase estimate per device required");
}

std::span<const Complex> CsiView::own_channel(std::size_t k) const {
    if (kind_ != CsiKind::LocalCsit && kind_ != CsiKind::GlobalCsit)
        throw ArgumentError(std::string("CsiView: device channel not visible under ") +
                            to_string(kind_));
    return channel_.row(k);
}

const ChannelRealization& CsiView::global() const {
    if (kind_ != CsiKind::GlobalCsit)
        throw ArgumentError(std::string("CsiView: global CSIT not available under ") +
                            to_string(kind_));
    return channel_;
}

double CsiView::phase_estimate(std::size_t k) const {
    if (kind_ != CsiKind::PartialPhase)
        throw ArgumentError(std::string("CsiView: no phase estimates under ") + to_string(kind_));
    return phase_estimates_.at(k);
}

std::span<const double> CsiView::phase_estimates() const {
    if (kind_ != CsiKind::PartialPhase)
        throw ArgumentError(std::string("CsiView: no phase estimates under ") + to_string(kind_));
    return phase_estimates_;
}

ChannelRealization draw_rayleigh(const numerics::RngStream& rng, std::size_t devices,
                                 std::size_t antennas, double sigma_h2) {
    if (devices == 0 || antennas == 0)
        throw ArgumentError("draw_rayleigh: K and M must be >= 1");
    if (!(sigma_h2 > 0.0))
        throw ArgumentError("draw_rayleigh: sigma_h2 must be > 0");
    std::vector<Complex> h(devices * antennas);
    for (std::size_t m = 0; m < antennas; ++m) {
        auto column_rng = rng.child(m);
        const auto column = numerics::sample_complex_gaussian(column_rng, devices, sigma_h2);
        for (std::size_t k = 0; k < devices; ++k)
            h[k * antennas + m] = column[k];
    }
    return ChannelRealization(devices, antennas, sigma_h2, std::move(h));
}

CsiView make_partial_phase_view(numerics::RngStream& rng, const ChannelRealization& channel,
                                double bound) {
    if (!(bound >= 0.0 && bound < std::numbers::pi / 2.0))
        throw ArgumentError("make_partial_phase_view: bound must lie in [0, pi/2)");
    if (channel.antennas() != 1)
        throw UnsupportedConfiguration("make_partial_phase_view: single-antenna server only");
    std::vector<double> estimates(channel.devices());
    for (std::size_t k = 0; k < channel.devices(); ++k) {
        // Draw even when bound == 0 so the stream layout does not depend on it.
        double u = rng.uniform(-1.0, 1.0);
        while (u <= -1.0)
            u = rng.uniform(-1.0, 1.0);
        estimates[k] = std::arg(channel(k, 0)) + bound * u;
    }
    return CsiView(channel, std::move(estimates), bound);
}

RoundNoise draw_round_noise(const numerics::RngStream& rng, std::size_t model_size,
                            std::size_t antennas, const NoiseConfig& cfg) {
    cfg.validate();
    RoundNoise noise{ComplexBlock(antennas, model_size), std::nullopt};
    if (cfg.sigma_z2 > 0.0) {
        for (std::size_t m = 0; m < antennas; ++m) {
            auto antenna_rng = rng.child(m);
            const auto z = numerics::sample_complex_gaussian(antenna_rng, model_size, cfg.sigma_z2);
            auto re = noise.awgn.re_row(m);
            auto im = noise.awgn.im_row(m);
            for (std::size_t i = 0; i < model_size; ++i) {
                re[i] = z[i].real();
                im[i] = z[i].imag();
            }
        }
    }
    if (cfg.interference) {
        auto irng = rng.child(kInterferenceStream);
        noise.interference = numerics::sample_alpha_stable(irng, model_size, cfg.interference->alpha,
                                                          cfg.interference->delta);
    }
    return noise;
}

} // namespace airfl::channel
