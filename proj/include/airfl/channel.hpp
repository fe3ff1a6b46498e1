#pragma once

#include "airfl/numerics.hpp"

#include <optional>
#include <span>
#include <vector>

namespace airfl::channel {

/// K x M block-fading channel h_{k,m} for one communication round.
class ChannelRealization {
public:
    ChannelRealization(std::size_t devices, std::size_t antennas, double sigma_h2);
    ChannelRealization(std::size_t devices, std::size_t antennas, double sigma_h2,
                       std::vector<Complex> coefficients);

    std::size_t devices() const { return devices_; }
    std::size_t antennas() const { return antennas_; }
    double sigma_h2() const { return sigma_h2_; }

    Complex operator()(std::size_t k, std::size_t m) const { return h_[k * antennas_ + m]; }
    Complex& operator()(std::size_t k, std::size_t m) { return h_[k * antennas_ + m]; }

    /// h_k, the channel vector of device k across all antennas.
    std::span<const Complex> row(std::size_t k) const {
        return {h_.data() + k * antennas_, antennas_};
    }
    std::span<const Complex> coefficients() const { return h_; }

private:
    std::size_t devices_;
    std::size_t antennas_;
    double sigma_h2_;
    std::vector<Complex> h_;
};

/// Rows x cols complex block stored as separate real and imaginary planes.
struct ComplexBlock {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> re;
    std::vector<double> im;

    ComplexBlock() = default;
    ComplexBlock(std::size_t r, std::size_t c) : rows(r), cols(c), re(r * c, 0.0), im(r * c, 0.0) {}

    std::span<double> re_row(std::size_t r) { return {re.data() + r * cols, cols}; }
    std::span<double> im_row(std::size_t r) { return {im.data() + r * cols, cols}; }
    std::span<const double> re_row(std::size_t r) const { return {re.data() + r * cols, cols}; }
    std::span<const double> im_row(std::size_t r) const { return {im.data() + r * cols, cols}; }
};

struct Interference {
    double alpha; // tail index in (0, 2]
    double delta; // scale > 0
};

struct NoiseConfig {
    double sigma_z2 = 1.0;
    std::optional<Interference> interference;

    void validate() const;
};

/// Per-round additive impairments: AWGN per antenna and symbol, plus the
/// optional real-valued alpha-stable interference of the real-part model.
struct RoundNoise {
    ComplexBlock awgn; // M x s
    std::optional<std::vector<double>> interference; // s
};

enum class CsiKind { CsirOnly, LocalCsit, GlobalCsit, PartialPhase };

const char* to_string(CsiKind kind);

/// What a scheme is allowed to know about the channel.
///
/// The server always holds CSIR. Devices see their own row under local CSIT,
/// every row under global CSIT, and only a coarse phase estimate of their own
/// channel under partial-phase knowledge. Accessors outside the view throw.
class CsiView {
public:
    CsiView(CsiKind kind, ChannelRealization channel);
    CsiView(ChannelRealization channel, std::vector<double> phase_estimates, double bound);

    CsiKind kind() const { return kind_; }
    double phase_error_bound() const { return bound_; }

    /// Device k's own channel vector (local or global CSIT).
    std::span<const Complex> own_channel(std::size_t k) const;
    /// Every device's channel (global CSIT).
    const ChannelRealization& global() const;
    /// Receiver-side channel knowledge (always available to the server).
    const ChannelRealization& server() const { return channel_; }
    /// Coarse phase estimate of device k's channel (partial-phase view).
    double phase_estimate(std::size_t k) const;
    std::span<const double> phase_estimates() const;

private:
    CsiKind kind_;
    ChannelRealization channel_;
    std::vector<double> phase_estimates_;
    double bound_ = 0.0;
};

/// i.i.d. CN(0, sigma_h2) coefficients. Column m is drawn from substream m,
/// so the first columns coincide for any antenna count under the same rng.
ChannelRealization draw_rayleigh(const numerics::RngStream& rng, std::size_t devices,
                                 std::size_t antennas, double sigma_h2);

/// Phase estimates angle(h_k) + u_k with u_k ~ U(-bound, bound). Requires M = 1.
CsiView make_partial_phase_view(numerics::RngStream& rng, const ChannelRealization& channel,
                                double bound);

/// M x s AWGN with E|z|^2 = sigma_z2, plus s interference samples if configured.
RoundNoise draw_round_noise(const numerics::RngStream& rng, std::size_t model_size,
                            std::size_t antennas, const NoiseConfig& cfg);

} // namespace airfl::channel
