#include "airfl/numerics.hpp"

#include "airfl/errors.hpp"
#include "airfl/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace airfl::numerics {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream_id + 0x632BE59BD9B4E019ULL));
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(mix_seed(seed, stream_id)) {}

RngStream RngStream::child(std::uint64_t key) const {
    return RngStream(seed_, splitmix64(stream_id_ * 0x100000001B3ULL ^ splitmix64(key)));
}

double RngStream::uniform() { return std::generate_canonical<double, 53>(engine_); }

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::normal() {
    // Box-Muller on our own uniforms keeps the stream layout independent of
    // the standard library's distribution internals.
    double u1 = uniform();
    while (u1 <= 0.0)
        u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::exponential() {
    double u = uniform();
    while (u <= 0.0)
        u = uniform();
    return -std::log(u);
}

ComplexVec sample_complex_gaussian(RngStream& rng, std::size_t n, double variance) {
    if (!(variance >= 0.0))
        throw ArgumentError("sample_complex_gaussian: variance must be >= 0");
    ComplexVec out(n);
    if (variance == 0.0)
        return out;
    const double scale = std::sqrt(variance / 2.0);
    for (auto& z : out) {
        const double re = rng.normal();
        const double im = rng.normal();
        z = Complex(scale * re, scale * im);
    }
    return out;
}

std::vector<double> sample_alpha_stable(RngStream& rng, std::size_t n, double alpha, double delta) {
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw ArgumentError("sample_alpha_stable: alpha must lie in (0, 2]");
    if (!(delta > 0.0))
        throw ArgumentError("sample_alpha_stable: delta must be > 0");
    constexpr double half_pi = std::numbers::pi / 2.0;
    std::vector<double> out(n);
    for (auto& x : out) {
        double v = rng.uniform(-half_pi, half_pi);
        while (v == -half_pi)
            v = rng.uniform(-half_pi, half_pi);
        const double w = rng.exponential();
        double sample;
        if (alpha == 1.0) {
            sample = std::tan(v);
        } else {
            const double a = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha);
            const double b = std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
            sample = a * b;
        }
        x = delta * sample;
    }
    return out;
}

double exp_integral_upper(double x) {
    if (!(x > 0.0))
        throw DomainError("exp_integral_upper: x must be > 0 (integral diverges at 0)");
    constexpr double eps = 1e-16;
    if (x <= 1.0) {
        // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
        double sum = 0.0;
        double term = 1.0; // (-x)^k / k!
        for (int k = 1; k < 200; ++k) {
            term *= -x / k;
            const double contrib = term / k;
            sum += contrib;
            if (std::abs(contrib) < eps * std::abs(sum))
                break;
        }
        return -std::numbers::egamma - std::log(x) - sum;
    }
    constexpr double tiny = std::numeric_limits<double>::min() / eps;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < eps)
            break;
    }
    return h * std::exp(-x);
}

BiasMse empirical_mean_and_mse(std::span<const ModelVector> samples, const ModelVector& target) {
    if (samples.empty())
        throw ArgumentError("empirical_mean_and_mse: no samples");
    const std::size_t s = target.size();
    ModelVector mean(s, 0.0);
    double mse = 0.0;
    for (const auto& x : samples) {
        if (x.size() != s)
            throw ArgumentError("empirical_mean_and_mse: dimension mismatch (" +
                                std::to_string(x.size()) + " vs " + std::to_string(s) + ")");
        kernels::axpy(1.0, x, mean);
        mse += kernels::sq_dist(x, target);
    }
    const double inv = 1.0 / static_cast<double>(samples.size());
    for (auto& m : mean)
        m *= inv;
    return {std::sqrt(kernels::sq_dist(mean, target)), mse * inv};
}

double l2_norm(std::span<const double> v) { return std::sqrt(kernels::sq_norm(v)); }

} // namespace airfl::numerics
