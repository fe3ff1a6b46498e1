#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace airfl {

using Complex = std::complex<double>;
using ComplexVec = std::vector<Complex>;

/// Length-s real parameter vector; the unit that is transmitted and aggregated.
using ModelVector = std::vector<double>;

namespace numerics {

/// Deterministic random stream identified by (seed, stream_id).
///
/// The engine state is derived by hashing both identifiers with splitmix64,
/// so streams with different ids are decorrelated and a stream's output does
/// not depend on which other streams were drawn first. Child streams are
/// keyed by a path of integers, e.g. rng.child(round).child(device).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    /// Independent substream; does not advance this stream.
    RngStream child(std::uint64_t key) const;

    std::mt19937_64& engine() { return engine_; }

    double uniform(); // [0, 1)
    double uniform(double lo, double hi);
    double normal(); // N(0, 1)
    double exponential(); // Exp(1)
    std::uint64_t next_u64() { return engine_(); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// i.i.d. circularly-symmetric complex Gaussian entries with E|z|^2 = variance.
ComplexVec sample_complex_gaussian(RngStream& rng, std::size_t n, double variance);

/// i.i.d. symmetric alpha-stable samples with characteristic function
/// exp(-delta^alpha |w|^alpha), drawn with the Chambers-Mallows-Stuck
/// transform of a uniform angle and a unit exponential.
std::vector<double> sample_alpha_stable(RngStream& rng, std::size_t n, double alpha, double delta);

/// E1(x) = integral_x^inf e^{-t}/t dt for x > 0. Power series up to x = 1,
/// Lentz continued fraction beyond.
double exp_integral_upper(double x);

struct BiasMse {
    double bias_norm; // ||mean(samples) - target||
    double mse;       // mean ||sample - target||^2
};

BiasMse empirical_mean_and_mse(std::span<const ModelVector> samples, const ModelVector& target);

double l2_norm(std::span<const double> v);

} // namespace numerics
} // namespace airfl
