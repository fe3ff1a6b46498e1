#include "airfl/errors.hpp"
#include "airfl/kernels.hpp"
#include "airfl/learning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace airfl::learning {

const char* to_string(LossKind kind) {
    switch (kind) {
    case LossKind::LeastSquares:
        return "least_squares";
    case LossKind::Logistic:
        return "logistic";
    case LossKind::Perceptron:
        return "perceptron";
    }
    return "?";
}

LossKind loss_kind_from_string(const std::string& name) {
    if (name == "least_squares")
        return LossKind::LeastSquares;
    if (name == "logistic")
        return LossKind::Logistic;
    if (name == "perceptron")
        return LossKind::Perceptron;
    throw ArgumentError("unknown loss kind '" + name + "' (least_squares, logistic, perceptron)");
}

std::size_t ModelShape::parameter_count() const {
    if (loss == LossKind::Perceptron)
        return hidden * dim + hidden + classes * hidden + classes;
    return classes * dim + classes;
}

std::size_t FederatedTask::total_samples() const {
    std::size_t n = 0;
    for (const auto& d : devices)
        n += d.size();
    return n;
}

FederatedTask generate_synthetic_task(numerics::RngStream rng, const TaskSpec& spec) {
    if (spec.classes < 2)
        throw ArgumentError("generate_synthetic_task: need at least 2 classes");
    if (spec.dim < 1)
        throw ArgumentError("generate_synthetic_task: dim must be >= 1");
    if (spec.classes_per_device < 1 || spec.classes_per_device > spec.classes)
        throw ArgumentError("generate_synthetic_task: classes_per_device must lie in [1, classes]");
    if (spec.devices < 1 || spec.samples_per_device < 1)
        throw ArgumentError("generate_synthetic_task: need devices and samples");

    auto mean_rng = rng.child(0);
    auto size_rng = rng.child(1);
    std::vector<std::vector<double>> means(spec.classes, std::vector<double>(spec.dim));
    for (auto& m : means)
        for (auto& v : m)
            v = spec.separation * mean_rng.normal();

    auto draw = [&](Dataset& data, int label, numerics::RngStream& r) {
        const auto& mu = means[static_cast<std::size_t>(label)];
        for (std::size_t j = 0; j < spec.dim; ++j)
            data.features.push_back(mu[j] + spec.noise_std * r.normal());
        data.labels.push_back(label);
    };

    FederatedTask task;
    task.shape = ModelShape{spec.loss, spec.classes, spec.dim, spec.hidden};
    task.classes_per_device = spec.classes_per_device;

    std::vector<std::size_t> sizes(spec.devices);
    for (auto& n : sizes) {
        const double factor = std::pow(2.0, size_rng.uniform(-1.0, 1.0));
        n = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(factor * spec.samples_per_device)));
    }

    // Largest devices first, each takes the currently least-represented classes.
    std::vector<std::size_t> order(spec.devices);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sizes[a] > sizes[b]; });
    std::vector<double> load(spec.classes, 0.0);
    std::vector<std::vector<int>> device_classes(spec.devices);
    for (std::size_t k : order) {
        std::vector<std::size_t> cls(spec.classes);
        std::iota(cls.begin(), cls.end(), 0);
        std::stable_sort(cls.begin(), cls.end(), [&](std::size_t a, std::size_t b) { return load[a] < load[b]; });
        for (std::size_t j = 0; j < spec.classes_per_device; ++j) {
            device_classes[k].push_back(static_cast<int>(cls[j]));
            load[cls[j]] += static_cast<double>(sizes[k]) / static_cast<double>(spec.classes_per_device);
        }
        std::sort(device_classes[k].begin(), device_classes[k].end());
    }

    task.devices.resize(spec.devices);
    for (std::size_t k = 0; k < spec.devices; ++k) {
        auto sample_rng = rng.child(100 + k);
        Dataset& d = task.devices[k];
        d.dim = spec.dim;
        for (std::size_t i = 0; i < sizes[k]; ++i)
            draw(d, device_classes[k][i % device_classes[k].size()], sample_rng);
    }
    auto test_rng = rng.child(2);
    task.test.dim = spec.dim;
    for (std::size_t i = 0; i < spec.test_samples; ++i)
        draw(task.test, static_cast<int>(i % spec.classes), test_rng);
    return task;
}

namespace {

void softmax_in_place(std::span<double> z) {
    const double top = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (auto& v : z) {
        v = std::exp(v - top);
        total += v;
    }
    for (auto& v : z)
        v /= total;
}

} // namespace

double sample_loss(const ModelShape& shape, std::span<const double> params, std::span<const double> x,
                   int label, std::span<double> grad) {
    const std::size_t C = shape.classes;
    const std::size_t d = shape.dim;
    const bool want_grad = !grad.empty();
    const auto y = static_cast<std::size_t>(label);

    if (shape.loss != LossKind::Perceptron) {
        const double* W = params.data();
        const double* b = params.data() + C * d;
        std::vector<double> z(C);
        for (std::size_t c = 0; c < C; ++c)
            z[c] = kernels::active().dot(W + c * d, x.data(), d) + b[c];
        double loss = 0.0;
        if (shape.loss == LossKind::LeastSquares) {
            for (std::size_t c = 0; c < C; ++c) {
                z[c] -= (c == y) ? 1.0 : 0.0; // residual
                loss += 0.5 * z[c] * z[c];
            }
        } else {
            const double top = *std::max_element(z.begin(), z.end());
            double total = 0.0;
            for (double v : z)
                total += std::exp(v - top);
            loss = -(z[y] - top - std::log(total));
            softmax_in_place(z);
            z[y] -= 1.0;
        }
        if (want_grad) {
            for (std::size_t c = 0; c < C; ++c) {
                kernels::active().axpy(z[c], x.data(), grad.data() + c * d, d);
                grad[C * d + c] += z[c];
            }
        }
        return loss;
    }

    const std::size_t H = shape.hidden;
    const double* W1 = params.data();
    const double* b1 = W1 + H * d;
    const double* W2 = b1 + H;
    const double* b2 = W2 + C * H;
    std::vector<double> h(H);
    for (std::size_t j = 0; j < H; ++j)
        h[j] = std::tanh(kernels::active().dot(W1 + j * d, x.data(), d) + b1[j]);
    std::vector<double> z(C);
    for (std::size_t c = 0; c < C; ++c)
        z[c] = kernels::active().dot(W2 + c * H, h.data(), H) + b2[c];
    const double top = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (double v : z)
        total += std::exp(v - top);
    const double loss = -(z[y] - top - std::log(total));
    if (want_grad) {
        softmax_in_place(z);
        z[y] -= 1.0;
        double* gW1 = grad.data();
        double* gb1 = gW1 + H * d;
        double* gW2 = gb1 + H;
        double* gb2 = gW2 + C * H;
        std::vector<double> dh(H, 0.0);
        for (std::size_t c = 0; c < C; ++c) {
            kernels::active().axpy(z[c], h.data(), gW2 + c * H, H);
            gb2[c] += z[c];
            kernels::active().axpy(z[c], W2 + c * H, dh.data(), H);
        }
        for (std::size_t j = 0; j < H; ++j) {
            const double da = dh[j] * (1.0 - h[j] * h[j]);
            kernels::active().axpy(da, x.data(), gW1 + j * d, d);
            gb1[j] += da;
        }
    }
    return loss;
}

double batch_loss(const ModelShape& shape, std::span<const double> params, const Dataset& data,
                  std::span<const std::size_t> indices, std::span<double> grad) {
    if (!grad.empty())
        std::fill(grad.begin(), grad.end(), 0.0);
    if (indices.empty())
        return 0.0;
    double loss = 0.0;
    for (std::size_t i : indices)
        loss += sample_loss(shape, params, data.x(i), data.labels[i], grad);
    const double inv = 1.0 / static_cast<double>(indices.size());
    for (auto& g : grad)
        g *= inv;
    return loss * inv;
}

double dataset_loss(const ModelShape& shape, std::span<const double> params, const Dataset& data) {
    double loss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        loss += sample_loss(shape, params, data.x(i), data.labels[i], {});
    return data.size() ? loss / static_cast<double>(data.size()) : 0.0;
}

namespace {

std::vector<double> scores(const ModelShape& shape, std::span<const double> params, std::span<const double> x) {
    const std::size_t C = shape.classes;
    const std::size_t d = shape.dim;
    std::vector<double> z(C);
    if (shape.loss != LossKind::Perceptron) {
        for (std::size_t c = 0; c < C; ++c)
            z[c] = kernels::active().dot(params.data() + c * d, x.data(), d) + params[C * d + c];
        return z;
    }
    const std::size_t H = shape.hidden;
    const double* W1 = params.data();
    const double* b1 = W1 + H * d;
    const double* W2 = b1 + H;
    const double* b2 = W2 + C * H;
    std::vector<double> h(H);
    for (std::size_t j = 0; j < H; ++j)
        h[j] = std::tanh(kernels::active().dot(W1 + j * d, x.data(), d) + b1[j]);
    for (std::size_t c = 0; c < C; ++c)
        z[c] = kernels::active().dot(W2 + c * H, h.data(), H) + b2[c];
    return z;
}

} // namespace

double accuracy(const ModelShape& shape, std::span<const double> params, const Dataset& data) {
    if (data.size() == 0)
        return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto z = scores(shape, params, data.x(i));
        const auto best = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
        hits += best == data.labels[i] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

double global_loss(const FederatedTask& task, std::span<const double> params) {
    double loss = 0.0;
    for (const auto& d : task.devices)
        loss += dataset_loss(task.shape, params, d) * static_cast<double>(d.size());
    return loss / static_cast<double>(task.total_samples());
}

ModelVector global_gradient(const FederatedTask& task, std::span<const double> params) {
    ModelVector grad(task.shape.parameter_count(), 0.0);
    for (const auto& d : task.devices)
        for (std::size_t i = 0; i < d.size(); ++i)
            sample_loss(task.shape, params, d.x(i), d.labels[i], grad);
    const double inv = 1.0 / static_cast<double>(task.total_samples());
    for (auto& g : grad)
        g *= inv;
    return grad;
}

ModelVector initial_model(const ModelShape& shape, numerics::RngStream rng) {
    ModelVector w(shape.parameter_count(), 0.0);
    if (shape.loss != LossKind::Perceptron)
        return w;
    const std::size_t H = shape.hidden;
    const std::size_t d = shape.dim;
    const std::size_t C = shape.classes;
    const double a1 = 1.0 / std::sqrt(static_cast<double>(d));
    const double a2 = 1.0 / std::sqrt(static_cast<double>(H));
    for (std::size_t i = 0; i < H * d; ++i)
        w[i] = rng.uniform(-a1, a1);
    double* W2 = w.data() + H * d + H;
    for (std::size_t i = 0; i < C * H; ++i)
        W2[i] = rng.uniform(-a2, a2);
    return w;
}

} // namespace airfl::learning
