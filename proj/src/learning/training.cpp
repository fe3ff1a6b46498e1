#include "airfl/errors.hpp"
#include "airfl/kernels.hpp"
#include "airfl/learning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace airfl::learning {

ModelVector local_sgd(const ModelShape& shape, const ModelVector& model, const Dataset& data,
                      double mu, std::size_t tau, std::size_t batch, numerics::RngStream rng) {
    ModelVector w = model;
    const std::size_t n = data.size();
    if (n == 0 || tau == 0)
        return w;
    batch = std::clamp<std::size_t>(batch, 1, n);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    std::size_t cursor = 0;
    ModelVector grad(w.size());
    std::vector<std::size_t> idx(batch);
    for (std::size_t step = 0; step < tau; ++step) {
        if (cursor + batch > n) {
            std::shuffle(perm.begin(), perm.end(), rng.engine());
            cursor = 0;
        }
        std::copy_n(perm.begin() + static_cast<std::ptrdiff_t>(cursor), batch, idx.begin());
        cursor += batch;
        batch_loss(shape, w, data, idx, grad);
        kernels::axpy(-mu, grad, w);
    }
    return w;
}

void TrainingConfig::validate() const {
    std::vector<std::string> errors;
    if (!(mu > 0.0) && schedule == LrSchedule::Constant)
        errors.emplace_back("mu must be > 0");
    if (!(lr_theta > 0.0) && schedule == LrSchedule::Diminishing)
        errors.emplace_back("lr_theta must be > 0");
    if (tau < 1)
        errors.emplace_back("tau must be >= 1");
    if (rounds < 1)
        errors.emplace_back("rounds must be >= 1");
    if (batch < 1)
        errors.emplace_back("batch must be >= 1");
    if (errors.empty())
        return;
    std::string msg = "training config:";
    for (const auto& e : errors)
        msg += " " + e + ";";
    throw ArgumentError(msg);
}

double TrainingConfig::step_size(std::size_t round) const {
    if (schedule == LrSchedule::Diminishing)
        return lr_theta / static_cast<double>(round + 1);
    return mu;
}

HeterogeneityProfile assign_heterogeneous_batches(std::span<const double> speeds, std::size_t batch_ref) {
    if (speeds.empty())
        throw ArgumentError("assign_heterogeneous_batches: no devices");
    if (batch_ref < 1)
        throw ArgumentError("assign_heterogeneous_batches: B_ref must be >= 1");
    for (double f : speeds)
        if (!(f > 0.0) || !std::isfinite(f))
            throw ArgumentError("assign_heterogeneous_batches: speeds must be positive and finite");
    const double f_min = *std::min_element(speeds.begin(), speeds.end());
    HeterogeneityProfile p;
    p.speeds.assign(speeds.begin(), speeds.end());
    double total = 0.0;
    for (double f : speeds) {
        const auto b = std::max<long>(1, std::lround(static_cast<double>(batch_ref) * f_min / f));
        p.batch_sizes.push_back(static_cast<std::size_t>(b));
        total += static_cast<double>(b);
    }
    for (std::size_t b : p.batch_sizes) {
        p.weight_target.push_back(static_cast<double>(b) / total);
        p.noise_scale.push_back(1.0 / static_cast<double>(b));
    }
    return p;
}

ModelVector ideal_orthogonal_aggregate(std::span<const ModelVector> local_models,
                                       const optim::WeightVector& weights) {
    if (local_models.empty())
        throw ArgumentError("ideal_orthogonal_aggregate: no local models");
    if (weights.size() != local_models.size())
        throw ArgumentError("ideal_orthogonal_aggregate: weight vector length must equal K");
    weights.validate();
    ModelVector out(local_models[0].size(), 0.0);
    for (std::size_t k = 0; k < local_models.size(); ++k)
        kernels::axpy(weights[k], local_models[k], out);
    return out;
}

namespace {

struct RoundContext {
    const FederatedTask& task;
    const RadioSettings& radio;
    const RunOptions& options;
    std::span<const ModelVector> local;
    const ModelVector& prev;
    numerics::RngStream round_rng;
    std::size_t round;
};

channel::ChannelRealization round_channel(const RoundContext& ctx, std::size_t antennas) {
    const std::size_t K = ctx.task.device_count();
    if (ctx.options.unit_channels)
        return {K, antennas, ctx.radio.sigma_h2};
    return channel::draw_rayleigh(ctx.round_rng.child(0), K, antennas, ctx.radio.sigma_h2);
}

optim::WeightVector default_weights(const RoundContext& ctx) {
    if (ctx.options.heterogeneity)
        return {ctx.options.heterogeneity->weight_target};
    return optim::WeightVector::uniform(ctx.task.device_count());
}

struct Aggregated {
    schemes::AggregationOutcome outcome;
    optim::WeightVector applied;
};

class SchemeRunner {
public:
    explicit SchemeRunner(const RoundContext& ctx) : ctx_(ctx) {}

    Aggregated operator()(const schemes::IdealConfig&) const {
        auto ch = round_channel(ctx_, 1);
        observe(ch);
        Aggregated a;
        a.applied = default_weights(ctx_);
        a.outcome.global_model = ideal_orthogonal_aggregate(ctx_.local, a.applied);
        a.outcome.target = a.outcome.global_model;
        a.outcome.active_set = all();
        a.outcome.weights = a.applied;
        a.outcome.predicted_mse = 0.0;
        return a;
    }

    Aggregated operator()(const schemes::LocalCsitConfig& cfg) const {
        auto ch = round_channel(ctx_, 1);
        observe(ch);
        const channel::CsiView view(channel::CsiKind::LocalCsit, ch);
        const auto noise = draw_noise(1, std::nullopt);
        const schemes::AggregationInput in{ctx_.local, ch, view, noise, ctx_.radio.power, ctx_.radio.sigma_z2};
        return uniform_over_active(schemes::local_csit_aggregate(in, cfg.threshold, ctx_.prev));
    }

    Aggregated operator()(const schemes::GlobalCsitConfig& cfg) const {
        auto ch = round_channel(ctx_, cfg.antennas);
        observe(ch);
        const channel::CsiView view(channel::CsiKind::GlobalCsit, ch);
        const auto noise = draw_noise(cfg.antennas, std::nullopt);
        const auto sel = optim::mp_greedy_selection(view.global(), ctx_.radio.power, ctx_.radio.sigma_z2,
                                                    cfg.threshold);
        const schemes::GlobalSelection selection{sel.active, sel.equalizer};
        const schemes::AggregationInput in{ctx_.local, ch, view, noise, ctx_.radio.power, ctx_.radio.sigma_z2};
        return uniform_over_active(schemes::global_csit_aggregate(in, selection, ctx_.prev));
    }

    Aggregated operator()(const schemes::FullyBlindConfig& cfg) const {
        auto ch = round_channel(ctx_, cfg.antennas);
        observe(ch);
        const channel::CsiView view(channel::CsiKind::CsirOnly, ch);
        const auto noise = draw_noise(cfg.antennas, std::nullopt);
        const schemes::AggregationInput in{ctx_.local, ch, view, noise, ctx_.radio.power, ctx_.radio.sigma_z2};
        return uniform_over_active(schemes::fully_blind_aggregate(in, ctx_.prev));
    }

    Aggregated operator()(const schemes::PartialPhaseConfig& cfg) const {
        auto ch = round_channel(ctx_, 1);
        observe(ch);
        auto phase_rng = ctx_.round_rng.child(2);
        const auto view = channel::make_partial_phase_view(phase_rng, ch, cfg.phase_error_bound);
        const auto noise = draw_noise(1, cfg.interference);
        const schemes::AggregationInput in{ctx_.local, ch, view, noise, ctx_.radio.power, ctx_.radio.sigma_z2};
        return uniform_over_active(schemes::partial_phase_blind_aggregate(in, ctx_.prev));
    }

    Aggregated operator()(const schemes::WafelConfig& cfg) const {
        auto ch = round_channel(ctx_, 1);
        observe(ch);
        auto phase_rng = ctx_.round_rng.child(2);
        const auto view = channel::make_partial_phase_view(phase_rng, ch, cfg.phase_error_bound);
        const auto noise = draw_noise(1, std::nullopt);
        const schemes::AggregationInput in{ctx_.local, ch, view, noise, ctx_.radio.power, ctx_.radio.sigma_z2};

        bool fallback = false;
        optim::WeightVector alpha = default_weights(ctx_);
        if (!cfg.fixed_uniform) {
            const auto stats = schemes::normalization_stats(ctx_.local);
            const auto H = schemes::stacked_channel(view);
            optim::WeightProblem problem;
            problem.Q = schemes::wafel_mse_matrix(stats.sigma, H, ctx_.radio.power, 0.5 * ctx_.radio.sigma_z2);
            problem.Q = 0.5 * (problem.Q + problem.Q.transpose()).eval();
            const std::size_t K = ctx_.task.device_count();
            problem.d = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(K));
            if (ctx_.options.heterogeneity)
                problem.d = Eigen::Map<const Eigen::VectorXd>(ctx_.options.heterogeneity->noise_scale.data(),
                                                              static_cast<Eigen::Index>(K));
            problem.theta = cfg.mse_budget;
            const auto sol = optim::solve_weight_selection(problem);
            alpha = sol.weights;
            fallback = sol.status == optim::WeightStatus::InfeasibleFallback;
        }
        Aggregated a;
        a.outcome = schemes::wafel_aggregate(in, alpha, ctx_.prev);
        a.outcome.solver_fallback = fallback;
        a.applied = std::move(alpha);
        return a;
    }

private:
    std::vector<std::size_t> all() const {
        std::vector<std::size_t> v(ctx_.task.device_count());
        std::iota(v.begin(), v.end(), 0);
        return v;
    }

    void observe(const channel::ChannelRealization& ch) const {
        if (ctx_.options.channel_observer)
            ctx_.options.channel_observer(ctx_.round, ch);
    }

    channel::RoundNoise draw_noise(std::size_t antennas, std::optional<channel::Interference> interference) const {
        const channel::NoiseConfig cfg{ctx_.radio.sigma_z2, interference};
        return channel::draw_round_noise(ctx_.round_rng.child(1), ctx_.local[0].size(), antennas, cfg);
    }

    static Aggregated uniform_over_active(schemes::AggregationOutcome outcome) {
        Aggregated a;
        const std::size_t n = outcome.active_set.size();
        if (n > 0) {
            // The applied weights live on the active set; the norm is what matters.
            a.applied.alpha.assign(n, 1.0 / static_cast<double>(n));
        }
        a.outcome = std::move(outcome);
        return a;
    }

    const RoundContext& ctx_;
};

double distance(const ModelVector& a, const ModelVector& b) {
    return std::sqrt(kernels::sq_dist(a, b));
}

} // namespace

TrainingTrace run_federated_training(const FederatedTask& task, const schemes::SchemeConfig& scheme,
                                     const TrainingConfig& cfg, const RadioSettings& radio,
                                     const numerics::RngStream& rng, const RunOptions& options) {
    cfg.validate();
    schemes::validate_scheme(scheme);
    const std::size_t K = task.device_count();
    if (K == 0)
        throw ArgumentError("run_federated_training: task has no devices");
    for (const auto& d : task.devices)
        if (d.size() == 0)
            throw ArgumentError("run_federated_training: every device needs data");
    if (options.heterogeneity && options.heterogeneity->batch_sizes.size() != K)
        throw ArgumentError("run_federated_training: heterogeneity profile must cover every device");

    const std::string id = schemes::scheme_id(scheme);
    TrainingTrace trace;
    ModelVector global = initial_model(task.shape, rng.child(kInitStream));
    if (options.keep_global_models)
        trace.global_models.push_back(global);
    const auto rounds_rng = rng.child(kRoundStream);

    std::vector<ModelVector> local(K);
    for (std::size_t t = 0; t < cfg.rounds; ++t) {
        const auto round_rng = rounds_rng.child(t);
        RoundStats stats;
        stats.round = t;
        stats.grad_sq_norm = kernels::sq_norm(global_gradient(task, global));

        const double mu = cfg.step_size(t);
        const auto sgd_rng = round_rng.child(3);
        for (std::size_t k = 0; k < K; ++k) {
            const std::size_t batch = options.heterogeneity ? options.heterogeneity->batch_sizes[k] : cfg.batch;
            local[k] = local_sgd(task.shape, global, task.devices[k], mu, cfg.tau, batch, sgd_rng.child(k));
        }

        const RoundContext ctx{task, radio, options, local, global, round_rng, t};
        Aggregated agg;
        try {
            agg = std::visit(SchemeRunner(ctx), scheme);
        } catch (const std::exception& e) {
            throw TrainingAborted(id + " aborted in round " + std::to_string(t) + ": " + e.what(),
                                  std::move(trace.rounds));
        }
        for (double v : agg.outcome.global_model)
            if (!std::isfinite(v))
                throw TrainingAborted(id + " produced a non-finite model in round " + std::to_string(t),
                                      std::move(trace.rounds));

        global = std::move(agg.outcome.global_model);
        stats.loss = global_loss(task, global);
        stats.accuracy = accuracy(task.shape, global, task.test);
        stats.agg_error = distance(global, agg.outcome.target);
        stats.predicted_mse = agg.outcome.predicted_mse;
        stats.active_set = agg.outcome.active_set.size();
        stats.weight_norm = std::sqrt(agg.applied.squared_norm());
        stats.empty_active_set = agg.outcome.empty_active_set;
        stats.solver_fallback = agg.outcome.solver_fallback;
        stats.weights = agg.applied.alpha;
        trace.rounds.push_back(std::move(stats));
        if (options.keep_global_models)
            trace.global_models.push_back(global);
    }
    return trace;
}

} // namespace airfl::learning
