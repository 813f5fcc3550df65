#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "ssrn/data.hpp"
#include "ssrn/error.hpp"
#include "ssrn/loss.hpp"
#include "ssrn/network.hpp"
#include "ssrn/rng.hpp"

namespace ssrn {

struct TrainConfig {
    double base_lr = 0.01;
    std::size_t step_size = 3000;   // iterations per learning-rate step
    double gamma = 0.1;             // step multiplier
    double momentum = 0.9;
    double weight_decay = 0.0005;
    std::size_t max_iter = 12000;
    std::size_t validation_period = 500;
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (!(base_lr > 0.0)) throw ValueError("train config: base_lr must be positive");
        if (step_size == 0) throw ValueError("train config: step_size must be positive");
        if (!(gamma > 0.0 && gamma < 1.0)) throw ValueError("train config: gamma must lie in (0,1)");
        if (!(momentum >= 0.0 && momentum < 1.0))
            throw ValueError("train config: momentum must lie in [0,1)");
        if (!(weight_decay >= 0.0))
            throw ValueError("train config: weight_decay must be non-negative");
        if (validation_period == 0)
            throw ValueError("train config: validation_period must be positive");
    }
};

// "step" learning rate policy: base_lr * gamma^floor(iter / step_size).
inline double lr_at_iter(const TrainConfig& config, std::size_t iter) {
    config.validate();
    if (iter >= config.max_iter)
        throw ValueError("lr_at_iter: iteration " + std::to_string(iter) +
                         " out of range [0," + std::to_string(config.max_iter) + ")");
    double lr = config.base_lr;
    for (std::size_t k = iter / config.step_size; k > 0; --k) lr *= config.gamma;
    return lr;
}

struct OptimizerState {
    std::vector<std::vector<double>> velocity;  // one buffer per parameter view
    std::size_t iteration = 0;

    static OptimizerState for_network(Network& net) {
        OptimizerState s;
        for (const ParamView& v : net.param_views())
            s.velocity.emplace_back(v.size, 0.0);
        return s;
    }
};

// One SGD step with momentum and L2 weight decay:
//   v <- mu*v - lr*(g + lambda*w);  w <- w + v
// Decay applies to weights only, never biases. Non-finite gradients reject
// the whole step before any parameter is touched.
inline void sgd_step(Network& net, NetworkGrads& grads, OptimizerState& state,
                     const TrainConfig& config, double lr) {
    if (!grads.all_finite())
        throw NumericError("sgd_step: non-finite gradient at iteration " +
                           std::to_string(state.iteration));
    auto params = net.param_views();
    auto gviews = Network::grad_views(grads);
    if (params.size() != gviews.size() || params.size() != state.velocity.size())
        throw ShapeError("sgd_step: parameter/gradient/velocity layout mismatch");

    for (std::size_t i = 0; i < params.size(); ++i) {
        ParamView& p = params[i];
        const ParamView& g = gviews[i];
        std::vector<double>& v = state.velocity[i];
        if (g.size != p.size || v.size() != p.size)
            throw ShapeError("sgd_step: buffer size mismatch");
        const double decay = p.is_bias ? 0.0 : config.weight_decay;
        for (std::size_t j = 0; j < p.size; ++j) {
            v[j] = config.momentum * v[j] - lr * (g.data[j] + decay * p.data[j]);
            p.data[j] += v[j];
        }
    }
    ++state.iteration;
}

inline void sgd_step(Network& net, NetworkGrads& grads, OptimizerState& state,
                     const TrainConfig& config) {
    sgd_step(net, grads, state, config, lr_at_iter(config, state.iteration));
}

struct TraceRow {
    std::size_t iteration;
    double lr;
    double train_loss;
    std::optional<double> val_loss;
};

struct TrainResult {
    std::vector<TraceRow> trace;
    bool aborted = false;          // non-finite loss stopped the run
    std::string abort_reason;
};

inline void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
    out << "iteration,lr,train_loss,val_loss\n";
    for (const auto& row : trace) {
        out << row.iteration << ',' << row.lr << ',' << row.train_loss << ',';
        if (row.val_loss) out << *row.val_loss;
        out << '\n';
    }
}

// Mean loss over a sample set in inference mode (restores the previous mode).
inline double validation_loss(Network& net, const std::vector<SamplePair>& samples,
                              const LossConfig& loss_config) {
    if (samples.empty())
        throw ValueError("validation_loss: empty sample set");
    const Network::Mode prev = net.mode();
    net.set_mode(Network::Mode::inference);
    double acc = 0.0;
    for (const auto& s : samples) {
        const Tensor pred = net.forward(s.centered_image());
        acc += total_loss(pred, s.mask, loss_config).value;
    }
    net.set_mode(prev);
    return acc / static_cast<double>(samples.size());
}

// Single-image SGD over the training set: one image per iteration, sampled
// by a seeded per-epoch shuffle. Training loss is recorded every iteration
// and mean validation loss every validation_period iterations.
inline TrainResult train_loop(Network& net, const std::vector<SamplePair>& train_set,
                              const std::vector<SamplePair>& val_set,
                              const LossConfig& loss_config, const TrainConfig& train_config,
                              const std::function<void(const TraceRow&)>& on_iteration = {}) {
    train_config.validate();
    loss_config.validate();
    if (train_set.empty())
        throw ValueError("train_loop: empty training set");

    TrainResult result;
    if (train_config.max_iter == 0)
        return result;

    net.set_mode(Network::Mode::training);
    OptimizerState state = OptimizerState::for_network(net);

    std::mt19937_64 order_rng(splitmix64(train_config.rng_seed ^ 0x5A5A5A5Aull));
    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::size_t epoch_pos = order.size();  // forces a shuffle on first use

    result.trace.reserve(train_config.max_iter);
    for (std::size_t iter = 0; iter < train_config.max_iter; ++iter) {
        if (epoch_pos >= order.size()) {
            shuffle(order, order_rng);
            epoch_pos = 0;
        }
        const SamplePair& sample = train_set[order[epoch_pos++]];

        ForwardCache cache;
        const Tensor pred = net.forward(sample.centered_image(), cache);
        LossResult loss = total_loss(pred, sample.mask, loss_config);

        TraceRow row{iter, lr_at_iter(train_config, iter), loss.value, std::nullopt};
        if (!std::isfinite(loss.value)) {
            result.trace.push_back(row);
            result.aborted = true;
            result.abort_reason =
                "non-finite training loss at iteration " + std::to_string(iter);
            net.set_mode(Network::Mode::inference);
            return result;
        }

        NetworkGrads grads = net.backward(cache, loss.grad);
        sgd_step(net, grads, state, train_config, row.lr);

        if (!val_set.empty() && (iter + 1) % train_config.validation_period == 0)
            row.val_loss = validation_loss(net, val_set, loss_config);

        result.trace.push_back(row);
        if (on_iteration) on_iteration(row);
    }

    net.set_mode(Network::Mode::inference);
    return result;
}

} // namespace ssrn
