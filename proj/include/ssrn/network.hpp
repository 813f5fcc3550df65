#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ssrn/error.hpp"
#include "ssrn/layers.hpp"
#include "ssrn/resize.hpp"
#include "ssrn/rng.hpp"
#include "ssrn/tensor.hpp"

namespace ssrn {

enum class FinalActivation { linear_clamp, relu };

// Declarative description of the saliency score regression network: five
// convolutional stages of 3x3 layers, each closed by a 3x3 max pool, then a
// cascade of 1x1 regression layers and the size restoration step.
struct NetworkConfig {
    std::vector<std::size_t> stage_layer_counts{2, 2, 3, 3, 3};
    std::vector<std::size_t> stage_channels{64, 128, 256, 512, 512};
    std::vector<std::size_t> pool_strides{2, 2, 2, 1, 1};
    std::vector<std::size_t> fcn_channels{1024, 1024, 1};
    double dropout_rate = 0.5;
    FinalActivation final_activation = FinalActivation::linear_clamp;
    std::string preset_name = "custom";
    std::size_t input_channels = 3;

    void validate() const {
        if (stage_layer_counts.empty())
            throw ValueError("network config: at least one stage required");
        if (stage_layer_counts.size() != stage_channels.size() ||
            stage_layer_counts.size() != pool_strides.size())
            throw ValueError("network config: stage lists must have equal length");
        for (std::size_t c : stage_layer_counts)
            if (c == 0) throw ValueError("network config: empty stage");
        for (std::size_t c : stage_channels)
            if (c == 0) throw ValueError("network config: zero-channel stage");
        for (std::size_t s : pool_strides)
            if (s != 1 && s != 2) throw ValueError("network config: pool stride must be 1 or 2");
        if (fcn_channels.empty() || fcn_channels.back() != 1)
            throw ValueError("network config: last fcn layer must have one channel");
        if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
            throw ValueError("network config: dropout rate must lie in [0,1)");
        if (input_channels == 0)
            throw ValueError("network config: input channels must be positive");
    }

    static NetworkConfig vgg16() {
        NetworkConfig c;
        c.preset_name = "vgg16";
        return c;
    }

    static NetworkConfig micro() {
        NetworkConfig c;
        c.stage_layer_counts = {1, 1};
        c.stage_channels = {8, 16};
        c.pool_strides = {2, 2};
        c.fcn_channels = {32, 1};
        c.preset_name = "micro";
        return c;
    }

    static NetworkConfig preset(const std::string& name) {
        if (name == "vgg16") return vgg16();
        if (name == "micro") return micro();
        throw ValueError("unknown network preset: " + name);
    }

    // Spatial size is only reduced by stride-2 pools, halving with ceil().
    std::size_t downscale_factor() const {
        std::size_t f = 1;
        for (std::size_t s : pool_strides)
            if (s == 2) f *= 2;
        return f;
    }

    // Inputs below this side length are rejected by forward().
    std::size_t min_input_side() const { return downscale_factor(); }

    std::pair<std::size_t, std::size_t> basic_map_dims(std::size_t h, std::size_t w) const {
        for (std::size_t s : pool_strides) {
            if (s == 2) {
                h = (h + 1) / 2;
                w = (w + 1) / 2;
            }
        }
        return {h, w};
    }
};

struct LayerGrads {
    Tensor weights;
    std::vector<double> bias;
};

// Gradients for every learned tensor, in network order (backbone convs then
// fcn layers).
struct NetworkGrads {
    std::vector<LayerGrads> conv;
    std::vector<LayerGrads> fcn;

    bool all_finite() const {
        auto check = [](const std::vector<LayerGrads>& layers) {
            for (const auto& l : layers) {
                if (!l.weights.all_finite()) return false;
                for (double b : l.bias)
                    if (!std::isfinite(b)) return false;
            }
            return true;
        };
        return check(conv) && check(fcn);
    }
};

// Activations recorded by a training-mode forward pass, consumed by
// backward().
struct ForwardCache {
    bool valid = false;
    std::vector<Tensor> conv_inputs;       // input to each backbone conv
    std::vector<Tensor> conv_outputs;      // pre-ReLU output of each backbone conv
    std::vector<std::vector<std::size_t>> pool_argmax;
    std::vector<std::vector<std::size_t>> pool_input_shapes;
    std::vector<Tensor> fcn_inputs;        // input to each fcn layer
    std::vector<Tensor> fcn_outputs;       // pre-ReLU output of each fcn layer
    Tensor raw_restored;                   // restored map before final activation
    std::size_t basic_h = 0, basic_w = 0;  // dims of the basic saliency map
    std::size_t input_h = 0, input_w = 0;
};

// A mutable view over one learned array, used by the optimizer and model IO.
struct ParamView {
    double* data;
    std::size_t size;
    bool is_bias;
};

class Network {
public:
    enum class Mode { training, inference };

    NetworkConfig config;
    std::vector<ConvParams> conv_layers;  // flattened backbone convs
    std::vector<ConvParams> fcn_layers;   // 1x1 regression cascade
    std::vector<DropoutState> dropouts;   // one per fcn layer except the last

    Mode mode() const { return mode_; }

    void set_mode(Mode m) {
        mode_ = m;
        const auto dm = m == Mode::training ? DropoutState::Mode::training
                                            : DropoutState::Mode::inference;
        for (auto& d : dropouts) d.mode = dm;
    }

    std::size_t num_parameters() const {
        std::size_t n = 0;
        for (const auto& l : conv_layers) n += l.weights.size() + l.bias.size();
        for (const auto& l : fcn_layers) n += l.weights.size() + l.bias.size();
        return n;
    }

    std::size_t backbone_parameters() const {
        std::size_t n = 0;
        for (const auto& l : conv_layers) n += l.weights.size() + l.bias.size();
        return n;
    }

    std::vector<ParamView> param_views() {
        std::vector<ParamView> v;
        auto add = [&v](std::vector<ConvParams>& layers) {
            for (auto& l : layers) {
                v.push_back({l.weights.data(), l.weights.size(), false});
                v.push_back({l.bias.data(), l.bias.size(), true});
            }
        };
        add(conv_layers);
        add(fcn_layers);
        return v;
    }

    // Flattens a NetworkGrads into views matching param_views() order.
    static std::vector<ParamView> grad_views(NetworkGrads& g) {
        std::vector<ParamView> v;
        auto add = [&v](std::vector<LayerGrads>& layers) {
            for (auto& l : layers) {
                v.push_back({l.weights.data(), l.weights.size(), false});
                v.push_back({l.bias.data(), l.bias.size(), true});
            }
        };
        add(g.conv);
        add(g.fcn);
        return v;
    }

    Tensor forward(const Tensor& image) {
        ForwardCache cache;
        return run_forward(image, cache, false);
    }

    Tensor forward(const Tensor& image, ForwardCache& cache) {
        return run_forward(image, cache, true);
    }

    NetworkGrads backward(const ForwardCache& cache, const Tensor& grad_saliency) const {
        if (!cache.valid)
            throw ValueError("network backward: missing forward cache");
        if (grad_saliency.rank() != 3 || grad_saliency.channels() != 1 ||
            grad_saliency.height() != cache.input_h || grad_saliency.width() != cache.input_w)
            throw ShapeError("network backward: grad does not match cached output");

        // Final activation. The clamp passes gradient 1 inside [0,1]
        // (boundary included) and 0 outside.
        Tensor g(grad_saliency.shape());
        if (config.final_activation == FinalActivation::linear_clamp) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double r = cache.raw_restored[i];
                g[i] = (r >= 0.0 && r <= 1.0) ? grad_saliency[i] : 0.0;
            }
        } else {
            for (std::size_t i = 0; i < g.size(); ++i)
                g[i] = cache.raw_restored[i] > 0.0 ? grad_saliency[i] : 0.0;
        }

        g = restore_size_adjoint(g, cache.basic_h, cache.basic_w);

        NetworkGrads grads;
        grads.fcn.resize(fcn_layers.size());
        grads.conv.resize(conv_layers.size());

        for (std::size_t i = fcn_layers.size(); i-- > 0;) {
            if (i + 1 < fcn_layers.size()) {
                g = dropout_backward(g, dropouts[i]);
                g = relu_backward(cache.fcn_outputs[i], g);
            }
            ConvGrads cg = conv2d_backward(cache.fcn_inputs[i], fcn_layers[i], g);
            grads.fcn[i] = {std::move(cg.weights), std::move(cg.bias)};
            g = std::move(cg.input);
        }

        std::size_t conv_idx = conv_layers.size();
        for (std::size_t stage = config.stage_layer_counts.size(); stage-- > 0;) {
            g = maxpool_backward(cache.pool_argmax[stage], g, cache.pool_input_shapes[stage]);
            for (std::size_t j = config.stage_layer_counts[stage]; j-- > 0;) {
                --conv_idx;
                g = relu_backward(cache.conv_outputs[conv_idx], g);
                ConvGrads cg = conv2d_backward(cache.conv_inputs[conv_idx],
                                               conv_layers[conv_idx], g);
                grads.conv[conv_idx] = {std::move(cg.weights), std::move(cg.bias)};
                g = std::move(cg.input);
            }
        }
        return grads;
    }

private:
    friend Network build_network(const NetworkConfig&, std::uint64_t);

    Tensor run_forward(const Tensor& image, ForwardCache& cache, bool keep_cache) {
        require_rank3(image, "network forward");
        if (image.channels() != config.input_channels)
            throw ShapeError("network forward: expected " +
                             std::to_string(config.input_channels) + "-channel input");
        const std::size_t min_side = config.min_input_side();
        if (image.height() < min_side || image.width() < min_side)
            throw ValueError("network forward: input must be at least " +
                             std::to_string(min_side) + "x" + std::to_string(min_side) +
                             " for this preset");

        cache = ForwardCache{};
        cache.input_h = image.height();
        cache.input_w = image.width();

        Tensor x = image;
        std::size_t conv_idx = 0;
        for (std::size_t stage = 0; stage < config.stage_layer_counts.size(); ++stage) {
            for (std::size_t j = 0; j < config.stage_layer_counts[stage]; ++j, ++conv_idx) {
                if (keep_cache) cache.conv_inputs.push_back(x);
                Tensor y = conv2d_forward(x, conv_layers[conv_idx]);
                if (keep_cache) cache.conv_outputs.push_back(y);
                x = relu_forward(y);
            }
            PoolParams pp{3, config.pool_strides[stage], 1};
            if (keep_cache) cache.pool_input_shapes.push_back(x.shape());
            MaxPoolResult pr = maxpool_forward(x, pp);
            if (keep_cache) cache.pool_argmax.push_back(std::move(pr.argmax));
            x = std::move(pr.output);
        }

        for (std::size_t i = 0; i < fcn_layers.size(); ++i) {
            if (keep_cache) cache.fcn_inputs.push_back(x);
            Tensor y = conv2d_forward(x, fcn_layers[i]);
            if (i + 1 < fcn_layers.size()) {
                if (keep_cache) cache.fcn_outputs.push_back(y);
                x = relu_forward(y);
                x = dropout_forward(x, dropouts[i]);
            } else {
                x = std::move(y);
            }
        }

        cache.basic_h = x.height();
        cache.basic_w = x.width();

        Tensor restored = restore_size(x, cache.input_w, cache.input_h);
        if (keep_cache) cache.raw_restored = restored;

        Tensor out(restored.shape());
        if (config.final_activation == FinalActivation::linear_clamp) {
            for (std::size_t i = 0; i < restored.size(); ++i)
                out[i] = std::min(1.0, std::max(0.0, restored[i]));
        } else {
            for (std::size_t i = 0; i < restored.size(); ++i)
                out[i] = restored[i] > 0.0 ? restored[i] : 0.0;
        }
        cache.valid = keep_cache;
        return out;
    }

    Mode mode_ = Mode::inference;
};

// Weights are drawn from the fan-in-scaled uniform U(-sqrt(6/fan_in),
// +sqrt(6/fan_in)); biases start at zero. Deterministic for a given seed.
inline Network build_network(const NetworkConfig& config, std::uint64_t init_seed) {
    config.validate();
    Network net;
    net.config = config;

    std::mt19937_64 rng(init_seed);
    auto make_conv = [&rng](std::size_t out_ch, std::size_t in_ch, std::size_t k,
                            std::size_t padding) {
        ConvParams p;
        p.weights = Tensor({out_ch, in_ch, k, k});
        p.bias.assign(out_ch, 0.0);
        p.stride = 1;
        p.padding = padding;
        const double bound = std::sqrt(6.0 / static_cast<double>(in_ch * k * k));
        for (std::size_t i = 0; i < p.weights.size(); ++i)
            p.weights[i] = uniform_real(rng, -bound, bound);
        return p;
    };

    std::size_t in_ch = config.input_channels;
    for (std::size_t stage = 0; stage < config.stage_layer_counts.size(); ++stage) {
        const std::size_t out_ch = config.stage_channels[stage];
        for (std::size_t j = 0; j < config.stage_layer_counts[stage]; ++j) {
            net.conv_layers.push_back(make_conv(out_ch, in_ch, 3, 1));
            in_ch = out_ch;
        }
    }
    for (std::size_t i = 0; i < config.fcn_channels.size(); ++i) {
        net.fcn_layers.push_back(make_conv(config.fcn_channels[i], in_ch, 1, 0));
        in_ch = config.fcn_channels[i];
    }
    for (std::size_t i = 0; i + 1 < config.fcn_channels.size(); ++i)
        net.dropouts.emplace_back(config.dropout_rate, DropoutState::Mode::inference,
                                  splitmix64(init_seed ^ (0xD0D0ull + i)));
    return net;
}

} // namespace ssrn
