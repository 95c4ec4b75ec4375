#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "jshop/rng.hpp"

namespace jshop {

// Dense layer; weights row-major [out][in].
struct Layer {
    int in = 0;
    int out = 0;
    std::vector<double> w;
    std::vector<double> b;
    bool operator==(const Layer&) const = default;
};

// Fully connected net: tanh on hidden layers, linear output.
struct Mlp {
    std::vector<Layer> layers;

    int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
    int output_dim() const { return layers.empty() ? 0 : layers.back().out; }
    size_t param_count() const;
    bool operator==(const Mlp&) const = default;
};

// Orthogonal-style init: gaussian matrices orthonormalized by Gram-Schmidt,
// scaled by the layer gain; zero biases. Hidden layers use hidden_gain, the
// output layer out_gain.
Mlp make_mlp(int in, const std::vector<int>& hidden, int out, double hidden_gain,
             double out_gain, RngStream& rng);

Mlp zeros_like(const Mlp& net);

// act[0] is the input, act[i+1] the post-activation output of layer i.
struct MlpCache {
    std::vector<std::vector<double>> act;
};

void mlp_forward(const Mlp& net, const std::vector<double>& x, std::vector<double>& y,
                 MlpCache* cache = nullptr);

// Accumulates dL/dparams into grad (same shape as net, +=) given dL/doutput.
// Optionally yields dL/dinput.
void mlp_backward(const Mlp& net, const MlpCache& cache, const std::vector<double>& dout,
                  Mlp& grad, std::vector<double>* dx = nullptr);

// Actor (logits over jobs) and critic (scalar value) networks.
struct PolicyParams {
    Mlp actor;
    Mlp critic;
    int obs_dim = 0;
    int n_actions = 0;
    bool operator==(const PolicyParams&) const = default;
};

PolicyParams init_policy(int obs_dim, int n_actions, uint64_t seed,
                         const std::vector<int>& hidden = {256, 256});

void policy_forward(const PolicyParams& params, const std::vector<double>& obs,
                    std::vector<double>& logits, double& value);

PolicyParams zeros_like(const PolicyParams& params);
size_t policy_param_count(const PolicyParams& params);

// Walks every parameter of every layer (actor first, then critic; weights
// before biases) in a fixed order. F is called as fn(double& value).
template <class F>
void visit_params(Mlp& net, F&& fn) {
    for (auto& layer : net.layers) {
        for (auto& v : layer.w) fn(v);
        for (auto& v : layer.b) fn(v);
    }
}

template <class F>
void visit_params(const Mlp& net, F&& fn) {
    for (const auto& layer : net.layers) {
        for (const auto& v : layer.w) fn(v);
        for (const auto& v : layer.b) fn(v);
    }
}

template <class F>
void visit_params(PolicyParams& p, F&& fn) {
    visit_params(p.actor, fn);
    visit_params(p.critic, fn);
}

template <class F>
void visit_params(const PolicyParams& p, F&& fn) {
    visit_params(p.actor, fn);
    visit_params(p.critic, fn);
}

// Lockstep walk over two identically shaped parameter sets.
template <class F>
void zip_params(PolicyParams& a, const PolicyParams& b, F&& fn) {
    auto zip_net = [&fn](Mlp& x, const Mlp& y) {
        for (size_t i = 0; i < x.layers.size(); ++i) {
            auto& lx = x.layers[i];
            const auto& ly = y.layers[i];
            for (size_t k = 0; k < lx.w.size(); ++k) fn(lx.w[k], ly.w[k]);
            for (size_t k = 0; k < lx.b.size(); ++k) fn(lx.b[k], ly.b[k]);
        }
    };
    zip_net(a.actor, b.actor);
    zip_net(a.critic, b.critic);
}

double grad_sq_norm(const PolicyParams& grad);
void scale_grad(PolicyParams& grad, double s);
void add_scaled(PolicyParams& dst, const PolicyParams& src, double s);

}  // namespace jshop
