#include "jshop/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace jshop {

size_t Mlp::param_count() const {
    size_t n = 0;
    for (const auto& layer : layers) n += layer.w.size() + layer.b.size();
    return n;
}

namespace {

// Semi-orthogonal matrix scaled by gain: Gram-Schmidt over the shorter of
// rows/columns of a gaussian draw.
void fill_orthogonal(Layer& layer, double gain, RngStream& rng) {
    const int rows = layer.out, cols = layer.in;
    std::vector<double> g(static_cast<size_t>(rows) * cols);
    for (auto& v : g) v = rng.gaussian();

    auto vec_at = [&](bool by_rows, int idx, int k) -> double& {
        return by_rows ? g[static_cast<size_t>(idx) * cols + k]
                       : g[static_cast<size_t>(k) * cols + idx];
    };
    const bool by_rows = rows <= cols;
    const int count = by_rows ? rows : cols;
    const int dim = by_rows ? cols : rows;
    for (int i = 0; i < count; ++i) {
        for (int p = 0; p < i; ++p) {
            double dot = 0;
            for (int k = 0; k < dim; ++k) dot += vec_at(by_rows, i, k) * vec_at(by_rows, p, k);
            for (int k = 0; k < dim; ++k) vec_at(by_rows, i, k) -= dot * vec_at(by_rows, p, k);
        }
        double norm = 0;
        for (int k = 0; k < dim; ++k) norm += vec_at(by_rows, i, k) * vec_at(by_rows, i, k);
        norm = std::sqrt(norm);
        if (norm < 1e-12) {
            for (int k = 0; k < dim; ++k) vec_at(by_rows, i, k) = rng.gaussian();
            --i;
            continue;
        }
        for (int k = 0; k < dim; ++k) vec_at(by_rows, i, k) /= norm;
    }
    for (size_t i = 0; i < g.size(); ++i) layer.w[i] = gain * g[i];
}

}  // namespace

Mlp make_mlp(int in, const std::vector<int>& hidden, int out, double hidden_gain,
             double out_gain, RngStream& rng) {
    if (in < 1 || out < 1) throw std::invalid_argument("make_mlp: bad dimensions");
    for (int h : hidden)
        if (h < 1) throw std::invalid_argument("make_mlp: bad hidden layer size");
    Mlp net;
    int prev = in;
    for (int h : hidden) {
        Layer layer{prev, h, std::vector<double>(static_cast<size_t>(h) * prev, 0.0),
                    std::vector<double>(static_cast<size_t>(h), 0.0)};
        fill_orthogonal(layer, hidden_gain, rng);
        net.layers.push_back(std::move(layer));
        prev = h;
    }
    Layer last{prev, out, std::vector<double>(static_cast<size_t>(out) * prev, 0.0),
               std::vector<double>(static_cast<size_t>(out), 0.0)};
    fill_orthogonal(last, out_gain, rng);
    net.layers.push_back(std::move(last));
    return net;
}

Mlp zeros_like(const Mlp& net) {
    Mlp out;
    out.layers.reserve(net.layers.size());
    for (const auto& layer : net.layers)
        out.layers.push_back({layer.in, layer.out,
                              std::vector<double>(layer.w.size(), 0.0),
                              std::vector<double>(layer.b.size(), 0.0)});
    return out;
}

void mlp_forward(const Mlp& net, const std::vector<double>& x, std::vector<double>& y,
                 MlpCache* cache) {
    if (static_cast<int>(x.size()) != net.input_dim())
        throw std::invalid_argument("mlp_forward: input size mismatch");
    if (cache) {
        cache->act.resize(net.layers.size() + 1);
        cache->act[0] = x;
    }
    std::vector<double> cur = x;
    std::vector<double> next;
    for (size_t i = 0; i < net.layers.size(); ++i) {
        const Layer& layer = net.layers[i];
        next.assign(static_cast<size_t>(layer.out), 0.0);
        for (int r = 0; r < layer.out; ++r) {
            const double* wr = layer.w.data() + static_cast<size_t>(r) * layer.in;
            double acc = layer.b[static_cast<size_t>(r)];
            for (int c = 0; c < layer.in; ++c) acc += wr[c] * cur[static_cast<size_t>(c)];
            next[static_cast<size_t>(r)] = acc;
        }
        if (i + 1 < net.layers.size())
            for (auto& v : next) v = std::tanh(v);
        if (cache) cache->act[i + 1] = next;
        cur.swap(next);
    }
    y = std::move(cur);
}

void mlp_backward(const Mlp& net, const MlpCache& cache, const std::vector<double>& dout,
                  Mlp& grad, std::vector<double>* dx) {
    std::vector<double> delta = dout;
    std::vector<double> down;
    for (size_t i = net.layers.size(); i-- > 0;) {
        const Layer& layer = net.layers[i];
        Layer& glayer = grad.layers[i];
        const std::vector<double>& a_in = cache.act[i];
        for (int r = 0; r < layer.out; ++r) {
            double d = delta[static_cast<size_t>(r)];
            glayer.b[static_cast<size_t>(r)] += d;
            double* gw = glayer.w.data() + static_cast<size_t>(r) * layer.in;
            for (int c = 0; c < layer.in; ++c) gw[c] += d * a_in[static_cast<size_t>(c)];
        }
        if (i == 0 && !dx) break;
        down.assign(static_cast<size_t>(layer.in), 0.0);
        for (int r = 0; r < layer.out; ++r) {
            double d = delta[static_cast<size_t>(r)];
            const double* wr = layer.w.data() + static_cast<size_t>(r) * layer.in;
            for (int c = 0; c < layer.in; ++c) down[static_cast<size_t>(c)] += d * wr[c];
        }
        if (i > 0) {
            // act[i] holds the tanh output of layer i-1.
            const std::vector<double>& h = cache.act[i];
            for (int c = 0; c < layer.in; ++c)
                down[static_cast<size_t>(c)] *= 1.0 - h[static_cast<size_t>(c)] * h[static_cast<size_t>(c)];
        }
        delta.swap(down);
    }
    if (dx) *dx = std::move(delta);
}

PolicyParams init_policy(int obs_dim, int n_actions, uint64_t seed,
                         const std::vector<int>& hidden) {
    PolicyParams p;
    p.obs_dim = obs_dim;
    p.n_actions = n_actions;
    RngStream actor_rng(mix_seed(seed, 0xAC10Bull));
    RngStream critic_rng(mix_seed(seed, 0xC817Cull));
    p.actor = make_mlp(obs_dim, hidden, n_actions, std::sqrt(2.0), 0.01, actor_rng);
    p.critic = make_mlp(obs_dim, hidden, 1, std::sqrt(2.0), 1.0, critic_rng);
    return p;
}

void policy_forward(const PolicyParams& params, const std::vector<double>& obs,
                    std::vector<double>& logits, double& value) {
    mlp_forward(params.actor, obs, logits);
    std::vector<double> v;
    mlp_forward(params.critic, obs, v);
    value = v[0];
}

PolicyParams zeros_like(const PolicyParams& params) {
    PolicyParams out;
    out.obs_dim = params.obs_dim;
    out.n_actions = params.n_actions;
    out.actor = zeros_like(params.actor);
    out.critic = zeros_like(params.critic);
    return out;
}

size_t policy_param_count(const PolicyParams& params) {
    return params.actor.param_count() + params.critic.param_count();
}

double grad_sq_norm(const PolicyParams& grad) {
    double sum = 0.0;
    visit_params(grad, [&sum](const double& v) { sum += v * v; });
    return sum;
}

void scale_grad(PolicyParams& grad, double s) {
    visit_params(grad, [s](double& v) { v *= s; });
}

void add_scaled(PolicyParams& dst, const PolicyParams& src, double s) {
    zip_params(dst, src, [s](double& d, const double& x) { d += s * x; });
}

}  // namespace jshop
