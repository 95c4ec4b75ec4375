#include "jshop/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "jshop/serial.hpp"

namespace jshop {

namespace {

using namespace detail;

constexpr uint64_t kMagic = 0x4a53484f50434b31ull;  // "JSHOPCK1"
constexpr uint64_t kVersion = 1;

void put_mlp(std::ostream& out, const Mlp& net) {
    put_u64(out, net.layers.size());
    for (const Layer& layer : net.layers) {
        put_i64(out, layer.in);
        put_i64(out, layer.out);
        put_vec_f(out, layer.w);
        put_vec_f(out, layer.b);
    }
}

Mlp get_mlp(std::istream& in) {
    Mlp net;
    net.layers.resize(static_cast<size_t>(get_u64(in)));
    for (Layer& layer : net.layers) {
        layer.in = static_cast<int>(get_i64(in));
        layer.out = static_cast<int>(get_i64(in));
        get_vec_f(in, layer.w);
        get_vec_f(in, layer.b);
    }
    return net;
}

void put_params(std::ostream& out, const PolicyParams& p) {
    put_i64(out, p.obs_dim);
    put_i64(out, p.n_actions);
    put_mlp(out, p.actor);
    put_mlp(out, p.critic);
}

PolicyParams get_params(std::istream& in) {
    PolicyParams p;
    p.obs_dim = static_cast<int>(get_i64(in));
    p.n_actions = static_cast<int>(get_i64(in));
    p.actor = get_mlp(in);
    p.critic = get_mlp(in);
    return p;
}

void put_schedule(std::ostream& out, const Schedule& s) {
    put_str(out, s.instance);
    put_i64(out, s.makespan);
    put_u64(out, s.assignments.size());
    for (const Assignment& a : s.assignments) {
        put_i64(out, a.job);
        put_i64(out, a.op);
        put_i64(out, a.machine);
        put_i64(out, a.start);
        put_i64(out, a.end);
    }
}

Schedule get_schedule(std::istream& in) {
    Schedule s;
    s.instance = get_str(in);
    s.makespan = get_i64(in);
    s.assignments.resize(static_cast<size_t>(get_u64(in)));
    for (Assignment& a : s.assignments) {
        a.job = static_cast<int>(get_i64(in));
        a.op = static_cast<int>(get_i64(in));
        a.machine = static_cast<int>(get_i64(in));
        a.start = get_i64(in);
        a.end = get_i64(in);
    }
    return s;
}

void put_metrics(std::ostream& out, const UpdateMetrics& m) {
    put_f64(out, m.policy_loss);
    put_f64(out, m.value_loss);
    put_f64(out, m.entropy);
    put_f64(out, m.clip_fraction);
    put_f64(out, m.approx_kl);
    put_f64(out, m.pos_excess);
    put_f64(out, m.neg_excess);
}

UpdateMetrics get_metrics(std::istream& in) {
    UpdateMetrics m;
    m.policy_loss = get_f64(in);
    m.value_loss = get_f64(in);
    m.entropy = get_f64(in);
    m.clip_fraction = get_f64(in);
    m.approx_kl = get_f64(in);
    m.pos_excess = get_f64(in);
    m.neg_excess = get_f64(in);
    return m;
}

void put_trainer_cfg(std::ostream& out, const TrainerConfig& c) {
    put_f64(out, c.clip_epsilon);
    put_f64(out, c.gamma);
    put_f64(out, c.gae_lambda);
    put_f64(out, c.lr_start);
    put_f64(out, c.lr_end);
    put_i64(out, c.n_steps);
    put_i64(out, c.minibatch_size);
    put_i64(out, c.epochs_per_update);
    put_f64(out, c.value_coef);
    put_f64(out, c.entropy_coef);
    put_f64(out, c.max_grad_norm);
    put_i64(out, c.total_steps);
    put_u64(out, c.seed);
    put_f64(out, c.adam_beta1);
    put_f64(out, c.adam_beta2);
    put_f64(out, c.adam_eps);
}

TrainerConfig get_trainer_cfg(std::istream& in) {
    TrainerConfig c;
    c.clip_epsilon = get_f64(in);
    c.gamma = get_f64(in);
    c.gae_lambda = get_f64(in);
    c.lr_start = get_f64(in);
    c.lr_end = get_f64(in);
    c.n_steps = static_cast<int>(get_i64(in));
    c.minibatch_size = static_cast<int>(get_i64(in));
    c.epochs_per_update = static_cast<int>(get_i64(in));
    c.value_coef = get_f64(in);
    c.entropy_coef = get_f64(in);
    c.max_grad_norm = get_f64(in);
    c.total_steps = get_i64(in);
    c.seed = get_u64(in);
    c.adam_beta1 = get_f64(in);
    c.adam_beta2 = get_f64(in);
    c.adam_eps = get_f64(in);
    return c;
}

void put_env_cfg(std::ostream& out, const EnvConfig& c) {
    put_i64(out, c.rollout_budget);
    put_f64(out, c.final_reward_scale);
    put_i64(out, c.final_reward_offset);
    put_f64(out, c.occupancy_threshold);
    put_i64(out, c.invalid_action_limit);
}

EnvConfig get_env_cfg(std::istream& in) {
    EnvConfig c;
    c.rollout_budget = get_i64(in);
    c.final_reward_scale = get_f64(in);
    c.final_reward_offset = static_cast<int>(get_i64(in));
    c.occupancy_threshold = get_f64(in);
    c.invalid_action_limit = get_i64(in);
    return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointData& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    put_u64(out, kMagic);
    put_u64(out, kVersion);

    const TrainerSnapshot& s = data.snapshot;
    put_params(out, s.params);
    put_vec_f(out, s.adam.m);
    put_vec_f(out, s.adam.v);
    put_i64(out, s.adam.t);
    put_str(out, s.rng_state);
    put_i64(out, s.global_step);
    put_i64(out, s.episode_count);
    put_i64(out, s.best_makespan);
    put_schedule(out, s.best_schedule);
    put_metrics(out, s.last_metrics);
    put_str(out, s.env_instance);
    put_str(out, s.env_state);
    put_f64(out, s.ep_reward);

    put_trainer_cfg(out, data.trainer);
    put_env_cfg(out, data.env);
    put_f64(out, data.osm.tau);
    put_i64(out, data.osm.enabled ? 1 : 0);
    put_str(out, data.base_instance);
    put_str(out, data.instance_name);
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

CheckpointData load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    if (get_u64(in) != kMagic) throw std::runtime_error("not a checkpoint file: " + path);
    if (get_u64(in) != kVersion) throw std::runtime_error("unsupported checkpoint version");

    CheckpointData data;
    TrainerSnapshot& s = data.snapshot;
    s.params = get_params(in);
    get_vec_f(in, s.adam.m);
    get_vec_f(in, s.adam.v);
    s.adam.t = get_i64(in);
    s.rng_state = get_str(in);
    s.global_step = get_i64(in);
    s.episode_count = get_i64(in);
    s.best_makespan = get_i64(in);
    s.best_schedule = get_schedule(in);
    s.last_metrics = get_metrics(in);
    s.env_instance = get_str(in);
    s.env_state = get_str(in);
    s.ep_reward = get_f64(in);

    data.trainer = get_trainer_cfg(in);
    data.env = get_env_cfg(in);
    data.osm.tau = get_f64(in);
    data.osm.enabled = get_i64(in) != 0;
    data.base_instance = get_str(in);
    data.instance_name = get_str(in);
    return data;
}

}  // namespace jshop
