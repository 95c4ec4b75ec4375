#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "jshop/instance.hpp"
#include "jshop/mlp.hpp"
#include "jshop/osm.hpp"
#include "jshop/rng.hpp"
#include "jshop/schedule.hpp"
#include "jshop/sim_env.hpp"

namespace jshop {

struct TrainerConfig {
    double clip_epsilon = 0.2;
    double gamma = 0.966;
    double gae_lambda = 0.95;
    double lr_start = 1e-4;
    double lr_end = 1e-8;
    int n_steps = 0;  // 0 means default_n_steps(instance)
    int minibatch_size = 64;
    int epochs_per_update = 10;
    double value_coef = 0.5;
    double entropy_coef = 0.01;
    double max_grad_norm = 0.5;
    long long total_steps = 1000000;
    uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
};

// Largest multiple of 64 not exceeding 2*n*m, floored at 64.
int default_n_steps(const Instance& inst);

// Linear decay from lr_start at step 0 to lr_end at total_steps.
double lr_at(long long step, const TrainerConfig& cfg);

// Masked sampling/argmax over a categorical distribution: ineligible logits
// are dropped before the softmax, so masked actions have probability zero.
int sample_masked(const std::vector<double>& logits, const std::vector<uint8_t>& mask,
                  RngStream& rng, double* log_prob);
int argmax_masked(const std::vector<double>& logits, const std::vector<uint8_t>& mask);
double masked_log_prob(const std::vector<double>& logits, const std::vector<uint8_t>& mask,
                       int action);

struct StepRecord {
    std::vector<double> obs;
    std::vector<uint8_t> mask;
    int action = 0;
    double log_prob = 0.0;
    double reward = 0.0;
    double value = 0.0;
    // terminal marks an episode boundary after this step. bootstrap_value is
    // the critic value of the successor state for truncated episodes and 0
    // for true terminations.
    bool terminal = false;
    double bootstrap_value = 0.0;
};

struct RolloutBuffer {
    std::vector<StepRecord> steps;
    // Critic value of the next state when the horizon cuts mid-episode.
    double end_bootstrap = 0.0;
    std::vector<double> advantages;
    std::vector<double> returns;
};

// Generalized advantage estimation:
//   delta_t = r_t + gamma * V(s_{t+1}) * (1 - terminal_t) - V(s_t)
//   A_t     = delta_t + gamma * lambda * (1 - terminal_t) * A_{t+1}
// with the per-step bootstrap values substituting V(s_{t+1}) at boundaries.
// Fills raw (unnormalized) advantages and returns = advantages + values.
void compute_advantages(RolloutBuffer& buffer, double gamma, double gae_lambda);

// Zero mean, unit variance in place.
void normalize_advantages(std::vector<double>& advantages);

// One training minibatch entry; pointers refer into the rollout buffer.
struct MinibatchItem {
    const double* obs = nullptr;
    const uint8_t* mask = nullptr;
    int n_actions = 0;
    int action = 0;
    double log_prob_old = 0.0;
    double advantage = 0.0;
    double ret = 0.0;
};

struct LossStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_count = 0.0;
    double kl_sum = 0.0;
    // Largest violations of the surrogate bounds (1+eps)A for A>0 and
    // (1-eps)A for A<0; exactly 0 when clipping is implemented correctly.
    double pos_excess = 0.0;
    double neg_excess = 0.0;
};

// Mean loss over the batch:
//   L = -mean(min(r*A, clip(r, 1-eps, 1+eps)*A))
//       + value_coef * mean((V - ret)^2) - entropy_coef * mean(H)
// Gradients are accumulated into grad (zeroed by the caller). Samples are
// processed in fixed blocks of 8 whose partial gradients are combined in
// block-index order, so the serial and OpenMP variants are bit-identical for
// any thread count.
LossStats ppo_batch_grad_serial(const PolicyParams& params,
                                const std::vector<MinibatchItem>& batch,
                                const TrainerConfig& cfg, PolicyParams& grad);
LossStats ppo_batch_grad(const PolicyParams& params, const std::vector<MinibatchItem>& batch,
                         const TrainerConfig& cfg, PolicyParams& grad);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long long t = 0;
    bool operator==(const AdamState&) const = default;
};

AdamState make_adam_state(const PolicyParams& params);
void adam_step(PolicyParams& params, const PolicyParams& grad, AdamState& state,
               const TrainerConfig& cfg, double lr);

class TrainingDiverged : public std::runtime_error {
public:
    explicit TrainingDiverged(const std::string& msg) : std::runtime_error(msg) {}
};

struct UpdateMetrics {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
    double approx_kl = 0.0;
    double pos_excess = 0.0;
    double neg_excess = 0.0;
};

// epochs_per_update passes of shuffled minibatches over the buffer; advantages
// normalized once per update; global gradient-norm clip; Adam step at the
// given learning rate. Throws TrainingDiverged on any non-finite loss.
UpdateMetrics ppo_update(PolicyParams& params, AdamState& adam, const RolloutBuffer& buffer,
                         const TrainerConfig& cfg, double lr, RngStream& rng);

struct EpisodeLog {
    long long step = 0;     // global env steps at episode end
    long long episode = 0;  // 1-based episode index
    long long makespan = 0; // completed episodes; progress high-water otherwise
    double reward = 0.0;    // dense + final
    long long ep_length = 0;
    double occupancy = 1.0;
    double lr = 0.0;
    double clip_fraction = 0.0;
    double approx_kl = 0.0;
    bool completed = false;
};

std::string episode_log_header();
std::string episode_log_row(const EpisodeLog& row);

// Everything needed to continue a run bit-compatibly: parameters, optimizer,
// RNG, counters, best result so far, and the live mid-episode environment.
struct TrainerSnapshot {
    PolicyParams params;
    AdamState adam;
    std::string rng_state;
    long long global_step = 0;
    long long episode_count = 0;
    long long best_makespan = -1;
    Schedule best_schedule;
    UpdateMetrics last_metrics;
    std::string env_instance;  // standard-format serialization
    std::string env_state;
    double ep_reward = 0.0;
};

struct TrainResult {
    TrainerSnapshot snapshot;
    std::vector<EpisodeLog> episodes;
    EnvConfig resolved_env;
    TrainerConfig resolved_trainer;
    // Non-empty when the run aborted on non-finite values; the snapshot then
    // holds the last state that was still finite.
    std::string diverged;
};

// Rollout/update loop until total_steps env transitions. With OSM enabled,
// every new episode re-perturbs the pristine base instance with the current
// phase's swap count. Episode rows stream to log_out when given. Passing a
// snapshot resumes that run instead of starting fresh. halt_step (when > 0)
// pauses the run at the first update boundary at or past that step, leaving a
// snapshot that resumes bit-compatibly.
TrainResult train(const Instance& base, EnvConfig env_cfg, TrainerConfig trainer_cfg,
                  OsmConfig osm_cfg, std::ostream* log_out = nullptr,
                  const TrainerSnapshot* resume = nullptr, long long halt_step = 0);

struct EvalResult {
    long long best_makespan = 0;
    double mean_makespan = 0.0;
    Schedule best_schedule;
};

// greedy: one deterministic argmax episode. Otherwise: `episodes` stochastic
// episodes with per-episode seed streams (mean over all, best kept).
EvalResult evaluate(const PolicyParams& params, const Instance& inst, EnvConfig env_cfg,
                    int episodes, bool greedy, uint64_t seed);

}  // namespace jshop
