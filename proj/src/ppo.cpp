#include "jshop/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace jshop {

namespace {

constexpr int kGradBlock = 8;
constexpr uint64_t kTrainRngTag = 0x545241494eull;
constexpr uint64_t kOsmSeedTag = 0x4f534dull;

}  // namespace

int default_n_steps(const Instance& inst) {
    int cap = 2 * inst.n_jobs * inst.n_machines;
    return std::max(64, (cap / 64) * 64);
}

double lr_at(long long step, const TrainerConfig& cfg) {
    if (cfg.total_steps <= 0) return cfg.lr_start;
    double frac = static_cast<double>(step) / static_cast<double>(cfg.total_steps);
    frac = std::clamp(frac, 0.0, 1.0);
    return cfg.lr_start + (cfg.lr_end - cfg.lr_start) * frac;
}

namespace {

// Stable softmax over the eligible subset; masked entries get probability 0.
// Returns log(sum exp(l - mx)) and the max eligible logit through out-params.
double masked_probs(const std::vector<double>& logits, const uint8_t* mask, int n,
                    std::vector<double>& probs, double& mx) {
    bool any = false;
    mx = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
        if (!mask[k]) continue;
        any = true;
        mx = std::max(mx, logits[static_cast<size_t>(k)]);
    }
    if (!any) throw std::logic_error("no eligible action to pick from");
    if (!std::isfinite(mx)) throw TrainingDiverged("non-finite policy logits");
    probs.assign(static_cast<size_t>(n), 0.0);
    double denom = 0.0;
    for (int k = 0; k < n; ++k) {
        if (!mask[k]) continue;
        double e = std::exp(logits[static_cast<size_t>(k)] - mx);
        probs[static_cast<size_t>(k)] = e;
        denom += e;
    }
    for (auto& p : probs) p /= denom;
    return std::log(denom);
}

}  // namespace

int sample_masked(const std::vector<double>& logits, const std::vector<uint8_t>& mask,
                  RngStream& rng, double* log_prob) {
    const int n = static_cast<int>(mask.size());
    std::vector<double> probs;
    double mx = 0.0;
    double log_denom = masked_probs(logits, mask.data(), n, probs, mx);
    double u = rng.unit();
    int picked = -1;
    double cum = 0.0;
    for (int k = 0; k < n; ++k) {
        if (!mask[static_cast<size_t>(k)]) continue;
        cum += probs[static_cast<size_t>(k)];
        picked = k;
        if (u < cum) break;
    }
    if (log_prob) *log_prob = logits[static_cast<size_t>(picked)] - mx - log_denom;
    return picked;
}

int argmax_masked(const std::vector<double>& logits, const std::vector<uint8_t>& mask) {
    int best = -1;
    for (int k = 0; k < static_cast<int>(mask.size()); ++k) {
        if (!mask[static_cast<size_t>(k)]) continue;
        if (best < 0 || logits[static_cast<size_t>(k)] > logits[static_cast<size_t>(best)])
            best = k;
    }
    if (best < 0) throw std::logic_error("no eligible action to pick from");
    return best;
}

double masked_log_prob(const std::vector<double>& logits, const std::vector<uint8_t>& mask,
                       int action) {
    if (action < 0 || action >= static_cast<int>(mask.size()) ||
        !mask[static_cast<size_t>(action)])
        throw std::logic_error("log-prob of an ineligible action");
    std::vector<double> probs;
    double mx = 0.0;
    double log_denom = masked_probs(logits, mask.data(), static_cast<int>(mask.size()),
                                    probs, mx);
    return logits[static_cast<size_t>(action)] - mx - log_denom;
}

void compute_advantages(RolloutBuffer& buffer, double gamma, double gae_lambda) {
    const size_t t_count = buffer.steps.size();
    buffer.advantages.assign(t_count, 0.0);
    buffer.returns.assign(t_count, 0.0);
    double next_adv = 0.0;
    for (size_t t = t_count; t-- > 0;) {
        const StepRecord& s = buffer.steps[t];
        double next_v;
        if (s.terminal) {
            next_v = s.bootstrap_value;
            next_adv = 0.0;
        } else if (t + 1 == t_count) {
            next_v = buffer.end_bootstrap;
            next_adv = 0.0;
        } else {
            next_v = buffer.steps[t + 1].value;
        }
        double delta = s.reward + gamma * next_v - s.value;
        double adv = delta + gamma * gae_lambda * next_adv;
        buffer.advantages[t] = adv;
        buffer.returns[t] = adv + s.value;
        next_adv = adv;
    }
}

void normalize_advantages(std::vector<double>& advantages) {
    if (advantages.empty()) return;
    const double n = static_cast<double>(advantages.size());
    double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
    double var = 0.0;
    for (double a : advantages) var += (a - mean) * (a - mean);
    double sd = std::sqrt(var / n);
    for (auto& a : advantages) a = (a - mean) / (sd + 1e-8);
}

namespace {

// Loss, metrics and parameter gradients for one sample, scaled by 1/B.
void sample_grad(const PolicyParams& params, const MinibatchItem& it, const TrainerConfig& cfg,
                 double inv_b, PolicyParams& grad, LossStats& stats) {
    std::vector<double> obs(it.obs, it.obs + params.obs_dim);
    MlpCache actor_cache, critic_cache;
    std::vector<double> logits, vout;
    mlp_forward(params.actor, obs, logits, &actor_cache);
    mlp_forward(params.critic, obs, vout, &critic_cache);
    const double value = vout[0];

    std::vector<double> probs;
    double mx = 0.0;
    double log_denom = masked_probs(logits, it.mask, it.n_actions, probs, mx);
    const double logp_new = logits[static_cast<size_t>(it.action)] - mx - log_denom;
    const double ratio = std::exp(logp_new - it.log_prob_old);
    const double adv = it.advantage;
    const double eps = cfg.clip_epsilon;

    const double surr1 = ratio * adv;
    const double surr2 = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv;
    const double surr = std::min(surr1, surr2);

    double entropy = 0.0;
    for (int k = 0; k < it.n_actions; ++k) {
        double p = probs[static_cast<size_t>(k)];
        if (p > 0.0) entropy -= p * std::log(p);
    }

    stats.policy_loss += -surr;
    stats.value_loss += (value - it.ret) * (value - it.ret);
    stats.entropy += entropy;
    if (std::abs(ratio - 1.0) > eps) stats.clip_count += 1.0;
    stats.kl_sum += it.log_prob_old - logp_new;
    if (adv > 0.0) stats.pos_excess = std::max(stats.pos_excess, surr - (1.0 + eps) * adv);
    if (adv < 0.0) stats.neg_excess = std::max(stats.neg_excess, surr - (1.0 - eps) * adv);

    // min(r*A, clip(r)*A) passes gradient only while the unclipped branch is
    // active (or inside the clip window, where the two agree).
    const bool flow = adv >= 0.0 ? ratio <= 1.0 + eps : ratio >= 1.0 - eps;
    const double coef = flow ? ratio * adv : 0.0;

    std::vector<double> dlogits(static_cast<size_t>(it.n_actions), 0.0);
    for (int k = 0; k < it.n_actions; ++k) {
        if (!it.mask[k]) continue;
        double p = probs[static_cast<size_t>(k)];
        double dsurr = coef * ((k == it.action ? 1.0 : 0.0) - p);
        double dent = p > 0.0 ? -p * (std::log(p) + entropy) : 0.0;
        dlogits[static_cast<size_t>(k)] = (-dsurr - cfg.entropy_coef * dent) * inv_b;
    }
    mlp_backward(params.actor, actor_cache, dlogits, grad.actor);

    std::vector<double> dvalue{2.0 * cfg.value_coef * (value - it.ret) * inv_b};
    mlp_backward(params.critic, critic_cache, dvalue, grad.critic);
}

void merge_stats(LossStats& total, const LossStats& part) {
    total.policy_loss += part.policy_loss;
    total.value_loss += part.value_loss;
    total.entropy += part.entropy;
    total.clip_count += part.clip_count;
    total.kl_sum += part.kl_sum;
    total.pos_excess = std::max(total.pos_excess, part.pos_excess);
    total.neg_excess = std::max(total.neg_excess, part.neg_excess);
}

void finalize_stats(LossStats& total, int batch_size) {
    total.policy_loss /= batch_size;
    total.value_loss /= batch_size;
    total.entropy /= batch_size;
}

}  // namespace

LossStats ppo_batch_grad_serial(const PolicyParams& params,
                                const std::vector<MinibatchItem>& batch,
                                const TrainerConfig& cfg, PolicyParams& grad) {
    const int batch_size = static_cast<int>(batch.size());
    if (batch_size == 0) return {};
    const double inv_b = 1.0 / batch_size;
    const int n_blocks = (batch_size + kGradBlock - 1) / kGradBlock;
    LossStats total;
    PolicyParams partial = zeros_like(params);
    for (int blk = 0; blk < n_blocks; ++blk) {
        visit_params(partial, [](double& v) { v = 0.0; });
        LossStats part;
        const int lo = blk * kGradBlock;
        const int hi = std::min(batch_size, lo + kGradBlock);
        for (int i = lo; i < hi; ++i) sample_grad(params, batch[i], cfg, inv_b, partial, part);
        add_scaled(grad, partial, 1.0);
        merge_stats(total, part);
    }
    finalize_stats(total, batch_size);
    return total;
}

LossStats ppo_batch_grad(const PolicyParams& params, const std::vector<MinibatchItem>& batch,
                         const TrainerConfig& cfg, PolicyParams& grad) {
    const int batch_size = static_cast<int>(batch.size());
    if (batch_size == 0) return {};
    const double inv_b = 1.0 / batch_size;
    const int n_blocks = (batch_size + kGradBlock - 1) / kGradBlock;
    std::vector<PolicyParams> partials(static_cast<size_t>(n_blocks));
    std::vector<LossStats> parts(static_cast<size_t>(n_blocks));
#pragma omp parallel for schedule(static)
    for (int blk = 0; blk < n_blocks; ++blk) {
        partials[static_cast<size_t>(blk)] = zeros_like(params);
        const int lo = blk * kGradBlock;
        const int hi = std::min(batch_size, lo + kGradBlock);
        for (int i = lo; i < hi; ++i)
            sample_grad(params, batch[i], cfg, inv_b, partials[static_cast<size_t>(blk)],
                        parts[static_cast<size_t>(blk)]);
    }
    LossStats total;
    for (int blk = 0; blk < n_blocks; ++blk) {
        add_scaled(grad, partials[static_cast<size_t>(blk)], 1.0);
        merge_stats(total, parts[static_cast<size_t>(blk)]);
    }
    finalize_stats(total, batch_size);
    return total;
}

AdamState make_adam_state(const PolicyParams& params) {
    AdamState st;
    st.m.assign(policy_param_count(params), 0.0);
    st.v.assign(policy_param_count(params), 0.0);
    return st;
}

void adam_step(PolicyParams& params, const PolicyParams& grad, AdamState& state,
               const TrainerConfig& cfg, double lr) {
    state.t += 1;
    const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    size_t i = 0;
    zip_params(params, grad, [&](double& p, const double& g) {
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
        p -= lr * (state.m[i] / bc1) / (std::sqrt(state.v[i] / bc2) + cfg.adam_eps);
        ++i;
    });
    if (i != state.m.size()) throw std::logic_error("optimizer state does not match network");
}

UpdateMetrics ppo_update(PolicyParams& params, AdamState& adam, const RolloutBuffer& buffer,
                         const TrainerConfig& cfg, double lr, RngStream& rng) {
    const size_t t_count = buffer.steps.size();
    if (t_count == 0) throw std::logic_error("update on an empty rollout");
    if (buffer.advantages.size() != t_count || buffer.returns.size() != t_count)
        throw std::logic_error("advantages must be computed before the update");

    std::vector<double> adv = buffer.advantages;
    normalize_advantages(adv);

    std::vector<size_t> idx(t_count);
    std::iota(idx.begin(), idx.end(), size_t{0});
    const size_t mb = cfg.minibatch_size > 0 ? static_cast<size_t>(cfg.minibatch_size) : t_count;

    double pl_sum = 0.0, vl_sum = 0.0, ent_sum = 0.0, clip_sum = 0.0, kl_sum = 0.0;
    double pos_mx = 0.0, neg_mx = 0.0;
    long long samples = 0;

    for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
        for (size_t i = t_count; i-- > 1;) {
            size_t j = rng.bounded(static_cast<uint32_t>(i + 1));
            std::swap(idx[i], idx[j]);
        }
        for (size_t start = 0; start < t_count; start += mb) {
            const size_t end = std::min(t_count, start + mb);
            std::vector<MinibatchItem> items;
            items.reserve(end - start);
            for (size_t k = start; k < end; ++k) {
                const StepRecord& s = buffer.steps[idx[k]];
                items.push_back({s.obs.data(), s.mask.data(), static_cast<int>(s.mask.size()),
                                 s.action, s.log_prob, adv[idx[k]], buffer.returns[idx[k]]});
            }
            PolicyParams grad = zeros_like(params);
            LossStats st = ppo_batch_grad(params, items, cfg, grad);
            const double loss =
                st.policy_loss + cfg.value_coef * st.value_loss - cfg.entropy_coef * st.entropy;
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "non-finite loss (policy=" << st.policy_loss
                    << " value=" << st.value_loss << " entropy=" << st.entropy << ")";
                throw TrainingDiverged(msg.str());
            }
            const double gnorm = std::sqrt(grad_sq_norm(grad));
            if (!std::isfinite(gnorm)) throw TrainingDiverged("non-finite gradient norm");
            if (gnorm > cfg.max_grad_norm && gnorm > 0.0)
                scale_grad(grad, cfg.max_grad_norm / gnorm);
            adam_step(params, grad, adam, cfg, lr);

            const auto batch_size = static_cast<double>(items.size());
            pl_sum += st.policy_loss * batch_size;
            vl_sum += st.value_loss * batch_size;
            ent_sum += st.entropy * batch_size;
            clip_sum += st.clip_count;
            kl_sum += st.kl_sum;
            samples += static_cast<long long>(items.size());
            pos_mx = std::max(pos_mx, st.pos_excess);
            neg_mx = std::max(neg_mx, st.neg_excess);
        }
    }

    UpdateMetrics m;
    const auto total = static_cast<double>(samples);
    m.policy_loss = pl_sum / total;
    m.value_loss = vl_sum / total;
    m.entropy = ent_sum / total;
    m.clip_fraction = clip_sum / total;
    m.approx_kl = kl_sum / total;
    m.pos_excess = pos_mx;
    m.neg_excess = neg_mx;
    return m;
}

std::string episode_log_header() {
    return "step,episode,makespan,reward,ep_length,occupancy,lr,clip_fraction,approx_kl";
}

std::string episode_log_row(const EpisodeLog& row) {
    char buf[320];
    std::snprintf(buf, sizeof buf, "%lld,%lld,%lld,%.17g,%lld,%.17g,%.17g,%.17g,%.17g",
                  row.step, row.episode, row.makespan, row.reward, row.ep_length,
                  row.occupancy, row.lr, row.clip_fraction, row.approx_kl);
    return buf;
}

namespace {

Instance episode_instance(const OsmState& osm, const OsmConfig& osm_cfg, uint64_t osm_seed,
                          long long episode_index) {
    if (!osm_cfg.enabled) return osm.base;
    long long k = swap_count(osm, osm_cfg, osm.base);
    if (k <= 0) return osm.base;
    return perturb(osm.base, k, mix_seed(osm_seed, static_cast<uint64_t>(episode_index)));
}

}  // namespace

TrainResult train(const Instance& base, EnvConfig env_cfg, TrainerConfig trainer_cfg,
                  OsmConfig osm_cfg, std::ostream* log_out, const TrainerSnapshot* resume,
                  long long halt_step) {
    validate(base);
    // The budget is resolved once against the pristine instance; perturbed
    // episodes reuse it so episodes stay comparable across a run.
    Env probe(base, env_cfg);
    const EnvConfig resolved_env = probe.config();
    TrainerConfig cfg = trainer_cfg;
    if (cfg.n_steps <= 0) cfg.n_steps = default_n_steps(base);
    if (cfg.total_steps <= 0) throw std::invalid_argument("total_steps must be positive");

    const uint64_t osm_seed = mix_seed(cfg.seed, kOsmSeedTag);
    const int obs_dim = Observation::dim(base.n_jobs, base.n_machines);

    PolicyParams params;
    AdamState adam;
    RngStream rng(0);
    long long global_step = 0, episode_count = 0, best_makespan = -1;
    Schedule best_schedule;
    UpdateMetrics last_metrics;
    double ep_reward = 0.0;
    OsmState osm{0, base};
    Env env = probe;

    if (resume) {
        params = resume->params;
        adam = resume->adam;
        rng.load_state(resume->rng_state);
        global_step = resume->global_step;
        episode_count = resume->episode_count;
        best_makespan = resume->best_makespan;
        best_schedule = resume->best_schedule;
        last_metrics = resume->last_metrics;
        ep_reward = resume->ep_reward;
        osm.training_phase = episode_count;
        env = Env(parse_standard(resume->env_instance, base.name), resolved_env);
        std::istringstream state(resume->env_state);
        env.load_state(state);
    } else {
        params = init_policy(obs_dim, base.n_jobs, cfg.seed);
        adam = make_adam_state(params);
        rng = RngStream(mix_seed(cfg.seed, kTrainRngTag));
        env = Env(episode_instance(osm, osm_cfg, osm_seed, 0), resolved_env);
    }

    TrainResult result;
    if (log_out && !resume) (*log_out) << episode_log_header() << '\n';

    auto critic_value = [&params](const std::vector<double>& obs_vec) {
        std::vector<double> v;
        mlp_forward(params.critic, obs_vec, v);
        return v[0];
    };

    while (global_step < cfg.total_steps && (halt_step <= 0 || global_step < halt_step)) {
        RolloutBuffer buffer;
        buffer.steps.reserve(static_cast<size_t>(cfg.n_steps));
        bool last_terminal = false;
        try {
        for (int t = 0; t < cfg.n_steps && global_step < cfg.total_steps; ++t) {
            Observation obs = env.observation();
            std::vector<double> logits;
            double value = 0.0;
            policy_forward(params, obs.vec, logits, value);
            double logp = 0.0;
            int action = sample_masked(logits, obs.mask, rng, &logp);
            StepResult sr = env.step(action);
            ++global_step;
            ep_reward += sr.reward;

            StepRecord rec;
            rec.obs = std::move(obs.vec);
            rec.mask = std::move(obs.mask);
            rec.action = action;
            rec.log_prob = logp;
            rec.reward = sr.reward;
            rec.value = value;
            last_terminal = false;
            if (sr.done || sr.truncated) {
                rec.terminal = true;
                rec.bootstrap_value =
                    (sr.truncated && !sr.done) ? critic_value(sr.obs.vec) : 0.0;
                last_terminal = true;
                ++episode_count;

                EpisodeLog row;
                row.step = global_step;
                row.episode = episode_count;
                row.makespan = sr.info.makespan_so_far;
                row.reward = ep_reward;
                row.ep_length = env.episode_step_count();
                row.occupancy = sr.info.occupancy;
                row.lr = lr_at(global_step, cfg);
                row.clip_fraction = last_metrics.clip_fraction;
                row.approx_kl = last_metrics.approx_kl;
                row.completed = sr.done && !sr.truncated;
                if (row.completed) {
                    long long ms = env.makespan();
                    if (best_makespan < 0 || ms < best_makespan) {
                        best_makespan = ms;
                        best_schedule = env.schedule();
                    }
                }
                result.episodes.push_back(row);
                if (log_out) (*log_out) << episode_log_row(row) << '\n' << std::flush;

                on_episode_end(osm);
                env = Env(episode_instance(osm, osm_cfg, osm_seed, episode_count), resolved_env);
                ep_reward = 0.0;
            }
            buffer.steps.push_back(std::move(rec));
        }
        if (buffer.steps.empty()) break;
        buffer.end_bootstrap = last_terminal ? 0.0 : critic_value(env.observation().vec);
        compute_advantages(buffer, cfg.gamma, cfg.gae_lambda);
        {
            // An aborted update must leave the last finite state behind.
            PolicyParams params_before = params;
            AdamState adam_before = adam;
            try {
                last_metrics = ppo_update(params, adam, buffer, cfg, lr_at(global_step, cfg), rng);
                bool finite = true;
                visit_params(params, [&finite](const double& v) {
                    if (!std::isfinite(v)) finite = false;
                });
                if (!finite) throw TrainingDiverged("non-finite network parameters");
            } catch (const TrainingDiverged& e) {
                params = std::move(params_before);
                adam = std::move(adam_before);
                result.diverged = e.what();
                break;
            }
        }
        } catch (const TrainingDiverged& e) {
            result.diverged = e.what();
            break;
        }
    }

    TrainerSnapshot snap;
    snap.params = std::move(params);
    snap.adam = std::move(adam);
    snap.rng_state = rng.save_state();
    snap.global_step = global_step;
    snap.episode_count = episode_count;
    snap.best_makespan = best_makespan;
    snap.best_schedule = std::move(best_schedule);
    snap.last_metrics = last_metrics;
    snap.env_instance = serialize_standard(env.instance());
    std::ostringstream env_state;
    env.save_state(env_state);
    snap.env_state = env_state.str();
    snap.ep_reward = ep_reward;

    result.snapshot = std::move(snap);
    result.resolved_env = resolved_env;
    result.resolved_trainer = cfg;
    return result;
}

EvalResult evaluate(const PolicyParams& params, const Instance& inst, EnvConfig env_cfg,
                    int episodes, bool greedy, uint64_t seed) {
    validate(inst);
    if (env_cfg.rollout_budget <= 0) env_cfg.rollout_budget = inst.total_duration();
    EvalResult res;
    res.best_makespan = -1;
    double sum = 0.0;
    int counted = 0;
    const int n_eps = greedy ? 1 : std::max(1, episodes);
    for (int e = 0; e < n_eps; ++e) {
        Env env(inst, env_cfg);
        RngStream rng(mix_seed(seed, static_cast<uint64_t>(e)));
        while (!env.done() && !env.truncated()) {
            Observation obs = env.observation();
            std::vector<double> logits;
            mlp_forward(params.actor, obs.vec, logits);
            int action = greedy ? argmax_masked(logits, obs.mask)
                                : sample_masked(logits, obs.mask, rng, nullptr);
            env.step(action);
        }
        if (!env.done()) continue;
        long long ms = env.makespan();
        sum += static_cast<double>(ms);
        ++counted;
        if (res.best_makespan < 0 || ms < res.best_makespan) {
            res.best_makespan = ms;
            res.best_schedule = env.schedule();
        }
    }
    res.mean_makespan = counted > 0 ? sum / counted : 0.0;
    return res;
}

}  // namespace jshop
