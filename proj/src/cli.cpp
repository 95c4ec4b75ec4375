#include "jshop/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "jshop/checkpoint.hpp"
#include "jshop/dispatch.hpp"
#include "jshop/instance.hpp"
#include "jshop/osm.hpp"
#include "jshop/ppo.hpp"
#include "jshop/schedule.hpp"
#include "jshop/sim_env.hpp"

namespace jshop {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Usage/configuration problems map to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CliOptions {
    std::string subcommand;
    std::vector<std::string> instances;
    std::string instance_arg;
    std::string manifest_arg;
    std::string format = "std";
    uint64_t seed = 0;
    bool seed_given = false;
    std::string out_dir = ".";
    bool out_given = false;
    std::string config_path;
    std::string bounds_path;
    std::vector<std::string> rules;
    std::vector<std::string> checkpoints;
    long long steps_override = 0;
    bool steps_given = false;
    std::string osm_mode;  // "", "on", "off"
    double osm_tau = 0.0;
    bool osm_tau_given = false;
    double tau = 0.0;
    bool tau_given = false;
    long long swaps = -1;
    long long tp = -1;
    int episodes = 32;
    bool sample = false;
    std::string resume_path;
};

struct ConfigSet {
    EnvConfig env;
    TrainerConfig trainer;
    OsmConfig osm;
};

std::string iso_now() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string abs_path(const std::string& p) {
    if (p.empty()) return p;
    return fs::absolute(fs::path(p)).lexically_normal().string();
}

std::string path_stem(const std::string& p) { return fs::path(p).stem().string(); }

std::string fmt1(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

bool parse_ll_value(const std::string& s, long long& out) {
    try {
        size_t pos = 0;
        out = std::stoll(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

bool parse_u64_value(const std::string& s, uint64_t& out) {
    try {
        size_t pos = 0;
        out = std::stoull(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

bool parse_d_value(const std::string& s, double& out) {
    try {
        size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

bool parse_bool_value(const std::string& s, bool& out) {
    if (s == "1" || s == "true" || s == "on" || s == "yes") {
        out = true;
        return true;
    }
    if (s == "0" || s == "false" || s == "off" || s == "no") {
        out = false;
        return true;
    }
    return false;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// Accepts "section.key = value"; sections env/trainer/osm cover every field.
void set_config_value(const std::string& key, const std::string& value, ConfigSet& cfg) {
    auto fail = [&]() -> void {
        throw UsageError("bad value '" + value + "' for config key '" + key + "'");
    };
    auto as_ll = [&](long long& dst) {
        if (!parse_ll_value(value, dst)) fail();
    };
    auto as_int = [&](int& dst) {
        long long v = 0;
        if (!parse_ll_value(value, v)) fail();
        dst = static_cast<int>(v);
    };
    auto as_d = [&](double& dst) {
        if (!parse_d_value(value, dst)) fail();
    };

    if (key == "env.rollout_budget") return as_ll(cfg.env.rollout_budget);
    if (key == "env.final_reward_scale") return as_d(cfg.env.final_reward_scale);
    if (key == "env.final_reward_offset") return as_int(cfg.env.final_reward_offset);
    if (key == "env.occupancy_threshold") return as_d(cfg.env.occupancy_threshold);
    if (key == "env.invalid_action_limit") return as_ll(cfg.env.invalid_action_limit);

    if (key == "trainer.clip_epsilon") return as_d(cfg.trainer.clip_epsilon);
    if (key == "trainer.gamma") return as_d(cfg.trainer.gamma);
    if (key == "trainer.gae_lambda") return as_d(cfg.trainer.gae_lambda);
    if (key == "trainer.lr_start") return as_d(cfg.trainer.lr_start);
    if (key == "trainer.lr_end") return as_d(cfg.trainer.lr_end);
    if (key == "trainer.n_steps") return as_int(cfg.trainer.n_steps);
    if (key == "trainer.minibatch_size") return as_int(cfg.trainer.minibatch_size);
    if (key == "trainer.epochs_per_update") return as_int(cfg.trainer.epochs_per_update);
    if (key == "trainer.value_coef") return as_d(cfg.trainer.value_coef);
    if (key == "trainer.entropy_coef") return as_d(cfg.trainer.entropy_coef);
    if (key == "trainer.max_grad_norm") return as_d(cfg.trainer.max_grad_norm);
    if (key == "trainer.total_steps") return as_ll(cfg.trainer.total_steps);
    if (key == "trainer.seed") {
        if (!parse_u64_value(value, cfg.trainer.seed)) fail();
        return;
    }
    if (key == "trainer.adam_beta1") return as_d(cfg.trainer.adam_beta1);
    if (key == "trainer.adam_beta2") return as_d(cfg.trainer.adam_beta2);
    if (key == "trainer.adam_eps") return as_d(cfg.trainer.adam_eps);

    if (key == "osm.tau") return as_d(cfg.osm.tau);
    if (key == "osm.enabled") {
        if (!parse_bool_value(value, cfg.osm.enabled)) fail();
        return;
    }
    throw UsageError("unknown config key '" + key + "'");
}

void apply_config_file(const std::string& path, ConfigSet& cfg) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::exception& e) {
        throw UsageError(std::string("cannot read config file: ") + e.what());
    }
    std::istringstream lines(text);
    std::string line;
    int lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + " is not key=value");
        set_config_value(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), cfg);
    }
}

json env_to_json(const EnvConfig& c) {
    return {{"rollout_budget", c.rollout_budget},
            {"final_reward_scale", c.final_reward_scale},
            {"final_reward_offset", c.final_reward_offset},
            {"occupancy_threshold", c.occupancy_threshold},
            {"invalid_action_limit", c.invalid_action_limit}};
}

EnvConfig env_from_json(const json& j) {
    EnvConfig c;
    c.rollout_budget = j.at("rollout_budget").get<long long>();
    c.final_reward_scale = j.at("final_reward_scale").get<double>();
    c.final_reward_offset = j.at("final_reward_offset").get<int>();
    c.occupancy_threshold = j.at("occupancy_threshold").get<double>();
    c.invalid_action_limit = j.at("invalid_action_limit").get<long long>();
    return c;
}

json trainer_to_json(const TrainerConfig& c) {
    return {{"clip_epsilon", c.clip_epsilon},
            {"gamma", c.gamma},
            {"gae_lambda", c.gae_lambda},
            {"lr_start", c.lr_start},
            {"lr_end", c.lr_end},
            {"n_steps", c.n_steps},
            {"minibatch_size", c.minibatch_size},
            {"epochs_per_update", c.epochs_per_update},
            {"value_coef", c.value_coef},
            {"entropy_coef", c.entropy_coef},
            {"max_grad_norm", c.max_grad_norm},
            {"total_steps", c.total_steps},
            {"seed", c.seed},
            {"adam_beta1", c.adam_beta1},
            {"adam_beta2", c.adam_beta2},
            {"adam_eps", c.adam_eps}};
}

TrainerConfig trainer_from_json(const json& j) {
    TrainerConfig c;
    c.clip_epsilon = j.at("clip_epsilon").get<double>();
    c.gamma = j.at("gamma").get<double>();
    c.gae_lambda = j.at("gae_lambda").get<double>();
    c.lr_start = j.at("lr_start").get<double>();
    c.lr_end = j.at("lr_end").get<double>();
    c.n_steps = j.at("n_steps").get<int>();
    c.minibatch_size = j.at("minibatch_size").get<int>();
    c.epochs_per_update = j.at("epochs_per_update").get<int>();
    c.value_coef = j.at("value_coef").get<double>();
    c.entropy_coef = j.at("entropy_coef").get<double>();
    c.max_grad_norm = j.at("max_grad_norm").get<double>();
    c.total_steps = j.at("total_steps").get<long long>();
    c.seed = j.at("seed").get<uint64_t>();
    c.adam_beta1 = j.at("adam_beta1").get<double>();
    c.adam_beta2 = j.at("adam_beta2").get<double>();
    c.adam_eps = j.at("adam_eps").get<double>();
    return c;
}

json osm_to_json(const OsmConfig& c) { return {{"tau", c.tau}, {"enabled", c.enabled}}; }

OsmConfig osm_from_json(const json& j) {
    OsmConfig c;
    c.tau = j.at("tau").get<double>();
    c.enabled = j.at("enabled").get<bool>();
    return c;
}

fs::path out_file(const CliOptions& opts, const std::string& name) {
    return fs::path(opts.out_dir) / name;
}

void write_manifest(const CliOptions& opts, const ConfigSet& cfg, const json& result,
                    const std::string& started) {
    json m;
    m["tool_version"] = kToolVersion;
    m["subcommand"] = opts.subcommand;
    m["format"] = opts.format;
    json inst = json::array();
    for (const auto& p : opts.instances) inst.push_back(abs_path(p));
    m["instances"] = inst;
    json cks = json::array();
    for (const auto& p : opts.checkpoints) cks.push_back(abs_path(p));
    m["checkpoints"] = cks;
    m["rules"] = opts.rules;
    m["bounds"] = opts.bounds_path.empty() ? "" : abs_path(opts.bounds_path);
    m["seed"] = opts.seed;
    m["out_dir"] = abs_path(opts.out_dir);
    m["env"] = env_to_json(cfg.env);
    m["trainer"] = trainer_to_json(cfg.trainer);
    m["osm"] = osm_to_json(cfg.osm);
    m["options"] = {{"episodes", opts.episodes},
                    {"sample", opts.sample},
                    {"swaps", opts.swaps},
                    {"tp", opts.tp},
                    {"steps_override", opts.steps_override},
                    {"resume", opts.resume_path.empty() ? "" : abs_path(opts.resume_path)}};
    m["started_at"] = started;
    m["finished_at"] = iso_now();
    m["result"] = result;
    write_text_file(out_file(opts, "manifest.json").string(), m.dump(2) + "\n");
}

Instance load_instance(const std::string& path, const std::string& format) {
    std::string text = read_text_file(path);
    std::string name = path_stem(path);
    if (format == "taillard") return parse_taillard(text, name);
    return parse_standard(text, name);
}

RuleKind rule_or_usage(const std::string& name) {
    try {
        return rule_from_name(name);
    } catch (const std::invalid_argument&) {
        throw UsageError("unknown rule '" + name + "' (expected spt|lpt|fifo|mwkr|random)");
    }
}

void check_policy_shape(const PolicyParams& p, const Instance& inst) {
    if (p.n_actions != inst.n_jobs ||
        p.obs_dim != Observation::dim(inst.n_jobs, inst.n_machines))
        throw UsageError("checkpoint was trained for a different instance shape");
}

const char* bounds_source_name(BoundsSource s) {
    switch (s) {
        case BoundsSource::computed: return "computed";
        case BoundsSource::file: return "file";
        case BoundsSource::literature: return "literature";
    }
    return "?";
}

double gap_percent(long long makespan, long long lb) {
    return static_cast<double>(makespan - lb) * 100.0 / static_cast<double>(lb);
}

int cmd_parse(const CliOptions& opts, const ConfigSet& cfg, std::ostream& out,
              const std::string& started) {
    Instance inst = load_instance(opts.instances.at(0), opts.format);
    validate(inst);
    Bounds b = bounds_for(inst, opts.bounds_path);
    out << "name: " << inst.name << "\n";
    out << "jobs: " << inst.n_jobs << "\n";
    out << "machines: " << inst.n_machines << "\n";
    out << "operations: " << inst.total_ops() << "\n";
    out << "lower bound: " << b.lower << " (" << bounds_source_name(b.source) << ")\n";
    out << "ok\n";
    json result = {{"jobs", inst.n_jobs},
                   {"machines", inst.n_machines},
                   {"operations", inst.total_ops()},
                   {"lower_bound", b.lower}};
    write_manifest(opts, cfg, result, started);
    return 0;
}

int cmd_solve(const CliOptions& opts, const ConfigSet& cfg, std::ostream& out, std::ostream& err,
              const std::string& started) {
    const bool has_rule = !opts.rules.empty();
    const bool has_ck = !opts.checkpoints.empty();
    if (has_rule == has_ck)
        throw UsageError("solve needs exactly one of --rule or --checkpoint");

    Instance inst = load_instance(opts.instances.at(0), opts.format);
    Schedule sched;
    if (has_rule) {
        if (opts.rules.size() != 1) throw UsageError("solve takes a single --rule");
        Rule rule{rule_or_usage(opts.rules[0]), TieBreak::lowest_job_id, opts.seed};
        sched = dispatch(inst, rule);
    } else {
        if (opts.checkpoints.size() != 1) throw UsageError("solve takes a single --checkpoint");
        CheckpointData ck = load_checkpoint(opts.checkpoints[0]);
        check_policy_shape(ck.snapshot.params, inst);
        EvalResult r = evaluate(ck.snapshot.params, inst, cfg.env, 1, true, opts.seed);
        if (r.best_makespan < 0) {
            err << "error: the policy episode truncated before completing the instance\n";
            return 1;
        }
        sched = r.best_schedule;
    }
    check_schedule(sched, inst);
    out << "makespan: " << sched.makespan << "\n";
    write_text_file(out_file(opts, "schedule.json").string(), schedule_to_json(sched) + "\n");
    Bounds b = bounds_for(inst, opts.bounds_path);
    json result = {{"makespan", sched.makespan},
                   {"gap_percent", gap_percent(sched.makespan, b.lower)}};
    write_manifest(opts, cfg, result, started);
    return 0;
}

int cmd_train(const CliOptions& opts, ConfigSet& cfg, std::ostream& out, std::ostream& err,
              const std::string& started) {
    Instance base = load_instance(opts.instances.at(0), opts.format);
    TrainerSnapshot resume_snap;
    bool resuming = false;
    if (!opts.resume_path.empty()) {
        CheckpointData ck = load_checkpoint(opts.resume_path);
        Instance ck_base = parse_standard(ck.base_instance, ck.instance_name);
        if (!ck_base.same_data(base))
            throw UsageError("resume checkpoint was trained on a different instance");
        cfg.env = ck.env;
        cfg.osm = ck.osm;
        cfg.trainer = ck.trainer;
        if (opts.steps_given) cfg.trainer.total_steps = opts.steps_override;
        resume_snap = std::move(ck.snapshot);
        resuming = true;
    }
    if (cfg.trainer.total_steps <= 0) throw UsageError("trainer.total_steps must be positive");
    if (cfg.osm.enabled && osm_tau_warns(cfg.osm))
        err << "warning: osm.tau " << cfg.osm.tau
            << " exceeds 0.015; heavy perturbation can destabilize training\n";

    std::ofstream log(out_file(opts, "log.csv"), std::ios::binary);
    if (!log) throw std::runtime_error("cannot open log for writing");
    TrainResult res = train(base, cfg.env, cfg.trainer, cfg.osm, &log,
                            resuming ? &resume_snap : nullptr);
    log.close();

    CheckpointData ck_out;
    ck_out.snapshot = res.snapshot;
    ck_out.trainer = res.resolved_trainer;
    ck_out.env = res.resolved_env;
    ck_out.osm = cfg.osm;
    ck_out.base_instance = serialize_standard(base);
    ck_out.instance_name = base.name;
    save_checkpoint(out_file(opts, "checkpoint.bin").string(), ck_out);

    if (res.snapshot.best_makespan >= 0)
        write_text_file(out_file(opts, "best_schedule.json").string(),
                        schedule_to_json(res.snapshot.best_schedule) + "\n");

    json result = {{"steps", res.snapshot.global_step},
                   {"episodes", res.snapshot.episode_count},
                   {"best_makespan", res.snapshot.best_makespan},
                   {"diverged", res.diverged}};
    if (res.snapshot.best_makespan >= 0) {
        Bounds b = bounds_for(base, opts.bounds_path);
        result["gap_percent"] = gap_percent(res.snapshot.best_makespan, b.lower);
    }
    write_manifest(opts, cfg, result, started);

    out << "steps: " << res.snapshot.global_step << "\n";
    out << "episodes: " << res.snapshot.episode_count << "\n";
    if (res.snapshot.best_makespan >= 0)
        out << "best makespan: " << res.snapshot.best_makespan << "\n";
    else
        out << "best makespan: none\n";
    if (!res.diverged.empty()) {
        err << "error: training aborted on non-finite values (" << res.diverged
            << "); last finite checkpoint retained\n";
        return 3;
    }
    return 0;
}

int cmd_evaluate(const CliOptions& opts, const ConfigSet& cfg, std::ostream& out,
                 std::ostream& err, const std::string& started) {
    if (opts.checkpoints.size() != 1) throw UsageError("evaluate needs exactly one --checkpoint");
    if (opts.episodes < 1) throw UsageError("--episodes must be at least 1");
    Instance inst = load_instance(opts.instances.at(0), opts.format);
    CheckpointData ck = load_checkpoint(opts.checkpoints[0]);
    check_policy_shape(ck.snapshot.params, inst);
    EvalResult r =
        evaluate(ck.snapshot.params, inst, cfg.env, opts.episodes, !opts.sample, opts.seed);
    if (r.best_makespan < 0) {
        err << "error: no evaluation episode completed within the budget\n";
        return 1;
    }
    out << "best makespan: " << r.best_makespan << "\n";
    char mean_buf[64];
    std::snprintf(mean_buf, sizeof mean_buf, "%.6g", r.mean_makespan);
    out << "mean makespan: " << mean_buf << "\n";
    write_text_file(out_file(opts, "schedule.json").string(),
                    schedule_to_json(r.best_schedule) + "\n");
    Bounds b = bounds_for(inst, opts.bounds_path);
    json result = {{"best_makespan", r.best_makespan},
                   {"mean_makespan", r.mean_makespan},
                   {"gap_percent", gap_percent(r.best_makespan, b.lower)}};
    write_manifest(opts, cfg, result, started);
    return 0;
}

int cmd_compare(const CliOptions& opts, const ConfigSet& cfg, std::ostream& out,
                const std::string& started) {
    if (opts.rules.empty() && opts.checkpoints.empty())
        throw UsageError("compare needs at least one --rule or --checkpoint");

    struct Method {
        bool is_rule = true;
        Rule rule;
        std::string label;
        PolicyParams params;
        bool usable = true;
    };
    std::vector<Method> methods;
    for (const auto& r : opts.rules) {
        Method m;
        m.is_rule = true;
        m.rule = Rule{rule_or_usage(r), TieBreak::lowest_job_id, opts.seed};
        m.label = r;
        methods.push_back(std::move(m));
    }
    for (const auto& c : opts.checkpoints) {
        Method m;
        m.is_rule = false;
        m.label = path_stem(c);
        try {
            m.params = load_checkpoint(c).snapshot.params;
        } catch (const std::exception&) {
            m.usable = false;
        }
        methods.push_back(std::move(m));
    }

    struct Row {
        bool ok = false;
        Instance inst;
        std::string name;
        Bounds bounds;
    };
    std::vector<Row> rows;
    for (const auto& path : opts.instances) {
        Row row;
        row.name = path_stem(path);
        try {
            row.inst = load_instance(path, opts.format);
            validate(row.inst);
            row.bounds = bounds_for(row.inst, opts.bounds_path);
            row.ok = true;
        } catch (const std::exception&) {
            row.ok = false;
        }
        rows.push_back(std::move(row));
    }

    struct Cell {
        bool ok = false;
        long long makespan = 0;
    };
    const int n_rows = static_cast<int>(rows.size());
    const int n_methods = static_cast<int>(methods.size());
    std::vector<Cell> cells(static_cast<size_t>(n_rows) * n_methods);

    // Cells are independent (instance, method) evaluations.
#pragma omp parallel for schedule(dynamic)
    for (int idx = 0; idx < n_rows * n_methods; ++idx) {
        const int i = idx / n_methods, j = idx % n_methods;
        if (!rows[static_cast<size_t>(i)].ok || !methods[static_cast<size_t>(j)].usable)
            continue;
        Cell& cell = cells[static_cast<size_t>(idx)];
        try {
            const Instance& inst = rows[static_cast<size_t>(i)].inst;
            const Method& m = methods[static_cast<size_t>(j)];
            if (m.is_rule) {
                cell.makespan = dispatch(inst, m.rule).makespan;
            } else {
                check_policy_shape(m.params, inst);
                EvalResult r = evaluate(m.params, inst, cfg.env, 1, true, opts.seed);
                if (r.best_makespan < 0) continue;
                cell.makespan = r.best_makespan;
            }
            cell.ok = true;
        } catch (const std::exception&) {
            cell.ok = false;
        }
    }

    std::vector<std::vector<std::string>> table;
    std::vector<std::string> header{"instance", "size", "lb"};
    for (const auto& m : methods) {
        header.push_back(m.label);
        header.push_back(m.label + "_gap%");
    }
    table.push_back(header);

    std::ostringstream csv;
    csv << "instance,n,m,lb";
    for (const auto& m : methods) csv << ',' << m.label << ',' << m.label << "_gap_percent";
    csv << '\n';

    int absent = 0;
    json result_rows = json::array();
    for (int i = 0; i < n_rows; ++i) {
        const Row& row = rows[static_cast<size_t>(i)];
        std::vector<std::string> line;
        json jrow;
        jrow["instance"] = row.name;
        if (!row.ok) {
            ++absent;
            line = {row.name, "-", "-"};
            csv << row.name << ",,,";
            jrow["lb"] = nullptr;
            for (int j = 0; j < n_methods; ++j) {
                line.push_back("absent");
                line.push_back("-");
                csv << ",absent,";
                jrow["cells"][methods[static_cast<size_t>(j)].label] = nullptr;
            }
            csv << '\n';
            table.push_back(std::move(line));
            result_rows.push_back(std::move(jrow));
            continue;
        }
        const long long lb = row.bounds.lower;
        line = {row.name, std::to_string(row.inst.n_jobs) + "x" + std::to_string(row.inst.n_machines),
                std::to_string(lb)};
        csv << row.name << ',' << row.inst.n_jobs << ',' << row.inst.n_machines << ',' << lb;
        jrow["lb"] = lb;
        for (int j = 0; j < n_methods; ++j) {
            const Cell& cell = cells[static_cast<size_t>(i) * n_methods + j];
            const std::string& label = methods[static_cast<size_t>(j)].label;
            if (cell.ok) {
                line.push_back(std::to_string(cell.makespan));
                line.push_back(fmt1(gap_percent(cell.makespan, lb)));
                csv << ',' << cell.makespan << ',' << fmt1(gap_percent(cell.makespan, lb));
                jrow["cells"][label] = cell.makespan;
            } else {
                ++absent;
                line.push_back("absent");
                line.push_back("-");
                csv << ",absent,";
                jrow["cells"][label] = nullptr;
            }
        }
        csv << '\n';
        table.push_back(std::move(line));
        result_rows.push_back(std::move(jrow));
    }

    std::vector<size_t> widths(table[0].size(), 0);
    for (const auto& line : table)
        for (size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], line[c].size());
    for (const auto& line : table) {
        for (size_t c = 0; c < line.size(); ++c) {
            out << line[c];
            if (c + 1 < line.size())
                out << std::string(widths[c] - line[c].size() + 2, ' ');
        }
        out << "\n";
    }

    write_text_file(out_file(opts, "compare.csv").string(), csv.str());
    json result = {{"rows", result_rows}, {"absent", absent}};
    write_manifest(opts, cfg, result, started);
    return absent > 0 ? 1 : 0;
}

int cmd_perturb(const CliOptions& opts, const ConfigSet& cfg, std::ostream& out,
                const std::string& started) {
    Instance base = load_instance(opts.instances.at(0), opts.format);
    long long k = 0;
    if (opts.swaps >= 0) {
        k = opts.swaps;
    } else if (opts.tp >= 0) {
        OsmState st{opts.tp, base};
        OsmConfig oc{cfg.osm.tau, true};
        k = swap_count(st, oc, base);
    } else {
        throw UsageError("perturb needs --swaps or (--tau and --tp)");
    }
    std::vector<SwapRecord> diff;
    Instance pert = perturb(base, k, opts.seed, &diff);
    validate(pert);
    write_text_file(out_file(opts, "perturbed.txt").string(), serialize_standard(pert));
    std::ostringstream diff_text;
    diff_text << "swaps: " << diff.size() << "\n";
    for (const auto& s : diff)
        diff_text << "job " << s.job << ": pos " << s.pos_a << " <-> pos " << s.pos_b << "\n";
    write_text_file(out_file(opts, "perturb_diff.txt").string(), diff_text.str());
    out << "swaps: " << diff.size() << "\n";
    json result = {{"swaps", static_cast<long long>(diff.size())}};
    write_manifest(opts, cfg, result, started);
    return 0;
}

int exec_command(CliOptions& opts, ConfigSet& cfg, std::ostream& out, std::ostream& err);

int cmd_replay(const CliOptions& opts, std::ostream& out, std::ostream& err) {
    json m = json::parse(read_text_file(opts.manifest_arg));
    CliOptions ro;
    ro.subcommand = m.at("subcommand").get<std::string>();
    if (ro.subcommand == "replay") throw UsageError("manifest of a replay cannot be replayed");
    ro.format = m.at("format").get<std::string>();
    ro.seed = m.at("seed").get<uint64_t>();
    ro.instances = m.at("instances").get<std::vector<std::string>>();
    ro.checkpoints = m.at("checkpoints").get<std::vector<std::string>>();
    ro.rules = m.at("rules").get<std::vector<std::string>>();
    ro.bounds_path = m.at("bounds").get<std::string>();
    ro.out_dir = opts.out_given ? opts.out_dir : m.at("out_dir").get<std::string>();
    const json& o = m.at("options");
    ro.episodes = o.at("episodes").get<int>();
    ro.sample = o.at("sample").get<bool>();
    ro.swaps = o.at("swaps").get<long long>();
    ro.tp = o.at("tp").get<long long>();
    ro.steps_override = o.at("steps_override").get<long long>();
    ro.steps_given = ro.steps_override != 0;
    ro.resume_path = o.at("resume").get<std::string>();
    ConfigSet rcfg;
    rcfg.env = env_from_json(m.at("env"));
    rcfg.trainer = trainer_from_json(m.at("trainer"));
    rcfg.osm = osm_from_json(m.at("osm"));
    return exec_command(ro, rcfg, out, err);
}

int exec_command(CliOptions& opts, ConfigSet& cfg, std::ostream& out, std::ostream& err) {
    const std::string started = iso_now();
    if (opts.subcommand == "replay") return cmd_replay(opts, out, err);
    if (!opts.out_dir.empty()) fs::create_directories(opts.out_dir);
    if (opts.subcommand == "parse") return cmd_parse(opts, cfg, out, started);
    if (opts.subcommand == "solve") return cmd_solve(opts, cfg, out, err, started);
    if (opts.subcommand == "train") return cmd_train(opts, cfg, out, err, started);
    if (opts.subcommand == "evaluate") return cmd_evaluate(opts, cfg, out, err, started);
    if (opts.subcommand == "compare") return cmd_compare(opts, cfg, out, started);
    if (opts.subcommand == "perturb") return cmd_perturb(opts, cfg, out, started);
    throw UsageError("unknown subcommand '" + opts.subcommand + "'");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CliOptions opts;
    ConfigSet cfg;
    bool want_version = false;

    CLI::App app{"job-shop scheduling toolkit: simulate, dispatch, train, compare"};
    app.name("jshop");
    app.fallthrough(true);
    app.add_option("--format", opts.format, "instance file layout")
        ->check(CLI::IsMember({"std", "taillard"}));
    auto* opt_seed = app.add_option("--seed", opts.seed, "random seed");
    auto* opt_out = app.add_option("--out", opts.out_dir, "output directory");
    app.add_option("--config", opts.config_path, "key=value config file");
    app.add_option("--bounds", opts.bounds_path, "lower-bound sidecar CSV");
    app.add_flag("--version", want_version, "print tool version");

    CLI::App* sc_parse = app.add_subcommand("parse", "parse and validate an instance");
    sc_parse->add_option("instance", opts.instance_arg, "instance file")->required();

    CLI::App* sc_solve = app.add_subcommand("solve", "schedule one instance");
    sc_solve->add_option("instance", opts.instance_arg, "instance file")->required();
    sc_solve->add_option("--rule", opts.rules, "dispatching rule")->delimiter(',');
    sc_solve->add_option("--checkpoint", opts.checkpoints, "trained policy checkpoint")
        ->delimiter(',');

    CLI::App* sc_train = app.add_subcommand("train", "train a policy on an instance");
    sc_train->add_option("instance", opts.instance_arg, "instance file")->required();
    auto* opt_steps = sc_train->add_option("--steps", opts.steps_override,
                                           "total environment steps");
    sc_train->add_option("--osm", opts.osm_mode, "order swapping on|off");
    auto* opt_osm_tau = sc_train->add_option("--osm-tau", opts.osm_tau, "execution rate");
    sc_train->add_option("--resume", opts.resume_path, "checkpoint to continue from");

    CLI::App* sc_eval = app.add_subcommand("evaluate", "evaluate a checkpoint on an instance");
    sc_eval->add_option("instance", opts.instance_arg, "instance file")->required();
    sc_eval->add_option("--checkpoint", opts.checkpoints, "trained policy checkpoint")
        ->delimiter(',');
    sc_eval->add_option("--episodes", opts.episodes, "stochastic episode count");
    sc_eval->add_flag("--sample", opts.sample, "sample actions instead of greedy argmax");

    CLI::App* sc_compare = app.add_subcommand("compare", "makespan table across methods");
    sc_compare->add_option("instances", opts.instances, "instance files")->required();
    sc_compare->add_option("--rule", opts.rules, "dispatching rules")->delimiter(',');
    sc_compare->add_option("--checkpoint", opts.checkpoints, "policy checkpoints")
        ->delimiter(',');

    CLI::App* sc_perturb = app.add_subcommand("perturb", "apply order swaps to an instance");
    sc_perturb->add_option("instance", opts.instance_arg, "instance file")->required();
    sc_perturb->add_option("--swaps", opts.swaps, "explicit swap count");
    sc_perturb->add_option("--tp", opts.tp, "training phase for the swap formula");
    auto* opt_tau = sc_perturb->add_option("--tau", opts.tau, "execution rate");

    CLI::App* sc_replay = app.add_subcommand("replay", "re-execute a run manifest");
    sc_replay->add_option("manifest", opts.manifest_arg, "manifest.json path")->required();

    try {
        std::vector<const char*> argv;
        argv.reserve(args.size() + 1);
        argv.push_back("jshop");
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    if (want_version) {
        out << kToolVersion << "\n";
        return 0;
    }

    try {
        for (CLI::App* sub : {sc_parse, sc_solve, sc_train, sc_eval, sc_compare, sc_perturb,
                              sc_replay})
            if (sub->parsed()) opts.subcommand = sub->get_name();
        if (opts.subcommand.empty()) throw UsageError("missing subcommand (see --help)");

        if (!opts.instance_arg.empty()) opts.instances = {opts.instance_arg};
        opts.seed_given = opt_seed->count() > 0;
        opts.out_given = opt_out->count() > 0;

        if (!opts.config_path.empty()) apply_config_file(opts.config_path, cfg);
        if (opts.seed_given) cfg.trainer.seed = opts.seed;
        if (!opts.osm_mode.empty()) {
            bool on = false;
            if (!parse_bool_value(opts.osm_mode, on))
                throw UsageError("--osm expects on or off");
            cfg.osm.enabled = on;
        }
        if (opt_osm_tau->count() > 0) cfg.osm.tau = opts.osm_tau;
        if (opt_tau->count() > 0) cfg.osm.tau = opts.tau;
        opts.steps_given = opt_steps->count() > 0;
        if (opts.steps_given && opts.resume_path.empty())
            cfg.trainer.total_steps = opts.steps_override;

        return exec_command(opts, cfg, out, err);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const TrainingDiverged& e) {
        err << "error: training aborted on non-finite values (" << e.what() << ")\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace jshop
