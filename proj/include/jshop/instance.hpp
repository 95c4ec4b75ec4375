#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace jshop {

struct Op {
    int machine = 0;
    int duration = 0;
    bool operator==(const Op&) const = default;
};

// A job-shop problem: each job visits every machine exactly once in a fixed
// order; durations are positive integers.
struct Instance {
    std::string name;
    int n_jobs = 0;
    int n_machines = 0;
    std::vector<std::vector<Op>> ops;  // [job][position]

    int total_ops() const { return n_jobs * n_machines; }
    int max_duration() const;
    long long total_duration() const;
    bool same_data(const Instance& other) const {
        return n_jobs == other.n_jobs && n_machines == other.n_machines && ops == other.ops;
    }
    bool operator==(const Instance&) const = default;
};

// Parse failure carrying the 1-based line/column of the offending token.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, int line, int column);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// "standard" layout: header "n m", then n lines of m (machine, duration)
// pairs with 0-based machine ids. Whitespace-tolerant.
Instance parse_standard(const std::string& text, const std::string& name = "");

// Taillard layout: header "n m", an n x m duration matrix, then an n x m
// machine-order matrix with 1-based machine ids (converted to 0-based).
Instance parse_taillard(const std::string& text, const std::string& name = "");

// Throws std::invalid_argument naming the violated invariant.
void validate(const Instance& inst);

// max(per-machine total load, per-job total load): a floor on any makespan.
long long lower_bound(const Instance& inst);

// Random instance: independent uniform machine permutation per job, durations
// uniform in [dur_lo, dur_hi]. Deterministic for a fixed seed.
Instance generate_random(int n_jobs, int n_machines, int dur_lo, int dur_hi, uint64_t seed);

std::string serialize_standard(const Instance& inst);
std::string serialize_taillard(const Instance& inst);

enum class BoundsSource { computed, file, literature };

struct Bounds {
    long long lower = 0;
    std::optional<long long> known_optimum;
    BoundsSource source = BoundsSource::computed;
};

// Looks up the instance name in a CSV sidecar (name,lower,optimum). Falls
// back to the computed bound when the file or the row is absent.
Bounds bounds_for(const Instance& inst, const std::string& sidecar_csv_path = "");

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace jshop
