#include "jshop/instance.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "jshop/rng.hpp"

namespace jshop {

int Instance::max_duration() const {
    int best = 1;
    for (const auto& job : ops)
        for (const auto& op : job) best = std::max(best, op.duration);
    return best;
}

long long Instance::total_duration() const {
    long long sum = 0;
    for (const auto& job : ops)
        for (const auto& op : job) sum += op.duration;
    return sum;
}

ParseError::ParseError(const std::string& msg, int line, int column)
    : std::runtime_error(msg + " at line " + std::to_string(line) + ", column " +
                         std::to_string(column)),
      line_(line),
      column_(column) {}

namespace {

struct Token {
    long long value;
    int line;
    int column;
};

// Whitespace-tolerant integer tokenizer tracking 1-based positions.
std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> tokens;
    int line = 1, column = 1;
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            column = 1;
            ++i;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f') {
            ++column;
            ++i;
            continue;
        }
        size_t start = i;
        int tok_col = column;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
            ++column;
        }
        long long value = 0;
        auto [ptr, ec] = std::from_chars(text.data() + start, text.data() + i, value);
        if (ec != std::errc() || ptr != text.data() + i)
            throw ParseError("not an integer: '" + text.substr(start, i - start) + "'", line,
                             tok_col);
        tokens.push_back({value, line, tok_col});
    }
    return tokens;
}

std::pair<int, int> parse_header(const std::vector<Token>& tokens) {
    if (tokens.size() < 2) throw ParseError("malformed header: expected 'n m'", 1, 1);
    long long n = tokens[0].value, m = tokens[1].value;
    if (n < 1 || m < 1)
        throw ParseError("malformed header: job and machine counts must be positive",
                         tokens[0].line, tokens[0].column);
    return {static_cast<int>(n), static_cast<int>(m)};
}

void check_machine_token(const Token& tok, long long machine, int m, std::vector<char>& seen) {
    if (machine < 0 || machine >= m)
        throw ParseError("machine id out of range", tok.line, tok.column);
    if (seen[static_cast<size_t>(machine)])
        throw ParseError("duplicate machine within job", tok.line, tok.column);
    seen[static_cast<size_t>(machine)] = 1;
}

void check_duration_token(const Token& tok) {
    if (tok.value <= 0) throw ParseError("non-positive duration", tok.line, tok.column);
}

}  // namespace

Instance parse_standard(const std::string& text, const std::string& name) {
    auto tokens = tokenize(text);
    auto [n, m] = parse_header(tokens);
    size_t expected = 2 + 2ull * n * m;
    if (tokens.size() != expected) {
        const Token& at = tokens.size() < expected ? tokens.back() : tokens[expected];
        throw ParseError("wrong pair count: expected " + std::to_string(n * m) +
                             " (machine, duration) pairs",
                         at.line, at.column);
    }
    Instance inst;
    inst.name = name;
    inst.n_jobs = n;
    inst.n_machines = m;
    inst.ops.assign(static_cast<size_t>(n), {});
    size_t pos = 2;
    for (int j = 0; j < n; ++j) {
        std::vector<char> seen(static_cast<size_t>(m), 0);
        inst.ops[static_cast<size_t>(j)].reserve(static_cast<size_t>(m));
        for (int k = 0; k < m; ++k) {
            const Token& mach = tokens[pos++];
            const Token& dur = tokens[pos++];
            check_machine_token(mach, mach.value, m, seen);
            check_duration_token(dur);
            inst.ops[static_cast<size_t>(j)].push_back(
                {static_cast<int>(mach.value), static_cast<int>(dur.value)});
        }
    }
    validate(inst);
    return inst;
}

Instance parse_taillard(const std::string& text, const std::string& name) {
    auto tokens = tokenize(text);
    auto [n, m] = parse_header(tokens);
    size_t expected = 2 + 2ull * n * m;
    if (tokens.size() != expected) {
        const Token& at = tokens.size() < expected ? tokens.back() : tokens[expected];
        throw ParseError("matrix dimension mismatch: expected two " + std::to_string(n) + "x" +
                             std::to_string(m) + " matrices",
                         at.line, at.column);
    }
    Instance inst;
    inst.name = name;
    inst.n_jobs = n;
    inst.n_machines = m;
    inst.ops.assign(static_cast<size_t>(n),
                    std::vector<Op>(static_cast<size_t>(m)));
    size_t pos = 2;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < m; ++k) {
            const Token& dur = tokens[pos++];
            check_duration_token(dur);
            inst.ops[static_cast<size_t>(j)][static_cast<size_t>(k)].duration =
                static_cast<int>(dur.value);
        }
    for (int j = 0; j < n; ++j) {
        std::vector<char> seen(static_cast<size_t>(m), 0);
        for (int k = 0; k < m; ++k) {
            const Token& mach = tokens[pos++];
            check_machine_token(mach, mach.value - 1, m, seen);  // 1-based on disk
            inst.ops[static_cast<size_t>(j)][static_cast<size_t>(k)].machine =
                static_cast<int>(mach.value - 1);
        }
    }
    validate(inst);
    return inst;
}

void validate(const Instance& inst) {
    if (inst.n_jobs < 1 || inst.n_machines < 1)
        throw std::invalid_argument("instance must have at least one job and one machine");
    if (inst.ops.size() != static_cast<size_t>(inst.n_jobs))
        throw std::invalid_argument("job count does not match routing rows");
    for (int j = 0; j < inst.n_jobs; ++j) {
        const auto& job = inst.ops[static_cast<size_t>(j)];
        if (job.size() != static_cast<size_t>(inst.n_machines))
            throw std::invalid_argument("job " + std::to_string(j) +
                                        " does not visit every machine exactly once");
        std::vector<char> seen(static_cast<size_t>(inst.n_machines), 0);
        for (const auto& op : job) {
            if (op.machine < 0 || op.machine >= inst.n_machines)
                throw std::invalid_argument("job " + std::to_string(j) +
                                            " references machine out of range");
            if (seen[static_cast<size_t>(op.machine)])
                throw std::invalid_argument("job " + std::to_string(j) +
                                            " visits a machine twice");
            seen[static_cast<size_t>(op.machine)] = 1;
            if (op.duration <= 0)
                throw std::invalid_argument("job " + std::to_string(j) +
                                            " has a non-positive duration");
        }
    }
}

long long lower_bound(const Instance& inst) {
    std::vector<long long> machine_load(static_cast<size_t>(inst.n_machines), 0);
    long long best = 0;
    for (const auto& job : inst.ops) {
        long long job_load = 0;
        for (const auto& op : job) {
            job_load += op.duration;
            machine_load[static_cast<size_t>(op.machine)] += op.duration;
        }
        best = std::max(best, job_load);
    }
    for (long long load : machine_load) best = std::max(best, load);
    return best;
}

Instance generate_random(int n_jobs, int n_machines, int dur_lo, int dur_hi, uint64_t seed) {
    if (n_jobs < 1 || n_machines < 1)
        throw std::invalid_argument("generate_random: n and m must be >= 1");
    if (dur_lo > dur_hi) throw std::invalid_argument("generate_random: empty duration range");
    if (dur_lo <= 0)
        throw std::invalid_argument("generate_random: durations must be positive");
    RngStream rng(seed);
    Instance inst;
    inst.name = "rand" + std::to_string(n_jobs) + "x" + std::to_string(n_machines) + "s" +
                std::to_string(seed);
    inst.n_jobs = n_jobs;
    inst.n_machines = n_machines;
    inst.ops.assign(static_cast<size_t>(n_jobs), {});
    for (int j = 0; j < n_jobs; ++j) {
        std::vector<int> perm(static_cast<size_t>(n_machines));
        std::iota(perm.begin(), perm.end(), 0);
        for (int k = n_machines - 1; k > 0; --k) {
            int r = static_cast<int>(rng.bounded(static_cast<uint32_t>(k + 1)));
            std::swap(perm[static_cast<size_t>(k)], perm[static_cast<size_t>(r)]);
        }
        auto& job = inst.ops[static_cast<size_t>(j)];
        job.reserve(static_cast<size_t>(n_machines));
        for (int k = 0; k < n_machines; ++k) {
            int dur = dur_lo + static_cast<int>(rng.bounded(
                                   static_cast<uint32_t>(dur_hi - dur_lo + 1)));
            job.push_back({perm[static_cast<size_t>(k)], dur});
        }
    }
    validate(inst);
    return inst;
}

std::string serialize_standard(const Instance& inst) {
    std::ostringstream out;
    out << inst.n_jobs << ' ' << inst.n_machines << '\n';
    for (const auto& job : inst.ops) {
        for (size_t k = 0; k < job.size(); ++k) {
            if (k) out << ' ';
            out << job[k].machine << ' ' << job[k].duration;
        }
        out << '\n';
    }
    return out.str();
}

std::string serialize_taillard(const Instance& inst) {
    std::ostringstream out;
    out << inst.n_jobs << ' ' << inst.n_machines << '\n';
    for (const auto& job : inst.ops) {
        for (size_t k = 0; k < job.size(); ++k) {
            if (k) out << ' ';
            out << job[k].duration;
        }
        out << '\n';
    }
    for (const auto& job : inst.ops) {
        for (size_t k = 0; k < job.size(); ++k) {
            if (k) out << ' ';
            out << job[k].machine + 1;
        }
        out << '\n';
    }
    return out.str();
}

Bounds bounds_for(const Instance& inst, const std::string& sidecar_csv_path) {
    auto parse_ll = [](const std::string& s, long long& v) {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        return ec == std::errc() && p == s.data() + s.size();
    };
    if (!sidecar_csv_path.empty() && !inst.name.empty()) {
        std::ifstream in(sidecar_csv_path);
        if (in) {
            std::string line;
            while (std::getline(in, line)) {
                while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
                    line.pop_back();
                std::istringstream row(line);
                std::string name, lower_s, opt_s;
                std::getline(row, name, ',');
                std::getline(row, lower_s, ',');
                std::getline(row, opt_s, ',');
                if (name != inst.name) continue;
                Bounds b;
                if (!parse_ll(lower_s, b.lower)) continue;
                long long opt = 0;
                if (!opt_s.empty() && parse_ll(opt_s, opt)) b.known_optimum = opt;
                b.source = BoundsSource::literature;
                if (b.known_optimum && *b.known_optimum < b.lower)
                    throw std::invalid_argument("bounds row has optimum below lower bound: " +
                                                inst.name);
                return b;
            }
        }
    }
    return {lower_bound(inst), std::nullopt, BoundsSource::computed};
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

}  // namespace jshop
