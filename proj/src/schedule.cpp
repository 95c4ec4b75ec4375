#include "jshop/schedule.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"

namespace jshop {

Schedule make_schedule(const Instance& inst, std::vector<Assignment> assignments) {
    Schedule sched;
    sched.instance = inst.name;
    std::sort(assignments.begin(), assignments.end(), [](const Assignment& a, const Assignment& b) {
        if (a.machine != b.machine) return a.machine < b.machine;
        if (a.start != b.start) return a.start < b.start;
        return std::tie(a.job, a.op) < std::tie(b.job, b.op);
    });
    for (const auto& a : assignments) sched.makespan = std::max(sched.makespan, a.end);
    sched.assignments = std::move(assignments);
    return sched;
}

void check_schedule(const Schedule& sched, const Instance& inst) {
    const int n = inst.n_jobs, m = inst.n_machines;
    if (sched.assignments.size() != static_cast<size_t>(n) * static_cast<size_t>(m))
        throw std::invalid_argument("schedule does not cover every operation exactly once");

    std::vector<std::vector<const Assignment*>> by_job(static_cast<size_t>(n));
    std::vector<std::vector<const Assignment*>> by_machine(static_cast<size_t>(m));
    long long max_end = 0;
    for (const auto& a : sched.assignments) {
        if (a.job < 0 || a.job >= n || a.op < 0 || a.op >= m)
            throw std::invalid_argument("assignment references an unknown operation");
        const Op& op = inst.ops[static_cast<size_t>(a.job)][static_cast<size_t>(a.op)];
        if (a.machine != op.machine)
            throw std::invalid_argument("assignment routed to the wrong machine");
        if (a.start < 0 || a.end - a.start != op.duration)
            throw std::invalid_argument("assignment duration disagrees with the instance");
        by_job[static_cast<size_t>(a.job)].push_back(&a);
        by_machine[static_cast<size_t>(a.machine)].push_back(&a);
        max_end = std::max(max_end, a.end);
    }
    for (int j = 0; j < n; ++j) {
        auto& list = by_job[static_cast<size_t>(j)];
        if (list.size() != static_cast<size_t>(m))
            throw std::invalid_argument("job scheduled the wrong number of times");
        std::sort(list.begin(), list.end(),
                  [](const Assignment* a, const Assignment* b) { return a->op < b->op; });
        for (int k = 0; k < m; ++k)
            if (list[static_cast<size_t>(k)]->op != k)
                throw std::invalid_argument("job is missing an operation position");
        for (int k = 1; k < m; ++k)
            if (list[static_cast<size_t>(k)]->start < list[static_cast<size_t>(k - 1)]->end)
                throw std::invalid_argument("job precedence violated");
    }
    for (int i = 0; i < m; ++i) {
        auto& list = by_machine[static_cast<size_t>(i)];
        std::sort(list.begin(), list.end(),
                  [](const Assignment* a, const Assignment* b) { return a->start < b->start; });
        for (size_t k = 1; k < list.size(); ++k)
            if (list[k]->start < list[k - 1]->end)
                throw std::invalid_argument("machine processes two jobs at once");
    }
    if (sched.makespan != max_end)
        throw std::invalid_argument("recorded makespan disagrees with assignment ends");
}

std::string schedule_to_json(const Schedule& sched) {
    nlohmann::json doc;
    doc["instance"] = sched.instance;
    doc["makespan"] = sched.makespan;
    doc["assignments"] = nlohmann::json::array();
    for (const auto& a : sched.assignments) {
        doc["assignments"].push_back({{"job", a.job},
                                      {"op", a.op},
                                      {"machine", a.machine},
                                      {"start", a.start},
                                      {"end", a.end}});
    }
    return doc.dump(2) + "\n";
}

Schedule schedule_from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    Schedule sched;
    sched.instance = doc.at("instance").get<std::string>();
    sched.makespan = doc.at("makespan").get<long long>();
    for (const auto& item : doc.at("assignments")) {
        Assignment a;
        a.job = item.at("job").get<int>();
        a.op = item.at("op").get<int>();
        a.machine = item.at("machine").get<int>();
        a.start = item.at("start").get<long long>();
        a.end = item.at("end").get<long long>();
        sched.assignments.push_back(a);
    }
    return sched;
}

}  // namespace jshop
