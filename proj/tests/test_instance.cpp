#include <string>

#include "doctest.h"
#include "jshop/instance.hpp"

using namespace jshop;

namespace {
const std::string kWorked = "2 3\n2 10 0 27 1 14\n1 20 2 12 0 12\n";
const std::string kDataDir = JSHOP_DATA_DIR;
}  // namespace

TEST_CASE("standard parser reads the two-job three-machine fixture") {
    Instance inst = parse_standard(kWorked, "worked");
    CHECK(inst.n_jobs == 2);
    CHECK(inst.n_machines == 3);
    CHECK(inst.total_ops() == 6);
    CHECK(inst.ops[0][0] == Op{2, 10});
    CHECK(inst.ops[0][1] == Op{0, 27});
    CHECK(inst.ops[0][2] == Op{1, 14});
    CHECK(inst.ops[1][0] == Op{1, 20});
    CHECK(inst.ops[1][1] == Op{2, 12});
    CHECK(inst.ops[1][2] == Op{0, 12});
    CHECK_NOTHROW(validate(inst));
}

TEST_CASE("standard parser handles a single-operation instance") {
    Instance inst = parse_standard("1 1\n0 5\n", "tiny");
    CHECK(inst.total_ops() == 1);
    CHECK(inst.ops[0][0] == Op{0, 5});
}

TEST_CASE("standard parser rejects out-of-range machine ids") {
    CHECK_THROWS_WITH_AS(parse_standard("2 3\n2 10 0 27 3 14\n1 20 2 12 0 12\n", "bad"),
                         doctest::Contains("machine id out of range"), ParseError);
}

TEST_CASE("standard parser errors carry line and column") {
    try {
        parse_standard("2 3\n2 10 0 27 1 14\n1 20 5 12 0 12\n", "bad");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() > 0);
    }
}

TEST_CASE("standard parser rejects malformed headers") {
    CHECK_THROWS_AS(parse_standard("", "bad"), ParseError);
    CHECK_THROWS_AS(parse_standard("2\n", "bad"), ParseError);
    CHECK_THROWS_AS(parse_standard("0 3\n", "bad"), ParseError);
    CHECK_THROWS_AS(parse_standard("x y\n1 1\n", "bad"), ParseError);
}

TEST_CASE("standard parser rejects wrong pair counts") {
    CHECK_THROWS_WITH_AS(parse_standard("2 3\n2 10 0 27\n1 20 2 12 0 12\n", "bad"),
                         doctest::Contains("wrong pair count"), ParseError);
}

TEST_CASE("standard parser rejects duplicate machines within a job") {
    CHECK_THROWS_WITH_AS(parse_standard("2 3\n2 10 2 27 1 14\n1 20 2 12 0 12\n", "bad"),
                         doctest::Contains("duplicate machine"), ParseError);
}

TEST_CASE("standard parser rejects non-positive durations") {
    CHECK_THROWS_WITH_AS(parse_standard("1 2\n0 5 1 0\n", "bad"),
                         doctest::Contains("non-positive duration"), ParseError);
    CHECK_THROWS_AS(parse_standard("1 2\n0 5 1 -3\n", "bad"), ParseError);
}

TEST_CASE("taillard parser reads a minimal file") {
    Instance inst = parse_taillard("1 1\n7\n1\n", "t11");
    CHECK(inst.n_jobs == 1);
    CHECK(inst.n_machines == 1);
    CHECK(inst.ops[0][0] == Op{0, 7});
}

TEST_CASE("taillard parser converts 1-based machine ids") {
    Instance inst = parse_taillard("2 2\n3 4\n5 6\n1 2\n2 1\n", "t22");
    CHECK(inst.ops[0][0] == Op{0, 3});
    CHECK(inst.ops[0][1] == Op{1, 4});
    CHECK(inst.ops[1][0] == Op{1, 5});
    CHECK(inst.ops[1][1] == Op{0, 6});
}

TEST_CASE("taillard parser rejects non-permutation machine rows") {
    CHECK_THROWS_WITH_AS(parse_taillard("2 2\n3 4\n5 6\n1 1\n2 1\n", "bad"),
                         doctest::Contains("duplicate machine"), ParseError);
}

TEST_CASE("taillard parser rejects dimension mismatches") {
    CHECK_THROWS_AS(parse_taillard("2 2\n3 4\n5 6\n1 2\n", "bad"), ParseError);
}

TEST_CASE("ta01 loads as a 15x15 instance") {
    Instance inst = parse_taillard(read_text_file(kDataDir + "/instances/ta01.txt"), "ta01");
    CHECK(inst.n_jobs == 15);
    CHECK(inst.n_machines == 15);
    CHECK(inst.total_ops() == 225);
    CHECK_NOTHROW(validate(inst));
}

TEST_CASE("lower bound of the fixture instance is 51") {
    Instance inst = parse_standard(kWorked, "worked");
    CHECK(lower_bound(inst) == 51);
}

TEST_CASE("lower bound of a single op is its duration") {
    CHECK(lower_bound(parse_standard("1 1\n0 5\n", "tiny")) == 5);
}

TEST_CASE("computed ta01 bound does not exceed the published one") {
    Instance inst = parse_taillard(read_text_file(kDataDir + "/instances/ta01.txt"), "ta01");
    CHECK(lower_bound(inst) <= 1231);
    CHECK(lower_bound(inst) > 0);
}

TEST_CASE("random generation is deterministic") {
    Instance a = generate_random(2, 2, 1, 5, 7);
    Instance b = generate_random(2, 2, 1, 5, 7);
    CHECK(a.same_data(b));
    CHECK(a.name == b.name);
}

TEST_CASE("random generation rejects an empty duration range") {
    CHECK_THROWS_AS(generate_random(2, 2, 5, 4, 0), std::invalid_argument);
    CHECK_THROWS_AS(generate_random(2, 2, 0, 4, 0), std::invalid_argument);
}

TEST_CASE("constant durations force the lower bound") {
    Instance inst = generate_random(1, 4, 2, 2, 0);
    CHECK(lower_bound(inst) == 8);
}

TEST_CASE("generated instances are valid across 1000 seeds") {
    for (uint64_t s = 0; s < 1000; ++s) {
        Instance inst = generate_random(1 + static_cast<int>(s % 5), 1 + static_cast<int>(s % 7),
                                        1, 9, s);
        CHECK_NOTHROW(validate(inst));
    }
}

TEST_CASE("standard serialization round-trips") {
    Instance inst = parse_standard(kWorked, "worked");
    Instance again = parse_standard(serialize_standard(inst), "worked");
    CHECK(inst.same_data(again));

    Instance rnd = generate_random(4, 5, 1, 99, 3);
    CHECK(rnd.same_data(parse_standard(serialize_standard(rnd), rnd.name)));
}

TEST_CASE("taillard serialization round-trips") {
    Instance inst = parse_taillard(read_text_file(kDataDir + "/instances/ta01.txt"), "ta01");
    Instance again = parse_taillard(serialize_taillard(inst), "ta01");
    CHECK(inst.same_data(again));
}

TEST_CASE("bounds fall back to the computed value") {
    Instance inst = generate_random(3, 3, 1, 9, 5);
    Bounds b = bounds_for(inst);
    CHECK(b.source == BoundsSource::computed);
    CHECK(b.lower == lower_bound(inst));
    CHECK_FALSE(b.known_optimum.has_value());
}

TEST_CASE("bounds sidecar supplies literature values") {
    Instance inst = parse_taillard(read_text_file(kDataDir + "/instances/ta01.txt"), "ta01");
    Bounds b = bounds_for(inst, kDataDir + "/bounds.csv");
    CHECK(b.source == BoundsSource::literature);
    CHECK(b.lower == 1231);
    REQUIRE(b.known_optimum.has_value());
    CHECK(*b.known_optimum == 1231);
    CHECK(b.lower <= *b.known_optimum);
}

TEST_CASE("sidecar misses fall back to the computed bound") {
    Instance inst = generate_random(3, 3, 1, 9, 8);
    Bounds b = bounds_for(inst, kDataDir + "/bounds.csv");
    CHECK(b.source == BoundsSource::computed);
}
