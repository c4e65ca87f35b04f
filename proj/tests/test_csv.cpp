#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>

#include "doctest.h"
#include "mvtest/csv.hpp"
#include "mvtest/errors.hpp"
#include "mvtest/rng.hpp"

using namespace mvtest;

namespace {

std::string tmp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

ContinuousSample random_sample(std::int64_t n, int d, std::uint64_t seed) {
    Rng r(seed);
    ContinuousSample s(n, d);
    for (auto& v : s.data) v = r.uniform(-5.0, 5.0);
    return s;
}

}  // namespace

TEST_CASE("continuous round-trip preserves every value") {
    const auto s = random_sample(37, 3, 11);
    const std::string path = tmp_path("csv_rt_cont.csv");
    write_continuous_csv(path, s);
    const auto back = load_continuous_csv(path);
    REQUIRE(back.n == s.n);
    REQUIRE(back.d == s.d);
    for (std::size_t i = 0; i < s.data.size(); ++i) CHECK(back.data[i] == s.data[i]);
    std::remove(path.c_str());
}

TEST_CASE("continuous reader skips one header line") {
    std::istringstream in("x,y\n0.5,1.5\n0.25,2.5\n");
    const auto s = read_continuous_csv(in, "mem");
    REQUIRE(s.n == 2);
    REQUIRE(s.d == 2);
    CHECK(s.at(0, 1) == 1.5);
    CHECK(s.at(1, 0) == 0.25);
}

TEST_CASE("continuous reader rejects bad input with the line number") {
    std::istringstream ragged("1,2\n3\n");
    CHECK_THROWS_AS(read_continuous_csv(ragged, "mem"), ParseError);
    std::istringstream junk("1,2\n3,zebra\n");
    try {
        read_continuous_csv(junk, "mem");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
    std::istringstream nan("1,2\n3,nan\n");
    CHECK_THROWS_AS(read_continuous_csv(nan, "mem"), ParseError);
    std::istringstream one_row("1,2\n");
    CHECK_THROWS_AS(read_continuous_csv(one_row, "mem"), ValidationError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_continuous_csv(empty, "mem"), ValidationError);
}

TEST_CASE("discrete round-trip preserves the grid") {
    DiscreteGridSample g;
    g.valsx = {0.0, 1.0, 2.5};
    g.valsy = {-1.0, 4.0};
    g.counts = {3, 0, 7, 1, 2, 9};
    const std::string path = tmp_path("csv_rt_grid.csv");
    write_discrete_csv(path, g);
    const auto back = load_discrete_csv(path);
    REQUIRE(back.valsx == g.valsx);
    REQUIRE(back.valsy == g.valsy);
    CHECK(back.counts == g.counts);
    CHECK(back.total() == 22);
    std::remove(path.c_str());
}

TEST_CASE("discrete reader accepts any row order") {
    std::istringstream in(
        "x,y,counts\n"
        "1,1,4\n"
        "0,1,3\n"
        "1,0,2\n"
        "0,0,1\n");
    const auto g = read_discrete_csv(in, "mem");
    REQUIRE(g.gx() == 2);
    REQUIRE(g.gy() == 2);
    CHECK(g.cell(0, 0) == 1);
    CHECK(g.cell(1, 0) == 2);
    CHECK(g.cell(0, 1) == 3);
    CHECK(g.cell(1, 1) == 4);
}

TEST_CASE("discrete reader demands the header and a complete grid") {
    std::istringstream no_header("0,0,1\n0,1,2\n");
    CHECK_THROWS_AS(read_discrete_csv(no_header, "mem"), ParseError);
    std::istringstream missing_cell(
        "x,y,counts\n"
        "0,0,1\n"
        "0,1,2\n"
        "1,0,3\n");
    CHECK_THROWS_AS(read_discrete_csv(missing_cell, "mem"), ValidationError);
    std::istringstream dup_cell(
        "x,y,counts\n"
        "0,0,1\n"
        "0,0,2\n"
        "1,0,3\n"
        "1,1,4\n");
    CHECK_THROWS_AS(read_discrete_csv(dup_cell, "mem"), ParseError);
    std::istringstream neg(
        "x,y,counts\n"
        "0,0,-1\n"
        "0,1,2\n"
        "1,0,3\n"
        "1,1,4\n");
    CHECK_THROWS_AS(read_discrete_csv(neg, "mem"), ParseError);
}

TEST_CASE("missing file reports the path") {
    try {
        load_continuous_csv("/nonexistent/nowhere.csv");
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("nowhere.csv") != std::string::npos);
    }
}
