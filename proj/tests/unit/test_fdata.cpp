#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "fdnn/errors.hpp"
#include "fdnn/fdata.hpp"

using namespace fdnn;

namespace {

SampledFunction ramp(std::size_t m, std::size_t id = 0) {
    std::vector<SamplePoint> pts;
    for (std::size_t j = 0; j < m; ++j) pts.push_back({static_cast<double>(j), 0.5 * static_cast<double>(j)});
    return SampledFunction(std::move(pts), id);
}

std::string tecator_row(double base, double fat) {
    std::ostringstream os;
    for (int j = 0; j < 100; ++j) os << base + 0.01 * j << ',';
    os << 60.0 << ',' << fat << ',' << 15.0 << '\n';
    return os.str();
}

}  // namespace

TEST_CASE("sampled functions reject unsorted or duplicate abscissas") {
    CHECK_THROWS_AS(SampledFunction({{1.0, 0.0}, {0.5, 1.0}}, 0), ValidationError);
    CHECK_THROWS_AS(SampledFunction({{1.0, 0.0}, {1.0, 1.0}}, 0), ValidationError);
    CHECK_THROWS_AS(SampledFunction({}, 0), ValidationError);
    CHECK_NOTHROW(SampledFunction({{0.0, 1.0}}, 0));
}

TEST_CASE("tecator grid rows load with fat as the target") {
    std::stringstream in;
    in << "# header comment\n" << tecator_row(2.0, 22.5) << tecator_row(3.0, 0.9);
    const Dataset d = parse_dataset(in, DataFormat::TecatorGrid);
    REQUIRE(d.size() == 2);
    CHECK(d.function(0).size() == 100);
    CHECK(d.target(0) == doctest::Approx(22.5));
    CHECK(d.target(1) == doctest::Approx(0.9));
    CHECK(d.domain() == kTecatorDomain);
    CHECK(d.function(1).points().front().x == doctest::Approx(850.0));
    CHECK(d.function(1).points().back().x == doctest::Approx(1050.0));
}

TEST_CASE("missing tecator channels are dropped from the function") {
    std::string row = tecator_row(2.0, 10.0);
    row.replace(0, row.find(','), "nan");
    std::stringstream in(row);
    const Dataset d = parse_dataset(in, DataFormat::TecatorGrid);
    CHECK(d.function(0).size() == 99);
}

TEST_CASE("malformed input names the line") {
    std::stringstream in;
    in << tecator_row(2.0, 10.0) << "1,2,3\n";
    try {
        parse_dataset(in, DataFormat::TecatorGrid, "bad.txt");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("bad.txt:2") != std::string::npos);
    }
}

TEST_CASE("empty file is a parse error") {
    std::stringstream in("");
    CHECK_THROWS_AS(parse_dataset(in, DataFormat::TecatorGrid), ParseError);
    std::stringstream comments("# nothing\n\n");
    CHECK_THROWS_AS(parse_dataset(comments, DataFormat::GenericPairs), ParseError);
}

TEST_CASE("generic pairs keep irregular lengths") {
    std::stringstream in;
    in << "# domain 0 10\n"
       << "1.5 0 1 2 2 4 3 6 4 8 5\n"
       << "2.5 0 0 1 1 2 2 3 3 4 4 5 5 6 6\n";
    const Dataset d = parse_dataset(in, DataFormat::GenericPairs);
    REQUIRE(d.size() == 2);
    CHECK(d.function(0).size() == 5);
    CHECK(d.function(1).size() == 7);
    CHECK(d.domain() == Domain{0.0, 10.0});

    std::stringstream out;
    write_generic_pairs(out, d);
    const Dataset back = parse_dataset(out, DataFormat::GenericPairs);
    CHECK(back.size() == 2);
    CHECK(back.function(1).ys() == d.function(1).ys());
    CHECK(back.targets() == d.targets());
}

TEST_CASE("non-monotone generic pairs are rejected") {
    std::stringstream in("1.0 0 1 2 2 1 3\n");
    CHECK_THROWS_AS(parse_dataset(in, DataFormat::GenericPairs), Error);
}

TEST_CASE("drop_random removes exactly round-half-up of the points") {
    const SampledFunction f = ramp(100);
    const SampledFunction g = drop_random(f, 0.10, 7);
    CHECK(g.size() == 90);
    // Kept points form an ordered subsequence.
    const auto xs = f.xs(), kept = g.xs();
    CHECK(std::includes(xs.begin(), xs.end(), kept.begin(), kept.end()));

    CHECK(drop_random(ramp(5), 0.5, 1).size() == 2);  // 2.5 rounds up to 3 removed
    CHECK(drop_random(ramp(15), 0.1, 1).size() == 13);
    CHECK(drop_random(f, 0.0, 3).xs() == f.xs());
}

TEST_CASE("drop_random is deterministic per seed") {
    const SampledFunction f = ramp(100);
    CHECK(drop_random(f, 0.1, 11).xs() == drop_random(f, 0.1, 11).xs());
    CHECK(drop_random(f, 0.1, 11).xs() != drop_random(f, 0.1, 12).xs());
}

TEST_CASE("drop_random argument checks") {
    CHECK_THROWS_AS(drop_random(ramp(10), 1.0, 1), ArgumentError);
    CHECK_THROWS_AS(drop_random(ramp(10), -0.1, 1), ArgumentError);
    CHECK_THROWS_AS(drop_random(ramp(1), 0.6, 1), Error);
}

TEST_CASE("splits partition the dataset") {
    std::vector<SampledFunction> fs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < 215; ++i) {
        fs.push_back(ramp(4, i));
        ys.push_back(static_cast<double>(i));
    }
    const Dataset d(fs, ys, Domain{0.0, 3.0});

    const TrainTest fixed = split_fixed(d, 43);
    CHECK(fixed.train.size() == 172);
    CHECK(fixed.test.size() == 43);
    CHECK(fixed.train.function(171).id() == 171);
    CHECK(fixed.test.function(0).id() == 172);

    const TrainTest r = split(d, 43, 5);
    std::multiset<std::size_t> ids;
    for (const auto& f : r.train.functions()) ids.insert(f.id());
    for (const auto& f : r.test.functions()) ids.insert(f.id());
    CHECK(ids.size() == 215);
    CHECK(std::set<std::size_t>(ids.begin(), ids.end()).size() == 215);
    CHECK(split(d, 43, 5).test.targets() == r.test.targets());

    const TrainTest none = split(d, 0, 5);
    CHECK(none.train.size() == 215);
    CHECK(none.test.empty());
    CHECK_THROWS_AS(split(d, 215, 1), ArgumentError);
}
