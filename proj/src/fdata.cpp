#include "fdnn/fdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "fdnn/errors.hpp"
#include "fdnn/random.hpp"

namespace fdnn {

SampledFunction::SampledFunction(std::vector<SamplePoint> points, std::size_t id)
    : points_(std::move(points)), id_(id) {
    if (points_.empty()) throw ValidationError("function " + std::to_string(id_) + " has no samples");
    for (std::size_t j = 0; j < points_.size(); ++j) {
        if (!std::isfinite(points_[j].x) || !std::isfinite(points_[j].y))
            throw ValidationError("function " + std::to_string(id_) + ": non-finite sample at position " +
                                  std::to_string(j));
        if (j > 0 && !(points_[j].x > points_[j - 1].x))
            throw ValidationError("function " + std::to_string(id_) +
                                  ": abscissas not strictly increasing at position " + std::to_string(j));
    }
}

std::vector<double> SampledFunction::xs() const {
    std::vector<double> out(points_.size());
    std::transform(points_.begin(), points_.end(), out.begin(), [](const SamplePoint& p) { return p.x; });
    return out;
}

std::vector<double> SampledFunction::ys() const {
    std::vector<double> out(points_.size());
    std::transform(points_.begin(), points_.end(), out.begin(), [](const SamplePoint& p) { return p.y; });
    return out;
}

Dataset::Dataset(std::vector<SampledFunction> functions, std::vector<double> targets, Domain domain)
    : functions_(std::move(functions)), targets_(std::move(targets)), domain_(domain) {
    if (functions_.size() != targets_.size())
        throw ValidationError("dataset has " + std::to_string(functions_.size()) + " functions but " +
                              std::to_string(targets_.size()) + " targets");
    if (!(domain_.lo < domain_.hi)) throw ValidationError("dataset domain is empty");
    for (const auto& f : functions_) {
        const auto pts = f.points();
        if (!domain_.contains(pts.front().x) || !domain_.contains(pts.back().x))
            throw ValidationError("function " + std::to_string(f.id()) + " has abscissas outside the domain");
    }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    std::vector<SampledFunction> fs;
    std::vector<double> ts;
    fs.reserve(rows.size());
    ts.reserve(rows.size());
    for (std::size_t r : rows) {
        fs.push_back(functions_.at(r));
        ts.push_back(targets_.at(r));
    }
    return Dataset(std::move(fs), std::move(ts), domain_);
}

std::size_t Dataset::min_length() const {
    std::size_t m = std::numeric_limits<std::size_t>::max();
    for (const auto& f : functions_) m = std::min(m, f.size());
    return functions_.empty() ? 0 : m;
}

DataFormat parse_data_format(const std::string& name) {
    if (name == "tecator-grid") return DataFormat::TecatorGrid;
    if (name == "generic-pairs") return DataFormat::GenericPairs;
    throw ArgumentError("unknown data format '" + name + "' (expected tecator-grid or generic-pairs)");
}

std::string to_string(DataFormat format) {
    return format == DataFormat::TecatorGrid ? "tecator-grid" : "generic-pairs";
}

std::vector<double> tecator_grid() {
    std::vector<double> grid(kTecatorChannels);
    const double step = kTecatorDomain.volume() / static_cast<double>(kTecatorChannels - 1);
    for (std::size_t j = 0; j < kTecatorChannels; ++j) grid[j] = kTecatorDomain.lo + step * static_cast<double>(j);
    grid.back() = kTecatorDomain.hi;
    return grid;
}

namespace {

std::vector<std::string_view> tokenize(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    auto is_sep = [](char c) { return c == ',' || c == ' ' || c == '\t' || c == '\r' || c == ';'; };
    while (i < line.size()) {
        while (i < line.size() && is_sep(line[i])) ++i;
        std::size_t j = i;
        while (j < line.size() && !is_sep(line[j])) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

bool is_missing_token(std::string_view tok) {
    return tok == "nan" || tok == "NaN" || tok == "NA" || tok == "na" || tok == "?";
}

std::optional<double> parse_number(std::string_view tok) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

Dataset parse_dataset(std::istream& in, DataFormat format, const std::string& source) {
    std::vector<SampledFunction> functions;
    std::vector<double> targets;
    std::optional<Domain> declared;
    const std::vector<double> grid = format == DataFormat::TecatorGrid ? tecator_grid() : std::vector<double>{};

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = line;
        if (const auto hash = body.find('#'); hash != std::string_view::npos) {
            auto comment = tokenize(body.substr(hash + 1));
            if (format == DataFormat::GenericPairs && comment.size() == 3 && comment[0] == "domain") {
                auto a = parse_number(comment[1]);
                auto b = parse_number(comment[2]);
                if (!a || !b || !(*a < *b)) throw ParseError(source, lineno, "invalid domain declaration");
                declared = Domain{*a, *b};
            }
            body = body.substr(0, hash);
        }
        const auto tokens = tokenize(body);
        if (tokens.empty()) continue;
        const std::size_t id = functions.size();

        if (format == DataFormat::TecatorGrid) {
            if (tokens.size() != kTecatorChannels + 1 && tokens.size() != kTecatorChannels + 3)
                throw ParseError(source, lineno,
                                 "expected 101 or 103 fields, found " + std::to_string(tokens.size()));
            std::vector<SamplePoint> pts;
            pts.reserve(kTecatorChannels);
            for (std::size_t j = 0; j < kTecatorChannels; ++j) {
                if (is_missing_token(tokens[j])) continue;
                auto v = parse_number(tokens[j]);
                if (!v) throw ParseError(source, lineno, "field " + std::to_string(j + 1) + " is not a number");
                pts.push_back({grid[j], *v});
            }
            const std::size_t target_col = tokens.size() == kTecatorChannels + 1 ? kTecatorChannels : kTecatorChannels + 1;
            auto t = parse_number(tokens[target_col]);
            if (!t) throw ParseError(source, lineno, "target field is not a number");
            if (pts.empty()) throw ParseError(source, lineno, "every channel is missing");
            functions.emplace_back(std::move(pts), id);
            targets.push_back(*t);
        } else {
            if (tokens.size() < 3 || tokens.size() % 2 == 0)
                throw ParseError(source, lineno, "expected a target followed by (x, y) pairs");
            auto t = parse_number(tokens[0]);
            if (!t) throw ParseError(source, lineno, "target field is not a number");
            std::vector<SamplePoint> pts;
            for (std::size_t j = 1; j + 1 < tokens.size(); j += 2) {
                auto x = parse_number(tokens[j]);
                auto y = parse_number(tokens[j + 1]);
                if (!x || !y) throw ParseError(source, lineno, "pair " + std::to_string((j + 1) / 2) + " is not numeric");
                if (!pts.empty() && !(*x > pts.back().x)) {
                    throw ValidationError(source + ":" + std::to_string(lineno) +
                                          ": abscissas are not strictly increasing");
                }
                pts.push_back({*x, *y});
            }
            functions.emplace_back(std::move(pts), id);
            targets.push_back(*t);
        }
    }
    if (functions.empty()) throw ParseError(source, lineno, "no samples found");

    Domain domain = kTecatorDomain;
    if (format == DataFormat::GenericPairs) {
        if (declared) {
            domain = *declared;
        } else {
            domain = {functions.front().points().front().x, functions.front().points().back().x};
            for (const auto& f : functions) {
                domain.lo = std::min(domain.lo, f.points().front().x);
                domain.hi = std::max(domain.hi, f.points().back().x);
            }
            if (!(domain.lo < domain.hi)) throw ParseError(source, lineno, "all abscissas coincide");
        }
    }
    return Dataset(std::move(functions), std::move(targets), domain);
}

Dataset load_dataset(const std::string& path, DataFormat format) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open data file '" + path + "'");
    return parse_dataset(in, format, path);
}

void write_generic_pairs(std::ostream& out, const Dataset& data) {
    std::ostringstream buf;
    buf.precision(17);
    buf << "# domain " << data.domain().lo << ' ' << data.domain().hi << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        buf << data.target(i);
        for (const auto& p : data.function(i).points()) buf << ' ' << p.x << ' ' << p.y;
        buf << '\n';
    }
    out << buf.str();
}

SampledFunction drop_random(const SampledFunction& f, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction < 1.0)) throw ArgumentError("drop fraction must lie in [0, 1)");
    const std::size_t m = f.size();
    const auto remove = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(m) + 0.5));
    if (remove == 0) return f;
    if (remove >= m) throw ArgumentError("dropping " + std::to_string(remove) + " of " + std::to_string(m) +
                                         " points leaves an empty function");
    // Partial Fisher-Yates: the first `remove` slots become the removed set.
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < remove; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, m - i));
        std::swap(order[i], order[j]);
    }
    std::vector<char> dropped(m, 0);
    for (std::size_t i = 0; i < remove; ++i) dropped[order[i]] = 1;
    std::vector<SamplePoint> kept;
    kept.reserve(m - remove);
    const auto pts = f.points();
    for (std::size_t j = 0; j < m; ++j)
        if (!dropped[j]) kept.push_back(pts[j]);
    return SampledFunction(std::move(kept), f.id());
}

Dataset drop_random(const Dataset& data, double fraction, std::uint64_t seed) {
    std::vector<SampledFunction> fs;
    fs.reserve(data.size());
    for (const auto& f : data.functions()) fs.push_back(drop_random(f, fraction, derive_seed(seed, "drop", f.id())));
    return Dataset(std::move(fs), data.targets(), data.domain());
}

TrainTest split(const Dataset& data, std::size_t test_size, std::uint64_t seed) {
    if (test_size >= data.size()) throw ArgumentError("test size must be smaller than the dataset");
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(test_size));
    std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(test_size), order.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    return {data.subset(train), data.subset(test)};
}

TrainTest split_fixed(const Dataset& data, std::size_t test_size) {
    if (test_size >= data.size()) throw ArgumentError("test size must be smaller than the dataset");
    std::vector<std::size_t> train(data.size() - test_size), test(test_size);
    std::iota(train.begin(), train.end(), std::size_t{0});
    std::iota(test.begin(), test.end(), train.size());
    return {data.subset(train), data.subset(test)};
}

}  // namespace fdnn
