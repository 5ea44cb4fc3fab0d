#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fdnn {

struct SamplePoint {
    double x;
    double y;
};

/// Closed interval [lo, hi] on which the functions are defined.
struct Domain {
    double lo = 0.0;
    double hi = 1.0;

    double volume() const noexcept { return hi - lo; }
    bool contains(double x) const noexcept { return x >= lo && x <= hi; }
    bool operator==(const Domain&) const = default;
};

/// One observation: (x, y) pairs with strictly increasing abscissas.
class SampledFunction {
public:
    SampledFunction(std::vector<SamplePoint> points, std::size_t id);

    std::span<const SamplePoint> points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    std::size_t id() const noexcept { return id_; }
    std::vector<double> xs() const;
    std::vector<double> ys() const;

private:
    std::vector<SamplePoint> points_;
    std::size_t id_;
};

class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<SampledFunction> functions, std::vector<double> targets, Domain domain);

    std::size_t size() const noexcept { return functions_.size(); }
    bool empty() const noexcept { return functions_.empty(); }
    const std::vector<SampledFunction>& functions() const noexcept { return functions_; }
    const std::vector<double>& targets() const noexcept { return targets_; }
    const SampledFunction& function(std::size_t i) const { return functions_.at(i); }
    double target(std::size_t i) const { return targets_.at(i); }
    const Domain& domain() const noexcept { return domain_; }

    /// Rows in the given order; ids are preserved.
    Dataset subset(std::span<const std::size_t> rows) const;
    std::size_t min_length() const;

private:
    std::vector<SampledFunction> functions_;
    std::vector<double> targets_;
    Domain domain_;
};

enum class DataFormat { TecatorGrid, GenericPairs };

DataFormat parse_data_format(const std::string& name);
std::string to_string(DataFormat format);

inline constexpr std::size_t kTecatorChannels = 100;
inline constexpr Domain kTecatorDomain{850.0, 1050.0};

/// The 100 uniformly spaced wavelengths of a Tecator spectrum.
std::vector<double> tecator_grid();

/// Reads a dataset.
///
/// tecator-grid: one sample per line, 100 absorbances followed by either a
/// single target or the water, fat and protein columns (fat is the target).
/// Channel values written as `nan` or `NA` are treated as missing.
///
/// generic-pairs: one sample per line, `target x1 y1 x2 y2 ...`. An optional
/// `# domain a b` line fixes the domain; otherwise it is the abscissa range.
///
/// Fields may be separated by commas or whitespace; `#` starts a comment.
Dataset load_dataset(const std::string& path, DataFormat format);
Dataset parse_dataset(std::istream& in, DataFormat format, const std::string& source = "<input>");

/// Writes the generic-pairs carrier (readable back with load_dataset).
void write_generic_pairs(std::ostream& out, const Dataset& data);

/// Removes exactly round_half_up(fraction * m) points chosen uniformly
/// without replacement; the kept points stay in order.
SampledFunction drop_random(const SampledFunction& f, double fraction, std::uint64_t seed);

/// drop_random on every function, each with a seed derived from `seed` and
/// the function id.
Dataset drop_random(const Dataset& data, double fraction, std::uint64_t seed);

struct TrainTest {
    Dataset train;
    Dataset test;
};

/// Seeded random partition.
TrainTest split(const Dataset& data, std::size_t test_size, std::uint64_t seed);

/// First size - test_size rows train, last test_size rows test.
TrainTest split_fixed(const Dataset& data, std::size_t test_size);

}  // namespace fdnn
