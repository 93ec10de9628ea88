#pragma once

#include "sparseconf/loss.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace sparseconf {

// Portable draws on top of mt19937_64: the standard distributions are
// implementation-defined, these are not, so a seed means the same data everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // uniform on [0, 1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    // uniform on {0, ..., bound - 1}
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

template <class T>
void shuffle(std::vector<T>& v, Rng& rng)
{
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[static_cast<std::size_t>(rng.below(i))]);
}

struct Dataset {
    Matrix X;  // n x p
    Vector y;  // n
    std::string name;
    bool standardized = false;
    std::vector<std::string> feature_names;
    std::vector<Eigen::Index> constant_columns; // left unscaled by standardize()

    Eigen::Index n() const { return y.size(); }
    Eigen::Index p() const { return X.cols(); }
};

struct GenOptions {
    bool standardize = true;
    bool center = false;
};

// Divides every feature column and the labels by their sample standard
// deviation (optionally subtracting the mean first). Constant columns are
// left as they are and listed in constant_columns.
void standardize(Dataset& data, bool center = false);

// X and y i.i.d. uniform on [-1, 1].
Dataset gen_synthetic(Eigen::Index n, Eigen::Index p, std::uint64_t seed, const GenOptions& opts = {});

// x ~ U[0,1]^10, y = 10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5 + noise.
Dataset gen_friedman1(Eigen::Index n, std::uint64_t seed, double noise_sd = 1.0,
                      const GenOptions& opts = {});

// x1 ~ U[0,100], x2 ~ U[40 pi, 560 pi], x3 ~ U[0,1], x4 ~ U[1,11],
// y = sqrt(x1^2 + (x2 x3 - 1/(x2 x4))^2) + noise.
Dataset gen_friedman2(Eigen::Index n, std::uint64_t seed, double noise_sd = 125.0,
                      const GenOptions& opts = {});

// Label column given by header name, or by 0-based index when the string is
// all digits and no header matches. Throws CsvError.
Dataset load_csv(const std::string& path, const std::string& label_column, bool standardize_data,
                 bool center = false);

// Same parser on an in-memory document.
Dataset parse_csv(const std::string& text, const std::string& label_column, bool standardize_data,
                  bool center = false);

// Moves row `row` out of the dataset and returns it as (x, y).
std::pair<Vector, double> hold_out(Dataset& data, Eigen::Index row);

} // namespace sparseconf
