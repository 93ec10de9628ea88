#include "sparseconf/data.hpp"

#include "sparseconf/error.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

namespace sparseconf {

double Rng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller; 1 - u keeps the log argument in (0, 1]
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t bound)
{
    // rejection sampling removes the modulo bias
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max()
        - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw;
    do {
        draw = engine_();
    } while (draw >= limit);
    return draw % bound;
}

namespace {

double sample_sd(const Vector& v)
{
    const double n = static_cast<double>(v.size());
    if (v.size() < 2)
        return 0.0;
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / (n - 1.0));
}

void check_sizes(Eigen::Index n, Eigen::Index p)
{
    if (n < 2)
        throw Error(ErrorKind::InvalidArgument, "datasets need at least two samples");
    if (p < 1)
        throw Error(ErrorKind::InvalidArgument, "datasets need at least one feature");
}

} // namespace

void standardize(Dataset& data, bool center)
{
    data.constant_columns.clear();
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) {
        Vector col = data.X.col(j);
        const double sd = sample_sd(col);
        if (center)
            data.X.col(j).array() -= col.mean();
        if (sd > 0.0)
            data.X.col(j) /= sd;
        else
            data.constant_columns.push_back(j);
    }
    const double sd = sample_sd(data.y);
    if (center)
        data.y.array() -= data.y.mean();
    if (sd > 0.0)
        data.y /= sd;
    data.standardized = true;
}

Dataset gen_synthetic(Eigen::Index n, Eigen::Index p, std::uint64_t seed, const GenOptions& opts)
{
    check_sizes(n, p);
    Rng rng(seed);
    Dataset d;
    d.name = "synthetic";
    d.X.resize(n, p);
    d.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j)
            d.X(i, j) = rng.uniform(-1.0, 1.0);
        d.y[i] = rng.uniform(-1.0, 1.0);
    }
    if (opts.standardize)
        standardize(d, opts.center);
    return d;
}

Dataset gen_friedman1(Eigen::Index n, std::uint64_t seed, double noise_sd, const GenOptions& opts)
{
    check_sizes(n, 10);
    Rng rng(seed);
    Dataset d;
    d.name = "friedman1";
    d.X.resize(n, 10);
    d.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < 10; ++j)
            d.X(i, j) = rng.uniform();
        const auto x = d.X.row(i);
        d.y[i] = 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5)
            + 10.0 * x[3] + 5.0 * x[4] + noise_sd * rng.normal();
    }
    if (opts.standardize)
        standardize(d, opts.center);
    return d;
}

Dataset gen_friedman2(Eigen::Index n, std::uint64_t seed, double noise_sd, const GenOptions& opts)
{
    check_sizes(n, 4);
    Rng rng(seed);
    Dataset d;
    d.name = "friedman2";
    d.X.resize(n, 4);
    d.y.resize(n);
    const double pi = std::numbers::pi;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x1 = rng.uniform(0.0, 100.0);
        const double x2 = rng.uniform(40.0 * pi, 560.0 * pi);
        const double x3 = rng.uniform();
        const double x4 = rng.uniform(1.0, 11.0);
        d.X.row(i) << x1, x2, x3, x4;
        const double inner = x2 * x3 - 1.0 / (x2 * x4);
        d.y[i] = std::sqrt(x1 * x1 + inner * inner) + noise_sd * rng.normal();
    }
    if (opts.standardize)
        standardize(d, opts.center);
    return d;
}

namespace {

std::vector<std::string> split_record(const std::string& line, long row)
{
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quoted) {
            if (c == '"') {
                if (k + 1 < line.size() && line[k + 1] == '"') {
                    cur += '"';
                    ++k;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted)
        throw CsvError(ErrorKind::ParseError, "unterminated quoted field on row " + std::to_string(row),
                       row, static_cast<long>(fields.size()));
    fields.push_back(std::move(cur));
    return fields;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, long row, long col)
{
    const std::string cell = trim(raw);
    if (!cell.empty()) {
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() + cell.size() && errno != ERANGE && std::isfinite(v))
            return v;
    }
    throw CsvError(ErrorKind::NonNumericCell,
                   "non-numeric cell '" + cell + "' at row " + std::to_string(row) + ", column "
                       + std::to_string(col),
                   row, col);
}

} // namespace

Dataset parse_csv(const std::string& text, const std::string& label_column, bool standardize_data,
                  bool center)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw CsvError(ErrorKind::ParseError, "empty CSV document", 0, 0);
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
        line.erase(0, 3);
    std::vector<std::string> header = split_record(line, 0);
    for (auto& h : header)
        h = trim(h);

    long label = -1;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == label_column)
            label = static_cast<long>(c);
    if (label < 0 && !label_column.empty()
        && label_column.find_first_not_of("0123456789") == std::string::npos) {
        const long idx = std::stol(label_column);
        if (idx < static_cast<long>(header.size()))
            label = idx;
    }
    if (label < 0)
        throw CsvError(ErrorKind::MissingLabelColumn, "label column '" + label_column + "' not found",
                       0, -1);

    std::vector<std::vector<double>> rows;
    long row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty())
            continue;
        const std::vector<std::string> fields = split_record(line, row);
        if (fields.size() != header.size())
            throw CsvError(ErrorKind::ParseError,
                           "row " + std::to_string(row) + " has " + std::to_string(fields.size())
                               + " fields, header has " + std::to_string(header.size()),
                           row, static_cast<long>(fields.size()));
        std::vector<double> vals(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c)
            vals[c] = parse_cell(fields[c], row, static_cast<long>(c));
        rows.push_back(std::move(vals));
    }
    if (rows.size() < 2)
        throw CsvError(ErrorKind::InsufficientData, "CSV needs at least two data rows", row, -1);
    if (header.size() < 2)
        throw CsvError(ErrorKind::ParseError, "CSV needs a label and at least one feature column", 0, -1);

    Dataset d;
    d.name = "csv";
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(header.size() - 1);
    d.X.resize(n, p);
    d.y.resize(n);
    for (std::size_t c = 0; c < header.size(); ++c)
        if (static_cast<long>(c) != label)
            d.feature_names.push_back(header[c]);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index j = 0;
        for (std::size_t c = 0; c < header.size(); ++c) {
            const double v = rows[static_cast<std::size_t>(i)][c];
            if (static_cast<long>(c) == label)
                d.y[i] = v;
            else
                d.X(i, j++) = v;
        }
    }
    if (standardize_data)
        standardize(d, center);
    return d;
}

Dataset load_csv(const std::string& path, const std::string& label_column, bool standardize_data,
                 bool center)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    Dataset d = parse_csv(buf.str(), label_column, standardize_data, center);
    d.name = path;
    return d;
}

std::pair<Vector, double> hold_out(Dataset& data, Eigen::Index row)
{
    if (row < 0 || row >= data.n())
        throw Error(ErrorKind::OutOfRange, "hold_out row out of range");
    if (data.n() < 3)
        throw Error(ErrorKind::InsufficientData, "hold_out would leave fewer than two samples");
    Vector x = data.X.row(row).transpose();
    const double y = data.y[row];
    const Eigen::Index n = data.n();
    Matrix X(n - 1, data.p());
    Vector yy(n - 1);
    for (Eigen::Index i = 0, k = 0; i < n; ++i) {
        if (i == row)
            continue;
        X.row(k) = data.X.row(i);
        yy[k++] = data.y[i];
    }
    data.X = std::move(X);
    data.y = std::move(yy);
    return {std::move(x), y};
}

} // namespace sparseconf
