#pragma once

// Dataset generation, ingestion, and labeled/unlabeled splitting.

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ssrlrcm/numerics.hpp"
#include "ssrlrcm/ssr.hpp"

namespace ssrlrcm {

class EmptyLabeledSet : public Error {
public:
    using Error::Error;
};

class MissingColumn : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

struct Dataset {
    DenseMatrix x;                   // n x d feature matrix
    std::vector<double> y_true;      // ground-truth responses used for scoring
    std::vector<double> y_observed;  // noisy labels used for fitting; empty = same as y_true
    std::vector<int> component;      // mixture-component ids; empty when unknown
    std::vector<std::string> feature_names;
    std::string response_name = "y";

    std::size_t size() const { return x.rows; }
    const std::vector<double>& labels() const { return y_observed.empty() ? y_true : y_observed; }
};

/// A dataset reordered labeled-first, together with the labeled count and the
/// permutation that produced it (new position -> original index).
struct SplitProblem {
    Dataset data;
    std::size_t n_labeled = 0;
    std::vector<std::size_t> permutation;

    LabeledProblem problem() const {
        LabeledProblem p;
        p.n = data.size();
        p.n_labeled = n_labeled;
        p.y_padded.assign(p.n, 0.0);
        const std::vector<double>& labels = data.labels();
        for (std::size_t i = 0; i < n_labeled; ++i) p.y_padded[i] = labels[i];
        return p;
    }
};

/// Samples n points from an equal-weight mixture of two Gaussians
/// N(center1 * 1_d, sigma_x^2 I) and N(center2 * 1_d, sigma_x^2 I) and appends
/// two U(0, sigma_x) noise features (d + 2 columns total). sigma_x is a
/// standard deviation, not a variance. The ground truth y_true is 1 or 2 by
/// component; the observed labels add N(0, sigma_eps^2) noise, so scoring
/// against y_true measures recovery of the component value.
inline Dataset generate_mixture(std::size_t n, std::size_t d, double sigma_x, double sigma_eps,
                                std::uint64_t seed, double center1 = 0.0, double center2 = 20.0) {
    if (n < 2) throw std::invalid_argument("generate_mixture: need at least two points");
    if (d < 1) throw std::invalid_argument("generate_mixture: need at least one feature");
    if (!(sigma_x > 0.0)) throw std::invalid_argument("generate_mixture: sigma_x must be positive");
    if (sigma_eps < 0.0) throw std::invalid_argument("generate_mixture: sigma_eps must be nonnegative");

    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, sigma_x);

    Dataset ds;
    ds.x = DenseMatrix(n, d + 2);
    ds.y_true.resize(n);
    ds.y_observed.resize(n);
    ds.component.resize(n);
    for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("f" + std::to_string(j));
    ds.feature_names.push_back("noise0");
    ds.feature_names.push_back("noise1");

    for (std::size_t i = 0; i < n; ++i) {
        const int comp = coin(rng) ? 1 : 0;
        const double mean = comp == 0 ? center1 : center2;
        ds.component[i] = comp;
        for (std::size_t j = 0; j < d; ++j) ds.x(i, j) = mean + sigma_x * gauss(rng);
        ds.x(i, d) = uniform(rng);
        ds.x(i, d + 1) = uniform(rng);
        const double eps = sigma_eps > 0.0 ? sigma_eps * gauss(rng) : 0.0;
        ds.y_true[i] = double(comp + 1);
        ds.y_observed[i] = double(comp + 1) + eps;
    }
    return ds;
}

/// Random labeled/unlabeled split, stratified by component when component ids
/// are present: ceil(fraction * n_c) labeled points per component. The result
/// is reordered labeled-first.
inline SplitProblem split_labeled(const Dataset& ds, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("split_labeled: fraction must lie in (0, 1)");
    const std::size_t n = ds.size();
    if (n == 0) throw EmptyLabeledSet("split_labeled: empty dataset");

    // Group indices by component (single group when ids are absent).
    std::vector<int> comps;
    if (!ds.component.empty()) {
        comps = ds.component;
        std::sort(comps.begin(), comps.end());
        comps.erase(std::unique(comps.begin(), comps.end()), comps.end());
    } else {
        comps = {0};
    }

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> labeled, unlabeled;
    for (int c : comps) {
        std::vector<std::size_t> group;
        for (std::size_t i = 0; i < n; ++i)
            if (ds.component.empty() || ds.component[i] == c) group.push_back(i);
        std::shuffle(group.begin(), group.end(), rng);
        const std::size_t take =
            static_cast<std::size_t>(std::ceil(fraction * double(group.size())));
        for (std::size_t i = 0; i < group.size(); ++i)
            (i < take ? labeled : unlabeled).push_back(group[i]);
    }
    if (labeled.empty()) throw EmptyLabeledSet("split_labeled: no labeled points after rounding");

    SplitProblem sp;
    sp.n_labeled = labeled.size();
    sp.permutation = labeled;
    sp.permutation.insert(sp.permutation.end(), unlabeled.begin(), unlabeled.end());

    sp.data.x = DenseMatrix(n, ds.x.cols);
    sp.data.y_true.resize(n);
    if (!ds.y_observed.empty()) sp.data.y_observed.resize(n);
    if (!ds.component.empty()) sp.data.component.resize(n);
    sp.data.feature_names = ds.feature_names;
    sp.data.response_name = ds.response_name;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = sp.permutation[i];
        std::copy(ds.x.row(src).begin(), ds.x.row(src).end(), sp.data.x.row(i).begin());
        sp.data.y_true[i] = ds.y_true[src];
        if (!ds.y_observed.empty()) sp.data.y_observed[i] = ds.y_observed[src];
        if (!ds.component.empty()) sp.data.component[i] = ds.component[src];
    }
    return sp;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

inline double parse_number(const std::string& token, std::size_t row, const std::string& column) {
    const char* begin = token.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0') || errno == ERANGE)
        throw ParseError("unparseable value '" + token + "' at row " + std::to_string(row) +
                         ", column " + column);
    return v;
}

}  // namespace detail

/// Loads the forest-fires CSV (comma separated, '.' decimal point, header
/// row). Keeps the ten numeric predictors X, Y, FFMC, DMC, ISI, DC, temp, RH,
/// wind, rain and the area response; the month/day text columns are dropped.
inline Dataset load_forest_fires(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("'" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> predictors = {"X",  "Y",    "FFMC", "DMC", "ISI",
                                                 "DC", "temp", "RH",   "wind", "rain"};
    const std::vector<std::string> header = detail::split_csv_line(line);
    auto find_col = [&](const std::string& name) {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return j;
        throw MissingColumn("column '" + name + "' not found in '" + path + "'");
    };

    std::vector<std::size_t> cols;
    for (const std::string& name : predictors) cols.push_back(find_col(name));
    const std::size_t area_col = find_col("area");

    std::vector<double> values;
    std::vector<double> area;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = detail::split_csv_line(line);
        if (fields.size() != header.size())
            throw ParseError("row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(header.size()));
        for (std::size_t j = 0; j < predictors.size(); ++j)
            values.push_back(detail::parse_number(fields[cols[j]], row, predictors[j]));
        area.push_back(detail::parse_number(fields[area_col], row, "area"));
    }

    Dataset ds;
    ds.feature_names = predictors;
    ds.response_name = "area";
    ds.x = DenseMatrix(area.size(), predictors.size());
    ds.x.entries = std::move(values);
    ds.y_true = std::move(area);
    return ds;
}

/// Maps each response to its quartile index in {1, 2, 3, 4}, computed from the
/// empirical quartiles of log(1 + y) (linear-interpolation quantiles; ties go
/// to the lower quartile). Requires y > -1 so the log transform is defined.
inline std::vector<double> quartile_transform(const std::vector<double>& y) {
    if (y.empty()) throw std::invalid_argument("quartile_transform: empty input");
    std::vector<double> z(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > -1.0))
            throw std::invalid_argument("quartile_transform: responses must exceed -1");
        z[i] = std::log1p(y[i]);
    }

    std::vector<double> sorted = z;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double p) {
        const double pos = p * double(sorted.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const double frac = pos - double(lo);
        if (lo + 1 >= sorted.size()) return sorted.back();
        return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
    };
    const double q1 = quantile(0.25), q2 = quantile(0.50), q3 = quantile(0.75);

    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] <= q1)
            out[i] = 1.0;
        else if (z[i] <= q2)
            out[i] = 2.0;
        else if (z[i] <= q3)
            out[i] = 3.0;
        else
            out[i] = 4.0;
    }
    return out;
}

/// Min-max scales every feature column to [0, 1]; constant columns map to 0.
inline Dataset minmax_scale(const Dataset& ds) {
    Dataset out = ds;
    for (std::size_t j = 0; j < ds.x.cols; ++j) {
        double lo = ds.x(0, j), hi = lo;
        for (std::size_t i = 1; i < ds.x.rows; ++i) {
            lo = std::min(lo, ds.x(i, j));
            hi = std::max(hi, ds.x(i, j));
        }
        const double span = hi - lo;
        for (std::size_t i = 0; i < ds.x.rows; ++i)
            out.x(i, j) = span > 0.0 ? (ds.x(i, j) - lo) / span : 0.0;
    }
    return out;
}

/// Writes a dataset in the same CSV dialect the loader reads (full double
/// precision, so a reload reproduces the values bit-for-bit).
inline void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    for (const std::string& name : ds.feature_names) out << name << ",";
    out << ds.response_name << "\n";
    char buf[64];
    for (std::size_t i = 0; i < ds.x.rows; ++i) {
        for (std::size_t j = 0; j < ds.x.cols; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", ds.x(i, j));
            out << buf << ",";
        }
        std::snprintf(buf, sizeof buf, "%.17g", ds.y_true[i]);
        out << buf << "\n";
    }
}

/// One-line-per-column range summary (row count plus min/max per feature).
inline std::string dataset_summary(const Dataset& ds) {
    std::ostringstream os;
    os << ds.size() << " rows, " << ds.x.cols << " features\n";
    for (std::size_t j = 0; j < ds.x.cols; ++j) {
        double lo = ds.x(0, j), hi = lo;
        for (std::size_t i = 1; i < ds.x.rows; ++i) {
            lo = std::min(lo, ds.x(i, j));
            hi = std::max(hi, ds.x(i, j));
        }
        os << "  " << ds.feature_names[j] << ": [" << lo << ", " << hi << "]\n";
    }
    if (!ds.y_true.empty()) {
        const auto [lo, hi] = std::minmax_element(ds.y_true.begin(), ds.y_true.end());
        os << "  " << ds.response_name << ": [" << *lo << ", " << *hi << "]\n";
    }
    return os.str();
}

}  // namespace ssrlrcm
