#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "uqsurro/errors.hpp"
#include "uqsurro/matrix.hpp"
#include "uqsurro/rng.hpp"

namespace uqsurro {

enum class Partition { train, val, test };

inline const char* to_string(Partition p) {
    switch (p) {
        case Partition::train: return "train";
        case Partition::val: return "val";
        case Partition::test: return "test";
    }
    return "?";
}

struct Dataset {
    std::vector<std::string> input_names;
    std::vector<std::string> output_names;
    Matrix inputs;                     // N x d
    Matrix outputs;                    // N x q
    std::vector<Partition> partition;  // per-row tag; defaults to train

    std::size_t size() const { return inputs.rows; }

    std::vector<std::size_t> rows_in(Partition p) const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < partition.size(); ++i)
            if (partition[i] == p) idx.push_back(i);
        return idx;
    }

    Matrix gather_inputs(const std::vector<std::size_t>& rows) const {
        Matrix m(rows.size(), inputs.cols);
        for (std::size_t i = 0; i < rows.size(); ++i)
            std::copy(inputs.row_ptr(rows[i]), inputs.row_ptr(rows[i]) + inputs.cols,
                      m.row_ptr(i));
        return m;
    }

    Matrix gather_outputs(const std::vector<std::size_t>& rows) const {
        Matrix m(rows.size(), outputs.cols);
        for (std::size_t i = 0; i < rows.size(); ++i)
            std::copy(outputs.row_ptr(rows[i]), outputs.row_ptr(rows[i]) + outputs.cols,
                      m.row_ptr(i));
        return m;
    }

    void check() const {
        if (inputs.rows != outputs.rows) throw DataError("dataset: input/output row mismatch");
        if (partition.size() != inputs.rows) throw DataError("dataset: partition size mismatch");
        for (double v : inputs.v)
            if (!std::isfinite(v)) throw DataError("dataset: non-finite input value");
        for (double v : outputs.v)
            if (!std::isfinite(v)) throw DataError("dataset: non-finite output value");
        std::vector<std::string> names = input_names;
        names.insert(names.end(), output_names.begin(), output_names.end());
        std::sort(names.begin(), names.end());
        if (std::adjacent_find(names.begin(), names.end()) != names.end())
            throw DataError("dataset: duplicate column name");
    }
};

inline Dataset make_dataset(std::vector<std::string> input_names,
                            std::vector<std::string> output_names, Matrix inputs,
                            Matrix outputs) {
    Dataset ds;
    ds.input_names = std::move(input_names);
    ds.output_names = std::move(output_names);
    ds.inputs = std::move(inputs);
    ds.outputs = std::move(outputs);
    ds.partition.assign(ds.inputs.rows, Partition::train);
    ds.check();
    return ds;
}

// ---------------------------------------------------------------------------
// Input schemas and design-of-experiments sampling

enum class InputDistribution { uniform, normal, loguniform };

inline const char* to_string(InputDistribution d) {
    switch (d) {
        case InputDistribution::uniform: return "uniform";
        case InputDistribution::normal: return "normal";
        case InputDistribution::loguniform: return "loguniform";
    }
    return "?";
}

inline InputDistribution distribution_from_string(const std::string& s) {
    if (s == "uniform") return InputDistribution::uniform;
    if (s == "normal") return InputDistribution::normal;
    if (s == "loguniform") return InputDistribution::loguniform;
    throw ConfigError("unknown input distribution '" + s + "'");
}

struct InputVar {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    InputDistribution dist = InputDistribution::uniform;
};

using InputSchema = std::vector<InputVar>;

inline void validate_schema(const InputSchema& schema) {
    if (schema.empty()) throw ConfigError("input schema is empty");
    for (const InputVar& v : schema) {
        if (!(v.lower < v.upper))
            throw ConfigError("schema variable '" + v.name + "': lower must be < upper");
        if (v.dist == InputDistribution::loguniform && v.lower <= 0.0)
            throw ConfigError("schema variable '" + v.name + "': loguniform needs lower > 0");
    }
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Acklam's rational approximation with one Newton polish step.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DataError("normal_quantile: p outside (0, 1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= phigh) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // one Newton step on Phi(x) - p
    const double e = normal_cdf(x) - p;
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::acos(-1.0));
    return x - e / pdf;
}

// Maps a unit-interval coordinate through the variable's distribution.
// Normal variables use N(mid, (range/6)^2) truncated to [lower, upper]
// via quantile mapping.
inline double map_unit_to_schema(double u, const InputVar& var) {
    switch (var.dist) {
        case InputDistribution::uniform:
            return var.lower + u * (var.upper - var.lower);
        case InputDistribution::loguniform: {
            const double llo = std::log(var.lower), lhi = std::log(var.upper);
            return std::exp(llo + u * (lhi - llo));
        }
        case InputDistribution::normal: {
            const double mu = 0.5 * (var.lower + var.upper);
            const double sigma = (var.upper - var.lower) / 6.0;
            const double fa = normal_cdf((var.lower - mu) / sigma);
            const double fb = normal_cdf((var.upper - mu) / sigma);
            double x = mu + sigma * normal_quantile(fa + u * (fb - fa));
            return std::clamp(x, var.lower, var.upper);
        }
    }
    return u;
}

inline double min_pairwise_distance(const Matrix& design) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < design.rows; ++i) {
        for (std::size_t j = i + 1; j < design.rows; ++j) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < design.cols; ++k) {
                const double diff = design(i, k) - design(j, k);
                d2 += diff * diff;
            }
            best = std::min(best, d2);
        }
    }
    return std::sqrt(best);
}

// One Latin hypercube candidate on the unit cube: each column gets exactly
// one point per stratum [k/n, (k+1)/n).
inline Matrix lhs_unit_candidate(std::size_t n, std::size_t d, RngStream& rng) {
    Matrix design(n, d);
    std::vector<std::size_t> strata(n);
    for (std::size_t col = 0; col < d; ++col) {
        std::iota(strata.begin(), strata.end(), 0);
        rng.shuffle(strata);
        for (std::size_t row = 0; row < n; ++row) {
            const double u = rng.uniform01();  // (0, 1]
            design(row, col) = (static_cast<double>(strata[row]) + 1.0 - u) /
                               static_cast<double>(n);
        }
    }
    return design;
}

// Generates `iterations` LHS candidates, keeps the one with the maximal
// minimum pairwise distance, then maps columns through the schema.
inline Matrix maximin_lhs(std::size_t n, const InputSchema& schema, std::size_t iterations,
                          RngStream& rng) {
    validate_schema(schema);
    if (n < 1) throw ConfigError("maximin_lhs: n must be >= 1");
    if (iterations < 1) throw ConfigError("maximin_lhs: iterations must be >= 1");
    const std::size_t d = schema.size();

    Matrix best = lhs_unit_candidate(n, d, rng);
    double best_dist = min_pairwise_distance(best);
    for (std::size_t it = 1; it < iterations; ++it) {
        Matrix cand = lhs_unit_candidate(n, d, rng);
        const double dist = min_pairwise_distance(cand);
        if (dist > best_dist) {
            best = std::move(cand);
            best_dist = dist;
        }
    }

    for (std::size_t row = 0; row < n; ++row)
        for (std::size_t col = 0; col < d; ++col)
            best(row, col) = map_unit_to_schema(best(row, col), schema[col]);
    return best;
}

// ---------------------------------------------------------------------------
// CSV ingestion

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline Dataset load_dataset(const std::string& path, const std::vector<std::string>& input_names,
                            const std::vector<std::string>& output_names) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.empty())
        throw DataError("'" + path + "': empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = split_csv_line(line);
    auto column_of = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw DataError("'" + path + "': missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    std::vector<std::size_t> in_cols, out_cols;
    for (const auto& n : input_names) in_cols.push_back(column_of(n));
    for (const auto& n : output_names) out_cols.push_back(column_of(n));

    std::vector<std::vector<double>> in_rows, out_rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw DataError("'" + path + "' row " + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()));
        auto parse_cell = [&](std::size_t col) {
            const std::string& s = cells[col];
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(s, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos == 0 || pos != s.size() || !std::isfinite(v))
                throw DataError("'" + path + "' row " + std::to_string(lineno) + ", column '" +
                                header[col] + "': non-numeric cell '" + s + "'");
            return v;
        };
        std::vector<double> irow, orow;
        for (std::size_t c : in_cols) irow.push_back(parse_cell(c));
        for (std::size_t c : out_cols) orow.push_back(parse_cell(c));
        in_rows.push_back(std::move(irow));
        out_rows.push_back(std::move(orow));
    }
    if (in_rows.empty()) throw DataError("'" + path + "': no data rows");

    Matrix x(in_rows.size(), input_names.size());
    Matrix y(out_rows.size(), output_names.size());
    for (std::size_t r = 0; r < in_rows.size(); ++r) {
        std::copy(in_rows[r].begin(), in_rows[r].end(), x.row_ptr(r));
        std::copy(out_rows[r].begin(), out_rows[r].end(), y.row_ptr(r));
    }
    return make_dataset(input_names, output_names, std::move(x), std::move(y));
}

// Floating point is written with 17 significant digits so values survive a
// round trip exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void save_dataset(const std::string& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    for (std::size_t c = 0; c < ds.input_names.size(); ++c)
        out << (c ? "," : "") << ds.input_names[c];
    for (const auto& n : ds.output_names) out << ',' << n;
    out << '\n';
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (std::size_t c = 0; c < ds.inputs.cols; ++c)
            out << (c ? "," : "") << format_double(ds.inputs(r, c));
        for (std::size_t c = 0; c < ds.outputs.cols; ++c)
            out << ',' << format_double(ds.outputs(r, c));
        out << '\n';
    }
    if (!out) throw DataError("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Partitioning and standardization

struct SplitFractions {
    double train = 0.85;
    double val = 0.05;
    double test = 0.10;
};

// Random shuffle then contiguous assignment. Val/test sizes are
// floor-based; the remainder rows go to the training partition.
inline void split(Dataset& data, const SplitFractions& f, RngStream& rng) {
    if (!(f.train > 0.0 && f.val > 0.0 && f.test > 0.0))
        throw ConfigError("split: fractions must be positive");
    if (std::abs(f.train + f.val + f.test - 1.0) > 1e-9)
        throw ConfigError("split: fractions must sum to 1");
    const std::size_t n = data.size();
    const std::size_t n_val = static_cast<std::size_t>(f.val * static_cast<double>(n));
    const std::size_t n_test = static_cast<std::size_t>(f.test * static_cast<double>(n));
    if (n_val + n_test >= n) throw DataError("split: training partition would be empty");
    if (n_val == 0 || n_test == 0) throw DataError("split: a partition would be empty");
    const std::size_t n_train = n - n_val - n_test;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (std::size_t i = 0; i < n; ++i) {
        Partition p = Partition::train;
        if (i >= n_train + n_val)
            p = Partition::test;
        else if (i >= n_train)
            p = Partition::val;
        data.partition[order[i]] = p;
    }
}

// Per-column affine transform fitted on the training partition.
struct Scaler {
    std::vector<double> input_shift, input_scale;
    std::vector<double> output_shift, output_scale;  // empty when outputs untouched
    std::vector<std::string> warnings;

    bool scales_outputs() const { return !output_shift.empty(); }

    static void apply(Matrix& m, const std::vector<double>& shift,
                      const std::vector<double>& scale) {
        for (std::size_t r = 0; r < m.rows; ++r) {
            double* row = m.row_ptr(r);
            for (std::size_t c = 0; c < m.cols; ++c) row[c] = (row[c] - shift[c]) / scale[c];
        }
    }

    static void invert(Matrix& m, const std::vector<double>& shift,
                       const std::vector<double>& scale) {
        for (std::size_t r = 0; r < m.rows; ++r) {
            double* row = m.row_ptr(r);
            for (std::size_t c = 0; c < m.cols; ++c) row[c] = row[c] * scale[c] + shift[c];
        }
    }

    std::vector<double> transform_input(std::vector<double> x) const {
        for (std::size_t c = 0; c < x.size(); ++c) x[c] = (x[c] - input_shift[c]) / input_scale[c];
        return x;
    }
};

namespace detail {
inline void fit_columns(const Matrix& m, const std::vector<std::size_t>& rows,
                        const std::vector<std::string>& names, std::vector<double>& shift,
                        std::vector<double>& scale, std::vector<std::string>& warnings) {
    shift.assign(m.cols, 0.0);
    scale.assign(m.cols, 1.0);
    const double n = static_cast<double>(rows.size());
    for (std::size_t c = 0; c < m.cols; ++c) {
        double mean = 0.0;
        for (std::size_t r : rows) mean += m(r, c);
        mean /= n;
        double var = 0.0;
        for (std::size_t r : rows) {
            const double d = m(r, c) - mean;
            var += d * d;
        }
        var /= n;
        shift[c] = mean;
        if (var > 0.0) {
            scale[c] = std::sqrt(var);
        } else {
            scale[c] = 1.0;
            warnings.push_back("column '" + names[c] + "' has zero variance; unit scale used");
        }
    }
}
} // namespace detail

// Affine-standardizes inputs (and optionally outputs) to zero mean and unit
// variance using training-partition statistics.
inline Scaler standardize(Dataset& data, bool scale_outputs = false) {
    const std::vector<std::size_t> train_rows = data.rows_in(Partition::train);
    if (train_rows.empty()) throw DataError("standardize: empty training partition");
    Scaler s;
    detail::fit_columns(data.inputs, train_rows, data.input_names, s.input_shift, s.input_scale,
                        s.warnings);
    Scaler::apply(data.inputs, s.input_shift, s.input_scale);
    if (scale_outputs) {
        detail::fit_columns(data.outputs, train_rows, data.output_names, s.output_shift,
                            s.output_scale, s.warnings);
        Scaler::apply(data.outputs, s.output_shift, s.output_scale);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Synthetic oracle problems
//
// These stand in for expensive simulator runs. The formulas below are the
// ground truth the rest of the toolkit is exercised against; they make no
// claim of physical fidelity. Version: synth-1.

constexpr const char* synth_oracle_version = "synth-1";

inline InputSchema fgr_input_schema() {
    return {
        {"temperature_scalef", 0.95, 1.05, InputDistribution::normal},
        {"grainradius_scalef", 0.4, 1.6, InputDistribution::normal},
        {"igdiffcoeff_scalef", 0.1, 10.0, InputDistribution::loguniform},
        {"resolutionp_scalef", 0.1, 10.0, InputDistribution::loguniform},
        {"gbdiffcoeff_scalef", 0.1, 10.0, InputDistribution::loguniform},
    };
}

// Time grid over a 72 h transient, refined around the 50 h burst.
inline std::vector<double> fgr_time_grid(std::size_t p = 100) {
    if (p < 10) throw ConfigError("fgr_time_grid: need at least 10 points");
    const std::size_t n_burst = p * 3 / 10;
    const std::size_t n_base = p - n_burst;
    std::vector<double> grid;
    grid.reserve(p);
    for (std::size_t i = 0; i < n_base; ++i)
        grid.push_back(72.0 * static_cast<double>(i) / static_cast<double>(n_base - 1));
    for (std::size_t j = 0; j < n_burst; ++j)
        grid.push_back(47.5 + 5.0 * static_cast<double>(j) / static_cast<double>(n_burst - 1));
    std::sort(grid.begin(), grid.end());
    return grid;
}

namespace detail {
inline double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

inline void check_bounds(double x, const InputVar& var) {
    const double slack = 1e-9 * (var.upper - var.lower);
    if (x < var.lower - slack || x > var.upper + slack)
        throw DataError("synthetic oracle: input '" + var.name + "' = " + std::to_string(x) +
                        " is outside [" + std::to_string(var.lower) + ", " +
                        std::to_string(var.upper) + "]");
}
} // namespace detail

// Fission-gas-release style curves: a logistic base release plus a burst
// step at 50 h, with a small mid-transient ripple. With normalized features
//   T = (x0-1)/0.05, G = (x1-1)/0.6, D = log10(x2/x3)/2, B = log10(x4)
// the curve over the grid t (tau = t/72) is
//   base   = 38 * sig(1.1 D + 0.6 B + 1.4 T - 0.5 G)
//   burst  = 42 * sig(1.3 B + 0.9 T + 0.4 D + 0.7 G)
//   ripple = 1.2 * sig(1.05 T - 0.6 G)
//   f1(tau) = (sig(7 (tau - 0.3)) - sig(-2.1)) / (1 - sig(-2.1))
//   fgr(t) = base * f1 + burst * sig((t - 50) / 1.5) + ripple * sin^2(pi tau)
// Scaling x2 and x3 by a common factor leaves D, and hence the curve,
// unchanged (a zero-sensitivity direction by construction).
inline Matrix synth_fgr(const Matrix& design, const std::vector<double>& time_grid) {
    const InputSchema schema = fgr_input_schema();
    if (design.cols != schema.size())
        throw DataError("synth_fgr: design must have 5 input columns");
    const double pi = std::acos(-1.0);
    Matrix curves(design.rows, time_grid.size());
    for (std::size_t r = 0; r < design.rows; ++r) {
        const double* x = design.row_ptr(r);
        for (std::size_t c = 0; c < schema.size(); ++c) detail::check_bounds(x[c], schema[c]);
        const double t_feat = (x[0] - 1.0) / 0.05;
        const double g_feat = (x[1] - 1.0) / 0.6;
        const double d_feat = std::log10(x[2] / x[3]) / 2.0;
        const double b_feat = std::log10(x[4]);

        const double base = 38.0 * detail::logistic(1.1 * d_feat + 0.6 * b_feat +
                                                    1.4 * t_feat - 0.5 * g_feat);
        const double burst = 42.0 * detail::logistic(1.3 * b_feat + 0.9 * t_feat +
                                                     0.4 * d_feat + 0.7 * g_feat);
        const double ripple = 1.2 * detail::logistic(1.05 * t_feat - 0.6 * g_feat);

        const double f1_floor = detail::logistic(-2.1);
        for (std::size_t j = 0; j < time_grid.size(); ++j) {
            const double t = time_grid[j];
            const double tau = t / 72.0;
            const double f1 = (detail::logistic(7.0 * (tau - 0.3)) - f1_floor) / (1.0 - f1_floor);
            const double f2 = detail::logistic((t - 50.0) / 1.5);
            const double f3 = std::sin(pi * tau) * std::sin(pi * tau);
            curves(r, j) = base * f1 + burst * f2 + ripple * f3;
        }
    }
    return curves;
}

inline InputSchema void_input_schema() {
    return {
        {"pressure", 2.0, 8.6, InputDistribution::uniform},
        {"mass_flow", 10.0, 70.0, InputDistribution::uniform},
        {"power", 0.6, 6.5, InputDistribution::uniform},
        {"inlet_temp", 495.0, 555.0, InputDistribution::uniform},
        {"P1008", 0.0, 5.0, InputDistribution::uniform},
        {"P1012", 0.0, 5.0, InputDistribution::uniform},
        {"P1022", 0.0, 5.0, InputDistribution::uniform},
        {"P1028", 0.0, 5.0, InputDistribution::uniform},
        {"P1029", 0.0, 5.0, InputDistribution::uniform},
    };
}

inline std::vector<std::string> void_output_names() {
    return {"VoidF1", "VoidF2", "VoidF3", "VoidF4"};
}

// Four monotone saturating void-fraction responses of a scalar quality
// drive z. With normalized boundary conditions ph, wh, qh, th in [0,1] and
// multipliers m1..m5:
//   g_boil = 0.7 + 0.3 tanh(0.8 (m2-1))
//   g_cond = 0.8 + 0.2 tanh(0.6 (m1-1))
//   g_drag = 1 + 0.15 tanh(0.9 (m3-1)) + 0.2 tanh(0.7 (m4-1)) + 0.1 tanh(0.5 (m5-1))
//   z = 2.6 qh g_boil g_drag / (0.25 + 0.75 wh) - 1.8 (1-th) g_cond - 0.9 ph
//   VoidF_k = 95 (1 - exp(-0.55 max(0, z + c_k))),  c = (-1.1, 0.0, 1.1, 3.0)
// VoidF1 is exactly 0 wherever z <= 1.1 (a many-to-one plateau covering a
// large part of the input domain); VoidF4 is strictly positive and smooth
// everywhere. The outputs are ordered VoidF1 <= ... <= VoidF4 pointwise.
inline Matrix synth_voidfraction(const Matrix& design) {
    const InputSchema schema = void_input_schema();
    if (design.cols != schema.size())
        throw DataError("synth_voidfraction: design must have 9 input columns");
    static const std::array<double, 4> offsets = {-1.1, 0.0, 1.1, 3.0};
    Matrix out(design.rows, 4);
    for (std::size_t r = 0; r < design.rows; ++r) {
        const double* x = design.row_ptr(r);
        for (std::size_t c = 0; c < schema.size(); ++c) detail::check_bounds(x[c], schema[c]);
        const double ph = (x[0] - 2.0) / 6.6;
        const double wh = (x[1] - 10.0) / 60.0;
        const double qh = (x[2] - 0.6) / 5.9;
        const double th = (x[3] - 495.0) / 60.0;
        const double m1 = x[4], m2 = x[5], m3 = x[6], m4 = x[7], m5 = x[8];

        const double g_boil = 0.7 + 0.3 * std::tanh(0.8 * (m2 - 1.0));
        const double g_cond = 0.8 + 0.2 * std::tanh(0.6 * (m1 - 1.0));
        const double g_drag = 1.0 + 0.15 * std::tanh(0.9 * (m3 - 1.0)) +
                              0.2 * std::tanh(0.7 * (m4 - 1.0)) +
                              0.1 * std::tanh(0.5 * (m5 - 1.0));
        const double z = 2.6 * qh * g_boil * g_drag / (0.25 + 0.75 * wh) -
                         1.8 * (1.0 - th) * g_cond - 0.9 * ph;
        for (std::size_t k = 0; k < 4; ++k) {
            const double u = std::max(0.0, z + offsets[k]);
            out(r, k) = 95.0 * (1.0 - std::exp(-0.55 * u));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// 1-D gap problem: a smooth target sampled on [-3,-1] and [1,3] with the
// interval (-1, 1) held out, used to probe extrapolation uncertainty.

inline double gap_target(double x) { return std::sin(2.0 * x) + 0.3 * x; }

inline Dataset make_gap_dataset(std::size_t n, double noise_std, RngStream& rng) {
    if (n < 4) throw ConfigError("make_gap_dataset: need at least 4 samples");
    Matrix x(n, 1), y(n, 1);
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const bool left = i < half;
        const std::size_t k = left ? i : i - half;
        const std::size_t m = left ? half : n - half;
        // stratified uniform within each band
        const double u = (static_cast<double>(k) + rng.uniform01()) / static_cast<double>(m);
        const double xi = left ? -3.0 + 2.0 * u : 1.0 + 2.0 * u;
        x(i, 0) = xi;
        y(i, 0) = gap_target(xi) + (noise_std > 0.0 ? rng.normal_sample(0.0, noise_std) : 0.0);
    }
    return make_dataset({"x"}, {"y"}, std::move(x), std::move(y));
}

inline std::vector<double> gap_region_grid(std::size_t n = 50) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = -0.9 + 1.8 * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

inline std::vector<double> support_region_grid(std::size_t n = 50) {
    std::vector<double> g;
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i)
        g.push_back(-3.0 + 2.0 * static_cast<double>(i) / static_cast<double>(half - 1));
    for (std::size_t i = 0; i < n - half; ++i)
        g.push_back(1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - half - 1));
    return g;
}

} // namespace uqsurro
