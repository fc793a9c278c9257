#pragma once

// Multi-view datasets: in-memory representation, text formats, manifests and
// a synthetic union-of-subspaces generator.
//
// On-disk layout
//   matrix file   comma-separated decimal floats, one row per line, no header;
//                 rows are features, columns are samples.
//   label file    one 0-based integer per line.
//   manifest      `key = value` lines, '#' starts a comment:
//                   view = <path>          repeatable, order defines view index
//                   labels = <path>        optional
//                   clusters = <int>
//                   normalize = unit|none  default unit
//                   samples = <int>        optional declared sample count
//                 Relative paths resolve against the manifest's directory.
//                 Column i of every view and line i of the label file must
//                 describe the same entity.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "umccev/errors.hpp"
#include "umccev/operators.hpp"

namespace umccev {

using Labels = std::vector<int>;

struct MultiViewDataset {
    std::vector<Matrix> views;
    std::optional<Labels> labels;
    int clusters = 0;
    std::vector<std::string> names;

    Eigen::Index samples() const { return views.empty() ? 0 : views.front().cols(); }
    std::size_t view_count() const { return views.size(); }

    /// Throws on any broken invariant: shared sample count, finite entries,
    /// 2 <= clusters <= n, labels within [0, clusters).
    void validate() const {
        if (views.empty()) throw InvalidInput("dataset has no views");
        const Eigen::Index n = samples();
        for (std::size_t v = 0; v < views.size(); ++v) {
            if (views[v].cols() != n)
                throw DimensionMismatchError("view '" + view_name(v) + "' has " +
                                             std::to_string(views[v].cols()) + " samples but view '" +
                                             view_name(0) + "' has " + std::to_string(n));
            if (views[v].rows() == 0) throw InvalidInput("view '" + view_name(v) + "' has no features");
            if (!views[v].allFinite()) throw InvalidInput("view '" + view_name(v) + "' has non-finite entries");
        }
        if (clusters < 2 || clusters > n)
            throw InvalidInput("cluster count " + std::to_string(clusters) + " outside [2, " +
                               std::to_string(n) + "]");
        if (labels) {
            if (static_cast<Eigen::Index>(labels->size()) != n)
                throw DimensionMismatchError("label file has " + std::to_string(labels->size()) +
                                             " entries but views have " + std::to_string(n) + " samples");
            for (std::size_t i = 0; i < labels->size(); ++i)
                if ((*labels)[i] < 0 || (*labels)[i] >= clusters)
                    throw LabelRangeError("label " + std::to_string((*labels)[i]) + " at line " +
                                          std::to_string(i + 1) + " outside [0, " + std::to_string(clusters) +
                                          ")");
        }
    }

    std::string view_name(std::size_t v) const {
        return v < names.size() ? names[v] : "view" + std::to_string(v);
    }
};

/// Scales every column to unit Euclidean norm; zero columns stay zero.
inline Matrix normalize_unit_columns(const Matrix& X) {
    Matrix out = X;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const double norm = out.col(j).norm();
        if (norm > 0.0) out.col(j) /= norm;
    }
    return out;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view tok, const std::string& where) {
    tok = trim(tok);
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError(where + ": cannot parse '" + std::string(tok) + "' as a number");
    return value;
}

inline long parse_int(std::string_view tok, const std::string& where) {
    tok = trim(tok);
    long value = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError(where + ": cannot parse '" + std::string(tok) + "' as an integer");
    return value;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw MissingFileError(path.string());
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

}  // namespace detail

/// Writes `contents` to a sibling temporary and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string format_matrix(const Matrix& M) {
    std::string out;
    char buf[32];
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j) out += ',';
            std::snprintf(buf, sizeof buf, "%.17g", M(i, j));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

inline void save_matrix(const Matrix& M, const std::filesystem::path& path) {
    write_file_atomic(path, format_matrix(M));
}

inline Matrix load_matrix(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view body = detail::trim(line);
        if (body.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const auto comma = body.find(',', start);
            row.push_back(detail::parse_double(body.substr(start, comma - start), where));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError(where + ": expected " + std::to_string(rows.front().size()) + " columns, found " +
                             std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    Matrix M(static_cast<Eigen::Index>(rows.size()),
             rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return M;
}

inline std::string format_labels(const Labels& labels) {
    std::string out;
    for (int l : labels) {
        out += std::to_string(l);
        out += '\n';
    }
    return out;
}

inline void save_labels(const Labels& labels, const std::filesystem::path& path) {
    write_file_atomic(path, format_labels(labels));
}

inline Labels load_labels(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    Labels labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view body = detail::trim(line);
        if (body.empty()) continue;
        labels.push_back(static_cast<int>(detail::parse_int(body, path.string() + ":" + std::to_string(lineno))));
    }
    return labels;
}

enum class Normalization { Unit, None };

struct Manifest {
    std::vector<std::filesystem::path> views;
    std::optional<std::filesystem::path> labels;
    int clusters = 0;
    Normalization normalize = Normalization::Unit;
    std::optional<long> samples;
};

inline Manifest parse_manifest(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    const auto base = path.parent_path();
    auto resolve = [&](std::string_view p) {
        std::filesystem::path fp{std::string(p)};
        return fp.is_absolute() ? fp : base / fp;
    };

    Manifest m;
    bool have_clusters = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        std::string_view body = line;
        if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        body = detail::trim(body);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError(where + ": expected 'key = value'");
        const auto key = detail::trim(body.substr(0, eq));
        const auto value = detail::trim(body.substr(eq + 1));
        if (value.empty()) throw ParseError(where + ": empty value for '" + std::string(key) + "'");
        if (key == "view") {
            m.views.push_back(resolve(value));
        } else if (key == "labels") {
            m.labels = resolve(value);
        } else if (key == "clusters") {
            m.clusters = static_cast<int>(detail::parse_int(value, where));
            have_clusters = true;
        } else if (key == "normalize") {
            if (value == "unit") m.normalize = Normalization::Unit;
            else if (value == "none") m.normalize = Normalization::None;
            else throw ParseError(where + ": normalize must be 'unit' or 'none'");
        } else if (key == "samples") {
            m.samples = detail::parse_int(value, where);
        } else {
            throw ParseError(where + ": unknown key '" + std::string(key) + "'");
        }
    }
    if (m.views.empty()) throw ParseError(path.string() + ": manifest lists no views");
    if (!have_clusters) throw ParseError(path.string() + ": manifest lacks 'clusters'");
    return m;
}

inline MultiViewDataset load_manifest(const std::filesystem::path& path) {
    const Manifest m = parse_manifest(path);
    MultiViewDataset data;
    data.clusters = m.clusters;
    for (const auto& vp : m.views) {
        Matrix X = load_matrix(vp);
        if (m.samples && X.cols() != *m.samples)
            throw DimensionMismatchError("view '" + vp.string() + "' has " + std::to_string(X.cols()) +
                                         " samples but the manifest declares " + std::to_string(*m.samples));
        data.views.push_back(m.normalize == Normalization::Unit ? normalize_unit_columns(X) : std::move(X));
        data.names.push_back(vp.string());
    }
    if (m.labels) data.labels = load_labels(*m.labels);
    data.validate();
    return data;
}

struct SynthSpec {
    int clusters = 3;
    int samples_per_cluster = 20;
    std::vector<int> ambient_dims{10, 15};  // one entry per view
    int subspace_dim = 3;
    double noise_sigma = 0.01;
    std::uint64_t seed = 0;

    void validate() const {
        if (clusters < 1 || samples_per_cluster < 1 || subspace_dim < 1 || ambient_dims.empty())
            throw InvalidInput("synthetic spec requires positive counts and at least one view");
        for (int m : ambient_dims)
            if (subspace_dim >= m)
                throw InvalidInput("subspace dimension " + std::to_string(subspace_dim) +
                                   " must be below every ambient dimension (got " + std::to_string(m) + ")");
        if (!(noise_sigma >= 0.0)) throw InvalidInput("noise sigma must be nonnegative");
    }
};

/// Union-of-subspaces data: each cluster owns a random d-dimensional
/// orthonormal basis per view, and a sample's d latent coefficients are shared
/// by all views. Samples are ordered cluster by cluster.
inline MultiViewDataset synth_multiview(const SynthSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto gaussian = [&](Eigen::Index r, Eigen::Index c) {
        Matrix G(r, c);
        for (Eigen::Index j = 0; j < c; ++j)
            for (Eigen::Index i = 0; i < r; ++i) G(i, j) = normal(rng);
        return G;
    };

    const int c = spec.clusters;
    const int per = spec.samples_per_cluster;
    const int d = spec.subspace_dim;
    const Eigen::Index n = static_cast<Eigen::Index>(c) * per;

    const Matrix coeffs = gaussian(d, n);
    MultiViewDataset data;
    data.clusters = c;
    data.labels = Labels(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) (*data.labels)[static_cast<std::size_t>(i)] = static_cast<int>(i / per);

    for (std::size_t v = 0; v < spec.ambient_dims.size(); ++v) {
        const int m = spec.ambient_dims[v];
        Matrix X(m, n);
        for (int k = 0; k < c; ++k) {
            Eigen::HouseholderQR<Matrix> qr(gaussian(m, d));
            const Matrix basis = qr.householderQ() * Matrix::Identity(m, d);
            X.middleCols(static_cast<Eigen::Index>(k) * per, per) =
                basis * coeffs.middleCols(static_cast<Eigen::Index>(k) * per, per);
        }
        if (spec.noise_sigma > 0.0) X += spec.noise_sigma * gaussian(m, n);
        data.views.push_back(std::move(X));
        data.names.push_back("view" + std::to_string(v));
    }
    return data;
}

}  // namespace umccev
