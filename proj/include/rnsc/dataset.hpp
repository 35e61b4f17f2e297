#pragma once

// Dataset ingestion (IDX, CSV) and synthetic Gaussian blobs.
//
// IDX layout (MNIST distribution), all integers big-endian:
//   images: magic 0x00000803, count, rows, cols, then count*rows*cols bytes
//   labels: magic 0x00000801, count, then count bytes
// Pixels are scaled from 0..255 to [0, 1].

#include "rnsc/error.hpp"
#include "rnsc/point_set.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace rnsc {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

namespace detail {

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset,
                               const std::string& what) {
    if (bytes.size() < offset + 4) {
        throw LengthError(what + ": truncated header");
    }
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::optional<double> parse_double(std::string_view cell) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) return std::nullopt;
    return value;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

}  // namespace detail

/// Read an IDX image file (and optionally its label file) into a PointSet.
inline PointSet load_idx(const std::filesystem::path& images_path,
                         const std::optional<std::filesystem::path>& labels_path = std::nullopt) {
    const auto images = detail::read_bytes(images_path);
    const std::string where = images_path.string();
    const auto magic = detail::read_be32(images, 0, where);
    if (magic != kIdxImageMagic) {
        std::ostringstream msg;
        msg << where << ": bad magic 0x" << std::hex << std::setw(8) << std::setfill('0') << magic
            << ", expected 0x00000803";
        throw FormatError(msg.str());
    }
    const std::size_t count = detail::read_be32(images, 4, where);
    const std::size_t rows = detail::read_be32(images, 8, where);
    const std::size_t cols = detail::read_be32(images, 12, where);
    const std::size_t pixels = rows * cols;
    constexpr std::size_t header = 16;
    if (images.size() < header + count * pixels) {
        throw LengthError(where + ": payload has " + std::to_string(images.size() - header) +
                          " bytes, header promises " + std::to_string(count * pixels));
    }

    RowMatrix points(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(pixels));
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t p = 0; p < pixels; ++p) {
            points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) =
                images[header + i * pixels + p] / 255.0;
        }
    }

    std::optional<Labels> labels;
    std::vector<std::string> names;
    if (labels_path) {
        const auto raw = detail::read_bytes(*labels_path);
        const std::string lwhere = labels_path->string();
        const auto lmagic = detail::read_be32(raw, 0, lwhere);
        if (lmagic != kIdxLabelMagic) {
            std::ostringstream msg;
            msg << lwhere << ": bad magic 0x" << std::hex << std::setw(8) << std::setfill('0')
                << lmagic << ", expected 0x00000801";
            throw FormatError(msg.str());
        }
        const std::size_t lcount = detail::read_be32(raw, 4, lwhere);
        if (raw.size() < 8 + lcount) {
            throw LengthError(lwhere + ": payload shorter than " + std::to_string(lcount) + " labels");
        }
        if (lcount != count) {
            throw ConsistencyError(std::to_string(count) + " images but " + std::to_string(lcount) +
                                   " labels");
        }
        // class ids follow the sorted raw values, so digits stay digits
        std::map<int, int> code;
        for (std::size_t i = 0; i < lcount; ++i) code.emplace(raw[8 + i], 0);
        int next = 0;
        for (auto& [value, id] : code) {
            id = next++;
            names.push_back(std::to_string(value));
        }
        labels.emplace();
        labels->reserve(lcount);
        for (std::size_t i = 0; i < lcount; ++i) labels->push_back(code.at(raw[8 + i]));
    }
    return PointSet(std::move(points), std::move(labels), images_path.filename().string(),
                    std::move(names));
}

/// Read a numeric CSV. A first row holding any non-numeric feature cell is a header.
/// The label column may hold arbitrary tokens; they are re-encoded 0..C-1 in
/// first-seen order.
inline PointSet load_csv(const std::filesystem::path& path,
                         std::optional<int> label_column = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());

    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;
    std::size_t width = 0;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        const auto cells = detail::split_commas(trimmed);
        if (first) {
            width = cells.size();
            if (label_column && (*label_column < 0 || *label_column >= static_cast<int>(width))) {
                throw ParameterError("label column " + std::to_string(*label_column) +
                                     " outside row width " + std::to_string(width));
            }
        } else if (cells.size() != width) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(width) + " columns, found " +
                              std::to_string(cells.size()));
        }

        std::vector<double> features;
        features.reserve(width);
        bool numeric = true;
        std::size_t bad_col = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (label_column && static_cast<int>(c) == *label_column) continue;
            const auto value = detail::parse_double(cells[c]);
            if (!value) {
                numeric = false;
                bad_col = c;
                break;
            }
            features.push_back(*value);
        }
        if (!numeric) {
            if (first) {
                first = false;  // header row
                continue;
            }
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": column " +
                             std::to_string(bad_col) + " is not numeric: '" +
                             std::string(detail::trim(cells[bad_col])) + "'");
        }
        first = false;
        if (label_column) {
            raw_labels.emplace_back(detail::trim(cells[static_cast<std::size_t>(*label_column)]));
        }
        rows.push_back(std::move(features));
    }
    if (rows.empty()) throw FormatError(path.string() + ": no data rows");

    const std::size_t d = rows.front().size();
    if (d == 0) throw FormatError(path.string() + ": no feature columns");
    RowMatrix points(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }

    std::optional<Labels> labels;
    std::vector<std::string> names;
    if (label_column) {
        std::map<std::string, int> code;
        labels.emplace();
        labels->reserve(raw_labels.size());
        for (const auto& token : raw_labels) {
            auto [it, inserted] = code.emplace(token, static_cast<int>(names.size()));
            if (inserted) names.push_back(token);
            labels->push_back(it->second);
        }
    }
    return PointSet(std::move(points), std::move(labels), path.filename().string(), std::move(names));
}

/// Write features (and labels as a trailing column) with round-trip precision.
inline void write_csv(const PointSet& ps, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << std::setprecision(17);
    const auto& x = ps.points();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (j) out << ',';
            out << x(i, j);
        }
        if (ps.has_labels()) out << ',' << (*ps.labels())[static_cast<std::size_t>(i)];
        out << '\n';
    }
}

/// Isotropic Gaussian clusters plus pure-noise coordinates.
///
/// Cluster c is centred on coordinate axis (c mod d) at distance 1 + c / d from
/// the origin, so consecutive means are at least unit-separated. Each of the
/// `noise_dims` trailing coordinates is standard normal. Rows are grouped by
/// cluster; identical arguments give bit-identical output.
inline PointSet make_blobs(int n_per_cluster, int k_clusters, int d, double spread, int noise_dims,
                           std::uint64_t seed) {
    if (n_per_cluster < 1 || k_clusters < 1 || d < 1 || !(spread > 0.0) || noise_dims < 0) {
        throw ParameterError("make_blobs: n_per_cluster, k_clusters, d, spread must be positive and "
                             "noise_dims nonnegative");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int n = n_per_cluster * k_clusters;
    RowMatrix points(n, d + noise_dims);
    Labels labels(static_cast<std::size_t>(n));
    for (int c = 0; c < k_clusters; ++c) {
        const int axis = c % d;
        const double offset = 1.0 + static_cast<double>(c / d);
        for (int p = 0; p < n_per_cluster; ++p) {
            const int row = c * n_per_cluster + p;
            for (int j = 0; j < d; ++j) {
                points(row, j) = (j == axis ? offset : 0.0) + spread * gauss(rng);
            }
            for (int j = 0; j < noise_dims; ++j) points(row, d + j) = gauss(rng);
            labels[static_cast<std::size_t>(row)] = c;
        }
    }
    std::ostringstream name;
    name << "blobs(" << n_per_cluster << "x" << k_clusters << ",d=" << d << ",spread=" << spread
         << ",noise=" << noise_dims << ",seed=" << seed << ")";
    return PointSet(std::move(points), std::move(labels), name.str());
}

}  // namespace rnsc
