#include "topogen/pointcloud.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "topogen/error.hpp"

namespace topogen {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    size_t start = 0;
    for (;;) {
        size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string trimmed(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& cell, double& out) {
    std::string t = trimmed(cell);
    if (t.empty()) return false;
    // from_chars accepts "inf"/"nan"; those are rejected later by the
    // finiteness check with a clearer message
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    return ec == std::errc() && ptr == t.data() + t.size();
}

} // namespace

DistanceMatrix pairwise_distances(const PointCloud& pc) {
    int n = pc.size(), d = pc.dim();
    DistanceMatrix dm{Matrix(n, n)};
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) {
                double diff = pc.points(i, k) - pc.points(j, k);
                s += diff * diff;
            }
            double dist = std::sqrt(s);
            dm.d(i, j) = dist;
            dm.d(j, i) = dist;
        }
    return dm;
}

PointCloud load_csv(const std::string& path, const std::vector<std::string>& feature_columns,
                    const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open point-cloud file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw InputError(path + ": empty file, expected a header line");
    std::vector<std::string> header = split_csv_line(line);
    for (auto& h : header) h = trimmed(h);

    auto column_index = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw InputError(path + ": no column named '" + name + "' in header");
        return static_cast<int>(it - header.begin());
    };

    int label_idx = -1;
    if (!label_column.empty()) label_idx = column_index(label_column);

    std::vector<int> selected;
    if (feature_columns.empty()) {
        for (int c = 0; c < static_cast<int>(header.size()); ++c)
            if (c != label_idx) selected.push_back(c);
    } else {
        for (const auto& name : feature_columns) {
            int c = column_index(name);
            if (c == label_idx)
                throw InputError(path + ": column '" + name + "' selected both as feature and label");
            selected.push_back(c);
        }
    }
    if (selected.empty()) throw InputError(path + ": no feature columns selected");

    PointCloud pc;
    for (int c : selected) pc.columns.push_back(header[c]);
    pc.label_name = label_idx >= 0 ? header[label_idx] : "";

    std::vector<double> values;
    int n = 0;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trimmed(line).empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw InputError(path + ":" + std::to_string(lineno) + ": row has " +
                             std::to_string(cells.size()) + " cells, header has " +
                             std::to_string(header.size()));
        for (size_t k = 0; k < selected.size(); ++k) {
            int c = selected[k];
            double x;
            if (!parse_double(cells[c], x) || !std::isfinite(x))
                throw InputError(path + ":" + std::to_string(lineno) + ": column '" + header[c] +
                                 "': not a finite number: '" + trimmed(cells[c]) + "'");
            values.push_back(x);
        }
        if (label_idx >= 0) {
            double y;
            if (!parse_double(cells[label_idx], y))
                throw InputError(path + ":" + std::to_string(lineno) + ": column '" +
                                 header[label_idx] + "': not a number: '" +
                                 trimmed(cells[label_idx]) + "'");
            pc.labels.push_back(y);
        }
        ++n;
    }
    if (n == 0) throw InputError(path + ": no data rows");

    pc.points = Matrix(n, static_cast<int>(selected.size()), std::move(values));
    return pc;
}

namespace {

// Shortest decimal string that round-trips to the same double.
std::string format_exact(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace

void save_csv(const PointCloud& pc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write point-cloud file: " + path);
    int d = pc.dim();
    for (int c = 0; c < d; ++c) {
        if (c) out << ',';
        if (c < static_cast<int>(pc.columns.size()) && !pc.columns[c].empty())
            out << pc.columns[c];
        else
            out << 'x' << c;
    }
    out << '\n';
    for (int i = 0; i < pc.size(); ++i) {
        for (int c = 0; c < d; ++c) {
            if (c) out << ',';
            out << format_exact(pc.points(i, c));
        }
        out << '\n';
    }
    if (!out) throw InputError("write failed: " + path);
}

PointCloud sample_batch(const PointCloud& pc, int m, Rng& rng) {
    int n = pc.size();
    if (m < 1 || m > n)
        throw InputError("sample_batch: requested " + std::to_string(m) + " of " +
                         std::to_string(n) + " rows");
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    PointCloud out;
    out.columns = pc.columns;
    out.points = Matrix(m, pc.dim());
    for (int i = 0; i < m; ++i) {
        int j = i + static_cast<int>(rng.index(static_cast<uint64_t>(n - i)));
        std::swap(idx[i], idx[j]);
        for (int c = 0; c < pc.dim(); ++c) out.points(i, c) = pc.points(idx[i], c);
    }
    return out;
}

PointCloud sample_batch(const PointCloud& pc, int m, uint64_t seed) {
    Rng rng(seed);
    return sample_batch(pc, m, rng);
}

PointCloud standardize(const PointCloud& pc) {
    int n = pc.size(), d = pc.dim();
    if (n < 2) throw InputError("standardize needs at least 2 points, got " + std::to_string(n));
    PointCloud out;
    out.columns = pc.columns;
    out.labels = pc.labels;
    out.label_name = pc.label_name;
    out.points = Matrix(n, d);
    for (int c = 0; c < d; ++c) {
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += pc.points(i, c);
        mean /= n;
        double var = 0.0;
        for (int i = 0; i < n; ++i) {
            double diff = pc.points(i, c) - mean;
            var += diff * diff;
        }
        var /= n;
        double sd = std::sqrt(var);
        if (sd == 0.0) {
            for (int i = 0; i < n; ++i) out.points(i, c) = 0.0;
        } else {
            for (int i = 0; i < n; ++i) out.points(i, c) = (pc.points(i, c) - mean) / sd;
        }
    }
    return out;
}

} // namespace topogen
