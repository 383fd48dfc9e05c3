#include "meeso/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "meeso/errors.hpp"
#include "meeso/rng.hpp"

namespace meeso {

Eigen::MatrixXd Dataset::rows(const std::vector<std::size_t>& indices) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()), features.cols());
    for (std::size_t i = 0; i < indices.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(indices[i]));
    return out;
}

std::vector<int> Dataset::labels_of(const std::vector<std::size_t>& indices) const {
    std::vector<int> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(labels[i]);
    return out;
}

std::vector<std::string> validate_dataset(const Dataset& d) {
    std::vector<std::string> out;
    if (static_cast<std::size_t>(d.features.rows()) != d.labels.size()) out.emplace_back("feature/label count mismatch");
    if (d.n_classes < 1) out.emplace_back("no classes");
    if (!d.features.allFinite()) out.emplace_back("non-finite feature");
    for (int y : d.labels) {
        if (y < 0 || y >= d.n_classes) {
            out.emplace_back("label out of range");
            break;
        }
    }
    std::set<std::size_t> train(d.train_indices.begin(), d.train_indices.end());
    for (std::size_t i : d.test_indices) {
        if (train.contains(i)) {
            out.emplace_back("train and test splits overlap");
            break;
        }
    }
    for (std::size_t i : d.train_indices)
        if (i >= d.labels.size()) out.emplace_back("train index out of range");
    for (std::size_t i : d.test_indices)
        if (i >= d.labels.size()) out.emplace_back("test index out of range");
    std::set<int> seen;
    for (std::size_t i : d.train_indices)
        if (i < d.labels.size()) seen.insert(d.labels[i]);
    if (static_cast<int>(seen.size()) != d.n_classes) out.emplace_back("class missing from training split");
    return out;
}

void split_dataset(Dataset& d, double test_fraction, std::int64_t seed) {
    auto rng = make_rng(seed);
    d.train_indices.clear();
    d.test_indices.clear();
    for (int c = 0; c < d.n_classes; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < d.labels.size(); ++i)
            if (d.labels[i] == c) members.push_back(i);
        std::shuffle(members.begin(), members.end(), rng);
        std::size_t n_test = static_cast<std::size_t>(test_fraction * static_cast<double>(members.size()));
        if (!members.empty() && n_test >= members.size()) n_test = members.size() - 1;
        d.test_indices.insert(d.test_indices.end(), members.begin(), members.begin() + static_cast<long>(n_test));
        d.train_indices.insert(d.train_indices.end(), members.begin() + static_cast<long>(n_test), members.end());
    }
    std::sort(d.train_indices.begin(), d.train_indices.end());
    std::sort(d.test_indices.begin(), d.test_indices.end());
}

Dataset make_two_blobs(std::int64_t seed, const BlobOptions& opts) {
    Dataset d;
    d.n_classes = 2;
    d.features.resize(static_cast<Eigen::Index>(opts.n_samples), static_cast<Eigen::Index>(opts.n_features));
    d.labels.resize(opts.n_samples);
    auto rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, opts.sigma);
    for (std::size_t i = 0; i < opts.n_samples; ++i) {
        const int label = i < opts.n_samples / 2 ? 0 : 1;
        d.labels[i] = label;
        const double center = label == 0 ? -opts.mean_offset : opts.mean_offset;
        for (std::size_t f = 0; f < opts.n_features; ++f)
            d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = center + noise(rng);
    }
    split_dataset(d, opts.test_fraction, derive_seed(seed, {1}));
    return d;
}

Dataset load_csv(const std::filesystem::path& path, bool has_header, std::int64_t split_seed, double test_fraction) {
    std::ifstream in(path);
    if (!in) throw NotFound("dataset not found: " + path.string());

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && has_header) continue;
        if (line.find_first_not_of(" \t") == std::string::npos) continue;

        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 2) throw ParseError("dataset line " + std::to_string(line_no) + ": need features and a label", line_no);
        if (width == 0) width = cells.size();
        if (cells.size() != width)
            throw ParseError("dataset line " + std::to_string(line_no) + ": expected " + std::to_string(width) + " columns", line_no);

        std::vector<double> row;
        for (std::size_t c = 0; c + 1 < cells.size(); ++c) {
            const auto& s = cells[c];
            const auto first = s.find_first_not_of(" \t");
            const auto last = s.find_last_not_of(" \t");
            double v = 0.0;
            const char* b = first == std::string::npos ? s.data() : s.data() + first;
            const char* e = first == std::string::npos ? s.data() : s.data() + last + 1;
            auto [ptr, ec] = std::from_chars(b, e, v);
            if (ec != std::errc{} || ptr != e || b == e)
                throw ParseError("dataset line " + std::to_string(line_no) + ": bad number '" + s + "'", line_no);
            row.push_back(v);
        }
        int label = 0;
        const auto& ls = cells.back();
        const auto lf = ls.find_first_not_of(" \t");
        const auto ll = ls.find_last_not_of(" \t");
        if (lf == std::string::npos)
            throw ParseError("dataset line " + std::to_string(line_no) + ": empty label", line_no);
        auto [ptr, ec] = std::from_chars(ls.data() + lf, ls.data() + ll + 1, label);
        if (ec != std::errc{} || ptr != ls.data() + ll + 1 || label < 0)
            throw ParseError("dataset line " + std::to_string(line_no) + ": bad label '" + ls + "'", line_no);
        rows.push_back(std::move(row));
        labels.push_back(label);
    }
    if (rows.empty()) throw ParseError("dataset " + path.string() + " has no rows", 0);

    Dataset d;
    d.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t f = 0; f + 1 < width; ++f)
            d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = rows[i][f];
    d.labels = std::move(labels);
    d.n_classes = *std::max_element(d.labels.begin(), d.labels.end()) + 1;
    split_dataset(d, test_fraction, split_seed);
    if (auto problems = validate_dataset(d); !problems.empty())
        throw ParseError("dataset " + path.string() + ": " + problems.front(), 0);
    return d;
}

namespace {

struct ColumnStats {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd stddev;
};

ColumnStats train_stats(const Dataset& d) {
    const Eigen::MatrixXd train = d.rows(d.train_indices);
    ColumnStats s;
    s.mean = train.colwise().mean();
    const Eigen::MatrixXd centered = train.rowwise() - s.mean;
    s.stddev = (centered.array().square().colwise().sum() / static_cast<double>(train.rows())).sqrt();
    return s;
}

}  // namespace

Dataset preprocess(const Dataset& d, Preprocessing mode, std::int64_t seed) {
    switch (mode) {
        case Preprocessing::None: return d;
        case Preprocessing::Standardize: {
            const auto stats = train_stats(d);
            Dataset out = d;
            for (Eigen::Index f = 0; f < out.features.cols(); ++f) {
                out.features.col(f).array() -= stats.mean(f);
                if (stats.stddev(f) > 0.0) out.features.col(f) /= stats.stddev(f);
            }
            return out;
        }
        case Preprocessing::NoiseAugment: {
            const auto stats = train_stats(d);
            Dataset out = d;
            const Eigen::Index n = d.features.rows();
            const auto n_train = static_cast<Eigen::Index>(d.train_indices.size());
            out.features.conservativeResize(n + n_train, Eigen::NoChange);
            auto rng = make_rng(seed);
            std::normal_distribution<double> unit(0.0, 1.0);
            for (Eigen::Index i = 0; i < n_train; ++i) {
                const auto src = static_cast<Eigen::Index>(d.train_indices[static_cast<std::size_t>(i)]);
                for (Eigen::Index f = 0; f < d.features.cols(); ++f)
                    out.features(n + i, f) = d.features(src, f) + 0.1 * stats.stddev(f) * unit(rng);
                out.labels.push_back(d.labels[static_cast<std::size_t>(src)]);
                out.train_indices.push_back(static_cast<std::size_t>(n + i));
            }
            return out;
        }
    }
    return d;
}

}  // namespace meeso
