#include "topogen/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "topogen/bottleneck.hpp"
#include "topogen/error.hpp"
#include "topogen/persistence.hpp"
#include "topogen/rips.hpp"

namespace topogen {

void EvalConfig::validate() const {
    if (m_topo < 4) throw InputError("topology batch size must be at least 4");
    if (reps < 2) throw InputError("repetition count must be at least 2");
    if (max_dim != 1 && max_dim != 2) throw InputError("max_dim must be 1 or 2");
    if (max_scale < 0.0) throw InputError("max_scale must be nonnegative (0 = auto)");
}

namespace {

class ModelSrc final : public SampleSource {
public:
    ModelSrc(GenerativeModel m, std::string name) : m_(std::move(m)), name_(std::move(name)) {}
    std::string name() const override { return name_; }
    PointCloud draw(int m, uint64_t seed, const PointCloud&) const override {
        return generate(m_, m, seed);
    }

private:
    GenerativeModel m_;
    std::string name_;
};

class ResampleSrc final : public SampleSource {
public:
    ResampleSrc(PointCloud data, std::string name) : data_(std::move(data)), name_(std::move(name)) {}
    std::string name() const override { return name_; }
    PointCloud draw(int m, uint64_t seed, const PointCloud&) const override {
        return sample_batch(data_, m, seed);
    }

private:
    PointCloud data_;
    std::string name_;
};

class IdentitySrc final : public SampleSource {
public:
    explicit IdentitySrc(std::string name) : name_(std::move(name)) {}
    std::string name() const override { return name_; }
    PointCloud draw(int, uint64_t, const PointCloud& y1) const override { return y1; }

private:
    std::string name_;
};

CiEntry aggregate(const std::vector<double>& xs, bool bootstrap, uint64_t seed) {
    CiEntry e;
    size_t n = xs.size();
    double sum = 0.0;
    for (double x : xs) sum += x;
    e.mean = sum / static_cast<double>(n);
    if (!std::isfinite(e.mean)) {
        e.lower = e.upper = e.mean;
        return e;
    }
    if (bootstrap) {
        const int kResamples = 1000;
        Rng rng(seed);
        std::vector<double> means(kResamples);
        for (int b = 0; b < kResamples; ++b) {
            double s = 0.0;
            for (size_t i = 0; i < n; ++i) s += xs[rng.index(n)];
            means[b] = s / static_cast<double>(n);
        }
        std::sort(means.begin(), means.end());
        e.lower = means[kResamples * 25 / 1000];
        e.upper = means[kResamples * 975 / 1000 - 1];
    } else {
        double sq = 0.0;
        for (double x : xs) {
            double d = x - e.mean;
            sq += d * d;
        }
        double sd = n > 1 ? std::sqrt(sq / static_cast<double>(n - 1)) : 0.0;
        double half = 1.96 * sd / std::sqrt(static_cast<double>(n));
        e.lower = std::max(0.0, e.mean - half);
        e.upper = e.mean + half;
    }
    return e;
}

} // namespace

std::unique_ptr<SampleSource> model_source(const GenerativeModel& m, std::string name) {
    return std::make_unique<ModelSrc>(m, std::move(name));
}

std::unique_ptr<SampleSource> resample_source(const PointCloud& data, std::string name) {
    return std::make_unique<ResampleSrc>(data, std::move(name));
}

std::unique_ptr<SampleSource> identity_source(std::string name) {
    return std::make_unique<IdentitySrc>(std::move(name));
}

EvalReport evaluate(const SampleSource& src, const PointCloud& data, const EvalConfig& cfg) {
    cfg.validate();
    if (data.size() < 1) throw InputError("evaluation data is empty");

    EvalReport rep;
    rep.model = src.name();
    rep.reps_requested = cfg.reps;
    rep.m_topo = cfg.m_topo;

    std::vector<double> per_dim[2];
    std::vector<double> combined;
    for (int r = 0; r < cfg.reps; ++r) {
        PointCloud y1 = sample_batch(data, cfg.m_topo, derive_seed(cfg.seed, r, 1));
        PointCloud y2 = src.draw(cfg.m_topo, derive_seed(cfg.seed, r, 2), y1);
        DistanceMatrix d1 = pairwise_distances(y1);
        DistanceMatrix d2 = pairwise_distances(y2);
        // one shared cap: both filtrations truncate at the same scale,
        // so their diagrams live on a common axis and a degenerate
        // batch on one side still compares against the other
        double cap = cfg.max_scale > 0.0
                         ? cfg.max_scale
                         : std::max(max_pairwise_distance(d1), max_pairwise_distance(d2));
        if (!(cap > 0.0)) {
            std::cerr << "warning: repetition " << r << " for " << src.name()
                      << " is degenerate (both batches are single points), skipping\n";
            ++rep.skipped;
            continue;
        }
        PersistenceDiagram g1 = compute_persistence(build_vietoris_rips(d1, cap, cfg.max_dim));
        PersistenceDiagram g2 = compute_persistence(build_vietoris_rips(d2, cap, cfg.max_dim));
        double db0 = bottleneck_distance(g1, g2, 0);
        double db1 = bottleneck_distance(g1, g2, 1);
        per_dim[0].push_back(db0);
        per_dim[1].push_back(db1);
        combined.push_back(std::max(db0, db1));
    }

    rep.reps_effective = cfg.reps - rep.skipped;
    if (rep.reps_effective < (cfg.reps * 4 + 4) / 5)
        throw InputError("more than 20% of repetitions were degenerate (" +
                         std::to_string(rep.skipped) + " of " + std::to_string(cfg.reps) +
                         " skipped)");

    rep.by_dim[0] = aggregate(per_dim[0], cfg.bootstrap_ci, derive_seed(cfg.seed, 0, 100));
    rep.by_dim[1] = aggregate(per_dim[1], cfg.bootstrap_ci, derive_seed(cfg.seed, 1, 100));
    rep.combined = aggregate(combined, cfg.bootstrap_ci, derive_seed(cfg.seed, 2, 100));
    return rep;
}

std::vector<EvalReport> compare_models(const std::vector<const SampleSource*>& models,
                                       const PointCloud& data, const EvalConfig& cfg) {
    if (models.size() < 2) throw InputError("model comparison needs at least 2 models");
    std::vector<EvalReport> reports;
    for (const SampleSource* src : models) reports.push_back(evaluate(*src, data, cfg));
    std::stable_sort(reports.begin(), reports.end(), [](const EvalReport& a, const EvalReport& b) {
        return a.combined.mean < b.combined.mean;
    });
    return reports;
}

namespace {

std::string format_g6(double x) {
    char buf[40];
    int len = std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::string(buf, len);
}

} // namespace

void save_report_csv(const std::vector<EvalReport>& reports, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write report file: " + path);
    out << "model,dim,mean,lower,upper,reps,batch\n";
    for (const EvalReport& r : reports) {
        const CiEntry* entries[3] = {&r.by_dim[0], &r.by_dim[1], &r.combined};
        const char* dims[3] = {"0", "1", "max"};
        for (int k = 0; k < 3; ++k)
            out << r.model << ',' << dims[k] << ',' << format_g6(entries[k]->mean) << ','
                << format_g6(entries[k]->lower) << ',' << format_g6(entries[k]->upper) << ','
                << r.reps_effective << ',' << r.m_topo << '\n';
    }
    if (!out) throw InputError("write failed: " + path);
}

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write manifest: " + path);
    for (const auto& [k, v] : entries) out << k << '=' << v << '\n';
    if (!out) throw InputError("write failed: " + path);
}

} // namespace topogen
