#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "topogen/genmodels.hpp"
#include "topogen/pointcloud.hpp"

namespace topogen {

struct EvalConfig {
    int m_topo = 128; // points per topology batch
    int reps = 100;
    double max_scale = 0.0; // 0 = per repetition, the larger of the two batch diameters
    int max_dim = 2; // Rips dimension cap; 1 disables triangle deaths
    uint64_t seed = 0;
    bool bootstrap_ci = false; // percentile bootstrap instead of the normal approximation

    void validate() const; // m_topo >= 4, reps >= 2
};

// Where the second batch of a repetition comes from. Implementations
// must be deterministic per seed; y1 is the paired real batch, which
// the identity source returns unchanged.
class SampleSource {
public:
    virtual ~SampleSource() = default;
    virtual std::string name() const = 0;
    virtual PointCloud draw(int m, uint64_t seed, const PointCloud& y1) const = 0;
};

// Samples a trained generator.
std::unique_ptr<SampleSource> model_source(const GenerativeModel& m, std::string name);
// Redraws from a real cloud without replacement.
std::unique_ptr<SampleSource> resample_source(const PointCloud& data, std::string name);
// Echoes y1; evaluate() on this source must report exactly zero.
std::unique_ptr<SampleSource> identity_source(std::string name);

struct CiEntry {
    double mean = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct EvalReport {
    std::string model;
    CiEntry by_dim[2];
    CiEntry combined; // max over dims within each repetition, aggregated
    int reps_requested = 0;
    int reps_effective = 0;
    int skipped = 0;
    int m_topo = 0;
};

// One Table-1-style evaluation: per repetition draw Y1 from data and Y2
// from the source with paired per-repetition seeds, build both Rips
// filtrations under a shared scale cap, compute diagrams, record the
// bottleneck distance per dimension and the max over dimensions, then
// aggregate mean and 95% CI (normal approximation mean +- 1.96 s /
// sqrt(R), or bootstrap when configured). Repetitions whose shared cap
// is not positive (both batches degenerate) are skipped with a warning;
// if fewer than 80% of requested repetitions survive, throws
// InputError.
EvalReport evaluate(const SampleSource& src, const PointCloud& data, const EvalConfig& cfg);

// Evaluates every source with identical repetition seeds so Y1 batches
// pair across models, then stable-sorts ascending by combined mean.
std::vector<EvalReport> compare_models(const std::vector<const SampleSource*>& models,
                                       const PointCloud& data, const EvalConfig& cfg);

// "model,dim,mean,lower,upper,reps,batch" with dim rows "0", "1",
// "max"; reps is the effective count.
void save_report_csv(const std::vector<EvalReport>& reports, const std::string& path);

// Plain-text key=value manifest, keys in given order, one per line.
void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries);

} // namespace topogen
