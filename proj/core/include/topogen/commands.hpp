#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace topogen {

// Subcommand entry points shared by the CLI binary and the tests. Each
// returns a process exit code: 0 success, 2 bad usage or input, 3
// training divergence. Every subcommand that writes files also writes a
// key=value manifest next to them recording the full configuration and
// seed, so a run can be reproduced from its outputs alone.

struct TrainArgs {
    std::string kind; // gp-wgan, wgan, wae, vae; may come from the config file instead
    std::string data;
    std::string config; // optional config file, overridden by the explicit flags below
    std::string out; // checkpoint path
    std::string trace; // loss trace CSV; default <out>.trace.csv
    bool standardize = false;
    std::optional<long> steps;
    std::optional<double> lambda;
    std::optional<int> batch_size;
    std::optional<int> n_critic;
    std::optional<int> latent_dim;
    std::optional<uint64_t> seed;
};
int cmd_train(const TrainArgs& a);

struct GenerateArgs {
    std::string model; // checkpoint path
    int count = 64;
    std::string out; // point-cloud CSV
    uint64_t seed = 0;
};
int cmd_generate(const GenerateArgs& a);

struct PersistArgs {
    std::string data; // point-cloud CSV
    std::string out; // diagram CSV
    bool standardize = false;
    double max_scale = 0.0; // 0 = batch diameter
    int max_dim = 2;
    std::string plot; // prefix for <prefix>_barcode/_diagram/_rotated.svg; empty = no plots
};
int cmd_persist(const PersistArgs& a);

struct BottleneckArgs {
    std::string a; // diagram CSV
    std::string b;
};
// Prints one "dim,d_b" line per homology dimension to stdout, d_b with
// six significant digits ("inf" on essential-count mismatch, bare "0"
// for an exact zero).
int cmd_bottleneck(const BottleneckArgs& args);

struct ReportArgs {
    std::vector<std::string> checkpoints; // at least one
    std::string data;
    std::string out_dir;
    bool standardize = false;
    double max_scale = 0.0;
    int max_dim = 2;
    int topo_batch = 128;
    int reps = 100;
    uint64_t seed = 0;
    bool bootstrap = false;
};
// Writes report.csv, manifest.txt, the original sample's barcode and
// persistence-diagram SVGs, and one barcode SVG per model.
int cmd_report(const ReportArgs& a);

} // namespace topogen
