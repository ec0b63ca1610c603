#include "topogen/commands.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "topogen/bottleneck.hpp"
#include "topogen/error.hpp"
#include "topogen/genmodels.hpp"
#include "topogen/persistence.hpp"
#include "topogen/pipeline.hpp"
#include "topogen/pointcloud.hpp"
#include "topogen/rips.hpp"
#include "topogen/rng.hpp"
#include "topogen/svg.hpp"

namespace topogen {

namespace {

// DivergenceError must be matched before its std::exception base so a
// diverged run keeps its distinct exit code.
template <class F> int guarded(F&& body) {
    try {
        body();
        return 0;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

std::string fmt_g17(double x) {
    char buf[40];
    int len = std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf, len);
}

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

std::string join_path(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

// Checkpoint basename without extension, restricted to filename-safe
// characters; doubles as the model column in report.csv.
std::string model_label(const std::string& path) {
    std::string s = std::filesystem::path(path).stem().string();
    for (char& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') c = '_';
    return s;
}

// Bottleneck distances print with six significant digits, except that an
// exact zero prints as "0" and an essential-count mismatch as "inf".
std::string format_bottleneck(double v) {
    if (v == 0.0) return "0";
    if (std::isinf(v)) return "inf";
    char buf[40];
    int len = std::snprintf(buf, sizeof buf, "%#.6g", v);
    return std::string(buf, len);
}

} // namespace

int cmd_train(const TrainArgs& a) {
    return guarded([&] {
        if (a.data.empty()) throw InputError("train: a data CSV is required");
        if (a.out.empty()) throw InputError("train: an output checkpoint path is required");

        TrainConfig cfg;
        std::string kind_str = a.kind;
        bool lambda_from_file = false;
        if (!a.config.empty()) {
            LoadedConfig lc = load_train_config(a.config);
            cfg = lc.cfg;
            lambda_from_file = lc.lambda_set;
            if (kind_str.empty()) kind_str = lc.kind;
        }
        if (kind_str.empty())
            throw InputError("train: model kind missing; pass --kind or set kind= in the config");
        ModelKind kind = parse_kind(kind_str);

        if (a.steps) cfg.steps = *a.steps;
        if (a.batch_size) cfg.batch_size = *a.batch_size;
        if (a.n_critic) cfg.n_critic = *a.n_critic;
        if (a.latent_dim) cfg.latent_dim = *a.latent_dim;
        if (a.seed) cfg.seed = *a.seed;
        if (a.lambda)
            cfg.lambda = *a.lambda;
        else if (!lambda_from_file)
            cfg.lambda = default_lambda(kind);
        cfg.validate();

        PointCloud data = load_csv(a.data);
        if (a.standardize) data = standardize(data);

        GenerativeModel model = make_model(kind, data.points.cols(), cfg);
        std::vector<TraceRow> trace = train(model, data, cfg);
        save_model(model, a.out);
        std::string trace_path = a.trace.empty() ? a.out + ".trace.csv" : a.trace;
        save_trace_csv(trace, trace_path);

        write_manifest(a.out + ".manifest",
                       {{"command", "train"},
                        {"kind", kind_name(kind)},
                        {"data", a.data},
                        {"standardize", a.standardize ? "1" : "0"},
                        {"data_rows", std::to_string(data.points.rows())},
                        {"data_dim", std::to_string(data.points.cols())},
                        {"steps", std::to_string(cfg.steps)},
                        {"batch_size", std::to_string(cfg.batch_size)},
                        {"lambda", fmt_g17(cfg.lambda)},
                        {"lr", fmt_g17(cfg.lr)},
                        {"rho", fmt_g17(cfg.rho)},
                        {"eps", fmt_g17(cfg.eps)},
                        {"n_critic", std::to_string(cfg.n_critic)},
                        {"latent_dim", std::to_string(cfg.latent_dim)},
                        {"hidden", join_ints(cfg.hidden)},
                        {"kernel", cfg.kernel},
                        {"seed", std::to_string(cfg.seed)},
                        {"checkpoint", a.out},
                        {"trace", trace_path}});

        std::printf("trained %s for %ld steps; checkpoint %s\n", kind_name(kind).c_str(),
                    cfg.steps, a.out.c_str());
    });
}

int cmd_generate(const GenerateArgs& a) {
    return guarded([&] {
        if (a.model.empty()) throw InputError("generate: a model checkpoint is required");
        if (a.out.empty()) throw InputError("generate: an output CSV path is required");
        if (a.count < 1)
            throw InputError("generate: count must be at least 1, got " +
                             std::to_string(a.count));

        GenerativeModel m = load_model(a.model);
        PointCloud pc = generate(m, a.count, a.seed);
        save_csv(pc, a.out);

        write_manifest(a.out + ".manifest", {{"command", "generate"},
                                             {"model", a.model},
                                             {"kind", kind_name(m.kind)},
                                             {"count", std::to_string(a.count)},
                                             {"seed", std::to_string(a.seed)},
                                             {"out", a.out}});

        std::printf("wrote %d samples from %s to %s\n", a.count, kind_name(m.kind).c_str(),
                    a.out.c_str());
    });
}

int cmd_persist(const PersistArgs& a) {
    return guarded([&] {
        if (a.data.empty()) throw InputError("persist: a data CSV is required");
        if (a.out.empty()) throw InputError("persist: an output diagram path is required");
        if (a.max_scale < 0.0)
            throw InputError("persist: --max-scale must be nonnegative");

        PointCloud pc = load_csv(a.data);
        if (a.standardize) pc = standardize(pc);
        DistanceMatrix dist = pairwise_distances(pc);

        double cap = a.max_scale;
        if (cap == 0.0) cap = max_pairwise_distance(dist);
        if (!(cap > 0.0))
            throw InputError("persist: all points coincide; pass a positive --max-scale");

        FilteredComplex fc = build_vietoris_rips(dist, cap, a.max_dim);
        PersistenceDiagram d = compute_persistence(fc);
        save_diagram_csv(d, a.out);

        if (!a.plot.empty()) {
            PlotSpec spec;
            spec.scale_cap = cap;
            spec.kind = PlotKind::Barcode;
            write_text_file(a.plot + "_barcode.svg", render_svg(d, spec));
            spec.kind = PlotKind::PersistenceDiagram;
            write_text_file(a.plot + "_diagram.svg", render_svg(d, spec));
            spec.kind = PlotKind::RotatedPersistenceDiagram;
            write_text_file(a.plot + "_rotated.svg", render_svg(d, spec));
        }

        write_manifest(a.out + ".manifest",
                       {{"command", "persist"},
                        {"data", a.data},
                        {"standardize", a.standardize ? "1" : "0"},
                        {"points", std::to_string(pc.points.rows())},
                        {"dim", std::to_string(pc.points.cols())},
                        {"max_scale", fmt_g17(a.max_scale)},
                        {"scale_cap", fmt_g17(cap)},
                        {"max_dim", std::to_string(a.max_dim)},
                        {"out", a.out},
                        {"plot", a.plot}});

        std::printf("h0 bars %zu, h1 bars %zu, zero-persistence pairs dropped %ld\n",
                    d.h[0].size(), d.h[1].size(), d.dropped_zero_pairs);
    });
}

int cmd_bottleneck(const BottleneckArgs& args) {
    return guarded([&] {
        if (args.a.empty() || args.b.empty())
            throw InputError("bottleneck: two diagram CSVs are required");
        PersistenceDiagram da = load_diagram_csv(args.a);
        PersistenceDiagram db = load_diagram_csv(args.b);
        for (int dim = 0; dim < 2; ++dim) {
            double v = bottleneck_distance(da, db, dim);
            std::printf("%d,%s\n", dim, format_bottleneck(v).c_str());
        }
    });
}

int cmd_report(const ReportArgs& a) {
    return guarded([&] {
        if (a.checkpoints.empty())
            throw InputError("report: at least one model checkpoint is required");
        if (a.data.empty()) throw InputError("report: a data CSV is required");
        if (a.out_dir.empty()) throw InputError("report: an output directory is required");
        if (a.max_scale < 0.0)
            throw InputError("report: --max-scale must be nonnegative");

        std::filesystem::create_directories(a.out_dir);

        PointCloud data = load_csv(a.data);
        if (a.standardize) data = standardize(data);

        EvalConfig cfg;
        cfg.m_topo = a.topo_batch;
        cfg.reps = a.reps;
        cfg.max_scale = a.max_scale;
        cfg.max_dim = a.max_dim;
        cfg.seed = a.seed;
        cfg.bootstrap_ci = a.bootstrap;
        cfg.validate();

        std::vector<std::unique_ptr<SampleSource>> sources;
        std::vector<std::string> names;
        std::set<std::string> used;
        for (const std::string& path : a.checkpoints) {
            GenerativeModel m = load_model(path);
            std::string base = model_label(path);
            if (base.empty()) base = kind_name(m.kind);
            std::string name = base;
            for (int k = 2; used.count(name); ++k) name = base + "_" + std::to_string(k);
            used.insert(name);
            names.push_back(name);
            sources.push_back(model_source(m, name));
        }

        std::vector<EvalReport> reports;
        if (sources.size() >= 2) {
            std::vector<const SampleSource*> ptrs;
            ptrs.reserve(sources.size());
            for (const auto& s : sources) ptrs.push_back(s.get());
            reports = compare_models(ptrs, data, cfg);
        } else {
            reports.push_back(evaluate(*sources[0], data, cfg));
        }
        save_report_csv(reports, join_path(a.out_dir, "report.csv"));

        // Figure panels reuse repetition 0's batches under one scale cap
        // shared by every panel, so bar lengths are comparable across
        // models. Skipped entirely if that repetition is degenerate.
        PointCloud y1 = sample_batch(data, cfg.m_topo, derive_seed(cfg.seed, 0, 1));
        DistanceMatrix d1 = pairwise_distances(y1);
        std::vector<PointCloud> y2;
        y2.reserve(sources.size());
        for (const auto& s : sources)
            y2.push_back(s->draw(cfg.m_topo, derive_seed(cfg.seed, 0, 2), y1));

        double cap = cfg.max_scale;
        std::vector<DistanceMatrix> d2;
        d2.reserve(y2.size());
        for (const PointCloud& pc : y2) d2.push_back(pairwise_distances(pc));
        if (cap == 0.0) {
            cap = max_pairwise_distance(d1);
            for (const DistanceMatrix& d : d2) cap = std::max(cap, max_pairwise_distance(d));
        }
        if (cap > 0.0) {
            PlotSpec spec;
            spec.scale_cap = cap;
            PersistenceDiagram orig =
                compute_persistence(build_vietoris_rips(d1, cap, cfg.max_dim));
            spec.kind = PlotKind::Barcode;
            write_text_file(join_path(a.out_dir, "original_barcode.svg"),
                            render_svg(orig, spec));
            spec.kind = PlotKind::PersistenceDiagram;
            write_text_file(join_path(a.out_dir, "original_diagram.svg"),
                            render_svg(orig, spec));
            spec.kind = PlotKind::Barcode;
            for (size_t i = 0; i < sources.size(); ++i) {
                PersistenceDiagram di =
                    compute_persistence(build_vietoris_rips(d2[i], cap, cfg.max_dim));
                write_text_file(join_path(a.out_dir, names[i] + "_barcode.svg"),
                                render_svg(di, spec));
            }
        }

        std::vector<std::pair<std::string, std::string>> entries = {
            {"command", "report"},
            {"data", a.data},
            {"standardize", a.standardize ? "1" : "0"},
            {"max_scale", fmt_g17(a.max_scale)},
            {"max_dim", std::to_string(a.max_dim)},
            {"topo_batch", std::to_string(a.topo_batch)},
            {"reps", std::to_string(a.reps)},
            {"seed", std::to_string(a.seed)},
            {"bootstrap", a.bootstrap ? "1" : "0"}};
        for (size_t i = 0; i < names.size(); ++i) {
            entries.emplace_back("model" + std::to_string(i), names[i]);
            entries.emplace_back("checkpoint" + std::to_string(i), a.checkpoints[i]);
        }
        write_manifest(join_path(a.out_dir, "manifest.txt"), entries);

        for (size_t i = 0; i < reports.size(); ++i) {
            const EvalReport& r = reports[i];
            std::printf("%zu. %s combined %.6g [%.6g, %.6g] (reps %d/%d)\n", i + 1,
                        r.model.c_str(), r.combined.mean, r.combined.lower, r.combined.upper,
                        r.reps_effective, r.reps_requested);
        }
    });
}

} // namespace topogen
