#include <cstdint>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "topogen/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"trains small tabular generative models and compares them to the "
                 "training data by persistent homology"};
    app.require_subcommand(1);

    // Shared flags live on the parent app; every subcommand enables
    // fallthrough so they are accepted before or after the subcommand
    // name.
    std::uint64_t seed = 0;
    bool standardize = false;
    double max_scale = 0.0;
    int max_dim = 2;
    int topo_batch = 128;
    int reps = 100;
    auto* seed_opt = app.add_option("--seed", seed, "base RNG seed (default 0)");
    app.add_flag("--standardize", standardize, "z-score each feature column first");
    app.add_option("--max-scale", max_scale, "filtration scale cap; 0 = batch diameter");
    app.add_option("--max-dim", max_dim, "top Rips dimension, 1 or 2 (default 2)");
    app.add_option("--topo-batch", topo_batch, "points per topology batch (default 128)");
    app.add_option("--reps", reps, "evaluation repetitions (default 100)");

    topogen::TrainArgs targs;
    long steps = 0;
    double lambda = 0.0;
    int batch_size = 0;
    int n_critic = 0;
    int latent_dim = 0;
    auto* train = app.add_subcommand("train", "train a generative model and write a checkpoint");
    train->fallthrough();
    train->add_option("--kind", targs.kind, "gp-wgan, wgan, wae, or vae");
    train->add_option("--data", targs.data, "training point-cloud CSV");
    train->add_option("--config", targs.config, "key=value config file");
    train->add_option("--out", targs.out, "checkpoint output path");
    train->add_option("--trace", targs.trace, "loss trace CSV (default <out>.trace.csv)");
    auto* steps_opt = train->add_option("--steps", steps, "training steps");
    auto* lambda_opt = train->add_option("--lambda", lambda, "penalty weight");
    auto* bs_opt = train->add_option("--batch-size", batch_size, "minibatch size");
    auto* nc_opt = train->add_option("--n-critic", n_critic, "critic steps per generator step");
    auto* ld_opt = train->add_option("--latent-dim", latent_dim, "latent dimension");

    topogen::GenerateArgs gargs;
    auto* gen = app.add_subcommand("generate", "sample a trained model into a CSV");
    gen->fallthrough();
    gen->add_option("--model", gargs.model, "model checkpoint");
    gen->add_option("--count", gargs.count, "number of samples (default 64)");
    gen->add_option("--out", gargs.out, "output point-cloud CSV");

    topogen::PersistArgs pargs;
    auto* persist =
        app.add_subcommand("persist", "compute a persistence diagram from a point cloud");
    persist->fallthrough();
    persist->add_option("--data", pargs.data, "point-cloud CSV");
    persist->add_option("--out", pargs.out, "diagram CSV output path");
    persist->add_option("--plot", pargs.plot,
                        "SVG prefix; writes <prefix>_barcode/_diagram/_rotated.svg");

    topogen::BottleneckArgs bargs;
    auto* bottleneck = app.add_subcommand(
        "bottleneck", "print per-dimension bottleneck distances between two diagrams");
    bottleneck->fallthrough();
    bottleneck->add_option("a", bargs.a, "first diagram CSV");
    bottleneck->add_option("b", bargs.b, "second diagram CSV");

    topogen::ReportArgs rargs;
    auto* report = app.add_subcommand(
        "report", "evaluate checkpoints against the data and write the report set");
    report->fallthrough();
    report->add_option("checkpoints", rargs.checkpoints, "model checkpoint files");
    report->add_option("--data", rargs.data, "reference point-cloud CSV");
    report->add_option("--out-dir", rargs.out_dir, "output directory");
    report->add_flag("--bootstrap", rargs.bootstrap,
                     "percentile-bootstrap CIs instead of the normal approximation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (train->parsed()) {
        targs.standardize = standardize;
        if (steps_opt->count()) targs.steps = steps;
        if (lambda_opt->count()) targs.lambda = lambda;
        if (bs_opt->count()) targs.batch_size = batch_size;
        if (nc_opt->count()) targs.n_critic = n_critic;
        if (ld_opt->count()) targs.latent_dim = latent_dim;
        if (seed_opt->count()) targs.seed = seed;
        return topogen::cmd_train(targs);
    }
    if (gen->parsed()) {
        gargs.seed = seed;
        return topogen::cmd_generate(gargs);
    }
    if (persist->parsed()) {
        pargs.standardize = standardize;
        pargs.max_scale = max_scale;
        pargs.max_dim = max_dim;
        return topogen::cmd_persist(pargs);
    }
    if (bottleneck->parsed()) return topogen::cmd_bottleneck(bargs);
    if (report->parsed()) {
        rargs.standardize = standardize;
        rargs.max_scale = max_scale;
        rargs.max_dim = max_dim;
        rargs.topo_batch = topo_batch;
        rargs.reps = reps;
        rargs.seed = seed;
        return topogen::cmd_report(rargs);
    }
    return 2;
}
