#include "topogen/genmodels.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>

#include "topogen/error.hpp"

namespace topogen {

ModelKind parse_kind(const std::string& s) {
    std::string t;
    for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (t == "gp-wgan" || t == "gpwgan") return ModelKind::GpWgan;
    if (t == "wgan") return ModelKind::Wgan;
    if (t == "wae") return ModelKind::Wae;
    if (t == "vae") return ModelKind::Vae;
    throw InputError("unknown model kind '" + s + "' (expected gp-wgan, wgan, wae or vae)");
}

std::string kind_name(ModelKind k) {
    switch (k) {
    case ModelKind::GpWgan: return "gp-wgan";
    case ModelKind::Wgan: return "wgan";
    case ModelKind::Wae: return "wae";
    case ModelKind::Vae: return "vae";
    }
    return "?";
}

double default_lambda(ModelKind k) {
    switch (k) {
    case ModelKind::GpWgan: return 10.0;
    case ModelKind::Wgan: return 0.0;
    case ModelKind::Wae: return 10.0;
    case ModelKind::Vae: return 1.0;
    }
    return 0.0;
}

void TrainConfig::validate() const {
    if (batch_size < 2) throw InputError("batch_size must be at least 2");
    if (lambda < 0.0) throw InputError("lambda must be nonnegative");
    if (!(lr > 0.0)) throw InputError("lr must be positive");
    if (!(rho > 0.0 && rho < 1.0)) throw InputError("rho must lie in (0,1)");
    if (!(eps > 0.0)) throw InputError("eps must be positive");
    if (steps < 0) throw InputError("steps must be nonnegative");
    if (n_critic < 1) throw InputError("n_critic must be at least 1");
    if (latent_dim < 1) throw InputError("latent_dim must be at least 1");
    for (int h : hidden)
        if (h < 1) throw InputError("hidden layer widths must be positive");
    if (kernel != "imq" && kernel != "rbf")
        throw InputError("kernel must be imq or rbf, got '" + kernel + "'");
}

namespace {

std::string format_g17(double x) {
    char buf[40];
    int len = std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf, len);
}

template <class T> T parse_num(const std::string& s, const std::string& key) {
    T v{};
    auto [p, e] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (e != std::errc() || p != s.data() + s.size())
        throw InputError("config value for '" + key + "' is not a valid number: '" + s + "'");
    return v;
}

} // namespace

LoadedConfig load_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path);
    LoadedConfig out;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        TrainConfig& c = out.cfg;
        if (key == "kind") {
            out.kind = val;
        } else if (key == "steps") {
            c.steps = parse_num<long>(val, key);
        } else if (key == "batch_size") {
            c.batch_size = parse_num<int>(val, key);
        } else if (key == "lambda") {
            c.lambda = parse_num<double>(val, key);
            out.lambda_set = true;
        } else if (key == "lr") {
            c.lr = parse_num<double>(val, key);
        } else if (key == "rho") {
            c.rho = parse_num<double>(val, key);
        } else if (key == "eps") {
            c.eps = parse_num<double>(val, key);
        } else if (key == "n_critic") {
            c.n_critic = parse_num<int>(val, key);
        } else if (key == "seed") {
            c.seed = parse_num<uint64_t>(val, key);
        } else if (key == "latent_dim") {
            c.latent_dim = parse_num<int>(val, key);
        } else if (key == "kernel") {
            c.kernel = val;
        } else if (key == "hidden") {
            c.hidden.clear();
            size_t start = 0;
            while (start <= val.size()) {
                size_t comma = val.find(',', start);
                std::string item =
                    comma == std::string::npos ? val.substr(start) : val.substr(start, comma - start);
                if (!item.empty()) c.hidden.push_back(parse_num<int>(item, key));
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
        } else {
            throw InputError(path + ":" + std::to_string(lineno) + ": unknown config key '" + key +
                             "'");
        }
    }
    return out;
}

void save_train_config(const TrainConfig& cfg, const std::string& kind, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write config file: " + path);
    if (!kind.empty()) out << "kind=" << kind << '\n';
    out << "steps=" << cfg.steps << '\n';
    out << "batch_size=" << cfg.batch_size << '\n';
    out << "lambda=" << format_g17(cfg.lambda) << '\n';
    out << "lr=" << format_g17(cfg.lr) << '\n';
    out << "rho=" << format_g17(cfg.rho) << '\n';
    out << "eps=" << format_g17(cfg.eps) << '\n';
    out << "n_critic=" << cfg.n_critic << '\n';
    out << "seed=" << cfg.seed << '\n';
    out << "latent_dim=" << cfg.latent_dim << '\n';
    out << "hidden=";
    for (size_t i = 0; i < cfg.hidden.size(); ++i) {
        if (i) out << ',';
        out << cfg.hidden[i];
    }
    out << '\n';
    out << "kernel=" << cfg.kernel << '\n';
    if (!out) throw InputError("write failed: " + path);
}

GenerativeModel make_model(ModelKind kind, int data_dim, const TrainConfig& cfg) {
    cfg.validate();
    if (data_dim < 1) throw InputError("data dimension must be positive");
    GenerativeModel m;
    m.kind = kind;
    m.latent_dim = cfg.latent_dim;
    m.data_dim = data_dim;

    std::vector<int> gen_sizes = cfg.hidden;
    gen_sizes.push_back(data_dim);
    std::vector<Act> gen_acts(cfg.hidden.size(), Act::Relu);
    gen_acts.push_back(Act::Identity);

    int aux_out;
    switch (kind) {
    case ModelKind::GpWgan:
    case ModelKind::Wgan: aux_out = 1; break;
    case ModelKind::Wae: aux_out = cfg.latent_dim; break;
    case ModelKind::Vae: aux_out = 2 * cfg.latent_dim; break;
    default: aux_out = 1;
    }
    std::vector<int> aux_sizes = cfg.hidden;
    aux_sizes.push_back(aux_out);
    std::vector<Act> aux_acts(cfg.hidden.size(), Act::Relu);
    aux_acts.push_back(Act::Identity);

    Rng rng(derive_seed(cfg.seed, 0));
    m.generator = make_network(cfg.latent_dim, gen_sizes, gen_acts, rng);
    m.aux = make_network(data_dim, aux_sizes, aux_acts, rng);
    return m;
}

namespace {

constexpr char kModelMagic[8] = {'T', 'G', 'M', 'O', 'D', 'V', '0', '1'};

void put_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& in, const char* what) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4) throw InputError(std::string("truncated checkpoint reading ") + what);
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

} // namespace

void save_model(const GenerativeModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write checkpoint: " + path);
    out.write(kModelMagic, 8);
    unsigned char kind = static_cast<unsigned char>(m.kind);
    out.write(reinterpret_cast<const char*>(&kind), 1);
    put_u32(out, static_cast<uint32_t>(m.latent_dim));
    put_u32(out, static_cast<uint32_t>(m.data_dim));
    save_network(m.generator, out);
    save_network(m.aux, out);
    if (!out) throw InputError("write failed: " + path);
}

GenerativeModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (in.gcount() != 8 || std::memcmp(magic, kModelMagic, 8) != 0)
        throw InputError(path + ": not a model checkpoint (bad magic)");
    unsigned char kind;
    in.read(reinterpret_cast<char*>(&kind), 1);
    if (in.gcount() != 1 || kind > 3) throw InputError(path + ": bad model kind tag");
    GenerativeModel m;
    m.kind = static_cast<ModelKind>(kind);
    m.latent_dim = static_cast<int>(get_u32(in, "latent dim"));
    m.data_dim = static_cast<int>(get_u32(in, "data dim"));
    if (m.latent_dim < 1 || m.data_dim < 1) throw InputError(path + ": implausible dimensions");
    m.generator = load_network(in);
    m.aux = load_network(in);
    if (m.generator.input_dim != m.latent_dim || m.generator.output_dim() != m.data_dim)
        throw InputError(path + ": generator shape disagrees with header");
    return m;
}

Matrix sample_prior(int m, int latent_dim, ModelKind kind, Rng& rng) {
    if (m < 1) throw InputError("prior sample count must be positive");
    Matrix z(m, latent_dim);
    if (kind == ModelKind::Vae) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < latent_dim; ++j) z(i, j) = rng.normal();
    } else {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < latent_dim; ++j) z(i, j) = rng.uniform(-1.0, 1.0);
    }
    return z;
}

Matrix sample_prior(int m, int latent_dim, ModelKind kind, uint64_t seed) {
    Rng rng(seed);
    return sample_prior(m, latent_dim, kind, rng);
}

namespace {

// Gradient-penalty subgraph: lambda * mean((||d sum f / d x_hat||_2 - 1)^2),
// the norm guarded by 1e-12 under the square root.
NodeId penalty_node(Tape& t, const TapedNet& critic, const Matrix& x_hat, double lambda) {
    NodeId xh = t.leaf(x_hat, true);
    NodeId out = net_forward(t, critic, xh);
    NodeId g = t.backward(t.sum(out), {xh})[0];
    NodeId norm = t.sqrt(t.add_scalar(t.row_sum(t.square(g)), 1e-12));
    return t.scale(t.mean(t.square(t.add_scalar(norm, -1.0))), lambda);
}

// Unbiased MMD^2 between two same-size latent batches: the two
// within-sample kernel sums skip the diagonal and divide by m(m-1),
// the cross sum divides by m^2 and enters with weight -2.
NodeId mmd_node(Tape& t, NodeId za, NodeId zb, double kernel_c, bool rbf) {
    int m = t.value(za).rows();
    auto kernel = [&](NodeId sq_dists) {
        if (rbf) return t.exp(t.scale(sq_dists, -1.0 / kernel_c));
        return t.scale(t.recip(t.add_scalar(sq_dists, kernel_c)), kernel_c);
    };
    auto sq_dists = [&](NodeId p, NodeId q) {
        int rows = t.value(p).rows(), cols = t.value(q).rows();
        NodeId cross = t.matmul(p, q, false, true);
        NodeId sp = t.repeat_cols(t.row_sum(t.square(p)), cols);
        NodeId sq = t.transpose(t.repeat_cols(t.row_sum(t.square(q)), rows));
        return t.sub(t.add(sp, sq), t.scale(cross, 2.0));
    };
    Matrix off_diag(m, m, 1.0);
    for (int i = 0; i < m; ++i) off_diag(i, i) = 0.0;
    double within_scale = 1.0 / (static_cast<double>(m) * (m - 1));
    NodeId mask = t.leaf(off_diag);
    NodeId waa = t.scale(t.sum(t.mul(kernel(sq_dists(za, za)), mask)), within_scale);
    NodeId wbb = t.scale(t.sum(t.mul(kernel(sq_dists(zb, zb)), mask)), within_scale);
    NodeId cross =
        t.scale(t.sum(kernel(sq_dists(za, zb))), -2.0 / (static_cast<double>(m) * m));
    return t.add(t.add(waa, wbb), cross);
}

// mean over rows of the squared Euclidean distance between paired rows
NodeId mean_sq_dist_node(Tape& t, NodeId x, NodeId y) {
    return t.mean(t.row_sum(t.square(t.sub(x, y))));
}

void check_finite_batch(const Matrix& m, const char* what) {
    if (!m.all_finite()) throw InputError(std::string(what) + " contains non-finite values");
}

} // namespace

Objective critic_objective(const Network& critic, const Matrix& x, const Matrix& x_tilde,
                           const Matrix& x_hat, double lambda) {
    if (x.rows() != x_tilde.rows()) throw InputError("real and generated batch sizes differ");
    Tape t;
    TapedNet tn = place_params(t, critic, true);
    NodeId fake = t.mean(net_forward(t, tn, t.leaf(x_tilde)));
    NodeId real = t.mean(net_forward(t, tn, t.leaf(x)));
    NodeId loss = t.sub(fake, real);
    Objective obj;
    if (lambda != 0.0) {
        NodeId pen = penalty_node(t, tn, x_hat, lambda);
        loss = t.add(loss, pen);
        obj.parts.emplace_back("penalty", t.value(pen)(0, 0));
    } else {
        obj.parts.emplace_back("penalty", 0.0);
    }
    obj.value = t.value(loss)(0, 0);
    obj.grads = read_grads(t, loss, tn);
    return obj;
}

Objective generator_objective(const Network& critic, const Network& generator, const Matrix& z) {
    Tape t;
    TapedNet tg = place_params(t, generator, true);
    TapedNet tc = place_params(t, critic, false);
    NodeId x_tilde = net_forward(t, tg, t.leaf(z));
    NodeId loss = t.scale(t.mean(net_forward(t, tc, x_tilde)), -1.0);
    Objective obj;
    obj.value = t.value(loss)(0, 0);
    obj.grads = read_grads(t, loss, tg);
    return obj;
}

Objective wae_objective(const Network& encoder, const Network& decoder, const Matrix& x,
                        const Matrix& z_prior, double lambda, double kernel_c, bool rbf) {
    if (x.rows() < 2) throw InputError("the unbiased MMD estimator needs a batch of at least 2");
    if (x.rows() != z_prior.rows()) throw InputError("data and prior batch sizes differ");
    Tape t;
    TapedNet te = place_params(t, encoder, true);
    TapedNet td = place_params(t, decoder, true);
    NodeId xn = t.leaf(x);
    NodeId zq = net_forward(t, te, xn);
    NodeId xr = net_forward(t, td, zq);
    NodeId recon = mean_sq_dist_node(t, xn, xr);
    NodeId mmd = mmd_node(t, zq, t.leaf(z_prior), kernel_c, rbf);
    NodeId loss = t.add(recon, t.scale(mmd, lambda));

    Objective obj;
    obj.value = t.value(loss)(0, 0);
    obj.parts.emplace_back("recon", t.value(recon)(0, 0));
    obj.parts.emplace_back("mmd", t.value(mmd)(0, 0));
    std::vector<NodeId> targets = te.params;
    targets.insert(targets.end(), td.params.begin(), td.params.end());
    for (NodeId id : t.backward(loss, targets)) obj.grads.push_back(t.value(id));
    return obj;
}

Objective vae_objective(const Network& encoder, const Network& decoder, const Matrix& x,
                        const Matrix& noise) {
    Tape t;
    TapedNet te = place_params(t, encoder, true);
    TapedNet td = place_params(t, decoder, true);
    int latent = decoder.input_dim;
    if (encoder.output_dim() != 2 * latent)
        throw InputError("VAE encoder must emit mean and log-variance halves");
    if (noise.rows() != x.rows() || noise.cols() != latent)
        throw InputError("noise batch shape disagrees with the latent dimension");
    NodeId xn = t.leaf(x);
    NodeId h = net_forward(t, te, xn);
    NodeId mu = t.slice_cols(h, 0, latent);
    NodeId logvar = t.clamp(t.slice_cols(h, latent, 2 * latent), -10.0, 10.0);
    NodeId sigma = t.exp(t.scale(logvar, 0.5));
    NodeId z = t.add(mu, t.mul(sigma, t.leaf(noise)));
    NodeId xr = net_forward(t, td, z);
    NodeId recon = mean_sq_dist_node(t, xn, xr);
    // closed form per row: 0.5 * sum(mu^2 + sigma^2 - log sigma^2 - 1)
    NodeId inner = t.sub(t.add(t.square(mu), t.square(sigma)), t.add_scalar(logvar, 1.0));
    NodeId kl = t.mean(t.scale(t.row_sum(inner), 0.5));
    NodeId loss = t.add(recon, kl);

    Objective obj;
    obj.value = t.value(loss)(0, 0);
    obj.parts.emplace_back("recon", t.value(recon)(0, 0));
    obj.parts.emplace_back("kl", t.value(kl)(0, 0));
    std::vector<NodeId> targets = te.params;
    targets.insert(targets.end(), td.params.begin(), td.params.end());
    for (NodeId id : t.backward(loss, targets)) obj.grads.push_back(t.value(id));
    return obj;
}

WganLosses wgan_losses(const Network& critic, const Network& generator, const Matrix& x,
                       const Matrix& z, double lambda, const std::vector<double>& u) {
    if (x.rows() != z.rows()) throw InputError("real and latent batch sizes differ");
    if (u.size() != static_cast<size_t>(x.rows()))
        throw InputError("one interpolation coefficient per row is required");
    Matrix x_tilde = net_apply(generator, z);
    Matrix x_hat(x.rows(), x.cols());
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j)
            x_hat(i, j) = u[i] * x(i, j) + (1.0 - u[i]) * x_tilde(i, j);
    Objective c = critic_objective(critic, x, x_tilde, x_hat, lambda);
    Objective g = generator_objective(critic, generator, z);
    WganLosses out;
    out.critic = c.value;
    out.generator = g.value;
    out.penalty = c.parts[0].second;
    return out;
}

double wae_mmd_loss(const Network& encoder, const Network& decoder, const Matrix& x,
                    const Matrix& z_prior, double lambda, double kernel_c, bool rbf) {
    return wae_objective(encoder, decoder, x, z_prior, lambda, kernel_c, rbf).value;
}

double vae_loss(const Network& encoder, const Network& decoder, const Matrix& x,
                const Matrix& noise) {
    return vae_objective(encoder, decoder, x, noise).value;
}

void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write trace file: " + path);
    out << "step,loss_name,value\n";
    char buf[48];
    for (const TraceRow& r : trace) {
        std::snprintf(buf, sizeof buf, "%.17g", r.value);
        out << r.step << ',' << r.loss_name << ',' << buf << '\n';
    }
    if (!out) throw InputError("write failed: " + path);
}

std::vector<TraceRow> train(GenerativeModel& m, const PointCloud& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.dim() != m.data_dim)
        throw InputError("data dimension " + std::to_string(data.dim()) +
                         " does not match the model's " + std::to_string(m.data_dim));
    if (data.size() < cfg.batch_size)
        throw InputError("training data has fewer rows than batch_size");
    check_finite_batch(data.points, "training data");

    Rng rng_batch(derive_seed(cfg.seed, 1));
    Rng rng_prior(derive_seed(cfg.seed, 2));
    Rng rng_mix(derive_seed(cfg.seed, 3));

    std::vector<TraceRow> trace;
    auto guard = [](double v, const char* name, long step) {
        if (!std::isfinite(v))
            throw DivergenceError(std::string(name) + " loss became non-finite at step " +
                                      std::to_string(step),
                                  step);
    };

    bool gan = m.kind == ModelKind::GpWgan || m.kind == ModelKind::Wgan;
    RmspropState gen_state = make_rmsprop_state(m.generator);
    RmspropState aux_state = make_rmsprop_state(m.aux);
    double kernel_c = 2.0 * m.latent_dim;

    for (long step = 1; step <= cfg.steps; ++step) {
        if (gan) {
            double critic_loss = 0.0, penalty = 0.0;
            for (int c = 0; c < cfg.n_critic; ++c) {
                PointCloud xb = sample_batch(data, cfg.batch_size, rng_batch);
                Matrix z = sample_prior(cfg.batch_size, m.latent_dim, m.kind, rng_prior);
                Matrix x_tilde = net_apply(m.generator, z);
                Matrix x_hat(cfg.batch_size, m.data_dim);
                for (int i = 0; i < cfg.batch_size; ++i) {
                    double u = rng_mix.uniform01();
                    for (int j = 0; j < m.data_dim; ++j)
                        x_hat(i, j) = u * xb.points(i, j) + (1.0 - u) * x_tilde(i, j);
                }
                Objective obj = critic_objective(m.aux, xb.points, x_tilde, x_hat, cfg.lambda);
                rmsprop_step(m.aux, obj.grads, aux_state, cfg.lr, cfg.rho, cfg.eps);
                critic_loss = obj.value;
                penalty = obj.parts[0].second;
            }
            Matrix z = sample_prior(cfg.batch_size, m.latent_dim, m.kind, rng_prior);
            Objective gobj = generator_objective(m.aux, m.generator, z);
            rmsprop_step(m.generator, gobj.grads, gen_state, cfg.lr, cfg.rho, cfg.eps);

            guard(critic_loss, "critic", step);
            guard(gobj.value, "generator", step);
            trace.push_back({step, "critic", critic_loss});
            trace.push_back({step, "penalty", penalty});
            trace.push_back({step, "generator", gobj.value});
        } else {
            PointCloud xb = sample_batch(data, cfg.batch_size, rng_batch);
            Objective obj;
            if (m.kind == ModelKind::Wae) {
                Matrix zp = sample_prior(cfg.batch_size, m.latent_dim, m.kind, rng_prior);
                obj = wae_objective(m.aux, m.generator, xb.points, zp, cfg.lambda, kernel_c,
                                    cfg.kernel == "rbf");
            } else {
                Matrix noise(cfg.batch_size, m.latent_dim);
                for (double& v : noise.data()) v = rng_prior.normal();
                obj = vae_objective(m.aux, m.generator, xb.points, noise);
            }
            size_t n_enc = 2 * m.aux.layers.size();
            std::vector<Matrix> enc_grads(obj.grads.begin(), obj.grads.begin() + n_enc);
            std::vector<Matrix> dec_grads(obj.grads.begin() + n_enc, obj.grads.end());
            rmsprop_step(m.aux, enc_grads, aux_state, cfg.lr, cfg.rho, cfg.eps);
            rmsprop_step(m.generator, dec_grads, gen_state, cfg.lr, cfg.rho, cfg.eps);

            guard(obj.value, "total", step);
            for (const auto& [name, v] : obj.parts) trace.push_back({step, name, v});
            trace.push_back({step, "total", obj.value});
        }
    }
    return trace;
}

PointCloud generate(const GenerativeModel& m, int m_samples, uint64_t seed) {
    Rng rng(seed);
    Matrix z = sample_prior(m_samples, m.latent_dim, m.kind, rng);
    PointCloud out;
    out.points = net_apply(m.generator, z);
    return out;
}

} // namespace topogen
