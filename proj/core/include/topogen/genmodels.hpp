#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "topogen/autodiff.hpp"
#include "topogen/pointcloud.hpp"

namespace topogen {

enum class ModelKind : uint8_t { GpWgan = 0, Wgan = 1, Wae = 2, Vae = 3 };

// Accepted names: gp-wgan, wgan, wae, vae (case-insensitive).
ModelKind parse_kind(const std::string& s);
std::string kind_name(ModelKind k);

struct TrainConfig {
    int batch_size = 64;
    double lambda = 10.0; // gradient or latent penalty weight; 0 for plain WGAN
    double lr = 0.001;
    double rho = 0.9;
    double eps = 1e-6;
    long steps = 1000;
    int n_critic = 5; // critic updates per generator update
    uint64_t seed = 0;
    int latent_dim = 2;
    std::vector<int> hidden{64, 64};
    std::string kernel = "imq"; // latent MMD kernel: imq or rbf

    void validate() const; // throws InputError on out-of-range fields
};

// Key=value round trip; unknown keys rejected. hidden serializes as a
// comma list, kind travels in the same file (empty when absent).
// default_lambda(kind) gives 10 for gp-wgan and wae, 0 for wgan, 1 for
// vae's KL weight (fixed by its objective, kept for the manifest).
struct LoadedConfig {
    TrainConfig cfg;
    std::string kind;
    bool lambda_set = false; // lambda appeared in the file, as opposed to the kind default
};
LoadedConfig load_train_config(const std::string& path);
void save_train_config(const TrainConfig& cfg, const std::string& kind, const std::string& path);
double default_lambda(ModelKind k);

// Generator maps latent to data space for every kind. GAN kinds carry a
// critic (data -> 1); autoencoder kinds carry an encoder (data ->
// latent, doubled for the VAE's mean and log-variance halves).
struct GenerativeModel {
    ModelKind kind = ModelKind::Wae;
    int latent_dim = 2;
    int data_dim = 0;
    Network generator;
    Network aux;
};

GenerativeModel make_model(ModelKind kind, int data_dim, const TrainConfig& cfg);

// Versioned checkpoint embedding both networks; exact round trip.
void save_model(const GenerativeModel& m, const std::string& path);
GenerativeModel load_model(const std::string& path);

// m x latent_dim prior draws: uniform on [-1,1] for GAN and WAE kinds,
// standard normal for the VAE's reparameterization.
Matrix sample_prior(int m, int latent_dim, ModelKind kind, Rng& rng);
Matrix sample_prior(int m, int latent_dim, ModelKind kind, uint64_t seed);

// Critic and generator objectives. Critic loss = mean f(G(z)) - mean
// f(x) + lambda * penalty at x_hat = u x + (1 - u) G(z), u uniform per
// row; generator loss = -mean f(G(z)). u must have one entry per row.
struct WganLosses {
    double critic = 0.0;
    double generator = 0.0;
    double penalty = 0.0; // the lambda-weighted term inside critic
};

WganLosses wgan_losses(const Network& critic, const Network& generator,
                       const Matrix& x, const Matrix& z, double lambda,
                       const std::vector<double>& u);

// Reconstruction mean ||x - G(Q(x))||^2 plus lambda times the unbiased
// MMD^2 between encoded and prior latents (within-sample sums exclude
// the diagonal). kernel_c is the IMQ bandwidth C in C / (C + r^2);
// rbf switches to exp(-r^2 / kernel_c). Throws InputError for batches
// smaller than 2.
double wae_mmd_loss(const Network& encoder, const Network& decoder,
                    const Matrix& x, const Matrix& z_prior, double lambda,
                    double kernel_c, bool rbf = false);

// Reconstruction mean ||x - G(z)||^2 with z = mu + sigma * noise plus
// mean closed-form KL to the standard normal, 0.5 * sum(mu^2 + sigma^2
// - log sigma^2 - 1) per row. Log-variance is clamped to [-10, 10].
double vae_loss(const Network& encoder, const Network& decoder,
                const Matrix& x, const Matrix& noise);

// One optimization target evaluated on a fixed batch: loss value, its
// named summands for the trace, and parameter gradients in TapedNet
// order (encoder grads precede decoder grads for the joint
// autoencoder objectives). These are exactly the computations the
// train loop applies RMSProp to, exposed so descent and
// gradient-isolation properties are testable on frozen batches.
struct Objective {
    double value = 0.0;
    std::vector<std::pair<std::string, double>> parts;
    std::vector<Matrix> grads;
};

Objective critic_objective(const Network& critic, const Matrix& x, const Matrix& x_tilde,
                           const Matrix& x_hat, double lambda);
Objective generator_objective(const Network& critic, const Network& generator, const Matrix& z);
Objective wae_objective(const Network& encoder, const Network& decoder, const Matrix& x,
                        const Matrix& z_prior, double lambda, double kernel_c, bool rbf);
Objective vae_objective(const Network& encoder, const Network& decoder, const Matrix& x,
                        const Matrix& noise);

struct TraceRow {
    long step = 0;
    std::string loss_name;
    double value = 0.0;
};

// CSV "step,loss_name,value".
void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

// Kind-appropriate loop: GAN kinds run n_critic critic updates per
// generator update, autoencoder kinds run joint updates, all with
// RMSProp. Deterministic per cfg.seed. steps = 0 leaves the model
// untouched. Throws DivergenceError with the step index when a loss
// goes non-finite.
std::vector<TraceRow> train(GenerativeModel& m, const PointCloud& data, const TrainConfig& cfg);

// G applied to a fresh prior batch; output dimension = data_dim.
PointCloud generate(const GenerativeModel& m, int m_samples, uint64_t seed);

} // namespace topogen
