#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "topogen/matrix.hpp"
#include "topogen/rng.hpp"

namespace topogen {

enum class Act : uint8_t { Identity = 0, Relu = 1, Tanh = 2, Sigmoid = 3 };

// Fully connected layer, weights fan_in x fan_out, bias 1 x fan_out.
struct Layer {
    Matrix w;
    Matrix b;
    Act act = Act::Identity;
};

struct Network {
    int input_dim = 0;
    std::vector<Layer> layers;

    int output_dim() const { return layers.empty() ? input_dim : layers.back().w.cols(); }
    size_t param_count() const; // sum over layers of (fan_in + 1) * fan_out
};

// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
// layer_sizes are the output widths; acts must match in length.
Network make_network(int input_dim, const std::vector<int>& layer_sizes,
                     const std::vector<Act>& acts, Rng& rng);

// Plain forward pass without a tape.
Matrix net_apply(const Network& net, const Matrix& x);

// Versioned little-endian checkpoint, exact round trip.
void save_network(const Network& net, std::ostream& out);
Network load_network(std::istream& in);
void save_network_file(const Network& net, const std::string& path);
Network load_network_file(const std::string& path);

// Reverse-mode tape. Nodes are appended in topological order (inputs
// always precede consumers) and each holds its forward value. backward
// emits the adjoint computation as further tape nodes, so a gradient is
// itself differentiable and a second backward over the extended tape
// yields gradients of gradient-dependent losses.
using NodeId = int32_t;

enum class Op : uint8_t {
    Leaf,
    Add,        // a + b, same shape
    Sub,        // a - b
    Mul,        // elementwise a * b, same shape
    Scale,      // a * p0
    AddScalar,  // a + p0
    Matmul,     // op(a) * op(b), flags i0/i1; transposing both is not supported
    Relu,
    TanhOp,
    SigmoidOp,
    ExpOp,
    SqrtOp,
    Square,
    Recip,      // elementwise 1 / a
    Sum,        // all entries -> 1x1
    RowSum,     // n x d -> n x 1
    ColSum,     // n x d -> 1 x d
    RepeatRows, // 1 x d -> i0 x d
    RepeatCols, // n x 1 -> n x i0
    TransposeOp,
    SliceCols,  // columns [i0, i1)
    PadCols,    // inverse of SliceCols: place into columns [i0, i0+cols) of width i1
    Clamp,      // clamp to [p0, p1]
};

struct Node {
    Op op = Op::Leaf;
    NodeId a = -1, b = -1;
    double p0 = 0.0, p1 = 0.0;
    int32_t i0 = 0, i1 = 0;
    bool needs_grad = false;
    Matrix val;
};

class Tape {
public:
    NodeId leaf(Matrix v, bool needs_grad = false);

    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId scale(NodeId a, double c);
    NodeId add_scalar(NodeId a, double c);
    NodeId matmul(NodeId a, NodeId b, bool trans_a = false, bool trans_b = false);
    NodeId relu(NodeId a);
    NodeId tanh(NodeId a);
    NodeId sigmoid(NodeId a);
    NodeId exp(NodeId a);
    NodeId sqrt(NodeId a);
    NodeId square(NodeId a);
    NodeId recip(NodeId a);
    NodeId sum(NodeId a);
    NodeId row_sum(NodeId a);
    NodeId col_sum(NodeId a);
    NodeId repeat_rows(NodeId a, int n);
    NodeId repeat_cols(NodeId a, int d);
    NodeId transpose(NodeId a);
    NodeId slice_cols(NodeId a, int c0, int c1);
    NodeId pad_cols(NodeId a, int c0, int total);
    NodeId clamp(NodeId a, double lo, double hi);

    // sum / count, emitted as Sum then Scale
    NodeId mean(NodeId a);

    const Matrix& value(NodeId id) const { return nodes_[id].val; }
    size_t size() const { return nodes_.size(); }

    // Reverse sweep from a scalar loss. For each target, returns the
    // node holding d loss / d target (a zero leaf when the loss does
    // not depend on it). ReLU and clamp gates are emitted as constant
    // masks, so a second backward treats them as locally linear, which
    // is the almost-everywhere correct second derivative. Throws
    // InputError if loss is not 1x1.
    std::vector<NodeId> backward(NodeId loss, const std::vector<NodeId>& targets);

private:
    std::vector<Node> nodes_;
    NodeId push(Node n);
    void check(NodeId id) const;
};

// Network parameters placed on a tape as differentiable leaves, in
// layer order w0, b0, w1, b1, ...
struct TapedNet {
    std::vector<NodeId> params;
    const Network* net = nullptr;
};

TapedNet place_params(Tape& t, const Network& net, bool needs_grad = true);

// Forward pass recorded on the tape; x is any node of width input_dim.
NodeId net_forward(Tape& t, const TapedNet& tn, NodeId x);

// Gradient of a scalar loss with respect to every parameter, read back
// as matrices in the same order as TapedNet::params.
std::vector<Matrix> read_grads(Tape& t, NodeId loss, const TapedNet& tn);

// Penalty lambda * mean over rows of (||d f / d x||_2 - 1)^2 for a
// scalar-output net, built with double backprop, plus its exact
// parameter gradient. The row norm is guarded as sqrt(s + 1e-12) to
// stay differentiable at zero gradient.
struct PenaltyResult {
    double value = 0.0;
    std::vector<Matrix> grads;
};

PenaltyResult grad_of_gradient_penalty(const Network& net, const Matrix& x_hat, double lambda);

// One RMSProp update: state <- rho * state + (1 - rho) * g^2, then
// param <- param - lr * g / sqrt(state + eps), elementwise.
void rmsprop_step(Matrix& param, const Matrix& grad, Matrix& state,
                  double lr, double rho, double eps);

// Optimizer state for a whole network, one accumulator per parameter
// matrix in TapedNet order.
struct RmspropState {
    std::vector<Matrix> v;
};

RmspropState make_rmsprop_state(const Network& net);
void rmsprop_step(Network& net, const std::vector<Matrix>& grads, RmspropState& st,
                  double lr, double rho, double eps);

} // namespace topogen
