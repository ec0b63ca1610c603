#include "topogen/autodiff.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "topogen/error.hpp"

namespace topogen {

size_t Network::param_count() const {
    size_t n = 0;
    for (const Layer& l : layers)
        n += static_cast<size_t>(l.w.rows() + 1) * l.w.cols();
    return n;
}

Network make_network(int input_dim, const std::vector<int>& layer_sizes,
                     const std::vector<Act>& acts, Rng& rng) {
    if (input_dim < 1) throw InputError("network input dimension must be positive");
    if (layer_sizes.size() != acts.size())
        throw InputError("layer size and activation lists differ in length");
    Network net;
    net.input_dim = input_dim;
    int fan_in = input_dim;
    for (size_t l = 0; l < layer_sizes.size(); ++l) {
        int fan_out = layer_sizes[l];
        if (fan_out < 1) throw InputError("layer width must be positive");
        Layer layer;
        layer.w = Matrix(fan_in, fan_out);
        double lim = std::sqrt(6.0 / (fan_in + fan_out));
        for (int i = 0; i < fan_in; ++i)
            for (int j = 0; j < fan_out; ++j) layer.w(i, j) = rng.uniform(-lim, lim);
        layer.b = Matrix(1, fan_out);
        layer.act = acts[l];
        net.layers.push_back(std::move(layer));
        fan_in = fan_out;
    }
    return net;
}

namespace {

double apply_act(Act a, double x) {
    switch (a) {
    case Act::Identity: return x;
    case Act::Relu: return x > 0.0 ? x : 0.0;
    case Act::Tanh: return std::tanh(x);
    case Act::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
    }
    return x;
}

} // namespace

Matrix net_apply(const Network& net, const Matrix& x) {
    if (x.cols() != net.input_dim)
        throw InputError("network expects width " + std::to_string(net.input_dim) + ", got " +
                         std::to_string(x.cols()));
    Matrix h = x;
    for (const Layer& l : net.layers) {
        Matrix z = matmul(h, l.w);
        for (int i = 0; i < z.rows(); ++i)
            for (int j = 0; j < z.cols(); ++j) z(i, j) = apply_act(l.act, z(i, j) + l.b(0, j));
        h = std::move(z);
    }
    return h;
}

namespace {

void put_bytes(std::ostream& out, const void* p, size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void put_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    put_bytes(out, b, 4);
}

void put_f64(std::ostream& out, double x) {
    uint64_t v;
    std::memcpy(&v, &x, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    put_bytes(out, b, 8);
}

void get_bytes(std::istream& in, void* p, size_t n, const char* what) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n))
        throw InputError(std::string("truncated checkpoint while reading ") + what);
}

uint32_t get_u32(std::istream& in, const char* what) {
    unsigned char b[4];
    get_bytes(in, b, 4, what);
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

double get_f64(std::istream& in, const char* what) {
    unsigned char b[8];
    get_bytes(in, b, 8, what);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
    double x;
    std::memcpy(&x, &v, 8);
    return x;
}

constexpr char kNetMagic[8] = {'T', 'G', 'N', 'E', 'T', 'V', '0', '1'};
constexpr uint32_t kMaxDim = 1u << 20;

} // namespace

void save_network(const Network& net, std::ostream& out) {
    put_bytes(out, kNetMagic, 8);
    put_u32(out, static_cast<uint32_t>(net.input_dim));
    put_u32(out, static_cast<uint32_t>(net.layers.size()));
    for (const Layer& l : net.layers) {
        put_u32(out, static_cast<uint32_t>(l.w.cols()));
        unsigned char act = static_cast<unsigned char>(l.act);
        put_bytes(out, &act, 1);
    }
    for (const Layer& l : net.layers) {
        for (double x : l.w.data()) put_f64(out, x);
        for (double x : l.b.data()) put_f64(out, x);
    }
}

Network load_network(std::istream& in) {
    char magic[8];
    get_bytes(in, magic, 8, "magic");
    if (std::memcmp(magic, kNetMagic, 8) != 0)
        throw InputError("not a network checkpoint (bad magic)");
    Network net;
    uint32_t input_dim = get_u32(in, "input dim");
    uint32_t n_layers = get_u32(in, "layer count");
    if (input_dim == 0 || input_dim > kMaxDim || n_layers > 64)
        throw InputError("implausible network header");
    net.input_dim = static_cast<int>(input_dim);
    std::vector<uint32_t> widths(n_layers);
    std::vector<Act> acts(n_layers);
    for (uint32_t l = 0; l < n_layers; ++l) {
        widths[l] = get_u32(in, "layer width");
        if (widths[l] == 0 || widths[l] > kMaxDim) throw InputError("implausible layer width");
        unsigned char act;
        get_bytes(in, &act, 1, "activation");
        if (act > 3) throw InputError("unknown activation tag");
        acts[l] = static_cast<Act>(act);
    }
    uint32_t fan_in = input_dim;
    for (uint32_t l = 0; l < n_layers; ++l) {
        Layer layer;
        layer.w = Matrix(static_cast<int>(fan_in), static_cast<int>(widths[l]));
        for (double& x : layer.w.data()) x = get_f64(in, "weight");
        layer.b = Matrix(1, static_cast<int>(widths[l]));
        for (double& x : layer.b.data()) x = get_f64(in, "bias");
        layer.act = acts[l];
        net.layers.push_back(std::move(layer));
        fan_in = widths[l];
    }
    return net;
}

void save_network_file(const Network& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write checkpoint: " + path);
    save_network(net, out);
    if (!out) throw InputError("write failed: " + path);
}

Network load_network_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open checkpoint: " + path);
    return load_network(in);
}

void Tape::check(NodeId id) const {
    if (id < 0 || static_cast<size_t>(id) >= nodes_.size())
        throw InputError("tape node id out of range");
}

NodeId Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::leaf(Matrix v, bool needs_grad) {
    Node n;
    n.op = Op::Leaf;
    n.needs_grad = needs_grad;
    n.val = std::move(v);
    return push(std::move(n));
}

namespace {

[[noreturn]] void shape_error(const char* op) {
    throw InputError(std::string("shape mismatch in tape op ") + op);
}

} // namespace

NodeId Tape::add(NodeId a, NodeId b) {
    check(a);
    check(b);
    if (!nodes_[a].val.same_shape(nodes_[b].val)) shape_error("add");
    Node n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
    n.val = nodes_[a].val;
    auto va = n.val.data();
    auto vb = nodes_[b].val.data();
    for (size_t i = 0; i < va.size(); ++i) va[i] += vb[i];
    return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
    check(a);
    check(b);
    if (!nodes_[a].val.same_shape(nodes_[b].val)) shape_error("sub");
    Node n;
    n.op = Op::Sub;
    n.a = a;
    n.b = b;
    n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
    n.val = nodes_[a].val;
    auto va = n.val.data();
    auto vb = nodes_[b].val.data();
    for (size_t i = 0; i < va.size(); ++i) va[i] -= vb[i];
    return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
    check(a);
    check(b);
    if (!nodes_[a].val.same_shape(nodes_[b].val)) shape_error("mul");
    Node n;
    n.op = Op::Mul;
    n.a = a;
    n.b = b;
    n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
    n.val = nodes_[a].val;
    auto va = n.val.data();
    auto vb = nodes_[b].val.data();
    for (size_t i = 0; i < va.size(); ++i) va[i] *= vb[i];
    return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double c) {
    check(a);
    Node n;
    n.op = Op::Scale;
    n.a = a;
    n.p0 = c;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = nodes_[a].val;
    for (double& x : n.val.data()) x *= c;
    return push(std::move(n));
}

NodeId Tape::add_scalar(NodeId a, double c) {
    check(a);
    Node n;
    n.op = Op::AddScalar;
    n.a = a;
    n.p0 = c;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = nodes_[a].val;
    for (double& x : n.val.data()) x += c;
    return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b, bool trans_a, bool trans_b) {
    check(a);
    check(b);
    Node n;
    n.op = Op::Matmul;
    n.a = a;
    n.b = b;
    n.i0 = trans_a;
    n.i1 = trans_b;
    n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
    n.val = topogen::matmul(nodes_[a].val, nodes_[b].val, trans_a, trans_b);
    return push(std::move(n));
}

namespace {

template <class F> Node unary_node(Op op, NodeId a, const Node& in, F f) {
    Node n;
    n.op = op;
    n.a = a;
    n.needs_grad = in.needs_grad;
    n.val = in.val;
    for (double& x : n.val.data()) x = f(x);
    return n;
}

} // namespace

NodeId Tape::relu(NodeId a) {
    check(a);
    return push(unary_node(Op::Relu, a, nodes_[a], [](double x) { return x > 0.0 ? x : 0.0; }));
}

NodeId Tape::tanh(NodeId a) {
    check(a);
    return push(unary_node(Op::TanhOp, a, nodes_[a], [](double x) { return std::tanh(x); }));
}

NodeId Tape::sigmoid(NodeId a) {
    check(a);
    return push(unary_node(Op::SigmoidOp, a, nodes_[a],
                           [](double x) { return 1.0 / (1.0 + std::exp(-x)); }));
}

NodeId Tape::exp(NodeId a) {
    check(a);
    return push(unary_node(Op::ExpOp, a, nodes_[a], [](double x) { return std::exp(x); }));
}

NodeId Tape::sqrt(NodeId a) {
    check(a);
    return push(unary_node(Op::SqrtOp, a, nodes_[a], [](double x) { return std::sqrt(x); }));
}

NodeId Tape::square(NodeId a) {
    check(a);
    return push(unary_node(Op::Square, a, nodes_[a], [](double x) { return x * x; }));
}

NodeId Tape::recip(NodeId a) {
    check(a);
    return push(unary_node(Op::Recip, a, nodes_[a], [](double x) { return 1.0 / x; }));
}

NodeId Tape::sum(NodeId a) {
    check(a);
    Node n;
    n.op = Op::Sum;
    n.a = a;
    n.needs_grad = nodes_[a].needs_grad;
    double s = 0.0;
    for (double x : nodes_[a].val.data()) s += x;
    n.val = Matrix(1, 1, s);
    return push(std::move(n));
}

NodeId Tape::row_sum(NodeId a) {
    check(a);
    const Matrix& v = nodes_[a].val;
    Node n;
    n.op = Op::RowSum;
    n.a = a;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = Matrix(v.rows(), 1);
    for (int i = 0; i < v.rows(); ++i) {
        double s = 0.0;
        for (int j = 0; j < v.cols(); ++j) s += v(i, j);
        n.val(i, 0) = s;
    }
    return push(std::move(n));
}

NodeId Tape::col_sum(NodeId a) {
    check(a);
    const Matrix& v = nodes_[a].val;
    Node n;
    n.op = Op::ColSum;
    n.a = a;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = Matrix(1, v.cols());
    for (int i = 0; i < v.rows(); ++i)
        for (int j = 0; j < v.cols(); ++j) n.val(0, j) += v(i, j);
    return push(std::move(n));
}

NodeId Tape::repeat_rows(NodeId a, int count) {
    check(a);
    const Matrix& v = nodes_[a].val;
    if (v.rows() != 1 || count < 1) shape_error("repeat_rows");
    Node n;
    n.op = Op::RepeatRows;
    n.a = a;
    n.i0 = count;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = Matrix(count, v.cols());
    for (int i = 0; i < count; ++i)
        for (int j = 0; j < v.cols(); ++j) n.val(i, j) = v(0, j);
    return push(std::move(n));
}

NodeId Tape::repeat_cols(NodeId a, int count) {
    check(a);
    const Matrix& v = nodes_[a].val;
    if (v.cols() != 1 || count < 1) shape_error("repeat_cols");
    Node n;
    n.op = Op::RepeatCols;
    n.a = a;
    n.i0 = count;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = Matrix(v.rows(), count);
    for (int i = 0; i < v.rows(); ++i)
        for (int j = 0; j < count; ++j) n.val(i, j) = v(i, 0);
    return push(std::move(n));
}

NodeId Tape::transpose(NodeId a) {
    check(a);
    Node n;
    n.op = Op::TransposeOp;
    n.a = a;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = transposed(nodes_[a].val);
    return push(std::move(n));
}

NodeId Tape::slice_cols(NodeId a, int c0, int c1) {
    check(a);
    const Matrix& v = nodes_[a].val;
    if (c0 < 0 || c1 <= c0 || c1 > v.cols()) shape_error("slice_cols");
    Node n;
    n.op = Op::SliceCols;
    n.a = a;
    n.i0 = c0;
    n.i1 = c1;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = Matrix(v.rows(), c1 - c0);
    for (int i = 0; i < v.rows(); ++i)
        for (int j = c0; j < c1; ++j) n.val(i, j - c0) = v(i, j);
    return push(std::move(n));
}

NodeId Tape::pad_cols(NodeId a, int c0, int total) {
    check(a);
    const Matrix& v = nodes_[a].val;
    if (c0 < 0 || c0 + v.cols() > total) shape_error("pad_cols");
    Node n;
    n.op = Op::PadCols;
    n.a = a;
    n.i0 = c0;
    n.i1 = total;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = Matrix(v.rows(), total);
    for (int i = 0; i < v.rows(); ++i)
        for (int j = 0; j < v.cols(); ++j) n.val(i, c0 + j) = v(i, j);
    return push(std::move(n));
}

NodeId Tape::clamp(NodeId a, double lo, double hi) {
    check(a);
    if (!(lo <= hi)) throw InputError("clamp bounds out of order");
    Node n;
    n.op = Op::Clamp;
    n.a = a;
    n.p0 = lo;
    n.p1 = hi;
    n.needs_grad = nodes_[a].needs_grad;
    n.val = nodes_[a].val;
    for (double& x : n.val.data()) x = x < lo ? lo : (x > hi ? hi : x);
    return push(std::move(n));
}

NodeId Tape::mean(NodeId a) {
    check(a);
    size_t count = nodes_[a].val.size();
    if (count == 0) shape_error("mean");
    return scale(sum(a), 1.0 / static_cast<double>(count));
}

std::vector<NodeId> Tape::backward(NodeId loss, const std::vector<NodeId>& targets) {
    check(loss);
    for (NodeId t : targets) check(t);
    if (nodes_[loss].val.rows() != 1 || nodes_[loss].val.cols() != 1)
        throw InputError("backward needs a scalar (1x1) loss");

    std::vector<NodeId> adj(static_cast<size_t>(loss) + 1, -1);
    adj[loss] = leaf(Matrix(1, 1, 1.0));

    auto accum = [&](NodeId target, NodeId contribution) {
        if (!nodes_[target].needs_grad) return;
        adj[target] = adj[target] < 0 ? contribution : add(adj[target], contribution);
    };

    for (NodeId i = loss; i >= 0; --i) {
        if (adj[i] < 0 || !nodes_[i].needs_grad) continue;
        // emitting adjoint nodes below may reallocate nodes_, so no
        // reference into it can be held across an emission; copy the
        // scalar fields up front and re-index for anything else
        const Op op = nodes_[i].op;
        const NodeId a = nodes_[i].a;
        const NodeId b = nodes_[i].b;
        const double p0 = nodes_[i].p0;
        const double p1 = nodes_[i].p1;
        const int32_t i0 = nodes_[i].i0;
        const int32_t i1 = nodes_[i].i1;
        NodeId g = adj[i];
        switch (op) {
        case Op::Leaf:
            break;
        case Op::Add:
            accum(a, g);
            accum(b, g);
            break;
        case Op::Sub:
            accum(a, g);
            accum(b, scale(g, -1.0));
            break;
        case Op::Mul:
            accum(a, mul(g, b));
            accum(b, mul(g, a));
            break;
        case Op::Scale:
            accum(a, scale(g, p0));
            break;
        case Op::AddScalar:
            accum(a, g);
            break;
        case Op::Matmul: {
            bool ta = i0, tb = i1;
            if (!ta && !tb) {
                accum(a, matmul(g, b, false, true));
                accum(b, matmul(a, g, true, false));
            } else if (ta) {
                accum(a, matmul(b, g, false, true));
                accum(b, matmul(a, g, false, false));
            } else {
                accum(a, matmul(g, b, false, false));
                accum(b, matmul(g, a, true, false));
            }
            break;
        }
        case Op::Relu: {
            Matrix mask = nodes_[a].val;
            for (double& x : mask.data()) x = x > 0.0 ? 1.0 : 0.0;
            accum(a, mul(g, leaf(std::move(mask))));
            break;
        }
        case Op::TanhOp:
            accum(a, mul(g, add_scalar(scale(square(i), -1.0), 1.0)));
            break;
        case Op::SigmoidOp:
            accum(a, mul(g, mul(i, add_scalar(scale(i, -1.0), 1.0))));
            break;
        case Op::ExpOp:
            accum(a, mul(g, i));
            break;
        case Op::SqrtOp:
            accum(a, mul(g, scale(recip(i), 0.5)));
            break;
        case Op::Square:
            accum(a, mul(g, scale(a, 2.0)));
            break;
        case Op::Recip:
            accum(a, scale(mul(g, square(i)), -1.0));
            break;
        case Op::Sum: {
            int rows = nodes_[a].val.rows();
            int cols = nodes_[a].val.cols();
            accum(a, repeat_rows(repeat_cols(g, cols), rows));
            break;
        }
        case Op::RowSum:
            accum(a, repeat_cols(g, nodes_[a].val.cols()));
            break;
        case Op::ColSum:
            accum(a, repeat_rows(g, nodes_[a].val.rows()));
            break;
        case Op::RepeatRows:
            accum(a, col_sum(g));
            break;
        case Op::RepeatCols:
            accum(a, row_sum(g));
            break;
        case Op::TransposeOp:
            accum(a, transpose(g));
            break;
        case Op::SliceCols:
            accum(a, pad_cols(g, i0, nodes_[a].val.cols()));
            break;
        case Op::PadCols:
            accum(a, slice_cols(g, i0, i0 + nodes_[a].val.cols()));
            break;
        case Op::Clamp: {
            Matrix mask = nodes_[a].val;
            for (double& x : mask.data()) x = (x > p0 && x < p1) ? 1.0 : 0.0;
            accum(a, mul(g, leaf(std::move(mask))));
            break;
        }
        }
    }

    std::vector<NodeId> out;
    out.reserve(targets.size());
    for (NodeId t : targets) {
        if (t <= loss && adj[t] >= 0)
            out.push_back(adj[t]);
        else
            out.push_back(leaf(Matrix(nodes_[t].val.rows(), nodes_[t].val.cols())));
    }
    return out;
}

TapedNet place_params(Tape& t, const Network& net, bool needs_grad) {
    TapedNet tn;
    tn.net = &net;
    for (const Layer& l : net.layers) {
        tn.params.push_back(t.leaf(l.w, needs_grad));
        tn.params.push_back(t.leaf(l.b, needs_grad));
    }
    return tn;
}

NodeId net_forward(Tape& t, const TapedNet& tn, NodeId x) {
    const Network& net = *tn.net;
    if (t.value(x).cols() != net.input_dim)
        throw InputError("network expects width " + std::to_string(net.input_dim) + ", got " +
                         std::to_string(t.value(x).cols()));
    int n = t.value(x).rows();
    NodeId h = x;
    for (size_t l = 0; l < net.layers.size(); ++l) {
        h = t.add(t.matmul(h, tn.params[2 * l]), t.repeat_rows(tn.params[2 * l + 1], n));
        switch (net.layers[l].act) {
        case Act::Identity: break;
        case Act::Relu: h = t.relu(h); break;
        case Act::Tanh: h = t.tanh(h); break;
        case Act::Sigmoid: h = t.sigmoid(h); break;
        }
    }
    return h;
}

std::vector<Matrix> read_grads(Tape& t, NodeId loss, const TapedNet& tn) {
    std::vector<NodeId> ids = t.backward(loss, tn.params);
    std::vector<Matrix> out;
    out.reserve(ids.size());
    for (NodeId id : ids) out.push_back(t.value(id));
    return out;
}

PenaltyResult grad_of_gradient_penalty(const Network& net, const Matrix& x_hat, double lambda) {
    if (x_hat.rows() < 1) throw InputError("gradient penalty needs a nonempty batch");
    if (net.output_dim() != 1)
        throw InputError("gradient penalty needs a scalar-output network");

    Tape t;
    TapedNet tn = place_params(t, net, true);
    NodeId xh = t.leaf(x_hat, true);
    NodeId out = net_forward(t, tn, xh);
    NodeId total = t.sum(out); // rows are independent, so d total / d x_hat stacks the per-row gradients
    NodeId g = t.backward(total, {xh})[0];
    NodeId norm = t.sqrt(t.add_scalar(t.row_sum(t.square(g)), 1e-12));
    NodeId pen = t.scale(t.mean(t.square(t.add_scalar(norm, -1.0))), lambda);

    PenaltyResult res;
    res.value = t.value(pen)(0, 0);
    res.grads = read_grads(t, pen, tn);
    return res;
}

void rmsprop_step(Matrix& param, const Matrix& grad, Matrix& state, double lr, double rho,
                  double eps) {
    if (!param.same_shape(grad) || !param.same_shape(state))
        throw InputError("rmsprop shapes disagree");
    auto p = param.data();
    auto g = grad.data();
    auto v = state.data();
    for (size_t i = 0; i < p.size(); ++i) {
        v[i] = rho * v[i] + (1.0 - rho) * g[i] * g[i];
        p[i] -= lr * g[i] / std::sqrt(v[i] + eps);
    }
}

RmspropState make_rmsprop_state(const Network& net) {
    RmspropState st;
    for (const Layer& l : net.layers) {
        st.v.push_back(Matrix(l.w.rows(), l.w.cols()));
        st.v.push_back(Matrix(1, l.b.cols()));
    }
    return st;
}

void rmsprop_step(Network& net, const std::vector<Matrix>& grads, RmspropState& st, double lr,
                  double rho, double eps) {
    if (grads.size() != 2 * net.layers.size() || st.v.size() != grads.size())
        throw InputError("rmsprop gradient list does not match the network");
    for (size_t l = 0; l < net.layers.size(); ++l) {
        rmsprop_step(net.layers[l].w, grads[2 * l], st.v[2 * l], lr, rho, eps);
        rmsprop_step(net.layers[l].b, grads[2 * l + 1], st.v[2 * l + 1], lr, rho, eps);
    }
}

} // namespace topogen
