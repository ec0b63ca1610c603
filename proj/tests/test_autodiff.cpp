#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "testutil.hpp"
#include "topogen/autodiff.hpp"
#include "topogen/error.hpp"

using namespace topogen;
using namespace testutil;

namespace {

Matrix mat(int r, int c, std::vector<double> v) { return Matrix(r, c, std::move(v)); }

// distinct mixed-sign entries, none zero
Matrix ramp(int r, int c) {
    Matrix m(r, c);
    int k = 0;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = 0.23 * k++ - 0.5;
    return m;
}

using LossBuilder = std::function<NodeId(Tape&, NodeId)>;

double eval_loss(const Matrix& x0, const LossBuilder& build) {
    Tape t;
    NodeId loss = build(t, t.leaf(x0, true));
    return t.value(loss)(0, 0);
}

// max relative error of the tape gradient against central differences
double fd_max_err(const Matrix& x0, const LossBuilder& build, double h = 1e-5) {
    Tape t;
    NodeId x = t.leaf(x0, true);
    NodeId loss = build(t, x);
    NodeId g = t.backward(loss, {x})[0];
    const Matrix& grad = t.value(g);
    REQUIRE(grad.rows() == x0.rows());
    REQUIRE(grad.cols() == x0.cols());
    double worst = 0.0;
    for (int r = 0; r < x0.rows(); ++r)
        for (int c = 0; c < x0.cols(); ++c) {
            Matrix xp = x0, xm = x0;
            xp(r, c) += h;
            xm(r, c) -= h;
            double num = (eval_loss(xp, build) - eval_loss(xm, build)) / (2 * h);
            worst = std::max(worst, rel_err(grad(r, c), num));
        }
    return worst;
}

// sum(y .* W) turns any intermediate into a scalar loss with a
// nonuniform adjoint, so the op's transposed Jacobian is exercised on
// an arbitrary seed, not just ones.
NodeId weighted(Tape& t, NodeId y, const Matrix& w) { return t.sum(t.mul(y, t.leaf(w))); }

} // namespace

TEST_CASE("network construction shapes and bounds") {
    Rng rng(7);
    Network net = make_network(3, {4, 2}, {Act::Relu, Act::Identity}, rng);
    CHECK(net.input_dim == 3);
    REQUIRE(net.layers.size() == 2);
    CHECK(net.layers[0].w.rows() == 3);
    CHECK(net.layers[0].w.cols() == 4);
    CHECK(net.layers[0].b.rows() == 1);
    CHECK(net.layers[0].b.cols() == 4);
    CHECK(net.layers[1].w.rows() == 4);
    CHECK(net.layers[1].w.cols() == 2);
    CHECK(net.output_dim() == 2);
    CHECK(net.param_count() == 26);

    double bound = std::sqrt(6.0 / (3 + 4));
    for (double v : net.layers[0].w.data()) CHECK(std::abs(v) <= bound);
    for (double v : net.layers[0].b.data()) CHECK(v == 0.0);
    for (double v : net.layers[1].b.data()) CHECK(v == 0.0);

    CHECK_THROWS_AS(make_network(0, {1}, {Act::Identity}, rng), InputError);
    CHECK_THROWS_AS(make_network(2, {1}, {}, rng), InputError);
    CHECK_THROWS_AS(make_network(2, {0}, {Act::Identity}, rng), InputError);
}

TEST_CASE("plain forward pass fixtures") {
    Network net;
    net.input_dim = 2;
    Layer l;
    l.w = mat(2, 1, {2, 3});
    l.b = mat(1, 1, {1});
    l.act = Act::Identity;
    net.layers.push_back(l);

    Matrix x = mat(2, 2, {1, 1, 0.5, -1});
    Matrix y = net_apply(net, x);
    CHECK(y(0, 0) == 6.0);
    CHECK(y(1, 0) == -1.0);

    net.layers[0].act = Act::Relu;
    y = net_apply(net, x);
    CHECK(y(0, 0) == 6.0);
    CHECK(y(1, 0) == 0.0);

    net.layers[0].act = Act::Tanh;
    y = net_apply(net, x);
    CHECK(y(0, 0) == doctest::Approx(std::tanh(6.0)).epsilon(1e-15));

    net.layers[0].act = Act::Sigmoid;
    y = net_apply(net, x);
    CHECK(y(1, 0) == doctest::Approx(1.0 / (1.0 + std::exp(1.0))).epsilon(1e-15));

    CHECK_THROWS_AS(net_apply(net, mat(1, 3, {1, 2, 3})), InputError);
}

TEST_CASE("tape forward values") {
    Tape t;
    NodeId a = t.leaf(mat(2, 2, {1, 2, 3, 4}));
    NodeId b = t.leaf(mat(2, 2, {5, 6, 7, 8}));

    CHECK(t.value(t.add(a, b)) == mat(2, 2, {6, 8, 10, 12}));
    CHECK(t.value(t.sub(a, b)) == mat(2, 2, {-4, -4, -4, -4}));
    CHECK(t.value(t.mul(a, b)) == mat(2, 2, {5, 12, 21, 32}));
    CHECK(t.value(t.scale(a, 2.0)) == mat(2, 2, {2, 4, 6, 8}));
    CHECK(t.value(t.add_scalar(a, 1.0)) == mat(2, 2, {2, 3, 4, 5}));
    CHECK(t.value(t.matmul(a, b)) == mat(2, 2, {19, 22, 43, 50}));
    CHECK(t.value(t.matmul(a, b, true, false)) == mat(2, 2, {26, 30, 38, 44}));
    CHECK(t.value(t.matmul(a, b, false, true)) == mat(2, 2, {17, 23, 39, 53}));

    NodeId m = t.leaf(mat(1, 4, {-1, 0, 2, -3}));
    CHECK(t.value(t.relu(m)) == mat(1, 4, {0, 0, 2, 0}));
    CHECK(t.value(t.square(m)) == mat(1, 4, {1, 0, 4, 9}));
    CHECK(t.value(t.clamp(m, -0.5, 1.5)) == mat(1, 4, {-0.5, 0, 1.5, -0.5}));

    NodeId pos = t.leaf(mat(1, 3, {1, 4, 9}));
    CHECK(t.value(t.sqrt(pos)) == mat(1, 3, {1, 2, 3}));
    CHECK(t.value(t.recip(pos)) == mat(1, 3, {1, 0.25, 1.0 / 9}));
    CHECK(t.value(t.exp(t.leaf(mat(1, 2, {0, 1})))) == mat(1, 2, {1, std::exp(1.0)}));
    CHECK(t.value(t.tanh(t.leaf(mat(1, 1, {0.7}))))(0, 0) ==
          doctest::Approx(std::tanh(0.7)).epsilon(1e-15));
    CHECK(t.value(t.sigmoid(t.leaf(mat(1, 1, {0.7}))))(0, 0) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-0.7))).epsilon(1e-15));

    CHECK(t.value(t.sum(a)) == mat(1, 1, {10}));
    CHECK(t.value(t.mean(a)) == mat(1, 1, {2.5}));
    CHECK(t.value(t.row_sum(a)) == mat(2, 1, {3, 7}));
    CHECK(t.value(t.col_sum(a)) == mat(1, 2, {4, 6}));
    CHECK(t.value(t.repeat_rows(t.leaf(mat(1, 2, {1, 2})), 3)) == mat(3, 2, {1, 2, 1, 2, 1, 2}));
    CHECK(t.value(t.repeat_cols(t.leaf(mat(2, 1, {1, 2})), 3)) == mat(2, 3, {1, 1, 1, 2, 2, 2}));
    CHECK(t.value(t.transpose(a)) == mat(2, 2, {1, 3, 2, 4}));

    NodeId w = t.leaf(mat(2, 3, {1, 2, 3, 4, 5, 6}));
    CHECK(t.value(t.slice_cols(w, 1, 3)) == mat(2, 2, {2, 3, 5, 6}));
    CHECK(t.value(t.pad_cols(t.leaf(mat(2, 1, {7, 8})), 1, 3)) == mat(2, 3, {0, 7, 0, 0, 8, 0}));
}

TEST_CASE("exact gradients for linear expressions") {
    Matrix xv = mat(2, 3, {1, -2, 3, 0.5, 4, -1});

    Tape t;
    NodeId w = t.leaf(mat(2, 3, {1, 1, 1, 1, 1, 1}), true);
    NodeId loss = t.sum(t.mul(w, t.leaf(xv)));
    CHECK(t.value(t.backward(loss, {w})[0]) == xv);

    Tape t2;
    NodeId x = t2.leaf(xv, true);
    CHECK(t2.value(t2.backward(t2.sum(t2.scale(x, 2.5)), {x})[0]) == mat(2, 3, std::vector<double>(6, 2.5)));

    Tape t3;
    NodeId x3 = t3.leaf(xv, true);
    NodeId l3 = t3.sum(t3.sub(t3.leaf(ramp(2, 3)), x3));
    CHECK(t3.value(t3.backward(l3, {x3})[0]) == mat(2, 3, std::vector<double>(6, -1.0)));

    // slicing routes the adjoint back into the kept columns only
    Tape t4;
    NodeId x4 = t4.leaf(xv, true);
    NodeId l4 = t4.sum(t4.slice_cols(x4, 1, 3));
    CHECK(t4.value(t4.backward(l4, {x4})[0]) == mat(2, 3, {0, 1, 1, 0, 1, 1}));
}

TEST_CASE("finite differences agree with the tape for every op") {
    const Matrix gen = mat(2, 3, {0.5, -1.2, 2.0, 1.5, -0.3, 0.8});
    const Matrix pos = mat(2, 3, {0.5, 1.2, 2.0, 1.5, 0.3, 0.8});
    const Matrix b23 = ramp(2, 3);

    struct Case {
        const char* name;
        Matrix x0;
        LossBuilder build;
    };

    std::vector<Case> cases;
    cases.push_back({"add", gen, [&](Tape& t, NodeId x) { return weighted(t, t.add(x, t.leaf(b23)), ramp(2, 3)); }});
    cases.push_back({"sub lhs", gen, [&](Tape& t, NodeId x) { return weighted(t, t.sub(x, t.leaf(b23)), ramp(2, 3)); }});
    cases.push_back({"sub rhs", gen, [&](Tape& t, NodeId x) { return weighted(t, t.sub(t.leaf(b23), x), ramp(2, 3)); }});
    cases.push_back({"mul", gen, [&](Tape& t, NodeId x) { return weighted(t, t.mul(x, t.leaf(b23)), ramp(2, 3)); }});
    cases.push_back({"mul rhs", gen, [&](Tape& t, NodeId x) { return weighted(t, t.mul(t.leaf(b23), x), ramp(2, 3)); }});
    cases.push_back({"scale", gen, [&](Tape& t, NodeId x) { return weighted(t, t.scale(x, -1.7), ramp(2, 3)); }});
    cases.push_back({"add_scalar", gen, [&](Tape& t, NodeId x) { return weighted(t, t.add_scalar(x, 0.4), ramp(2, 3)); }});
    cases.push_back({"matmul nn lhs", gen, [&](Tape& t, NodeId x) {
                         return weighted(t, t.matmul(x, t.leaf(ramp(3, 2))), ramp(2, 2));
                     }});
    cases.push_back({"matmul nn rhs", ramp(3, 2), [&](Tape& t, NodeId x) {
                         return weighted(t, t.matmul(t.leaf(gen), x), ramp(2, 2));
                     }});
    cases.push_back({"matmul tn", gen, [&](Tape& t, NodeId x) {
                         return weighted(t, t.matmul(x, t.leaf(ramp(2, 4)), true, false), ramp(3, 4));
                     }});
    cases.push_back({"matmul tn rhs", ramp(2, 4), [&](Tape& t, NodeId x) {
                         return weighted(t, t.matmul(t.leaf(gen), x, true, false), ramp(3, 4));
                     }});
    cases.push_back({"matmul nt", gen, [&](Tape& t, NodeId x) {
                         return weighted(t, t.matmul(x, t.leaf(ramp(4, 3)), false, true), ramp(2, 4));
                     }});
    cases.push_back({"matmul nt rhs", ramp(4, 3), [&](Tape& t, NodeId x) {
                         return weighted(t, t.matmul(t.leaf(gen), x, false, true), ramp(2, 4));
                     }});
    cases.push_back({"relu", gen, [&](Tape& t, NodeId x) { return weighted(t, t.relu(x), ramp(2, 3)); }});
    cases.push_back({"tanh", gen, [&](Tape& t, NodeId x) { return weighted(t, t.tanh(x), ramp(2, 3)); }});
    cases.push_back({"sigmoid", gen, [&](Tape& t, NodeId x) { return weighted(t, t.sigmoid(x), ramp(2, 3)); }});
    cases.push_back({"exp", gen, [&](Tape& t, NodeId x) { return weighted(t, t.exp(x), ramp(2, 3)); }});
    cases.push_back({"sqrt", pos, [&](Tape& t, NodeId x) { return weighted(t, t.sqrt(x), ramp(2, 3)); }});
    cases.push_back({"square", gen, [&](Tape& t, NodeId x) { return weighted(t, t.square(x), ramp(2, 3)); }});
    cases.push_back({"recip", pos, [&](Tape& t, NodeId x) { return weighted(t, t.recip(x), ramp(2, 3)); }});
    cases.push_back({"sum", gen, [&](Tape& t, NodeId x) { return t.sum(x); }});
    cases.push_back({"mean", gen, [&](Tape& t, NodeId x) { return t.mean(x); }});
    cases.push_back({"row_sum", gen, [&](Tape& t, NodeId x) { return weighted(t, t.row_sum(x), ramp(2, 1)); }});
    cases.push_back({"col_sum", gen, [&](Tape& t, NodeId x) { return weighted(t, t.col_sum(x), ramp(1, 3)); }});
    cases.push_back({"repeat_rows", ramp(1, 3), [&](Tape& t, NodeId x) {
                         return weighted(t, t.repeat_rows(x, 4), ramp(4, 3));
                     }});
    cases.push_back({"repeat_cols", ramp(2, 1), [&](Tape& t, NodeId x) {
                         return weighted(t, t.repeat_cols(x, 3), ramp(2, 3));
                     }});
    cases.push_back({"transpose", gen, [&](Tape& t, NodeId x) { return weighted(t, t.transpose(x), ramp(3, 2)); }});
    cases.push_back({"slice_cols", gen, [&](Tape& t, NodeId x) {
                         return weighted(t, t.slice_cols(x, 1, 3), ramp(2, 2));
                     }});
    cases.push_back({"pad_cols", ramp(2, 2), [&](Tape& t, NodeId x) {
                         return weighted(t, t.pad_cols(x, 1, 4), ramp(2, 4));
                     }});
    // entries sit 0.3 away from both bounds, so the step never crosses a kink
    cases.push_back({"clamp", gen, [&](Tape& t, NodeId x) {
                         return weighted(t, t.clamp(x, -0.9, 1.7), ramp(2, 3));
                     }});
    cases.push_back({"composite mlp", gen, [&](Tape& t, NodeId x) {
                         NodeId h = t.add(t.matmul(x, t.leaf(ramp(3, 2))), t.repeat_rows(t.leaf(ramp(1, 2)), 2));
                         return t.sum(t.square(t.tanh(h)));
                     }});

    for (const Case& c : cases) {
        CAPTURE(c.name);
        CHECK(fd_max_err(c.x0, c.build) <= 1e-6);
    }
}

TEST_CASE("relu gates stay constant through a second backward") {
    Tape t;
    Matrix x0 = mat(1, 4, {-2, -0.5, 0.5, 2});
    NodeId x = t.leaf(x0, true);
    NodeId g = t.backward(t.sum(t.relu(x)), {x})[0];
    CHECK(t.value(g) == mat(1, 4, {0, 0, 1, 1}));

    NodeId gg = t.backward(t.sum(t.square(g)), {x})[0];
    CHECK(t.value(gg) == mat(1, 4, {0, 0, 0, 0}));
}

TEST_CASE("double backward differentiates a gradient") {
    // loss = sum(x^3), so backward gives 3x^2 and a second pass 6x
    Tape t;
    Matrix x0 = mat(1, 3, {0.5, -1.0, 2.0});
    NodeId x = t.leaf(x0, true);
    NodeId g = t.backward(t.sum(t.mul(t.square(x), x)), {x})[0];
    for (int i = 0; i < 3; ++i)
        CHECK(t.value(g)(0, i) == doctest::Approx(3 * x0(0, i) * x0(0, i)).epsilon(1e-14));

    NodeId gg = t.backward(t.sum(g), {x})[0];
    for (int i = 0; i < 3; ++i)
        CHECK(t.value(gg)(0, i) == doctest::Approx(6 * x0(0, i)).epsilon(1e-14));
}

TEST_CASE("independent targets get a zero gradient") {
    Tape t;
    NodeId x = t.leaf(mat(1, 2, {1, 2}), true);
    NodeId y = t.leaf(mat(2, 3, {1, 2, 3, 4, 5, 6}), true);
    auto g = t.backward(t.sum(x), {x, y});
    CHECK(t.value(g[0]) == mat(1, 2, {1, 1}));
    CHECK(t.value(g[1]) == Matrix(2, 3, 0.0));
}

TEST_CASE("tape argument errors") {
    Tape t;
    NodeId a = t.leaf(mat(2, 2, {1, 2, 3, 4}));
    NodeId b = t.leaf(mat(1, 3, {1, 2, 3}));
    CHECK_THROWS_AS(t.add(a, b), InputError);
    CHECK_THROWS_AS(t.mul(a, b), InputError);
    CHECK_THROWS_AS(t.matmul(a, b), InputError);
    CHECK_THROWS_AS(t.matmul(a, a, true, true), InputError);
    CHECK_THROWS_AS(t.clamp(a, 2.0, 1.0), InputError);
    CHECK_THROWS_AS(t.add(a, 99), InputError);
    CHECK_THROWS_AS(t.backward(a, {a}), InputError);
}

TEST_CASE("taped forward matches the plain forward") {
    Rng rng(99);
    Network net = make_network(3, {5, 2}, {Act::Tanh, Act::Identity}, rng);
    Matrix x0(4, 3);
    for (double& v : x0.data()) v = rng.uniform(-2.0, 2.0);

    Tape t;
    TapedNet tn = place_params(t, net);
    NodeId y = net_forward(t, tn, t.leaf(x0));
    CHECK(t.value(y) == net_apply(net, x0));
}

TEST_CASE("parameter gradients of a linear layer are exact") {
    Network net;
    net.input_dim = 2;
    Layer l;
    l.w = mat(2, 2, {0.5, -1, 2, 0.25});
    l.b = mat(1, 2, {0.1, -0.2});
    l.act = Act::Identity;
    net.layers.push_back(l);

    Matrix x0 = mat(3, 2, {1, 2, 3, 4, 5, 6});
    Tape t;
    TapedNet tn = place_params(t, net);
    NodeId loss = t.sum(net_forward(t, tn, t.leaf(x0)));
    auto grads = read_grads(t, loss, tn);
    REQUIRE(grads.size() == 2);
    // d sum / d w(i,j) is the i-th column sum of x, d sum / d b is the row count
    CHECK(grads[0] == mat(2, 2, {9, 9, 12, 12}));
    CHECK(grads[1] == mat(1, 2, {3, 3}));
}

TEST_CASE("parameter gradients of a deep net match finite differences") {
    Rng rng(31);
    Network net = make_network(2, {4, 1}, {Act::Tanh, Act::Identity}, rng);
    Matrix x0(5, 2);
    for (double& v : x0.data()) v = rng.uniform(-1.0, 1.0);

    Tape t;
    TapedNet tn = place_params(t, net);
    NodeId loss = t.sum(net_forward(t, tn, t.leaf(x0)));
    auto grads = read_grads(t, loss, tn);

    auto loss_of = [&](const Network& n) {
        Matrix y = net_apply(n, x0);
        double s = 0;
        for (double v : y.data()) s += v;
        return s;
    };

    double h = 1e-5, worst = 0.0;
    for (size_t l = 0; l < net.layers.size(); ++l) {
        for (Matrix Layer::* field : {&Layer::w, &Layer::b}) {
            size_t gi = 2 * l + (field == &Layer::b ? 1 : 0);
            Matrix& ref = net.layers[l].*field;
            for (int r = 0; r < ref.rows(); ++r)
                for (int c = 0; c < ref.cols(); ++c) {
                    Network np = net, nm = net;
                    (np.layers[l].*field)(r, c) += h;
                    (nm.layers[l].*field)(r, c) -= h;
                    double num = (loss_of(np) - loss_of(nm)) / (2 * h);
                    worst = std::max(worst, rel_err(grads[gi](r, c), num));
                }
        }
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("gradient penalty closed form for a linear critic") {
    Network lin;
    lin.input_dim = 2;
    Layer l;
    l.w = mat(2, 1, {3, 4});
    l.b = mat(1, 1, {0});
    l.act = Act::Identity;
    lin.layers.push_back(l);

    Matrix xh = mat(3, 2, {0.1, 0.2, -1, 5, 2, 2});
    PenaltyResult p = grad_of_gradient_penalty(lin, xh, 10.0);
    // the input gradient is w on every row, so the penalty is 10 (||w|| - 1)^2
    CHECK(std::abs(p.value - 160.0) <= 1e-9);
    REQUIRE(p.grads.size() == 2);
    CHECK(p.grads[0](0, 0) == doctest::Approx(48.0).epsilon(1e-9));
    CHECK(p.grads[0](1, 0) == doctest::Approx(64.0).epsilon(1e-9));
    CHECK(std::abs(p.grads[1](0, 0)) <= 1e-12);

    lin.layers[0].w = mat(2, 1, {0.6, 0.8});
    CHECK(grad_of_gradient_penalty(lin, xh, 10.0).value <= 1e-10);
}

TEST_CASE("gradient penalty matches finite differences") {
    Rng rng(3);
    Network net = make_network(2, {3, 1}, {Act::Tanh, Act::Identity}, rng);
    Matrix xh(4, 2);
    for (double& v : xh.data()) v = rng.uniform(-1.0, 1.0);

    PenaltyResult p = grad_of_gradient_penalty(net, xh, 10.0);
    CHECK(p.value >= 0.0);

    double h = 1e-5, worst = 0.0;
    for (size_t l = 0; l < net.layers.size(); ++l) {
        for (Matrix Layer::* field : {&Layer::w, &Layer::b}) {
            size_t gi = 2 * l + (field == &Layer::b ? 1 : 0);
            Matrix& ref = net.layers[l].*field;
            for (int r = 0; r < ref.rows(); ++r)
                for (int c = 0; c < ref.cols(); ++c) {
                    Network np = net, nm = net;
                    (np.layers[l].*field)(r, c) += h;
                    (nm.layers[l].*field)(r, c) -= h;
                    double num = (grad_of_gradient_penalty(np, xh, 10.0).value -
                                  grad_of_gradient_penalty(nm, xh, 10.0).value) /
                                 (2 * h);
                    worst = std::max(worst, rel_err(p.grads[gi](r, c), num));
                }
        }
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("gradient penalty argument errors") {
    Rng rng(5);
    Network wide = make_network(2, {3, 2}, {Act::Tanh, Act::Identity}, rng);
    CHECK_THROWS_AS(grad_of_gradient_penalty(wide, Matrix(3, 2, 0.5), 10.0), InputError);
    Network ok = make_network(2, {3, 1}, {Act::Tanh, Act::Identity}, rng);
    CHECK_THROWS_AS(grad_of_gradient_penalty(ok, Matrix(0, 2), 10.0), InputError);
}

TEST_CASE("rmsprop step fixtures") {
    Matrix p = mat(1, 1, {1.0});
    Matrix g = mat(1, 1, {1.0});
    Matrix v = mat(1, 1, {0.0});
    rmsprop_step(p, g, v, 0.001, 0.9, 1e-6);
    CHECK(v(0, 0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(p(0, 0) == doctest::Approx(1.0 - 0.001 / std::sqrt(0.1 + 1e-6)).epsilon(1e-12));

    rmsprop_step(p, g, v, 0.001, 0.9, 1e-6);
    CHECK(v(0, 0) == doctest::Approx(0.19).epsilon(1e-12));

    // zero gradient leaves the parameter alone and decays the state
    Matrix p2 = mat(1, 1, {0.5});
    Matrix z = mat(1, 1, {0.0});
    Matrix v2 = mat(1, 1, {0.4});
    rmsprop_step(p2, z, v2, 0.001, 0.9, 1e-6);
    CHECK(p2(0, 0) == 0.5);
    CHECK(v2(0, 0) == doctest::Approx(0.36).epsilon(1e-12));

    Matrix bad = mat(1, 2, {1, 1});
    CHECK_THROWS_AS(rmsprop_step(p, bad, v, 0.001, 0.9, 1e-6), InputError);
}

TEST_CASE("network rmsprop matches per-matrix updates") {
    Rng rng(11);
    Network net = make_network(2, {3, 1}, {Act::Relu, Act::Identity}, rng);
    Network copy = net;

    RmspropState st = make_rmsprop_state(net);
    REQUIRE(st.v.size() == 4);
    CHECK(st.v[0].rows() == 2);
    CHECK(st.v[0].cols() == 3);
    CHECK(st.v[3] == Matrix(1, 1, 0.0));

    std::vector<Matrix> grads;
    grads.push_back(ramp(2, 3));
    grads.push_back(ramp(1, 3));
    grads.push_back(ramp(3, 1));
    grads.push_back(ramp(1, 1));

    rmsprop_step(net, grads, st, 0.01, 0.9, 1e-6);

    RmspropState st2 = make_rmsprop_state(copy);
    rmsprop_step(copy.layers[0].w, grads[0], st2.v[0], 0.01, 0.9, 1e-6);
    rmsprop_step(copy.layers[0].b, grads[1], st2.v[1], 0.01, 0.9, 1e-6);
    rmsprop_step(copy.layers[1].w, grads[2], st2.v[2], 0.01, 0.9, 1e-6);
    rmsprop_step(copy.layers[1].b, grads[3], st2.v[3], 0.01, 0.9, 1e-6);

    CHECK(net.layers[0].w == copy.layers[0].w);
    CHECK(net.layers[0].b == copy.layers[0].b);
    CHECK(net.layers[1].w == copy.layers[1].w);
    CHECK(net.layers[1].b == copy.layers[1].b);
    CHECK(st.v[2] == st2.v[2]);

    grads.pop_back();
    CHECK_THROWS_AS(rmsprop_step(net, grads, st, 0.01, 0.9, 1e-6), InputError);
}

TEST_CASE("checkpoint round trip") {
    Rng rng(42);
    Network net = make_network(3, {4, 2}, {Act::Relu, Act::Sigmoid}, rng);

    std::stringstream ss;
    save_network(net, ss);
    Network back = load_network(ss);
    CHECK(back.input_dim == 3);
    REQUIRE(back.layers.size() == 2);
    for (size_t l = 0; l < 2; ++l) {
        CHECK(back.layers[l].w == net.layers[l].w);
        CHECK(back.layers[l].b == net.layers[l].b);
        CHECK(back.layers[l].act == net.layers[l].act);
    }

    auto dir = fresh_dir("ckpt");
    std::string path = (dir / "net.bin").string();
    save_network_file(net, path);
    Network fromfile = load_network_file(path);
    CHECK(fromfile.layers[1].w == net.layers[1].w);
}

TEST_CASE("checkpoint rejects garbage") {
    std::istringstream bad("this is not a checkpoint at all, not even close");
    CHECK_THROWS_WITH_AS(load_network(bad), doctest::Contains("magic"), InputError);

    Rng rng(1);
    Network net = make_network(2, {3}, {Act::Tanh}, rng);
    std::ostringstream os;
    save_network(net, os);
    std::string whole = os.str();
    std::istringstream cut(whole.substr(0, whole.size() / 2));
    CHECK_THROWS_WITH_AS(load_network(cut), doctest::Contains("truncated"), InputError);

    CHECK_THROWS_AS(load_network_file("/nonexistent/netfile.bin"), InputError);
}

TEST_CASE("identical seeds replay identically") {
    auto run = [] {
        Rng rng(2024);
        Network net = make_network(3, {6, 1}, {Act::Relu, Act::Identity}, rng);
        Matrix x0(8, 3);
        for (double& v : x0.data()) v = rng.uniform(-1.0, 1.0);
        Tape t;
        TapedNet tn = place_params(t, net);
        NodeId loss = t.mean(t.square(net_forward(t, tn, t.leaf(x0))));
        return read_grads(t, loss, tn);
    };
    auto a = run();
    auto b = run();
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
