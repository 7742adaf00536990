#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "cofipara/autodiff.hpp"
#include "cofipara/hash.hpp"

using cofipara::Rng;
using cofipara::ad::Graph;
using cofipara::ad::Mat;
using cofipara::ad::Parameter;
using cofipara::ad::Value;

namespace {

Mat random_mat(Rng& rng, int r, int c, double lo = -1.0, double hi = 1.0) {
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

// Central finite differences of a scalar function of one parameter matrix.
Mat fd_grad(Parameter& p, const std::function<double()>& f, double h = 1e-6) {
    Mat g(p.value.rows(), p.value.cols());
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
        for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
            double keep = p.value(i, j);
            p.value(i, j) = keep + h;
            double up = f();
            p.value(i, j) = keep - h;
            double dn = f();
            p.value(i, j) = keep;
            g(i, j) = (up - dn) / (2.0 * h);
        }
    }
    return g;
}

double max_rel_err(const Mat& a, const Mat& b) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            double denom = std::max({std::abs(a(i, j)), std::abs(b(i, j)), 1e-6});
            worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / denom);
        }
    return worst;
}

// Runs FD-vs-analytic comparison for a scalar-producing graph builder.
void check_op(const std::function<Value(Graph&, Value)>& build, int rows, int cols,
              double lo = -1.0, double hi = 1.0, std::uint64_t seed = 7) {
    Rng rng(seed);
    Parameter p;
    p.name = "x";
    p.value = random_mat(rng, rows, cols, lo, hi);
    p.zero_grad();

    auto eval = [&]() {
        Graph g;
        Value x = g.leaf(p);
        return g.val(build(g, x))(0, 0);
    };

    Graph g;
    Value x = g.leaf(p);
    Value out = build(g, x);
    g.backward(out);

    Mat fd = fd_grad(p, eval);
    CHECK(max_rel_err(p.grad, fd) < 1e-4);
}

}  // namespace

TEST_CASE("matmul gradients match finite differences") {
    Rng rng(11);
    Mat other = random_mat(rng, 4, 3);
    check_op([&](Graph& g, Value x) { return g.mean_all(g.matmul(x, g.constant(other))); }, 5, 4);
    check_op([&](Graph& g, Value x) { return g.mean_all(g.matmul_nt(x, g.constant(other.transpose()))); }, 5, 4);
}

TEST_CASE("elementwise op gradients match finite differences") {
    Rng rng(12);
    Mat other = random_mat(rng, 3, 4, 0.5, 2.0);
    check_op([&](Graph& g, Value x) { return g.mean_all(g.hadamard(x, g.constant(other))); }, 3, 4);
    check_op([&](Graph& g, Value x) { return g.mean_all(g.ediv(x, g.constant(other))); }, 3, 4);
    check_op([&](Graph& g, Value x) { return g.mean_all(g.emax(x, g.constant(other))); }, 3, 4);
    check_op([&](Graph& g, Value x) { return g.mean_all(g.emin(x, g.constant(other))); }, 3, 4);
    check_op([&](Graph& g, Value x) { return g.mean_all(g.eabs(x)); }, 3, 4, 0.2, 1.0);
    check_op([&](Graph& g, Value x) { return g.mean_all(g.scale(g.shift(x, 0.3), -1.7)); }, 3, 4);
    check_op([&](Graph& g, Value x) { return g.mean_all(g.log_(x)); }, 3, 4, 0.5, 2.0);
}

TEST_CASE("activation gradients match finite differences") {
    check_op([](Graph& g, Value x) { return g.mean_all(g.gelu(x)); }, 4, 5, -2.0, 2.0);
    check_op([](Graph& g, Value x) { return g.mean_all(g.sigmoid(x)); }, 4, 5, -2.0, 2.0);
    check_op([](Graph& g, Value x) { return g.mean_all(g.softmax_rows(x)); }, 4, 5);
    check_op([](Graph& g, Value x) { return g.sum_all(g.hadamard(g.log_softmax_rows(x), g.softmax_rows(x))); },
             4, 5);
}

TEST_CASE("softmax rows are stochastic") {
    Rng rng(5);
    Graph g;
    Value x = g.constant(random_mat(rng, 6, 9, -4.0, 4.0));
    Mat s = g.val(g.softmax_rows(x));
    for (Eigen::Index r = 0; r < s.rows(); ++r) CHECK(std::abs(s.row(r).sum() - 1.0) < 1e-12);
}

TEST_CASE("layer norm gradients match finite differences for all three inputs") {
    Rng rng(13);
    Parameter x, gamma, beta;
    x.value = random_mat(rng, 3, 6);
    gamma.value = random_mat(rng, 1, 6, 0.5, 1.5);
    beta.value = random_mat(rng, 1, 6);
    for (Parameter* p : {&x, &gamma, &beta}) p->zero_grad();

    auto eval = [&]() {
        Graph g;
        return g.val(g.mean_all(g.layer_norm_rows(g.leaf(x), g.leaf(gamma), g.leaf(beta))))(0, 0);
    };
    Graph g;
    Value out = g.mean_all(g.layer_norm_rows(g.leaf(x), g.leaf(gamma), g.leaf(beta)));
    g.backward(out);

    CHECK(max_rel_err(x.grad, fd_grad(x, eval)) < 1e-4);
    CHECK(max_rel_err(gamma.grad, fd_grad(gamma, eval)) < 1e-5);
    CHECK(max_rel_err(beta.grad, fd_grad(beta, eval)) < 1e-5);
}

TEST_CASE("structural op gradients match finite differences") {
    check_op([](Graph& g, Value x) { return g.mean_all(g.gather_rows(x, {2, 0, 2})); }, 4, 3);
    check_op([](Graph& g, Value x) { return g.mean_all(g.slice_cols(x, 1, 2)); }, 4, 5);
    check_op([](Graph& g, Value x) {
        return g.mean_all(g.hconcat({g.slice_cols(x, 0, 2), g.slice_cols(x, 2, 3)}));
    }, 4, 5);
    check_op([](Graph& g, Value x) {
        return g.mean_all(g.select_entries(x, {{0, 1}, {2, 2}, {0, 1}}));
    }, 3, 4);
}

TEST_CASE("frozen parameters receive no gradient") {
    Rng rng(19);
    Parameter frozen;
    frozen.trainable = false;
    frozen.value = random_mat(rng, 3, 3);
    frozen.zero_grad();
    Parameter live;
    live.value = random_mat(rng, 3, 3);
    live.zero_grad();

    Graph g;
    Value out = g.mean_all(g.matmul(g.leaf(frozen), g.leaf(live)));
    g.backward(out);
    CHECK(frozen.grad.cwiseAbs().maxCoeff() == 0.0);
    CHECK(live.grad.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("gradients accumulate across backward calls") {
    Parameter p;
    p.value = Mat::Constant(1, 1, 2.0);
    p.zero_grad();
    for (int i = 0; i < 3; ++i) {
        Graph g;
        Value out = g.hadamard(g.leaf(p), g.leaf(p));
        g.backward(g.mean_all(out));
    }
    CHECK(p.grad(0, 0) == doctest::Approx(12.0));  // d(x^2)/dx = 4, three times
}

TEST_CASE("sha256 matches known vectors") {
    CHECK(cofipara::sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(cofipara::sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(cofipara::sha256_hex("The quick brown fox jumps over the lazy dog") ==
          "d7a8fbb307d7809469ca9abcb0082e4f8d5651e46d3cdb762d02d0bf37c9e592");
    // 56-byte input exercises the two-block padding path.
    CHECK(cofipara::sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("fnv1a64 is stable and input sensitive") {
    CHECK(cofipara::fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(cofipara::fnv1a64("a") != cofipara::fnv1a64("b"));
    CHECK(cofipara::fnv1a64("prompt") == cofipara::fnv1a64("prompt"));
}
