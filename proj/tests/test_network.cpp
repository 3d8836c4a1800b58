#include <doctest.h>

#include <cmath>
#include <limits>

#include "dm/network.hpp"
#include "dm/rng.hpp"

using namespace dm;
using kernels::Matrix;

namespace {

NetworkSpec spec_of(int in, std::vector<int> hidden, ActivationKind act, int out) {
    NetworkSpec s;
    s.input_dim = in;
    s.hidden = std::move(hidden);
    s.activation = act;
    s.output_dim = out;
    return s;
}

Matrix random_batch(std::size_t n, std::size_t dim, Rng& rng) {
    Matrix m(n, dim);
    for (double& v : m.data) v = rng.next_double(-2, 2);
    return m;
}

bool params_equal(const NetworkParams& a, const NetworkParams& b) {
    if (a.weights.size() != b.weights.size()) return false;
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
        if (a.weights[l].data != b.weights[l].data) return false;
        if (a.biases[l] != b.biases[l]) return false;
    }
    return true;
}

// Smallest |pre-activation| across the hidden layers. Finite differences are
// only a valid oracle away from the relu kink, so relu nets get inputs
// redrawn until every hidden pre-activation clears this gap.
double min_hidden_gap(const NetworkParams& params, const Matrix& inputs) {
    BatchTrace trace = forward_batch(params, inputs);
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l + 1 < trace.pre.size(); ++l)
        for (double v : trace.pre[l].data) gap = std::min(gap, std::abs(v));
    return gap;
}

// Central finite differences over every weight and bias.
double max_gradient_mismatch(NetworkParams params, const Matrix& inputs,
                             const std::vector<int>& targets) {
    const double h = 1e-5;
    GradientSet grads = gradients(params, inputs, targets);
    double worst = 0.0;
    auto probe = [&](double& slot, double analytic) {
        double saved = slot;
        slot = saved + h;
        double up = batch_loss(forward_batch(params, inputs).probs(), targets);
        slot = saved - h;
        double down = batch_loss(forward_batch(params, inputs).probs(), targets);
        slot = saved;
        double fd = (up - down) / (2 * h);
        double err = std::abs(analytic - fd);
        if (std::abs(fd) >= 1e-7) err /= std::abs(fd); // relative away from zero
        worst = std::max(worst, err);
    };
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        for (std::size_t i = 0; i < params.weights[l].data.size(); ++i)
            probe(params.weights[l].data[i], grads.weights[l].data[i]);
        for (std::size_t j = 0; j < params.biases[l].size(); ++j)
            probe(params.biases[l][j], grads.biases[l][j]);
    }
    return worst;
}

} // namespace

TEST_SUITE("network") {

TEST_CASE("init: deterministic per seed, shapes, bounds") {
    NetworkSpec s = spec_of(7, {64, 64, 64, 64}, ActivationKind::Tanh, 5);
    NetworkParams a = init_network(s, 42);
    NetworkParams b = init_network(s, 42);
    NetworkParams c = init_network(s, 43);
    CHECK(params_equal(a, b));
    CHECK(!params_equal(a, c));
    REQUIRE(a.weights.size() == 5); // four hidden + softmax output

    std::size_t fan_in = 7;
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
        std::size_t fan_out = a.weights[l].cols;
        double bound = std::sqrt(6.0 / double(fan_in + fan_out));
        for (double w : a.weights[l].data) {
            CHECK(w <= bound);
            CHECK(w >= -bound);
        }
        for (double bias : a.biases[l]) CHECK(bias == 0.0);
        fan_in = fan_out;
    }
}

TEST_CASE("init: no hidden layers means a single matrix") {
    NetworkParams p = init_network(spec_of(4, {}, ActivationKind::Sigmoid, 3), 1);
    REQUIRE(p.weights.size() == 1);
    CHECK(p.weights[0].rows == 4);
    CHECK(p.weights[0].cols == 3);
    CHECK(p.parameter_count() == 4 * 3 + 3);
}

TEST_CASE("forward: zero-weight hidden neurons hit the activation fixed points") {
    NetworkParams sig = init_network(spec_of(3, {1}, ActivationKind::Sigmoid, 2), 0);
    for (auto& w : sig.weights) w.data.assign(w.data.size(), 0.0);
    ForwardTrace t = forward(sig, {0.3, -1.0, 2.0});
    CHECK(t.post[0][0] == 0.5); // sigmoid(0)

    NetworkParams th = init_network(spec_of(3, {1}, ActivationKind::Tanh, 2), 0);
    for (auto& w : th.weights) w.data.assign(w.data.size(), 0.0);
    t = forward(th, {0.3, -1.0, 2.0});
    CHECK(t.post[0][0] == 0.0); // tanh(0)
}

TEST_CASE("forward: equal pre-activations give the uniform distribution") {
    NetworkParams p = init_network(spec_of(2, {}, ActivationKind::Sigmoid, 4), 0);
    for (auto& w : p.weights) w.data.assign(w.data.size(), 0.0);
    ForwardTrace t = forward(p, {1.0, -1.0});
    for (double q : t.probs()) CHECK(q == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("forward rejects bad inputs") {
    NetworkParams p = init_network(spec_of(2, {}, ActivationKind::Sigmoid, 2), 0);
    CHECK_THROWS(forward(p, {1.0}));
    CHECK_THROWS(forward(p, {1.0, std::nan("")}));
}

TEST_CASE("probabilities always sum to one") {
    Rng rng(5);
    NetworkParams p = init_network(spec_of(6, {9}, ActivationKind::Relu, 7), 5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(6);
        for (double& v : x) v = rng.next_double(-5, 5);
        auto probs = forward(p, x).probs();
        double sum = 0;
        for (double q : probs) {
            CHECK(q >= 0.0);
            sum += q;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("loss: perfect, uniform binary, uniform quaternary") {
    CHECK(loss({1.0, 0.0}, 0, 2) == 0.0);
    CHECK(loss({0.5, 0.5}, 0, 2) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(loss({0.25, 0.25, 0.25, 0.25}, 2, 4) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-15));
    CHECK_THROWS(loss({0.5, 0.5}, 2, 2));
}

TEST_CASE("loss: clamp keeps saturated predictions finite") {
    double l = loss({0.0, 1.0}, 0, 2);
    CHECK(std::isfinite(l));
    CHECK(l == doctest::Approx(-std::log(1e-12)).epsilon(1e-12));
}

TEST_CASE("gradients: linear softmax closed form") {
    NetworkParams p = init_network(spec_of(2, {}, ActivationKind::Sigmoid, 2), 0);
    for (auto& w : p.weights) w.data.assign(w.data.size(), 0.0);
    Matrix x(1, 2);
    x.row(0)[0] = 1.0;
    GradientSet g = gradients(p, x, {0});
    CHECK(g.biases[0][0] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(g.biases[0][1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g.weights[0].at(0, 0) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(g.weights[0].at(1, 0) == 0.0); // zero input row contributes nothing
}

TEST_CASE("gradients: duplicating the batch leaves the mean unchanged") {
    Rng rng(8);
    NetworkParams p = init_network(spec_of(4, {6}, ActivationKind::Tanh, 3), 2);
    Matrix x = random_batch(5, 4, rng);
    std::vector<int> t{0, 2, 1, 1, 0};

    Matrix xx(10, 4);
    std::vector<int> tt;
    for (int rep = 0; rep < 2; ++rep)
        for (std::size_t s = 0; s < 5; ++s) {
            for (std::size_t d = 0; d < 4; ++d) xx.at(rep * 5 + s, d) = x.at(s, d);
            tt.push_back(t[s]);
        }

    GradientSet g1 = gradients(p, x, t);
    GradientSet g2 = gradients(p, xx, tt);
    for (std::size_t l = 0; l < g1.weights.size(); ++l)
        for (std::size_t i = 0; i < g1.weights[l].data.size(); ++i)
            CHECK(g1.weights[l].data[i] ==
                  doctest::Approx(g2.weights[l].data[i]).epsilon(1e-12));
}

TEST_CASE("gradients: saturated one-hot output leaves zero gradients") {
    NetworkParams p = init_network(spec_of(1, {}, ActivationKind::Sigmoid, 2), 0);
    p.weights[0].data.assign(2, 0.0);
    p.biases[0] = {1000.0, -1000.0}; // softmax saturates to exactly [1, 0]
    Matrix x(1, 1);
    x.row(0)[0] = 0.0;
    GradientSet g = gradients(p, x, {0});
    for (double v : g.weights[0].data) CHECK(std::abs(v) < 1e-9);
    for (double v : g.biases[0]) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("gradient check: random small networks against finite differences") {
    Rng rng(31);
    const std::vector<std::vector<int>> hiddens = {{}, {5}, {4, 4}, {3, 5, 3}};
    for (ActivationKind act :
         {ActivationKind::Sigmoid, ActivationKind::Tanh, ActivationKind::Relu}) {
        for (const auto& hidden : hiddens) {
            NetworkParams p = init_network(spec_of(4, hidden, act, 3),
                                           rng.next_u64());
            Matrix x = random_batch(4, 4, rng);
            if (act == ActivationKind::Relu) {
                int tries = 0;
                while (min_hidden_gap(p, x) < 5e-3 && ++tries < 500)
                    x = random_batch(4, 4, rng);
                REQUIRE(min_hidden_gap(p, x) >= 5e-3);
            }
            std::vector<int> t;
            for (int s = 0; s < 4; ++s) t.push_back(int(rng.next_below(3)));
            CHECK(max_gradient_mismatch(p, x, t) < 1e-4);
        }
    }
}

TEST_CASE("apply_update: substitution, fixed point, reversibility") {
    NetworkParams p = init_network(spec_of(1, {}, ActivationKind::Sigmoid, 1), 0);
    p.weights[0].data = {1.0};
    p.biases[0] = {0.0};
    GradientSet g;
    g.weights.emplace_back(1, 1);
    g.weights[0].data = {0.5};
    g.biases.push_back({0.0});
    apply_update(p, g, 0.1);
    CHECK(p.weights[0].data[0] == doctest::Approx(0.95).epsilon(1e-15));

    GradientSet zero = g;
    zero.weights[0].data = {0.0};
    NetworkParams before = p;
    apply_update(p, zero, 0.1);
    CHECK(params_equal(p, before));

    GradientSet neg = g;
    neg.weights[0].data = {-0.5};
    apply_update(p, g, 0.1);
    apply_update(p, neg, 0.1);
    CHECK(p.weights[0].data[0] == doctest::Approx(before.weights[0].data[0]).epsilon(1e-12));
}

TEST_CASE("one small step never increases the batch loss") {
    Rng rng(17);
    int worse = 0;
    for (int trial = 0; trial < 120; ++trial) {
        NetworkParams p = init_network(
            spec_of(3, {5}, trial % 2 ? ActivationKind::Tanh : ActivationKind::Sigmoid, 4),
            rng.next_u64());
        Matrix x = random_batch(6, 3, rng);
        std::vector<int> t;
        for (int s = 0; s < 6; ++s) t.push_back(int(rng.next_below(4)));
        double before = batch_loss(forward_batch(p, x).probs(), t);
        apply_update(p, gradients(p, x, t), 1e-3);
        double after = batch_loss(forward_batch(p, x).probs(), t);
        if (after > before + 1e-12) ++worse;
    }
    CHECK(worse == 0);
}

TEST_CASE("argmax breaks ties towards the lowest index") {
    CHECK(argmax_lowest({0.1, 0.7, 0.2}) == 1);
    CHECK(argmax_lowest({0.5, 0.5}) == 0);
    CHECK(argmax_lowest({0.2, 0.4, 0.4}) == 1);

    NetworkParams p = init_network(spec_of(2, {}, ActivationKind::Sigmoid, 3), 0);
    for (auto& w : p.weights) w.data.assign(w.data.size(), 0.0);
    CHECK(predict(p, {1.0, 2.0}).first == 0); // uniform output, tie rule
}

TEST_CASE("prior rescaling: division convention") {
    auto q = rescale_by_priors({0.6, 0.4}, {0.75, 0.25});
    CHECK(q[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(q[1] == doctest::Approx(2.0 / 3).epsilon(1e-12));
}

TEST_CASE("prior rescaling: uniform priors change nothing at all") {
    std::vector<double> p{0.123, 0.456, 0.421};
    auto q = rescale_by_priors(p, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    CHECK(q == p); // exact, not approximate
    CHECK(argmax_lowest(q) == argmax_lowest(p));
}

TEST_CASE("prior rescaling: one-hot support survives, zero priors rejected") {
    auto q = rescale_by_priors({0.0, 1.0, 0.0}, {0.2, 0.3, 0.5});
    CHECK(q == std::vector<double>{0.0, 1.0, 0.0});
    CHECK_THROWS(rescale_by_priors({0.5, 0.5}, {0.0, 1.0}));
}

TEST_CASE("prior rescaling: multiply convention available for comparison") {
    auto q = rescale_by_priors({0.5, 0.5}, {0.8, 0.2}, PriorScaling::Multiply);
    CHECK(q[0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(q[1] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("predict_batch agrees with per-sample predict") {
    Rng rng(23);
    NetworkParams p = init_network(spec_of(5, {8}, ActivationKind::Tanh, 4), 9);
    std::vector<std::vector<double>> inputs;
    for (int s = 0; s < 700; ++s) { // spans several internal chunks
        std::vector<double> x(5);
        for (double& v : x) v = rng.next_double(-2, 2);
        inputs.push_back(x);
    }
    std::vector<int> batched = predict_batch(p, inputs);
    REQUIRE(batched.size() == inputs.size());
    for (std::size_t s = 0; s < inputs.size(); ++s)
        CHECK(batched[s] == predict(p, inputs[s]).first);
}

TEST_CASE("activation names round-trip") {
    CHECK(activation_from_string("sigmoid") == ActivationKind::Sigmoid);
    CHECK(activation_from_string("tanh") == ActivationKind::Tanh);
    CHECK(activation_from_string("relu") == ActivationKind::Relu);
    CHECK(to_string(ActivationKind::Relu) == "relu");
    CHECK_THROWS(activation_from_string("selu"));
}

} // TEST_SUITE
