#include <doctest.h>

#include <cmath>

#include "dm/kernels.hpp"
#include "dm/rng.hpp"

using namespace dm;
using kernels::Matrix;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double lo = -2, double hi = 2) {
    Matrix m(r, c);
    for (double& v : m.data) v = rng.next_double(lo, hi);
    return m;
}

std::vector<double> random_vec(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.next_double(-2, 2);
    return v;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        if (a.data[i] != b.data[i]) return false;
    return true;
}

// Forces the parallel regions to engage even on tiny shapes.
struct GrainToZero {
    std::size_t saved = kernels::parallel_grain();
    GrainToZero() { kernels::set_parallel_grain(0); }
    ~GrainToZero() { kernels::set_parallel_grain(saved); }
};

} // namespace

TEST_SUITE("kernels") {

TEST_CASE("linear_forward matches a naive triple loop") {
    Rng rng(1);
    Matrix x = random_matrix(3, 4, rng);
    Matrix w = random_matrix(4, 2, rng);
    std::vector<double> b = random_vec(2, rng);
    Matrix y(3, 2);
    kernels::serial::linear_forward(x, w, b, y);
    for (std::size_t s = 0; s < 3; ++s)
        for (std::size_t j = 0; j < 2; ++j) {
            double ref = b[j];
            for (std::size_t i = 0; i < 4; ++i) ref += x.at(s, i) * w.at(i, j);
            CHECK(y.at(s, j) == doctest::Approx(ref).epsilon(1e-14));
        }
}

TEST_CASE("serial and omp paths are bit-identical on random shapes") {
    GrainToZero grain;
    Rng rng(7);
    const std::size_t shapes[][3] = {{1, 1, 1}, {2, 3, 5}, {17, 8, 13},
                                     {64, 50, 29}, {5, 100, 10}};
    for (auto& sh : shapes) {
        std::size_t batch = sh[0], in = sh[1], out = sh[2];
        Matrix x = random_matrix(batch, in, rng);
        Matrix w = random_matrix(in, out, rng);
        std::vector<double> b = random_vec(out, rng);
        Matrix delta = random_matrix(batch, out, rng);

        Matrix ys(batch, out), yo(batch, out);
        kernels::serial::linear_forward(x, w, b, ys);
        kernels::omp::linear_forward(x, w, b, yo);
        CHECK(bitwise_equal(ys, yo));

        Matrix ps(batch, out), po(batch, out);
        kernels::serial::softmax_rows(ys, ps);
        kernels::omp::softmax_rows(yo, po);
        CHECK(bitwise_equal(ps, po));

        for (ActivationKind kind :
             {ActivationKind::Sigmoid, ActivationKind::Tanh, ActivationKind::Relu}) {
            Matrix as(batch, out), ao(batch, out);
            kernels::serial::activation_forward(kind, ys, as);
            kernels::omp::activation_forward(kind, yo, ao);
            CHECK(bitwise_equal(as, ao));

            Matrix ds(batch, out), dmo(batch, out);
            kernels::serial::activation_backward(kind, ys, as, delta, ds);
            kernels::omp::activation_backward(kind, yo, ao, delta, dmo);
            CHECK(bitwise_equal(ds, dmo));
        }

        Matrix gws(in, out), gwo(in, out);
        kernels::serial::grad_weights(x, delta, 1.0 / double(batch), gws);
        kernels::omp::grad_weights(x, delta, 1.0 / double(batch), gwo);
        CHECK(bitwise_equal(gws, gwo));

        std::vector<double> gbs, gbo;
        kernels::serial::grad_bias(delta, 1.0 / double(batch), gbs);
        kernels::omp::grad_bias(delta, 1.0 / double(batch), gbo);
        CHECK(gbs == gbo);

        Matrix dps(batch, in), dpo(batch, in);
        kernels::serial::delta_backward(delta, w, dps);
        kernels::omp::delta_backward(delta, w, dpo);
        CHECK(bitwise_equal(dps, dpo));

        Matrix ws = w, wo = w;
        kernels::serial::descend(ws, gws, 0.1);
        kernels::omp::descend(wo, gwo, 0.1);
        CHECK(bitwise_equal(ws, wo));
    }
}

TEST_CASE("backend dispatch routes to the selected implementation") {
    kernels::Backend saved = kernels::active_backend();
    kernels::set_backend(kernels::Backend::Serial);
    CHECK(kernels::active_backend() == kernels::Backend::Serial);
    kernels::set_backend(kernels::Backend::OpenMP);
    CHECK(kernels::active_backend() == kernels::Backend::OpenMP);

    // same numbers either way
    Rng rng(3);
    Matrix x = random_matrix(4, 6, rng);
    Matrix w = random_matrix(6, 3, rng);
    std::vector<double> b = random_vec(3, rng);
    Matrix y1(4, 3), y2(4, 3);
    kernels::set_backend(kernels::Backend::Serial);
    kernels::linear_forward(x, w, b, y1);
    kernels::set_backend(kernels::Backend::OpenMP);
    kernels::linear_forward(x, w, b, y2);
    CHECK(bitwise_equal(y1, y2));
    kernels::set_backend(saved);
}

TEST_CASE("softmax rows sum to one and stay finite under extreme inputs") {
    Matrix x(3, 4);
    x.row(0)[0] = 1000.0; // would overflow exp without max subtraction
    x.row(1)[1] = -1000.0;
    x.row(2)[2] = 709.0;
    Matrix p(3, 4);
    kernels::serial::softmax_rows(x, p);
    for (std::size_t s = 0; s < 3; ++s) {
        double sum = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(std::isfinite(p.at(s, j)));
            CHECK(p.at(s, j) >= 0.0);
            sum += p.at(s, j);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("activation values and ranges") {
    Matrix pre(1, 3);
    pre.row(0)[0] = 0.0;
    pre.row(0)[1] = -3.5;
    pre.row(0)[2] = 2.0;
    Matrix out(1, 3);

    kernels::serial::activation_forward(ActivationKind::Sigmoid, pre, out);
    CHECK(out.at(0, 0) == 0.5);
    CHECK(out.at(0, 1) > 0.0);
    CHECK(out.at(0, 1) < 1.0);

    kernels::serial::activation_forward(ActivationKind::Tanh, pre, out);
    CHECK(out.at(0, 0) == 0.0);
    CHECK(out.at(0, 2) == doctest::Approx(std::tanh(2.0)).epsilon(1e-15));
    CHECK(out.at(0, 1) > -1.0);
    CHECK(out.at(0, 1) < 1.0);

    kernels::serial::activation_forward(ActivationKind::Relu, pre, out);
    CHECK(out.at(0, 0) == 0.0);
    CHECK(out.at(0, 1) == 0.0);
    CHECK(out.at(0, 2) == 2.0);
}

TEST_CASE("activation derivatives match finite differences") {
    Rng rng(11);
    const double h = 1e-6;
    for (ActivationKind kind :
         {ActivationKind::Sigmoid, ActivationKind::Tanh, ActivationKind::Relu}) {
        Matrix pre = random_matrix(1, 10, rng);
        if (kind == ActivationKind::Relu) // keep away from the kink
            for (double& v : pre.data)
                if (std::abs(v) < 1e-3) v = 0.5;
        Matrix post(1, 10), dout(1, 10, 1.0), dpre(1, 10);
        kernels::serial::activation_forward(kind, pre, post);
        kernels::serial::activation_backward(kind, pre, post, dout, dpre);
        for (std::size_t j = 0; j < 10; ++j) {
            Matrix lo = pre, hi = pre;
            lo.at(0, j) -= h;
            hi.at(0, j) += h;
            Matrix flo(1, 10), fhi(1, 10);
            kernels::serial::activation_forward(kind, lo, flo);
            kernels::serial::activation_forward(kind, hi, fhi);
            double fd = (fhi.at(0, j) - flo.at(0, j)) / (2 * h);
            CHECK(dpre.at(0, j) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("descend applies w -= lr * g elementwise") {
    Matrix w(1, 2);
    w.row(0)[0] = 1.0;
    w.row(0)[1] = -2.0;
    Matrix g(1, 2);
    g.row(0)[0] = 0.5;
    g.row(0)[1] = 0.25;
    kernels::serial::descend(w, g, 0.1);
    CHECK(w.at(0, 0) == doctest::Approx(0.95).epsilon(1e-15));
    CHECK(w.at(0, 1) == doctest::Approx(-2.025).epsilon(1e-15));

    std::vector<double> b{1.0}, gb{1.0};
    kernels::serial::descend(b, gb, 0.5);
    CHECK(b[0] == 0.5);
}

} // TEST_SUITE
