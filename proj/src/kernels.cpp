#include "dm/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace dm::kernels {

namespace {

Backend g_backend = Backend::OpenMP;
std::size_t g_grain = 1u << 15;

double act_apply(ActivationKind kind, double x) {
    switch (kind) {
        case ActivationKind::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case ActivationKind::Tanh: return std::tanh(x);
        case ActivationKind::Relu: return x > 0.0 ? x : 0.0;
    }
    throw std::logic_error("unknown activation");
}

// Derivative in terms of pre-activation x and post-activation y = f(x).
double act_deriv(ActivationKind kind, double x, double y) {
    switch (kind) {
        case ActivationKind::Sigmoid: return y * (1.0 - y);
        case ActivationKind::Tanh: return 1.0 - y * y;
        case ActivationKind::Relu: return x > 0.0 ? 1.0 : 0.0;
    }
    throw std::logic_error("unknown activation");
}

bool over_grain(std::size_t flops) { return flops >= g_grain; }

} // namespace

Backend active_backend() { return g_backend; }
void set_backend(Backend b) { g_backend = b; }
void set_parallel_grain(std::size_t flops) { g_grain = flops; }
std::size_t parallel_grain() { return g_grain; }

namespace serial {

// Accumulates row by row of w so the inner loop is contiguous; per output
// element the addition order (bias, then i ascending) matches the naive form,
// so the result is bit-identical to it.
void linear_forward(const Matrix& x, const Matrix& w, const std::vector<double>& b,
                    Matrix& y) {
    assert(x.cols == w.rows && w.cols == b.size());
    y = Matrix(x.rows, w.cols);
    for (std::size_t s = 0; s < x.rows; ++s) {
        const double* xs = x.row(s);
        double* ys = y.row(s);
        std::copy(b.begin(), b.end(), ys);
        for (std::size_t i = 0; i < x.cols; ++i) {
            const double xi = xs[i];
            const double* wi = w.row(i);
            for (std::size_t j = 0; j < w.cols; ++j)
                ys[j] += xi * wi[j];
        }
    }
}

void activation_forward(ActivationKind kind, const Matrix& pre, Matrix& out) {
    out = Matrix(pre.rows, pre.cols);
    for (std::size_t n = 0; n < pre.data.size(); ++n)
        out.data[n] = act_apply(kind, pre.data[n]);
}

void activation_backward(ActivationKind kind, const Matrix& pre, const Matrix& post,
                         const Matrix& dout, Matrix& dpre) {
    assert(pre.same_shape(post) && pre.same_shape(dout));
    dpre = Matrix(pre.rows, pre.cols);
    for (std::size_t n = 0; n < pre.data.size(); ++n)
        dpre.data[n] = dout.data[n] * act_deriv(kind, pre.data[n], post.data[n]);
}

void softmax_rows(const Matrix& x, Matrix& p) {
    p = Matrix(x.rows, x.cols);
    for (std::size_t s = 0; s < x.rows; ++s) {
        const double* xs = x.row(s);
        double* ps = p.row(s);
        double mx = xs[0];
        for (std::size_t j = 1; j < x.cols; ++j) mx = std::max(mx, xs[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < x.cols; ++j) {
            ps[j] = std::exp(xs[j] - mx);
            sum += ps[j];
        }
        for (std::size_t j = 0; j < x.cols; ++j) ps[j] /= sum;
    }
}

// Sample-major accumulation with contiguous rows; per element the s-ascending
// order matches the naive form bit for bit, with the scale applied last.
void grad_weights(const Matrix& a, const Matrix& delta, double scale, Matrix& gw) {
    assert(a.rows == delta.rows);
    gw = Matrix(a.cols, delta.cols);
    for (std::size_t s = 0; s < a.rows; ++s) {
        const double* as = a.row(s);
        const double* ds = delta.row(s);
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double ai = as[i];
            double* gi = gw.row(i);
            for (std::size_t j = 0; j < delta.cols; ++j)
                gi[j] += ai * ds[j];
        }
    }
    for (double& v : gw.data) v *= scale;
}

void grad_bias(const Matrix& delta, double scale, std::vector<double>& gb) {
    gb.assign(delta.cols, 0.0);
    for (std::size_t j = 0; j < delta.cols; ++j) {
        double acc = 0.0;
        for (std::size_t s = 0; s < delta.rows; ++s)
            acc += delta.at(s, j);
        gb[j] = scale * acc;
    }
}

void delta_backward(const Matrix& delta, const Matrix& w, Matrix& dprev) {
    assert(delta.cols == w.cols);
    dprev = Matrix(delta.rows, w.rows);
    for (std::size_t s = 0; s < delta.rows; ++s) {
        const double* ds = delta.row(s);
        double* os = dprev.row(s);
        for (std::size_t i = 0; i < w.rows; ++i) {
            double acc = 0.0;
            const double* wi = w.row(i);
            for (std::size_t j = 0; j < w.cols; ++j)
                acc += ds[j] * wi[j];
            os[i] = acc;
        }
    }
}

void descend(Matrix& w, const Matrix& gw, double lr) {
    assert(w.same_shape(gw));
    for (std::size_t n = 0; n < w.data.size(); ++n)
        w.data[n] -= lr * gw.data[n];
}

void descend(std::vector<double>& b, const std::vector<double>& gb, double lr) {
    assert(b.size() == gb.size());
    for (std::size_t n = 0; n < b.size(); ++n)
        b[n] -= lr * gb[n];
}

} // namespace serial

namespace omp {

// Every loop below parallelizes across output elements only; the inner
// reduction for each element runs in the same order as the serial path, so
// results match it bit for bit regardless of thread count.

void linear_forward(const Matrix& x, const Matrix& w, const std::vector<double>& b,
                    Matrix& y) {
    assert(x.cols == w.rows && w.cols == b.size());
    if (!over_grain(2 * x.rows * x.cols * w.cols)) {
        serial::linear_forward(x, w, b, y);
        return;
    }
    y = Matrix(x.rows, w.cols);
    const long rows = static_cast<long>(x.rows);
#pragma omp parallel for schedule(static)
    for (long s = 0; s < rows; ++s) {
        const double* xs = x.row(static_cast<std::size_t>(s));
        double* ys = y.row(static_cast<std::size_t>(s));
        std::copy(b.begin(), b.end(), ys);
        for (std::size_t i = 0; i < x.cols; ++i) {
            const double xi = xs[i];
            const double* wi = w.row(i);
            for (std::size_t j = 0; j < w.cols; ++j)
                ys[j] += xi * wi[j];
        }
    }
}

void activation_forward(ActivationKind kind, const Matrix& pre, Matrix& out) {
    if (!over_grain(pre.data.size())) {
        serial::activation_forward(kind, pre, out);
        return;
    }
    out = Matrix(pre.rows, pre.cols);
    const long n = static_cast<long>(pre.data.size());
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k)
        out.data[static_cast<std::size_t>(k)] =
            act_apply(kind, pre.data[static_cast<std::size_t>(k)]);
}

void activation_backward(ActivationKind kind, const Matrix& pre, const Matrix& post,
                         const Matrix& dout, Matrix& dpre) {
    assert(pre.same_shape(post) && pre.same_shape(dout));
    if (!over_grain(2 * pre.data.size())) {
        serial::activation_backward(kind, pre, post, dout, dpre);
        return;
    }
    dpre = Matrix(pre.rows, pre.cols);
    const long n = static_cast<long>(pre.data.size());
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k) {
        auto u = static_cast<std::size_t>(k);
        dpre.data[u] = dout.data[u] * act_deriv(kind, pre.data[u], post.data[u]);
    }
}

void softmax_rows(const Matrix& x, Matrix& p) {
    if (!over_grain(4 * x.data.size())) {
        serial::softmax_rows(x, p);
        return;
    }
    p = Matrix(x.rows, x.cols);
    const long rows = static_cast<long>(x.rows);
#pragma omp parallel for schedule(static)
    for (long s = 0; s < rows; ++s) {
        const double* xs = x.row(static_cast<std::size_t>(s));
        double* ps = p.row(static_cast<std::size_t>(s));
        double mx = xs[0];
        for (std::size_t j = 1; j < x.cols; ++j) mx = std::max(mx, xs[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < x.cols; ++j) {
            ps[j] = std::exp(xs[j] - mx);
            sum += ps[j];
        }
        for (std::size_t j = 0; j < x.cols; ++j) ps[j] /= sum;
    }
}

void grad_weights(const Matrix& a, const Matrix& delta, double scale, Matrix& gw) {
    assert(a.rows == delta.rows);
    if (!over_grain(2 * a.rows * a.cols * delta.cols)) {
        serial::grad_weights(a, delta, scale, gw);
        return;
    }
    gw = Matrix(a.cols, delta.cols);
    const long in = static_cast<long>(a.cols);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < in; ++i) {
        const auto u = static_cast<std::size_t>(i);
        double* gi = gw.row(u);
        for (std::size_t s = 0; s < a.rows; ++s) {
            const double ai = a.at(s, u);
            const double* ds = delta.row(s);
            for (std::size_t j = 0; j < delta.cols; ++j)
                gi[j] += ai * ds[j];
        }
        for (std::size_t j = 0; j < delta.cols; ++j)
            gi[j] *= scale;
    }
}

void grad_bias(const Matrix& delta, double scale, std::vector<double>& gb) {
    if (!over_grain(delta.data.size())) {
        serial::grad_bias(delta, scale, gb);
        return;
    }
    gb.assign(delta.cols, 0.0);
    const long cols = static_cast<long>(delta.cols);
#pragma omp parallel for schedule(static)
    for (long j = 0; j < cols; ++j) {
        double acc = 0.0;
        for (std::size_t s = 0; s < delta.rows; ++s)
            acc += delta.at(s, static_cast<std::size_t>(j));
        gb[static_cast<std::size_t>(j)] = scale * acc;
    }
}

void delta_backward(const Matrix& delta, const Matrix& w, Matrix& dprev) {
    assert(delta.cols == w.cols);
    if (!over_grain(2 * delta.rows * w.rows * w.cols)) {
        serial::delta_backward(delta, w, dprev);
        return;
    }
    dprev = Matrix(delta.rows, w.rows);
    const long rows = static_cast<long>(delta.rows);
#pragma omp parallel for schedule(static)
    for (long s = 0; s < rows; ++s) {
        const double* ds = delta.row(static_cast<std::size_t>(s));
        double* os = dprev.row(static_cast<std::size_t>(s));
        for (std::size_t i = 0; i < w.rows; ++i) {
            double acc = 0.0;
            const double* wi = w.row(i);
            for (std::size_t j = 0; j < w.cols; ++j)
                acc += ds[j] * wi[j];
            os[i] = acc;
        }
    }
}

void descend(Matrix& w, const Matrix& gw, double lr) {
    assert(w.same_shape(gw));
    if (!over_grain(w.data.size())) {
        serial::descend(w, gw, lr);
        return;
    }
    const long n = static_cast<long>(w.data.size());
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k) {
        auto u = static_cast<std::size_t>(k);
        w.data[u] -= lr * gw.data[u];
    }
}

void descend(std::vector<double>& b, const std::vector<double>& gb, double lr) {
    serial::descend(b, gb, lr);
}

} // namespace omp

void linear_forward(const Matrix& x, const Matrix& w, const std::vector<double>& b,
                    Matrix& y) {
    if (g_backend == Backend::OpenMP) omp::linear_forward(x, w, b, y);
    else serial::linear_forward(x, w, b, y);
}

void activation_forward(ActivationKind kind, const Matrix& pre, Matrix& out) {
    if (g_backend == Backend::OpenMP) omp::activation_forward(kind, pre, out);
    else serial::activation_forward(kind, pre, out);
}

void activation_backward(ActivationKind kind, const Matrix& pre, const Matrix& post,
                         const Matrix& dout, Matrix& dpre) {
    if (g_backend == Backend::OpenMP) omp::activation_backward(kind, pre, post, dout, dpre);
    else serial::activation_backward(kind, pre, post, dout, dpre);
}

void softmax_rows(const Matrix& x, Matrix& p) {
    if (g_backend == Backend::OpenMP) omp::softmax_rows(x, p);
    else serial::softmax_rows(x, p);
}

void grad_weights(const Matrix& a, const Matrix& delta, double scale, Matrix& gw) {
    if (g_backend == Backend::OpenMP) omp::grad_weights(a, delta, scale, gw);
    else serial::grad_weights(a, delta, scale, gw);
}

void grad_bias(const Matrix& delta, double scale, std::vector<double>& gb) {
    if (g_backend == Backend::OpenMP) omp::grad_bias(delta, scale, gb);
    else serial::grad_bias(delta, scale, gb);
}

void delta_backward(const Matrix& delta, const Matrix& w, Matrix& dprev) {
    if (g_backend == Backend::OpenMP) omp::delta_backward(delta, w, dprev);
    else serial::delta_backward(delta, w, dprev);
}

void descend(Matrix& w, const Matrix& gw, double lr) {
    if (g_backend == Backend::OpenMP) omp::descend(w, gw, lr);
    else serial::descend(w, gw, lr);
}

void descend(std::vector<double>& b, const std::vector<double>& gb, double lr) {
    serial::descend(b, gb, lr);
}

} // namespace dm::kernels
