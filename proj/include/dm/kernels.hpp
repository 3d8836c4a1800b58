#ifndef DM_KERNELS_HPP
#define DM_KERNELS_HPP

#include <cstddef>
#include <vector>

namespace dm {

enum class ActivationKind { Sigmoid, Tanh, Relu };

namespace kernels {

// Row-major dense matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// Which implementation the dispatching kernels use. Both produce bit-identical
// results: the OpenMP variants only parallelize across independent output
// elements and keep every reduction in a fixed serial order.
enum class Backend { Serial, OpenMP };

Backend active_backend();
void set_backend(Backend b);

// Work threshold (in flops) below which the OpenMP variants stay serial.
void set_parallel_grain(std::size_t flops);
std::size_t parallel_grain();

// y[s][j] = b[j] + sum_i x[s][i] * w[i][j]
void linear_forward(const Matrix& x, const Matrix& w, const std::vector<double>& b,
                    Matrix& y);

// out[s][j] = f(pre[s][j])
void activation_forward(ActivationKind kind, const Matrix& pre, Matrix& out);

// dpre[s][j] = dout[s][j] * f'(pre[s][j]); `post` holds f(pre) so sigmoid and
// tanh derivatives reuse it.
void activation_backward(ActivationKind kind, const Matrix& pre, const Matrix& post,
                         const Matrix& dout, Matrix& dpre);

// p[s][j] = exp(x[s][j] - max_j) / sum_k exp(x[s][k] - max_k), rowwise
void softmax_rows(const Matrix& x, Matrix& p);

// gw[i][j] = scale * sum_s a[s][i] * delta[s][j];  gb[j] = scale * sum_s delta[s][j]
void grad_weights(const Matrix& a, const Matrix& delta, double scale, Matrix& gw);
void grad_bias(const Matrix& delta, double scale, std::vector<double>& gb);

// dprev[s][i] = sum_j delta[s][j] * w[i][j]
void delta_backward(const Matrix& delta, const Matrix& w, Matrix& dprev);

// w -= lr * gw (elementwise); same for bias vectors
void descend(Matrix& w, const Matrix& gw, double lr);
void descend(std::vector<double>& b, const std::vector<double>& gb, double lr);

// Serial reference implementations, kept callable directly so tests and the
// benchmark can compare the two paths.
namespace serial {
void linear_forward(const Matrix& x, const Matrix& w, const std::vector<double>& b,
                    Matrix& y);
void activation_forward(ActivationKind kind, const Matrix& pre, Matrix& out);
void activation_backward(ActivationKind kind, const Matrix& pre, const Matrix& post,
                         const Matrix& dout, Matrix& dpre);
void softmax_rows(const Matrix& x, Matrix& p);
void grad_weights(const Matrix& a, const Matrix& delta, double scale, Matrix& gw);
void grad_bias(const Matrix& delta, double scale, std::vector<double>& gb);
void delta_backward(const Matrix& delta, const Matrix& w, Matrix& dprev);
void descend(Matrix& w, const Matrix& gw, double lr);
void descend(std::vector<double>& b, const std::vector<double>& gb, double lr);
} // namespace serial

namespace omp {
void linear_forward(const Matrix& x, const Matrix& w, const std::vector<double>& b,
                    Matrix& y);
void activation_forward(ActivationKind kind, const Matrix& pre, Matrix& out);
void activation_backward(ActivationKind kind, const Matrix& pre, const Matrix& post,
                         const Matrix& dout, Matrix& dpre);
void softmax_rows(const Matrix& x, Matrix& p);
void grad_weights(const Matrix& a, const Matrix& delta, double scale, Matrix& gw);
void grad_bias(const Matrix& delta, double scale, std::vector<double>& gb);
void delta_backward(const Matrix& delta, const Matrix& w, Matrix& dprev);
void descend(Matrix& w, const Matrix& gw, double lr);
void descend(std::vector<double>& b, const std::vector<double>& gb, double lr);
} // namespace omp

} // namespace kernels
} // namespace dm

#endif
