// Times the serial reference kernels against the OpenMP variants on shapes
// typical for this workload, and checks the two paths stay bit-identical.
//
// Usage: bench_kernels [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "dm/kernels.hpp"
#include "dm/rng.hpp"

using dm::ActivationKind;
using dm::Rng;
using dm::kernels::Matrix;

namespace {

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    Matrix m(r, c);
    for (double& v : m.data) v = rng.next_double(-1.0, 1.0);
    return m;
}

std::vector<double> random_vec(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.next_double(-1.0, 1.0);
    return v;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        if (a.data[i] != b.data[i]) return false;
    return true;
}

struct Case {
    const char* name;
    std::size_t batch, in, out;
};

void bench_case(const Case& c, int reps) {
    Rng rng(42);
    Matrix x = random_matrix(c.batch, c.in, rng);
    Matrix w = random_matrix(c.in, c.out, rng);
    std::vector<double> b = random_vec(c.out, rng);
    Matrix delta = random_matrix(c.batch, c.out, rng);

    Matrix ys(c.batch, c.out), yp(c.batch, c.out);
    Matrix gws(c.in, c.out), gwp(c.in, c.out);
    Matrix dps(c.batch, c.in), dpp(c.batch, c.in);

    // warm both paths once so page faults land outside the timed loops
    dm::kernels::serial::linear_forward(x, w, b, ys);
    dm::kernels::omp::linear_forward(x, w, b, yp);

    double t0 = now_s();
    for (int r = 0; r < reps; ++r) dm::kernels::serial::linear_forward(x, w, b, ys);
    double t1 = now_s();
    for (int r = 0; r < reps; ++r) dm::kernels::omp::linear_forward(x, w, b, yp);
    double t2 = now_s();
    bool fwd_ok = bitwise_equal(ys, yp);

    double t3 = now_s();
    for (int r = 0; r < reps; ++r)
        dm::kernels::serial::grad_weights(x, delta, 1.0 / double(c.batch), gws);
    double t4 = now_s();
    for (int r = 0; r < reps; ++r)
        dm::kernels::omp::grad_weights(x, delta, 1.0 / double(c.batch), gwp);
    double t5 = now_s();
    bool gw_ok = bitwise_equal(gws, gwp);

    double t6 = now_s();
    for (int r = 0; r < reps; ++r) dm::kernels::serial::delta_backward(delta, w, dps);
    double t7 = now_s();
    for (int r = 0; r < reps; ++r) dm::kernels::omp::delta_backward(delta, w, dpp);
    double t8 = now_s();
    bool db_ok = bitwise_equal(dps, dpp);

    double per = 1000.0 / reps;
    std::printf("%-18s %4zux%4zux%4zu  fwd %8.3f / %8.3f ms %s  gw %8.3f / %8.3f ms %s"
                "  db %8.3f / %8.3f ms %s\n",
                c.name, c.batch, c.in, c.out, (t1 - t0) * per, (t2 - t1) * per,
                fwd_ok ? "ok" : "MISMATCH", (t4 - t3) * per, (t5 - t4) * per,
                gw_ok ? "ok" : "MISMATCH", (t7 - t6) * per, (t8 - t7) * per,
                db_ok ? "ok" : "MISMATCH");
    if (!fwd_ok || !gw_ok || !db_ok) std::exit(1);
}

} // namespace

int main(int argc, char** argv) {
    int reps = argc > 1 ? std::atoi(argv[1]) : 50;
    if (reps <= 0) reps = 50;
    std::printf("serial / omp per call, %d reps each\n", reps);

    const Case cases[] = {
        {"tiny-register", 64, 19, 29},
        {"windowed", 256, 76, 29},
        {"wide-hidden", 256, 512, 512},
        {"grid-heavy", 512, 1024, 1024},
    };
    for (const Case& c : cases) bench_case(c, reps);

    std::puts("all backends bit-identical");
    return 0;
}
