// Benchmark: OpenMP kernels vs the serial reference, plus a bitwise equality
// check on every compared result.
#include "amgae/kernels.hpp"
#include "amgae/rng.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace amgae;

namespace {

Tensor random_tensor(index_t rows, index_t cols, RngStream& rng, double sparsity = 0.0) {
    Tensor t(rows, cols);
    for (index_t i = 0; i < t.size(); ++i) {
        if (sparsity > 0.0 && rng.next_double() < sparsity) continue;
        t.data()[i] = rng.next_double() * 2.0 - 1.0;
    }
    return t;
}

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm-up
    auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) fn();
    auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
    return a.same_shape(b) &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP: disabled at build time\n");
#endif
    std::printf("%-28s %12s %12s %9s %8s\n", "kernel", "omp (ms)", "serial (ms)", "speedup",
                "bitwise");

    RngStream rng(42);
    const int reps = 5;
    bool all_equal = true;

    auto report = [&](const std::string& name, double t_omp, double t_ref, bool equal) {
        all_equal = all_equal && equal;
        std::printf("%-28s %12.3f %12.3f %8.2fx %8s\n", name.c_str(), t_omp, t_ref,
                    t_ref / t_omp, equal ? "yes" : "NO");
    };

    {
        Tensor a = random_tensor(512, 1433, rng, 0.98);  // feature-like sparsity
        Tensor b = random_tensor(1433, 256, rng);
        Tensor c, c_ref;
        double t_omp = time_ms([&] { kernels::matmul(a, b, c); }, reps);
        double t_ref = time_ms([&] { kernels::ref::matmul(a, b, c_ref); }, reps);
        report("matmul 512x1433x256 sparse", t_omp, t_ref, bitwise_equal(c, c_ref));
    }
    {
        Tensor a = random_tensor(512, 512, rng);
        Tensor b = random_tensor(512, 512, rng);
        Tensor c, c_ref;
        double t_omp = time_ms([&] { kernels::matmul(a, b, c); }, reps);
        double t_ref = time_ms([&] { kernels::ref::matmul(a, b, c_ref); }, reps);
        report("matmul 512x512x512 dense", t_omp, t_ref, bitwise_equal(c, c_ref));
    }
    {
        Tensor a = random_tensor(2048, 256, rng);
        Tensor b = random_tensor(2048, 256, rng);
        Tensor c, c_ref;
        double t_omp = time_ms([&] { kernels::matmul_at_b(a, b, c); }, reps);
        double t_ref = time_ms([&] { kernels::ref::matmul_at_b(a, b, c_ref); }, reps);
        report("matmul_at_b 2048x256^2", t_omp, t_ref, bitwise_equal(c, c_ref));
    }
    {
        Tensor a = random_tensor(1024, 256, rng);
        Tensor b = random_tensor(1024, 256, rng);
        Tensor c, c_ref;
        double t_omp = time_ms([&] { kernels::matmul_a_bt(a, b, c); }, reps);
        double t_ref = time_ms([&] { kernels::ref::matmul_a_bt(a, b, c_ref); }, reps);
        report("matmul_a_bt 1024x256^2", t_omp, t_ref, bitwise_equal(c, c_ref));
    }
    {
        // Random sparse operator: ~16 entries per row.
        const index_t n = 4096;
        std::vector<index_t> offsets{0};
        std::vector<index_t> targets;
        std::vector<double> values;
        for (index_t i = 0; i < n; ++i) {
            for (int e = 0; e < 16; ++e) {
                targets.push_back(static_cast<index_t>(rng.next_below(n)));
                values.push_back(rng.next_double());
            }
            offsets.push_back(static_cast<index_t>(targets.size()));
        }
        Tensor x = random_tensor(n, 256, rng);
        Tensor y, y_ref;
        double t_omp = time_ms([&] { kernels::spmm_csr(offsets, targets, values, x, y); }, reps);
        double t_ref =
            time_ms([&] { kernels::ref::spmm_csr(offsets, targets, values, x, y_ref); }, reps);
        report("spmm_csr 4096 nnz=16/row", t_omp, t_ref, bitwise_equal(y, y_ref));
    }

    if (!all_equal) {
        std::printf("FAILURE: OpenMP and serial results differ bitwise\n");
        return 1;
    }
    std::printf("all results bitwise identical\n");
    return 0;
}
