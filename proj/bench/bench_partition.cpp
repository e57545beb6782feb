// Serial vs OpenMP comparison for the partition-function kernels and the
// replica ladder.  Usage: treepin_bench [max_depth]

#include <omp.h>

#include <cstdio>
#include <cstdlib>

#include "treepin/montecarlo.hpp"
#include "treepin/treesim.hpp"

using namespace treepin;

int main(int argc, char** argv) {
    const int max_n = argc > 1 ? std::atoi(argv[1]) : 22;
    const ModelSpec model =
        ModelSpec::make(2, 1, DisorderSpec::gaussian(0.0, 1.0), DefectKind::SubtreeConstant, 0.7);
    const double beta = 1.5;

    std::printf("log-partition kernel, d=2, Gaussian bulk, subtree defect\n");
    std::printf("%6s %12s %12s %9s %8s\n", "n", "serial[s]", "parallel[s]", "speedup", "equal");
    for (int n = 16; n <= max_n; n += 2) {
        const Realization r{model, 42, n};
        double t0 = omp_get_wtime();
        const double serial = log_partition_serial(r, beta);
        t0 = omp_get_wtime() - t0;
        double t1 = omp_get_wtime();
        const double parallel = log_partition(r, beta);
        t1 = omp_get_wtime() - t1;
        std::printf("%6d %12.4f %12.4f %9.2f %8s\n", n, t0, t1, t0 / t1,
                    serial == parallel ? "yes" : "NO");
    }

    std::printf("\nreplica ladder, n=14, R=256\n");
    const std::vector<int> ns = {14};
    const int threads = omp_get_max_threads();
    omp_set_num_threads(1);
    double t0 = omp_get_wtime();
    const LadderReport serial_rep = estimate_free_energy(model, beta, ns, 256, 7);
    t0 = omp_get_wtime() - t0;
    omp_set_num_threads(threads);
    double t1 = omp_get_wtime();
    const LadderReport parallel_rep = estimate_free_energy(model, beta, ns, 256, 7);
    t1 = omp_get_wtime() - t1;
    std::printf("1 thread: %.4f s, %d threads: %.4f s, speedup %.2f, equal %s\n", t0, threads, t1,
                t0 / t1,
                serial_rep.estimates[0].mean == parallel_rep.estimates[0].mean ? "yes" : "NO");
    return 0;
}
