// Timing comparison between the serial reference campaign runner and the
// OpenMP runner, on a small grouped scenario. The two must agree bit for bit;
// this binary reports wall time and throughput for each.
#include <chrono>
#include <cstdio>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "gqnet/sim.hpp"

int main(int argc, char** argv) {
    int reps = 40;
    if (argc > 1) reps = std::atoi(argv[1]);

    gqnet::SimulationScenario sc;
    sc.n = 50;
    sc.g = 5;
    sc.p = 2;
    sc.true_beta = gqnet::beta_preset("p2", sc.g);
    sc.error_law = {gqnet::ErrorLaw::Kind::normal, 1.0};
    sc.tau = 0.5;
    sc.replications = reps;
    sc.base_seed = 7;

    const auto t0 = std::chrono::steady_clock::now();
    const auto serial = gqnet::run_campaign_serial(sc);
    const auto t1 = std::chrono::steady_clock::now();
    const auto parallel = gqnet::run_campaign_parallel(sc, 0);
    const auto t2 = std::chrono::steady_clock::now();

    bool identical = serial.size() == parallel.size();
    for (std::size_t i = 0; identical && i < serial.size(); ++i)
        identical = serial[i].errors_flat == parallel[i].errors_flat &&
                    serial[i].correct_nonzero == parallel[i].correct_nonzero &&
                    serial[i].correct_zero == parallel[i].correct_zero;

    const double ts = std::chrono::duration<double>(t1 - t0).count();
    const double tp = std::chrono::duration<double>(t2 - t1).count();
    int threads = 1;
#if defined(_OPENMP)
    threads = omp_get_max_threads();
#endif
    std::printf("replications        %d\n", reps);
    std::printf("serial reference    %.3f s  (%.1f reps/s)\n", ts, reps / ts);
    std::printf("openmp (%d threads) %.3f s  (%.1f reps/s)\n", threads, tp, reps / tp);
    std::printf("speedup             %.2fx\n", ts / tp);
    std::printf("results identical   %s\n", identical ? "yes" : "NO");
    return identical ? 0 : 1;
}
