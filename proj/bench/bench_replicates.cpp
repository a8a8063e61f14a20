// Times the serial reference runner against the OpenMP runner on full simulation replicates
// and checks that both produce the same regret curves.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "epibsl/metrics.hpp"
#include "epibsl/parallel.hpp"

using namespace epibsl;

namespace {

template <class F>
double seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    const std::int64_t replicates = argc > 1 ? std::atoll(argv[1]) : 2000;
    const std::int64_t episodes = argc > 2 ? std::atoll(argv[2]) : 200;
    const int threads = resolve_threads(argc > 3 ? std::atoi(argv[3]) : 0);

    struct Case {
        const char* name;
        Instance inst;
    };
    const Case cases[] = {
        {"min m=2", Instance::make({2, 2}, {1, 3}, AggregationFunction::min(2), 0.001)},
        {"sum m=3", Instance::make({3, 2}, {1, 2}, AggregationFunction::sum(3), 0.01)},
        {"max m=4", Instance::make({2, 3}, {1, 4}, AggregationFunction::max(4), 0.01)},
    };
    std::printf("replicates=%lld episodes=%lld threads=%d\n", static_cast<long long>(replicates),
                static_cast<long long>(episodes), threads);
    std::printf("%-10s %12s %12s %9s %s\n", "case", "serial_s", "parallel_s", "speedup", "match");
    for (const auto& c : cases) {
        auto job = [&](std::int64_t r) {
            return pseudoregret(run_simulation(c.inst, episodes, replicate_seed(1, r))).cumulative;
        };
        std::vector<std::vector<double>> serial, parallel;
        const double ts = seconds([&] { serial = map_replicates_serial(replicates, job); });
        const double tp = seconds([&] { parallel = map_replicates(replicates, threads, job); });
        std::printf("%-10s %12.4f %12.4f %9.2f %s\n", c.name, ts, tp, ts / tp, serial == parallel ? "yes" : "NO");
        if (serial != parallel) return 1;
    }
    return 0;
}
