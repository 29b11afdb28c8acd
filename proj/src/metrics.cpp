#include "fedsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fedsim {

double percentile(std::vector<double> samples, double p) {
    if (samples.empty()) return 0.0;
    std::sort(samples.begin(), samples.end());
    if (p <= 0.0) return samples.front();
    if (p >= 100.0) return samples.back();
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * double(samples.size())));
    if (rank == 0) rank = 1;
    return samples[rank - 1];
}

LatencyStats latency_stats(const std::vector<double>& samples) {
    LatencyStats stats;
    stats.count = samples.size();
    if (samples.empty()) return stats;
    stats.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / double(samples.size());
    stats.p50 = percentile(samples, 50.0);
    stats.p95 = percentile(samples, 95.0);
    stats.max = *std::max_element(samples.begin(), samples.end());
    return stats;
}

} // namespace fedsim
