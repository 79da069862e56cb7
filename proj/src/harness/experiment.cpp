#include "pvn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace pvn {

ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads,
                                const std::function<void(int)>& on_trial_done) {
    spec.validate();
    ExperimentResult result;
    result.points = expand_sweep(spec);

    std::vector<std::vector<TrialRecord>> per_trial(static_cast<std::size_t>(spec.n_trials));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (int t = next++; t < spec.n_trials; t = next++) {
            try {
                per_trial[static_cast<std::size_t>(t)] = run_trial(spec, result.points, t);
                if (on_trial_done) {
                    on_trial_done(t);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = spec.n_trials;
            }
        }
    };
    const unsigned n_threads =
        std::max(1U, std::min(threads == 0 ? std::thread::hardware_concurrency() : threads,
                              static_cast<unsigned>(spec.n_trials)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < n_threads; ++i) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    for (auto& records : per_trial) {
        std::move(records.begin(), records.end(), std::back_inserter(result.records));
    }
    result.summary = summarize(result.points, result.records);
    return result;
}

std::vector<SummaryRow> summarize(const std::vector<SweepPoint>& points, const std::vector<TrialRecord>& records) {
    std::vector<SummaryRow> rows(points.size());
    std::vector<std::vector<std::pair<std::string, std::vector<double>>>> samples(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        rows[i].point = points[i].index;
    }
    for (const TrialRecord& r : records) {
        const auto p = static_cast<std::size_t>(r.point);
        ++rows[p].n_records;
        rows[p].n_miss += r.miss ? 1 : 0;
        for (const auto& [key, value] : r.fields) {
            auto& bucket = samples[p];
            auto it = std::find_if(bucket.begin(), bucket.end(), [&](const auto& b) { return b.first == key; });
            if (it == bucket.end()) {
                bucket.emplace_back(key, std::vector<double>{});
                it = std::prev(bucket.end());
            }
            if (std::isfinite(value)) {
                it->second.push_back(value);
            }
        }
    }
    for (std::size_t p = 0; p < points.size(); ++p) {
        for (const auto& [key, values] : samples[p]) {
            const double n = static_cast<double>(values.size());
            double mean = std::nan("");
            double se = std::nan("");
            if (!values.empty()) {
                double sum = 0.0;
                for (double v : values) {
                    sum += v;
                }
                mean = sum / n;
                double ss = 0.0;
                for (double v : values) {
                    ss += (v - mean) * (v - mean);
                }
                se = values.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
            }
            rows[p].mean.emplace_back(key, mean);
            rows[p].std_error.emplace_back(key, se);
        }
    }
    return rows;
}

}  // namespace pvn
