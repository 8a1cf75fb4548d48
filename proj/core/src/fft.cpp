#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace ofbm::detail {

namespace {

struct PlanCache {
    std::mutex mutex;
    std::map<std::pair<std::size_t, bool>, fftw_plan> plans;

    ~PlanCache() {
        for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

}  // namespace

void fft_inplace(std::span<std::complex<double>> data, bool inverse) {
    if (data.empty()) return;
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        auto& c = cache();
        std::lock_guard lock(c.mutex);
        auto& slot = c.plans[{data.size(), inverse}];
        if (slot == nullptr) {
            // Planner is not thread-safe; FFTW_ESTIMATE leaves the buffer untouched.
            slot = fftw_plan_dft_1d(static_cast<int>(data.size()), ptr, ptr,
                                    inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
        }
        plan = slot;
    }
    fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace ofbm::detail
