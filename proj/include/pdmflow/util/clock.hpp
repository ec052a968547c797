#pragma once

#include <chrono>
#include <cstdint>
#include <functional>

namespace pdmflow {

// Epoch microseconds. Injectable everywhere time matters so tests can run on a
// simulated clock.
using ClockFn = std::function<std::int64_t()>;

inline std::int64_t real_now_us() {
    return std::chrono::duration_cast<std::chrono::microseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

inline ClockFn real_clock() {
    return [] { return real_now_us(); };
}

} // namespace pdmflow
