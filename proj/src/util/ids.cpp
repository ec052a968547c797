#include "pdmflow/util/ids.hpp"

#include <atomic>
#include <cstdint>
#include <random>

#include "pdmflow/util/rng.hpp"

namespace pdmflow {

namespace {
std::uint64_t seed_from_entropy() {
    std::random_device rd;
    std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    return splitmix64(s);
}
} // namespace

std::string new_uuid() {
    static std::atomic<std::uint64_t> counter{seed_from_entropy()};
    std::uint64_t n = counter.fetch_add(1, std::memory_order_relaxed);
    Rng rng(n);
    std::uint64_t hi = rng.next_u64();
    std::uint64_t lo = rng.next_u64();
    // version 4, variant 10
    hi = (hi & 0xffffffffffff0fffULL) | 0x0000000000004000ULL;
    lo = (lo & 0x3fffffffffffffffULL) | 0x8000000000000000ULL;

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(36);
    auto emit = [&](std::uint64_t v, int nibbles) {
        for (int i = nibbles - 1; i >= 0; --i) out.push_back(hex[(v >> (4 * i)) & 0xf]);
    };
    emit(hi >> 32, 8);
    out.push_back('-');
    emit((hi >> 16) & 0xffff, 4);
    out.push_back('-');
    emit(hi & 0xffff, 4);
    out.push_back('-');
    emit(lo >> 48, 4);
    out.push_back('-');
    emit(lo & 0xffffffffffffULL, 12);
    return out;
}

} // namespace pdmflow
