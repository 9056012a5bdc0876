#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace hstar::detail {

inline unsigned resolve_threads(unsigned t, std::uint64_t work) {
    if (!t) t = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(t, work)));
}

// Runs fn(slot, first, count) over contiguous slices of [0, total). Slot k
// always gets the k-th slice, so per-slot results reduce in a fixed order.
template <class Fn>
void for_slices(std::uint64_t total, unsigned slots, Fn&& fn) {
    if (slots <= 1) {
        fn(0u, std::uint64_t{0}, total);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(slots);
    const std::uint64_t per = total/slots, extra = total%slots;
    std::uint64_t start = 0;
    for (unsigned k = 0; k < slots; ++k) {
        const std::uint64_t len = per + (k < extra ? 1 : 0);
        pool.emplace_back([&, k, start, len] {
            try {
                fn(k, start, len);
            }
            catch (...) {
                errors[k] = std::current_exception();
            }
        });
        start += len;
    }
    for (auto& t: pool) t.join();
    for (auto& e: errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace hstar::detail
