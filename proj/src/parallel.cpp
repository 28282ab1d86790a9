#include "wavescat/parallel.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace wavescat {

int default_workers()
{
    unsigned h = std::thread::hardware_concurrency();
    return h == 0 ? 1 : static_cast<int>(h);
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn)
{
    if (n == 0)
        return;
    std::size_t w = static_cast<std::size_t>(std::max(1, workers));
    w = std::min(w, n);
    if (w == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(w);
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < w; ++t) {
        std::size_t lo = n * t / w, hi = n * (t + 1) / w;
        threads.emplace_back([&, t, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) {
                try {
                    fn(i);
                } catch (...) {
                    errors[t] = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : threads)
        th.join();
    for (std::size_t t = 0; t < w; ++t)
        if (errors[t])
            std::rethrow_exception(errors[t]);
}

} // namespace wavescat
