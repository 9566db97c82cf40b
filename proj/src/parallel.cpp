#include "rrn/parallel.hpp"

namespace rrn {

namespace {
std::atomic<int> worker_count{1};
}

void set_workers(int n) { worker_count = std::max(1, n); }

int workers() { return worker_count; }

} // namespace rrn
