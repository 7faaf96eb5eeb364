#pragma once
#include <cstddef>
#include <functional>

namespace mimo {

// Applies fn to [0, n) split into fixed-size chunks. Chunk boundaries depend
// only on chunk_size, never on the worker count, so any per-chunk outputs are
// reproducible for 1 or W workers. fn must write only to chunk-owned slots.
void run_chunked(std::size_t n, std::size_t chunk_size, int workers,
                 const std::function<void(std::size_t begin, std::size_t end,
                                          std::size_t chunk_index)>& fn);

int default_workers();

}  // namespace mimo
