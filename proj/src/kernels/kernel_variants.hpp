#pragma once

#include "risdelay/kernels.hpp"

namespace risdelay::kernels::detail {

// Defined in the ISA-specific translation units. Those units are compiled
// with extra target flags, so they must not call inline library functions
// that could be emitted there and merged with the baseline copies.
const KernelTable& avx2_table_impl();
const KernelTable& neon_table_impl();

}  // namespace risdelay::kernels::detail
