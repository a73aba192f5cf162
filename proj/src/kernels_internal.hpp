#pragma once

#include "stef/kernels.hpp"

namespace stef::kernels {

const KernelTable& scalar_table();

#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table();
#endif

}  // namespace stef::kernels
