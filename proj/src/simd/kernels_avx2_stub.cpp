#include "pvn/simd/kernels.hpp"

namespace pvn::simd {

const KernelTable* avx2_table() { return nullptr; }

}  // namespace pvn::simd
