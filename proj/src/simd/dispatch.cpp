#include <cstdlib>
#include <string_view>

#include "mapomdp/simd/kernels.hpp"

namespace mapomdp::simd {

const KernelTable* avx2_table_if_compiled();

const KernelTable* avx2_kernels() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? avx2_table_if_compiled() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& table = [] () -> const KernelTable& {
    const char* forced = std::getenv("MAPOMDP_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar")
      return scalar_kernels();
    if (const KernelTable* t = avx2_kernels()) return *t;
    return scalar_kernels();
  }();
  return table;
}

}  // namespace mapomdp::simd
