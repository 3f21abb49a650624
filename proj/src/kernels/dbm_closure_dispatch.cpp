// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0

#include "polydom/kernels/dbm_closure.hpp"

namespace polydom::kernels {

bool avx2_kernel_compiled() {
#if defined(POLYDOM_HAVE_AVX2_TU)
  return true;
#else
  return false;
#endif
}

ClosureFn select_closure_kernel() {
#if defined(POLYDOM_HAVE_AVX2_TU) && (defined(__x86_64__) || defined(__i386__))
  if (__builtin_cpu_supports("avx2")) return &closure_avx2;
#endif
  return &closure_scalar;
}

const char* selected_closure_kernel_name() {
  return select_closure_kernel() == &closure_scalar ? "scalar" : "avx2";
}

ClosureStatus run_closure(std::int64_t* m, std::size_t n) {
  static const ClosureFn fn = select_closure_kernel();
  return fn(m, n);
}

}  // namespace polydom::kernels
