// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0

#include "polydom/kernels/dbm_closure.hpp"

namespace polydom::kernels {

ClosureStatus closure_scalar(std::int64_t* m, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const std::int64_t* rk = m + k * n;
    for (std::size_t i = 0; i < n; ++i) {
      std::int64_t aik = m[i * n + k];
      if (aik == kInf64) continue;
      std::int64_t* ri = m + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        std::int64_t bkj = rk[j];
        if (bkj == kInf64) continue;
        std::int64_t cand;
        if (__builtin_add_overflow(aik, bkj, &cand)) return ClosureStatus::overflow;
        if (cand < ri[j]) ri[j] = cand;
      }
    }
  }
  return ClosureStatus::ok;
}

}  // namespace polydom::kernels
