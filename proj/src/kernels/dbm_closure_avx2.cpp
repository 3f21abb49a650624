// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0
//
// AVX2 variant of the int64 DBM closure. Processes four lanes of the inner
// j loop at a time; loads precede stores within a chunk, so results match the
// scalar kernel exactly, including the row aliasing case i == k.

#include "polydom/kernels/dbm_closure.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace polydom::kernels {

namespace {

// Signed-add overflow per lane: sign(a) == sign(b) && sign(sum) != sign(a).
inline __m256i add_overflow_mask(__m256i a, __m256i b, __m256i sum) {
  __m256i ax = _mm256_xor_si256(a, sum);
  __m256i bx = _mm256_xor_si256(b, sum);
  return _mm256_and_si256(ax, bx);  // sign bit set on overflowed lanes
}

}  // namespace

ClosureStatus closure_avx2(std::int64_t* m, std::size_t n) {
  const __m256i inf = _mm256_set1_epi64x(kInf64);
  for (std::size_t k = 0; k < n; ++k) {
    const std::int64_t* rk = m + k * n;
    for (std::size_t i = 0; i < n; ++i) {
      std::int64_t aik = m[i * n + k];
      if (aik == kInf64) continue;
      std::int64_t* ri = m + i * n;
      const __m256i va = _mm256_set1_epi64x(aik);
      __m256i ovf_acc = _mm256_setzero_si256();
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(rk + j));
        __m256i vm = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(ri + j));
        __m256i valid = _mm256_cmpeq_epi64(vb, inf);  // lanes to skip
        __m256i cand = _mm256_add_epi64(va, vb);
        __m256i ovf = _mm256_andnot_si256(valid, add_overflow_mask(va, vb, cand));
        ovf_acc = _mm256_or_si256(ovf_acc, ovf);
        __m256i lt = _mm256_cmpgt_epi64(vm, cand);       // cand < m[i][j]
        __m256i take = _mm256_andnot_si256(valid, lt);   // and b finite
        __m256i out = _mm256_blendv_epi8(vm, cand, take);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(ri + j), out);
      }
      // Overflow lanes only matter in the sign bit.
      if (_mm256_movemask_pd(_mm256_castsi256_pd(ovf_acc)) != 0)
        return ClosureStatus::overflow;
      for (; j < n; ++j) {
        std::int64_t bkj = rk[j];
        if (bkj == kInf64) continue;
        std::int64_t cand;
        if (__builtin_add_overflow(aik, bkj, &cand))
          return ClosureStatus::overflow;
        if (cand < ri[j]) ri[j] = cand;
      }
    }
  }
  return ClosureStatus::ok;
}

}  // namespace polydom::kernels

#endif  // __AVX2__
