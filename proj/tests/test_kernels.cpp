// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0

#include "polydom/kernels/dbm_closure.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"

using namespace polydom::kernels;

namespace {

// Random n*n matrix: zero diagonal, a mix of small finite entries and
// infinities elsewhere. `negatives` admits small negative bounds (possible
// negative cycles), `huge` plants values whose sums leave the int64 range.
std::vector<std::int64_t> random_matrix(std::mt19937_64& rng, std::size_t n,
                                        bool negatives, bool huge) {
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_int_distribution<std::int64_t> small(negatives ? -20 : 0, 100);
  const std::int64_t big = std::int64_t{1} << 62;
  std::vector<std::int64_t> m(n * n, kInf64);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        m[i * n + j] = 0;
        continue;
      }
      int p = pick(rng);
      if (p < 4)
        m[i * n + j] = small(rng);
      else if (huge && p == 4)
        m[i * n + j] = big + small(rng);
    }
  return m;
}

// Reference closure in 128-bit arithmetic: never overflows for the entry
// ranges used here, so it pins down the expected entries independently.
std::vector<std::int64_t> wide_closure(std::vector<std::int64_t> m,
                                       std::size_t n) {
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      const std::int64_t aik = m[i * n + k];
      if (aik == kInf64) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (m[k * n + j] == kInf64) continue;
        __int128 sum = static_cast<__int128>(aik) + m[k * n + j];
        if (sum < m[i * n + j]) m[i * n + j] = static_cast<std::int64_t>(sum);
      }
    }
  return m;
}

}  // namespace

TEST_CASE("scalar kernel matches a wide-arithmetic reference") {
  std::mt19937_64 rng(0x5eed0001);
  for (int round = 0; round < 200; ++round) {
    const std::size_t n = 1 + rng() % 12;
    auto input = random_matrix(rng, n, /*negatives=*/round % 2, /*huge=*/false);
    auto expected = wide_closure(input, n);
    auto got = input;
    REQUIRE(closure_scalar(got.data(), n) == ClosureStatus::ok);
    CHECK(got == expected);
  }
}

TEST_CASE("scalar and avx2 kernels behave identically") {
  if (!avx2_kernel_compiled() || !__builtin_cpu_supports("avx2")) {
    MESSAGE("avx2 kernel unavailable; nothing to compare");
    return;
  }
  std::mt19937_64 rng(0x5eed0002);
  int overflows = 0;
  for (int round = 0; round < 300; ++round) {
    const std::size_t n = 1 + rng() % 24;
    auto input =
        random_matrix(rng, n, /*negatives=*/round % 2, /*huge=*/round % 3 == 0);
    auto a = input;
    auto b = input;
    ClosureStatus sa = closure_scalar(a.data(), n);
    ClosureStatus sb = closure_avx2(b.data(), n);
    REQUIRE(sa == sb);
    if (sa == ClosureStatus::overflow) {
      ++overflows;  // buffer contents are unspecified on overflow
      continue;
    }
    CHECK(a == b);
  }
  CHECK(overflows > 0);  // the huge inputs must actually exercise overflow
}

TEST_CASE("run_closure dispatches to the selected kernel") {
  REQUIRE(select_closure_kernel() != nullptr);
  REQUIRE(selected_closure_kernel_name() != nullptr);
  const bool avx = avx2_kernel_compiled() && __builtin_cpu_supports("avx2");
  CHECK(std::string(selected_closure_kernel_name()) ==
        (avx ? "avx2" : "scalar"));

  // 0 -> 1 -> 2 chain: the closure adds the 0 -> 2 shortcut.
  std::vector<std::int64_t> m = {0, 3, kInf64, kInf64, 0, 4, kInf64, kInf64, 0};
  REQUIRE(run_closure(m.data(), 3) == ClosureStatus::ok);
  CHECK(m[2] == 7);
}
