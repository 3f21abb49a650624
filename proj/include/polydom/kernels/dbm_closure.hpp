// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Shortest-path closure kernels for dense int64 difference-bound matrices.
// The matrix is row-major n*n; kInf64 encodes +infinity. Additions of finite
// entries are overflow-checked: on overflow the kernel reports it and the
// buffer contents are unspecified (callers work on a scratch copy).
//
// Two implementations with identical observable behavior: a scalar reference
// and an AVX2 variant. select_closure_kernel() picks at runtime based on CPU
// support; the pair is equivalence-tested against each other.

#pragma once

#include <cstdint>
#include <cstddef>
#include <limits>

namespace polydom::kernels {

inline constexpr std::int64_t kInf64 = std::numeric_limits<std::int64_t>::max();

enum class ClosureStatus { ok, overflow };

using ClosureFn = ClosureStatus (*)(std::int64_t* m, std::size_t n);

ClosureStatus closure_scalar(std::int64_t* m, std::size_t n);

// Defined only when the build enables the AVX2 translation unit; never call
// without a runtime CPU check.
ClosureStatus closure_avx2(std::int64_t* m, std::size_t n);
bool avx2_kernel_compiled();

ClosureFn select_closure_kernel();
const char* selected_closure_kernel_name();

// Runs the selected kernel.
ClosureStatus run_closure(std::int64_t* m, std::size_t n);

}  // namespace polydom::kernels
