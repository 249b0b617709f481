#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "smore/rng.hpp"

namespace smore {

/// Dense real-valued hypervector. Base vectors are bipolar (+1/-1); anything
/// derived from bundling or training is real-valued.
using Hypervector = std::vector<double>;

// ---------------------------------------------------------------------------
// Raw kernels. No argument checking; all spans must have equal length.
// These are the serial building blocks the batch layers parallelize over.
// ---------------------------------------------------------------------------

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

/// acc += x
void add_inplace(std::span<double> acc, std::span<const double> x);
/// acc += alpha * x
void axpy_inplace(std::span<double> acc, double alpha, std::span<const double> x);
/// acc *= x
void mul_inplace(std::span<double> acc, std::span<const double> x);
/// acc += a * b  (element-wise product accumulate)
void mul_add_inplace(std::span<double> acc, std::span<const double> a, std::span<const double> b);
/// out = a circularly right-rotated by `shifts` (last element moves first).
void rotate_into(std::span<double> out, std::span<const double> a, std::size_t shifts);
/// acc *= rotate(a, shifts), without materializing the rotation.
void rotate_mul_inplace(std::span<double> acc, std::span<const double> a, std::size_t shifts);

// ---------------------------------------------------------------------------
// Hypervector algebra
// ---------------------------------------------------------------------------

/// Fresh bipolar vector for draw `index`: each element is -1 or +1 with equal
/// probability, fixed by (rng.seed, rng.stream, index).
Hypervector random_bipolar(const HvRng& rng, std::uint64_t index, std::size_t dim);

/// Cosine similarity in [-1, 1]. A zero-norm operand yields exactly 0.
double similarity(const Hypervector& a, const Hypervector& b);

/// Element-wise sum of a nonempty set of equal-dimension vectors.
Hypervector bundle(std::span<const Hypervector> vs);

/// Element-wise product. Exactly reversible on bipolar operands.
Hypervector bind(const Hypervector& a, const Hypervector& b);

/// `shifts` circular right-shifts; permute(a, dim) == a.
Hypervector permute(const Hypervector& a, std::size_t shifts);

bool all_finite(const Hypervector& a);

}  // namespace smore
