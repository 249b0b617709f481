#include "smore/hv.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace smore {

namespace {

void check_same_dim(std::size_t a, std::size_t b) {
    if (a != b) {
        throw std::invalid_argument("hypervector dimension mismatch: " + std::to_string(a) +
                                    " vs " + std::to_string(b));
    }
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double norm(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

void add_inplace(std::span<double> acc, std::span<const double> x) {
    const std::size_t n = acc.size();
    for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void axpy_inplace(std::span<double> acc, double alpha, std::span<const double> x) {
    const std::size_t n = acc.size();
    for (std::size_t i = 0; i < n; ++i) acc[i] += alpha * x[i];
}

void mul_inplace(std::span<double> acc, std::span<const double> x) {
    const std::size_t n = acc.size();
    for (std::size_t i = 0; i < n; ++i) acc[i] *= x[i];
}

void mul_add_inplace(std::span<double> acc, std::span<const double> a, std::span<const double> b) {
    const std::size_t n = acc.size();
    for (std::size_t i = 0; i < n; ++i) acc[i] += a[i] * b[i];
}

void rotate_into(std::span<double> out, std::span<const double> a, std::size_t shifts) {
    const std::size_t n = a.size();
    if (n == 0) return;
    const std::size_t s = shifts % n;
    if (s == 0) {
        std::memcpy(out.data(), a.data(), n * sizeof(double));
        return;
    }
    // out[s..n) = a[0..n-s), out[0..s) = a[n-s..n)
    std::memcpy(out.data() + s, a.data(), (n - s) * sizeof(double));
    std::memcpy(out.data(), a.data() + (n - s), s * sizeof(double));
}

void rotate_mul_inplace(std::span<double> acc, std::span<const double> a, std::size_t shifts) {
    const std::size_t n = acc.size();
    if (n == 0) return;
    const std::size_t s = shifts % n;
    // acc[i] *= a[(i - s) mod n], split at the wrap point so both loops stay
    // contiguous.
    for (std::size_t i = 0; i < s; ++i) acc[i] *= a[n - s + i];
    for (std::size_t i = s; i < n; ++i) acc[i] *= a[i - s];
}

Hypervector random_bipolar(const HvRng& rng, std::uint64_t index, std::size_t dim) {
    if (dim == 0) throw std::invalid_argument("hypervector dimension must be positive");
    Hypervector out(dim);
    RngSequence seq = rng.sequence(index);
    std::size_t i = 0;
    while (i < dim) {
        std::uint64_t word = seq.next_u64();
        const std::size_t block = std::min<std::size_t>(64, dim - i);
        for (std::size_t b = 0; b < block; ++b, ++i) {
            out[i] = (word >> b) & 1u ? 1.0 : -1.0;
        }
    }
    return out;
}

double similarity(const Hypervector& a, const Hypervector& b) {
    check_same_dim(a.size(), b.size());
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

Hypervector bundle(std::span<const Hypervector> vs) {
    if (vs.empty()) throw std::invalid_argument("bundle requires at least one hypervector");
    Hypervector out = vs[0];
    for (std::size_t i = 1; i < vs.size(); ++i) {
        check_same_dim(out.size(), vs[i].size());
        add_inplace(out, vs[i]);
    }
    return out;
}

Hypervector bind(const Hypervector& a, const Hypervector& b) {
    check_same_dim(a.size(), b.size());
    Hypervector out = a;
    mul_inplace(out, b);
    return out;
}

Hypervector permute(const Hypervector& a, std::size_t shifts) {
    Hypervector out(a.size());
    rotate_into(out, a, shifts);
    return out;
}

bool all_finite(const Hypervector& a) {
    for (double v : a) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace smore
