#pragma once

#include <cstddef>
#include <string>

// Data-parallel inner loops used by the similarity, metric and trainer code.
// Every operation exists as a scalar reference kernel and, on x86-64 with
// AVX2, as a vectorized variant; the two are equivalence-tested against each
// other. Selection happens once at runtime from CPU features, overridable
// with FNCE_SIMD=scalar|avx2|auto. Reduction lane order is fixed per kernel,
// so repeated calls on the same inputs give bit-identical results.

namespace fnce::kern {

enum class Level { scalar, avx2 };

// Kernel set chosen for this process (CPU detection + FNCE_SIMD override).
Level active_level();
std::string level_name();

double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);  // y += alpha*x
void scale(double* x, double alpha, std::size_t n);                  // x *= alpha
double sum(const double* x, std::size_t n);
double max_value(const double* x, std::size_t n);  // n >= 1
double squared_distance(const double* a, const double* b, std::size_t n);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double* x, double alpha, std::size_t n);
double sum(const double* x, std::size_t n);
double max_value(const double* x, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define FNCE_HAS_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double* x, double alpha, std::size_t n);
double sum(const double* x, std::size_t n);
double max_value(const double* x, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
}  // namespace avx2
#endif

}  // namespace fnce::kern
