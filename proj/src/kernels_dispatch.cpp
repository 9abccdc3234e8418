#include "fnce/kernels.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace fnce::kern {

namespace {

Level detect() {
#if defined(FNCE_HAS_AVX2_KERNELS)
    const bool cpu_ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    const char* env = std::getenv("FNCE_SIMD");
    if (env == nullptr || std::strcmp(env, "auto") == 0) {
        return cpu_ok ? Level::avx2 : Level::scalar;
    }
    if (std::strcmp(env, "scalar") == 0) return Level::scalar;
    if (std::strcmp(env, "avx2") == 0) {
        if (cpu_ok) return Level::avx2;
        std::fprintf(stderr, "fnce: FNCE_SIMD=avx2 requested but CPU lacks AVX2+FMA; using scalar kernels\n");
        return Level::scalar;
    }
    std::fprintf(stderr, "fnce: unknown FNCE_SIMD value '%s' (want auto|scalar|avx2); using auto\n", env);
    return cpu_ok ? Level::avx2 : Level::scalar;
#else
    const char* env = std::getenv("FNCE_SIMD");
    if (env != nullptr && std::strcmp(env, "avx2") == 0) {
        std::fprintf(stderr, "fnce: FNCE_SIMD=avx2 requested but this build has no AVX2 kernels; using scalar\n");
    }
    return Level::scalar;
#endif
}

Level resolved() {
    static const Level level = detect();
    return level;
}

}  // namespace

Level active_level() { return resolved(); }

std::string level_name() { return resolved() == Level::avx2 ? "avx2" : "scalar"; }

#if defined(FNCE_HAS_AVX2_KERNELS)
#define FNCE_DISPATCH(call_scalar, call_avx2) \
    return resolved() == Level::avx2 ? call_avx2 : call_scalar
#else
#define FNCE_DISPATCH(call_scalar, call_avx2) return call_scalar
#endif

double dot(const double* a, const double* b, std::size_t n) {
    FNCE_DISPATCH(scalar::dot(a, b, n), avx2::dot(a, b, n));
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
#if defined(FNCE_HAS_AVX2_KERNELS)
    if (resolved() == Level::avx2) {
        avx2::axpy(alpha, x, y, n);
        return;
    }
#endif
    scalar::axpy(alpha, x, y, n);
}

void scale(double* x, double alpha, std::size_t n) {
#if defined(FNCE_HAS_AVX2_KERNELS)
    if (resolved() == Level::avx2) {
        avx2::scale(x, alpha, n);
        return;
    }
#endif
    scalar::scale(x, alpha, n);
}

double sum(const double* x, std::size_t n) {
    FNCE_DISPATCH(scalar::sum(x, n), avx2::sum(x, n));
}

double max_value(const double* x, std::size_t n) {
    FNCE_DISPATCH(scalar::max_value(x, n), avx2::max_value(x, n));
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    FNCE_DISPATCH(scalar::squared_distance(a, b, n), avx2::squared_distance(a, b, n));
}

#undef FNCE_DISPATCH

}  // namespace fnce::kern
