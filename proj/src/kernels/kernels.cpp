#include "mcbn/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace mcbn::kernels {
namespace {

Backend detect_default() {
    if (const char* env = std::getenv("MCBN_KERNEL_BACKEND")) {
        const std::string v(env);
        if (v == "scalar") return Backend::Scalar;
        if (v == "avx2") {
            if (!cpu_supports_avx2())
                throw std::runtime_error("MCBN_KERNEL_BACKEND=avx2 but CPU lacks AVX2");
            return Backend::Avx2;
        }
        throw std::runtime_error("unknown MCBN_KERNEL_BACKEND value: " + v);
    }
    return cpu_supports_avx2() ? Backend::Avx2 : Backend::Scalar;
}

Backend& current() {
    static Backend b = detect_default();
    return b;
}

}  // namespace

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Backend active_backend() { return current(); }

void force_backend(Backend b) {
    if (b == Backend::Avx2 && !cpu_supports_avx2())
        throw std::runtime_error("AVX2 backend requested but not supported by this CPU");
    current() = b;
}

std::string_view backend_name(Backend b) {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

const KernelTable& active() {
#if defined(__x86_64__) || defined(_M_X64)
    if (current() == Backend::Avx2) return avx2_table();
#endif
    return scalar_table();
}

}  // namespace mcbn::kernels
