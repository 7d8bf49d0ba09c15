#pragma once

// Thin wrapper over FFTW's complex 2-D transforms.  Plan creation is guarded
// by a global mutex (the FFTW planner is not thread-safe); execution of a
// private plan is safe, so concurrent transforms only serialize on planning.
// FFTW_ESTIMATE keeps planning deterministic.
//
// Sign convention: `forward` is analysis, sum of f(g/G) e^{-2 pi i k.g/G},
// so forward / G^2 recovers trig-poly coefficients; `backward` is synthesis.

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace anosov {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

inline void fft2_inplace(std::vector<std::complex<double>>& data, int rows, int cols,
                         int sign) {
    if (static_cast<std::size_t>(rows) * cols != data.size())
        throw std::invalid_argument("fft2: data size does not match rows*cols");
    fftw_complex* raw = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan = fftw_plan_dft_2d(rows, cols, raw, raw, sign, FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("fft2: planner failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
}

inline void fft2_forward(std::vector<std::complex<double>>& data, int rows, int cols) {
    fft2_inplace(data, rows, cols, FFTW_FORWARD);
}

inline void fft2_backward(std::vector<std::complex<double>>& data, int rows, int cols) {
    fft2_inplace(data, rows, cols, FFTW_BACKWARD);
}

}  // namespace anosov
