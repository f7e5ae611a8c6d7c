#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace nlsv {

using cdouble = std::complex<double>;

/// Iterative scheme failed to reach its tolerance (eigensolver breakdown,
/// power-iteration or quadrature non-convergence, Picard non-contraction, ...).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Set the worker thread count for FFT plans and parallel loops.
/// Must be called before the first transform on a given grid size.
void set_threads(int k);
int thread_count();

}  // namespace nlsv
