#include "balo/vector_log.hpp"

#include <cmath>

namespace balo::detail {

// Built with -ffast-math when BALO_FV_VECTOR_LOG is on so that GCC maps the
// loop onto glibc's vector log (libmvec, 1 ulp).  Inputs are finite and
// positive here: callers reject negative densities beforehand.
void log_shifted(const double* __restrict in, double* __restrict out, std::size_t n,
                 double shift) {
  for (std::size_t q = 0; q < n; ++q) out[q] = std::log(in[q] + shift);
}

}  // namespace balo::detail
