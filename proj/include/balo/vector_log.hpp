#pragma once

#include <cstddef>

namespace balo::detail {

/// out[q] = log(in[q] + shift) for in[q] + shift > 0, finite.
void log_shifted(const double* in, double* out, std::size_t n, double shift);

}  // namespace balo::detail
