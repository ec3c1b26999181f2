#include "ltc/gemm.hpp"

#include <cstddef>

namespace ltc {

void gemm_acc(const double* a, const double* b, double* c, int n, int k, int m) {
  for (int i = 0; i < n; ++i) {
    const double* ai = a + static_cast<size_t>(i) * k;
    double* ci = c + static_cast<size_t>(i) * m;
    for (int p = 0; p < k; ++p) {
      const double ap = ai[p];
      const double* bp = b + static_cast<size_t>(p) * m;
      for (int j = 0; j < m; ++j) ci[j] += ap * bp[j];
    }
  }
}

void transpose(const double* in, double* out, int rows, int cols) {
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      out[static_cast<size_t>(j) * rows + i] = in[static_cast<size_t>(i) * cols + j];
}

}  // namespace ltc
