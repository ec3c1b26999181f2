#pragma once

namespace ltc {

// C (n x m) += A (n x k) * B (k x m), all row-major. Accumulation order is
// fixed (i, p, j loops), so results are deterministic for a given build.
void gemm_acc(const double* a, const double* b, double* c, int n, int k, int m);

// out (n x k) = transpose of in (k x n)
void transpose(const double* in, double* out, int rows, int cols);

}  // namespace ltc
