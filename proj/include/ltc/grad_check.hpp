#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ltc/tape.hpp"

namespace ltc {

// max over coordinates of |ad - fd| / max(1, |fd|), with fd the central
// difference (f(x+h) - f(x-h)) / 2h. Throws on non-finite fn values.
double finite_diff_check(const std::function<double(const std::vector<double>&)>& fn,
                         const std::vector<double>& point,
                         const std::vector<double>& ad_grad, double h);

// One reverse-mode-vs-finite-difference comparison: `init` is the point
// (split across parameter leaves), `graph` rebuilds the scalar function.
struct CheckInstance {
  std::vector<Tensor> init;
  std::function<NodeId(Tape&, const std::vector<NodeId>&)> graph;
};

// Relative error of the instance. `min_margin` guards against finite
// differences straddling a relu/max/nearest-neighbor switch: instances
// whose smallest kink margin falls below it are rejected with an error
// (generators redraw instead of checking at a nondifferentiable point).
double run_fd_instance(const CheckInstance& inst, double h, double min_margin);

// Smallest distance from any recorded relu input to zero, any column-max
// to its runner-up, and any nearest-neighbor assignment to switching.
double tape_kink_margin(const Tape& tape);

struct SuiteCheckResult {
  std::string name;
  double worst_rel_err = 0.0;
  double tolerance = 1e-4;
  bool pass = false;
};

struct GradcheckOptions {
  uint64_t seed = 0;
  int instances = 100;  // random instances per named check
  double h = 1e-5;
  double tolerance = 1e-4;
  bool sabotage = false;  // test hook: corrupt reverse-mode grads, all checks must fail
};

// Every differentiable primitive plus every network forward composed with
// every loss, each over `instances` random instances.
std::vector<SuiteCheckResult> run_gradcheck_suite(const GradcheckOptions& opt);

}  // namespace ltc
