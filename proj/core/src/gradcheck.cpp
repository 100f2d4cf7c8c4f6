/* Copyright 2026 The GRoIE Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "groie/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "groie/errors.hpp"

namespace groie {

double GradCheckReport::max_rel_err() const {
  double m = 0.0;
  for (const auto& p : params) m = std::max(m, p.max_rel_err);
  return m;
}

std::string GradCheckReport::table() const {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-48s %12s %12s %8s\n", "parameter", "max_abs_err",
                "max_rel_err", "worst");
  out += line;
  for (const auto& p : params) {
    std::snprintf(line, sizeof line, "%-48s %12.3e %12.3e %8lld %s\n", p.name.c_str(),
                  p.max_abs_err, p.max_rel_err, static_cast<long long>(p.worst_index),
                  p.max_rel_err < tol ? "ok" : "FAIL");
    out += line;
  }
  std::snprintf(line, sizeof line, "overall: %s (max rel err %.3e, tol %.1e)\n",
                pass ? "PASS" : "FAIL", max_rel_err(), tol);
  out += line;
  return out;
}

namespace {
double evaluate(const ScalarFn& fn) {
  Tape tape;
  Var out = fn(tape);
  if (out.value().numel() != 1) throw UsageError("gradcheck: function must return a scalar");
  return out.value()[0];
}
}  // namespace

GradCheckReport check_gradients(const ScalarFn& fn, std::span<Parameter* const> params,
                                double eps, double tol) {
  GradCheckReport report;
  report.tol = tol;

  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    Var out = fn(tape);
    tape.backward(out);
  }
  const double base1 = evaluate(fn);
  const double base2 = evaluate(fn);
  if (base1 != base2) throw UsageError("gradcheck: function is not deterministic");

  for (Parameter* p : params) {
    ParamGradError err;
    err.name = p->name;
    for (std::int64_t i = 0; i < p->value.numel(); ++i) {
      const double orig = p->value[i];
      p->value[i] = orig + eps;
      const double fp = evaluate(fn);
      p->value[i] = orig - eps;
      const double fm = evaluate(fn);
      p->value[i] = orig;
      const double numeric = (fp - fm) / (2.0 * eps);
      const double analytic = p->grad[i];
      const double abs_err = std::abs(analytic - numeric);
      const double rel_err =
          abs_err / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      if (rel_err > err.max_rel_err || err.worst_index < 0) {
        err.max_rel_err = std::max(err.max_rel_err, rel_err);
        err.worst_index = i;
      }
      err.max_abs_err = std::max(err.max_abs_err, abs_err);
    }
    if (!(err.max_rel_err < tol)) report.pass = false;
    report.params.push_back(std::move(err));
  }
  return report;
}

}  // namespace groie
