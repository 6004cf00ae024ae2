#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qot/autograd/var.hpp"

namespace qot::ag {

struct NamedVar {
  std::string name;
  Var var;
};

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  bool pass = false;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double tolerance = 0.0;

  bool passed() const;
  double max_rel_err() const;
  /// One `name<TAB>max_rel_err<TAB>PASS|FAIL` line per parameter.
  std::string to_text() const;
};

/// |a − n| / max(1e-8, |a| + |n|)
double relative_error(double analytic, double numeric);

/// Compare reverse-mode gradients of the scalar `f` with central differences
/// (f(p+h) − f(p−h)) / 2h for every element of every parameter. Parameters must
/// be f64. Throws OracleInvalidError if two identical evaluations of f differ.
GradCheckReport grad_check(const std::function<Var()>& f, std::span<const NamedVar> params, double step = 1e-5,
                           double tol = 1e-4);

}  // namespace qot::ag
