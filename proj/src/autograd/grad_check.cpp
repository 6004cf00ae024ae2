#include "qot/autograd/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <sstream>

#include "qot/core/error.hpp"

namespace qot::ag {

bool GradCheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const GradCheckEntry& e) { return e.pass; });
}

double GradCheckReport::max_rel_err() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.max_rel_err);
  return m;
}

std::string GradCheckReport::to_text() const {
  std::ostringstream os;
  for (const auto& e : entries) {
    os << e.name << '\t' << std::scientific << std::setprecision(3) << e.max_rel_err << '\t'
       << (e.pass ? "PASS" : "FAIL") << '\n';
  }
  return os.str();
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

namespace {
double evaluate(const std::function<Var()>& f) {
  NoGradGuard guard;
  const Var out = f();
  if (out.value().size() != 1) {
    throw ContractError("grad_check needs a scalar function, got shape " + to_string(out.shape()));
  }
  return out.value()[0];
}
}  // namespace

GradCheckReport grad_check(const std::function<Var()>& f, std::span<const NamedVar> params, double step, double tol) {
  for (const auto& p : params) {
    if (p.var.value().dtype() != DType::F64) throw ContractError("grad_check parameter " + p.name + " is not f64");
    if (!p.var.requires_grad()) throw ContractError("grad_check parameter " + p.name + " does not require grad");
  }
  for (auto p : params) p.var.zero_grad();
  const Var loss = f();
  backward(loss);
  std::vector<Tensor> analytic;
  for (const auto& p : params) analytic.push_back(p.var.grad());

  const double base = loss.value().item();
  const double again = evaluate(f);
  if (std::memcmp(&base, &again, sizeof(double)) != 0) {
    throw OracleInvalidError("grad_check: function is not deterministic (" + std::to_string(base) + " then " +
                             std::to_string(again) + ")");
  }

  GradCheckReport report;
  report.tolerance = tol;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Var var = params[i].var;
    Tensor& value = var.mutable_value();
    double worst = 0.0;
    for (std::size_t n = 0; n < value.size(); ++n) {
      const double saved = value[n];
      value[n] = saved + step;
      const double up = evaluate(f);
      value[n] = saved - step;
      const double down = evaluate(f);
      value[n] = saved;
      const double numeric = (up - down) / (2.0 * step);
      worst = std::max(worst, relative_error(analytic[i][n], numeric));
    }
    report.entries.push_back({params[i].name, worst, worst < tol});
  }
  for (auto p : params) p.var.zero_grad();
  return report;
}

}  // namespace qot::ag
