#pragma once

#include <string>
#include <vector>

#include "qot/autograd/grad_check.hpp"

namespace qot::harness {

struct CertifiedOp {
  std::string name;
  ag::GradCheckReport report;
};

/// Central-difference certification of every differentiable op (tolerance
/// 1e-4) and of a tiny Q-ViT block and full model (1e-3), all in f64 on fixed
/// seeded inputs. QMHSA key biases have an identically zero gradient (the
/// component softmax cancels a per-row shift), so their entries report
/// max |analytic gradient| and pass when it is below 1e-12.
std::vector<CertifiedOp> certification_suite();

}  // namespace qot::harness
