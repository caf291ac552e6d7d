#include "stfem/problem.hpp"

#include <stdexcept>

namespace stfem {

void ProblemSpec::validate() const {
  box.validate();
  if (!levelset.value) throw std::invalid_argument(name + ": level set is missing");
  if (!diffusion || !diffusion_gradient)
    throw std::invalid_argument(name + ": diffusion coefficient is missing");
  if (!source || !dirichlet || !initial)
    throw std::invalid_argument(name + ": source, boundary or initial data missing");
  if (!(params.gamma > 0.0)) throw std::invalid_argument(name + ": gamma must be positive");
  if (params.gamma1 < 0.0) throw std::invalid_argument(name + ": gamma1 must be non-negative");
  if (params.delta < 0.0) throw std::invalid_argument(name + ": delta must be non-negative");
}

}  // namespace stfem
