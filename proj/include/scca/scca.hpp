#ifndef SCCA_SCCA_HPP
#define SCCA_SCCA_HPP

#include "scca/data.hpp"
#include "scca/error.hpp"
#include "scca/gradient.hpp"
#include "scca/greedy.hpp"
#include "scca/linalg.hpp"
#include "scca/moments.hpp"
#include "scca/one_step.hpp"
#include "scca/random.hpp"
#include "scca/simulation.hpp"
#include "scca/stats.hpp"

namespace scca {
inline constexpr const char* kVersion = "0.1.0";
}  // namespace scca

#endif  // SCCA_SCCA_HPP
