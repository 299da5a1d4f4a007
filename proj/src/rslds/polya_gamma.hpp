#pragma once

#include "rng.hpp"

namespace rslds {

// PG(b, c) with integer-valued b; b = 0 is the point mass at zero.
struct PolyaGammaParams {
  int b = 1;
  double c = 0.0;
};

// Exact draw. Integer b is realized as a sum of b independent PG(1, c)
// draws, each via the alternating-series rejection method.
double sample_pg(const PolyaGammaParams& params, RandomStream& rng);

// b/(2c) tanh(c/2), with the continuous limit b/4 at c = 0.
double pg_mean(const PolyaGammaParams& params);

// Var[PG(b, c)].
double pg_variance(const PolyaGammaParams& params);

}  // namespace rslds
