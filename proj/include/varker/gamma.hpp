#pragma once

namespace varker {

/// Gamma function via the Lanczos approximation (g = 7, 9 terms) with reflection
/// below 1/2. Relative error is below 1e-13 on (0, 3].
double gamma_fn(double x);

}  // namespace varker
