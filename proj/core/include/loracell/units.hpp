#pragma once

#include <cmath>

// All dB <-> linear conversions in the project go through these two
// functions. Powers expressed in dBm convert to linear milliwatts with the
// same rule, so every linear power in the code base is in mW.

namespace loracell {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace loracell
