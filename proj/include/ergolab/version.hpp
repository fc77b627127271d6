#pragma once

namespace ergolab {

inline constexpr const char* kVersion = "ergodic-lab 0.1.0";

}  // namespace ergolab
