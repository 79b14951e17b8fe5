#pragma once

namespace conecalc {

inline constexpr const char* kToolName = "conecalc";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace conecalc
