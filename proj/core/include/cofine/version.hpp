#pragma once

namespace cofine {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cofine
