#pragma once

namespace vpq {

inline constexpr const char* kCliVersion = "0.1.0";

}  // namespace vpq
