#pragma once

namespace qnoise {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qnoise
