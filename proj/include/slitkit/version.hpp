#pragma once

namespace slitkit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace slitkit
