#pragma once

namespace ead {

inline constexpr const char* kToolkitVersion = "0.1.0";

}  // namespace ead
