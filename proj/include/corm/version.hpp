#pragma once

namespace corm {
inline constexpr const char* kToolVersion = "0.1.0";
}
