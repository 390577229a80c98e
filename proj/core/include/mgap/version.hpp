#pragma once

namespace mgap {

inline constexpr const char* kArtifactVersion = "1.0.0";

}  // namespace mgap
