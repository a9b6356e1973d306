#pragma once

namespace suresim {

inline constexpr const char* kArtifactVersion = "0.1.0";

} // namespace suresim
