#pragma once

#define RECOKIT_VERSION_MAJOR 0
#define RECOKIT_VERSION_MINOR 1
#define RECOKIT_VERSION_PATCH 0

namespace recokit {

inline constexpr const char* version_string() { return "0.1.0"; }

}  // namespace recokit
