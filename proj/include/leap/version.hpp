#pragma once

namespace leap {

inline constexpr const char* kEngineVersion = "0.1.0";

}  // namespace leap
