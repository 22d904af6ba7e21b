#pragma once

namespace shapeloss {

inline constexpr const char* kEngineVersion = "0.1.0";

}  // namespace shapeloss
