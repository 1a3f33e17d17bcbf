#pragma once

namespace treid {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace treid
