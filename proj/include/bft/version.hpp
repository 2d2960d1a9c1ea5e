#pragma once

namespace bft {

inline constexpr const char* version = "0.1.0";

}  // namespace bft
