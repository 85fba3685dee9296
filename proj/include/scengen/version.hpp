#ifndef SCENGEN_VERSION_HPP
#define SCENGEN_VERSION_HPP

namespace scengen {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace scengen

#endif  // SCENGEN_VERSION_HPP
