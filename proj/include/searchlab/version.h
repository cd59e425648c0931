#ifndef SEARCHLAB_VERSION_H
#define SEARCHLAB_VERSION_H

namespace searchlab {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace searchlab

#endif  // SEARCHLAB_VERSION_H
