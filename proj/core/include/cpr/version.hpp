#ifndef CPR_VERSION_HPP
#define CPR_VERSION_HPP

namespace cpr {

inline constexpr const char* kVersion = "0.1.0";

}

#endif
