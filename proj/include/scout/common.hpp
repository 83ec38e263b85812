#pragma once

#include <stdexcept>
#include <string>

namespace scout {

[[noreturn]] inline void fail(const std::string& msg) {
    throw std::runtime_error(msg);
}

// the const char* overload keeps passing checks free of string construction
inline void check(bool cond, const char* msg) {
    if (!cond) fail(msg);
}

inline void check(bool cond, const std::string& msg) {
    if (!cond) fail(msg);
}

}  // namespace scout
