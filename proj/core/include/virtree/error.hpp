#pragma once

#include <stdexcept>
#include <string>

namespace virtree {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace virtree
