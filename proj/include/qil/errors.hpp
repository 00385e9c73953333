#pragma once

#include <stdexcept>
#include <string>

namespace qil {

// Bad run configuration (unknown env id, invalid qubit count, mismatched
// demo dataset, unparseable config file). The CLI maps this to exit code 2;
// plain std::invalid_argument / std::runtime_error map to exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qil
