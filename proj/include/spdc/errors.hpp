#pragma once

#include <stdexcept>
#include <string>

namespace spdc {

/// Invalid configuration or violated operation precondition. The message
/// names the offending value and the bound it violates.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spdc
