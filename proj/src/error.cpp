#include "dlab/error.hpp"

namespace dlab {

Error::Error(std::string module, std::string op, const std::string& what)
    : std::runtime_error(module + "::" + op + ": " + what),
      module_(std::move(module)),
      op_(std::move(op)) {}

}  // namespace dlab
